"""Command-line front end.

Every command prints one JSON report on stdout.  Exit codes: 0 passed or
Reversible, 1 failed or NotReversible, 2 Unknown, 3 bad input.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import channels as chn
from . import criteria as crit
from . import io
from . import linalg as la
from . import petz
from . import states as st
from .divergences import holevo_chi_forms, output_ensemble, parse_base
from .errors import QrevError
from .report import CriterionReport, Verdict

EXIT = {"Reversible": 0, "Pass": 0, "NotReversible": 1, "Fail": 1, "Unknown": 2}
EXIT_INPUT = 3
DEFAULT_TOL = 1e-9


def _pass(ok: Optional[bool]) -> str:
    return {True: "Pass", False: "Fail", None: "Unknown"}[ok]


class Context:
    """Parsed flags plus the raw JSON of every input file, in read order."""

    def __init__(self, args):
        self.args = args
        self.inputs = []
        self.tol = resolve_tol(args.tol)
        self.base_name = args.log_base
        self.base = parse_base(args.log_base)

    def _load(self, path):
        obj = io.load_file(path)
        self.inputs.append(obj)
        return obj

    def channel(self, path):
        return io.channel_from_json(self._load(path))

    def state(self, path):
        return io.state_from_json(self._load(path))

    def family(self, path):
        return io.family_from_json(self._load(path))

    def ensemble(self, path):
        return io.ensemble_from_json(self._load(path))

    def weights(self, text):
        if text is None:
            return None
        w = [float(x) for x in text.split(",")]
        self.inputs.append(w)
        return w


def resolve_tol(flag: Optional[float]) -> float:
    if flag is not None:
        return flag
    env = os.environ.get("QREV_TOL")
    return float(env) if env else DEFAULT_TOL


# ---------------------------------------------------------------------------
# commands; each returns (verdict, residuals, witnesses, extra)
# ---------------------------------------------------------------------------


def _from_report(rep: CriterionReport):
    extra = {
        "statements": rep.statements,
        "m_value": rep.m_value,
        "restricted": rep.restricted,
        "warnings": rep.warnings,
    }
    return rep.verdict.value, rep.residuals, rep.witnesses, extra


def cmd_validate_channel(ctx: Context):
    raw = ctx._load(ctx.args.channel)
    io.validate(raw, "channel")
    ops = [io.matrix_from_json(k) for k in raw["kraus"]]
    ch = chn.KrausChannel(raw["dim_in"], raw["dim_out"], np.stack(ops))
    res = ch.tp_residual()
    ok = res <= ctx.tol
    wit = {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "n_kraus": ch.n_kraus}
    if ok:
        wit["choi_rank"] = chn.minimal_kraus(ch).n_kraus
    return _pass(ok), {"tp": res}, wit, {}


def cmd_complement(ctx: Context):
    ch = ctx.channel(ctx.args.channel)
    comp = chn.complementary(ch)
    return "Pass", {"tp": comp.tp_residual()}, {"complement": comp}, {}


def cmd_petz(ctx: Context):
    ch = ctx.channel(ctx.args.channel)
    sigma = ctx.state(ctx.args.sigma)
    rec = petz.petz_channel(ch, sigma, ctx.tol)
    fixed = petz.recovery_residual(ch, rec, sigma)
    return _pass(fixed <= max(ctx.tol, 1e-8)), {"fixed_point": fixed, "tp": rec.tp_residual()}, {"petz": rec}, {}


def cmd_check_pair(ctx: Context):
    ch = ctx.channel(ctx.args.channel)
    rho = ctx.state(ctx.args.rho)
    sigma = ctx.state(ctx.args.sigma)
    diag = petz.check_pair(ch, rho, sigma, tol=ctx.tol, base=ctx.base)
    warnings = []
    if diag.agree:
        verdict = Verdict.from_bool(diag.reversible).value
    else:
        verdict = Verdict.UNKNOWN.value
        warnings.append("entropy gap and recovery residual disagree")
    res = {"entropy_gap": diag.entropy_gap, "recovery_residual": diag.recovery_residual}
    return verdict, res, {}, {"warnings": warnings}


def _family_or_ensemble(ctx: Context):
    if ctx.args.family:
        return ctx.family(ctx.args.family)
    if ctx.args.ensemble:
        return ctx.ensemble(ctx.args.ensemble)
    raise QrevError("one of --family or --ensemble is required")


def cmd_check_family(ctx: Context):
    ch = ctx.channel(ctx.args.channel)
    fam = _family_or_ensemble(ctx)
    rep = petz.check_family(ch, fam, ctx.weights(ctx.args.weights), ctx.tol)
    verdict, res, wit, extra = _from_report(rep)
    res["member_residuals"] = wit.pop("member_residuals")
    return verdict, res, wit, extra


def cmd_ond(ctx: Context):
    fam = ctx.family(ctx.args.family)
    ond = crit.ond_decompose(fam, ctx.args.edge_tol)
    extra = {"warnings": ond.warnings, "blocks": len(ond)}
    return "Pass", {}, {"ond": ond}, extra


def cmd_criterion(ctx: Context):
    ch = ctx.channel(ctx.args.channel)
    fam = ctx.family(ctx.args.family)
    if st.is_orthonormal(fam) and len(fam) == fam.dim:
        rep = crit.check_orthogonal_criterion(ch, fam, ctx.tol)
        form = "orthogonal"
    else:
        rep = crit.check_general_criterion(ch, fam, ctx.tol, seed=ctx.args.seed or 0)
        form = "general"
    verdict, res, wit, extra = _from_report(rep)
    extra["form"] = form
    return verdict, res, wit, extra


def cmd_cq_structure(ctx: Context):
    ch = ctx.channel(ctx.args.channel)
    target = chn.complementary(ch) if ctx.args.complement else ch
    cq = chn.detect_cq(target, ctx.tol)
    if cq is None:
        return "Fail", {}, {}, {}
    return "Pass", {"choi_distance": cq.residual}, {"cq": cq}, {}


def cmd_gram(ctx: Context):
    ch = ctx.channel(ctx.args.channel)
    fam = ctx.family(ctx.args.family)
    rec = crit.gram_reconstruct(ch, fam, ctx.tol)
    if rec is None:
        return "NotReversible", {}, {}, {}
    verdict = "Reversible" if rec.witness is not None else "Unknown"
    wit = {"projectors": list(rec.projectors), "gram": rec.gram}
    res = {}
    if rec.witness is not None:
        wit["W"] = rec.witness
        res["equivalence"] = chn.equivalence_residual(ch, rec.channel, rec.witness)
    return verdict, res, wit, {}


def cmd_capacity(ctx: Context):
    ch = ctx.channel(ctx.args.channel)
    fam = ctx.family(ctx.args.family) if ctx.args.family else None
    rep = crit.capacity_saturation_check(ch, fam, ctx.tol, base=ctx.base)
    verdict, res, wit, extra = _from_report(rep)
    wit.pop("criterion", None)
    return verdict, res, wit, extra


def cmd_holevo(ctx: Context):
    ens = ctx.ensemble(ctx.args.ensemble)
    div, ent = holevo_chi_forms(ens, ctx.base)
    res = {"chi": div, "chi_entropy_form": ent}
    ok = not math.isfinite(div) or abs(div - ent) <= 1e-8
    if ctx.args.channel:
        ch = ctx.channel(ctx.args.channel)
        out_div, _ = holevo_chi_forms(output_ensemble(ch, ens), ctx.base)
        res["chi_output"] = out_div
        res["chi_loss"] = div - out_div
    return _pass(ok), res, {}, {}


def _sample_strict(dims, n, rng):
    d = dims[0] * dims[1]
    while True:
        vecs = np.array([st.random_unit_vector(d, rng) for _ in range(n)])
        ens = st.DiscreteEnsemble(st.random_probability(n, rng), np.einsum("ia,ib->iab", vecs, vecs.conj()))
        if la.rank_tol(st.average_state(ens)) == d:
            return ens


def cmd_demo_strict(ctx: Context):
    dims = tuple(ctx.args.dims)
    rng = np.random.default_rng(ctx.args.seed)
    n = ctx.args.members or dims[0] * dims[1] + 1
    decrease, concavity = [], []
    for _ in range(ctx.args.samples):
        ens = _sample_strict(dims, n, rng)
        decrease.append(crit.strict_decrease_gap(ens, dims, traced=0, base=ctx.base))
        concavity.append(crit.strict_concavity_gap(ens, dims, base=ctx.base))
    agreement = max(abs(a - b) for a, b in zip(decrease, concavity))
    ok = min(decrease) > 1e-10 and min(concavity) > 1e-10 and agreement <= 1e-8
    res = {"min_decrease_gap": min(decrease), "min_concavity_gap": min(concavity), "max_disagreement": agreement}
    return _pass(ok), res, {}, {"samples": ctx.args.samples}


def cmd_gen(ctx: Context):
    a = ctx.args
    seed = a.seed
    if a.what == "channel":
        kind = a.kind or "random"
        if kind == "random":
            obj = chn.random_channel(a.din, a.dout or a.din, a.kraus, seed)
        elif kind == "identity":
            obj = chn.identity(a.din)
        elif kind == "dephasing":
            obj = chn.dephasing(a.din)
        elif kind == "depolarizing":
            obj = chn.depolarize_to(st.maximally_mixed(a.dout or a.din), a.din)
        else:
            raise QrevError(f"unknown channel kind {kind!r}")
        return io.channel_to_json(obj)
    if a.what == "state":
        if a.kind == "maximally-mixed":
            return io.state_to_json(st.maximally_mixed(a.dim))
        return io.state_to_json(st.random_state(a.dim, a.rank, seed))
    if a.what == "family":
        if a.kind == "basis":
            return io.family_to_json(st.PureStateFamily.from_vectors(np.eye(a.dim)))
        return io.family_to_json(st.random_pure_family(a.dim, a.n, seed))
    return io.ensemble_to_json(st.random_ensemble(a.dim, a.n, a.rank, seed))


COMMANDS = {
    "validate-channel": cmd_validate_channel,
    "complement": cmd_complement,
    "petz": cmd_petz,
    "check-pair": cmd_check_pair,
    "check-family": cmd_check_family,
    "ond": cmd_ond,
    "criterion": cmd_criterion,
    "cq-structure": cmd_cq_structure,
    "gram": cmd_gram,
    "capacity": cmd_capacity,
    "holevo": cmd_holevo,
    "demo-strict": cmd_demo_strict,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="tolerance (default $QREV_TOL or 1e-9)")
    common.add_argument("--log-base", choices=["2", "e"], default="2")
    common.add_argument("--seed", type=int, default=None)
    out = common.add_mutually_exclusive_group()
    out.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    out.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON plus a summary table")
    common.add_argument("--no-timing", action="store_true", help="report wall_time_ms as 0")
    common.set_defaults(pretty=False)

    parser = argparse.ArgumentParser(prog="qrev", description="Reversibility checks for quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    add("validate-channel", "check that Kraus operators form a channel").add_argument("--channel", required=True)
    add("complement", "complementary channel from the minimal dilation").add_argument("--channel", required=True)
    p = add("petz", "Petz recovery channel for a reference state")
    p.add_argument("--channel", required=True)
    p.add_argument("--sigma", required=True)
    p = add("check-pair", "relative-entropy gap against Petz recovery")
    p.add_argument("--channel", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p = add("check-family", "Petz recovery on a family or ensemble")
    p.add_argument("--channel", required=True)
    p.add_argument("--family")
    p.add_argument("--ensemble")
    p.add_argument("--weights", help="comma separated, for --family")
    p = add("ond", "orthogonal block decomposition of a pure family")
    p.add_argument("--family", required=True)
    p.add_argument("--edge-tol", type=float, default=crit.EDGE_TOL)
    p = add("criterion", "structural reversibility criterion on a pure family")
    p.add_argument("--channel", required=True)
    p.add_argument("--family", required=True)
    p = add("cq-structure", "detect classical-quantum form")
    p.add_argument("--channel", required=True)
    p.add_argument("--complement", action="store_true", help="inspect the complementary channel")
    p = add("gram", "Gram-matrix normal form of a reversible channel")
    p.add_argument("--channel", required=True)
    p.add_argument("--family", required=True)
    p = add("capacity", "does the Holevo capacity reach log dim_in")
    p.add_argument("--channel", required=True)
    p.add_argument("--family")
    p = add("holevo", "Holevo quantity of an ensemble, optionally after a channel")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--channel")
    p = add("demo-strict", "sampled strict-decrease and strict-concavity gaps")
    p.add_argument("--dims", type=int, nargs=2, default=[2, 3], metavar=("DA", "DB"))
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--members", type=int, default=None)

    g = add("gen", "seeded instance generators")
    g.add_argument("what", choices=["channel", "state", "family", "ensemble"])
    g.add_argument("--kind", default=None, help="channel: random|identity|dephasing|depolarizing; "
                   "state: random|maximally-mixed; family: random|basis")
    g.add_argument("--din", type=int, default=2)
    g.add_argument("--dout", type=int, default=None)
    g.add_argument("--kraus", type=int, default=2)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--rank", type=int, default=None)
    g.add_argument("--n", type=int, default=3)
    g.add_argument("--out", help="write to this path instead of stdout")
    return parser


def _table(report: dict) -> str:
    rows = [("command", report["command"]), ("verdict", report["verdict"])]
    for k, v in report["residuals"].items():
        if isinstance(v, float):
            rows.append((k, f"{v:.3e}"))
    for k, s in report.get("statements", {}).items():
        flag = {True: "pass", False: "fail", None: "unknown"}[s["passed"]]
        rows.append((f"statement {k}", f"{flag} {s['note']}".rstrip()))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ctx = Context(args)
        if args.command == "gen":
            text = io.dumps(cmd_gen(ctx), args.pretty)
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return 0
        start = time.perf_counter()
        verdict, residuals, witnesses, extra = COMMANDS[args.command](ctx)
        elapsed = 0 if args.no_timing else round((time.perf_counter() - start) * 1000)
        report = io.envelope(
            args.command,
            ctx.inputs,
            verdict,
            residuals,
            witnesses,
            ctx.tol,
            log_base=args.log_base,
            seed=args.seed,
            wall_time_ms=elapsed,
            **extra,
        )
    except (QrevError, OSError, ArithmeticError) as exc:
        print(f"qrev {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(io.dumps(report, args.pretty))
    if args.pretty:
        sys.stdout.write(_table(report) + "\n")
    return EXIT[verdict]


if __name__ == "__main__":
    sys.exit(main())
