"""JSON encoding of matrices, states, channels, families, ensembles and reports.

Complex numbers are ``[re, im]`` pairs and matrices are stored row-major::

    {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]}

Floats are written with the shortest repr that round-trips, so parsing and
re-serializing canonical output reproduces it byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any, Iterable, Optional

import jsonschema
import numpy as np

from .channels import CqStructure, KrausChannel
from .criteria import KrausExtraction, OndDecomposition
from .errors import QrevError, SchemaError, ValidationError
from .report import CriterionReport, Statement, Verdict
from .states import DiscreteEnsemble, PureStateFamily, as_state

_NUMBER = {"type": "number"}
_COMPLEX = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}
_DIM = {"type": "integer", "minimum": 1}

MATRIX_SCHEMA = {
    "type": "object",
    "required": ["rows", "cols", "data"],
    "properties": {"rows": _DIM, "cols": _DIM, "data": {"type": "array", "items": _COMPLEX}},
}
CHANNEL_SCHEMA = {
    "type": "object",
    "required": ["dim_in", "dim_out", "kraus"],
    "properties": {
        "dim_in": _DIM,
        "dim_out": _DIM,
        "kraus": {"type": "array", "minItems": 1, "items": MATRIX_SCHEMA},
    },
}
FAMILY_SCHEMA = {
    "type": "object",
    "required": ["dim", "vectors"],
    "properties": {
        "dim": _DIM,
        "vectors": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _COMPLEX}},
        "labels": {"type": "array", "items": {"type": "string"}},
    },
}
ENSEMBLE_SCHEMA = {
    "type": "object",
    "required": ["weights", "states"],
    "properties": {
        "weights": {"type": "array", "minItems": 1, "items": _NUMBER},
        "states": {"type": "array", "minItems": 1, "items": MATRIX_SCHEMA},
    },
}
REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "command",
        "inputs_digest",
        "verdict",
        "residuals",
        "witnesses",
        "tolerance",
        "log_base",
        "seed",
        "wall_time_ms",
    ],
    "properties": {
        "command": {"type": "string"},
        "inputs_digest": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "verdict": {"type": "string"},
        "residuals": {"type": "object"},
        "witnesses": {"type": "object"},
        "tolerance": _NUMBER,
        "log_base": {"enum": ["2", "e"]},
        "seed": {"type": ["integer", "null"]},
        "wall_time_ms": {"type": "integer", "minimum": 0},
    },
}

SCHEMAS = {
    "matrix": MATRIX_SCHEMA,
    "state": MATRIX_SCHEMA,
    "channel": CHANNEL_SCHEMA,
    "family": FAMILY_SCHEMA,
    "ensemble": ENSEMBLE_SCHEMA,
    "report": REPORT_SCHEMA,
}


def _pointer(path: Iterable) -> str:
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in path]
    return "/" + "/".join(parts) if parts else ""


def validate(obj: Any, kind: str) -> None:
    """Structural check against the schema for ``kind``; raises :class:`SchemaError`."""
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    err = jsonschema.exceptions.best_match(validator.iter_errors(obj))
    if err is not None:
        raise SchemaError(_pointer(err.absolute_path), err.message)


# ---------------------------------------------------------------------------
# numbers and matrices
# ---------------------------------------------------------------------------


def _real(x) -> float:
    x = float(x)
    return 0.0 if x == 0.0 else x


def _complex(z) -> list[float]:
    z = complex(z)
    return [_real(z.real), _real(z.imag)]


def matrix_to_json(m) -> dict:
    m = np.atleast_2d(np.asarray(m))
    rows, cols = m.shape
    return {"rows": rows, "cols": cols, "data": [_complex(z) for z in m.reshape(-1)]}


def _complex_array(pairs, pointer: str) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.size == 0:
        return np.zeros(0, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise SchemaError(pointer, "non-finite number")
    return arr[..., 0] + 1j * arr[..., 1]


def _matrix(obj, pointer: str) -> np.ndarray:
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    if len(data) != rows * cols:
        raise SchemaError(pointer + "/data", f"expected {rows * cols} entries, got {len(data)}")
    return _complex_array(data, pointer + "/data").reshape(rows, cols)


def matrix_from_json(obj) -> np.ndarray:
    validate(obj, "matrix")
    return _matrix(obj, "")


def state_to_json(rho) -> dict:
    return matrix_to_json(rho)


def state_from_json(obj, tol: float = 1e-10) -> np.ndarray:
    m = matrix_from_json(obj)
    try:
        return as_state(m, tol)
    except QrevError as exc:
        raise ValidationError(str(exc)) from exc


def channel_to_json(ch: KrausChannel) -> dict:
    return {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "kraus": [matrix_to_json(k) for k in ch.kraus]}


def channel_from_json(obj, tol: float = 1e-9) -> KrausChannel:
    validate(obj, "channel")
    ops = [_matrix(k, f"/kraus/{i}") for i, k in enumerate(obj["kraus"])]
    for i, k in enumerate(ops):
        if k.shape != (obj["dim_out"], obj["dim_in"]):
            raise SchemaError(f"/kraus/{i}", f"shape {k.shape} != ({obj['dim_out']}, {obj['dim_in']})")
    ch = KrausChannel(obj["dim_in"], obj["dim_out"], np.stack(ops))
    res = ch.tp_residual()
    if res > tol:
        raise ValidationError(f"sum K^dag K = I violated: residual {res:.3e}, expected <= {tol:g}")
    return ch


def family_to_json(fam: PureStateFamily) -> dict:
    out = {"dim": fam.dim, "vectors": [[_complex(z) for z in v] for v in fam.vectors]}
    if fam.labels is not None:
        out["labels"] = list(fam.labels)
    return out


def family_from_json(obj) -> PureStateFamily:
    validate(obj, "family")
    vecs = []
    for i, v in enumerate(obj["vectors"]):
        if len(v) != obj["dim"]:
            raise SchemaError(f"/vectors/{i}", f"expected {obj['dim']} entries, got {len(v)}")
        vecs.append(_complex_array(v, f"/vectors/{i}"))
    v = np.array(vecs)
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms == 0):
        raise ValidationError(f"family vector {int(np.argmin(norms))} is zero")
    # already-normalized input is kept bit for bit
    unit = np.abs(norms - 1.0) <= 1e-10
    try:
        return PureStateFamily.from_vectors(v, labels=obj.get("labels"), normalize=not unit.all())
    except QrevError as exc:
        raise ValidationError(str(exc)) from exc


def ensemble_to_json(ens: DiscreteEnsemble) -> dict:
    return {"weights": [_real(w) for w in ens.weights], "states": [matrix_to_json(r) for r in ens.states]}


def ensemble_from_json(obj) -> DiscreteEnsemble:
    validate(obj, "ensemble")
    states = [_matrix(s, f"/states/{i}") for i, s in enumerate(obj["states"])]
    try:
        return DiscreteEnsemble(np.array(obj["weights"], dtype=np.float64), np.stack(states))
    except QrevError as exc:
        raise ValidationError(str(exc)) from exc


# ---------------------------------------------------------------------------
# generic encoding
# ---------------------------------------------------------------------------


def to_jsonable(obj: Any) -> Any:
    """Best-effort JSON form of library values, used for report witnesses."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Verdict):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _real(x) if math.isfinite(x) else repr(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return _complex(obj)
    if isinstance(obj, KrausChannel):
        return channel_to_json(obj)
    if isinstance(obj, PureStateFamily):
        return family_to_json(obj)
    if isinstance(obj, DiscreteEnsemble):
        return ensemble_to_json(obj)
    if isinstance(obj, CqStructure):
        return {
            "projectors": [matrix_to_json(p) for p in obj.projectors],
            "sigmas": [matrix_to_json(s) for s in obj.sigmas],
            "ranks": obj.ranks(),
            "residual": to_jsonable(obj.residual),
        }
    if isinstance(obj, OndDecomposition):
        return {
            "components": obj.components,
            "ranks": [q.shape[1] for q in obj.bases],
            "projectors": [matrix_to_json(p) for p in obj.projectors],
            "warnings": obj.warnings,
        }
    if isinstance(obj, KrausExtraction):
        return {
            "kraus": channel_to_json(obj.kraus),
            "ranks": obj.ranks,
            "max_rank": obj.max_rank,
            "state_rank": obj.state_rank,
            "rank_bound": obj.rank_bound,
            "count_bound": obj.count_bound,
            "reversibility_residual": to_jsonable(obj.reversibility_residual),
            "choi_distance": to_jsonable(obj.choi_distance),
            "restricted": obj.restricted,
        }
    if isinstance(obj, Statement):
        return {"passed": obj.passed, "residual": to_jsonable(obj.residual), "note": obj.note}
    if isinstance(obj, CriterionReport):
        return report_body(obj)
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return matrix_to_json(obj)
        if np.iscomplexobj(obj) and np.any(obj.imag != 0):
            return [to_jsonable(x) for x in obj]
        return [to_jsonable(x) for x in (obj.real if np.iscomplexobj(obj) else obj)]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def report_body(rep: CriterionReport) -> dict:
    return {
        "verdict": rep.verdict.value,
        "statements": to_jsonable(rep.statements),
        "m_value": rep.m_value,
        "restricted": rep.restricted,
        "warnings": list(rep.warnings),
        "residuals": to_jsonable(rep.residuals),
        "witnesses": to_jsonable(rep.witnesses),
    }


def dumps(obj: Any, pretty: bool = False) -> str:
    """Canonical text: fixed key order as built, compact separators, trailing newline."""
    if pretty:
        return json.dumps(obj, indent=2, allow_nan=False) + "\n"
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc


def load_file(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def inputs_digest(payloads: Iterable[Any]) -> str:
    """sha256 of the canonical forms of the inputs, in order."""
    h = hashlib.sha256()
    for p in payloads:
        h.update(dumps(p).encode())
    return h.hexdigest()


def envelope(
    command: str,
    inputs: Iterable[Any],
    verdict: str,
    residuals: dict,
    witnesses: dict,
    tolerance: float,
    log_base: str = "2",
    seed: Optional[int] = None,
    wall_time_ms: int = 0,
    **extra,
) -> dict:
    out = {
        "command": command,
        "inputs_digest": inputs_digest(inputs),
        "verdict": verdict,
        "residuals": to_jsonable(residuals),
        "witnesses": to_jsonable(witnesses),
        "tolerance": float(tolerance),
        "log_base": log_base,
        "seed": seed,
        "wall_time_ms": int(wall_time_ms),
    }
    out.update(to_jsonable(extra))
    return out


def report_from_json(obj) -> dict:
    validate(obj, "report")
    return obj
