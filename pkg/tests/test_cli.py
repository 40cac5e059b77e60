import json

import numpy as np
import pytest

from qrev import channels as C
from qrev import cli, io
from qrev import states as st


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(io.dumps(obj))
        return str(path)

    return {
        "deph": write("deph.json", io.channel_to_json(C.dephasing(2))),
        "dep": write("dep.json", io.channel_to_json(C.depolarize_to(np.eye(2) / 2, 2))),
        "basis": write("basis.json", io.family_to_json(st.PureStateFamily.from_vectors(np.eye(2)))),
        "rand": write("rand.json", io.channel_to_json(C.random_channel(3, 3, 2, seed=1))),
        "sigma3": write("sigma3.json", io.state_to_json(st.random_state(3, seed=2))),
        "diag_a": write("a.json", io.state_to_json(np.diag([0.3, 0.7]))),
        "diag_b": write("b.json", io.state_to_json(np.diag([0.6, 0.4]))),
        "plus": write("plus.json", io.state_to_json(np.full((2, 2), 0.5))),
        "mixed": write("mixed.json", io.state_to_json(np.eye(2) / 2)),
        "ens": write("ens.json", io.ensemble_to_json(st.random_ensemble(2, 3, seed=4))),
        "bad": write("bad.json", io.matrix_to_json(np.diag([0.6, 0.3]))),
        "dir": str(tmp_path),
    }


def run(capsys, *argv):
    code = cli.main(list(argv) + ["--no-timing"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_criterion_dephasing(files, capsys):
    code, rep = run(capsys, "criterion", "--channel", files["deph"], "--family", files["basis"])
    assert code == 0 and rep["verdict"] == "Reversible"
    io.report_from_json(rep)


def test_criterion_not_reversible(files, capsys):
    code, rep = run(capsys, "criterion", "--channel", files["dep"], "--family", files["basis"])
    assert code == 1 and rep["verdict"] == "NotReversible"


def test_petz_fixed_point(files, capsys):
    code, rep = run(capsys, "petz", "--channel", files["rand"], "--sigma", files["sigma3"])
    assert code == 0 and rep["residuals"]["fixed_point"] < 1e-8
    petz_ch = io.channel_from_json(rep["witnesses"]["petz"])
    assert petz_ch.dim_in == 3


def test_check_pair_exit_codes(files, capsys):
    code, rep = run(capsys, "check-pair", "--channel", files["deph"], "--rho", files["diag_a"], "--sigma", files["diag_b"])
    assert code == 0
    code, rep = run(capsys, "check-pair", "--channel", files["deph"], "--rho", files["plus"], "--sigma", files["mixed"])
    assert code == 1 and rep["residuals"]["entropy_gap"] == pytest.approx(1.0)


def test_input_errors_exit_3(files, capsys):
    assert cli.main(["petz", "--channel", files["deph"], "--sigma", files["bad"]]) == 3
    assert "trace = 0.9" in capsys.readouterr().err
    assert cli.main(["petz", "--channel", files["deph"], "--sigma", files["dir"] + "/missing.json"]) == 3
    assert cli.main(["check-pair", "--channel", files["deph"], "--rho", files["sigma3"], "--sigma", files["sigma3"]]) == 3


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert cli.main(["gen", "channel", "--din", "3", "--dout", "3", "--kraus", "2", "--seed", "7", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert io.channel_from_json(json.loads(a.read_text())).is_cptp()


def test_reports_are_byte_identical(files, capsys):
    argv = ["criterion", "--channel", files["deph"], "--family", files["basis"], "--no-timing"]
    cli.main(argv)
    first = capsys.readouterr().out
    cli.main(argv)
    assert capsys.readouterr().out == first


def test_tol_resolution(monkeypatch):
    monkeypatch.setenv("QREV_TOL", "1e-6")
    assert cli.resolve_tol(None) == 1e-6
    assert cli.resolve_tol(1e-3) == 1e-3
    monkeypatch.delenv("QREV_TOL")
    assert cli.resolve_tol(None) == 1e-9


@pytest.mark.parametrize(
    "argv, code",
    [
        (["validate-channel", "--channel", "{deph}"], 0),
        (["complement", "--channel", "{rand}"], 0),
        (["check-family", "--channel", "{deph}", "--family", "{basis}"], 0),
        (["check-family", "--channel", "{deph}", "--ensemble", "{ens}"], 1),
        (["ond", "--family", "{basis}"], 0),
        (["cq-structure", "--channel", "{deph}"], 0),
        (["cq-structure", "--channel", "{rand}"], 1),
        (["gram", "--channel", "{deph}", "--family", "{basis}"], 0),
        (["capacity", "--channel", "{deph}"], 0),
        (["capacity", "--channel", "{dep}"], 1),
        (["holevo", "--ensemble", "{ens}", "--channel", "{deph}"], 0),
        (["demo-strict", "--samples", "5", "--seed", "1"], 0),
    ],
)
def test_exit_code_matches_verdict(files, capsys, argv, code):
    got, rep = run(capsys, *[a.format(**files) for a in argv])
    assert got == code
    assert cli.EXIT[rep["verdict"]] == got
    io.report_from_json(rep)


def test_pretty_output_has_table(files, capsys):
    assert cli.main(["capacity", "--channel", files["deph"], "--pretty", "--no-timing"]) == 0
    out = capsys.readouterr().out
    assert "verdict" in out.splitlines()[-5:][0] or "verdict  " in out
