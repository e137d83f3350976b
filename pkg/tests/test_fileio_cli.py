import json
import logging
import re
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accessinfo import cli
from accessinfo.core import StateError, random_ensemble
from accessinfo.fileio import (
    Experiment,
    ParseError,
    UnknownNameError,
    dump_experiment,
    experiment_to_dict,
    load_experiment,
    parse_experiment,
)
from accessinfo.measurement import MeasurementError, random_povm, random_projective, trine_povm

from oracles import H2_SIN2_PI_8


def run(capsys, *argv):
    code = cli.main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def doc(**over):
    base = {"version": 1, "members": [{"p": 0.5, "ket": [1, 0]}, {"p": 0.5, "ket": [0, 1]}]}
    base.update(over)
    return base


# --- file format ---------------------------------------------------------------------


def test_load_fixtures(fixtures_dir):
    exp = load_experiment(fixtures_dir / "bb84.json")
    assert exp.ensemble.size == 4
    assert set(exp.measurements) >= {"Z", "X", "I", "trine"}
    assert len(exp.chain("ZXZ")) == 3
    zp = load_experiment(fixtures_dir / "zero_plus.json")
    np.testing.assert_allclose(zp.ensemble.probs, [0.5, 0.5], atol=0)


def test_complex_amplitudes():
    exp = parse_experiment(doc(members=[{"p": 1, "ket": [[0.6, 0], [0, 0.8]]}]))
    np.testing.assert_allclose(exp.ensemble.states[0], [[0.36, -0.48j], [0.48j, 0.64]], atol=1e-15)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_round_trip(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 4))
    e = random_ensemble(d, int(rng.integers(1, 5)), rng)
    meas = {"P": random_projective(d, rng, int(rng.integers(1, d + 1))), "E": random_povm(d, 3, rng)}
    exp = Experiment(e, meas, {"PP": ("P", "P")})
    back = parse_experiment(json.loads(json.dumps(experiment_to_dict(exp))))
    np.testing.assert_allclose(back.ensemble.probs, e.probs, atol=1e-12)
    for a, b in zip(back.ensemble.states, e.states):
        np.testing.assert_allclose(a, b, atol=1e-12)
    for a, b in zip(back.measurements["P"].projectors, meas["P"].projectors):
        np.testing.assert_allclose(a, b, atol=1e-12)
    for a, b in zip(back.measurements["E"].elements, meas["E"].elements):
        np.testing.assert_allclose(a, b, atol=1e-12)
    assert back.chains == {"PP": ("P", "P")}


def test_dump_and_load(tmp_path, bb84):
    exp = Experiment(bb84, {"trine": trine_povm()})
    path = tmp_path / "e.json"
    dump_experiment(exp, path)
    back = load_experiment(path)
    for a, b in zip(back.measurements["trine"].elements, trine_povm().elements):
        np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("bad", [
    [],
    {"members": []},
    doc(version=2),
    doc(members=[{"ket": [1, 0]}]),
    doc(members=[{"p": 1, "ket": [1, 0], "rho": [[1, 0], [0, 0]]}]),
    doc(members=[{"p": "half", "ket": [1, 0]}]),
    doc(members=[{"p": True, "ket": [1, 0]}]),
    doc(members=[{"p": 1, "ket": ["a", 0]}]),
    doc(members=[{"p": 1, "rho": [[1, 0]]}]),
    doc(members=[{"p": 0.5, "ket": [1, 0]}, {"p": 0.5, "ket": [1, 0, 0]}]),
    doc(measurements={"Z": {"basis": [[1, 0], [0, 1]], "povm": []}}),
    doc(measurements={"Z": {"weird": [[1]]}}),
    doc(measurements={"Z": {"basis": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}}),
    doc(chains={"c": "Z"}),
    doc(chains={"c": []}),
])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_experiment(bad)


def test_invalid_physics():
    with pytest.raises(StateError):
        parse_experiment(doc(members=[{"p": 1, "ket": [1, 1]}]))
    with pytest.raises(StateError):
        parse_experiment(doc(members=[{"p": 1, "rho": [[1.5, 0], [0, -0.5]]}]))
    with pytest.raises(StateError):
        parse_experiment(doc(members=[{"p": 0.5, "ket": [1, 0]}]))
    with pytest.raises(MeasurementError):
        parse_experiment(doc(measurements={"Z": {"projectors": [[[1, 0], [0, 0]]]}}))


def test_renormalization_warning(caplog):
    eps = 1e-7
    with caplog.at_level(logging.WARNING):
        exp = parse_experiment(doc(members=[{"p": 1, "ket": [1 + eps, 0]}]))
    assert "renormalizing" in caplog.text
    assert np.trace(exp.ensemble.states[0]).real == pytest.approx(1, abs=1e-15)
    caplog.clear()
    with caplog.at_level(logging.WARNING):
        parse_experiment(doc(members=[{"p": 1, "ket": [1 + 1e-12, 0]}]))
    assert caplog.text == ""


def test_unknown_names(fixtures_dir):
    exp = load_experiment(fixtures_dir / "bb84.json")
    with pytest.raises(UnknownNameError, match="available"):
        exp.measurement("Y")
    with pytest.raises(UnknownNameError):
        exp.chain("nope")
    bad = Experiment(exp.ensemble, exp.measurements, {"T": ("Z", "trine")})
    with pytest.raises(UnknownNameError, match="POVM"):
        bad.chain("T")


# --- command line --------------------------------------------------------------------


def _number(text, label):
    m = re.search(rf"^\s*{re.escape(label)}\s+(-?\d+\.\d+) bits", text, re.M)
    assert m, f"{label!r} not found in output"
    return float(m.group(1))


def test_chi_fixtures(capsys, fixtures_dir):
    for name, expected in [("orthogonal", 1.0), ("bb84", 1.0), ("single", 0.0), ("zero_plus", H2_SIN2_PI_8)]:
        code, out, _ = run(capsys, "chi", "-i", str(fixtures_dir / f"{name}.json"), "--json")
        assert code == 0
        assert json.loads(out)["chi"] == pytest.approx(expected, abs=1e-9)


def test_measure_bb84_z(capsys, fixtures_dir):
    code, out, _ = run(capsys, "measure", "Z", "-i", str(fixtures_dir / "bb84.json"))
    assert code == 0
    assert _number(out, "I") == 0.5
    assert _number(out, "I + S(X':Q'|A')") == 1.0
    assert "Outcome table" in out


def test_measure_orthogonal(capsys, fixtures_dir):
    code, out, _ = run(capsys, "measure", "Z", "-i", str(fixtures_dir / "orthogonal.json"), "--json")
    q = json.loads(out)["measure"]["quantities"]
    assert q["I"] == pytest.approx(1.0, abs=1e-12)
    assert q["S(X':Q'|A')"] == pytest.approx(0, abs=1e-12)


def test_measure_identity(capsys, fixtures_dir):
    for decohere in ((), ("--decohere",)):
        code, out, _ = run(capsys, "measure", "I", *decohere, "-i", str(fixtures_dir / "bb84.json"), "--json")
        q = json.loads(out)["measure"]["quantities"]
        assert q["I"] == pytest.approx(0, abs=1e-12)
        assert q["S(X':Q'|A')"] == pytest.approx(q["chi"], abs=1e-9)


def test_measure_venn(capsys, fixtures_dir):
    code, out, _ = run(capsys, "measure", "Z", "--venn", "-i", str(fixtures_dir / "bb84.json"), "--json")
    rec = json.loads(out)
    assert code == 0
    assert any(k.startswith("venn") for k in rec)


def test_venn_command(capsys, fixtures_dir):
    code, out, _ = run(capsys, "venn", "-i", str(fixtures_dir / "bb84.json"))
    assert code == 0 and "S(X:Q)" in out
    code, out, _ = run(capsys, "venn", "Z", "--decohere", "-i", str(fixtures_dir / "bb84.json"))
    assert code == 0


def test_sequential(capsys, fixtures_dir):
    path = str(fixtures_dir / "bb84.json")
    code, out, _ = run(capsys, "sequential", "ZZ", "-i", path, "--json")
    steps = json.loads(out)["sequential"]["chain"]["step_info"]
    assert steps[1] == pytest.approx(0, abs=1e-9)
    code, out, _ = run(capsys, "sequential", "ZX", "-i", path, "--json")
    rec = json.loads(out)["sequential"]
    assert len(rec["chain"]["step_info"]) == 2
    assert rec["quantities"]["sum"] <= 1.0 + 1e-9
    _, single, _ = run(capsys, "sequential", "Z", "-i", path, "--json")
    _, meas, _ = run(capsys, "measure", "Z", "-i", path, "--json")
    assert json.loads(single)["sequential"]["quantities"]["sum"] == pytest.approx(
        json.loads(meas)["measure"]["quantities"]["I"], abs=1e-10)


def test_optimize(capsys, fixtures_dir):
    args = ("--restarts", "2", "--steps", "100", "--json")
    _, out, _ = run(capsys, "optimize", "-i", str(fixtures_dir / "orthogonal.json"), *args)
    rec = json.loads(out)["optimize"]
    assert rec["I"] == pytest.approx(1.0, abs=1e-6)
    _, out, _ = run(capsys, "optimize", "-i", str(fixtures_dir / "bb84.json"), *args)
    rec = json.loads(out)["optimize"]
    assert rec["I"] == pytest.approx(0.5, abs=1e-6)
    assert rec["gap"] == pytest.approx(0.5, abs=1e-6)


def test_check_defaults_pass(capsys):
    code, out, _ = run(capsys, "check", "--count", "100", "--json")
    assert code == 0
    rec = json.loads(out)["check"]
    assert rec["ok"]
    assert all(v["count"] == 100 and v["violations"] == 0 for v in rec["results"].values())


def test_check_is_deterministic():
    cmd = [sys.executable, "-m", "accessinfo", "check", "--count", "30", "--dims", "2", "3", "--seed", "5"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_check_reports_violation(capsys, monkeypatch):
    def fake(dims, count, seed, tol):
        return {name: np.array([1.0, -1e-6]) for name in cli.CHECK_NAMES}
    monkeypatch.setattr(cli, "run_checks", fake)
    code, out, _ = run(capsys, "check")
    assert code == cli.EXIT_VIOLATION
    assert "FAIL" in out


def test_exit_codes(capsys, fixtures_dir, tmp_path):
    assert run(capsys, "chi", "-i", str(tmp_path / "missing.json"))[0] == cli.EXIT_PARSE
    (tmp_path / "junk.json").write_text("{not json")
    assert run(capsys, "chi", "-i", str(tmp_path / "junk.json"))[0] == cli.EXIT_PARSE
    assert run(capsys, "chi")[0] == cli.EXIT_PARSE
    code, _, err = run(capsys, "check", "-i", str(fixtures_dir / "corrupted.json"))
    assert code == cli.EXIT_STATE and "positiv" in err
    assert run(capsys, "measure", "Y", "-i", str(fixtures_dir / "bb84.json"))[0] == cli.EXIT_REFERENCE
    assert run(capsys, "sequential", "none", "-i", str(fixtures_dir / "bb84.json"))[0] == cli.EXIT_REFERENCE
    assert run(capsys, "optimize", "--decay", "2", "-i", str(fixtures_dir / "bb84.json"))[0] == cli.EXIT_PARSE


def test_text_and_json_agree(capsys, fixtures_dir):
    path = str(fixtures_dir / "bb84.json")
    for argv in (("measure", "Z"), ("measure", "X", "--decohere"), ("measure", "trine")):
        _, text, _ = run(capsys, *argv, "-i", path)
        _, js, _ = run(capsys, *argv, "-i", path, "--json")
        for label, value in json.loads(js)["measure"]["quantities"].items():
            assert _number(text, label) == pytest.approx(round(value, 6), abs=1e-12)


def test_warnings_go_to_stderr(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps(doc(members=[{"p": 1, "ket": [1 + 1e-7, 0]}])))
    res = subprocess.run([sys.executable, "-m", "accessinfo", "chi", "-i", str(path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert "renormalizing" in res.stderr and "renormalizing" not in res.stdout
