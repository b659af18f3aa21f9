import json
import math
import subprocess
import sys

import pytest

from krzyz.cli import main
from krzyz.core import dump_config, f_series, make_config, reference_config


@pytest.fixture
def ref_file(tmp_path):
    def make(n):
        p = tmp_path / f"ref{n}.json"
        dump_config(reference_config(n), p)
        return str(p)

    return make


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_coeffs_csv(ref_file, capsys, tmp_path):
    out = tmp_path / "c.csv"
    code, _, _ = run(["coeffs", "--config", ref_file(2), "--order", "4", "--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "j,a_re,a_im,b_re,b_im,fg_re,fg_im"
    assert float(lines[3].split(",")[1]) == pytest.approx(2 / math.e)
    manifest = json.loads((tmp_path / "c.csv.manifest.json").read_text())
    assert manifest["command"] == "coeffs" and manifest["parameters"] == {"order": 4}


def test_verify_reference_passes(ref_file, capsys):
    code, out, _ = run(["verify", "--config", ref_file(3)], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"] and not rep["failed"]


def test_verify_perturbed_fails(tmp_path, capsys):
    c = reference_config(3)
    th = c.thetas.copy()
    th[0] += 0.1
    p = tmp_path / "bad.json"
    dump_config(make_config(list(zip(th, c.lambdas)), 3), p)
    code, _, err = run(["verify", "--config", str(p), "--only", "stationarity"], capsys)
    assert code == 1
    assert "stationarity" in err


def test_verify_only_unknown(ref_file, capsys):
    code, _, _ = run(["verify", "--config", ref_file(1), "--only", "nope"], capsys)
    assert code == 2


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text('{"n": 1,\n "atoms": [}')
    code, _, err = run(["coeffs", "--config", str(p)], capsys)
    assert code == 2
    assert "line 2" in err and "column" in err


def test_invalid_config_field(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"n": 1, "atoms": [{"theta": 0, "lambda": -1}]}))
    code, _, err = run(["coeffs", "--config", str(p)], capsys)
    assert code == 2
    assert "atoms[0].lambda" in err


def test_missing_config(capsys):
    assert run(["coeffs"], capsys)[0] == 2
    assert run(["coeffs", "--config", "/nonexistent/file.json"], capsys)[0] == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_optimize_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        p = tmp_path / f"o{k}.json"
        code, _, _ = run(["optimize", "2", "2", "--starts", "8", "--seed", "1", "--out", str(p)], capsys)
        assert code == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["value"] == pytest.approx(2 / math.e, abs=1e-6)


def test_optimize_flags_equal_positional(capsys):
    a = run(["optimize", "1", "1", "--starts", "4"], capsys)[1]
    b = run(["optimize", "--n", "1", "--atoms", "1", "--starts", "4"], capsys)[1]
    assert a == b


def test_sweep(capsys):
    code, out, _ = run(["sweep", "2", "--starts", "8"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "N,best_value,grad_norm,starts"


def test_thm1_audit(ref_file, capsys):
    code, out, _ = run(["thm1-audit", "--config", ref_file(2)], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["k2"] == pytest.approx(2 / 3)
    assert rep["passed"]


def test_thm1_bad_k1(ref_file, capsys):
    assert run(["thm1-audit", "--config", ref_file(2), "--k1", "0.5"], capsys)[0] == 2


def test_fejer(ref_file, capsys):
    code, out, _ = run(["fejer", "--config", ref_file(2)], capsys)
    assert code == 0
    assert json.loads(out)["sup_error"] < 1e-7


def test_fejer_negative_exits_one(tmp_path, capsys):
    p = tmp_path / "g.json"
    dump_config(make_config([(0.3, 0.7), (2.0, 0.4)], 3), p)
    assert run(["fejer", "--config", str(p)], capsys)[0] == 1


def test_beta(capsys):
    rep = json.loads(run(["beta", "2", "--sup"], capsys)[1])
    assert rep["sup_value"] == pytest.approx(0.61801, abs=1e-5)
    rep = json.loads(run(["beta", "1", "--t", "1.0"], capsys)[1])
    assert rep["beta"] == pytest.approx(2 / math.e)
    table = run(["beta", "3"], capsys)[1]
    assert len(table.splitlines()) == 4
    assert run(["beta", "0", "--sup"], capsys)[0] == 2


@pytest.mark.parametrize("what, asymptotes, zeros", [("phi", 2, 2), ("reP", 0, 2)])
def test_plot(ref_file, tmp_path, capsys, what, asymptotes, zeros):
    p = tmp_path / f"{what}.svg"
    code, _, _ = run(["plot", what, "--config", ref_file(2), "--svg", str(p)], capsys)
    assert code == 0
    svg = p.read_text()
    assert svg.startswith("<svg") and 'width="800"' in svg and 'height="500"' in svg
    assert svg.count('class="asymptote"') == asymptotes
    assert svg.count('class="zero"') == zeros


def test_reference(capsys):
    out = json.loads(run(["reference", "3"], capsys)[1])
    assert out["n"] == 3 and len(out["atoms"]) == 3


def test_console_entry_point(ref_file):
    proc = subprocess.run(
        [sys.executable, "-m", "krzyz.cli", "coeffs", "--config", ref_file(1), "--order", "2"],
        capture_output=True, text=True, check=True,
    )
    rows = proc.stdout.splitlines()
    assert len(rows) == 4
    a1 = float(rows[2].split(",")[1])
    assert a1 == pytest.approx(f_series(reference_config(1), 1)[1].real)
