import cmath
import csv
import json
import math
import subprocess
import sys

import pytest

import artifact.classify as classify_mod
from artifact.cli import main, parse_complex, to_jsonable
from artifact.kernel import lattice_context, wp


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def as_complex(d):
    return complex(d["re"], d["im"])


def test_parse_complex():
    assert parse_complex("0.5,0.866") == 0.5 + 0.866j
    assert parse_complex("2") == 2 + 0j
    with pytest.raises(Exception):
        parse_complex("1,2,3")


def test_to_jsonable_complex_and_nan():
    assert to_jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}
    assert to_jsonable(math.nan) is None
    assert to_jsonable((1j,)) == [{"re": 0.0, "im": 1.0}]


def test_ell_eval(capsys):
    code, out, _ = run(["ell", "eval", "--tau", "0.1,1.2", "--z", "0.3,0.2", "--fn", "wp"],
                       capsys)
    assert code == 0
    expected = wp(0.3 + 0.2j, lattice_context(0.1 + 1.2j))
    assert abs(as_complex(out["value"]) - expected) < 1e-12


def test_hecke_eval_and_premodular(capsys):
    tau = "0.5,%r" % (math.sqrt(3) / 2)
    code, out, _ = run(["hecke", "eval", "--r", "0.333333333333333333", "--s",
                        "0.333333333333333333", "--tau", tau], capsys)
    assert code == 0 and abs(as_complex(out["Z"])) < 1e-10
    code, out, _ = run(["hecke", "eval", "--r", "0.2", "--s", "0.3", "--tau", "0,1",
                        "--premodular", "2"], capsys)
    assert code == 0 and out["k"] == 2 and "Z_mk" in out
    code, out, _ = run(["hecke", "eval", "--r", "0.2", "--s", "0.3", "--tau", "0,1",
                        "--premodular", "n000", "2"], capsys)
    assert code == 0 and out["n"] == 2


def test_hecke_zero(capsys):
    code, out, _ = run(["hecke", "zero", "--r", "0.3333333333333333", "--s",
                        "0.3333333333333333"], capsys)
    assert code == 0
    tau = as_complex(out["zero"]["tau_star"])
    assert abs(tau - cmath.exp(1j * math.pi / 3)) < 1e-8
    assert "delta0" in out["regions"]


def test_atlas_sample_csv(tmp_path, capsys):
    path = tmp_path / "atlas.csv"
    svg = tmp_path / "atlas.svg"
    code, out, _ = run(["atlas", "sample", "--grid", "6", "--out", str(path),
                        "--svg", str(svg)], capsys)
    assert code == 0
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "s", "tau_re", "tau_im", "residual"]
    assert len(rows) - 1 == out["samples"] > 0
    assert all(float(r[4]) < 1e-10 for r in rows[1:])
    assert svg.read_text().startswith("<svg")


def test_atlas_curve(capsys):
    code, out, _ = run(["atlas", "curve", "--i", "1", "--samples", "9"], capsys)
    assert code == 0 and len(out["points"]) == 9


def test_spectral_solve(capsys):
    # (r_1, s_1) = (0.3, 0.35) has a zero in F0
    code, out, _ = run(["hecke", "zero", "--r", "0.3", "--s", "0.35"], capsys)
    tau = as_complex(out["zero"]["tau_star"])
    code, out, _ = run(["spectral", "solve", "--r", "-0.2", "--s", "0.35",
                        "--tau", f"{tau.real!r},{tau.imag!r}", "--k", "1"], capsys)
    assert code == 0
    p = out["points"][0]
    assert p["class"] == "completely_reducible"
    d = as_complex(p["r"]) + 0.2
    assert abs(d - round(d.real)) < 1e-8
    T = as_complex(p["T"])
    code, out, _ = run(["monodromy", "verify", "--T", f"{T.real!r},{T.imag!r}",
                        "--tau", f"{tau.real!r},{tau.imag!r}", "--k", "1"], capsys)
    assert code == 0 and out["unitary"] is True
    assert abs(as_complex(out["t1"]) - as_complex(out["predicted"]["t1"])) < 1e-6


def test_classify_single_and_batch(tmp_path, capsys):
    code, out, _ = run(["classify", "--tau", "0.5,0.8660254037844386", "--k", "1"], capsys)
    assert code == 0
    assert out["noneven_family"]["verdict"] == "exists"
    assert out["even_family"]["verdict"] == "none"
    batch = tmp_path / "batch.txt"
    batch.write_text("# tau, k\n0,1,1\n0,1.8,3\n")
    code, out, _ = run(["classify", "--batch", str(batch)], capsys)
    assert code == 0 and len(out) == 2
    assert out[1]["even_family"]["verdict"] == "exists"


def test_classify_inconclusive_exit(monkeypatch, capsys):
    real = classify_mod.classify_torus

    def fake(tau, k, config=None):
        rep = real(tau, k)
        rep.even_family.verdict = classify_mod.Verdict.INCONCLUSIVE
        return rep

    monkeypatch.setattr(classify_mod, "classify_torus", fake)
    code, _, _ = run(["classify", "--tau", "0,1", "--k", "1"], capsys)
    assert code == 2


def test_obstruction(capsys):
    code, out, _ = run(["obstruction", "--m", "0,1,1,0"], capsys)
    assert code == 0 and out["holds_plus"] is True and out["holds_minus"] is False


def test_error_exit(capsys):
    code, out, err = run(["classify", "--k", "1"], capsys)
    assert code == 1 and out is None
    assert json.loads(err)["error"] == "ValueError"


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "tol.txt"
    cfg.write_text("zero_tol = 1e-9\n# comment\nseries_tol = 1e-17\n")
    code, _, _ = run(["--config", str(cfg), "obstruction", "--m", "1,0,0,0"], capsys)
    assert code == 0
    cfg.write_text("bogus = 1\n")
    code, _, err = run(["--config", str(cfg), "obstruction", "--m", "1,0,0,0"], capsys)
    assert code == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "artifact.cli", "obstruction", "--m", "1,1,0,0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["even_excluded_on_rectangles"] is True
