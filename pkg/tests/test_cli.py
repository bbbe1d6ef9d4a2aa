import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from gtvspline.cli import main

HAT_INI = """
[operator]
kind = derivative
order = 2

[measurements]
kind = ideal
locations = 0 1 2

[data]
values = 0 1 0

[grid]
lo = 0
hi = 2
n = 201
"""

STAIRCASE = """
[operator]
kind = derivative
order = 1

[measurements]
kind = sample
count = 40
lo = 0
hi = 1

[data]
truth_knots = 0.3 0.7
truth_weights = 1 -2
truth_null = 0.5
noise = {noise}
seed = 0

[constraint]
kind = {kind}
epsilon = {eps}

[grid]
lo = 0
hi = 1
n = 401
"""

MOMENTS = """
[measurements]
kind = moment
orders = {orders}
lo = 0
hi = 1

[data]
values = {values}

[grid]
lo = 0
hi = 1
n = 201
"""


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(tmp_path, command, text, *extra, out="out"):
    cfg = write(tmp_path, text)
    code = main([command, "--config", str(cfg), "--out", str(tmp_path / out), *extra])
    report = tmp_path / out / "report.json"
    return code, (json.loads(report.read_text()) if report.exists() else None)


def read_csv(path):
    rows = list(csv.reader(open(path)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(rows[0]))


class TestInterpolate:
    def test_hat(self, tmp_path, capsys):
        code, rep = run(tmp_path, "interpolate", HAT_INI)
        assert code == 0
        assert (rep["K"], rep["M"], rep["N0"]) == (1, 3, 2)
        assert rep["beta"] == pytest.approx(2.0, abs=1e-6)
        assert set(rep["checks"].values()) == {"PASS"}
        assert "PASS" in capsys.readouterr().out
        header, samples = read_csv(tmp_path / "out" / "samples.csv")
        assert header == ["x", "value"] and samples.shape == (1001, 2)
        x = samples[:, 0]
        assert np.max(np.abs(samples[:, 1] - (x - 2 * np.maximum(x - 1, 0)))) <= 0.02 + 1e-9
        header, knots = read_csv(tmp_path / "out" / "innovation.csv")
        assert header == ["knot", "weight"] and knots.shape == (1, 2)
        spline = json.loads((tmp_path / "out" / "spline.json").read_text())
        assert set(spline) == {"operator", "knots", "weights", "null_coeffs"}

    def test_collinear(self, tmp_path):
        code, rep = run(tmp_path, "interpolate", HAT_INI.replace("values = 0 1 0", "values = 0 1 2"))
        assert code == 0 and rep["K"] == 0 and rep["beta"] == pytest.approx(0.0, abs=1e-12)

    def test_contradictory_duplicates(self, tmp_path):
        text = HAT_INI.replace("locations = 0 1 2", "locations = 0 0 1")
        code, rep = run(tmp_path, "interpolate", text)
        assert code == 2 and rep is None

    def test_json_config_matches_ini(self, tmp_path):
        cfg = {"operator": {"kind": "derivative", "order": 2},
               "measurements": {"kind": "ideal", "locations": [0, 1, 2]},
               "data": {"values": [0, 1, 0]},
               "grid": {"lo": 0, "hi": 2, "n": 201}}
        p = write(tmp_path, json.dumps(cfg), "cfg.json")
        assert main(["interpolate", "--config", str(p), "--out", str(tmp_path / "a")]) == 0
        run(tmp_path, "interpolate", HAT_INI, out="b")
        for f in ("spline.json", "samples.csv", "innovation.csv", "report.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_grid_flag_overrides(self, tmp_path):
        code, rep = run(tmp_path, "interpolate", HAT_INI, "--grid-n", "21")
        assert code == 0 and rep["N"] == 21

    def test_strict_ill_posed(self, tmp_path):
        text = HAT_INI.replace("locations = 0 1 2", "locations = 1 1 1").replace(
            "values = 0 1 0", "values = 1 1 1")
        code, _ = run(tmp_path, "interpolate", text, "--strict")
        assert code == 3


class TestConfigErrors:
    def test_missing_file(self, tmp_path):
        assert main(["interpolate", "--config", str(tmp_path / "nope.ini")]) == 3

    @pytest.mark.parametrize("text", [
        HAT_INI.replace("kind = derivative", "kind = wavelet"),
        HAT_INI.replace("kind = ideal", "kind = telepathy"),
        HAT_INI.replace("values = 0 1 0", "values = 0 1"),
        HAT_INI.replace("[data]\nvalues = 0 1 0", ""),
        "[operator\nkind = derivative",
        "{ not json",
        STAIRCASE.format(noise=0.05, kind="ball", eps="auto").replace("seed = 0", ""),
    ], ids=["operator", "measurement", "length", "no-data", "ini-syntax", "json-syntax", "no-seed"])
    def test_bad_configs(self, tmp_path, text):
        code, _ = run(tmp_path, "interpolate", text)
        assert code == 3

    def test_inadmissible_functional(self, tmp_path):
        text = HAT_INI.replace("order = 2", "order = 1")
        code, _ = run(tmp_path, "interpolate", text)
        assert code == 3


class TestDenoise:
    def test_noisy_staircase(self, tmp_path):
        code, rep = run(tmp_path, "denoise", STAIRCASE.format(noise=0.05, kind="ball", eps="auto"))
        assert code == 0
        assert rep["K"] <= 40 and rep["M"] == 40
        assert rep["residual"] <= 0.05 * np.sqrt(40) + 1e-8

    def test_knot_count_along_lambda(self, tmp_path):
        text = STAIRCASE.format(noise=0.05, kind="ball", eps="auto")
        counts = []
        for i, lam in enumerate([1e-3, 1e-2, 1e-1, 1.0]):
            code, rep = run(tmp_path, "denoise", text, "--lambda", str(lam), out=f"l{i}")
            assert code == 0
            counts.append(rep["K"])
        assert counts == sorted(counts, reverse=True)

    def test_noiseless_staircase(self, tmp_path):
        code, rep = run(tmp_path, "denoise", STAIRCASE.format(noise=0, kind="point", eps=0))
        assert code == 0
        _, knots = read_csv(tmp_path / "out" / "innovation.csv")
        assert knots.shape == (2, 2)
        # sample cell midpoints bracket each jump; the data cannot locate it more finely
        xs = (np.arange(40) + 0.5) / 40
        for (k, w), true_k, true_w in zip(knots, (0.3, 0.7), (1.0, -2.0)):
            i = np.searchsorted(xs, true_k)
            assert xs[i - 1] - 1e-9 <= k <= xs[i] + 1e-9
            assert w == pytest.approx(true_w, abs=1e-6)

    def test_huge_lambda_gives_constant(self, tmp_path):
        text = STAIRCASE.format(noise=0.05, kind="ball", eps="auto")
        code, rep = run(tmp_path, "denoise", text, "--lambda", "1e6")
        assert code == 0 and rep["K"] == 0
        _, samples = read_csv(tmp_path / "out" / "samples.csv")
        from gtvspline.cli import build_run_config, make_parser, read_config
        args = make_parser().parse_args(["denoise", "--config", str(tmp_path / "cfg.ini")])
        rc = build_run_config(read_config(tmp_path / "cfg.ini"), args, "denoise")
        assert np.allclose(samples[:, 1], np.mean(rc.y), atol=1e-12)


class TestRecoverMeasure:
    def test_two_spikes(self, tmp_path):
        y = [1.0 * 0.25**m - 0.5 * 0.75**m for m in range(5)]
        text = MOMENTS.format(orders="0 1 2 3 4", values=" ".join(repr(v) for v in y))
        code, rep = run(tmp_path, "recover-measure", text)
        assert code == 0 and rep["mode"] == "measure" and rep["K"] == 2
        _, knots = read_csv(tmp_path / "out" / "innovation.csv")
        assert np.all(np.abs(knots[:, 0] - [0.25, 0.75]) <= 0.005 + 1e-12)
        assert np.all(np.abs(knots[:, 1] - [1.0, -0.5]) <= 1e-3)

    def test_zero_data(self, tmp_path):
        code, rep = run(tmp_path, "recover-measure", MOMENTS.format(orders="0 1 2", values="0 0 0"))
        assert code == 0 and rep["K"] == 0

    def test_unit_mass(self, tmp_path):
        code, rep = run(tmp_path, "recover-measure", MOMENTS.format(orders="0", values="1"))
        assert code == 0 and rep["K"] == 1 and rep["beta"] == pytest.approx(1.0)


class TestVerifyOperator:
    def test_second_derivative(self, tmp_path, capsys):
        code, rep = run(tmp_path, "verify-operator", "[operator]\nkind = derivative\norder = 2\n")
        assert code == 0
        assert all(c["verdict"] == "PASS" for c in rep["checks"])
        assert "stability growth" in capsys.readouterr().out

    def test_shift_invariant_fails(self, tmp_path):
        code, rep = run(tmp_path, "verify-operator", "[operator]\nkind = derivative\norder = 2\n",
                        "--shift-invariant")
        assert code == 4
        verdicts = {c["name"]: c["verdict"] for c in rep["checks"]}
        assert verdicts["stability growth"] == "FAIL"

    def test_first_derivative_constant(self, tmp_path):
        code, rep = run(tmp_path, "verify-operator", "[operator]\nkind = derivative\norder = 1\n")
        assert code == 0
        stab = next(c for c in rep["checks"] if c["name"] == "stability growth")
        assert stab["value"] == 1.0 and "C_phi >= 1" in stab["note"]

    def test_fractional_needs_measurements(self, tmp_path):
        code, _ = run(tmp_path, "verify-operator", "[operator]\nkind = fractional\ngamma = 1.5\n")
        assert code == 3
        text = ("[operator]\nkind = fractional\ngamma = 1.5\n"
                "[measurements]\nkind = quasi\nlocations = 0.2 0.9\n")
        code, rep = run(tmp_path, "verify-operator", text, out="frac")
        verdicts = {c["name"]: c["verdict"] for c in rep["checks"]}
        assert verdicts["biorthogonality"] == "PASS" and verdicts["boundary conditions"] == "PASS"


class TestDeterminism:
    def test_demo_is_byte_identical(self, tmp_path):
        assert main(["demo", "--out", str(tmp_path / "a"), "--seed", "7"]) == 0
        assert main(["demo", "--out", str(tmp_path / "b"), "--seed", "7"]) == 0
        for f in ("spline.json", "samples.csv", "innovation.csv", "report.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_seed_changes_noise(self, tmp_path):
        main(["demo", "--out", str(tmp_path / "a"), "--seed", "1"])
        main(["demo", "--out", str(tmp_path / "b"), "--seed", "2"])
        assert (tmp_path / "a" / "spline.json").read_bytes() != (tmp_path / "b" / "spline.json").read_bytes()

    def test_bad_seed(self, tmp_path):
        assert main(["demo", "--out", str(tmp_path), "--seed", "-1"]) == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gtvspline.cli", "demo", "--out", str(tmp_path)],
                          capture_output=True, text=True, env={"GTV_LOG": "ERROR", "PATH": ""})
    assert proc.returncode == 0
    assert "K <= M" in proc.stdout
