import csv
import json
import subprocess
import sys

import pytest

from organic_fiducial.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main


def run(tmp_path, cfg, *flags, name="run"):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / name
    code = main([*flags[:1], str(path), "--out", str(out), *flags[1:]])
    return code, out


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def manifest(out):
    return dict(line.split("=", 1) for line in (out / "manifest.txt").read_text().splitlines())


def test_sample_writes_figure_data(tmp_path):
    cfg = {"scenario": {"kind": "binomial", "n": 10, "x": 1}, "lpd": "constant",
           "draws": 20_000, "seed": 7, "bins": 40, "write_draws": True}
    code, out = run(tmp_path, cfg, "sample", "--retain-gamma")
    assert code == EXIT_OK
    hist = rows(out / "histogram.csv")
    assert hist[0] == ["bin_lo", "bin_hi", "count", "density"]
    assert len(hist) == 41
    assert sum(int(r[2]) for r in hist[1:]) == 20_000
    over = rows(out / "overlay.csv")
    assert over[0] == ["theta", "fiducial_numeric_pdf", "posterior_uniform_pdf", "posterior_jeffreys_pdf"]
    assert len(over) == 402
    draws = rows(out / "draws.csv")
    assert draws[0] == ["theta", "gamma"] and len(draws) == 20_001
    m = manifest(out)
    assert m["seed"] == "7" and m["argument"] == "Strong"
    for key in ("numpy_version", "scipy_version", "numba_version", "wall_time_s", "quad_tol_abs"):
        assert key in m


def test_flags_override_config(tmp_path):
    cfg = {"scenario": {"kind": "poisson", "x": 2}, "lpd": "jeffreys", "draws": 10, "seed": 1}
    code, out = run(tmp_path, cfg, "sample", "--draws", "3000", "--seed", "99", "--bins", "10")
    assert code == EXIT_OK
    m = manifest(out)
    assert m["seed"] == "99" and m["n_draws"] == "3000" and m["bins"] == "10"
    assert len(rows(out / "histogram.csv")) == 11


def test_rerun_is_byte_identical(tmp_path):
    cfg = {"scenario": {"kind": "binomial", "n": 20, "x": 2}, "lpd": "jeffreys",
           "draws": 20_000, "seed": 11, "write_draws": True}
    _, a = run(tmp_path, cfg, "sample", name="a")
    # replay from the recorded config
    recorded = json.loads(manifest(a)["config"])
    recorded.pop("out")
    _, b = run(tmp_path, recorded, "sample", name="b")
    for f in ("histogram.csv", "overlay.csv", "draws.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


@pytest.mark.parametrize("scenario", [{"kind": "binomial", "n": 10, "x": 1}, {"kind": "poisson", "x": 0}])
def test_check_passes_strong(tmp_path, scenario):
    code, out = run(tmp_path, {"scenario": scenario}, "check")
    assert code == EXIT_OK
    r = rows(out / "check.csv")
    assert r[0] == ["condition_2a", "uncovered", "condition_2b", "argument"]
    assert r[1][0] == "pass" and r[1][2] == "pass" and r[1][3] == "Strong"


def test_check_restricted_support_is_moderate(tmp_path):
    cfg = {"scenario": {"kind": "binomial", "n": 10, "x": 1}, "support": [[0.0, 0.5]]}
    code, out = run(tmp_path, cfg, "check")
    assert code == EXIT_OK
    assert rows(out / "check.csv")[1][3] == "Moderate"


def test_check_non_constant_gpd_fails(tmp_path):
    cfg = {"scenario": {"kind": "binomial", "n": 10, "x": 1}, "gpd": {"kind": "power", "exponent": 2}}
    code, out = run(tmp_path, cfg, "check")
    assert code == EXIT_CHECK
    assert rows(out / "check.csv")[1][2] == "fail"


def test_sample_with_non_constant_gpd_exits_4(tmp_path):
    cfg = {"scenario": {"kind": "binomial", "n": 3, "x": 1}, "draws": 10,
           "gpd": {"kind": "power", "exponent": 2}}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["sample", str(path), "--out", str(tmp_path / "o")]) == EXIT_CHECK


def test_sweep_outputs(tmp_path):
    cfg = {"scenario": {"kind": "binomial", "n": 20, "x": 2}, "draws": 3000, "seed": 4,
           "lpds": [{"kind": "power", "alpha": a, "beta": a} for a in (-0.5, -0.25, 0.0, 0.5, 1.0)]}
    code, out = run(tmp_path, cfg, "sweep")
    assert code == EXIT_OK
    for f in ("fiducial_ks.csv", "posterior_ks.csv"):
        m = rows(out / f)
        assert len(m) == 6 and all(len(r) == 6 for r in m)
        assert m[0][0] == "lpd"
    s = rows(out / "sweep_summary.csv")
    assert s[0] == ["max_fiducial_ks", "max_posterior_ks", "summary_ratio"]
    assert "summary_ratio" in manifest(out)


def test_sweep_duplicate_common_seed_is_zero(tmp_path):
    cfg = {"scenario": {"kind": "binomial", "n": 10, "x": 1}, "draws": 5000,
           "lpds": ["constant", "constant"], "seed_policy": "common"}
    code, out = run(tmp_path, cfg, "sweep")
    assert code == EXIT_OK
    m = rows(out / "fiducial_ks.csv")
    assert all(float(v) == 0.0 for r in m[1:] for v in r[1:])


def test_sweep_ratio_below_one(tmp_path):
    cfg = {"scenario": {"kind": "binomial", "n": 10, "x": 1}, "draws": 100_000, "seed": 2,
           "lpds": ["constant", "jeffreys"]}
    code, out = run(tmp_path, cfg, "sweep")
    assert code == EXIT_OK
    assert float(manifest(out)["summary_ratio"]) < 1.0


def test_converge_single_row_passes_assert(tmp_path):
    cfg = {"ratio": 0.1, "n_list": [10], "draws": 5000, "replicates": 0}
    code, out = run(tmp_path, cfg, "converge", "--assert")
    assert code == EXIT_OK
    r = rows(out / "convergence.csv")
    assert r[0] == ["n", "x", "ks", "sigma"] and len(r) == 2


def test_converge_decreasing_column(tmp_path):
    cfg = {"ratio": 0.1, "n_list": [10, 20, 40, 80], "draws": 200_000, "seed": 5, "replicates": 4}
    code, out = run(tmp_path, cfg, "converge", "--assert")
    assert code == EXIT_OK
    ks = [float(r[2]) for r in rows(out / "convergence.csv")[1:]]
    assert ks[-1] < ks[0]


@pytest.mark.parametrize("cfg,field", [
    ({"ratio": 0.1, "n_list": [10, 15]}, "n_list[1]"),
    ({"ratio": 0.1, "n_list": [20, 10]}, "n_list"),
    ({"ratio": 2, "n_list": [10]}, "ratio"),
])
def test_converge_config_errors(tmp_path, capsys, cfg, field):
    code, _ = run(tmp_path, cfg, "converge")
    assert code == EXIT_CONFIG
    assert f"'{field}'" in capsys.readouterr().err


@pytest.mark.parametrize("cfg,field", [
    ({"scenario": {"kind": "binomial", "n": 3, "x": 5}}, "scenario.x"),
    ({"scenario": {"kind": "geometric", "x": 1}}, "scenario.kind"),
    ({"scenario": {"kind": "poisson", "x": 1}, "lpd": "cauchy"}, "lpd.kind"),
    ({"scenario": {"kind": "poisson", "x": 1}, "lpd": "jeffreys_binomial"}, "lpd"),
    ({"scenario": {"kind": "poisson", "x": 1}, "seed": -3}, "seed"),
    ({"scenario": {"kind": "poisson", "x": 1}, "draws": 0}, "draws"),
    ({"scenario": {"kind": "binomial", "n": 3, "x": 1}, "support": [[0.7, 0.2]]}, "support"),
])
def test_sample_config_errors(tmp_path, capsys, cfg, field):
    code, _ = run(tmp_path, cfg, "sample")
    assert code == EXIT_CONFIG
    assert f"'{field}'" in capsys.readouterr().err


def test_missing_and_malformed_config(tmp_path, capsys):
    assert main(["sample", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["sample", str(bad)]) == EXIT_CONFIG
    assert "invalid JSON" in capsys.readouterr().err


def test_module_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "organic_fiducial", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for word in ("sample", "check", "sweep", "converge", "histogram.csv", "Exit codes"):
        assert word in res.stdout
