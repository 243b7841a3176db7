"""Command-line front end.

Output files (all CSV with a header row, numbers in 17 significant digits):

sample
  histogram.csv   bin_lo, bin_hi, count, density
  overlay.csv     theta, fiducial_numeric_pdf, posterior_uniform_pdf, posterior_jeffreys_pdf
  draws.csv       theta[, gamma]        (only with "write_draws": true)
check
  check.csv       condition_2a, uncovered, condition_2b, argument
sweep
  fiducial_ks.csv, posterior_ks.csv    square matrices, first column lpd
  sweep_summary.csv                    max_fiducial_ks, max_posterior_ks, summary_ratio
converge
  convergence.csv n, x, ks, sigma

Every command also writes manifest.txt (key=value lines).

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 failed check or assertion.
"""

import argparse
import csv
import json
import math
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .analysis import convergence_study, histogram, sensitivity_sweep
from .densities import GpdDescriptor, LpdDescriptor, reference_posterior
from .errors import ConditionViolated, DomainError, EmptySupport, SolverFailure
from .model import DiscreteSamplingScenario
from .numerics import QUAD_TOL, ROOT_TOL
from .preimage import (
    check_condition_2a,
    check_condition_2b,
    classify_argument,
    post_data_support,
)
from .sampler import SamplerConfig, draw_fiducial, fiducial_pdf_numeric

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4

_MAX_SEED = 2 ** 64 - 1


class ConfigError(Exception):
    def __init__(self, field, message):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_manifest(path, items):
    with open(path, "w", encoding="ascii") as fh:
        for k, v in items:
            fh.write(f"{k}={_fmt(v)}\n")


# ---------------------------------------------------------------------------
# configuration


def _int_field(cfg, name, default=None, minimum=None, maximum=None):
    v = cfg.get(name, default)
    if v is None:
        raise ConfigError(name, "is required")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(name, f"must be an integer, got {v!r}")
    v = int(v)
    if minimum is not None and v < minimum:
        raise ConfigError(name, f"must be >= {minimum}, got {v}")
    if maximum is not None and v > maximum:
        raise ConfigError(name, f"must be <= {maximum}, got {v}")
    return v


def _scenario(cfg):
    spec = cfg.get("scenario")
    if not isinstance(spec, dict):
        raise ConfigError("scenario", "must be an object with kind, x and (binomial) n")
    kind = spec.get("kind")
    if kind not in ("binomial", "poisson"):
        raise ConfigError("scenario.kind", f"must be 'binomial' or 'poisson', got {kind!r}")
    x = _int_field(spec, "x", minimum=0)
    try:
        if kind == "binomial":
            n = _int_field(spec, "n", minimum=1)
            if x > n:
                raise ConfigError("scenario.x", f"exceeds n={n}")
            return DiscreteSamplingScenario.binomial(n, x)
        if "n" in spec and spec["n"] is not None:
            raise ConfigError("scenario.n", "a Poisson scenario takes no n")
        return DiscreteSamplingScenario.poisson(x)
    except DomainError as exc:
        raise ConfigError("scenario", str(exc)) from exc


def _lpd(spec, scenario, field):
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict):
        raise ConfigError(field, f"must be a name or an object, got {spec!r}")
    kind = spec.get("kind")
    name = spec.get("name")
    try:
        if kind == "constant":
            lpd = LpdDescriptor.constant(float(spec.get("level", 1.0)), name)
        elif kind == "jeffreys":
            lpd = LpdDescriptor.jeffreys(scenario, float(spec.get("level", 1.0)), name)
        elif kind in ("jeffreys_binomial", "jeffreys_poisson"):
            lpd = LpdDescriptor(kind, float(spec.get("level", 1.0)), name=name)
        elif kind == "power":
            lpd = LpdDescriptor.power(float(spec.get("alpha", 0.0)), float(spec.get("beta", 0.0)),
                                      float(spec.get("level", 1.0)), name)
        elif kind == "tabulated":
            lpd = LpdDescriptor.tabulated(spec.get("grid", ()), spec.get("weights", ()), name)
        else:
            raise ConfigError(f"{field}.kind", f"unknown LPD kind {kind!r}")
        lpd.validate_for(scenario)
    except (DomainError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(field, str(exc)) from exc
    return lpd


def _gpd(cfg, scenario):
    spec = cfg.get("gpd", {"kind": "constant"})
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind") if isinstance(spec, dict) else None
    try:
        a = float(spec.get("a", 1.0))
        if kind == "constant":
            return GpdDescriptor(scenario.domain, a)
        if kind == "power":
            e = float(spec.get("exponent", 1.0))
            return GpdDescriptor(scenario.domain, a, lambda t, e=e: t ** e)
    except DomainError as exc:
        raise ConfigError("gpd", str(exc)) from exc
    raise ConfigError("gpd.kind", f"must be 'constant' or 'power', got {kind!r}")


def _support(cfg, scenario):
    spec = cfg.get("support")
    if spec is None:
        return post_data_support(scenario)
    try:
        pieces = [(float(lo), float(hi)) for lo, hi in spec]
        return post_data_support(scenario, restriction=pieces)
    except (TypeError, ValueError, EmptySupport) as exc:
        raise ConfigError("support", f"must be a list of [lo, hi] pairs with mass: {exc}") from exc


def _sampler_config(cfg):
    draws = _int_field(cfg, "draws", 1_000_000, minimum=1)
    seed = _int_field(cfg, "seed", 0, minimum=0, maximum=_MAX_SEED)
    path = cfg.get("path")
    if path not in (None, "auto", "generic", "conjugate"):
        raise ConfigError("path", f"must be 'generic' or 'conjugate', got {path!r}")
    retain = cfg.get("retain_gamma", False)
    if not isinstance(retain, bool):
        raise ConfigError("retain_gamma", "must be true or false")
    return SamplerConfig(n_draws=draws, seed=seed, path=path, retain_gamma=retain)


def _load(args):
    path = args.config_pos or args.config
    if path is None:
        raise ConfigError("config", "no configuration file given")
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a JSON object")
    for key, value in (("seed", args.seed), ("draws", args.draws), ("bins", args.bins), ("out", args.out)):
        if value is not None:
            cfg[key] = value
    if args.retain_gamma:
        cfg["retain_gamma"] = True
    cfg.setdefault("out", ".")
    return cfg


def _base_manifest(command, cfg, scenario):
    import numba
    import scipy

    return [
        ("command", command),
        ("scenario", scenario.label()),
        ("config", json.dumps(cfg, sort_keys=True)),
        ("seed", cfg.get("seed", 0)),
        ("root_tol_abs", ROOT_TOL.abs_tol),
        ("root_tol_rel", ROOT_TOL.rel_tol),
        ("quad_tol_abs", QUAD_TOL.abs_tol),
        ("quad_tol_rel", QUAD_TOL.rel_tol),
        ("package_version", __version__),
        ("python_version", platform.python_version()),
        ("numpy_version", np.__version__),
        ("scipy_version", scipy.__version__),
        ("numba_version", numba.__version__),
    ]


# ---------------------------------------------------------------------------
# commands


def cmd_sample(cfg):
    scenario = _scenario(cfg)
    lpd = _lpd(cfg.get("lpd", "constant"), scenario, "lpd")
    config = _sampler_config(cfg)
    support = _support(cfg, scenario)
    gpd = _gpd(cfg, scenario)
    bins = _int_field(cfg, "bins", 100, minimum=2)
    write_draws = bool(cfg.get("write_draws", False))
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)

    start = time.perf_counter()
    sample = draw_fiducial(scenario, lpd, support=support, config=config, gpd=gpd)
    hist = histogram(sample, bins)
    edges = hist.bin_edges
    _write_csv(os.path.join(out, "histogram.csv"), ["bin_lo", "bin_hi", "count", "density"],
               zip(edges[:-1], edges[1:], hist.counts, hist.normalized_heights))

    theta = np.linspace(edges[0], edges[-1], 401)
    fid = fiducial_pdf_numeric(scenario, lpd, theta, support=support)
    uni = reference_posterior(scenario, "uniform").pdf(theta)
    jef = reference_posterior(scenario, "jeffreys").pdf(theta)
    _write_csv(os.path.join(out, "overlay.csv"),
               ["theta", "fiducial_numeric_pdf", "posterior_uniform_pdf", "posterior_jeffreys_pdf"],
               zip(theta, fid, uni, jef))
    if write_draws:
        if sample.gammas is not None:
            _write_csv(os.path.join(out, "draws.csv"), ["theta", "gamma"], zip(sample.draws, sample.gammas))
        else:
            _write_csv(os.path.join(out, "draws.csv"), ["theta"], ((d,) for d in sample.draws))
    manifest = _base_manifest("sample", cfg, scenario) + [
        ("lpd", lpd.label),
        ("n_draws", config.n_draws),
        ("bins", bins),
        ("dropped_draws", hist.dropped),
        ("argument", classify_argument(support).value),
        ("wall_time_s", time.perf_counter() - start),
    ]
    _write_manifest(os.path.join(out, "manifest.txt"), manifest)
    return EXIT_OK


def cmd_check(cfg):
    scenario = _scenario(cfg)
    gpd = _gpd(cfg, scenario)
    support = _support(cfg, scenario)
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    start = time.perf_counter()
    # coverage is judged on the unrestricted support; a restriction only
    # changes which argument applies
    report = check_condition_2a(scenario)
    ok_b = check_condition_2b(gpd, scenario.h_x)
    argument = classify_argument(support)
    _write_csv(os.path.join(out, "check.csv"), ["condition_2a", "uncovered", "condition_2b", "argument"],
               [("pass" if report.covered else "fail", report.describe(),
                 "pass" if ok_b else "fail", argument.value)])
    _write_manifest(os.path.join(out, "manifest.txt"), _base_manifest("check", cfg, scenario) + [
        ("condition_2a", "pass" if report.covered else "fail"),
        ("condition_2b", "pass" if ok_b else "fail"),
        ("argument", argument.value),
        ("wall_time_s", time.perf_counter() - start),
    ])
    return EXIT_OK if report.covered and ok_b else EXIT_CHECK


def cmd_sweep(cfg):
    scenario = _scenario(cfg)
    specs = cfg.get("lpds")
    if not isinstance(specs, list) or len(specs) < 2:
        raise ConfigError("lpds", "must list at least two LPDs")
    family = [_lpd(s, scenario, f"lpds[{i}]") for i, s in enumerate(specs)]
    config = _sampler_config(cfg)
    policy = cfg.get("seed_policy", "offset")
    if policy not in ("offset", "common"):
        raise ConfigError("seed_policy", f"must be 'offset' or 'common', got {policy!r}")
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    start = time.perf_counter()
    rep = sensitivity_sweep(scenario, family, config, seed_policy=policy)
    labels = list(rep.labels)
    for name, m in (("fiducial_ks.csv", rep.fiducial_ks), ("posterior_ks.csv", rep.posterior_ks)):
        _write_csv(os.path.join(out, name), ["lpd"] + labels,
                   ([labels[i]] + list(m[i]) for i in range(len(labels))))
    max_f = float(np.nanmax(rep.fiducial_ks))
    finite = rep.posterior_ks[np.isfinite(rep.posterior_ks)]
    max_p = float(finite.max()) if finite.size else math.nan
    _write_csv(os.path.join(out, "sweep_summary.csv"), ["max_fiducial_ks", "max_posterior_ks", "summary_ratio"],
               [(max_f, max_p, rep.summary_ratio)])
    _write_manifest(os.path.join(out, "manifest.txt"), _base_manifest("sweep", cfg, scenario) + [
        ("lpds", ";".join(labels)),
        ("n_draws", config.n_draws),
        ("seed_policy", policy),
        ("summary_ratio", rep.summary_ratio),
        ("wall_time_s", time.perf_counter() - start),
    ])
    return EXIT_OK


def cmd_converge(cfg, do_assert=False):
    ratio = cfg.get("ratio")
    if isinstance(ratio, bool) or not isinstance(ratio, (int, float)) or not 0.0 <= ratio <= 1.0:
        raise ConfigError("ratio", f"must be a number in [0, 1], got {ratio!r}")
    n_list = cfg.get("n_list")
    if not isinstance(n_list, list) or not n_list:
        raise ConfigError("n_list", "must be a nonempty list of integers")
    for i, n in enumerate(n_list):
        if isinstance(n, bool) or not isinstance(n, (int, float)) or int(n) != n or n < 1:
            raise ConfigError(f"n_list[{i}]", f"must be a positive integer, got {n!r}")
        if abs(n * ratio - round(n * ratio)) > 1e-9:
            raise ConfigError(f"n_list[{i}]", f"n={n} times ratio={ratio} is not an integer count")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("n_list", "must be strictly increasing")
    first = DiscreteSamplingScenario.binomial(int(n_list[0]), round(n_list[0] * ratio))
    lpd = _lpd(cfg.get("lpd", "jeffreys_binomial"), first, "lpd")
    replicates = _int_field(cfg, "replicates", 8, minimum=0)
    config = _sampler_config(cfg)
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    start = time.perf_counter()
    rep = convergence_study(ratio, [int(n) for n in n_list], lpd, config, replicates=replicates)
    _write_csv(os.path.join(out, "convergence.csv"), ["n", "x", "ks", "sigma"],
               zip(rep.n_values, rep.x_values, rep.ks, rep.sigma))
    _write_manifest(os.path.join(out, "manifest.txt"), _base_manifest("converge", cfg, first) + [
        ("lpd", lpd.label),
        ("n_draws", config.n_draws),
        ("nonincreasing_within_noise", rep.nonincreasing_within_noise),
        ("decreases_overall", rep.decreases_overall),
        ("wall_time_s", time.perf_counter() - start),
    ])
    if do_assert and not rep.passed:
        print("convergence check failed: KS does not decrease within noise", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = argparse.ArgumentParser(
        prog="organic-fiducial",
        description="Fiducial inference for binomial and Poisson counts.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("\n", 2)[2],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("sample", "draw from the fiducial density and write figure data"),
                       ("check", "check applicability and classify the argument"),
                       ("sweep", "compare fiducial and posterior densities across LPDs"),
                       ("converge", "KS to the Jeffreys posterior as n grows at fixed x/n")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config_pos", nargs="?", metavar="CONFIG", help="JSON configuration file")
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        p.add_argument("--draws", type=int, help="number of fiducial draws")
        p.add_argument("--bins", type=int, help="histogram bin count")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="cap on worker threads (results do not depend on it)")
        p.add_argument("--retain-gamma", action="store_true", help="keep the primary draws")
        p.add_argument("--assert", dest="do_assert", action="store_true",
                       help="exit 4 when the convergence check fails")
    return parser


def _set_threads(n):
    import numba

    if n < 1:
        raise ConfigError("threads", f"must be positive, got {n}")
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            _set_threads(args.threads)
        cfg = _load(args)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        return cmd_converge(cfg, args.do_assert)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConditionViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except SolverFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
