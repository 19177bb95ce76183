"""Command-line interface: ``wiks test``, ``wiks calibrate``, ``wiks power``.

Exit status: 0 success, 2 unreadable or invalid input file, 3 resource cap
exceeded, 64 usage or configuration error.

Settings come from built-in defaults, then an optional JSON config file
(``--config``, a flat object whose keys are the long option names), then
command-line flags.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import TestReport, classical_ks_test, wilcoxon_test
from .calibration import (
    METHODS,
    CalibrationConfig,
    calibrate_wiks_null,
    calibrate_z_quantile,
    power_study,
)
from .core import PowerComplement, UniformWeight, decide, wiks
from .distributions import BivariateNormal, SeedSpec, _scenario_key, scenario, scenario_grid
from .dp_posterior import DEFAULT_MAX_ATOMS, DEFAULT_TRUNC_EPS, DPPrior
from .exceptions import ConfigurationError, DegenerateDataError, InputError, ParseError
from .exceptions import ResourceError, UsageError, WiksError
from .fileio import (
    parse_model,
    parse_samples,
    read_calibration,
    write_calibration,
    write_power_table,
    write_report,
)

EXIT_OK = 0
EXIT_IO = 2
EXIT_RESOURCE = 3
EXIT_USAGE = 64

DEFAULTS = {
    "x": None,
    "y": None,
    "k": 1.0,
    "base": "normal:0,1",
    "weight": "power",
    "lambda": 4.0,
    "s_draws": 1000,
    "alpha": 0.05,
    "replicates": 1000,
    "null": "normal:0,1",
    "mode": "wiks_null_sim",
    "seed": 0,
    "workers": 1,
    "out": None,
    "threshold": None,
    "calibration": None,
    "n": 50,
    "m": 50,
    "scenarios": None,
    "thetas": None,
    "methods": ",".join(METHODS),
    "reps": 1000,
    "trunc_eps": DEFAULT_TRUNC_EPS,
    "max_atoms": DEFAULT_MAX_ATOMS,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p):
    p.add_argument("--config", help="JSON file of option defaults")
    p.add_argument("--k", type=float, help="DP concentration K (default 1)")
    p.add_argument("--base", help="base measure, e.g. normal:0,1 (default)")
    p.add_argument("--weight", choices=["power", "uniform"],
                   help="weight family: power, W(t)=1-(1-t)^lambda (default), or uniform")
    p.add_argument("--lambda", dest="lambda", type=float, help="power weight exponent (4)")
    p.add_argument("--s-draws", type=int, help="posterior draw pairs S per index (1000)")
    p.add_argument("--alpha", type=float, help="test level (0.05)")
    p.add_argument("--replicates", type=int, help="calibration replicates R (1000)")
    p.add_argument("--null", help="null model for calibration, e.g. lognormal:0,1")
    p.add_argument("--mode", choices=["wiks_null_sim", "z_quantile"], help="calibration mode")
    p.add_argument("--seed", type=int, help="master seed (0)")
    p.add_argument("--workers", type=int, help="worker processes (1)")
    p.add_argument("--out", help="output file")
    p.add_argument("--trunc-eps", type=float, help="stick-breaking residual tolerance")
    p.add_argument("--max-atoms", type=int, help="atom cap per posterior draw")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wiks", description="Bayesian nonparametric two-sample testing "
                     "with the WIKS index.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    t = sub.add_parser("test", help="apply WIKS and the baselines to two sample files")
    _common(t)
    t.add_argument("--x", help="CSV file with the first sample")
    t.add_argument("--y", help="CSV file with the second sample")
    t.add_argument("--threshold", type=float, help="decision threshold in (0, 1)")
    t.add_argument("--calibration", help="calibration JSON supplying the threshold")

    c = sub.add_parser("calibrate", help="calibrate the WIKS threshold under a null model")
    _common(c)
    c.add_argument("--n", type=int, help="first sample size (50)")
    c.add_argument("--m", type=int, help="second sample size (50)")

    w = sub.add_parser("power", help="Monte Carlo power study over scenarios")
    _common(w)
    w.add_argument("--n", type=int)
    w.add_argument("--m", type=int)
    w.add_argument("--scenarios", help="comma list of ids 1-8, B1, B2, or 'all'")
    w.add_argument("--thetas", help="comma list of theta values (overrides default grids)")
    w.add_argument("--methods", help="comma list from WIKS,KS,WILCOX")
    w.add_argument("--reps", type=int, help="data sets per (scenario, theta) (1000)")
    w.add_argument("--threshold", type=float, help="WIKS threshold (else auto-calibrated)")
    w.add_argument("--calibration", help="calibration JSON supplying the WIKS threshold")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags into one settings dict."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a flat JSON object")
        for key, value in loaded.items():
            norm = key.replace("-", "_").lstrip("_")
            if norm not in DEFAULTS:
                raise ConfigurationError(f"unknown config key {key!r}")
            cfg[norm] = value
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            cfg[key] = value
    return cfg


def _weight(cfg):
    return UniformWeight() if cfg["weight"] == "uniform" else PowerComplement(float(cfg["lambda"]))


def _prior(cfg, dim):
    base = parse_model(cfg["base"])
    return DPPrior(float(cfg["k"]), base if dim == 1 else (base, base))


def _calibrate(cfg, n, m, null_model, prior, seed):
    config = CalibrationConfig(n, m, int(cfg["replicates"]), float(cfg["alpha"]), null_model,
                               cfg["mode"], float(cfg["k"]))
    if cfg["mode"] == "z_quantile":
        if prior.dim != 1:
            raise ConfigurationError("z_quantile calibration is univariate only")
        return calibrate_z_quantile(config, seed)
    return calibrate_wiks_null(config, prior, _weight(cfg), int(cfg["s_draws"]), seed,
                               workers=int(cfg["workers"]), trunc_eps=float(cfg["trunc_eps"]),
                               max_atoms=int(cfg["max_atoms"]))


def _null_model(cfg, dim):
    if dim == 1:
        return parse_model(cfg["null"])
    return BivariateNormal((0.0, 0.0), ((1.0, 0.0), (0.0, 1.0)))


def cmd_test(cfg: dict) -> int:
    if not cfg["x"] or not cfg["y"]:
        raise UsageError("test needs --x and --y")
    x, y = parse_samples(cfg["x"]), parse_samples(cfg["y"])
    if x.ndim != y.ndim:
        raise InputError("the two samples have different dimensions")
    dim = x.ndim
    prior = _prior(cfg, dim)
    seed = SeedSpec(int(cfg["seed"]))
    if cfg["threshold"] is not None:
        threshold, source = float(cfg["threshold"]), "given"
    elif cfg["calibration"]:
        threshold, source = read_calibration(cfg["calibration"]).threshold, cfg["calibration"]
    else:
        cal = _calibrate(cfg, x.shape[0], y.shape[0], _null_model(cfg, dim), prior,
                         seed.spawn(1))
        threshold, source = cal.threshold, f"calibrated ({cal.mode}, R={cal.config.replicates})"
    est = wiks(x, y, prior, _weight(cfg), int(cfg["s_draws"]), seed.spawn(0),
               trunc_eps=float(cfg["trunc_eps"]), max_atoms=int(cfg["max_atoms"]))
    dec = decide(est, threshold)
    reports = [TestReport("WIKS", est.value, x.shape[0], y.shape[0], threshold=threshold,
                          decision=dec.label, mc_std_error=est.mc_std_error)]
    if dim == 1:
        reports.append(classical_ks_test(x, y))
        try:
            reports.append(wilcoxon_test(x, y))
        except DegenerateDataError as exc:
            print(f"WILCOX skipped: {exc}", file=sys.stderr)
    print(f"WIKS = {est.value:.4f} (MC s.e. {est.mc_std_error:.4f}, S={est.draws_used})")
    print(f"threshold = {threshold:.4f} [{source}] -> {dec.label}")
    for r in reports[1:]:
        print(f"{r.method}: statistic = {r.statistic:.4f}, p = {r.p_value:.4g}")
    if cfg["out"]:
        write_report(cfg["out"], reports, {"threshold_source": source,
                                           "seed": int(cfg["seed"])})
    return EXIT_OK


def cmd_calibrate(cfg: dict) -> int:
    null_model = parse_model(cfg["null"])
    prior = _prior(cfg, 1)
    result = _calibrate(cfg, int(cfg["n"]), int(cfg["m"]), null_model, prior,
                        SeedSpec(int(cfg["seed"])))
    print(f"threshold = {result.threshold:.4f} ({result.mode}, R={result.config.replicates}, "
          f"alpha={result.config.alpha})")
    if cfg["out"]:
        write_calibration(cfg["out"], result)
    return EXIT_OK


def _scenario_list(cfg):
    raw = cfg["scenarios"]
    if raw is None or not str(raw).strip():
        raise UsageError("power needs a nonempty --scenarios list")
    ids = [s.strip() for s in str(raw).split(",") if s.strip()]
    if ids == ["all"]:
        ids = [str(i) for i in range(1, 9)]
    if not ids:
        raise UsageError("power needs a nonempty --scenarios list")
    keys = [_scenario_key(s) for s in ids]
    if cfg["thetas"]:
        thetas = [float(t) for t in str(cfg["thetas"]).split(",")]
        return [(k, thetas) for k in keys]
    return [(k, list(scenario_grid(k))) for k in keys]


def cmd_power(cfg: dict) -> int:
    scenarios = _scenario_list(cfg)
    methods = [s.strip().upper() for s in str(cfg["methods"]).split(",") if s.strip()]
    n, m = int(cfg["n"]), int(cfg["m"])
    seed = SeedSpec(int(cfg["seed"]))
    thresholds = {}
    if "WIKS" in methods:
        if cfg["threshold"] is not None:
            thresholds["WIKS"] = float(cfg["threshold"])
        elif cfg["calibration"]:
            thresholds["WIKS"] = read_calibration(cfg["calibration"]).threshold
        else:
            for i, (key, _) in enumerate(scenarios):
                if isinstance(key, str):
                    null_model = scenario(key, 0.0)[0]
                    thresholds[("WIKS", key)] = _calibrate(
                        cfg, n, m, null_model, _prior(cfg, 2), seed.spawn(1, i)).threshold
                elif "WIKS" not in thresholds:
                    thresholds["WIKS"] = _calibrate(
                        cfg, n, m, parse_model(cfg["null"]), _prior(cfg, 1),
                        seed.spawn(1, i)).threshold
    uni = [k for k, _ in scenarios if not isinstance(k, str)]
    table = power_study(scenarios, methods, int(cfg["reps"]), (n, m), thresholds,
                        float(cfg["alpha"]), seed.spawn(0),
                        prior=_prior(cfg, 1) if uni and len(uni) == len(scenarios) else None,
                        spec=_weight(cfg), draws=int(cfg["s_draws"]),
                        trunc_eps=float(cfg["trunc_eps"]), max_atoms=int(cfg["max_atoms"]),
                        workers=int(cfg["workers"]))
    for row in table.rows:
        print(f"scenario {row.scenario:>3} theta={row.theta:<8.4g} {row.method:<7} "
              f"power={row.power:.3f} (s.e. {row.mc_se:.3f})")
    if cfg["out"]:
        write_power_table(cfg["out"], table)
    return EXIT_OK


COMMANDS = {"test": cmd_test, "calibrate": cmd_calibrate, "power": cmd_power}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("choose a command: test, calibrate or power")
        return COMMANDS[args.command](resolve(args))
    except (ParseError, OSError) as exc:
        print(f"wiks: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ResourceError as exc:
        print(f"wiks: error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (WiksError, ValueError) as exc:
        print(f"wiks: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
