"""Threshold calibration by null simulation and the Monte Carlo power study.

Every replicate is keyed by its own seed stream, so results are identical
whatever the number of worker processes or the order in which replicates
run.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .baselines import classical_ks_test, wilcoxon_test
from .core import DEFAULT_DRAWS, PowerComplement, WeightSpec, wiks
from .distributions import (
    Normal,
    SeedSpec,
    Uniform,
    _scenario_key,
    scenario,
)
from .dp_posterior import DEFAULT_MAX_ATOMS, DEFAULT_TRUNC_EPS, DPPrior
from .exceptions import ConfigurationError, InputError, ResourceError
from .metrics import z_statistic

__all__ = [
    "CalibrationConfig",
    "CalibrationResult",
    "PowerRow",
    "PowerTable",
    "order_statistic_quantile",
    "calibrate_wiks_null",
    "calibrate_z_quantile",
    "power_study",
    "budget_cap",
    "METHODS",
    "BUDGET_ENV",
]

METHODS = ("WIKS", "KS", "WILCOX")
MODES = ("wiks_null_sim", "z_quantile")
BUDGET_ENV = "WIKS_MAX_BUDGET"
_DEFAULT_BUDGET = 50_000_000


def budget_cap() -> int:
    """Largest allowed number of posterior draw pairs per run.

    Read from the ``WIKS_MAX_BUDGET`` environment variable.
    """
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return _DEFAULT_BUDGET
    try:
        return int(float(raw))
    except ValueError:
        raise ConfigurationError(f"{BUDGET_ENV} must be a number, got {raw!r}") from None


def _check_budget(replicates: int, draws: int, what: str):
    cap = budget_cap()
    need = int(replicates) * int(draws)
    if need > cap:
        r = max(1, cap // max(draws, 1))
        s = max(1, cap // max(replicates, 1))
        raise ResourceError(
            f"{what} needs {need} posterior draw pairs, above the cap of {cap} "
            f"(set by {BUDGET_ENV}); reduce replicates to {r} or draws to {s}")


def _parallel_map(fn, items: list, workers: int) -> list:
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def order_statistic_quantile(values, alpha: float) -> float:
    """Upper ``1 - alpha`` sample quantile as the ``ceil((1-alpha) R)``-th order statistic."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise InputError("no replicate values")
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    # round away representation noise such as 0.95 * 1000 = 949.9999...
    k = math.ceil(round((1.0 - alpha) * v.size, 9))
    return float(v[min(max(k, 1), v.size) - 1])


@dataclass(frozen=True)
class CalibrationConfig:
    """Null-simulation settings.  ``null_model`` may be bivariate."""

    n: int = 50
    m: int = 50
    replicates: int = 1000
    alpha: float = 0.05
    null_model: object = Normal(0.0, 1.0)
    mode: str = "wiks_null_sim"
    concentration: float = 1.0

    def __post_init__(self):
        if self.replicates < 1:
            raise InputError("replicates must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise InputError("alpha must lie in (0, 1)")
        if self.n < 1 or self.m < 1:
            raise InputError("sample sizes must be positive")
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}")


@dataclass
class CalibrationResult:
    threshold: float
    mode: str
    values: np.ndarray
    config: CalibrationConfig
    seed: SeedSpec
    settings: dict = field(default_factory=dict)


def _wiks_null_replicate(job):
    r, cfg, prior, spec, draws, seed, trunc_eps, max_atoms = job
    rep = seed.spawn(r)
    rng = rep.spawn(0).generator()
    x = cfg.null_model.sample(rng, cfg.n)
    y = cfg.null_model.sample(rng, cfg.m)
    return wiks(x, y, prior, spec, draws, rep.spawn(1),
                trunc_eps=trunc_eps, max_atoms=max_atoms).value


def calibrate_wiks_null(config: CalibrationConfig, prior: DPPrior = DPPrior(),
                        spec: WeightSpec = PowerComplement(4.0), draws: int = DEFAULT_DRAWS,
                        seed: SeedSpec = SeedSpec(0), *, workers: int = 1,
                        trunc_eps: float = DEFAULT_TRUNC_EPS,
                        max_atoms: int = DEFAULT_MAX_ATOMS) -> CalibrationResult:
    """Calibrate the WIKS threshold by simulating the null.

    Replicate ``r`` draws both samples from ``config.null_model`` on stream
    ``seed.spawn(r, 0)`` and computes WIKS with ``seed.spawn(r, 1)``.  The
    threshold is the ``ceil((1 - alpha) R)``-th smallest replicate value.
    """
    if config.mode != "wiks_null_sim":
        raise ConfigurationError("calibrate_wiks_null needs mode 'wiks_null_sim'")
    _check_budget(config.replicates, draws, "calibration")
    jobs = [(r, config, prior, spec, draws, seed, trunc_eps, max_atoms)
            for r in range(config.replicates)]
    values = np.array(_parallel_map(_wiks_null_replicate, jobs, workers))
    return CalibrationResult(order_statistic_quantile(values, config.alpha), config.mode,
                             values, config, seed,
                             {"draws": draws, "trunc_eps": trunc_eps, "max_atoms": max_atoms,
                              "prior": prior, "weight": spec})


def calibrate_z_quantile(config: CalibrationConfig, seed: SeedSpec = SeedSpec(0)
                         ) -> CalibrationResult:
    """Threshold from the null distribution of the shrunk-ECDF statistic.

    Both samples are Uniform(0, 1) of sizes ``(n, m)``; the statistic uses
    ``config.concentration`` as ``K``.
    """
    if config.mode != "z_quantile":
        raise ConfigurationError("calibrate_z_quantile needs mode 'z_quantile'")
    u = Uniform(0.0, 1.0)
    values = np.empty(config.replicates)
    for r in range(config.replicates):
        rng = seed.spawn(r).generator()
        values[r] = z_statistic(u.sample(rng, config.n), u.sample(rng, config.m),
                                config.concentration)
    return CalibrationResult(order_statistic_quantile(values, config.alpha), config.mode,
                             values, config, seed, {})


# Power study --------------------------------------------------------------


@dataclass(frozen=True)
class PowerRow:
    scenario: str
    theta: float
    method: str
    power: float
    reps: int
    mc_se: float


POWER_COLUMNS = ("scenario", "theta", "method", "power", "reps", "mc_se")


@dataclass
class PowerTable:
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(POWER_COLUMNS)
        for r in self.rows:
            w.writerow([r.scenario, repr(float(r.theta)), r.method, repr(float(r.power)),
                        r.reps, repr(float(r.mc_se))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PowerTable":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != POWER_COLUMNS:
            raise InputError(f"power table header must be {','.join(POWER_COLUMNS)}")
        return cls([PowerRow(r["scenario"], float(r["theta"]), r["method"], float(r["power"]),
                             int(r["reps"]), float(r["mc_se"])) for r in reader])

    def select(self, scenario=None, method=None) -> list:
        return [r for r in self.rows
                if (scenario is None or r.scenario == str(scenario))
                and (method is None or r.method == method)]

    def __eq__(self, other):
        return isinstance(other, PowerTable) and self.rows == other.rows


def _scenario_code(key) -> int:
    return key if isinstance(key, int) else 100 + int(key[1:])


def _power_replicate(job):
    key, theta, t_idx, rep, methods, sizes, thresholds, alpha, prior, spec, draws, \
        seed, trunc_eps, max_atoms = job
    mx, my = scenario(key, theta)
    stream = seed.spawn(_scenario_code(key), t_idx, rep)
    rng = stream.spawn(0).generator()
    x = mx.sample(rng, sizes[0])
    y = my.sample(rng, sizes[1])
    out = {}
    for method in methods:
        if method == "WIKS":
            value = wiks(x, y, prior, spec, draws, stream.spawn(1),
                         trunc_eps=trunc_eps, max_atoms=max_atoms).value
            out[method] = value > thresholds.get(("WIKS", str(key)), thresholds.get("WIKS"))
        elif method == "KS":
            out[method] = classical_ks_test(x, y).p_value <= alpha
        else:
            out[method] = wilcoxon_test(x, y).p_value <= alpha
    return out


def _threshold_value(t):
    return float(t.threshold) if isinstance(t, CalibrationResult) else float(t)


def power_study(scenarios: Iterable, methods: Iterable = METHODS, reps: int = 1000,
                sizes: tuple = (50, 50), thresholds: Optional[dict] = None,
                alpha: float = 0.05, seed: SeedSpec = SeedSpec(0), *,
                prior: Optional[DPPrior] = None, spec: WeightSpec = PowerComplement(4.0),
                draws: int = DEFAULT_DRAWS, trunc_eps: float = DEFAULT_TRUNC_EPS,
                max_atoms: int = DEFAULT_MAX_ATOMS, workers: int = 1) -> PowerTable:
    """Estimate rejection rates over scenarios, parameter grids and methods.

    Parameters
    ----------
    scenarios : iterable of (scenario id, iterable of theta)
    methods : iterable of {"WIKS", "KS", "WILCOX"}
    reps : int
        Data sets simulated per (scenario, theta); all methods see the same
        data sets.
    sizes : (n, m)
    thresholds : dict
        ``{"WIKS": CalibrationResult or float}``; required when WIKS runs.
        A key ``("WIKS", scenario id)`` overrides the shared threshold for
        that scenario (bivariate scenarios need their own calibration).
    alpha : float
        Level for the p-value methods (reject when ``p <= alpha``).
    seed : SeedSpec
        Replicate streams are ``seed.spawn(scenario code, theta index, rep)``.
    prior : DPPrior, optional
        Defaults to ``DP(1, N(0,1))``, or the product of two N(0,1) for
        bivariate scenarios.

    Returns
    -------
    PowerTable
        One row per (scenario, theta, method) with Monte Carlo standard
        error ``sqrt(p (1 - p) / reps)``.
    """
    scenarios = [(_scenario_key(sid), [float(t) for t in grid]) for sid, grid in scenarios]
    methods = list(dict.fromkeys(methods))
    if not scenarios:
        raise ConfigurationError("no scenarios requested")
    unknown = set(methods) - set(METHODS)
    if unknown or not methods:
        raise ConfigurationError(f"unknown or empty method set: {sorted(unknown)}")
    if reps < 1:
        raise ConfigurationError("reps must be at least 1")
    thresholds = {(k if isinstance(k, str) else (k[0], str(_scenario_key(k[1])))):
                  _threshold_value(v) for k, v in (thresholds or {}).items()}
    if "WIKS" in methods:
        missing = [str(key) for key, _ in scenarios
                   if "WIKS" not in thresholds and ("WIKS", str(key)) not in thresholds]
        if missing:
            raise ConfigurationError(f"WIKS requires a calibrated threshold (scenarios {missing})")
    n_wiks = sum(len(g) for _, g in scenarios) * reps if "WIKS" in methods else 0
    _check_budget(n_wiks, draws, "power study")

    rows = []
    for key, grid in scenarios:
        bivariate = isinstance(key, str)
        if bivariate and set(methods) - {"WIKS"}:
            raise ConfigurationError("bivariate scenarios support only the WIKS method")
        pr = prior or (DPPrior(1.0, (Normal(), Normal())) if bivariate else DPPrior())
        for t_idx, theta in enumerate(grid):
            scenario(key, theta)  # validate (and warn) once, before fan-out
            jobs = [(key, theta, t_idx, r, methods, sizes, thresholds, alpha, pr, spec,
                     draws, seed, trunc_eps, max_atoms) for r in range(reps)]
            results = _parallel_map(_power_replicate, jobs, workers)
            for method in methods:
                p = sum(bool(res[method]) for res in results) / reps
                rows.append(PowerRow(str(key), theta, method, p, reps,
                                     math.sqrt(p * (1.0 - p) / reps)))
    return PowerTable(rows)
