"""Sample files, model spec strings and JSON/CSV result files."""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import distributions as dist
from .baselines import TestReport
from .calibration import CalibrationConfig, CalibrationResult, PowerTable
from .core import PowerComplement, TabulatedCDF, UniformWeight
from .distributions import SeedSpec
from .dp_posterior import DPPrior
from .exceptions import ParseError, UsageError

__all__ = [
    "parse_samples",
    "parse_sample_text",
    "parse_model",
    "model_to_dict",
    "model_from_dict",
    "calibration_to_dict",
    "calibration_from_dict",
    "write_calibration",
    "read_calibration",
    "write_report",
    "read_report",
    "write_power_table",
    "read_power_table",
]


def _number(cell: str, line: int) -> float:
    text = cell.strip()
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {text!r}", line) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", line)
    return value


def parse_sample_text(text: str) -> np.ndarray:
    """Parse CSV text with one observation per row.

    One column gives a univariate sample of shape ``(n,)``; two columns a
    bivariate sample of shape ``(n, 2)``.  A first row that is not
    entirely numeric is taken as a header.  Blank lines are ignored.
    Decimal points are always ``.``; commas separate columns.
    """
    rows, width, first = [], None, True
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        cells = raw.split(",")
        if first:
            first = False
            if not all(_is_number(c) for c in cells):
                continue  # header
        values = [_number(c, line_no) for c in cells]
        if width is None:
            if len(values) not in (1, 2):
                raise ParseError(f"expected 1 or 2 columns, found {len(values)}", line_no)
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"row has {len(values)} columns, earlier rows have {width}",
                             line_no)
        rows.append(values)
    if not rows:
        raise ParseError("no observations found")
    arr = np.array(rows, dtype=float)
    return arr[:, 0] if width == 1 else arr


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_samples(path) -> np.ndarray:
    """Read a sample file; see :func:`parse_sample_text`."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        return parse_sample_text(text)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


# Models -------------------------------------------------------------------

_FAMILIES = {
    "normal": dist.Normal,
    "uniform": dist.Uniform,
    "lognormal": dist.LogNormal,
    "beta": dist.Beta,
    "gamma": dist.Gamma,
    "t": dist.StudentT,
    "mixture": dist.NormalMixture,
}


def parse_model(text: str):
    """Build a univariate model from ``"family:p1,p2,..."``.

    Families: normal(mean, sd), uniform(lo, hi), lognormal(log_mean,
    log_sd), beta(a, b), gamma(shape, rate), t(df), mixture(weight, mean1,
    sd1, mean2, sd2).  ``"normal"`` alone means N(0, 1).
    """
    family, _, params = text.strip().partition(":")
    cls = _FAMILIES.get(family.strip().lower())
    if cls is None:
        raise UsageError(f"unknown distribution family {family!r}; "
                         f"choose from {', '.join(_FAMILIES)}")
    try:
        args = [float(p) for p in params.split(",")] if params.strip() else []
        return cls(*args)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad parameters for {family}: {exc}") from None


_CLASSES = {cls.__name__: cls for cls in list(_FAMILIES.values())
            + [PowerComplement, UniformWeight, TabulatedCDF]}


def model_to_dict(obj) -> dict:
    """Tagged-dict form of a model, prior or weight specification."""
    if isinstance(obj, DPPrior):
        base = ([model_to_dict(b) for b in obj.base] if isinstance(obj.base, tuple)
                else model_to_dict(obj.base))
        return {"family": "DPPrior", "concentration": obj.concentration, "base": base}
    if isinstance(obj, dist.BivariateNormal):
        return {"family": "BivariateNormal", "mean": list(obj.mean),
                "cov": [list(r) for r in obj.cov]}
    if isinstance(obj, TabulatedCDF):
        return {"family": "TabulatedCDF", "knots": obj.knots.tolist(),
                "values": obj.values.tolist()}
    return {"family": type(obj).__name__, **asdict(obj)}


def model_from_dict(d: dict):
    d = dict(d)
    family = d.pop("family")
    if family == "DPPrior":
        base = d["base"]
        base = (tuple(model_from_dict(b) for b in base) if isinstance(base, list)
                else model_from_dict(base))
        return DPPrior(d["concentration"], base)
    if family == "BivariateNormal":
        return dist.BivariateNormal(tuple(d["mean"]), tuple(map(tuple, d["cov"])))
    if family not in _CLASSES:
        raise ParseError(f"unknown model family {family!r}")
    return _CLASSES[family](**d)


# Calibration files --------------------------------------------------------


def calibration_to_dict(result: CalibrationResult) -> dict:
    cfg = result.config
    settings = {k: (v if isinstance(v, (int, float, str)) else model_to_dict(v))
                for k, v in result.settings.items()}
    return {
        "threshold": result.threshold,
        "mode": result.mode,
        "config": {
            "n": cfg.n, "m": cfg.m, "replicates": cfg.replicates, "alpha": cfg.alpha,
            "null_model": model_to_dict(cfg.null_model), "mode": cfg.mode,
            "concentration": cfg.concentration,
        },
        "seed": {"seed": result.seed.seed, "stream": list(result.seed.stream)},
        "settings": settings,
        "values": [float(v) for v in result.values],
    }


def calibration_from_dict(d: dict) -> CalibrationResult:
    c = dict(d["config"])
    c["null_model"] = model_from_dict(c["null_model"])
    settings = {k: (model_from_dict(v) if isinstance(v, dict) else v)
                for k, v in d.get("settings", {}).items()}
    return CalibrationResult(
        float(d["threshold"]), d["mode"], np.array(d["values"], dtype=float),
        CalibrationConfig(**c), SeedSpec(d["seed"]["seed"], tuple(d["seed"]["stream"])),
        settings)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_calibration(path, result: CalibrationResult):
    Path(path).write_text(_dump(calibration_to_dict(result)), encoding="utf-8")


def read_calibration(path) -> CalibrationResult:
    return calibration_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# Test reports -------------------------------------------------------------


def write_report(path, reports: list, extra: dict | None = None):
    """Write test reports as JSON: ``{"reports": [...], **extra}``."""
    payload = {"reports": [r.to_dict() for r in reports]}
    payload.update(extra or {})
    Path(path).write_text(_dump(payload), encoding="utf-8")


def read_report(path) -> list:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [TestReport.from_dict(r) for r in data["reports"]]


# Power tables -------------------------------------------------------------


def write_power_table(path, table: PowerTable):
    Path(path).write_text(table.to_csv(), encoding="utf-8")


def read_power_table(path) -> PowerTable:
    return PowerTable.from_csv(Path(path).read_text(encoding="utf-8"))
