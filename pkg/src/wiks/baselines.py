"""Classical two-sample baselines: Kolmogorov-Smirnov and Wilcoxon rank-sum."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special, stats

from .dp_posterior import AtomicDistribution
from .exceptions import DegenerateDataError, InputError
from .metrics import ks_atomic

__all__ = [
    "TestReport",
    "classical_ks_test",
    "wilcoxon_test",
    "mann_whitney_u",
    "wilcoxon_exact_pvalue",
]


@dataclass(frozen=True)
class TestReport:
    """Outcome of one two-sample test.

    Baselines fill ``p_value``; the WIKS procedure fills ``threshold``,
    ``decision`` and ``mc_std_error`` instead.
    """

    __test__ = False  # not a pytest class

    method: str
    statistic: float
    n: int
    m: int
    p_value: Optional[float] = None
    threshold: Optional[float] = None
    decision: Optional[str] = None
    mc_std_error: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TestReport":
        return cls(**d)


def _univariate(x, name):
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise InputError(f"{name} is empty")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} contains non-finite values")
    return x


def classical_ks_test(x, y) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.

    ``D`` is the Kolmogorov distance between the two empirical
    distributions; the p-value is the Kolmogorov limit survival function
    at ``sqrt(n m / (n + m)) * D``.
    """
    x, y = _univariate(x, "x"), _univariate(y, "y")
    d = ks_atomic(AtomicDistribution.empirical(x), AtomicDistribution.empirical(y))
    n, m = x.size, y.size
    p = float(np.clip(special.kolmogorov(math.sqrt(n * m / (n + m)) * d), 0.0, 1.0))
    return TestReport("KS", d, n, m, p_value=p)


def mann_whitney_u(x, y) -> float:
    """Rank-sum statistic of ``x`` minus its minimum, using midranks for ties."""
    x, y = _univariate(x, "x"), _univariate(y, "y")
    ranks = stats.rankdata(np.concatenate([x, y]))
    return float(ranks[: x.size].sum() - x.size * (x.size + 1) / 2.0)


@lru_cache(maxsize=256)
def _u_counts(n: int, m: int) -> tuple:
    """Number of rank splits giving each value of U = 0..n*m (no ties)."""
    # f[i][j] holds counts for i x-values and j y-values; U(i,j) adds j when
    # the largest pooled value is an x, nothing when it is a y
    prev = [np.zeros(1, dtype=object) for _ in range(m + 1)]
    for j in range(m + 1):
        prev[j] = np.array([1], dtype=object)
    for i in range(1, n + 1):
        cur = [np.array([1], dtype=object)]
        for j in range(1, m + 1):
            size = i * j + 1
            acc = np.zeros(size, dtype=object)
            a = prev[j]
            acc[j:j + a.size] += a
            b = cur[j - 1]
            acc[:b.size] += b
            cur.append(acc)
        prev = cur
    return tuple(int(c) for c in prev[m])


def wilcoxon_exact_pvalue(u: float, n: int, m: int) -> float:
    """Exact two-sided p-value of ``U`` assuming no ties."""
    counts = np.array(_u_counts(n, m), dtype=object)
    total = sum(counts)
    k = int(math.floor(u + 1e-9))
    lower = sum(counts[: k + 1])
    k_up = int(math.ceil(u - 1e-9))
    upper = sum(counts[k_up:])
    return min(1.0, 2.0 * min(lower, upper) / total)


def wilcoxon_test(x, y, method: str = "asymptotic") -> TestReport:
    """Wilcoxon rank-sum (Mann-Whitney) test.

    ``method="asymptotic"`` uses the normal approximation with
    tie-corrected variance and a continuity correction of 1/2 toward the
    mean.  ``method="exact"`` enumerates the null distribution and is
    only valid without ties.
    """
    x, y = _univariate(x, "x"), _univariate(y, "y")
    n, m = x.size, y.size
    pooled = np.concatenate([x, y])
    u = mann_whitney_u(x, y)
    if method == "exact":
        if np.unique(pooled).size != pooled.size:
            raise InputError("exact p-values require untied data")
        return TestReport("WILCOX", u, n, m, p_value=wilcoxon_exact_pvalue(u, n, m))
    if method != "asymptotic":
        raise InputError(f"unknown method {method!r}")
    _, ties = np.unique(pooled, return_counts=True)
    total = n + m
    tie_term = float((ties ** 3 - ties).sum()) / (total * (total - 1)) if total > 1 else 0.0
    var = n * m / 12.0 * ((total + 1) - tie_term)
    if var <= 0:
        raise DegenerateDataError("all pooled values are identical; rank variance is zero")
    delta = u - n * m / 2.0
    z = (delta - math.copysign(0.5, delta) * (delta != 0)) / math.sqrt(var)
    p = float(min(1.0, 2.0 * special.ndtr(-abs(z))))
    return TestReport("WILCOX", u, n, m, p_value=p)
