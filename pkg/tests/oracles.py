"""Independent brute-force oracles used by the test suite.

Nothing here calls into the package; each function re-derives its answer
from first principles with plain Python loops or exact rationals.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction


def erf_series(x: float, terms: int = 80) -> float:
    """Maclaurin series of erf, accurate to ~1e-15 for |x| <= 3."""
    total = []
    for k in range(terms):
        total.append((-1) ** k * x ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1)))
    return 2.0 / math.sqrt(math.pi) * math.fsum(total)


def phi(x: float) -> float:
    return 0.5 * (1.0 + erf_series(x / math.sqrt(2.0)))


def step_cdf(atoms, weights, t) -> float:
    return math.fsum(w for a, w in zip(atoms, weights) if a <= t)


def ks_brute(pa, pw, qa, qw) -> float:
    """max |F_P - F_Q| evaluated at every atom of both supports."""
    return max(abs(step_cdf(pa, pw, t) - step_cdf(qa, qw, t)) for t in list(pa) + list(qa))


def cdf2(atoms, weights, u, v) -> float:
    return math.fsum(w for (a, b), w in zip(atoms, weights) if a <= u and b <= v)


def ks2_brute(pa, pw, qa, qw) -> float:
    """Bivariate sup over the grid of all atom coordinates."""
    pts = list(pa) + list(qa)
    xs = sorted({p[0] for p in pts})
    ys = sorted({p[1] for p in pts})
    return max(abs(cdf2(pa, pw, u, v) - cdf2(qa, qw, u, v)) for u in xs for v in ys)


def z_brute(x, y, k: float) -> float:
    best = 0.0
    for t in list(x) + list(y):
        fx = sum(1 for a in x if a <= t) / (k + len(x))
        fy = sum(1 for b in y if b <= t) / (k + len(y))
        best = max(best, abs(fx - fy))
    return best


def ks_statistic_exact(x, y) -> Fraction:
    """Classical two-sample D as an exact rational."""
    n, m = len(x), len(y)
    best = Fraction(0)
    for t in list(x) + list(y):
        d = abs(Fraction(sum(1 for a in x if a <= t), n) - Fraction(sum(1 for b in y if b <= t), m))
        best = max(best, d)
    return best


def mann_whitney_brute(x, y) -> float:
    """U = #{(i, j): x_i > y_j} + 0.5 #{x_i == y_j}."""
    return sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in x for b in y)


def wilcoxon_exact_brute(x, y) -> float:
    """Two-sided exact p-value by enumerating every split of the pooled ranks."""
    n, m = len(x), len(y)
    u_obs = mann_whitney_brute(x, y)
    pooled = sorted(list(x) + list(y))
    below = above = total = 0
    for idx in itertools.combinations(range(n + m), n):
        xs = [pooled[i] for i in idx]
        ys = [pooled[i] for i in range(n + m) if i not in idx]
        u = mann_whitney_brute(xs, ys)
        total += 1
        below += u <= u_obs
        above += u >= u_obs
    return float(min(Fraction(1), Fraction(2 * min(below, above), total)))


def ks_permutation_pvalue(x, y) -> float:
    """P(D_perm >= D_obs) over all label assignments of the pooled sample."""
    n = len(x)
    pooled = list(x) + list(y)
    d_obs = ks_statistic_exact(x, y)
    hits = total = 0
    for idx in itertools.combinations(range(len(pooled)), n):
        xs = [pooled[i] for i in idx]
        ys = [pooled[i] for i in range(len(pooled)) if i not in idx]
        total += 1
        hits += ks_statistic_exact(xs, ys) >= d_obs
    return hits / total


def ks_null_cdf_equal_sizes(n: int, h: int) -> Fraction:
    """P(D <= h/n) for two untied samples of size n under the null.

    Counts monotone lattice paths from (0, 0) to (n, n) staying within
    the band |i - j| <= h.
    """
    row = [1 if j <= h else 0 for j in range(n + 1)]
    for i in range(1, n + 1):
        new = [0] * (n + 1)
        for j in range(n + 1):
            if abs(i - j) > h:
                continue
            new[j] = row[j] + (new[j - 1] if j else 0)
        row = new
    return Fraction(row[n], math.comb(2 * n, n))


def ks_critical_value_equal_sizes(n: int, alpha: float) -> float:
    """Smallest attainable D value d with P(D <= d) >= 1 - alpha."""
    for h in range(n + 1):
        if ks_null_cdf_equal_sizes(n, h) >= 1 - Fraction(alpha).limit_denominator(10**6):
            return h / n
    return 1.0
