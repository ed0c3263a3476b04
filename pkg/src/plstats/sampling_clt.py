"""Sampling without replacement from {1, ..., n} and its martingale CLT.

For a path xi_1, ..., xi_k of distinct labels with zeta_i = xi_i / n, write
E_j for conditional expectation given the first j draws.  The increments

    Z_j = alpha * sum_{i<=k} (E_j g(zeta_i) - E_{j-1} g(zeta_i))
        = alpha * (n - k) / (n - j) * (g(zeta_j) - E_{j-1} g(zeta_j))

form a martingale difference sequence whose sum is the centered, scaled
sample total.  Exhaustive routines work in exact rational arithmetic when the
test function supports :class:`fractions.Fraction` inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rng as _rng
from .spectra import alpha

MAX_EXHAUSTIVE_N = 10


@dataclass(frozen=True)
class SamplePath:
    n: int
    k: int
    xi: tuple[int, ...]  # 1-based labels

    @property
    def zeta(self) -> np.ndarray:
        return np.asarray(self.xi, dtype=float) / self.n


@dataclass(frozen=True)
class MartingaleDecomposition:
    increments: tuple
    partial_sums: tuple
    predictable_variance: float


def sample_without_replacement(n: int, k: int, seed) -> SamplePath:
    """Uniform ordered k-tuple of distinct labels in 1..n."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    xi = _rng.generator(seed).permutation(n)[:k] + 1
    return SamplePath(n, k, tuple(int(v) for v in xi))


def _value_table(g, n: int, exact: bool) -> list:
    """g(t/n) for t = 1..n, indexed by t (slot 0 unused)."""
    if exact:
        return [None] + [g(Fraction(t, n)) for t in range(1, n + 1)]
    vals = np.asarray(g(np.arange(1, n + 1) / n), dtype=float) * np.ones(n)
    return [None] + [float(v) for v in vals]


def _mean(values):
    if values and isinstance(values[0], Fraction):
        return sum(values, Fraction(0)) / len(values)
    return math.fsum(values) / len(values)


def _use_exact(g, exact):
    if exact is None:
        return bool(getattr(g, "rational", False))
    return exact


def conditional_mean(prefix, g, n: int, exact: bool | None = None):
    """E_{j-1} g(zeta_j): average of g(t/n) over labels not in ``prefix``."""
    prefix = set(prefix)
    if len(prefix) >= n:
        raise ValueError("prefix exhausts the population")
    table = _value_table(g, n, _use_exact(g, exact))
    return _mean([table[t] for t in range(1, n + 1) if t not in prefix])


def recursion_residual(prefix, g, n: int, exact: bool | None = None):
    """|E_j g(zeta_{j+1}) - ((1 + 1/(n-j)) E_{j-1} g(zeta_j) - g(zeta_j) / (n-j))|.

    ``prefix`` holds the first j draws (j >= 1); the last entry is xi_j.
    """
    prefix = list(prefix)
    j = len(prefix)
    if not 1 <= j < n:
        raise ValueError("recursion needs 1 <= j < n")
    ex = _use_exact(g, exact)
    table = _value_table(g, n, ex)
    lhs = conditional_mean(prefix, g, n, ex)
    prev = conditional_mean(prefix[:-1], g, n, ex)
    m = n - j
    if ex:
        rhs = (1 + Fraction(1, m)) * prev - Fraction(1, m) * table[prefix[-1]]
    else:
        rhs = (1 + 1 / m) * prev - table[prefix[-1]] / m
    return abs(lhs - rhs)


def _unscaled_closed_form(path_xi, table, n, k, j):
    """Z_j / alpha via the closed form."""
    prev = _mean([table[t] for t in range(1, n + 1) if t not in set(path_xi[: j - 1])])
    factor = Fraction(n - k, n - j) if isinstance(prev, Fraction) else (n - k) / (n - j)
    return factor * (table[path_xi[j - 1]] - prev)


def _unscaled_telescoping(path_xi, table, n, k, j):
    """Z_j / alpha via sum_i (E_j g(zeta_i) - E_{j-1} g(zeta_i))."""

    def cond(i, given):
        # E_given g(zeta_i): known if i <= given, else mean over the unused labels
        if i <= given:
            return table[path_xi[i - 1]]
        return _mean([table[t] for t in range(1, n + 1) if t not in set(path_xi[:given])])

    terms = [cond(i, j) - cond(i, j - 1) for i in range(1, k + 1)]
    if terms and isinstance(terms[0], Fraction):
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def _check_path(path: SamplePath, j: int):
    if not 0 < path.k < path.n:
        raise ValueError("martingale increments need 0 < k < n")
    if not 1 <= j <= path.k:
        raise ValueError(f"need 1 <= j <= k = {path.k}")


def martingale_increment(path: SamplePath, g, j: int, exact: bool | None = None, method: str = "closed"):
    """Z_{n,j} for one path; ``method`` is "closed" or "telescoping"."""
    _check_path(path, j)
    ex = _use_exact(g, exact)
    table = _value_table(g, path.n, ex)
    fn = _unscaled_closed_form if method == "closed" else _unscaled_telescoping
    return alpha(path.n, path.k) * float(fn(path.xi, table, path.n, path.k, j))


def decompose(path: SamplePath, g) -> MartingaleDecomposition:
    """Increments, partial sums and predictable variance sum_j E_{j-1} Z_j^2."""
    n, k = path.n, path.k
    _check_path(path, 1)
    table = _value_table(g, n, False)
    a = alpha(n, k)
    incs, pv = [], []
    for j in range(1, k + 1):
        incs.append(a * _unscaled_closed_form(path.xi, table, n, k, j))
        rest = [table[t] for t in range(1, n + 1) if t not in set(path.xi[: j - 1])]
        m1 = math.fsum(rest) / len(rest)
        m2 = math.fsum(v * v for v in rest) / len(rest)
        pv.append((a * (n - k) / (n - j)) ** 2 * (m2 - m1 * m1))
    return MartingaleDecomposition(tuple(incs), tuple(itertools.accumulate(incs)), math.fsum(pv))


def centered_total(path: SamplePath, g) -> float:
    """alpha * sum_i (g(zeta_i) - E g(zeta_1))."""
    table = _value_table(g, path.n, False)
    mean = math.fsum(table[1:]) / path.n
    return alpha(path.n, path.k) * math.fsum(table[t] - mean for t in path.xi)


# -- exhaustive checks --------------------------------------------------------


def _ordered_tuples(n: int, length: int):
    return itertools.permutations(range(1, n + 1), length)


def martingale_exhaustive(n: int, k: int, g) -> dict:
    """Check, over every ordered k-path, the closed form against the telescoping
    definition and the vanishing conditional mean given each prefix.

    Values are Z / alpha, exact when ``g`` is rational.
    """
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive enumeration capped at n <= {MAX_EXHAUSTIVE_N}")
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    ex = _use_exact(g, None)
    table = _value_table(g, n, ex)
    max_form_gap = 0
    paths = 0
    for xi in _ordered_tuples(n, k):
        paths += 1
        for j in range(1, k + 1):
            gap = abs(_unscaled_closed_form(xi, table, n, k, j) - _unscaled_telescoping(xi, table, n, k, j))
            max_form_gap = max(max_form_gap, gap)
    max_cond_mean = 0
    for j in range(1, k + 1):
        for prefix in _ordered_tuples(n, j - 1):
            nxt = [t for t in range(1, n + 1) if t not in prefix]
            zs = [_unscaled_closed_form(prefix + (t,), table, n, k, j) for t in nxt]
            max_cond_mean = max(max_cond_mean, abs(_mean(zs)))
    return {
        "n": n,
        "k": k,
        "paths": paths,
        "exact": ex,
        "max_form_gap": max_form_gap,
        "max_conditional_mean": max_cond_mean,
    }


def lemma_b2_residuals(n: int, k: int, j: int, g, exact: bool | None = None):
    """(r2, r4): distance of E[(E_{j-1} g(zeta_j))^p] from (E g(zeta_1))^p, p = 2, 4.

    Computed by enumerating every ordered (j-1)-prefix.
    """
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive enumeration capped at n <= {MAX_EXHAUSTIVE_N}")
    if not 1 <= j <= k <= n:
        raise ValueError("need 1 <= j <= k <= n")
    ex = _use_exact(g, exact)
    table = _value_table(g, n, ex)
    mean = _mean(table[1:])
    m2, m4, count = [], [], 0
    for prefix in _ordered_tuples(n, j - 1):
        c = _mean([table[t] for t in range(1, n + 1) if t not in prefix])
        m2.append(c**2)
        m4.append(c**4)
        count += 1
    e2, e4 = _mean(m2), _mean(m4)
    return abs(e2 - mean**2), abs(e4 - mean**4)


def second_moment_expansion(n: int, j: int, g, exact: bool | None = None):
    """E[(E_{j-1} g)^2] = E g^2 / N + (N-1)/N * E[g(zeta_1) g(zeta_2)], N = n - j + 1."""
    ex = _use_exact(g, exact)
    table = _value_table(g, n, ex)
    vals = table[1:]
    s1 = sum(vals, Fraction(0)) if ex else math.fsum(vals)
    s2 = sum((v * v for v in vals), Fraction(0)) if ex else math.fsum(v * v for v in vals)
    eg2 = s2 / n
    cross = (s1 * s1 - s2) / (n * (n - 1))  # E[g(zeta_1) g(zeta_2)]
    big_n = n - j + 1
    if ex:
        return eg2 / big_n + Fraction(big_n - 1, big_n) * cross
    return eg2 / big_n + (big_n - 1) / big_n * cross


def lemma_b2_table(n_max: int, g) -> list[dict]:
    """Residuals and (n-j+1)-scaled residuals over 2 <= n <= n_max, 1 <= j <= n."""
    rows = []
    for n in range(2, n_max + 1):
        for j in range(1, n + 1):
            r2, r4 = lemma_b2_residuals(n, n, j, g)
            rows.append(
                {
                    "n": n,
                    "j": j,
                    "r2": float(r2),
                    "r4": float(r4),
                    "r2_scaled": float(r2 * (n - j + 1)),
                    "r4_scaled": float(r4 * (n - j + 1)),
                }
            )
    return rows


def predictable_variance_limit(n: int, k: int) -> float:
    """alpha^2 (n-k)^2 sum_{j=1}^k (n-j)^{-2}."""
    alpha(n, k)  # validates 0 < k < n
    a2 = n / (k * (n - k))
    m = np.arange(n - k, n, dtype=float)  # n - j for j = k..1
    s = math.fsum(1.0 / (m * m))
    return a2 * (n - k) ** 2 * s


def population_variance(g, n: int) -> float:
    """Var g(zeta_1) with zeta_1 uniform on {1/n, ..., 1}."""
    vals = np.asarray(g(np.arange(1, n + 1) / n), dtype=float) * np.ones(n)
    mean = math.fsum(vals) / n
    return math.fsum((vals - mean) ** 2) / n


def sampling_clt_statistic(n: int, k: int, g, seed) -> float:
    """alpha * sum_{i<=k} (g(zeta_i) - E g(zeta_1)) for one sampled path."""
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    return centered_total(sample_without_replacement(n, k, seed), g)


def sampling_clt_samples(n: int, k: int, g, reps: int, master_seed: int) -> np.ndarray:
    """``reps`` independent statistics; replication r uses stream (master_seed, SAMPLING, r)."""
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    vals = np.asarray(g(np.arange(1, n + 1) / n), dtype=float) * np.ones(n)
    mean = math.fsum(vals) / n
    a = alpha(n, k)
    out = np.empty(reps)
    for r in range(reps):
        xi = _rng.derive(master_seed, _rng.SAMPLING, r).permutation(n)[:k]
        out[r] = a * math.fsum(vals[xi] - mean)
    return out
