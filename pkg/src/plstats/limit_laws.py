"""Semicircle and Marchenko-Pastur (square case) laws.

Both CDFs reduce to the same angle form.  With ``x = 2 sin t`` (semicircle)
or ``x = 4 sin^2 t`` (Marchenko-Pastur) the mass below ``x`` is a function of
``h(t) = 2t + sin 2t``:

    semicircle:         F = 1/2 + h(t) / (2 pi),   t in [-pi/2, pi/2]
    Marchenko-Pastur:   F = h(t) / pi,             t in [0, pi/2]

Quantiles are found by solving ``h(t) = c`` in the angle.  In the angle the
Marchenko-Pastur hard edge is regular (``t ~ sqrt(x)/2``), so no special
handling of the inverse square root singularity is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import NonConvergenceError

QUADRATURE_NODES = 1024
QUADRATURE_TOL = 1e-10
_BISECT_WIDTH = 1e-13


@dataclass(frozen=True)
class LimitLaw:
    kind: str
    support: tuple[float, float]

    @property
    def left(self) -> float:
        return self.support[0]

    @property
    def right(self) -> float:
        return self.support[1]


SEMICIRCLE = LimitLaw("semicircle", (-2.0, 2.0))
MARCHENKO_PASTUR = LimitLaw("marchenko_pastur", (0.0, 4.0))

_BY_NAME = {
    "semicircle": SEMICIRCLE,
    "wigner": SEMICIRCLE,
    "marchenko_pastur": MARCHENKO_PASTUR,
    "mp": MARCHENKO_PASTUR,
    "sc": MARCHENKO_PASTUR,
    "sample_cov": MARCHENKO_PASTUR,
}


def get_law(name: str | LimitLaw) -> LimitLaw:
    if isinstance(name, LimitLaw):
        return name
    try:
        return _BY_NAME[name.lower()]
    except KeyError:
        raise KeyError(f"unknown limit law {name!r}") from None


@dataclass(frozen=True)
class ClassicalLocations:
    n: int
    values: np.ndarray

    def __getitem__(self, j):
        """1-based access, matching the eigenvalue labels lambda_1..lambda_n."""
        if isinstance(j, slice):
            raise TypeError("use .values for slicing")
        if not 1 <= j <= self.n:
            raise IndexError(f"location index {j} outside 1..{self.n}")
        return float(self.values[j - 1])


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def density(law: LimitLaw, x):
    x_arr = np.asarray(x, dtype=float)
    out = np.zeros_like(x_arr)
    if law is SEMICIRCLE or law.kind == "semicircle":
        inside = np.abs(x_arr) <= 2.0
        xi = x_arr[inside]
        out[inside] = np.sqrt(4.0 - xi * xi) / (2.0 * math.pi)
    else:
        inside = (x_arr > 0.0) & (x_arr < 4.0)
        xi = x_arr[inside]
        out[inside] = np.sqrt((4.0 - xi) / xi) / (2.0 * math.pi)
    return _scalar_or_array(x, out)


def _angle(law: LimitLaw, x: np.ndarray) -> np.ndarray:
    if law.kind == "semicircle":
        return np.arcsin(np.clip(x, -2.0, 2.0) / 2.0)
    return np.arcsin(np.sqrt(np.clip(x, 0.0, 4.0)) / 2.0)


def _h(t):
    return 2.0 * t + np.sin(2.0 * t)


def cdf(law: LimitLaw, x):
    x_arr = np.asarray(x, dtype=float)
    t = _angle(law, x_arr)
    if law.kind == "semicircle":
        out = 0.5 + _h(t) / (2.0 * math.pi)
    else:
        out = _h(t) / math.pi
    out = np.clip(out, 0.0, 1.0)
    out = np.where(x_arr <= law.left, 0.0, out)
    out = np.where(x_arr >= law.right, 1.0, out)
    return _scalar_or_array(x, out)


def _solve_angle(c: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Solve 2t + sin 2t = c for t in [lo, hi], elementwise."""
    a = np.full_like(c, lo)
    b = np.full_like(c, hi)
    iters = int(math.ceil(math.log2((hi - lo) / _BISECT_WIDTH))) + 1
    for _ in range(iters):
        mid = 0.5 * (a + b)
        below = _h(mid) < c
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    t = 0.5 * (a + b)
    # one Newton step, kept only where the slope is healthy and the step stays bracketed
    slope = 4.0 * np.cos(t) ** 2
    ok = slope > 1e-3
    step = np.where(ok, (_h(t) - c) / np.where(ok, slope, 1.0), 0.0)
    t_new = t - step
    keep = ok & (t_new >= a - _BISECT_WIDTH) & (t_new <= b + _BISECT_WIDTH)
    return np.where(keep, t_new, t)


def _quantile_unchecked(law: LimitLaw, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if law.kind == "semicircle":
        t = _solve_angle(math.pi * (2.0 * p - 1.0), -math.pi / 2, math.pi / 2)
        x = 2.0 * np.sin(t)
    else:
        t = _solve_angle(math.pi * p, 0.0, math.pi / 2)
        s = np.sin(t)
        x = 4.0 * s * s
    return np.clip(x, law.left, law.right)


def quantile(law: LimitLaw, p):
    """Inverse CDF on the open interval (0, 1)."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise ValueError("quantile requires 0 < p < 1")
    return _scalar_or_array(p, _quantile_unchecked(law, p_arr))


def classical_locations(law: LimitLaw, n: int) -> ClassicalLocations:
    """Locations solving F(loc_j) = j/n, with loc_n pinned to the right edge."""
    if n < 1:
        raise ValueError("n must be positive")
    values = np.empty(n)
    if n > 1:
        values[:-1] = _quantile_unchecked(law, np.arange(1, n) / n)
    values[-1] = law.right
    values.flags.writeable = False
    return ClassicalLocations(n, values)


def sample(law: LimitLaw, count: int, seed) -> np.ndarray:
    """I.i.d. draws by inverse CDF of a seeded uniform stream."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    u = _rng.generator(seed).random(count)
    return _quantile_unchecked(law, u)


# quadrature against the limit density, in the angle x = 2 cos(th) or 2 + 2 cos(th):
#   semicircle:  rho(x) dx = (1 - cos 2th) dth / pi
#   MP:          rho(x) dx = (1 - cos th)  dth / pi
def _nodes(law: LimitLaw, nodes: int):
    th = (np.arange(nodes) + 0.5) * math.pi / nodes
    c = np.cos(th)
    if law.kind == "semicircle":
        return 2.0 * c, (1.0 - np.cos(2.0 * th)) / nodes
    return 2.0 + 2.0 * c, (1.0 - c) / nodes


def _integrate(law: LimitLaw, g, nodes: int) -> float:
    x, w = _nodes(law, nodes)
    return math.fsum(w * np.asarray(g(x), dtype=float))


def _converged(law, g, nodes, what):
    coarse = _integrate(law, g, nodes)
    fine = _integrate(law, g, 2 * nodes)
    if not abs(fine - coarse) <= QUADRATURE_TOL:
        raise NonConvergenceError(what, coarse, fine, QUADRATURE_TOL)
    return fine


def expect_f(law: LimitLaw, f, nodes: int = QUADRATURE_NODES) -> float:
    """E f(psi) for psi distributed by ``law``."""
    return _converged(law, f, nodes, f"E f under {law.kind}")


def var_f(law: LimitLaw, f, nodes: int = QUADRATURE_NODES) -> float:
    """Var f(psi) for psi distributed by ``law``."""
    mean = expect_f(law, f, nodes)
    v = _converged(law, lambda x: (np.asarray(f(x), dtype=float) - mean) ** 2, nodes, f"Var f under {law.kind}")
    return max(v, 0.0)


def moment(law: LimitLaw, order: int, nodes: int = QUADRATURE_NODES) -> float:
    return expect_f(law, lambda x: x**order, nodes)
