"""Limiting variances of full linear eigenvalue statistics.

Both variances share a double integral of the squared divided difference of
``f`` against the kernel ``(4 - uv) / (sqrt(4-u^2) sqrt(4-v^2))``, where
``u = x`` for Wigner matrices and ``u = x - 2`` for sample covariance
matrices.  With ``u = 2 cos(theta)`` the inverse square root weights become
``d theta`` exactly, and the kernel turns into ``4 - 4 cos(theta) cos(phi)``.

The outer grid is the Gauss-Chebyshev (first kind) midpoint grid in theta,
the inner grid is the same grid shifted by half a step (Chebyshev-Lobatto
points, trapezoid weights), so no node pair sits on the diagonal ``x = y``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NonConvergenceError
from .functions import TestFunction

DEFAULT_NODES = 256
MIN_NODES = 32
CONVERGENCE_TOL = 1e-7
_NEAR_DIAGONAL = 1e-8


@dataclass(frozen=True)
class VarianceReport:
    main_term: float
    fourth_moment_term: float
    diagonal_term: float | None  # Wigner only
    total: float
    node_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def divided_difference(f: TestFunction, x, y):
    """(f(x) - f(y)) / (x - y), with f' at the midpoint near the diagonal."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    diff = x - y
    scale = np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    near = np.abs(diff) <= _NEAR_DIAGONAL * scale
    safe = np.where(near, 1.0, diff)
    out = np.where(near, 0.0, (np.asarray(f(x), dtype=float) - np.asarray(f(y), dtype=float)) / safe)
    if np.any(near):
        mid = 0.5 * (x[near] + y[near])
        out = np.array(out, dtype=float)
        out[near] = np.asarray(f.derivative(mid), dtype=float)
    return float(out) if out.ndim == 0 else out


def _grids(nodes: int):
    step = math.pi / nodes
    th = (np.arange(nodes) + 0.5) * step
    w_th = np.full(nodes, step)
    ph = np.arange(nodes + 1) * step
    w_ph = np.full(nodes + 1, step)
    w_ph[[0, -1]] *= 0.5
    return th, w_th, ph, w_ph


def _values(f: TestFunction, x: np.ndarray) -> np.ndarray:
    v = np.asarray(f(x), dtype=float)
    if v.shape != x.shape:
        v = np.broadcast_to(v, x.shape).astype(float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"test function {f.name!r} is not finite on the support")
    return v


def _check_inputs(f: TestFunction, nodes: int):
    if not f.bounded:
        raise ValueError(f"test function {f.name!r} is flagged unbounded")
    if nodes < MIN_NODES:
        raise ValueError(f"nodes must be >= {MIN_NODES}")


def _main_term(f: TestFunction, shift: float, nodes: int) -> float:
    th, w_th, ph, w_ph = _grids(nodes)
    ct, cp = np.cos(th), np.cos(ph)
    x = shift + 2.0 * ct[:, None]
    y = shift + 2.0 * cp[None, :]
    _values(f, x[:, 0])
    _values(f, y[0, :])
    dd = divided_difference(f, x, y)
    kernel = 4.0 - 4.0 * ct[:, None] * cp[None, :]
    integrand = dd * dd * kernel * w_th[:, None] * w_ph[None, :]
    return math.fsum(integrand.ravel()) / (2.0 * math.pi**2)


def _chebyshev_moment(f: TestFunction, shift: float, weight, nodes: int) -> float:
    """Integral over theta in (0, pi) of f(shift + 2 cos theta) * weight(cos theta)."""
    th = (np.arange(nodes) + 0.5) * math.pi / nodes
    c = np.cos(th)
    vals = _values(f, shift + 2.0 * c)
    return math.fsum(vals * weight(c)) * math.pi / nodes


def _wigner_terms(f, m4, sigma2, nodes):
    main = _main_term(f, 0.0, nodes)
    # (2 - x^2) / sqrt(4 - x^2) dx = (2 - 4 cos^2) d theta
    i4 = _chebyshev_moment(f, 0.0, lambda c: 2.0 - 4.0 * c * c, nodes)
    # x / sqrt(4 - x^2) dx = 2 cos d theta
    i2 = _chebyshev_moment(f, 0.0, lambda c: 2.0 * c, nodes)
    fourth = (m4 - 3.0) / (2.0 * math.pi**2) * i4 * i4
    diag = (sigma2 - 2.0) / (4.0 * math.pi**2) * i2 * i2
    return main, fourth, diag


def _sc_terms(f, m4, nodes, literal):
    main = _main_term(f, 2.0, nodes)
    if literal:
        # integrand without f: (x - 2) / sqrt(4 - (x-2)^2) dx = 2 cos d theta
        th = (np.arange(nodes) + 0.5) * math.pi / nodes
        i1 = math.fsum(2.0 * np.cos(th)) * math.pi / nodes
    else:
        i1 = _chebyshev_moment(f, 2.0, lambda c: 2.0 * c, nodes)
    fourth = (m4 - 3.0) / (4.0 * math.pi**2) * i1 * i1
    return main, fourth


def wigner_variance(
    f: TestFunction, m4: float, sigma2: float, nodes: int = DEFAULT_NODES, check: bool = True
) -> VarianceReport:
    """Limiting variance of tr f(M) - E tr f(M) for a real Wigner matrix.

    ``m4`` is the fourth moment of the unit-variance off-diagonal entries and
    ``sigma2`` the variance of the diagonal entries.
    """
    if m4 < 1.0:
        raise ValueError("m4 must be >= 1 for a unit-variance entry")
    if sigma2 < 0.0:
        raise ValueError("sigma2 must be nonnegative")
    _check_inputs(f, nodes)
    main, fourth, diag = _wigner_terms(f, m4, sigma2, nodes)
    total = main + fourth + diag
    if check:
        fine = sum(_wigner_terms(f, m4, sigma2, 2 * nodes))
        if not abs(fine - total) <= CONVERGENCE_TOL:
            raise NonConvergenceError(f"wigner_variance[{f.name}]", total, fine, CONVERGENCE_TOL)
    return VarianceReport(main, fourth, diag, total, nodes)


def sc_variance(
    f: TestFunction,
    m4: float,
    nodes: int = DEFAULT_NODES,
    check: bool = True,
    literal_fourth_moment_term: bool = False,
) -> VarianceReport:
    """Limiting variance of tr f(A) - E tr f(A) for a real sample covariance matrix.

    By default the fourth-moment term integrates ``f(x) (x-2) / sqrt(4-(x-2)^2)``.
    ``literal_fourth_moment_term=True`` drops ``f`` from that integrand; the
    integral is then zero by symmetry and the term vanishes for every ``f``.
    Kept only for comparison: it disagrees with Var(tr A) -> m4 - 1.
    """
    if m4 < 1.0:
        raise ValueError("m4 must be >= 1 for a unit-variance entry")
    _check_inputs(f, nodes)
    main, fourth = _sc_terms(f, m4, nodes, literal_fourth_moment_term)
    total = main + fourth
    if check:
        fine = sum(_sc_terms(f, m4, 2 * nodes, literal_fourth_moment_term))
        if not abs(fine - total) <= CONVERGENCE_TOL:
            raise NonConvergenceError(f"sc_variance[{f.name}]", total, fine, CONVERGENCE_TOL)
    return VarianceReport(main, fourth, None, total, nodes)
