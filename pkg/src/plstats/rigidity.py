"""Eigenvalue rigidity profiles and deterministic edge bounds for classical locations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import limit_laws
from .limit_laws import ClassicalLocations
from .spectra import Spectrum

CASE_SPLIT_EPS = 1.0 / 200


@dataclass(frozen=True)
class RigidityProfile:
    n: int
    deviations: np.ndarray
    weighted: np.ndarray
    max_weighted: float

    def argmax(self) -> int:
        """1-based index of the largest weighted deviation."""
        return int(np.argmax(self.weighted)) + 1

    def rows(self, spec: Spectrum, locs: ClassicalLocations):
        for j in range(self.n):
            yield j + 1, float(spec.ordered[j]), float(locs.values[j]), float(self.deviations[j]), float(
                self.weighted[j]
            )


def _deviations(spec: Spectrum, locs: ClassicalLocations) -> np.ndarray:
    if spec.n != locs.n:
        raise ValueError(f"size mismatch: spectrum has n={spec.n}, locations n={locs.n}")
    return np.abs(np.asarray(spec.ordered) - np.asarray(locs.values))


def _profile(dev: np.ndarray, weights: np.ndarray) -> RigidityProfile:
    w = dev * weights
    return RigidityProfile(len(dev), dev, w, float(w.max()) if len(w) else 0.0)


def wigner_rigidity(spec: Spectrum, locs: ClassicalLocations) -> RigidityProfile:
    """|lambda_j - eta_j| n^{2/3} min(j, n-j+1)^{1/3}."""
    dev = _deviations(spec, locs)
    n = spec.n
    j = np.arange(1, n + 1)
    return _profile(dev, n ** (2.0 / 3.0) * np.minimum(j, n - j + 1) ** (1.0 / 3.0))


def sc_rigidity(spec: Spectrum, locs: ClassicalLocations) -> RigidityProfile:
    """|lambda_j - gamma_j| n^{2/3}."""
    dev = _deviations(spec, locs)
    return _profile(dev, np.full(spec.n, spec.n ** (2.0 / 3.0)))


def polylog_envelope(n: int, c: float) -> float:
    """(log n)^{c log log n}; with c = 1 this is phi_n."""
    if n < 3:
        raise ValueError("polylog envelope needs n >= 3 (log log n > 0)")
    ll = math.log(math.log(n))
    return math.exp(c * ll * ll)


def growth_exponent(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(values, dtype=float)), 1)
    return float(slope)


@dataclass
class EdgeBoundReport:
    n: int
    c: float
    eps: float
    phi_c: float
    hard_edge: list = field(default_factory=list)  # (j, gamma_j, bound, holds)
    soft_edge: list = field(default_factory=list)  # (k, |4 - gamma_{n-k}|, bound, holds)

    @property
    def hard_edge_ok(self) -> bool:
        return all(r[3] for r in self.hard_edge)

    @property
    def soft_edge_ok(self) -> bool:
        return all(r[3] for r in self.soft_edge)

    @property
    def soft_edge_failures(self) -> list:
        return [r for r in self.soft_edge if not r[3]]

    @property
    def ok(self) -> bool:
        return self.hard_edge_ok and self.soft_edge_ok


def soft_edge_bound(n: int, phi_c: float, constant: float = 9 * math.sqrt(2) * math.pi) -> float:
    """(constant * phi_c / n)^{2/3}; the default constant is 9 sqrt(2) pi."""
    return (constant * phi_c / n) ** (2.0 / 3.0)


def edge_bound_checks(
    n: int,
    c: float = 1.0,
    eps: float = CASE_SPLIT_EPS,
    soft_constant: float = 9 * math.sqrt(2) * math.pi,
    locs: ClassicalLocations | None = None,
) -> EdgeBoundReport:
    """Check the Marchenko-Pastur quantile bounds at both edges.

    hard edge:  gamma_j <= pi^2 j^2 / (2 n^2)                for 1 <= j <= eps n
    soft edge:  |4 - gamma_{n-k}| <= (C phi_n^c / n)^{2/3}   for 0 <= k <= 3 phi_n^c, k < n

    ``soft_constant`` defaults to 9 sqrt(2) pi.  The correct lower bound
    rho_MP(x) >= sqrt(4-x) / (4 pi) on [2, 4] gives C = 18 pi instead.
    """
    if locs is None:
        locs = limit_laws.classical_locations(limit_laws.MARCHENKO_PASTUR, n)
    phi_c = polylog_envelope(n, c)
    rep = EdgeBoundReport(n, c, eps, phi_c)
    for j in range(1, int(math.floor(eps * n)) + 1):
        g = locs[j]
        bound = math.pi**2 * j * j / (2.0 * n * n)
        rep.hard_edge.append((j, g, bound, g <= bound))
    bound = soft_edge_bound(n, phi_c, soft_constant)
    for k in range(0, min(int(math.floor(3 * phi_c)), n - 1) + 1):
        gap = abs(4.0 - locs[n - k])
        rep.soft_edge.append((k, gap, bound, gap <= bound))
    return rep


def lipschitz_transfer(spec: Spectrum, locs: ClassicalLocations, f, indices, profile: RigidityProfile):
    """(|sum_J f(lambda_j) - sum_J f(loc_j)|, Lip |J| max_weighted n^{-2/3}) for 1-based J."""
    idx = np.asarray(list(indices), dtype=int) - 1
    lam = np.asarray(spec.ordered)[idx]
    loc = np.asarray(locs.values)[idx]
    lhs = abs(math.fsum(np.asarray(f(lam), dtype=float)) - math.fsum(np.asarray(f(loc), dtype=float)))
    rhs = f.lipschitz_bound * len(idx) * profile.max_weighted * spec.n ** (-2.0 / 3.0)
    return lhs, rhs
