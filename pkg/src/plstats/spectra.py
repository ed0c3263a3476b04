"""Spectra and (partial) linear eigenvalue statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    n: int
    ordered: np.ndarray  # lambda_1 <= ... <= lambda_n

    @classmethod
    def from_values(cls, values) -> "Spectrum":
        v = np.sort(np.asarray(values, dtype=float))
        v.flags.writeable = False
        return cls(len(v), v)


@dataclass(frozen=True)
class PartialStatResult:
    value: float
    k: int
    mode: str  # "unordered_prefix" or "sampling_complement"


def eigenvalues_sym(matrix) -> Spectrum:
    """All eigenvalues of a real symmetric (or Hermitian) matrix, ascending.

    Delegates to LAPACK (Householder tridiagonalization followed by a
    tridiagonal eigensolver) through :func:`numpy.linalg.eigvalsh`.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    vals = np.linalg.eigvalsh(a)
    vals.flags.writeable = False
    return Spectrum(a.shape[0], vals)


def _fvals(spec: Spectrum, f) -> np.ndarray:
    return np.asarray(f(spec.ordered), dtype=float) * np.ones(spec.n)


def linear_stat(spec: Spectrum, f) -> float:
    """L_n[f] = sum_i f(lambda_i)."""
    return math.fsum(_fvals(spec, f))


def _check_k(n: int, k: int):
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, n] = [0, {n}], got {k}")


def partial_from_permutation(spec: Spectrum, f, k: int, perm) -> float:
    """sum_{i=1}^{n-k} f(lambda_{perm(i)}) for a given 0-based permutation."""
    _check_k(spec.n, k)
    vals = _fvals(spec, f)
    return math.fsum(vals[np.asarray(perm[: spec.n - k], dtype=int)])


def partial_from_sample(spec: Spectrum, f, xi) -> float:
    """L_n[f] - sum_j f(lambda_{xi_j}) for distinct 0-based indices xi."""
    xi = np.asarray(xi, dtype=int)
    _check_k(spec.n, len(xi))
    vals = _fvals(spec, f)
    return math.fsum(vals) - math.fsum(vals[xi])


def partial_stat_unordered(spec: Spectrum, f, k: int, seed) -> PartialStatResult:
    """S_{n,k}[f] with eigenvalues relabeled by a uniform permutation."""
    _check_k(spec.n, k)
    perm = _rng.generator(seed).permutation(spec.n)
    return PartialStatResult(partial_from_permutation(spec, f, k, perm), k, "unordered_prefix")


def partial_stat_sampling(spec: Spectrum, f, k: int, seed) -> PartialStatResult:
    """S_{n,k}[f] in the form L_n[f] minus k eigenvalues sampled without replacement."""
    _check_k(spec.n, k)
    xi = _rng.generator(seed).choice(spec.n, size=k, replace=False)
    return PartialStatResult(partial_from_sample(spec, f, xi), k, "sampling_complement")


def alpha(n: int, k: int) -> float:
    """sqrt(n / (k (n - k)))."""
    if not 0 < k < n:
        raise ValueError(f"alpha needs 0 < k < n, got n={n}, k={k}")
    return math.sqrt(n / (k * (n - k)))
