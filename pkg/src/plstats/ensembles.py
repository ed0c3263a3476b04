"""Wigner and sample covariance generators, entry laws and moment conditions.

Entry laws carry exact moments.  The ``two_point`` law (really symmetric
four-point: +-s and +-t) has unit variance and a tunable fourth moment
``m4 >= 1``:  s^2 = 1/2,  t^2 = 2 m4 - 1,  P(|w| = t) = 1 / (4 m4 - 3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import rng as _rng

KINDS = ("gaussian", "rademacher", "uniform", "two_point", "custom")


@dataclass(frozen=True)
class EntryDistribution:
    kind: str
    variance: float = 1.0
    m4_param: float | None = None  # two_point only; fourth moment of the unit-variance law
    values: tuple[float, ...] = ()  # custom only
    probs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown entry law {self.kind!r}; known: {', '.join(KINDS)}")
        if not self.variance > 0:
            raise ValueError("variance must be positive")
        if self.kind == "two_point":
            if self.m4_param is None or self.m4_param < 1.0:
                raise ValueError("two_point law needs m4 >= 1")
        if self.kind == "custom":
            if len(self.values) == 0 or len(self.values) != len(self.probs):
                raise ValueError("custom law needs matching, nonempty values and probs")
            if any(p < 0 for p in self.probs) or abs(math.fsum(self.probs) - 1.0) > 1e-12:
                raise ValueError("custom probabilities must be nonnegative and sum to 1")
            mean = math.fsum(v * p for v, p in zip(self.values, self.probs))
            if abs(mean) > 1e-12:
                raise ValueError(f"custom law must have zero mean, got {mean}")
            var = math.fsum(v * v * p for v, p in zip(self.values, self.probs))
            if abs(var - self.variance) > 1e-12 * max(1.0, self.variance):
                raise ValueError(f"custom law variance {var} does not match declared {self.variance}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def gaussian(cls, variance: float = 1.0):
        return cls("gaussian", variance)

    @classmethod
    def rademacher(cls, variance: float = 1.0):
        return cls("rademacher", variance)

    @classmethod
    def uniform(cls, variance: float = 1.0):
        return cls("uniform", variance)

    @classmethod
    def two_point(cls, m4: float, variance: float = 1.0):
        return cls("two_point", variance, m4_param=float(m4))

    @classmethod
    def custom(cls, values, probs):
        values = tuple(float(v) for v in values)
        probs = tuple(float(p) for p in probs)
        var = math.fsum(v * v * p for v, p in zip(values, probs))
        return cls("custom", var, values=values, probs=probs)

    @classmethod
    def from_dict(cls, d: dict) -> "EntryDistribution":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind is None:
            raise ValueError("entry law needs a 'kind'")
        if kind == "custom":
            out = cls.custom(d.pop("values", ()), d.pop("probs", ()))
        elif kind == "two_point":
            if "m4" not in d:
                raise ValueError("two_point law needs 'm4'")
            out = cls.two_point(d.pop("m4"), d.pop("variance", 1.0))
        else:
            out = cls(kind, float(d.pop("variance", 1.0)))
        if d:
            raise ValueError(f"unknown keys for entry law: {', '.join(sorted(d))}")
        return out

    def to_dict(self) -> dict:
        if self.kind == "custom":
            return {"kind": "custom", "values": list(self.values), "probs": list(self.probs)}
        out = {"kind": self.kind, "variance": self.variance}
        if self.kind == "two_point":
            out["m4"] = self.m4_param
        return out

    # -- atoms for the discrete laws, scaled --------------------------------
    @property
    def scale(self) -> float:
        return math.sqrt(self.variance)

    def atoms(self) -> tuple[np.ndarray, np.ndarray] | None:
        if self.kind == "rademacher":
            return np.array([-1.0, 1.0]) * self.scale, np.array([0.5, 0.5])
        if self.kind == "two_point":
            m4 = self.m4_param
            s, t = math.sqrt(0.5), math.sqrt(2.0 * m4 - 1.0)
            q = 1.0 / (4.0 * m4 - 3.0)
            vals = np.array([-t, -s, s, t]) * self.scale
            return vals, np.array([q / 2, (1 - q) / 2, (1 - q) / 2, q / 2])
        if self.kind == "custom":
            return np.array(self.values), np.array(self.probs)
        return None

    @property
    def symmetric(self) -> bool:
        if self.kind != "custom":
            return True
        vals, probs = self.atoms()
        table = {}
        for v, p in zip(vals, probs):
            table[v] = table.get(v, 0.0) + p
        return all(abs(p - table.get(-v, 0.0)) <= 1e-14 for v, p in table.items())

    # -- moments ------------------------------------------------------------
    def abs_moment(self, p: float) -> float:
        """E|w|^p."""
        a = self.atoms()
        if a is not None:
            vals, probs = a
            return math.fsum(np.abs(vals) ** p * probs)
        sd = self.scale
        if self.kind == "gaussian":
            return sd**p * 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)
        # uniform on [-sqrt3 sd, sqrt3 sd]
        return (math.sqrt(3.0) * sd) ** p / (p + 1)

    def moment(self, p: int) -> float:
        """E w^p (signed)."""
        a = self.atoms()
        if a is not None:
            vals, probs = a
            return math.fsum(vals**p * probs)
        return 0.0 if p % 2 else self.abs_moment(p)

    @property
    def m4(self) -> float:
        return self.moment(4)

    def tail_moment(self, p: float, threshold: float) -> float:
        """E[|w|^p 1{|w| > threshold}]."""
        if threshold < 0:
            raise ValueError("threshold must be nonnegative")
        a = self.atoms()
        if a is not None:
            vals, probs = a
            big = np.abs(vals) > threshold
            return math.fsum(np.abs(vals[big]) ** p * probs[big])
        sd = self.scale
        if self.kind == "gaussian":
            # E|Z|^p 1{|Z|>u} = 2^{p/2} Gamma((p+1)/2) Q((p+1)/2, u^2/2) / sqrt(pi)
            u = threshold / sd
            return self.abs_moment(p) * float(special.gammaincc((p + 1) / 2, u * u / 2))
        half = math.sqrt(3.0) * sd
        if threshold >= half:
            return 0.0
        return (half ** (p + 1) - threshold ** (p + 1)) / ((p + 1) * half)

    def tail_signed_first(self, threshold: float) -> float:
        """E[w 1{|w| > threshold}]."""
        a = self.atoms()
        if a is None:
            return 0.0  # continuous catalog laws are symmetric
        vals, probs = a
        big = np.abs(vals) > threshold
        return math.fsum(vals[big] * probs[big])

    # -- sampling -----------------------------------------------------------
    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            return gen.standard_normal(size) * self.scale
        if self.kind == "uniform":
            half = math.sqrt(3.0) * self.scale
            return gen.uniform(-half, half, size)
        vals, probs = self.atoms()
        if self.kind == "rademacher":
            return vals[gen.integers(0, 2, size)]
        return gen.choice(vals, size=size, p=probs)


@dataclass(frozen=True)
class WignerSpec:
    n: int
    offdiag: EntryDistribution = field(default_factory=EntryDistribution.gaussian)
    diag: EntryDistribution = field(default_factory=EntryDistribution.gaussian)
    symmetry_class: str = "real"  # or "complex"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if abs(self.offdiag.variance - 1.0) > 1e-12:
            raise ValueError("off-diagonal entries must have unit variance")
        if self.symmetry_class not in ("real", "complex"):
            raise ValueError("symmetry_class must be 'real' or 'complex'")

    @property
    def sigma2(self) -> float:
        return self.diag.variance


@dataclass(frozen=True)
class SampleCovSpec:
    n: int
    entry: EntryDistribution = field(default_factory=EntryDistribution.gaussian)
    complex_entries: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if abs(self.entry.variance - 1.0) > 1e-12:
            raise ValueError("sample covariance entries must have unit variance")
        if not self.entry.symmetric:
            raise ValueError("sample covariance entries must be symmetric")


def sample_wigner(spec: WignerSpec, seed) -> np.ndarray:
    """M = W / sqrt(n), exactly symmetric (Hermitian)."""
    gen = _rng.generator(seed)
    n = spec.n
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    if spec.symmetry_class == "real":
        upper = np.zeros((n, n))
        upper[iu] = spec.offdiag.sample(gen, m)
        d = spec.diag.sample(gen, n)
        w = upper + upper.T
        w[np.diag_indices(n)] = d
    else:
        upper = np.zeros((n, n), dtype=complex)
        re = spec.offdiag.sample(gen, m)
        im = spec.offdiag.sample(gen, m)
        upper[iu] = (re + 1j * im) / math.sqrt(2.0)
        d = spec.diag.sample(gen, n)
        w = upper + upper.conj().T
        w[np.diag_indices(n)] = d
    return w / math.sqrt(n)


def sample_sample_cov(spec: SampleCovSpec, seed) -> np.ndarray:
    """A = X* X / n, symmetrized so A == A* bit for bit."""
    gen = _rng.generator(seed)
    n = spec.n
    if spec.complex_entries:
        x = (spec.entry.sample(gen, (n, n)) + 1j * spec.entry.sample(gen, (n, n))) / math.sqrt(2.0)
        a = x.conj().T @ x / n
        return (a + a.conj().T) / 2
    x = spec.entry.sample(gen, (n, n))
    a = x.T @ x / n
    return (a + a.T) / 2


def sample_matrix(spec, seed) -> np.ndarray:
    if isinstance(spec, WignerSpec):
        return sample_wigner(spec, seed)
    return sample_sample_cov(spec, seed)


# -- truncation ---------------------------------------------------------------


def truncated_moments(dist: EntryDistribution, threshold: float) -> tuple[float, float]:
    """(mu, tau2) for w_hat = w 1{|w| <= threshold}: mu = E w_hat, tau2 = E w^2 - E w_hat^2."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    mu = -dist.tail_signed_first(threshold)  # E w = 0
    tau2 = dist.tail_moment(2, threshold)
    return mu, tau2


@dataclass(frozen=True)
class TruncationMixture:
    """w_tilde = w_hat w.p. 1 - mix_prob, else z = a +- sqrt(b2 - a^2) with equal odds."""

    epsilon_n: float
    mu: float
    tau2: float
    a: float
    b2: float
    mix_prob: float
    second_moment: float
    truncated_fourth: float  # E w_hat^4
    n: int
    eps: float

    @property
    def spread(self) -> float:
        return math.sqrt(max(self.b2 - self.a * self.a, 0.0))

    @property
    def z_max(self) -> float:
        return abs(self.a) + self.spread

    def mean_residual(self) -> float:
        return math.fsum([self.mu * (1.0 - self.mix_prob), self.a * self.mix_prob])

    def second_moment_residual(self) -> float:
        return math.fsum(
            [
                (self.second_moment - self.tau2) * (1.0 - self.mix_prob),
                self.b2 * self.mix_prob,
                -self.second_moment,
            ]
        )

    def z_fourth_moment(self) -> float:
        a2, c2 = self.a * self.a, self.spread**2
        return a2 * a2 + 6.0 * a2 * c2 + c2 * c2

    def fourth_moment(self) -> float:
        """E w_tilde^4."""
        return self.truncated_fourth * (1.0 - self.mix_prob) + self.z_fourth_moment() * self.mix_prob

    def sup_bound(self) -> float:
        """n^{1/2 - eps/2}, the almost-sure bound required of |w_tilde| for large n."""
        return self.n ** (0.5 - self.eps / 2)

    def apply(self, w: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        """Realize w_tilde from draws ``w`` of the original law."""
        w = np.asarray(w, dtype=float)
        out = np.where(np.abs(w) <= self.epsilon_n, w, 0.0)
        if self.mix_prob == 0:
            return out
        swap = gen.random(w.shape) < self.mix_prob
        sign = np.where(gen.random(w.shape) < 0.5, 1.0, -1.0)
        return np.where(swap, self.a + sign * self.spread, out)


def build_truncation_mixture(dist: EntryDistribution, n: int, eps: float) -> TruncationMixture:
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    eps_n = n ** (0.5 - eps)
    mu, tau2 = truncated_moments(dist, eps_n)
    p = abs(mu) / eps_n + tau2 / (eps_n * eps_n)
    if p > 1.0:
        raise ValueError(
            f"mixing probability {p:.3g} exceeds 1: threshold {eps_n:.3g} too small for this law"
        )
    second = dist.moment(2)
    if p == 0.0:
        a, b2 = 0.0, 0.0
    else:
        a = -mu * (1.0 - p) / p
        b2 = second - tau2 + tau2 / p
    if b2 < a * a:
        raise ArithmeticError(f"b2 = {b2} < a^2 = {a * a}; two-point z cannot be built")
    trunc4 = dist.moment(4) - dist.tail_moment(4, eps_n)
    return TruncationMixture(eps_n, mu, tau2, a, b2, p, second, trunc4, n, eps)


# -- moment conditions --------------------------------------------------------


def c0_deficit(spec: WignerSpec, p: float, eps: float, n: int) -> float:
    """Value of the C0 expression at size n (i.i.d. entries collapse the sums)."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    t = n ** (0.5 - eps)
    off = n ** (4 * eps) / n**2 * (n * (n - 1) / 2) * spec.offdiag.tail_moment(4, t)
    dia = n ** (2 * eps) / n * n * spec.diag.tail_moment(2, t)
    return n ** (p / 2) * (off + dia)


def c1_check(dist: EntryDistribution, C1: float, pmax: int) -> bool:
    """True iff the law is symmetric and E|x|^p <= (C1 sqrt p)^p for p = 1..pmax."""
    if pmax < 1:
        raise ValueError("pmax must be >= 1")
    if not dist.symmetric:
        return False
    return all(dist.abs_moment(p) <= (C1 * math.sqrt(p)) ** p for p in range(1, pmax + 1))
