"""Monte Carlo experiments for (partial) linear eigenvalue statistics.

Replication ``r`` draws its matrix from stream ``(master_seed, MATRIX, r)``
and its eigenvalue relabeling from ``(master_seed, LABELS, r)``; limit-law
samplers use ``(master_seed, LIMIT, 0)``.  Workers only change who computes
a replication, never what it computes, and results are reduced in index
order, so every output is independent of the worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import functions, limit_laws
from . import rng as _rng
from . import rigidity as _rig
from . import sampling_clt as _sclt
from .ensembles import EntryDistribution, SampleCovSpec, WignerSpec, sample_matrix
from .errors import NonConvergenceError
from .spectra import alpha, eigenvalues_sym
from .variance_functionals import DEFAULT_NODES, sc_variance, wigner_variance

log = logging.getLogger(__name__)

COMPARISONS = ("full_linear", "fixed_k", "growing_k", "fixed_tail", "rigidity", "sampling_clt")
K_RULES = ("fixed", "growing_sqrt", "proportional", "fixed_tail")


class ConfigError(ValueError):
    """Raised with every violated constraint of an experiment config."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class KRule:
    kind: str
    k: int | None = None
    ratio: float | None = None
    factor: float = 1.0
    l: int | None = None

    def resolve(self, n: int) -> int:
        """Number of eigenvalues removed from the sum."""
        if self.kind == "fixed":
            return int(self.k)
        if self.kind == "proportional":
            return int(round(self.ratio * n))
        if self.kind == "growing_sqrt":
            return int(math.ceil(self.factor * math.sqrt(n)))
        if self.kind == "fixed_tail":
            return n - int(self.l)
        raise ValueError(f"unknown k rule {self.kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "fixed":
            return {"kind": "fixed", "k": self.k}
        if self.kind == "proportional":
            return {"kind": "proportional", "ratio": self.ratio}
        if self.kind == "growing_sqrt":
            return {"kind": "growing_sqrt", "factor": self.factor}
        return {"kind": "fixed_tail", "l": self.l}


@dataclass(frozen=True)
class Thresholds:
    ks_max: float = 0.05
    variance_ratio_min: float = 0.85
    variance_ratio_max: float = 1.15

    def to_dict(self) -> dict:
        return {
            "ks_max": self.ks_max,
            "variance_ratio_min": self.variance_ratio_min,
            "variance_ratio_max": self.variance_ratio_max,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: WignerSpec | SampleCovSpec | None
    f: str
    comparison: str
    replications: int
    master_seed: int
    k_rule: KRule | None = None
    limit_replications: int | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)
    nodes: int = DEFAULT_NODES
    n: int | None = None  # population size for sampling_clt (no ensemble)

    @property
    def size(self) -> int:
        return self.ensemble.n if self.ensemble is not None else int(self.n)

    @property
    def k(self) -> int:
        return self.k_rule.resolve(self.size) if self.k_rule is not None else 0

    @property
    def r_limit(self) -> int:
        return self.limit_replications or self.replications

    @property
    def is_wigner(self) -> bool:
        return isinstance(self.ensemble, WignerSpec)

    @property
    def law(self) -> limit_laws.LimitLaw:
        return limit_laws.SEMICIRCLE if self.is_wigner else limit_laws.MARCHENKO_PASTUR

    @property
    def test_function(self) -> functions.TestFunction:
        return functions.get(self.f)

    def to_dict(self) -> dict:
        return {
            "ensemble": _ensemble_to_dict(self.ensemble),
            "f": self.f,
            "comparison": self.comparison,
            "replications": self.replications,
            "limit_replications": self.r_limit,
            "master_seed": self.master_seed,
            "k_rule": self.k_rule.to_dict() if self.k_rule is not None else None,
            "thresholds": self.thresholds.to_dict(),
            "nodes": self.nodes,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return parse_config(d)


def _ensemble_to_dict(e) -> dict | None:
    if e is None:
        return None
    if isinstance(e, WignerSpec):
        return {
            "type": "wigner",
            "n": e.n,
            "offdiag": e.offdiag.to_dict(),
            "diag": e.diag.to_dict(),
            "symmetry_class": e.symmetry_class,
        }
    return {"type": "sample_cov", "n": e.n, "entry": e.entry.to_dict(), "complex_entries": e.complex_entries}


_TOP_KEYS = {
    "ensemble",
    "f",
    "comparison",
    "replications",
    "master_seed",
    "k_rule",
    "limit_replications",
    "thresholds",
    "nodes",
    "n",
}


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _parse_entry(d, where, problems):
    if not isinstance(d, dict):
        problems.append(f"{where}: expected an object")
        return None
    try:
        return EntryDistribution.from_dict(d)
    except (ValueError, TypeError) as exc:
        problems.append(f"{where}: {exc}")
        return None


def _parse_ensemble(d, problems):
    if d is None:
        return None
    if not isinstance(d, dict):
        problems.append("ensemble: expected an object")
        return None
    d = dict(d)
    kind = d.pop("type", None)
    n = d.pop("n", None)
    if n is None:
        problems.append("ensemble.n: missing required field")
    elif not _is_int(n) or n < 1:
        problems.append("ensemble.n: must be a positive integer")
        n = None
    if kind == "wigner":
        off = _parse_entry(d.pop("offdiag", {"kind": "gaussian"}), "ensemble.offdiag", problems)
        dia = _parse_entry(d.pop("diag", {"kind": "gaussian"}), "ensemble.diag", problems)
        sym = d.pop("symmetry_class", "real")
        if d:
            problems.append(f"ensemble: unknown keys {', '.join(sorted(d))}")
        if None in (n, off, dia):
            return None
        try:
            return WignerSpec(n, off, dia, sym)
        except ValueError as exc:
            problems.append(f"ensemble: {exc}")
            return None
    if kind == "sample_cov":
        entry = _parse_entry(d.pop("entry", {"kind": "gaussian"}), "ensemble.entry", problems)
        cplx = d.pop("complex_entries", False)
        if d:
            problems.append(f"ensemble: unknown keys {', '.join(sorted(d))}")
        if None in (n, entry):
            return None
        try:
            return SampleCovSpec(n, entry, bool(cplx))
        except ValueError as exc:
            problems.append(f"ensemble: {exc}")
            return None
    problems.append(f"ensemble.type: must be 'wigner' or 'sample_cov', got {kind!r}")
    return None


def _parse_k_rule(d, problems):
    if d is None:
        return None
    if not isinstance(d, dict):
        problems.append("k_rule: expected an object")
        return None
    d = dict(d)
    kind = d.pop("kind", None)
    out = None
    if kind == "fixed":
        k = d.pop("k", None)
        if not _is_int(k) or k < 0:
            problems.append("k_rule.k: must be a nonnegative integer")
        else:
            out = KRule("fixed", k=k)
    elif kind == "proportional":
        ratio = d.pop("ratio", None)
        if not isinstance(ratio, (int, float)) or not 0 < ratio < 1:
            problems.append("k_rule.ratio: must lie in (0, 1)")
        else:
            out = KRule("proportional", ratio=float(ratio))
    elif kind == "growing_sqrt":
        factor = d.pop("factor", 1.0)
        if not isinstance(factor, (int, float)) or factor <= 0:
            problems.append("k_rule.factor: must be positive")
        else:
            out = KRule("growing_sqrt", factor=float(factor))
    elif kind == "fixed_tail":
        l = d.pop("l", None)
        if not _is_int(l) or l < 0:
            problems.append("k_rule.l: must be a nonnegative integer")
        else:
            out = KRule("fixed_tail", l=l)
    else:
        problems.append(f"k_rule.kind: must be one of {', '.join(K_RULES)}, got {kind!r}")
    if d:
        problems.append(f"k_rule: unknown keys {', '.join(sorted(d))}")
    return out


def _parse_thresholds(d, problems):
    if d is None:
        return Thresholds()
    if not isinstance(d, dict):
        problems.append("thresholds: expected an object")
        return Thresholds()
    d = dict(d)
    vals = {}
    for key in ("ks_max", "variance_ratio_min", "variance_ratio_max"):
        if key in d:
            v = d.pop(key)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                problems.append(f"thresholds.{key}: must be a number")
            else:
                vals[key] = float(v)
    if d:
        problems.append(f"thresholds: unknown keys {', '.join(sorted(d))}")
    return Thresholds(**vals)


def parse_config(d: dict) -> ExperimentConfig:
    """Strictly parse an experiment config, reporting every problem at once."""
    problems: list[str] = []
    if not isinstance(d, dict):
        raise ConfigError(["config: expected a JSON object"])
    unknown = set(d) - _TOP_KEYS
    if unknown:
        problems.append(f"config: unknown keys {', '.join(sorted(unknown))}")

    comparison = d.get("comparison")
    if comparison is None:
        problems.append("comparison: missing required field")
    elif comparison not in COMPARISONS:
        problems.append(f"comparison: must be one of {', '.join(COMPARISONS)}, got {comparison!r}")

    ensemble = None
    if comparison == "sampling_clt":
        if d.get("ensemble") is not None:
            problems.append("ensemble: must be null for sampling_clt (use 'n')")
        n = d.get("n")
        if n is None:
            problems.append("n: missing required field")
        elif not _is_int(n) or n < 2:
            problems.append("n: must be an integer >= 2")
    else:
        if "ensemble" not in d or d["ensemble"] is None:
            problems.append("ensemble: missing required field")
        else:
            ensemble = _parse_ensemble(d["ensemble"], problems)
        if d.get("n") is not None:
            problems.append("n: only used by sampling_clt; set ensemble.n instead")

    f = d.get("f")
    if comparison != "rigidity":
        if f is None:
            problems.append("f: missing required field")
        else:
            try:
                functions.get(f)
            except (KeyError, TypeError) as exc:
                problems.append(f"f: {exc.args[0] if exc.args else exc}")

    reps = d.get("replications")
    if reps is None:
        problems.append("replications: missing required field")
    elif not _is_int(reps) or reps < 2:
        problems.append("replications: must be an integer >= 2")
    rlim = d.get("limit_replications")
    if rlim is not None and (not _is_int(rlim) or rlim < 2):
        problems.append("limit_replications: must be an integer >= 2")

    seed = d.get("master_seed")
    if seed is None:
        problems.append("master_seed: missing required field")
    elif not _is_int(seed) or not 0 <= seed < 2**64:
        problems.append("master_seed: must be an integer in [0, 2^64)")

    nodes = d.get("nodes", DEFAULT_NODES)
    if not _is_int(nodes) or nodes < 32:
        problems.append("nodes: must be an integer >= 32")

    k_rule = _parse_k_rule(d.get("k_rule"), problems)
    thresholds = _parse_thresholds(d.get("thresholds"), problems)

    size = ensemble.n if ensemble is not None else d.get("n") if _is_int(d.get("n")) else None
    _check_k_rule(comparison, k_rule, size, d.get("k_rule"), problems)
    if ensemble is not None and comparison in ("full_linear", "fixed_k", "growing_k", "fixed_tail"):
        complex_ = getattr(ensemble, "symmetry_class", "real") == "complex" or getattr(
            ensemble, "complex_entries", False
        )
        if complex_:
            problems.append("ensemble: complex ensembles are not supported for CLT comparisons")

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        ensemble=ensemble,
        f=f if f is not None else "x",
        comparison=comparison,
        replications=reps,
        master_seed=seed,
        k_rule=k_rule,
        limit_replications=rlim if rlim is not None else reps,
        thresholds=thresholds,
        nodes=nodes,
        n=d.get("n"),
    )


def _check_k_rule(comparison, k_rule, n, raw, problems):
    needs = {
        "fixed_k": ("fixed",),
        "growing_k": ("growing_sqrt", "proportional"),
        "fixed_tail": ("fixed_tail",),
        "sampling_clt": ("fixed", "growing_sqrt", "proportional"),
    }
    if comparison in ("full_linear", "rigidity"):
        if raw is not None:
            problems.append(f"k_rule: not used by {comparison}; remove it")
        return
    if comparison not in needs:
        return
    if raw is None:
        problems.append("k_rule: missing required field")
        return
    if k_rule is None:
        return
    if k_rule.kind not in needs[comparison]:
        problems.append(f"k_rule.kind: {comparison} needs one of {', '.join(needs[comparison])}")
        return
    if n is None:
        return
    k = k_rule.resolve(n)
    if comparison == "fixed_k" and not 0 <= k < n:
        problems.append(f"k_rule.k: need 0 <= k < n = {n}")
    if comparison in ("growing_k", "sampling_clt") and not 0 < k < n:
        problems.append(f"k_rule: resolved k = {k} must satisfy 0 < k < n = {n}")
    if comparison == "fixed_tail" and not 0 <= n - k <= n:
        problems.append(f"k_rule.l: need 0 <= l <= n = {n}")
    if comparison == "growing_k" and 0 < k < n and min(k, n - k) < 4 * math.sqrt(n):
        log.warning("min(k, n-k) = %d is below 4 sqrt(n) = %.1f; normal limit may be poor", min(k, n - k), 4 * math.sqrt(n))


# -- empirical distributions and distances ------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    samples: np.ndarray
    mean: float
    variance: float
    sorted: np.ndarray

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDistribution":
        s = np.array(samples, dtype=float)
        if s.ndim != 1 or len(s) == 0:
            raise ValueError("need a nonempty 1-d sample")
        mean = math.fsum(s) / len(s)
        var = math.fsum((s - mean) ** 2) / (len(s) - 1) if len(s) > 1 else 0.0
        srt = np.sort(s)
        s.flags.writeable = False
        srt.flags.writeable = False
        return cls(s, mean, var, srt)

    def centered(self) -> "EmpiricalDistribution":
        return EmpiricalDistribution.from_samples(self.samples - self.mean)

    def scaled(self, c: float) -> "EmpiricalDistribution":
        return EmpiricalDistribution.from_samples(self.samples * c)

    def ecdf(self, x):
        return np.searchsorted(self.sorted, x, side="right") / len(self.sorted)

    def central_moment(self, order: int) -> float:
        if order == 1:
            return self.mean
        return math.fsum((self.samples - self.mean) ** order) / len(self.samples)


def _as_emp(x) -> EmpiricalDistribution:
    return x if isinstance(x, EmpiricalDistribution) else EmpiricalDistribution.from_samples(x)


def ks_one_sample(emp, cdf) -> float:
    """sup_x |ECDF(x) - cdf(x)|, evaluated at the jump points."""
    emp = _as_emp(emp)
    x = emp.sorted
    m = len(x)
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    d = max(float(np.max(i / m - F)), float(np.max(F - (i - 1) / m)))
    return min(max(d, 0.0), 1.0)


def ks_two_sample(a, b) -> float:
    """sup_x |ECDF_a(x) - ECDF_b(x)| over the pooled jump points."""
    a, b = _as_emp(a), _as_emp(b)
    pts = np.concatenate([a.sorted, b.sorted])
    return float(np.max(np.abs(a.ecdf(pts) - b.ecdf(pts))))


def normal_cdf(variance: float):
    sd = math.sqrt(variance)
    return lambda x: special.ndtr(np.asarray(x, dtype=float) / sd)


@dataclass
class ComparisonReport:
    comparison: str
    ks_distance: float
    variance_ratio: float
    empirical_variance: float
    reference_variance: float
    moment_table: dict
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "comparison": self.comparison,
            "ks_distance": self.ks_distance,
            "variance_ratio": self.variance_ratio,
            "empirical_variance": self.empirical_variance,
            "reference_variance": self.reference_variance,
            "moment_table": self.moment_table,
            "pass": self.passed,
        }
        out.update(self.details)
        return out


def _moment_table(emp: EmpiricalDistribution, ref) -> dict:
    """Orders 1-4 (mean, then central moments); ``ref`` is a variance or a sample."""
    if isinstance(ref, EmpiricalDistribution):
        refm = [ref.central_moment(o) for o in (1, 2, 3, 4)]
    else:
        refm = [0.0, ref, 0.0, 3.0 * ref * ref]
    return {
        str(o): {"empirical": emp.central_moment(o), "reference": r} for o, r in zip((1, 2, 3, 4), refm)
    }


def _judge(ks, ratio, th: Thresholds) -> bool:
    ok = ks <= th.ks_max and th.variance_ratio_min <= ratio <= th.variance_ratio_max
    return bool(ok) and math.isfinite(ks) and math.isfinite(ratio)


# -- replication machinery ----------------------------------------------------


def _spectra_chunk(ensemble, master_seed: int, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, ensemble.n))
    for i, r in enumerate(range(start, stop)):
        m = sample_matrix(ensemble, _rng.derive(master_seed, _rng.MATRIX, r))
        out[i] = eigenvalues_sym(m).ordered
    return out


_SPECTRA_CACHE: dict = {}
_CACHE_LIMIT = 6


def simulate_spectra(ensemble, replications: int, master_seed: int, workers: int = 1) -> np.ndarray:
    """Ordered spectra of ``replications`` independent matrices, one row each.

    Cached per (ensemble, master_seed); ``workers`` does not enter the key
    because it cannot change the result.
    """
    key = (ensemble, replications, master_seed)
    for (e, r, s), hit in _SPECTRA_CACHE.items():
        # replication r depends only on (master_seed, r): a longer run contains a shorter one
        if e == ensemble and s == master_seed and r >= replications:
            return hit[:replications]
    if workers <= 1 or replications < 2:
        out = _spectra_chunk(ensemble, master_seed, 0, replications)
    else:
        nchunks = min(replications, 4 * workers)
        bounds = np.linspace(0, replications, nchunks + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    _spectra_chunk,
                    [ensemble] * nchunks,
                    [master_seed] * nchunks,
                    bounds[:-1].tolist(),
                    bounds[1:].tolist(),
                )
            )
        out = np.vstack(parts)
    out.flags.writeable = False
    if len(_SPECTRA_CACHE) >= _CACHE_LIMIT:
        _SPECTRA_CACHE.pop(next(iter(_SPECTRA_CACHE)))
    _SPECTRA_CACHE[key] = out
    return out


def clear_cache():
    _SPECTRA_CACHE.clear()


def _fmat(f, spectra: np.ndarray) -> np.ndarray:
    return np.asarray(f(spectra), dtype=float) * np.ones_like(spectra)


def _prefix_sums(fvals: np.ndarray, keep: int, master_seed: int) -> np.ndarray:
    """sum_{i<=keep} f(lambda_{pi(i)}) per replication, pi uniform from stream (LABELS, r)."""
    out = np.empty(len(fvals))
    for r in range(len(fvals)):
        perm = _rng.derive(master_seed, _rng.LABELS, r).permutation(fvals.shape[1])
        out[r] = math.fsum(fvals[r, perm[:keep]])
    return out


def _theory(config: ExperimentConfig) -> dict:
    """Limiting variances v^2 (or v_SC^2) and d^2 for the config; NaN on failure."""
    f = config.test_function
    out = {"full_variance": float("nan"), "single_variance": float("nan"), "single_mean": float("nan")}
    try:
        if config.is_wigner:
            e = config.ensemble
            out["full_variance"] = wigner_variance(f, e.offdiag.m4, e.sigma2, config.nodes).total
        else:
            out["full_variance"] = sc_variance(f, config.ensemble.entry.m4, config.nodes).total
        out["single_variance"] = limit_laws.var_f(config.law, f)
        out["single_mean"] = limit_laws.expect_f(config.law, f)
    except NonConvergenceError as exc:
        out["error"] = str(exc)
    return out


def run_full_linear(config: ExperimentConfig, workers: int = 1) -> EmpiricalDistribution:
    """Centered L_n[f] over the replications."""
    spectra = simulate_spectra(config.ensemble, config.replications, config.master_seed, workers)
    fv = _fmat(config.test_function, spectra)
    totals = np.array([math.fsum(row) for row in fv])
    return EmpiricalDistribution.from_samples(totals).centered()


def _partial_samples(config: ExperimentConfig, k: int, workers: int) -> np.ndarray:
    spectra = simulate_spectra(config.ensemble, config.replications, config.master_seed, workers)
    fv = _fmat(config.test_function, spectra)
    return _prefix_sums(fv, config.size - k, config.master_seed)


def limit_sampler_fixed_k(config: ExperimentConfig, k: int, full_variance: float, count: int) -> np.ndarray:
    """G + D with G ~ N(0, v^2) and D = -sum_{i<=k} (f(psi_i) - E f(psi)), independent."""
    f = config.test_function
    gen = _rng.derive(config.master_seed, _rng.LIMIT, 0)
    g = gen.standard_normal(count) * math.sqrt(full_variance)
    if k == 0:
        return g
    psi = limit_laws.sample(config.law, count * k, gen).reshape(count, k)
    mean = limit_laws.expect_f(config.law, f)
    d = -np.sum(np.asarray(f(psi), dtype=float) - mean, axis=1)
    return g + d


def run_partial_fixed_k(config: ExperimentConfig, workers: int = 1):
    """(centered S_{n,k}[f], draws from the convolution limit)."""
    k = config.k
    if k >= config.size:
        raise ValueError("fixed-k comparison needs k < n")
    stat = EmpiricalDistribution.from_samples(_partial_samples(config, k, workers)).centered()
    th = _theory(config)
    if "error" in th:
        limit = EmpiricalDistribution.from_samples(np.full(config.r_limit, np.nan))
    else:
        limit = EmpiricalDistribution.from_samples(
            limit_sampler_fixed_k(config, k, th["full_variance"], config.r_limit)
        )
    return stat, limit


def run_partial_growing_k(config: ExperimentConfig, workers: int = 1):
    """(alpha-scaled centered S_{n,k}[f], reference variance d^2[f])."""
    n, k = config.size, config.k
    a = alpha(n, k)
    stat = EmpiricalDistribution.from_samples(_partial_samples(config, k, workers)).centered().scaled(a)
    th = _theory(config)
    return stat, th["single_variance"]


def run_remark_fixed_tail(config: ExperimentConfig, workers: int = 1) -> ComparisonReport:
    """sum_{i<=l} f(mu_i) against l independent f(psi) summed."""
    n, k = config.size, config.k
    l = n - k
    f = config.test_function
    stat = EmpiricalDistribution.from_samples(_partial_samples(config, k, workers))
    gen = _rng.derive(config.master_seed, _rng.LIMIT, 0)
    if l == 0:
        limit = EmpiricalDistribution.from_samples(np.zeros(config.r_limit))
    else:
        psi = limit_laws.sample(config.law, config.r_limit * l, gen).reshape(config.r_limit, l)
        limit = EmpiricalDistribution.from_samples(np.sum(np.asarray(f(psi), dtype=float) * np.ones_like(psi), axis=1))
    ks = ks_two_sample(stat, limit)
    th = _theory(config)
    ref_var = l * th["single_variance"]
    ratio = stat.variance / ref_var if ref_var > 0 else (1.0 if stat.variance == 0 else float("inf"))
    details = {"n": n, "l": l, "f": f.name, "reference_mean": l * th["single_mean"], "empirical_mean": stat.mean}
    report = ComparisonReport(
        "fixed_tail", ks, ratio, stat.variance, ref_var, _moment_table(stat, limit), False, details
    )
    report.passed = ks <= config.thresholds.ks_max if l > 0 else bool(np.all(stat.samples == 0))
    report.details["samples"] = stat
    report.details["limit_samples"] = limit
    return report


def _variance_se(emp: EmpiricalDistribution) -> float:
    """Standard error of the sample variance."""
    m = len(emp.samples)
    mu4 = emp.central_moment(4)
    s2 = emp.central_moment(2)
    return math.sqrt(max(mu4 - s2 * s2 * (m - 3) / (m - 1), 0.0) / m)


def run_rigidity(config: ExperimentConfig, workers: int = 1) -> EmpiricalDistribution:
    """max_weighted over the replications."""
    spectra = simulate_spectra(config.ensemble, config.replications, config.master_seed, workers)
    locs = limit_laws.classical_locations(config.law, config.size)
    prof = _rig.wigner_rigidity if config.is_wigner else _rig.sc_rigidity
    from .spectra import Spectrum

    vals = [prof(Spectrum(config.size, row), locs).max_weighted for row in spectra]
    return EmpiricalDistribution.from_samples(vals)


def rigidity_growth(kind: str, ns, replications: int, master_seed: int, workers: int = 1) -> dict:
    """Median max_weighted per n and the fitted growth exponent."""
    medians = []
    for n in ns:
        ens = WignerSpec(n) if kind == "wigner" else SampleCovSpec(n)
        cfg = ExperimentConfig(ens, "x", "rigidity", replications, master_seed)
        medians.append(float(np.median(run_rigidity(cfg, workers).samples)))
    return {"ns": list(ns), "medians": medians, "exponent": _rig.growth_exponent(ns, medians)}


def run_sampling_clt(config: ExperimentConfig) -> dict:
    g = config.test_function
    n, k = config.size, config.k
    samples = _sclt.sampling_clt_samples(n, k, g, config.replications, config.master_seed)
    emp = EmpiricalDistribution.from_samples(samples)
    exact = _sclt.population_variance(g, n)
    ks = ks_one_sample(emp, normal_cdf(exact)) if exact > 0 else float(np.max(np.abs(samples)) > 0)
    return {"samples": emp, "variance_empirical": emp.variance, "variance_exact": exact, "ks_distance": ks}


def run_experiment(config: ExperimentConfig, workers: int = 1) -> tuple[dict, dict]:
    """Run one experiment; returns (report dict, {name: sample array})."""
    c = config.comparison
    base = {"comparison": c, "n": config.size, "replications": config.replications}
    if c == "full_linear":
        emp = run_full_linear(config, workers)
        th = _theory(config)
        ref = th["full_variance"]
        ks = ks_one_sample(emp, normal_cdf(ref)) if ref > 0 else float("nan")
        ratio = emp.variance / ref if ref > 0 else float("nan")
        rep = ComparisonReport(c, ks, ratio, emp.variance, ref, _moment_table(emp, ref), _judge(ks, ratio, config.thresholds))
        rep.details.update(base | {"f": config.f, "theory": th})
        return rep.to_dict(), {"samples": emp.samples}
    if c == "fixed_k":
        stat, limit = run_partial_fixed_k(config, workers)
        th = _theory(config)
        k = config.k
        ks = ks_two_sample(stat, limit)
        ref = th["full_variance"] + k * th["single_variance"]
        ratio = stat.variance / ref
        se = _variance_se(limit)
        z = (limit.variance - ref) / se if se > 0 else 0.0
        sampler_ok = bool(abs(z) <= 4.0)
        rep = ComparisonReport(
            c, ks, ratio, stat.variance, ref, _moment_table(stat, limit), _judge(ks, ratio, config.thresholds) and sampler_ok
        )
        rep.details.update(
            base
            | {
                "f": config.f,
                "k": k,
                "theory": th,
                "limit_sampler": {"variance": limit.variance, "expected": ref, "standard_error": se, "z": z, "ok": sampler_ok},
            }
        )
        return rep.to_dict(), {"samples": stat.samples, "limit_samples": limit.samples}
    if c == "growing_k":
        stat, d2 = run_partial_growing_k(config, workers)
        ks = ks_one_sample(stat, normal_cdf(d2)) if d2 > 0 else float("nan")
        ratio = stat.variance / d2 if d2 > 0 else float("nan")
        rep = ComparisonReport(c, ks, ratio, stat.variance, d2, _moment_table(stat, d2), _judge(ks, ratio, config.thresholds))
        rep.details.update(base | {"f": config.f, "k": config.k, "alpha": alpha(config.size, config.k), "theory": _theory(config)})
        return rep.to_dict(), {"samples": stat.samples}
    if c == "fixed_tail":
        rep = run_remark_fixed_tail(config, workers)
        stat = rep.details.pop("samples")
        limit = rep.details.pop("limit_samples")
        rep.details.update(base)
        return rep.to_dict(), {"samples": stat.samples, "limit_samples": limit.samples}
    if c == "rigidity":
        emp = run_rigidity(config, workers)
        report = base | {
            "median_max_weighted": float(np.median(emp.samples)),
            "mean_max_weighted": emp.mean,
            "max_max_weighted": float(emp.sorted[-1]),
        }
        return report, {"samples": emp.samples}
    if c == "sampling_clt":
        out = run_sampling_clt(config)
        emp = out.pop("samples")
        return base | {"k": config.k, "g": config.f} | out, {"samples": emp.samples}
    raise ValueError(f"unknown comparison {c!r}")
