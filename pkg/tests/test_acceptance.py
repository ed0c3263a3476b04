"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (lines are repeated in the terminal summary) or directly:

    python3 tests/test_acceptance.py
"""

import json
import math
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from plstats import cli, functions
from plstats import montecarlo as mc
from plstats import sampling_clt as sclt
from plstats.ensembles import EntryDistribution, WignerSpec, build_truncation_mixture
from plstats.rigidity import edge_bound_checks
from plstats.variance_functionals import sc_variance, wigner_variance

SEED = 20261019
RESULTS: list[str] = []


def record(label: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    RESULTS.append(line)
    print(line, flush=True)
    return ok


def _cfg(ensemble, f, comparison, reps, k_rule=None):
    return mc.ExperimentConfig(ensemble, f, comparison, reps, SEED, k_rule=k_rule)


# 1 -----------------------------------------------------------------------------


def criterion_1():
    worst = 0.0
    for sigma2 in (0.0, 1.0, 2.5):
        worst = max(worst, abs(wigner_variance(functions.get("x"), 3.0, sigma2).total - sigma2))
    for m4 in (1.0, 3.0, 5.0):
        worst = max(worst, abs(wigner_variance(functions.get("x2"), m4, 1.0).total - 2 * (m4 - 1)))
        worst = max(worst, abs(sc_variance(functions.get("x"), m4).total - (m4 - 1)))
    return record("criterion 1 (variance functional closed forms)", worst <= 1e-6, f"max abs error {worst:.2e} <= 1e-6")


# 2 -----------------------------------------------------------------------------


def criterion_2():
    mc.simulate_spectra(WignerSpec(300), 5000, SEED)  # shared with criteria 3 and 5
    ok, parts = True, []
    for f in ("x", "x2"):
        rep, _ = mc.run_experiment(_cfg(WignerSpec(300), f, "full_linear", 2000))
        good = 0.85 <= rep["variance_ratio"] <= 1.15 and rep["ks_distance"] <= 0.05
        ok &= good
        parts.append(f"f={f}: var ratio {rep['variance_ratio']:.4f}, KS {rep['ks_distance']:.4f}")
    return record("criterion 2 (full linear CLT, n=300, R=2000)", ok, "; ".join(parts))


# 3 -----------------------------------------------------------------------------


def criterion_3():
    ok, parts = True, []
    for k in (1, 2, 5):
        cfg = _cfg(WignerSpec(300), "x2", "fixed_k", 5000, mc.KRule("fixed", k=k))
        rep, _ = mc.run_experiment(cfg)
        ls = rep["limit_sampler"]
        good = rep["ks_distance"] <= 0.05 and abs(ls["z"]) <= 4
        ok &= good
        parts.append(f"k={k}: KS {rep['ks_distance']:.4f}, sampler z {ls['z']:+.2f}")
    return record("criterion 3 (fixed-k partial CLT, n=300, R=R'=5000)", ok, "; ".join(parts))


# 4 -----------------------------------------------------------------------------


def criterion_4():
    from plstats.ensembles import SampleCovSpec

    ok, parts = True, []
    for label, ens, f in (("wigner", WignerSpec(400), "x2"), ("sample_cov", SampleCovSpec(400), "x")):
        cfg = _cfg(ens, f, "growing_k", 3000, mc.KRule("fixed", k=100))
        rep, _ = mc.run_experiment(cfg)
        good = 0.85 <= rep["variance_ratio"] <= 1.15 and rep["ks_distance"] <= 0.05
        ok &= good
        parts.append(f"{label} f={f}: var ratio {rep['variance_ratio']:.4f}, KS {rep['ks_distance']:.4f}")
    return record("criterion 4 (growing-k partial CLT, n=400, k=100, R=3000)", ok, "; ".join(parts))


# 5 -----------------------------------------------------------------------------


def criterion_5():
    cfg = _cfg(WignerSpec(300), "x", "fixed_tail", 5000, mc.KRule("fixed_tail", l=1))
    rep = mc.run_remark_fixed_tail(cfg)
    return record(
        "criterion 5 (fixed tail l=1, n=300, R=5000)",
        rep.ks_distance <= 0.05,
        f"two-sample KS {rep.ks_distance:.4f} <= 0.05",
    )


# 6 -----------------------------------------------------------------------------

RIGIDITY_NS = (100, 200, 400, 800)


def criterion_6a():
    g = mc.rigidity_growth("wigner", RIGIDITY_NS, 200, SEED)
    med = ", ".join(f"{m:.3f}" for m in g["medians"])
    return record(
        "criterion 6a (Wigner rigidity growth exponent <= 0.1)",
        g["exponent"] <= 0.1,
        f"fitted exponent {g['exponent']:.4f}; medians {med}",
    )


def criterion_6b():
    g = mc.rigidity_growth("sample_cov", RIGIDITY_NS, 200, SEED)
    med = ", ".join(f"{m:.3f}" for m in g["medians"])
    return record(
        "criterion 6b (sample covariance rigidity growth exponent <= 0.15)",
        g["exponent"] <= 0.15,
        f"fitted exponent {g['exponent']:.4f}; medians {med}",
    )


def criterion_6c():
    checked = failed = 0
    for n in (10**2, 10**3, 10**4, 10**5):
        for eps in (1 / 200, 1 / 100):
            rep = edge_bound_checks(n, eps=eps)
            checked += len(rep.hard_edge)
            failed += sum(not r[3] for r in rep.hard_edge)
    return record(
        "criterion 6c (hard-edge quantile bound gamma_j <= pi^2 j^2 / (2 n^2))",
        failed == 0 and checked > 0,
        f"{checked - failed}/{checked} indices hold",
    )


def criterion_6d():
    checked = failed = 0
    first = []
    for n in (10**2, 10**3, 10**4, 10**5):
        rep = edge_bound_checks(n)
        checked += len(rep.soft_edge)
        bad = rep.soft_edge_failures
        failed += len(bad)
        if bad:
            first.append(f"n={n}: {len(bad)} fail from k={bad[0][0]}")
    detail = f"{checked - failed}/{checked} indices hold with constant 9 sqrt(2) pi"
    if first:
        detail += " (" + "; ".join(first) + ")"
    return record("criterion 6d (soft-edge quantile bound |4 - gamma_{n-k}|)", failed == 0, detail)


def criterion_6d_corrected():
    checked = failed = 0
    for n in (10**2, 10**3, 10**4, 10**5):
        rep = edge_bound_checks(n, soft_constant=18 * math.pi)
        checked += len(rep.soft_edge)
        failed += len(rep.soft_edge_failures)
    return record(
        "criterion 6d diagnostic (same bound with constant 18 pi)",
        failed == 0,
        f"{checked - failed}/{checked} indices hold",
    )


# 7 -----------------------------------------------------------------------------


def criterion_7():
    laws = {"gaussian": EntryDistribution.gaussian()}
    for m4 in (1.5, 3.0, 50.0, 1000.0):
        laws[f"two_point(m4={m4:g})"] = EntryDistribution.two_point(m4)
    worst_res, worst_ratio, cases, mixing = 0.0, 0.0, 0, 0
    for dist in laws.values():
        for n in (10**3, 10**4, 10**5):
            for eps in (0.05, 0.1):
                mix = build_truncation_mixture(dist, n, eps)
                worst_res = max(worst_res, abs(mix.mean_residual()), abs(mix.second_moment_residual()))
                worst_ratio = max(worst_ratio, mix.fourth_moment() / (513 * dist.m4))
                cases += 1
                mixing += mix.mix_prob > 0
    ok = worst_res <= 1e-12 and worst_ratio <= 1.0
    return record(
        "criterion 7 (truncation mixture moments)",
        ok,
        f"{cases} cases ({mixing} with active mixing): max residual {worst_res:.1e}, "
        f"max fourth moment / (513 C1) {worst_ratio:.2e}",
    )


# 8 -----------------------------------------------------------------------------


def criterion_8():
    rational = [functions.get(name) for name in ("x", "x2", "x3", "const")]
    paths = 0
    exact = True
    for g in rational:
        for n in range(2, 8):
            for k in range(1, n):
                rep = sclt.martingale_exhaustive(n, k, g)
                paths += rep["paths"]
                exact &= rep["max_form_gap"] == 0 and rep["max_conditional_mean"] == 0
    bounded = True
    c2 = c4 = Fraction(0)
    for g in rational + [functions.get("sin")]:
        sup = max(abs(float(g(t / n))) for n in range(2, 8) for t in range(1, n + 1))
        for row in sclt.lemma_b2_table(7, g):
            c2 = max(c2, Fraction(row["r2_scaled"]))
            c4 = max(c4, Fraction(row["r4_scaled"]))
            bounded &= row["r2_scaled"] <= sup**2 + 1e-14 and row["r4_scaled"] <= 18 * sup**4 + 1e-14
    pv = sclt.predictable_variance_limit(10**4, 10**2)
    ok = exact and bounded and abs(pv - 1) <= 0.01
    return record(
        "criterion 8 (exhaustive martingale checks, n <= 7)",
        ok,
        f"{paths} paths exact={exact}; sup scaled residuals r2 {float(c2):.4f}, r4 {float(c4):.4f} "
        f"(bounded={bounded}); predictable variance factor {pv:.5f}",
    )


# 9 -----------------------------------------------------------------------------


def criterion_9():
    argv = ["simulate", "--n", "120", "--f", "x2", "--comparison", "fixed_k", "--k", "2", "--replications", "300",
            "--seed", str(SEED)]
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [Path(tmp) / name for name in ("w1", "w3", "rerun")]
        mc.clear_cache()
        cli.parse_and_dispatch(argv + ["--workers", "1", "--output-dir", str(dirs[0])])
        mc.clear_cache()
        cli.parse_and_dispatch(argv + ["--workers", "3", "--output-dir", str(dirs[1])])
        mc.clear_cache()
        cli.parse_and_dispatch(
            ["simulate", "--config", str(dirs[0] / "config.resolved.json"), "--workers", "2", "--output-dir", str(dirs[2])]
        )
        names = sorted(p.name for p in dirs[0].iterdir())
        same = all((dirs[0] / f).read_bytes() == (d / f).read_bytes() for d in dirs[1:] for f in names)
        ks = json.loads((dirs[0] / "report.json").read_text())["ks_distance"]
    return record(
        "criterion 9 (byte-identical reports across worker counts and resolved-config rerun)",
        same,
        f"{len(names)} files compared ({', '.join(names)}); KS {ks:.4f}",
    )


# invariant ---------------------------------------------------------------------


def invariant_burn_in():
    medians = []
    for n in (100, 200, 400):
        ks = []
        for s in range(5):
            cfg = mc.ExperimentConfig(WignerSpec(n), "x2", "fixed_k", 2000, SEED + s, k_rule=mc.KRule("fixed", k=5))
            ks.append(mc.run_experiment(cfg)[0]["ks_distance"])
        mc.clear_cache()
        medians.append(float(np.median(ks)))
    ok = medians[0] >= medians[1] >= medians[2]
    return record(
        "invariant (fixed-k KS median over 5 seeds non-increasing on n = 100, 200, 400)",
        ok,
        "medians " + ", ".join(f"{m:.4f}" for m in medians),
    )


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6a,
    criterion_6b,
    criterion_6c,
    criterion_6d,
    criterion_6d_corrected,
    criterion_7,
    criterion_8,
    criterion_9,
    invariant_burn_in,
]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion):
    assert criterion(), RESULTS[-1]


if __name__ == "__main__":
    outcomes = [c() for c in CRITERIA]
    print(f"{sum(outcomes)}/{len(outcomes)} criteria passed")
    sys.exit(0 if all(outcomes) else 1)
