import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from plstats import montecarlo as mc
from plstats.ensembles import SampleCovSpec, WignerSpec
from plstats.montecarlo import ConfigError, EmpiricalDistribution, KRule, parse_config


def base_config(**over):
    d = {
        "ensemble": {"type": "wigner", "n": 40},
        "f": "x2",
        "comparison": "fixed_k",
        "k_rule": {"kind": "fixed", "k": 2},
        "replications": 200,
        "master_seed": 5,
    }
    d.update(over)
    return d


class TestConfig:
    def test_parse_and_round_trip(self):
        cfg = parse_config(base_config())
        assert cfg.size == 40 and cfg.k == 2 and cfg.r_limit == 200
        assert parse_config(cfg.to_dict()) == cfg

    def test_collects_every_problem(self):
        bad = base_config(replications=1, master_seed=-3, f="tanh", extra=1)
        bad["ensemble"] = {"type": "wigner"}
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        text = " | ".join(err.value.problems)
        for needle in ("replications", "master_seed", "f:", "unknown keys extra", "ensemble.n"):
            assert needle in text
        assert len(err.value.problems) >= 5

    def test_unknown_nested_keys(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            parse_config(base_config(thresholds={"ks": 0.1}))
        with pytest.raises(ConfigError, match="entry"):
            parse_config(base_config(ensemble={"type": "sample_cov", "n": 5, "entry": {"kind": "gaussian", "x": 1}}))

    @pytest.mark.parametrize(
        "comparison,k_rule",
        [
            ("fixed_k", {"kind": "proportional", "ratio": 0.5}),
            ("fixed_k", {"kind": "fixed", "k": 40}),
            ("growing_k", {"kind": "fixed", "k": 3}),
            ("growing_k", None),
            ("full_linear", {"kind": "fixed", "k": 1}),
            ("fixed_tail", {"kind": "fixed", "k": 1}),
            ("fixed_tail", {"kind": "fixed_tail", "l": 41}),
        ],
    )
    def test_k_rule_consistency(self, comparison, k_rule):
        with pytest.raises(ConfigError):
            parse_config(base_config(comparison=comparison, k_rule=k_rule))

    def test_k_rules_resolve(self):
        assert KRule("proportional", ratio=0.25).resolve(400) == 100
        assert KRule("growing_sqrt", factor=2.0).resolve(400) == 40
        assert KRule("fixed_tail", l=1).resolve(300) == 299

    def test_complex_excluded_from_clt(self):
        cfg = base_config(ensemble={"type": "wigner", "n": 10, "symmetry_class": "complex"})
        with pytest.raises(ConfigError, match="complex"):
            parse_config(cfg)

    def test_sampling_clt_needs_population(self):
        with pytest.raises(ConfigError, match="n:"):
            parse_config({"comparison": "sampling_clt", "f": "x", "k_rule": {"kind": "fixed", "k": 2},
                          "replications": 10, "master_seed": 1})


class TestKolmogorov:
    def test_identical_samples(self):
        x = np.random.default_rng(0).standard_normal(100)
        assert mc.ks_two_sample(x, x) == 0.0

    def test_single_atom_at_median(self):
        assert mc.ks_one_sample([0.0], mc.normal_cdf(1.0)) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=40), st.lists(st.integers(-5, 5), min_size=1, max_size=40))
    def test_against_scipy_with_ties(self, a, b):
        a, b = np.array(a, float), np.array(b, float)
        assert mc.ks_two_sample(a, b) == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-12)
        assert mc.ks_one_sample(a, stats.norm.cdf) == pytest.approx(stats.kstest(a, "norm").statistic, abs=1e-12)

    def test_two_sample_band(self):
        gen = np.random.default_rng(20261019)
        hits = sum(
            mc.ks_two_sample(gen.standard_normal(5000), gen.standard_normal(5000)) < 0.0385 for _ in range(200)
        )
        assert hits >= 190

    def test_ecdf_right_continuous(self):
        e = EmpiricalDistribution.from_samples([0.0, 1.0, 1.0, 2.0])
        assert e.ecdf(1.0) == 0.75 and e.ecdf(0.999) == 0.25
        assert e.variance >= 0


class TestRunners:
    def test_constant_full_linear_is_zero(self):
        cfg = parse_config(base_config(comparison="full_linear", k_rule=None, f="const", replications=20))
        assert np.all(mc.run_full_linear(cfg).samples == 0)

    def test_centering(self):
        cfg = parse_config(base_config(comparison="full_linear", k_rule=None, f="x2"))
        assert abs(mc.run_full_linear(cfg).mean) <= 1e-12
        stat, _ = mc.run_partial_fixed_k(parse_config(base_config()))
        assert abs(stat.mean) <= 1e-12

    def test_k0_limit_is_normal(self):
        cfg = parse_config(base_config(k_rule={"kind": "fixed", "k": 0}, replications=400))
        stat, limit = mc.run_partial_fixed_k(cfg)
        full = mc.run_full_linear(parse_config(base_config(comparison="full_linear", k_rule=None, replications=400)))
        assert np.array_equal(stat.samples, full.samples)
        assert mc.ks_one_sample(limit, mc.normal_cdf(4.0)) < 0.07

    def test_limit_sampler_variance(self):
        cfg = parse_config(base_config(k_rule={"kind": "fixed", "k": 5}))
        draws = EmpiricalDistribution.from_samples(mc.limit_sampler_fixed_k(cfg, 5, 4.0, 20000))
        se = mc._variance_se(draws)
        assert abs(draws.variance - (4.0 + 5 * 1.0)) <= 4 * se

    def test_growing_k_symmetric_reference(self):
        a = parse_config(base_config(comparison="growing_k", k_rule={"kind": "proportional", "ratio": 0.25}))
        b = parse_config(base_config(comparison="growing_k", k_rule={"kind": "proportional", "ratio": 0.75}))
        (_, ra), (_, rb) = mc.run_partial_growing_k(a), mc.run_partial_growing_k(b)
        assert ra == rb == pytest.approx(1.0, abs=1e-10)

    def test_fixed_tail_degenerate(self):
        cfg = parse_config(base_config(comparison="fixed_tail", k_rule={"kind": "fixed_tail", "l": 0}, replications=10))
        rep = mc.run_remark_fixed_tail(cfg)
        assert np.all(rep.details["samples"].samples == 0) and rep.passed

    def test_fixed_tail_mean(self):
        cfg = parse_config(
            base_config(comparison="fixed_tail", k_rule={"kind": "fixed_tail", "l": 2}, replications=2000, f="x2")
        )
        rep = mc.run_remark_fixed_tail(cfg)
        emp = rep.details["samples"]
        assert rep.details["reference_mean"] == pytest.approx(2.0, abs=1e-10)
        assert abs(emp.mean - 2.0) <= 4 * math.sqrt(emp.variance / 2000) + 0.02  # O(1/n) bias at n=40

    def test_report_fields(self):
        rep, samples = mc.run_experiment(parse_config(base_config()))
        assert 0 <= rep["ks_distance"] <= 1
        assert set(rep["moment_table"]) == {"1", "2", "3", "4"}
        assert rep["limit_sampler"]["ok"] in (True, False)
        assert len(samples["samples"]) == 200 and len(samples["limit_samples"]) == 200

    def test_sample_cov_growing(self):
        cfg = parse_config(
            base_config(ensemble={"type": "sample_cov", "n": 60}, comparison="growing_k", f="x",
                        k_rule={"kind": "proportional", "ratio": 0.5}, replications=300)
        )
        rep, _ = mc.run_experiment(cfg)
        assert 0.7 < rep["variance_ratio"] < 1.3

    def test_rigidity_and_sampling(self):
        rep, s = mc.run_experiment(parse_config({"ensemble": {"type": "sample_cov", "n": 30}, "comparison": "rigidity",
                                                 "replications": 5, "master_seed": 2}))
        assert rep["median_max_weighted"] > 0 and len(s["samples"]) == 5
        rep, s = mc.run_experiment(parse_config({"ensemble": None, "n": 500, "f": "x", "comparison": "sampling_clt",
                                                 "k_rule": {"kind": "fixed", "k": 50}, "replications": 300,
                                                 "master_seed": 2}))
        assert rep["variance_exact"] == pytest.approx(1 / 12, rel=0.01)


class TestDeterminism:
    def test_workers_do_not_change_results(self):
        cfg = parse_config(base_config(replications=30))
        mc.clear_cache()
        one, s1 = mc.run_experiment(cfg, workers=1)
        mc.clear_cache()
        two, s2 = mc.run_experiment(cfg, workers=3)
        assert one == two
        assert np.array_equal(s1["samples"], s2["samples"])

    def test_prefix_cache_consistency(self):
        ens = WignerSpec(20)
        mc.clear_cache()
        short = np.array(mc.simulate_spectra(ens, 10, 9))
        mc.clear_cache()
        long = mc.simulate_spectra(ens, 25, 9)
        assert np.array_equal(short, long[:10])
        assert mc.simulate_spectra(ens, 10, 9).shape == (10, 20)

    def test_distinct_ensembles_not_confused(self):
        a = mc.simulate_spectra(WignerSpec(12), 3, 1)
        b = mc.simulate_spectra(SampleCovSpec(12), 3, 1)
        assert not np.array_equal(a, b)
