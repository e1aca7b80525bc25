import json

import numpy as np
import pytest

from weighted_ckp import make_space
from weighted_ckp.errors import ConfigError, UnknownProfile
from weighted_ckp.harness import (REGISTRY, SearchConfig, SuiteConfig, covered, dump_instance, generate,
                                  instance_from_dict, load_instance, replay, run_suite,
                                  search_counterexamples)
from weighted_ckp.harness.suite import evaluate_instance, summarize
from weighted_ckp.transport import MetricSpace

# every inequality, identity and implication the registry is meant to exercise
EXPECTED_LABELS = {
    "1.1", "1.2", "1.3", "2.1", "2.2", "2.3", "2.4", "2.6", "2.7", "2.8", "2.9", "3.5",
    "4.2", "4.3", "4.4", "5.1", "6.1", "6.2", "7.2", "8.2", "8.3", "8.4", "8.5", "8.6", "8.7",
    "9.2", "9.4", "11.1", "11.2", "11.3", "11.4", "11.5", "11.6",
    "chi_2 = T_2", "cor_3_1", "cor_3_2", "thm_4_2",
}

UNIFORM_THREE_HALVES = {"mu": [0.5, 0.5], "f": [1.5, 0.5], "alpha": 2.0}


class TestGenerator:
    def test_near_mu_profile(self):
        inst = generate(1, 2, "near-mu")
        assert np.max(np.abs(np.asarray(inst.f) - 1)) <= 0.1

    @pytest.mark.parametrize("profile", ["dirichlet", "sparse", "near-mu", "euclidean"])
    def test_deterministic(self, profile):
        assert generate(1, 6, profile).digest() == generate(1, 6, profile).digest()

    def test_seeds_differ(self):
        assert generate(1, 6).digest() != generate(2, 6).digest()

    def test_euclidean_metric_is_valid(self):
        inst = generate(2, 5, "euclidean")
        ms = MetricSpace(inst.space, np.asarray(inst.metric.dist), inst.metric.base_index)
        assert ms.dist.shape == (5, 5)
        assert inst.p is not None

    def test_sparse_support(self):
        inst = generate(3, 8, "sparse")
        assert 1 <= np.count_nonzero(inst.f) <= 2

    def test_unknown_profile(self):
        with pytest.raises(UnknownProfile):
            generate(0, 3, "lattice")

    def test_g_has_positive_maximum_or_is_dominated(self):
        for seed in range(20):
            inst = generate(seed, 5)
            assert inst.g is not None and inst.u is not None and inst.w is not None


class TestInstanceIO:
    def test_round_trip(self, tmp_path):
        inst = generate(5, 7, "euclidean")
        path = tmp_path / "inst.json"
        dump_instance(inst, path)
        again = load_instance(path)
        assert again.digest() == inst.digest()

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            instance_from_dict({**UNIFORM_THREE_HALVES, "colour": 1})

    def test_missing_field(self):
        with pytest.raises(ConfigError):
            instance_from_dict({"mu": [1.0], "f": [1.0]})

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_instance(path)


class TestRegistry:
    def test_completeness(self):
        assert covered() == EXPECTED_LABELS

    def test_every_check_described(self):
        assert all(check.description for check in REGISTRY.values())

    def test_pinsker_on_two_point(self):
        inst = instance_from_dict(UNIFORM_THREE_HALVES)
        (report,) = evaluate_instance(inst, ["pinsker"])
        assert report.lhs == pytest.approx(0.5)
        assert report.rhs == pytest.approx(0.511492005687551, abs=1e-12)
        assert report.status == "pass"

    def test_implication_is_vacuous_without_premise(self):
        # g = (1, -1) is not dominated, so "dominated => mean <= 0" says nothing
        inst = instance_from_dict({**UNIFORM_THREE_HALVES, "g": [1.0, -1.0]})
        (report,) = evaluate_instance(inst, ["prop_8_1_mean"])
        assert report.status == "vacuous"

    def test_one_way_witness(self):
        inst = instance_from_dict({**UNIFORM_THREE_HALVES, "g": [1.0, -1.0]})
        reports = {r.check_id: r for r in evaluate_instance(inst, list(REGISTRY))}
        assert reports["thm_4_1"].status == "pass"
        assert reports["prop_8_1_suff"].status in ("pass", "vacuous")
        assert not reports["thm_4_1"].failed

    def test_checks_skip_missing_inputs(self):
        inst = instance_from_dict(UNIFORM_THREE_HALVES)
        ids = {r.check_id for r in evaluate_instance(inst, list(REGISTRY))}
        assert "eq_3_5" not in ids and "thm_4_1" not in ids
        assert "pinsker" in ids


class TestSuite:
    def test_empty_allowlist(self):
        with pytest.raises(ConfigError):
            run_suite(SuiteConfig(checks=()))

    def test_unknown_check(self):
        with pytest.raises(ConfigError):
            run_suite(SuiteConfig(checks=("no_such_check",)))

    def test_small_run_is_green_and_sorted(self):
        reports = run_suite(SuiteConfig(seeds=tuple(range(24))))
        assert summarize(reports)["fail"] == 0
        keys = [(r.check_id, r.seed) for r in reports]
        assert keys == sorted(keys)

    def test_parallel_matches_serial(self):
        cfg = SuiteConfig(seeds=tuple(range(8)), checks=("pinsker", "thm_4_1", "eq_3_5"))
        serial = [r.to_dict() for r in run_suite(cfg)]
        parallel = [r.to_dict() for r in run_suite(SuiteConfig(**{**cfg.__dict__, "workers": 2}))]
        assert json.dumps(serial, sort_keys=True) == json.dumps(parallel, sort_keys=True)

    def test_replay(self):
        inst = generate(7, 5, "euclidean")
        for report in evaluate_instance(inst, list(REGISTRY)):
            report.instance = inst.to_dict()
            again = replay(report)
            assert again.status == report.status
            if np.isfinite(report.lhs):
                assert again.lhs == pytest.approx(report.lhs, abs=1e-12, rel=1e-12)
                assert again.rhs == pytest.approx(report.rhs, abs=1e-12, rel=1e-12)


class TestSearch:
    def test_identity_margin_is_zero(self):
        (report,) = search_counterexamples(SearchConfig("chi_T_identity_alpha2", seeds=(0, 1), steps=20))
        assert report.status == "pass"
        assert abs(report.margin) <= 1e-12

    def test_tv_bound_reaches_equality_on_two_points(self):
        (report,) = search_counterexamples(SearchConfig("eq_3_5", seeds=(0, 1, 2, 3), steps=200, n=2))
        assert report.status == "pass"
        assert report.margin / max(report.rhs, 1e-300) <= 1e-6

    def test_reports_digest_and_instance(self):
        (report,) = search_counterexamples(SearchConfig("thm_2_1", seeds=(0,), steps=30, alphas=(2.0,)))
        assert report.instance is not None
        assert report.instance_digest == instance_from_dict(report.instance).digest()

    def test_unknown_check(self):
        with pytest.raises(ConfigError):
            search_counterexamples(SearchConfig("nope"))


def test_space_equality_is_by_value():
    assert make_space([0.5, 0.5]) == make_space([0.5, 0.5])
