"""Tests for the built-in instance battery and suite bookkeeping."""

import pytest

from blockcd import battery


class TestInstances:
    def test_registry_names_resolve(self):
        for name in (battery.lasso_names() + battery.toeplitz_names()
                     + battery.table1_names() + battery.thm2_names()):
            instance = battery.get_instance(name)
            assert instance.name == name
            assert instance.delta0 >= 0.0
            assert instance.r0.value >= 0.0

    def test_unknown_name_rejected(self):
        with pytest.raises(KeyError):
            battery.get_instance("mystery_instance")

    def test_lasso_instances_certified(self):
        for name in battery.lasso_names():
            instance = battery.get_instance(name)
            assert instance.r0.certified
            assert instance.reference.certified
            assert instance.constants.rank_case == "full_column"

    def test_rank_cases(self):
        assert battery.get_instance("thm2_case1").constants.rank_case == "full_column"
        assert battery.get_instance("thm2_case2").constants.rank_case == "full_row"
        assert battery.get_instance("thm2_case3_box").constants.rank_case == "neither"
        assert not battery.get_instance("thm2_case3_free").r0.certified

    def test_trajectory_cache_returns_same_object(self):
        t1 = battery.get_trajectory("toeplitz_K5", "bcpg", "block_lk",
                                    "cyclic", 0, 20)
        t2 = battery.get_trajectory("toeplitz_K5", "bcpg", "block_lk",
                                    "cyclic", 0, 20)
        assert t1 is t2
        assert t1.gap is not None


class TestSuites:
    def test_lemma_suite_asserted_checks_pass(self):
        reports = battery.suite_lemmas()
        for report in reports:
            if not report.advisory:
                assert report.passed, report.check_name

    def test_envelope_suite_asserted_checks_pass(self):
        reports = battery.suite_envelopes()
        for report in reports:
            if not report.advisory:
                assert report.passed, report.check_name

    def test_prior_bound_with_unit_constant_holds_where_new_bounds_hold(self):
        # observed on the l1 battery: the prior cyclic bound with C = 1 is
        # never violated on runs where the new bounds hold (its checks stay
        # advisory since the constant is unspecified)
        reports = battery.suite_envelopes()
        prior = [r for r in reports if r.check_name.startswith("envelope_prior_cyclic")]
        assert prior
        for report in prior:
            assert report.advisory
            assert report.passed, report.check_name

    def test_gd_suite_covers_all_smooth_instances(self):
        reports = battery.suite_gd()
        assert len(reports) == len(battery.smooth_battery_names())

    def test_ratio_report_is_informational(self):
        report = battery.prior_ratio_report()
        assert report.advisory
        assert "prior/blockwise" in report.notes

    def test_tightness_suite_shape(self):
        reports = battery.suite_tightness((5, 10))
        assert len(reports) == 8
        objective = [r for r in reports if "objective" in r.check_name]
        assert all(not r.passed for r in objective)  # known inconsistency
        others = [r for r in reports if "objective" not in r.check_name]
        assert all(r.passed for r in others)
