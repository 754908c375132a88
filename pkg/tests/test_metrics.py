import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffnet.metrics import (MetricsError, format_summary_table, pr_curve,
                             score_support, select_tau_max_tpr_tdr)


def exhaustive_reference(truth, estimate, p):
    """Double loop over every upper-triangular position."""
    tp = fp = tn = fn = 0
    truth, estimate = set(truth), set(estimate)
    for i in range(1, p + 1):
        for j in range(i + 1, p + 1):
            in_t, in_e = (i, j) in truth, (i, j) in estimate
            tp += in_t and in_e
            fp += in_e and not in_t
            fn += in_t and not in_e
            tn += not in_t and not in_e
    return tp, fp, tn, fn


class TestScoreSupport:
    def test_partial_overlap(self):
        s = score_support({(1, 2), (1, 3)}, {(1, 2)}, p=4)
        assert s.tpr == 0.5
        assert s.tdr == 1.0
        assert s.tnr == 1.0

    def test_exact_recovery(self):
        truth = {(1, 2), (2, 3), (1, 4)}
        s = score_support(truth, truth, p=4)
        assert (s.tpr, s.tnr, s.tdr) == (1.0, 1.0, 1.0)

    def test_complement_estimate(self):
        p = 5
        universe = {(i, j) for i in range(1, p + 1)
                    for j in range(i + 1, p + 1)}
        truth = {(1, 2), (3, 4)}
        s = score_support(truth, universe - truth, p)
        assert s.tpr == 0.0
        assert s.tdr == 0.0

    def test_undefined_rates(self):
        s = score_support(set(), {(1, 2)}, p=3)
        assert s.tpr is None
        s = score_support({(1, 2)}, set(), p=3)
        assert s.tdr is None

    def test_bad_pair_rejected(self):
        with pytest.raises(MetricsError):
            score_support({(2, 1)}, set(), p=3)
        with pytest.raises(MetricsError):
            score_support(set(), {(1, 9)}, p=3)

    def test_matches_exhaustive_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            p = int(rng.integers(2, 21))
            universe = [(i, j) for i in range(1, p + 1)
                        for j in range(i + 1, p + 1)]
            truth = {e for e in universe if rng.random() < 0.3}
            est = {e for e in universe if rng.random() < 0.3}
            s = score_support(truth, est, p)
            assert (s.tp, s.fp, s.tn, s.fn) == exhaustive_reference(
                truth, est, p)


class TestPRCurve:
    def test_indicator_of_truth_contains_perfect_point(self):
        pairs = ((1, 2), (1, 3), (2, 3))
        truth = {(1, 2)}
        psi = [1.0, 0.0, 0.0]
        points = pr_curve(psi, pairs, truth, n_replicates=4, p=3)
        assert any(pt.recall == 1.0 and pt.precision == 1.0 for pt in points)

    def test_all_zero_psi_precision_undefined(self):
        pairs = ((1, 2), (1, 3), (2, 3))
        points = pr_curve([0.0] * 3, pairs, {(1, 2)}, 4, 3)
        assert all(pt.precision is None for pt in points)

    def test_matches_per_tau_scoring(self):
        rng = np.random.default_rng(7)
        p, b = 8, 10
        pairs = tuple((i, j) for i in range(1, p + 1)
                      for j in range(i + 1, p + 1))
        psi = rng.integers(0, b + 1, size=len(pairs)) / b
        truth = {e for e in pairs if rng.random() < 0.4}
        points = pr_curve(psi, pairs, truth, b, p)
        assert len(points) == b
        for pt in points:
            est = {e for e, v in zip(pairs, psi) if v > pt.tau}
            ref = score_support(truth, est, p)
            assert pt.recall == ref.tpr and pt.precision == ref.tdr

    def test_recall_non_increasing(self):
        rng = np.random.default_rng(3)
        pairs = tuple((1, j) for j in range(2, 12))
        psi = rng.integers(0, 6, size=10) / 5
        truth = set(pairs[:4])
        points = pr_curve(psi, pairs, truth, 5, 12)
        recalls = [pt.recall for pt in points]
        assert all(a >= b for a, b in zip(recalls, recalls[1:]))


class TestSelectTau:
    def test_indicator_ties_take_largest(self):
        pairs = ((1, 2), (1, 3))
        tau = select_tau_max_tpr_tdr([1.0, 0.0], pairs, {(1, 2)}, 4, 3)
        assert tau == 0.75  # largest grid value below 1

    def test_false_edge_cut(self):
        pairs = ((1, 2), (1, 3))
        tau = select_tau_max_tpr_tdr([1.0, 0.2], pairs, {(1, 2)}, 5, 3)
        assert tau >= 0.2

    def test_empty_truth_raises(self):
        with pytest.raises(MetricsError):
            select_tau_max_tpr_tdr([0.5], ((1, 2),), set(), 4, 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10 ** 9))
def test_rates_within_unit_interval(p, seed):
    rng = np.random.default_rng(seed)
    universe = [(i, j) for i in range(1, p + 1) for j in range(i + 1, p + 1)]
    truth = {e for e in universe if rng.random() < 0.5}
    est = {e for e in universe if rng.random() < 0.5}
    s = score_support(truth, est, p)
    for rate in (s.tpr, s.tnr, s.tdr):
        assert rate is None or 0.0 <= rate <= 1.0


def test_summary_table_formats_none():
    text = format_summary_table([
        {"method": "joint", "dataset": 1, "tpr": 0.81, "tnr": 1.0,
         "tdr": None},
    ])
    assert "81.0" in text and "n/a" in text
