import numpy as np
import pytest

from diffnet import _rng
from diffnet.simulate import (GraphStructure, StudyDesign, ar_covariance,
                              fill_precision, generate_hub_graph,
                              generate_small_world, generate_study,
                              inverse_sqrt_spd, make_pair,
                              sample_matrix_normal, whiten)


def stream(*key):
    return _rng.stream(0, *key)


class TestArCovariance:
    def test_known_values(self):
        got = ar_covariance(3, 0.5)
        want = np.array([[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]])
        np.testing.assert_allclose(got, want)

    def test_zero_rho_identity(self):
        np.testing.assert_array_equal(ar_covariance(2, 0.0), np.eye(2))

    def test_power_entry(self):
        assert ar_covariance(4, 0.6)[0, 3] == pytest.approx(0.6 ** 3)

    def test_invalid_rho(self):
        with pytest.raises(ValueError):
            ar_covariance(3, 1.0)

    def test_cholesky_factorizable(self):
        for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
            for q in (2, 50, 500):
                np.linalg.cholesky(ar_covariance(q, rho))


class TestHubGraph:
    def test_edge_count_100(self):
        g = generate_hub_graph(100, 5, stream(1))
        assert g.n_edges == 95
        # no cross-block edges: blocks of 20
        for (i, j) in g.edges:
            assert (i - 1) // 20 == (j - 1) // 20

    def test_smallest(self):
        g = generate_hub_graph(2, 1, stream(2))
        assert g.edges == frozenset({(1, 2)})

    def test_blocks_of_two(self):
        g = generate_hub_graph(10, 5, stream(3))
        assert g.n_edges == 5

    def test_remainder_joins_last_block(self):
        g = generate_hub_graph(11, 3, stream(4))
        # blocks of 3, 3, 5 -> 2 + 2 + 4 edges
        assert g.n_edges == 8

    def test_invalid_groups(self):
        with pytest.raises(ValueError):
            generate_hub_graph(3, 4, stream(5))


class TestSmallWorld:
    def test_edge_count_paper_setting(self):
        g = generate_small_world(100, 10, 0.05, stream(1))
        assert g.n_edges == 500

    def test_no_rewiring_exact_ring(self):
        g = generate_small_world(10, 2, 0.0, stream(2))
        want = {(i, i + 1) for i in range(1, 10)} | {(1, 10)}
        assert g.edges == frozenset(want)

    def test_full_rewiring_preserves_count(self):
        g = generate_small_world(20, 4, 1.0, stream(3))
        assert g.n_edges == 40

    def test_invalid_neighbors(self):
        with pytest.raises(ValueError):
            generate_small_world(10, 10, 0.1, stream(4))


class TestFillPrecision:
    def test_empty_graph(self):
        g = GraphStructure(p=4, edges=frozenset(), kind="hub")
        np.testing.assert_array_equal(fill_precision(g, stream(1)),
                                      np.zeros((4, 4)))

    def test_single_edge_support(self):
        g = GraphStructure(p=3, edges=frozenset({(1, 3)}), kind="hub")
        m = fill_precision(g, stream(2))
        assert m[0, 2] == m[2, 0] != 0.0
        assert 0.3 <= abs(m[0, 2]) <= 0.5
        assert np.count_nonzero(m) == 2

    def test_hub_graph_nonzero_count(self):
        g = generate_hub_graph(10, 5, stream(3))
        m = fill_precision(g, stream(4))
        assert np.count_nonzero(m) == 10

    def test_sign_balance(self):
        g = generate_hub_graph(200, 10, stream(5))
        m = fill_precision(g, stream(6))
        vals = m[np.triu_indices(200, k=1)]
        vals = vals[vals != 0]
        frac_pos = np.mean(vals > 0)
        assert 0.35 < frac_pos < 0.65


class TestMakePair:
    def base(self, p=6, seed=7):
        g = generate_hub_graph(p, 2, stream(seed))
        return fill_precision(g, stream(seed + 1))

    def test_full_flip_doubles_entry(self):
        base = np.zeros((4, 4))
        base[0, 1] = base[1, 0] = 0.4
        pair = make_pair(base, 1.0)
        assert pair.delta[0, 1] == pytest.approx(0.8)
        off = pair.delta.copy()
        np.fill_diagonal(off, 0.0)
        assert np.count_nonzero(off) == 2

    def test_empty_flip_set(self):
        base = self.base()
        with pytest.warns(UserWarning):
            pair = make_pair(base, 0.1)  # floor(0.6) = 0
        off = pair.delta.copy()
        np.fill_diagonal(off, 0.0)
        assert np.count_nonzero(off) == 0

    def test_flip_confined_to_corner_block(self):
        base = self.base(p=20, seed=11)
        pair = make_pair(base, 0.4)
        bound = 8
        for (i, j) in pair.flip_set:
            assert i <= bound and j <= bound

    def test_positive_definite_after_shift(self):
        base = self.base(p=12, seed=3)
        pair = make_pair(base, 0.5)
        for omega in (pair.omega_x, pair.omega_y):
            assert np.linalg.eigvalsh(omega)[0] > 0.4

    def test_delta_support_equals_flip_set(self):
        base = self.base(p=10, seed=9)
        pair = make_pair(base, 0.6)
        support = {(i, j) for (i, j) in pair.flip_set if i < j}
        assert pair.differential_edges() == support

    def test_delta_is_exact_difference(self):
        base = self.base(p=8, seed=5)
        pair = make_pair(base, 0.8)
        np.testing.assert_array_equal(pair.delta,
                                      pair.omega_x - pair.omega_y)

    def test_floor_eps_guard(self):
        # 0.3 * 10 = 2.9999999999999996 in floats; the bound must be 3
        base = np.zeros((10, 10))
        base[1, 2] = base[2, 1] = 0.4
        pair = make_pair(base, 0.3)
        assert (2, 3) in pair.flip_set


class TestMatrixNormal:
    def test_identity_case_unit_variance(self, rng):
        draws = np.stack([
            sample_matrix_normal(np.zeros((3, 2)), np.eye(3), np.eye(2), rng)
            for _ in range(10000)
        ])
        assert abs(draws.var() - 1.0) < 0.05

    def test_vec_covariance_kronecker(self):
        r = _rng.stream(99, 0)
        sigma_s = np.array([[1.0, 0.5], [0.5, 1.0]])
        sigma_t = np.eye(2)
        draws = np.stack([
            sample_matrix_normal(np.zeros((2, 2)), sigma_s, sigma_t, r)
            .flatten(order="F")
            for _ in range(100000)
        ])
        emp = np.cov(draws.T)
        want = np.kron(sigma_t, sigma_s)
        assert np.abs(emp - want).max() < 0.05

    def test_mean_shift(self, rng):
        mean = np.ones((2, 3))
        draws = np.stack([
            sample_matrix_normal(mean, 2 * np.eye(2),
                                 ar_covariance(3, 0.4), rng)
            for _ in range(20000)
        ])
        assert np.abs(draws.mean(axis=0) - mean).max() < 0.05

    def test_non_spd_rejected(self, rng):
        with pytest.raises(ValueError):
            sample_matrix_normal(np.zeros((2, 2)),
                                 np.array([[1.0, 2.0], [2.0, 1.0]]),
                                 np.eye(2), rng)


class TestWhiten:
    def test_identity_noop(self, rng):
        x = rng.standard_normal((4, 5))
        np.testing.assert_allclose(whiten(x, np.eye(5)), x)

    def test_scalar_scaling(self, rng):
        x = rng.standard_normal((3, 4))
        np.testing.assert_allclose(whiten(x, 4.0 * np.eye(4)), x / 2.0)

    def test_removes_temporal_correlation(self):
        r = _rng.stream(5, 0)
        q = 6
        sigma_t = ar_covariance(q, 0.5)
        draws = np.stack([
            whiten(sample_matrix_normal(np.zeros((2, q)), np.eye(2),
                                        sigma_t, r), sigma_t)
            for _ in range(40000)
        ])
        cols = draws.reshape(-1, q)
        corr = np.corrcoef(cols.T)
        off = corr[np.triu_indices(q, k=1)]
        assert np.abs(off).max() < 0.05

    def test_inverse_sqrt_of_non_spd_rejected(self):
        with pytest.raises(ValueError):
            inverse_sqrt_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestGenerateStudy:
    def design(self, **kw):
        base = dict(M=3, p=10, q=6, n_case=4, n_control=5,
                    rho_list=(0.5, 0.5, 0.5), structure="hub", hub_groups=2,
                    seed=21)
        base.update(kw)
        return StudyDesign(**base)

    def test_shapes_and_counts(self):
        scans, pairs = generate_study(self.design())
        assert len(scans) == 3 and len(pairs) == 3
        for subjects in scans:
            assert len(subjects) == 9
            cases = [s for s in subjects if s.group == "case"]
            assert len(cases) == 4
            assert all(s.data.shape == (10, 6) for s in subjects)

    def test_smallest_study(self):
        scans, _ = generate_study(self.design(M=1, n_case=1, n_control=1,
                                              rho_list=(0.5,)))
        assert len(scans) == 1 and len(scans[0]) == 2

    def test_deterministic(self):
        a, pa = generate_study(self.design())
        b, pb = generate_study(self.design())
        for sa, sb in zip(a, b):
            for x, y in zip(sa, sb):
                np.testing.assert_array_equal(x.data, y.data)
        for x, y in zip(pa, pb):
            np.testing.assert_array_equal(x.delta, y.delta)

    def test_shared_base_same_flip_sets(self):
        _, pairs = generate_study(self.design())
        assert pairs[0].flip_set == pairs[1].flip_set == pairs[2].flip_set
        np.testing.assert_array_equal(pairs[0].omega_x, pairs[2].omega_x)

    def test_unshared_base_differs(self):
        _, pairs = generate_study(self.design(share_base=False, p=20,
                                              hub_groups=4))
        assert not np.array_equal(pairs[0].omega_x, pairs[1].omega_x)

    def test_min_eigenvalue_above_threshold(self):
        _, pairs = generate_study(self.design())
        for pair in pairs:
            assert np.linalg.eigvalsh(pair.omega_x)[0] > 0.4
            assert np.linalg.eigvalsh(pair.omega_y)[0] > 0.4
