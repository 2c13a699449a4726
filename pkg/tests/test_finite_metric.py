"""Finite metric spaces: validation, inversion/sphericalization quasimetrics,
chain metrics with sandwich bounds, and distance-matrix files."""

import numpy as np
import pytest

from heislab import finite_metric as fm
from heislab import hgroup, hlie


def euclidean_space(count, dim, seed, labels=None):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(count, dim))
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    dist = np.triu(dist, 1)
    dist = dist + dist.T
    return fm.FiniteMetricSpace(labels or [str(i) for i in range(count)], dist)


def group_space(name, count, seed, radius=1.0):
    alg = hlie.algebra_from_name(name)
    v, z = hgroup.sample_arrays(alg, count, radius, seed)
    return fm.from_group_arrays(alg, v, z)


class TestValidation:
    def test_asymmetry_names_the_entry(self):
        dist = np.array([[0.0, 1.0], [1.5, 0.0]])
        with pytest.raises(ValueError, match=r"asymmetric distances at \(i, j\) = \(0, 1\)"):
            fm.validate_distance_matrix(dist)

    def test_nonzero_diagonal(self):
        dist = np.array([[0.0, 1.0], [1.0, 0.5]])
        with pytest.raises(ValueError, match="nonzero diagonal at i = 1"):
            fm.validate_distance_matrix(dist)

    def test_nonpositive_off_diagonal(self):
        dist = np.array([[0.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ValueError, match="non-positive off-diagonal"):
            fm.validate_distance_matrix(dist)

    def test_triangle_violation_names_the_triple(self):
        dist = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        with pytest.raises(ValueError, match=r"triangle inequality violated at \(i, k, j\)"):
            fm.validate_distance_matrix(dist)

    def test_non_finite(self):
        dist = np.array([[0.0, np.inf], [np.inf, 0.0]])
        with pytest.raises(ValueError, match="non-finite"):
            fm.validate_distance_matrix(dist)

    def test_slack_tolerates_rounding(self):
        dist = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0 + 1e-12, 1.0, 0.0]])
        dist = np.maximum(dist, dist.T)
        fm.validate_distance_matrix(dist)  # within the 1e-9 slack

    def test_label_count_mismatch(self):
        with pytest.raises(ValueError, match="labels do not match"):
            fm.FiniteMetricSpace(["a"], np.zeros((2, 2)))

    def test_duplicate_labels(self):
        with pytest.raises(ValueError, match="unique"):
            fm.FiniteMetricSpace(["a", "a"], np.array([[0.0, 1.0], [1.0, 0.0]]))


class TestInversionQuasimetric:
    def test_collinear_example(self):
        # points {p=0, 1, 2} on the line
        space = fm.FiniteMetricSpace(["p", "a", "b"],
                                     [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
        based = fm.BasedSpace(space, 0)
        t = fm.inversion_quasimetric(based)
        assert fm.inversion_labels(based) == ["a", "b", fm.INFINITY_LABEL]
        assert t[0, 1] == pytest.approx(0.5)   # t_p(a, b) = 1 / (1 * 2)
        assert t[0, 2] == pytest.approx(1.0)   # t_p(a, inf) = 1 / d(a, p)
        assert t[1, 2] == pytest.approx(0.5)   # t_p(b, inf)
        assert np.array_equal(np.diag(t), np.zeros(3))
        assert np.array_equal(t, t.T)

    def test_scaling_homogeneity(self):
        space = euclidean_space(20, 3, seed=1)
        based = fm.BasedSpace(space, 4)
        t = fm.inversion_quasimetric(based)
        scaled = fm.FiniteMetricSpace(space.labels, 3.0 * space.dist)
        t_scaled = fm.inversion_quasimetric(fm.BasedSpace(scaled, 4))
        assert np.allclose(t_scaled, t / 3.0, atol=1e-15)

    def test_zero_distance_to_base(self):
        dist = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        with pytest.raises(ValueError, match="distance zero from the base"):
            fm._inversion_quasimetric_matrix(dist, 0)

    def test_base_index_range(self):
        space = euclidean_space(5, 2, seed=2)
        with pytest.raises(ValueError, match="out of range"):
            fm.BasedSpace(space, 7)


class TestSphericalization:
    def test_base_to_infinity_is_one(self):
        space = euclidean_space(10, 3, seed=3)
        based = fm.BasedSpace(space, 2)
        s = fm.sphericalization_quasimetric(based)
        assert s[2, 10] == pytest.approx(1.0)  # 1 / (1 + d(p, p))
        assert fm.sphericalization_labels(based)[-1] == fm.INFINITY_LABEL

    def test_far_points_approach_infinity(self):
        dist = np.array([[0.0, 1000.0], [1000.0, 0.0]])
        space = fm.FiniteMetricSpace(["p", "far"], dist)
        s = fm.sphericalization_quasimetric(fm.BasedSpace(space, 0))
        assert s[1, 2] == pytest.approx(1.0 / 1001.0)

    def test_diameter_bounds_on_euclidean_sample(self):
        space = euclidean_space(100, 3, seed=4)
        based = fm.BasedSpace(space, 0)
        s = fm.sphericalization_quasimetric(based)
        d_hat = fm.chain_metric(s)
        off = ~np.eye(s.shape[0], dtype=bool)
        assert np.max(d_hat) <= 1.0 + 1e-12
        assert np.max(d_hat) >= 0.25 * np.max(s)
        assert np.all(d_hat[off] >= 0.25 * s[off] - 1e-15)
        assert np.all(d_hat[off] <= s[off] + 1e-15)


class TestChainMetric:
    def test_metric_is_left_unchanged(self):
        space = euclidean_space(30, 3, seed=5)
        out = fm.chain_metric(space.dist)
        assert np.allclose(out, space.dist, atol=1e-15)

    def test_single_violation_is_replaced_by_two_hops(self):
        q = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        out = fm.chain_metric(q)
        assert out[0, 2] == pytest.approx(2.0)
        assert out[0, 1] == pytest.approx(1.0)

    def test_output_is_a_metric_below_the_input(self):
        rng = np.random.default_rng(6)
        n = 40
        q = rng.uniform(0.5, 2.0, size=(n, n))
        q = np.triu(q, 1)
        q = q + q.T
        out = fm.chain_metric(q)
        fm.validate_distance_matrix(out, slack=1e-12)
        assert np.all(out <= q + 1e-15)

    def test_asymmetric_input_rejected(self):
        q = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(ValueError, match="asymmetric"):
            fm.chain_metric(q)

    def test_nonzero_diag_rejected(self):
        q = np.array([[1.0, 1.0], [1.0, 0.0]])
        with pytest.raises(ValueError, match="zero diagonal"):
            fm.chain_metric(q)

    def test_point_cap(self):
        q = np.zeros((5, 5))
        q[np.triu_indices(5, 1)] = 1.0
        q = q + q.T
        with pytest.raises(ValueError, match="exceed the closure cap"):
            fm.chain_metric(q, max_points=4)

    def test_determinism(self):
        space = euclidean_space(50, 2, seed=7)
        based = fm.BasedSpace(space, 0)
        a = fm.chain_metric(fm.inversion_quasimetric(based))
        b = fm.chain_metric(fm.inversion_quasimetric(based))
        assert a.tobytes() == b.tobytes()


class TestSandwich:
    @pytest.mark.parametrize("make", [
        lambda: group_space("H_C:1", 200, seed=8),
        lambda: euclidean_space(200, 3, seed=9),
    ], ids=["H_C:1", "euclidean_R3"])
    def test_inversion_sandwich_is_exhaustive(self, make):
        space = make()
        based = fm.BasedSpace(space, 0)
        q = fm.inversion_quasimetric(based)
        chained = fm.chain_metric(q)
        off = ~np.eye(q.shape[0], dtype=bool)
        assert np.all(chained[off] >= 0.25 * q[off] - 1e-15)
        assert np.all(chained[off] <= q[off] + 1e-15)

    @pytest.mark.parametrize("make", [
        lambda: group_space("H_C:1", 200, seed=10),
        lambda: euclidean_space(200, 3, seed=11),
    ], ids=["H_C:1", "euclidean_R3"])
    def test_sphericalization_sandwich_is_exhaustive(self, make):
        space = make()
        based = fm.BasedSpace(space, 0)
        s = fm.sphericalization_quasimetric(based)
        chained = fm.chain_metric(s)
        off = ~np.eye(s.shape[0], dtype=bool)
        assert np.all(chained[off] >= 0.25 * s[off] - 1e-15)
        assert np.all(chained[off] <= s[off] + 1e-15)


class TestQuasimetricInvolution:
    def test_rebased_double_inversion_preserves_cross_ratios(self):
        # invert at p, re-base the quasimetric at some q, invert again: the
        # d(. , base) factors cancel, so quadruple cross-ratios persist
        space = euclidean_space(40, 3, seed=12)
        based = fm.BasedSpace(space, 0)
        t_p = fm.inversion_quasimetric(based)
        t_pq = fm._inversion_quasimetric_matrix(t_p, 5)
        rng = np.random.default_rng(13)

        def cross(dist, a, b, c, d):
            return dist[a, b] * dist[c, d] / (dist[a, c] * dist[b, d])

        # map original index -> row of t_p (base dropped) -> row of t_pq
        worst = 0.0
        for _ in range(500):
            quad = rng.choice(np.arange(1, 40), size=4, replace=False)
            rows_tp = quad - 1
            rows_tpq = np.array([r - 1 if r > 5 else r for r in rows_tp])
            if np.any(rows_tp == 5):
                continue  # skip the second base point
            original = cross(space.dist, *quad)
            twice = cross(t_pq, *rows_tpq)
            worst = max(worst, abs(twice / original - 1.0))
        assert worst <= 1e-9


class TestGroupSamples:
    def test_two_point_matrix(self):
        alg = hlie.algebra_from_name("H_C:1")
        p = hgroup.point(alg, [2.0, 0.0], [0.0])  # gauge 1 from the identity
        e = hgroup.identity(alg)
        space = fm.from_group_sample([e, p])
        assert np.allclose(space.dist, [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)

    def test_abelian_sample_is_scaled_euclidean(self):
        # gauge((x, 0)) = |x| / 2, so the matrix is half the Euclidean one
        alg = hlie.algebra_from_name("H_R:2")
        rng = np.random.default_rng(14)
        v = rng.uniform(-1, 1, size=(50, 2))
        space = fm.from_group_arrays(alg, v, np.zeros((50, 0)))
        euclid = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)
        assert np.allclose(space.dist, euclid / 2.0, atol=1e-14)

    def test_duplicates_are_reported_with_indices(self):
        alg = hlie.algebra_from_name("H_C:1")
        v = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        z = np.zeros((3, 1))
        with pytest.raises(ValueError, match=r"indices \[\(0, 2\)\]"):
            fm.from_group_arrays(alg, v, z)

    def test_minimum_count(self):
        alg = hlie.algebra_from_name("H_C:1")
        with pytest.raises(ValueError, match="at least two"):
            fm.from_group_arrays(alg, np.array([[1.0, 0.0]]), np.zeros((1, 1)))

    def test_quaternionic_sample_validates(self):
        space = group_space("H_H:1", 120, seed=15)
        fm.validate_distance_matrix(space.dist)  # exhaustive triple check


class TestFiles:
    def test_csv_round_trip_bit_exact(self, tmp_path):
        space = group_space("H_C:1", 40, seed=16)
        path = tmp_path / "dist.csv"
        fm.save_space_csv(space, path)
        loaded = fm.load_space_csv(path)
        assert loaded.labels == space.labels
        assert loaded.dist.tobytes() == space.dist.tobytes()
        assert not loaded.contains_infinity

    def test_json_round_trip(self, tmp_path):
        space = group_space("H_H:1", 25, seed=17)
        based = fm.BasedSpace(space, 3)
        inverted = fm.invert_space(based)
        path = tmp_path / "dist.json"
        fm.save_space_json(inverted, path)
        loaded = fm.load_space_json(path)
        assert loaded.contains_infinity
        assert loaded.labels[-1] == fm.INFINITY_LABEL
        assert loaded.dist.tobytes() == inverted.dist.tobytes()

    def test_infinity_label_detected_in_csv(self, tmp_path):
        space = group_space("H_C:1", 30, seed=18)
        spherical = fm.sphericalize_space(fm.BasedSpace(space, 0))
        path = tmp_path / "sph.csv"
        fm.save_space_csv(spherical, path)
        assert fm.load_space_csv(path).contains_infinity

    def test_csv_row_width_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0.0,1.0\n1.0\n")
        with pytest.raises(ValueError, match="row 3"):
            fm.load_space_csv(path)

    def test_csv_non_numeric_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0.0,x\nx,0.0\n")
        with pytest.raises(ValueError, match="non-numeric"):
            fm.load_space_csv(path)

    def test_csv_validation_applies(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0.0,1.0\n2.0,0.0\n")
        with pytest.raises(ValueError, match="asymmetric"):
            fm.load_space_csv(path)

    def test_json_missing_field(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"labels": ["a"]}')
        with pytest.raises(ValueError, match="missing the field"):
            fm.load_space_json(path)

    def test_empty_csv(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            fm.load_space_csv(path)


class TestWrappers:
    def test_invert_space_blocks_double_compactification(self):
        space = group_space("H_C:1", 20, seed=19)
        spherical = fm.sphericalize_space(fm.BasedSpace(space, 0))
        with pytest.raises(ValueError, match="already contains"):
            fm.invert_space(fm.BasedSpace(spherical, 0))

    def test_label_index(self):
        space = group_space("H_C:1", 5, seed=20)
        assert space.label_index("3") == 3
        with pytest.raises(ValueError, match="unknown point label"):
            space.label_index("missing")
