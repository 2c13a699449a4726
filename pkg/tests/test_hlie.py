"""Step-two algebras: brackets, J-maps, and the two structure certifications."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from heislab import hlie
from heislab.algebra import AlgebraKind

HEISENBERG_NAMES = ["H_R:5", "H_C:1", "H_C:3", "H_H:1", "H_H:2", "H_O"]


def every_builtin():
    return [hlie.algebra_from_name(name) for name in
            HEISENBERG_NAMES + ["truncated_HH"]]


class TestBracket:
    def test_complex_x1_y1(self):
        alg = hlie.algebra_from_name("H_C:1")
        assert np.array_equal(hlie.bracket(alg, [1, 0], [0, 1]), [1.0])

    def test_antisymmetry_on_equal_arguments(self):
        alg = hlie.algebra_from_name("H_H:2")
        rng = np.random.default_rng(0)
        x = rng.standard_normal(alg.dim_v)
        assert np.array_equal(hlie.bracket(alg, x, x), np.zeros(3))

    def test_quaternion_x1_w1(self):
        alg = hlie.algebra_from_name("H_H:1")
        # [X_1, W_1] = Z_3
        assert np.array_equal(hlie.bracket(alg, np.eye(4)[0], np.eye(4)[3]), [0, 0, 1.0])

    def test_exact_antisymmetry_in_floats(self):
        alg = hlie.algebra_from_name("H_O")
        rng = np.random.default_rng(1)
        x = rng.standard_normal((500, alg.dim_v))
        y = rng.standard_normal((500, alg.dim_v))
        forward = hlie.bracket_arrays(alg, x, y)
        backward = hlie.bracket_arrays(alg, y, x)
        assert np.array_equal(forward, -backward)

    def test_dimension_mismatch(self):
        alg = hlie.algebra_from_name("H_C:1")
        with pytest.raises(ValueError, match="shape"):
            hlie.bracket(alg, [1, 0, 0], [0, 1])


class TestJMap:
    def test_complex_rotation(self):
        # solving <J_Z X, Y> = <Z, [X, Y]> over the H_C(1) basis by hand
        # gives J_Z X_1 = Y_1 and J_Z Y_1 = -X_1
        alg = hlie.algebra_from_name("H_C:1")
        j = hlie.j_map(alg, [1.0])
        assert np.array_equal(j @ np.array([1.0, 0.0]), [0.0, 1.0])
        assert np.array_equal(j @ np.array([0.0, 1.0]), [-1.0, 0.0])

    def test_zero_center_vector(self):
        alg = hlie.algebra_from_name("H_H:1")
        assert np.array_equal(hlie.j_map(alg, np.zeros(3)), np.zeros((4, 4)))

    def test_octonion_first_column(self):
        # [X_0, X_k] = Z_k forces J_{Z_1} X_0 = X_1
        alg = hlie.algebra_from_name("H_O")
        j = hlie.j_map(alg, np.eye(7)[0])
        assert np.array_equal(j @ np.eye(8)[0], np.eye(8)[1])

    @pytest.mark.parametrize("alg", every_builtin(), ids=lambda a: a.label)
    def test_skew_symmetry(self, alg):
        for k in range(alg.dim_z):
            j = alg.j_stack[k]
            assert np.max(np.abs(j + j.T)) <= 1e-14

    @pytest.mark.parametrize("alg", every_builtin(), ids=lambda a: a.label)
    def test_defining_identity(self, alg):
        rng = np.random.default_rng(7)
        worst = 0.0
        x = rng.standard_normal((10000, alg.dim_v))
        y = rng.standard_normal((10000, alg.dim_v))
        z = rng.standard_normal((10000, alg.dim_z))
        jx = np.einsum("sk,kij,si->sj", z, alg.structure, x)
        lhs = np.sum(jx * y, axis=1)
        rhs = np.sum(z * hlie.bracket_arrays(alg, x, y), axis=1)
        worst = np.max(np.abs(lhs - rhs))
        assert worst <= 1e-12

    @pytest.mark.parametrize("alg", every_builtin(), ids=lambda a: a.label)
    def test_orthogonal_anticommutation(self, alg):
        # polarization of J_Z^2 = -|Z|^2 I on Heisenberg-type algebras
        if alg.dim_z < 2:
            return
        rng = np.random.default_rng(8)
        z1, z2 = hlie._orthonormal_pairs(rng, 200, alg.dim_z)
        for a, b in zip(z1, z2):
            ja, jb = hlie.j_map(alg, a), hlie.j_map(alg, b)
            assert np.max(np.abs(ja @ jb + jb @ ja)) <= 1e-12

    @pytest.mark.parametrize("alg", every_builtin(), ids=lambda a: a.label)
    def test_span_rank_is_center_dimension(self, alg):
        if alg.dim_z == 0:
            return
        rng = np.random.default_rng(9)
        x = rng.standard_normal(alg.dim_v)
        x /= np.linalg.norm(x)
        generators = np.stack([hlie.j_map(alg, z) @ x for z in np.eye(alg.dim_z)])
        assert np.linalg.matrix_rank(generators, tol=1e-9) == alg.dim_z

    @settings(max_examples=30, deadline=None)
    @given(data=arrays(np.float64, (3, 4), elements=st.floats(min_value=-5, max_value=5)))
    def test_defining_identity_hypothesis(self, data):
        alg = hlie.algebra_from_name("H_H:1")
        x, y, zfull = data
        z = zfull[:3]
        lhs = float((hlie.j_map(alg, z) @ x) @ y)
        rhs = float(z @ hlie.bracket(alg, x, y))
        assert lhs == pytest.approx(rhs, abs=1e-10)


class TestCheckHType:
    @pytest.mark.parametrize("name", HEISENBERG_NAMES + ["truncated_HH"])
    def test_positive_cases(self, name):
        report = hlie.check_h_type(hlie.algebra_from_name(name), samples=2000, seed=1)
        assert report.is_h_type
        assert report.max_residual <= 1e-12

    def test_empty_center_is_vacuous(self):
        report = hlie.check_h_type(hlie.algebra_from_name("H_R:5"), samples=10, seed=1)
        assert report.is_h_type and report.max_residual == 0.0

    def test_degenerate_direct_sum_fails(self):
        # J_Z annihilates X_3, so the basis sweep sees residual exactly 1
        report = hlie.check_h_type(hlie.make_degenerate_direct_sum(), samples=500, seed=1)
        assert not report.is_h_type
        assert report.max_residual >= 0.5

    def test_samples_precondition(self):
        with pytest.raises(ValueError, match="samples"):
            hlie.check_h_type(hlie.algebra_from_name("H_C:1"), samples=0)

    def test_report_dict(self):
        report = hlie.check_h_type(hlie.algebra_from_name("H_C:1"), samples=64, seed=3)
        payload = report.to_dict()
        assert payload["algebra"] == "H_C:1"
        assert payload["seed"] == 3
        assert payload["is_h_type"] is True
        assert set(payload) >= {"fingerprint", "samples", "tolerance", "max_residual"}


class TestCheckJ2:
    @pytest.mark.parametrize("name", HEISENBERG_NAMES)
    def test_heisenberg_algebras_satisfy_j2(self, name):
        report = hlie.check_j2(hlie.algebra_from_name(name), samples=2000, seed=1)
        assert report.satisfies_j2
        assert report.max_residual <= 1e-12
        assert report.witness is None

    def test_vacuous_for_small_centers(self):
        for name in ["H_R:5", "H_C:2"]:
            report = hlie.check_j2(hlie.algebra_from_name(name), samples=10, seed=1)
            assert report.satisfies_j2 and report.max_residual == 0.0

    def test_truncated_quaternionic_fails_with_witness(self):
        report = hlie.check_j2(hlie.make_truncated_quaternionic(), samples=2000, seed=1)
        assert not report.satisfies_j2
        assert report.max_residual == pytest.approx(1.0, abs=1e-12)
        assert report.witness is not None

    def test_witness_outside_span_by_rank_augmentation(self):
        # brute-force oracle: stacking the target onto the generators raises the rank
        alg = hlie.make_truncated_quaternionic()
        report = hlie.check_j2(alg, samples=500, seed=2)
        x, z, zp = report.witness
        target = hlie.j_map(alg, z) @ (hlie.j_map(alg, zp) @ x)
        generators = np.stack([hlie.j_map(alg, w) @ x for w in np.eye(alg.dim_z)])
        base_rank = np.linalg.matrix_rank(generators, tol=1e-9)
        augmented = np.linalg.matrix_rank(np.vstack([generators, target]), tol=1e-9)
        assert augmented == base_rank + 1

    def test_hand_computed_basis_witness(self):
        # J_{Z_1} J_{Z_2} X_1 acts as multiplication by the third imaginary
        # unit, orthogonal to span{J_{Z_1} X_1, J_{Z_2} X_1}
        alg = hlie.make_truncated_quaternionic()
        x = np.eye(4)[0]
        z1, z2 = np.eye(2)
        target = hlie.j_map(alg, z1) @ (hlie.j_map(alg, z2) @ x)
        g1 = hlie.j_map(alg, z1) @ x
        g2 = hlie.j_map(alg, z2) @ x
        assert abs(target @ g1) <= 1e-14
        assert abs(target @ g2) <= 1e-14
        assert np.linalg.norm(target) == pytest.approx(1.0, abs=1e-14)

    def test_precondition_requires_h_type(self):
        with pytest.raises(ValueError, match="not of Heisenberg type"):
            hlie.check_j2(hlie.make_degenerate_direct_sum(), samples=100, seed=1)

    def test_report_dict_carries_witness(self):
        report = hlie.check_j2(hlie.make_truncated_quaternionic(), samples=100, seed=1)
        payload = report.to_dict()
        assert payload["satisfies_j2"] is False
        assert set(payload["witness"]) == {"x", "z", "z_prime"}


class TestConstructors:
    def test_quaternionic_block(self):
        alg = hlie.make_heisenberg(AlgebraKind.QUATERNION, 1)
        assert (alg.dim_v, alg.dim_z) == (4, 3)
        assert np.array_equal(hlie.bracket(alg, np.eye(4)[0], np.eye(4)[1]), [1, 0, 0])
        assert np.array_equal(hlie.bracket(alg, np.eye(4)[2], np.eye(4)[3]), [1, 0, 0])

    def test_real_is_abelian(self):
        alg = hlie.make_heisenberg(AlgebraKind.REAL, 5)
        assert (alg.dim_v, alg.dim_z) == (5, 0)
        assert alg.structure.shape == (0, 5, 5)

    def test_octonion_epsilon_bracket(self):
        alg = hlie.make_heisenberg(AlgebraKind.OCTONION, 1)
        assert (alg.dim_v, alg.dim_z) == (8, 7)
        # eps_124 = +1, so [X_1, X_2] = Z_4
        assert np.array_equal(hlie.bracket(alg, np.eye(8)[1], np.eye(8)[2]), np.eye(7)[3])

    def test_octonion_rejects_extra_blocks(self):
        with pytest.raises(ValueError, match="octonion"):
            hlie.make_heisenberg(AlgebraKind.OCTONION, 2)

    def test_truncation_restricts_structure(self):
        full = hlie.make_heisenberg(AlgebraKind.QUATERNION, 1)
        cut = hlie.make_truncated_quaternionic()
        assert np.array_equal(cut.structure, full.structure[:2])

    def test_labels(self):
        assert hlie.make_heisenberg(AlgebraKind.COMPLEX, 3).label == "H_C:3"
        assert hlie.make_heisenberg(AlgebraKind.OCTONION, 1).label == "H_O"

    def test_from_name(self):
        assert hlie.algebra_from_name("H_H:2").dim_v == 8
        assert hlie.algebra_from_name("H_O").dim_z == 7
        assert hlie.algebra_from_name("H_O:1").dim_z == 7
        with pytest.raises(ValueError, match="more than one block"):
            hlie.algebra_from_name("H_O:2")
        with pytest.raises(ValueError, match="unknown algebra name"):
            hlie.algebra_from_name("H_X:1")
        with pytest.raises(ValueError, match="block count"):
            hlie.algebra_from_name("H_C:0")
        with pytest.raises(ValueError, match="invalid block count"):
            hlie.algebra_from_name("H_C:abc")

    def test_antisymmetry_validation(self):
        bad = np.zeros((1, 2, 2))
        bad[0, 0, 1] = 1.0  # missing the antisymmetric partner
        with pytest.raises(ValueError, match="antisymmetric"):
            hlie.HTypeAlgebra("bad", 2, 1, bad)

    def test_fingerprint_tracks_structure_not_label(self):
        a = hlie.make_heisenberg(AlgebraKind.COMPLEX, 1)
        b = hlie.HTypeAlgebra("renamed", a.dim_v, a.dim_z, a.structure)
        assert a.fingerprint == b.fingerprint
        c = hlie.make_heisenberg(AlgebraKind.COMPLEX, 2)
        assert a.fingerprint != c.fingerprint


class TestAlgebraConsistency:
    @pytest.mark.parametrize("kind,n", [
        (AlgebraKind.REAL, 3),
        (AlgebraKind.COMPLEX, 1),
        (AlgebraKind.COMPLEX, 3),
        (AlgebraKind.QUATERNION, 1),
        (AlgebraKind.QUATERNION, 2),
        (AlgebraKind.OCTONION, 1),
    ], ids=lambda v: getattr(v, "value", v))
    def test_structure_matches_division_algebra_formula(self, kind, n):
        assert hlie.bracket_vs_algebra_consistency(kind, n, samples=10000, seed=0) <= 1e-12

    def test_hand_evaluation_complex(self):
        # x = 1, y = i: -Im(x conj(y)) = -Im(-i) = i, matching [X_1, Y_1] = Z
        alg = hlie.make_heisenberg(AlgebraKind.COMPLEX, 1)
        got = hlie.bracket(alg, [1.0, 0.0], [0.0, 1.0])
        assert np.array_equal(got, [1.0])

    def test_equal_arguments_vanish(self):
        rng = np.random.default_rng(3)
        alg = hlie.make_heisenberg(AlgebraKind.QUATERNION, 1)
        x = rng.standard_normal(4)
        assert np.array_equal(hlie.bracket(alg, x, x), np.zeros(3))


class TestSpecFiles:
    def test_round_trip(self, tmp_path):
        alg = hlie.make_heisenberg(AlgebraKind.QUATERNION, 2)
        path = tmp_path / "hh2.json"
        hlie.save_algebra_spec(alg, path)
        loaded = hlie.load_algebra_spec(path)
        assert loaded.label == alg.label
        assert np.array_equal(loaded.structure, alg.structure)

    def test_loader_antisymmetrizes(self, tmp_path):
        path = tmp_path / "toy.json"
        path.write_text(json.dumps({
            "label": "toy", "dim_v": 2, "dim_z": 1, "entries": [[1, 2, 1, 1.0]]
        }))
        alg = hlie.load_algebra_spec(path)
        assert alg.structure[0, 0, 1] == 1.0
        assert alg.structure[0, 1, 0] == -1.0

    @pytest.mark.parametrize("entries,message", [
        ([[2, 1, 1, 1.0]], "1 <= i < j"),
        ([[1, 1, 1, 1.0]], "1 <= i < j"),
        ([[1, 2, 5, 1.0]], "center index"),
        ([[1, 2, 1, 1.0], [1, 2, 1, 2.0]], "duplicate"),
        ([[1, 2, 1]], "not \\[i, j, k, value\\]"),
    ])
    def test_loader_validation(self, tmp_path, entries, message):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "label": "bad", "dim_v": 2, "dim_z": 1, "entries": entries
        }))
        with pytest.raises(ValueError, match=message):
            hlie.load_algebra_spec(path)

    def test_loader_missing_field(self, tmp_path):
        path = tmp_path / "missing.json"
        path.write_text(json.dumps({"label": "x", "dim_v": 2, "dim_z": 1}))
        with pytest.raises(ValueError, match="missing the field"):
            hlie.load_algebra_spec(path)

    def test_loader_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="malformed"):
            hlie.load_algebra_spec(path)

    def test_loaded_spec_passes_checks(self, tmp_path):
        path = tmp_path / "ho.json"
        hlie.save_algebra_spec(hlie.make_heisenberg(AlgebraKind.OCTONION, 1), path)
        alg = hlie.load_algebra_spec(path)
        assert hlie.check_h_type(alg, samples=200, seed=0).is_h_type
        assert hlie.check_j2(alg, samples=200, seed=0).satisfies_j2
