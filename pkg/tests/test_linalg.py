import numpy as np
import pytest

from mixdr.errors import DimensionMismatchError, InputError, SingularMatrixError
from mixdr.linalg import (
    EigenPairs,
    as_sym,
    auto_ridge,
    generalized_eigen,
    inv_sqrt,
    principal_angle,
    sym_eigen,
)


def random_spd(rng, p, scale=1.0):
    a = rng.standard_normal((p, p))
    return a @ a.T + scale * np.eye(p)


class TestAsSym:
    def test_symmetrizes_by_averaging(self):
        a = np.array([[1.0, 2.0], [4.0, 3.0]])
        s = as_sym(a)
        assert np.array_equal(s, s.T)
        assert s[0, 1] == 3.0

    def test_rejects_nonsquare(self):
        with pytest.raises(InputError):
            as_sym(np.zeros((2, 3)))

    def test_rejects_nonfinite(self):
        with pytest.raises(InputError):
            as_sym(np.array([[1.0, np.nan], [np.nan, 1.0]]))


class TestSymEigen:
    def test_identity(self):
        ep = sym_eigen(np.eye(3))
        assert np.allclose(ep.values, 1.0)
        assert np.allclose(ep.vectors.T @ ep.vectors, np.eye(3), atol=1e-10)

    def test_two_by_two_hand_case(self):
        # [[2,1],[1,2]]: characteristic polynomial gives 3 and 1 with
        # eigenvectors (1,1)/sqrt(2) and (1,-1)/sqrt(2)
        ep = sym_eigen([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(ep.values, [3.0, 1.0], atol=1e-12)
        v0 = ep.vectors[:, 0] * np.sign(ep.vectors[0, 0])
        v1 = ep.vectors[:, 1] * np.sign(ep.vectors[0, 1])
        assert np.allclose(v0, [1, 1] / np.sqrt(2), atol=1e-10)
        assert np.allclose(v1, [1, -1] / np.sqrt(2), atol=1e-10)

    def test_diagonal(self):
        ep = sym_eigen(np.diag([5.0, 2.0, 0.0]))
        assert np.allclose(ep.values, [5.0, 2.0, 0.0], atol=1e-14)

    def test_reconstruction_and_residual_random(self):
        rng = np.random.default_rng(7)
        for p in (2, 3, 6, 11, 25):
            a = as_sym(rng.standard_normal((p, p)))
            ep = sym_eigen(a)
            norm = np.linalg.norm(a, "fro")
            assert np.all(np.diff(ep.values) <= 1e-12)
            assert np.allclose(a @ ep.vectors, ep.vectors * ep.values,
                               atol=1e-8 * norm)
            rec = (ep.vectors * ep.values) @ ep.vectors.T
            assert np.allclose(rec, a, atol=1e-8 * norm)
            assert np.allclose(ep.vectors.T @ ep.vectors, np.eye(p),
                               atol=1e-10)

    def test_spd_eigenvalues_nonnegative(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = random_spd(rng, 5, scale=1e-3)
            ep = sym_eigen(a)
            assert ep.values.min() >= -1e-10

    def test_rejects_nonfinite(self):
        with pytest.raises(InputError):
            sym_eigen([[np.inf, 0.0], [0.0, 1.0]])

    def test_returns_eigenpairs(self):
        assert isinstance(sym_eigen(np.eye(2)), EigenPairs)


class TestInvSqrt:
    def test_identity(self):
        assert np.allclose(inv_sqrt(np.eye(4)), np.eye(4), atol=1e-12)

    def test_diagonal_powers(self):
        r = inv_sqrt(np.diag([4.0, 9.0]))
        assert np.allclose(r, np.diag([0.5, 1.0 / 3.0]), atol=1e-12)

    def test_ridge_regularizes_zero_eigenvalue(self):
        r = inv_sqrt(np.diag([1.0, 0.0]), ridge=1e-6)
        assert r[0, 0] == pytest.approx(1.0, rel=1e-5)
        assert r[1, 1] == pytest.approx(1e3, rel=1e-9)

    def test_singular_error_names_index(self):
        with pytest.raises(SingularMatrixError) as exc:
            inv_sqrt(np.diag([2.0, 0.0]))
        assert exc.value.eigen_index == 1

    def test_inverse_property(self):
        rng = np.random.default_rng(3)
        a = random_spd(rng, 6)
        r = inv_sqrt(a)
        assert np.allclose(r @ a @ r, np.eye(6), atol=1e-6)
        assert np.array_equal(r, r.T)

    def test_auto_ridge_value(self):
        a = np.diag([2.0, 4.0])
        assert auto_ridge(a) == pytest.approx(1e-8 * 3.0)


class TestGeneralizedEigen:
    def test_identity_metric_reduces_to_sym_eigen(self):
        ge = generalized_eigen(np.diag([3.0, 1.0]), np.eye(2))
        assert np.allclose(ge.values, [3.0, 1.0], atol=1e-12)
        assert np.allclose(np.abs(ge.basis), np.eye(2), atol=1e-10)

    def test_m_equal_s_gives_unit_eigenvalues(self):
        rng = np.random.default_rng(5)
        s = random_spd(rng, 4)
        ge = generalized_eigen(s, s)
        assert np.allclose(ge.values, 1.0, atol=1e-8)

    def test_matches_whitening_oracle(self):
        # independent oracle: numpy eigh of s^{-1/2} m s^{-1/2}
        rng = np.random.default_rng(17)
        m = random_spd(rng, 4)
        s = random_spd(rng, 4)
        ge = generalized_eigen(m, s)
        svals, svecs = np.linalg.eigh(s)
        w = (svecs / np.sqrt(svals)) @ svecs.T
        ovals = np.linalg.eigvalsh(w @ m @ w)[::-1]
        assert np.allclose(ge.values, ovals, atol=1e-8 * np.linalg.norm(m))

    def test_defining_relation_and_constraint(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            p = int(rng.integers(2, 7))
            m = as_sym(rng.standard_normal((p, p)))
            s = random_spd(rng, p)
            ge = generalized_eigen(m, s)
            assert np.allclose(m @ ge.basis, s @ ge.basis * ge.values,
                               atol=1e-6 * np.linalg.norm(m))
            assert np.allclose(ge.basis.T @ s @ ge.basis, np.eye(p),
                               atol=1e-8)

    def test_eigenvalue_sum_equals_trace(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            p = int(rng.integers(2, 8))
            m = as_sym(rng.standard_normal((p, p)))
            s = random_spd(rng, p)
            tr = np.trace(np.linalg.solve(s, m))
            assert np.sum(generalized_eigen(m, s).values) == pytest.approx(
                tr, rel=1e-6, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            generalized_eigen(np.eye(2), np.eye(3))

    def test_not_positive_definite(self):
        with pytest.raises(SingularMatrixError):
            generalized_eigen(np.eye(2), np.diag([1.0, 0.0]))


class TestPrincipalAngle:
    def test_same_subspace(self):
        b = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        assert principal_angle(b, 2.0 * b) == pytest.approx(0.0, abs=1e-10)

    def test_orthogonal_subspaces(self):
        b1 = np.array([[1.0], [0.0]])
        b2 = np.array([[0.0], [1.0]])
        assert principal_angle(b1, b2) == pytest.approx(np.pi / 2)

    def test_metric_whitening_accepts_spd(self):
        rng = np.random.default_rng(31)
        s = random_spd(rng, 3)
        b = rng.standard_normal((3, 2))
        # arccos amplifies roundoff near 1: cos = 1 - 1e-16 already gives
        # an angle of ~1.5e-8, so equality of spans shows up below ~1e-7
        assert principal_angle(b, b, sigma=s) == pytest.approx(0.0, abs=1e-6)
