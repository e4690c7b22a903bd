import numpy as np
import pytest

from mixdr.covariance import MODELS, constraint_deviation
from mixdr.errors import DimensionMismatchError, InputError
from mixdr.gmm import (
    FitResult,
    MixtureModel,
    em_fit,
    log_density,
    n_mixture_params,
    select_mixture,
)


def two_clouds(rng, n=200, shift=10.0):
    half = n // 2
    X = np.vstack([
        rng.standard_normal((half, 2)) + [-shift, 0.0],
        rng.standard_normal((n - half, 2)) + [shift, 0.0],
    ])
    return X


class TestLogDensity:
    def test_standard_normal_mode(self):
        m = MixtureModel("EEE", [1.0], np.zeros((1, 2)), np.eye(2)[None])
        assert m.log_density(np.zeros(2)) == pytest.approx(-np.log(2 * np.pi))

    def test_duplicate_components_collapse(self):
        one = MixtureModel("VVV", [1.0], np.zeros((1, 2)), np.eye(2)[None])
        two = MixtureModel("VVV", [0.5, 0.5], np.zeros((2, 2)),
                           np.stack([np.eye(2), np.eye(2)]))
        x = np.array([0.3, -1.2])
        assert two.log_density(x) == pytest.approx(one.log_density(x))

    def test_matches_direct_summation_1d(self):
        # oracle: naive non-log-space sum of weighted normal densities
        w = np.array([0.5, 0.3, 0.2])
        mu = np.array([[-1.0], [0.5], [3.0]])
        var = np.array([0.5, 2.0, 1.0])
        m = MixtureModel("V", w, mu, var.reshape(3, 1, 1))
        x = 1.0
        direct = sum(
            wg / np.sqrt(2 * np.pi * vg) * np.exp(-0.5 * (x - mg) ** 2 / vg)
            for wg, mg, vg in zip(w, mu[:, 0], var))
        assert m.log_density(np.array([x])) == pytest.approx(np.log(direct))

    def test_vectorized_rows(self):
        m = MixtureModel("EII", [1.0], np.zeros((1, 3)), np.eye(3)[None])
        X = np.random.default_rng(0).standard_normal((7, 3))
        vals = m.log_density(X)
        assert vals.shape == (7,)
        assert vals[0] == pytest.approx(m.log_density(X[0]))

    def test_dimension_mismatch(self):
        m = MixtureModel("EII", [1.0], np.zeros((1, 3)), np.eye(3)[None])
        with pytest.raises(DimensionMismatchError):
            m.log_density(np.zeros(2))

    def test_weights_must_sum_to_one(self):
        with pytest.raises(InputError):
            MixtureModel("EII", [0.7, 0.2], np.zeros((2, 2)),
                         np.stack([np.eye(2), np.eye(2)]))

    def test_module_level_alias(self):
        m = MixtureModel("EII", [1.0], np.zeros((1, 2)), np.eye(2)[None])
        assert log_density(m, np.zeros(2)) == m.log_density(np.zeros(2))


class TestSingleComponent:
    def test_matches_closed_form(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((120, 3)) * [1.0, 2.0, 0.5] + [1.0, -2.0, 0.0]
        fit = em_fit(X, 1, "VVV", seed=0)
        assert np.allclose(fit.model.means[0], X.mean(axis=0))
        assert np.allclose(fit.model.covariances[0], np.cov(X.T, bias=True),
                           atol=1e-10)
        # closed-form Gaussian log-likelihood at the MLE
        sign, logdet = np.linalg.slogdet(np.cov(X.T, bias=True))
        expected = -0.5 * 120 * (3 * np.log(2 * np.pi) + logdet + 3)
        assert fit.loglik == pytest.approx(expected)
        assert fit.converged and fit.iterations == 1

    def test_constrained_single_component(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((80, 2)) * [3.0, 1.0]
        fit = em_fit(X, 1, "EII", seed=0)
        lam = np.cov(X.T, bias=True).trace() / 2
        assert np.allclose(fit.model.covariances[0], lam * np.eye(2))


class TestEmFit:
    def test_separated_clouds_recovered(self):
        rng = np.random.default_rng(7)
        X = two_clouds(rng)
        fit = em_fit(X, 2, "EII", seed=1)
        centers = fit.model.means[np.argsort(fit.model.means[:, 0])]
        assert np.allclose(centers[0], [-10.0, 0.0], atol=0.2)
        assert np.allclose(centers[1], [10.0, 0.0], atol=0.2)
        assert np.allclose(fit.model.weights, 0.5, atol=0.05)

    def test_bic_prefers_parsimony_on_spherical_truth(self):
        wins = 0
        for seed in range(50):
            rng = np.random.default_rng(1000 + seed)
            X = rng.standard_normal((60, 3))
            eii = em_fit(X, 1, "EII", seed=seed)
            vvv = em_fit(X, 1, "VVV", seed=seed)
            wins += eii.bic >= vvv.bic
        assert wins >= 45

    @pytest.mark.parametrize("model", MODELS)
    def test_monotone_loglik_and_constraints(self, model):
        rng = np.random.default_rng(11)
        p = 1 if model in ("E", "V") else 3
        X = np.vstack([rng.standard_normal((70, p)) - 1.5,
                       2.0 * rng.standard_normal((70, p)) + 1.5])
        fit = em_fit(X, 2, model, seed=4)
        diffs = np.diff(fit.history)
        assert diffs.min() >= -1e-9
        assert constraint_deviation(model, fit.model.covariances) < 1e-8

    def test_permutation_invariance(self):
        rng = np.random.default_rng(13)
        X = two_clouds(rng, n=150)
        fit = em_fit(X, 2, "VVI", seed=5)
        flipped = MixtureModel(
            fit.model.model,
            fit.model.weights[::-1].copy(),
            fit.model.means[::-1].copy(),
            fit.model.covariances[::-1].copy(),
        )
        ll = flipped.log_density(X).sum()
        assert ll == pytest.approx(fit.loglik, abs=1e-8)

    @pytest.mark.parametrize("model", ["EEE", "VVV"])
    def test_rotation_equivariance(self, model):
        rng = np.random.default_rng(17)
        X = two_clouds(rng, n=160, shift=4.0)
        theta = 0.7
        rot = np.array([[np.cos(theta), -np.sin(theta)],
                        [np.sin(theta), np.cos(theta)]])
        fit = em_fit(X, 2, model, seed=6)
        fit_rot = em_fit(X @ rot.T, 2, model, seed=6)
        assert fit_rot.loglik == pytest.approx(fit.loglik, abs=1e-6)
        order = np.argsort(fit.model.means[:, 0])
        order_rot = np.argsort((fit_rot.model.means @ rot)[:, 0])
        assert np.allclose(fit_rot.model.means[order_rot],
                           fit.model.means[order] @ rot.T, atol=1e-6)

    def test_seed_determinism(self):
        rng = np.random.default_rng(19)
        X = two_clouds(rng, n=100, shift=3.0)
        a = em_fit(X, 2, "VVV", seed=9)
        b = em_fit(X, 2, "VVV", seed=9)
        assert a.loglik == b.loglik
        assert np.array_equal(a.model.means, b.model.means)

    def test_needs_more_points_than_components(self):
        with pytest.raises(InputError):
            em_fit(np.zeros((2, 2)), 2, "EII")

    def test_rejects_nonfinite(self):
        X = np.ones((10, 2))
        X[3, 1] = np.nan
        with pytest.raises(InputError):
            em_fit(X, 1, "EII")

    def test_result_fields(self):
        rng = np.random.default_rng(23)
        X = rng.standard_normal((50, 2))
        fit = em_fit(X, 1, "EEE", seed=0)
        assert isinstance(fit, FitResult)
        assert fit.bic == pytest.approx(2 * fit.loglik
                                        - fit.n_params * np.log(50))
        assert fit.n_params == 0 + 2 + 3


class TestParamCounts:
    def test_total_params(self):
        assert n_mixture_params("EII", 5, 3) == 2 + 15 + 1
        assert n_mixture_params("VVV", 3, 2) == 1 + 6 + 12


class TestSelectMixture:
    def test_grid_and_table(self):
        rng = np.random.default_rng(29)
        X = two_clouds(rng, n=120, shift=6.0)
        best, table = select_mixture(X, ["EII", "VVV"], [1, 2], seed=3)
        assert best.model.n_components == 2
        assert len(table) == 4
        assert {row["model"] for row in table} == {"EII", "VVV"}
        best_row = max(table, key=lambda r: r["bic"])
        assert best.bic == best_row["bic"]
