"""EM estimation of a Gaussian mixture under a covariance parametrization.

A single mixture (one "class" worth of data) is fit by :func:`em_fit`;
model selection over a (model, G) grid is provided by :func:`select_mixture`.
BIC follows the larger-is-better convention ``2 * loglik - k * log(n)``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .covariance import fit_covariances, n_covariance_params, validate_model
from .errors import DegenerateFitError, DimensionMismatchError, InputError
from .linalg import sym_eigen

_LOG_2PI = np.log(2.0 * np.pi)


def _rng_for(seed, start):
    seq = np.random.SeedSequence(entropy=(int(seed) & (2**63 - 1), int(start)))
    return np.random.Generator(np.random.Philox(seq))


def _chol_logpdf(X, mean, cov):
    """Log N(x; mean, cov) for every row of X via a Cholesky solve."""
    p = X.shape[1]
    L = np.linalg.cholesky(cov)
    dev = X - mean
    sol = solve_triangular(L, dev.T, lower=True, check_finite=False)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return -0.5 * (p * _LOG_2PI + logdet + np.sum(sol * sol, axis=0))


@dataclass(frozen=True)
class MixtureModel:
    """Weights, means and covariances of a G-component Gaussian mixture."""

    model: str
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        cov = np.asarray(self.covariances, dtype=float)
        if cov.ndim == 2:
            cov = cov[None, :, :]
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "covariances", cov)
        validate_model(self.model, mu.shape[1])
        if abs(w.sum() - 1.0) > 1e-12:
            raise InputError("mixture weights must sum to one",
                             code="gmm.weights")
        if not (len(w) == mu.shape[0] == cov.shape[0]):
            raise DimensionMismatchError("component count mismatch")

    @property
    def n_components(self):
        return len(self.weights)

    @property
    def p(self):
        return self.means.shape[1]

    def component_log_densities(self, X):
        """(n, G) matrix of per-component Gaussian log densities."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.p:
            raise DimensionMismatchError(
                f"x has dimension {X.shape[1]}, mixture has {self.p}")
        out = np.empty((X.shape[0], self.n_components))
        for g in range(self.n_components):
            out[:, g] = _chol_logpdf(X, self.means[g], self.covariances[g])
        return out

    def log_density(self, x):
        """Mixture log density, computed via log-sum-exp.

        Accepts a single p-vector (returns a scalar) or an (n, p) matrix
        (returns an (n,) vector).
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        comp = self.component_log_densities(np.atleast_2d(x))
        vals = logsumexp(comp + np.log(self.weights), axis=1)
        return float(vals[0]) if single else vals

    def to_dict(self):
        return {
            "model": self.model,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(model=d["model"], weights=np.array(d["weights"]),
                   means=np.array(d["means"]),
                   covariances=np.array(d["covariances"]))


def log_density(m: MixtureModel, x):
    """Module-level alias of :meth:`MixtureModel.log_density`."""
    return m.log_density(x)


@dataclass
class FitResult:
    """Outcome of one EM estimation."""

    model: MixtureModel
    loglik: float
    n_params: int
    bic: float
    iterations: int
    converged: bool
    regularized: bool = False
    history: list = field(default_factory=list)


def n_mixture_params(model, p, G):
    """Total free parameters: weights + means + covariance structure."""
    return (G - 1) + G * p + n_covariance_params(model, p, G)


def _farthest_point_init(X, G, rng, spread=False):
    """k-means-style seeding: random first center, then far points.

    The deterministic variant picks each next center at the maximum of the
    squared distance to the chosen set; the ``spread`` variant samples
    proportionally to it, giving later restarts diverse local modes.
    """
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = np.sum((X - X[centers[0]]) ** 2, axis=1)
    for _ in range(G - 1):
        if spread and d2.sum() > 0:
            probs = d2 / d2.sum()
            centers.append(int(rng.choice(n, p=probs)))
        else:
            centers.append(int(np.argmax(d2)))
        d2 = np.minimum(d2, np.sum((X - X[centers[-1]]) ** 2, axis=1))
    dist = np.stack([np.sum((X - X[c]) ** 2, axis=1) for c in centers])
    assign = np.argmin(dist, axis=0)
    resp = np.zeros((n, G))
    resp[np.arange(n), assign] = 1.0
    return resp


def _apply_floor(cov, floor):
    """Raise eigenvalues of ``cov`` below ``floor``; report if touched."""
    try:
        np.linalg.cholesky(cov - floor * np.eye(cov.shape[0]))
        return cov, False
    except np.linalg.LinAlgError:
        vals, vecs = sym_eigen(cov)
        clipped = np.maximum(vals, floor)
        return (vecs * clipped) @ vecs.T, True


def _m_step(X, resp, model, floor, inner_max_iter, inner_tol):
    n, p = X.shape
    counts = resp.sum(axis=0)
    if counts.min() < 1e-10:
        raise DegenerateFitError("component lost all responsibility mass")
    means = (resp.T @ X) / counts[:, None]
    scatters = np.empty((len(counts), p, p))
    for g in range(len(counts)):
        dev = (X - means[g]) * np.sqrt(resp[:, g])[:, None]
        scatters[g] = dev.T @ dev
    covs = fit_covariances(model, scatters, counts,
                           inner_max_iter=inner_max_iter, inner_tol=inner_tol)
    regularized = False
    for g in range(covs.shape[0]):
        covs[g], touched = _apply_floor(covs[g], floor)
        regularized = regularized or touched
    return counts / n, means, covs, regularized


def em_fit(X, n_components, model, *, max_iter=500, tol=1e-6, seed=0,
           n_starts=5, inner_max_iter=50, inner_tol=1e-8,
           variance_floor=1e-8) -> FitResult:
    """Fit one Gaussian mixture by EM with multiple seeded starts.

    Parameters
    ----------
    X : (n, p) array_like
        Observations; n must exceed ``n_components``.
    n_components : int
        Number of mixture components G.
    model : str
        Covariance parametrization name.
    max_iter, tol : int, float
        EM stops when the relative log-likelihood change
        ``|delta| / (1 + |loglik|)`` falls below ``tol``.
    seed, n_starts : int
        ``n_starts`` farthest-point initializations are run from seeds
        derived from ``seed``; the best final log-likelihood wins.  Starts
        that lose a component restart from fresh derived seeds.
    variance_floor : float
        Eigenvalue floor as a fraction of mean per-coordinate variance,
        guarding against covariance collapse.

    Returns
    -------
    FitResult
        Includes the per-iteration log-likelihood ``history`` of the
        winning start and ``bic = 2 * loglik - n_params * log(n)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.ndim != 2:
        raise InputError("data must be a 2-D matrix", code="gmm.shape")
    if not np.all(np.isfinite(X)):
        raise InputError("data contains non-finite values", code="gmm.nonfinite")
    n, p = X.shape
    G = int(n_components)
    validate_model(model, p)
    if n <= G:
        raise InputError(f"need more than {G} observations, got {n}",
                         code="gmm.size")

    total_var = float(np.var(X, axis=0).sum())
    floor = variance_floor * max(total_var, np.finfo(float).tiny) / p
    k = n_mixture_params(model, p, G)

    best = None
    failures = []
    attempts = n_starts + 3 if G > 1 else 1
    done = 0
    start = 0
    while done < n_starts and start < attempts:
        rng = _rng_for(seed, start)
        start += 1
        if G == 1:
            resp = np.ones((n, 1))
        else:
            resp = _farthest_point_init(X, G, rng, spread=start > 0)
        history = []
        weights = means = covs = None
        regularized = False
        converged = False
        try:
            for it in range(1, max_iter + 1):
                weights, means, covs, touched = _m_step(
                    X, resp, model, floor, inner_max_iter, inner_tol)
                regularized = regularized or touched
                comp = np.empty((n, G))
                for g in range(G):
                    comp[:, g] = _chol_logpdf(X, means[g], covs[g])
                joint = comp + np.log(weights)
                norm = logsumexp(joint, axis=1)
                loglik = float(norm.sum())
                if not np.isfinite(loglik):
                    raise DegenerateFitError("log-likelihood diverged")
                history.append(loglik)
                resp = np.exp(joint - norm[:, None])
                if G == 1:
                    converged = True
                    break
                if len(history) > 1:
                    delta = abs(history[-1] - history[-2])
                    if delta / (1.0 + abs(history[-1])) < tol:
                        converged = True
                        break
        except (DegenerateFitError, np.linalg.LinAlgError) as exc:
            failures.append(str(exc))
            continue
        done += 1
        result = FitResult(
            model=MixtureModel(model=model, weights=weights, means=means,
                               covariances=covs),
            loglik=history[-1],
            n_params=k,
            bic=2.0 * history[-1] - k * np.log(n),
            iterations=len(history),
            converged=converged,
            regularized=regularized,
            history=history,
        )
        if best is None or result.loglik > best.loglik:
            best = result
    if best is None:
        raise DegenerateFitError(
            f"all {attempts} starts degenerated for model {model}, G={G}: "
            + "; ".join(failures[:3]))
    return best


def select_mixture(X, models, g_values, **em_kwargs):
    """Best (model, G) by BIC over a grid.

    Returns ``(best_fit, table)`` where ``table`` rows are dictionaries
    ``{model, G, bic, loglik, converged}`` for every non-degenerate
    candidate.  Ties break on lexical model name, then smaller G.
    """
    table = []
    fits = {}
    for model in models:
        for G in g_values:
            try:
                fit = em_fit(X, G, model, **em_kwargs)
            except (DegenerateFitError, InputError):
                continue
            fits[(model, G)] = fit
            table.append({"model": model, "G": int(G), "bic": fit.bic,
                          "loglik": fit.loglik, "converged": fit.converged})
    if not fits:
        raise DegenerateFitError("every candidate mixture degenerated")
    key = min(fits, key=lambda mg: (-fits[mg].bic, mg[0], mg[1]))
    return fits[key], table
