"""Discriminant subspace estimation for mixture classifiers.

From a fitted classifier two kernel matrices are formed: ``m_loc`` captures
the spread of the class-component means, ``m_disp`` the spread of the
class-component covariances (both relative to the marginal covariance
``sigma_x``).  The projection basis solves

    maximize  b' M b   subject to  b' sigma_x b = I,

where ``M = 2*lam * m_loc sigma_x^{-1} m_loc + 2*(1-lam) * m_disp``.  The
factor-two convention makes ``lam = 0.5`` coincide exactly with the
unweighted kernel ``m_loc sigma_x^{-1} m_loc + m_disp``, whose eigenvalues
split into per-direction location and dispersion contributions.  Larger
``lam`` favors separation in class locations, smaller ``lam`` separation in
class dispersions; :func:`tune_lambda` picks ``lam`` by a labeled-versus-
pooled mixture likelihood-ratio score on the projected data.

Under an equal-covariance single-Gaussian classifier the basis coincides
with the classic LDA canonical variates (and with SIR up to scaling); under
a free-covariance single-Gaussian classifier it coincides with SAVE.  Those
reference methods are implemented here as independent oracles.
"""

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import check_dimension, check_matrix, check_X_y
from .base import ParamsMixin, check_is_fitted
from .classifier import (EDDA, EDDAClassifier, MixtureClassifier,
                         fit_edda)
from .errors import ContractError, DimensionMismatchError, InputError
from .gmm import em_fit
from .linalg import as_sym, inv_sqrt, sym_eigen

_BASIS_SCHEMA = "mixdr-basis/1"


class Directions(NamedTuple):
    """Eigenvalues and basis columns of a reference (oracle) method."""

    values: np.ndarray
    basis: np.ndarray


@dataclass(frozen=True)
class KernelParts:
    """Ingredients of the projection kernel for one fitted classifier."""

    m_loc: np.ndarray
    m_disp: np.ndarray
    sigma_x: np.ndarray
    sigma_bar: np.ndarray
    mu: np.ndarray
    weights: np.ndarray
    total_components: int
    whitener: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class DimRedBasis:
    """A fitted projection basis.

    ``beta`` columns are ordered by nonincreasing eigenvalue and normalized
    so that ``beta.T @ sigma_x @ beta = I``; the sign of each column is
    fixed by making its largest-magnitude coefficient positive.
    ``loc_part + disp_part == eigenvalues`` for every blend value.
    """

    beta: np.ndarray
    eigenvalues: np.ndarray
    lam: float
    d: int
    loc_part: np.ndarray
    disp_part: np.ndarray
    center: np.ndarray

    def to_dict(self):
        return {
            "schema": _BASIS_SCHEMA,
            "lambda": self.lam,
            "d": self.d,
            "eigenvalues": self.eigenvalues.tolist(),
            "loc_part": self.loc_part.tolist(),
            "disp_part": self.disp_part.tolist(),
            "beta": self.beta.tolist(),
            "center": self.center.tolist(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != _BASIS_SCHEMA:
            raise InputError(f"unsupported basis document: {d.get('schema')!r}",
                             code="dimred.schema")
        return cls(beta=np.array(d["beta"]),
                   eigenvalues=np.array(d["eigenvalues"]),
                   lam=float(d["lambda"]), d=int(d["d"]),
                   loc_part=np.array(d["loc_part"]),
                   disp_part=np.array(d["disp_part"]),
                   center=np.array(d["center"]))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ProjectionFrame:
    """Projected coordinates plus labels, ready for plotting."""

    z: np.ndarray
    labels: np.ndarray
    axis_names: list
    eigenvalues: np.ndarray
    centered: bool
    center: np.ndarray

    @property
    def d(self):
        return self.z.shape[1]


def _flatten_components(classifier):
    omegas, mus, covs = [], [], []
    for prior, model in zip(classifier.priors, classifier.class_models):
        for w, mu, cov in zip(model.weights, model.means, model.covariances):
            omegas.append(prior * w)
            mus.append(mu)
            covs.append(cov)
    return np.array(omegas), np.stack(mus), np.stack(covs)


def kernel_parts(classifier: MixtureClassifier, X=None, *, diag_sigma=False,
                 ridge=0.0) -> KernelParts:
    """Location / dispersion kernel matrices of a fitted classifier.

    Parameters
    ----------
    classifier : MixtureClassifier
        Fitted (or parameter-built) classifier.
    X : (n, p) array_like, optional
        Sample used for the marginal covariance ``sigma_x``, centered at
        the classifier's marginal mean.  When omitted, the model-implied
        marginal covariance ``m_loc + sigma_bar`` is used, which makes
        population-parameter identities exact.
    diag_sigma : bool
        Replace ``sigma_x`` with its diagonal (per-feature variances), the
        regularization used for very wide data.
    ridge : float or "auto"
        Passed to the whitening inverse square root.
    """
    omega, mus, covs = _flatten_components(classifier)
    p = mus.shape[1]
    mu = omega @ mus
    dev = mus - mu
    m_loc = as_sym((dev * omega[:, None]).T @ dev)
    sigma_bar = as_sym(np.einsum("g,gij->ij", omega, covs))
    if X is not None:
        X = check_dimension(check_matrix(X), p)
        xc = X - mu
        if diag_sigma:
            sigma_x = np.diag((xc * xc).mean(axis=0))
        else:
            sigma_x = as_sym(xc.T @ xc / X.shape[0])
    else:
        sigma_x = as_sym(m_loc + sigma_bar)
        if diag_sigma:
            sigma_x = np.diag(np.diag(sigma_x))
    w = inv_sqrt(sigma_x, ridge=ridge)
    sigma_inv = w @ w
    m_disp = np.zeros((p, p))
    for og, cov in zip(omega, covs):
        delta = cov - sigma_bar
        m_disp += og * delta @ sigma_inv @ delta.T
    return KernelParts(m_loc=m_loc, m_disp=as_sym(m_disp), sigma_x=sigma_x,
                       sigma_bar=sigma_bar, mu=mu, weights=omega,
                       total_components=len(omega), whitener=w)


def kernel_matrix(parts: KernelParts, lam: float) -> np.ndarray:
    """Blended kernel ``2*lam * m_loc s^-1 m_loc + 2*(1-lam) * m_disp``."""
    if not 0.0 <= lam <= 1.0:
        raise InputError(f"lambda must lie in [0, 1], got {lam}",
                         code="dimred.lambda")
    a = parts.m_loc @ parts.whitener
    loc_kernel = a @ a.T
    return as_sym(2.0 * lam * loc_kernel + 2.0 * (1.0 - lam) * parts.m_disp)


def solve_basis(parts: KernelParts, lam: float = 0.5, *,
                n_dirs=None) -> DimRedBasis:
    """Directions maximizing the blended kernel under the covariance constraint.

    The basis is truncated to ``d = min(p, total_components - 1)`` columns
    (override with ``n_dirs``).
    """
    p = parts.m_loc.shape[0]
    kern = kernel_matrix(parts, lam)
    w = parts.whitener
    vals, vecs = sym_eigen(w @ kern @ w)
    basis = w @ vecs
    d = min(p, parts.total_components - 1) if n_dirs is None \
        else min(int(n_dirs), p)
    if d < 1:
        raise InputError("projection needs at least one direction; "
                         "the classifier has a single component",
                         code="dimred.dimension")
    basis = basis[:, :d]
    vals = np.maximum(vals[:d], 0.0)
    # deterministic column signs: largest-magnitude coefficient positive
    flip = np.sign(basis[np.argmax(np.abs(basis), axis=0),
                         np.arange(d)])
    flip[flip == 0] = 1.0
    basis = basis * flip
    a = parts.m_loc @ w
    loc_kernel = a @ a.T
    loc = 2.0 * lam * np.maximum(
        np.einsum("pj,pq,qj->j", basis, loc_kernel, basis), 0.0)
    disp = 2.0 * (1.0 - lam) * np.maximum(
        np.einsum("pj,pq,qj->j", basis, parts.m_disp, basis), 0.0)
    return DimRedBasis(beta=basis, eigenvalues=vals, lam=float(lam), d=d,
                       loc_part=loc, disp_part=disp, center=parts.mu.copy())


def eigen_decomposition_terms(basis: DimRedBasis, classifier=None):
    """Per-direction location / dispersion split of the eigenvalues.

    Only defined for the ``lam = 0.5`` kernel, where the two parts carry
    the unweighted contributions and sum to the eigenvalues exactly.
    """
    if abs(basis.lam - 0.5) > 1e-12:
        raise ContractError(
            "eigenvalue decomposition is defined for the lambda = 0.5 "
            f"kernel only, basis has lambda = {basis.lam}",
            code="dimred.lambda_contract")
    return basis.loc_part.copy(), basis.disp_part.copy()


def project(basis: DimRedBasis, X, y=None, *, center=False) -> ProjectionFrame:
    """Coordinates ``z = beta' x`` (optionally centering x at the mean)."""
    X = check_dimension(check_matrix(X), basis.beta.shape[0])
    xc = X - basis.center if center else X
    z = xc @ basis.beta
    total = basis.eigenvalues.sum()
    names = []
    for j in range(basis.d):
        share = basis.eigenvalues[j] / total if total > 0 else 0.0
        names.append(f"Dir_{j + 1} ({100.0 * share:.1f}%)")
    labels = None if y is None else np.asarray(y)
    if labels is not None and len(labels) != z.shape[0]:
        raise DimensionMismatchError("labels do not match the data rows")
    return ProjectionFrame(z=z, labels=labels, axis_names=names,
                           eigenvalues=basis.eigenvalues.copy(),
                           centered=bool(center), center=basis.center.copy())


def _class_moments(X, y):
    X, y = check_X_y(X, y)
    classes = sorted(np.unique(y).tolist())
    n = X.shape[0]
    priors, means, covs = [], [], []
    for c in classes:
        rows = X[y == c]
        priors.append(rows.shape[0] / n)
        means.append(rows.mean(axis=0))
        dev = rows - means[-1]
        covs.append(dev.T @ dev / rows.shape[0])
    return classes, np.array(priors), np.stack(means), np.stack(covs)


def lda_canonical(X, y) -> Directions:
    """Canonical variates: between-class against within-class covariance."""
    from .linalg import generalized_eigen

    X, y = check_X_y(X, y)
    classes, priors, means, covs = _class_moments(X, y)
    mu = priors @ means
    dev = means - mu
    sigma_b = as_sym((dev * priors[:, None]).T @ dev)
    sigma_w = as_sym(np.einsum("k,kij->ij", priors, covs))
    ge = generalized_eigen(sigma_b, sigma_w)
    d = min(X.shape[1], len(classes) - 1)
    return Directions(values=ge.values[:d], basis=ge.basis[:, :d])


def sir_directions(X, y) -> Directions:
    """Slice (class) means against the marginal covariance."""
    from .linalg import generalized_eigen

    X, y = check_X_y(X, y)
    classes, priors, means, covs = _class_moments(X, y)
    mu = priors @ means
    dev = means - mu
    sigma_b = as_sym((dev * priors[:, None]).T @ dev)
    xc = X - X.mean(axis=0)
    sigma_x = as_sym(xc.T @ xc / X.shape[0])
    ge = generalized_eigen(sigma_b, sigma_x)
    d = min(X.shape[1], len(classes) - 1)
    return Directions(values=ge.values[:d], basis=ge.basis[:, :d])


def save_directions(X, y, ridge=0.0) -> Directions:
    """Slice (class) covariance deviations in the whitened scale.

    The kernel is ``sum_k pi_k (I - s^{-1/2} cov_k s^{-1/2})^2`` computed in
    the whitened coordinates and mapped back by ``s^{-1/2}``; all ``p``
    directions are returned.
    """
    X, y = check_X_y(X, y)
    classes, priors, means, covs = _class_moments(X, y)
    p = X.shape[1]
    xc = X - X.mean(axis=0)
    sigma_x = as_sym(xc.T @ xc / X.shape[0])
    w = inv_sqrt(sigma_x, ridge=ridge)
    kern = np.zeros((p, p))
    eye = np.eye(p)
    for pi_k, cov in zip(priors, covs):
        delta = eye - w @ cov @ w
        kern += pi_k * delta @ delta
    vals, vecs = sym_eigen(as_sym(kern))
    return Directions(values=vals, basis=w @ vecs)


def _project_model_name(name, d_eval):
    if d_eval == 1:
        return "V" if name.startswith("V") else "E"
    return name


def lr_criterion(X, y, basis: DimRedBasis, classifier: MixtureClassifier,
                 d_eval=None, *, seed=0, n_starts=3) -> float:
    """Labeled-versus-pooled mixture log-likelihood ratio on a projection.

    ``2 * (L1 - L0)`` where ``L1`` is the total log-likelihood of per-class
    mixtures with the classifier's own structure refit on the first
    ``d_eval`` projected coordinates, and ``L0`` that of a single unlabeled
    mixture with as many components as the classifier has in total.  Large
    values mean the subspace carries class-relevant structure.
    """
    X, y = check_X_y(X, y)
    if classifier.n_classes < 2:
        raise InputError("the LR criterion needs at least two classes",
                         code="dimred.classes")
    if d_eval is None:
        d_eval = min(2, basis.d)
    if d_eval > basis.d:
        raise InputError(f"d_eval={d_eval} exceeds the basis dimension "
                         f"{basis.d}", code="dimred.dimension")
    Z = X @ basis.beta[:, :d_eval]
    names = [m.model for m in classifier.class_models]
    mapped = [_project_model_name(m, d_eval) for m in names]
    if classifier.family == EDDA:
        _, table = fit_edda(Z, y, [mapped[0]])
        l1 = table[0]["loglik"]
    else:
        l1 = 0.0
        for c, model, mapped_name in zip(classifier.classes,
                                         classifier.class_models, mapped):
            rows = Z[y == c]
            fit = em_fit(rows, model.n_components, mapped_name, seed=seed,
                         n_starts=n_starts)
            l1 += fit.loglik
    pooled_model = mapped[0] if len(set(mapped)) == 1 else \
        ("V" if d_eval == 1 else "VVV")
    total_g = sum(classifier.components_per_class)
    l0 = em_fit(Z, total_g, pooled_model, seed=seed, n_starts=n_starts).loglik
    return 2.0 * (l1 - l0)


@dataclass(frozen=True)
class LrTrace:
    """LR score over a grid of blend values."""

    grid: np.ndarray
    lr_values: np.ndarray
    argmax_lambda: float

    def to_dict(self):
        return {"grid": self.grid.tolist(),
                "lr_values": self.lr_values.tolist(),
                "argmax_lambda": self.argmax_lambda}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def default_lambda_grid(steps=21):
    return np.linspace(0.0, 1.0, int(steps))


def tune_lambda(X, y, classifier: MixtureClassifier, grid=None, d_eval=None,
                *, parts=None, seed=0, n_starts=3) -> LrTrace:
    """Evaluate the LR criterion over a grid of blend values.

    Ties (up to floating-point noise) resolve to the larger lambda, which
    favors location structure.
    """
    if grid is None:
        grid = default_lambda_grid()
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0 or grid.min() < 0.0 or grid.max() > 1.0:
        raise InputError("lambda grid must be a nonempty subset of [0, 1]",
                         code="dimred.lambda")
    if parts is None:
        parts = kernel_parts(classifier, X)
    values = np.empty(grid.size)
    for i, lam in enumerate(grid):
        basis = solve_basis(parts, float(lam))
        values[i] = lr_criterion(X, y, basis, classifier, d_eval, seed=seed,
                                 n_starts=n_starts)
    top = values.max()
    tied = values >= top - 1e-9 * (1.0 + abs(top))
    return LrTrace(grid=grid, lr_values=values,
                   argmax_lambda=float(grid[tied].max()))


class DiscriminantSubspace(ParamsMixin):
    """Transformer projecting data onto the classifier's discriminant basis.

    Parameters
    ----------
    classifier : optional
        A fitted :class:`MixtureClassifier`, a fitted or unfitted estimator
        with the same protocol, or None to fit a default EDDA classifier on
        the training data.
    lam : float
        Blend between location (1.0) and dispersion (0.0) information;
        0.5 weighs both equally.
    diag_sigma : bool
        Use a diagonal marginal covariance (wide-data regularization).
    ridge : float or "auto"
        Regularization for the whitening step.
    n_dirs : int, optional
        Override the default number of retained directions.
    """

    def __init__(self, classifier=None, lam=0.5, diag_sigma=False, ridge=0.0,
                 n_dirs=None):
        self.classifier = classifier
        self.lam = lam
        self.diag_sigma = diag_sigma
        self.ridge = ridge
        self.n_dirs = n_dirs

    def _resolve_classifier(self, X, y):
        clf = self.classifier
        if clf is None:
            if y is None:
                raise InputError("y is required when no classifier is given")
            clf = EDDAClassifier()
        if isinstance(clf, MixtureClassifier):
            return clf
        if hasattr(clf, "classifier_"):
            return clf.classifier_
        if hasattr(clf, "fit"):
            if y is None:
                raise InputError("y is required to fit the classifier")
            return clf.fit(X, y).classifier_
        raise InputError(f"cannot use {type(clf).__name__} as a classifier")

    def fit(self, X, y=None):
        X = check_matrix(X)
        clf = self._resolve_classifier(X, y)
        self.classifier_ = clf
        self.parts_ = kernel_parts(clf, X, diag_sigma=self.diag_sigma,
                                   ridge=self.ridge)
        self.basis_ = solve_basis(self.parts_, self.lam, n_dirs=self.n_dirs)
        self.eigenvalues_ = self.basis_.eigenvalues
        self.loc_part_ = self.basis_.loc_part
        self.disp_part_ = self.basis_.disp_part
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        X = check_dimension(check_matrix(X), self.basis_.beta.shape[0])
        return X @ self.basis_.beta

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)
