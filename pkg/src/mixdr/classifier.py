"""Discriminant models built from per-class Gaussian mixtures.

Two families are provided.  EDDA models every class with a single Gaussian
whose covariance shares structure across classes (equal pieces are pooled
in the M-step, with classes playing the role of components).  MclustDA
gives each class its own mixture, with a per-class (model, G) pair chosen
by BIC.  Both produce an immutable :class:`MixtureClassifier` that scores
points through Bayes' rule in log space.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._validation import check_dimension, check_X_y
from .base import ParamsMixin, check_is_fitted
from .covariance import (fit_covariances, legal_models, n_covariance_params,
                         validate_model)
from .errors import DegenerateFitError, InputError
from .gmm import MixtureModel, _apply_floor, _chol_logpdf, select_mixture

EDDA = "edda"
MCLUSTDA = "mclustda"

_SCHEMA = "mixdr-classifier/1"


@dataclass(frozen=True)
class Prediction:
    """Posterior class probabilities for one observation."""

    posterior: np.ndarray
    label: object
    uncertainty: float


def posterior_from_log_joint(log_joint):
    """Normalize rows of log(prior * density) into posteriors.

    Invariant under adding any constant to a whole row, which is why
    posteriors are immune to a common rescaling of the class densities.
    """
    log_post = log_joint - logsumexp(log_joint, axis=1, keepdims=True)
    return np.exp(log_post)


class MixtureClassifier:
    """Class priors plus one fitted Gaussian mixture per class.

    Instances are immutable after construction and safe to share across
    threads.  Can also be built directly from externally supplied
    parameters, which is how the population-parameter oracles avoid EM
    noise.
    """

    def __init__(self, classes, priors, class_models, family):
        self.classes = list(classes)
        self.priors = np.asarray(priors, dtype=float)
        self.class_models = list(class_models)
        self.family = family
        if family not in (EDDA, MCLUSTDA):
            raise InputError(f"unknown family {family!r}")
        if abs(self.priors.sum() - 1.0) > 1e-12:
            raise InputError("class priors must sum to one")
        if not (len(self.classes) == len(self.priors)
                == len(self.class_models)):
            raise InputError("classes, priors and models disagree in length")
        if family == EDDA and any(m.n_components != 1
                                  for m in self.class_models):
            raise InputError("EDDA requires a single component per class")
        ps = {m.p for m in self.class_models}
        if len(ps) != 1:
            raise InputError("class models live in different dimensions")

    @property
    def n_classes(self):
        return len(self.classes)

    @property
    def p(self):
        return self.class_models[0].p

    @property
    def components_per_class(self):
        return [m.n_components for m in self.class_models]

    def log_densities(self, X):
        """(n, K) matrix of class-conditional mixture log densities."""
        X = check_dimension(np.atleast_2d(np.asarray(X, dtype=float)), self.p)
        return np.column_stack([m.log_density(X) for m in self.class_models])

    def predict_proba(self, X):
        log_joint = self.log_densities(X) + np.log(self.priors)
        return posterior_from_log_joint(log_joint)

    def predict(self, X):
        proba = self.predict_proba(X)
        # argmax takes the first maximum, so ties go to the lowest index
        idx = np.argmax(proba, axis=1)
        return np.array([self.classes[i] for i in idx])

    def uncertainty(self, X):
        """Classification uncertainty ``1 - max posterior`` per row."""
        return 1.0 - self.predict_proba(X).max(axis=1)

    def predict_one(self, x) -> Prediction:
        proba = self.predict_proba(np.atleast_2d(np.asarray(x, float)))[0]
        i = int(np.argmax(proba))
        return Prediction(posterior=proba, label=self.classes[i],
                          uncertainty=float(1.0 - proba[i]))

    def to_dict(self):
        return {
            "schema": _SCHEMA,
            "family": self.family,
            "classes": [c.item() if hasattr(c, "item") else c
                        for c in self.classes],
            "priors": self.priors.tolist(),
            "class_models": [m.to_dict() for m in self.class_models],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != _SCHEMA:
            raise InputError(f"unsupported classifier document: "
                             f"{d.get('schema')!r}", code="classifier.schema")
        return cls(classes=d["classes"], priors=np.array(d["priors"]),
                   class_models=[MixtureModel.from_dict(m)
                                 for m in d["class_models"]],
                   family=d["family"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _split_by_class(X, y, min_per_class=2):
    classes = sorted(np.unique(y).tolist())
    groups = []
    for c in classes:
        rows = X[np.asarray(y) == c]
        if rows.shape[0] < min_per_class:
            raise InputError(
                f"class {c!r} has {rows.shape[0]} observations, "
                f"need at least {min_per_class}", code="classifier.class_size")
        groups.append(rows)
    return classes, groups


def _resolve_priors(priors, counts):
    counts = np.asarray(counts, dtype=float)
    if priors is None:
        return counts / counts.sum()
    priors = np.asarray(priors, dtype=float)
    if len(priors) != len(counts) or abs(priors.sum() - 1.0) > 1e-8:
        raise InputError("supplied priors must match the classes and sum to 1")
    return priors / priors.sum()


def fit_edda(X, y, candidate_models=None, *, priors=None, seed=0,
             variance_floor=1e-8):
    """Fit an EDDA classifier, selecting the covariance model by BIC.

    For every candidate, all class densities are estimated jointly: the
    covariance pieces the model declares equal are pooled across classes,
    per-class pieces stay per class.  The candidate maximizing
    ``2 * loglik - k * log(n)`` wins (conditional log-likelihood; mean and
    covariance parameters counted, priors excluded as they are identical
    across candidates).

    Returns
    -------
    (MixtureClassifier, list of selection-table rows)
    """
    X, y = check_X_y(X, y)
    n, p = X.shape
    classes, groups = _split_by_class(X, y)
    if len(classes) < 2:
        raise InputError("EDDA needs at least two classes",
                         code="classifier.classes")
    if candidate_models is None:
        candidate_models = legal_models(p)
    counts = np.array([g.shape[0] for g in groups], dtype=float)
    means = np.stack([g.mean(axis=0) for g in groups])
    scatters = np.stack([(g - m).T @ (g - m) for g, m in zip(groups, means)])
    floor = variance_floor * max(float(np.var(X, axis=0).sum()),
                                 np.finfo(float).tiny) / p

    table = []
    fitted = {}
    for model in candidate_models:
        validate_model(model, p)
        covs = fit_covariances(model, scatters, counts)
        for g in range(covs.shape[0]):
            covs[g], _ = _apply_floor(covs[g], floor)
        try:
            loglik = sum(float(_chol_logpdf(g, means[k], covs[k]).sum())
                         for k, g in enumerate(groups))
        except np.linalg.LinAlgError:
            continue
        k_params = len(classes) * p + n_covariance_params(model, p,
                                                          len(classes))
        bic = 2.0 * loglik - k_params * np.log(n)
        table.append({"model": model, "bic": bic, "loglik": loglik})
        fitted[model] = (bic, covs)
    if not fitted:
        raise DegenerateFitError("all EDDA candidates degenerated")
    model = min(fitted, key=lambda m: (-fitted[m][0], m))
    covs = fitted[model][1]
    class_models = [
        MixtureModel(model=model, weights=np.ones(1), means=means[k:k + 1],
                     covariances=covs[k:k + 1])
        for k in range(len(classes))
    ]
    clf = MixtureClassifier(classes=classes,
                            priors=_resolve_priors(priors, counts),
                            class_models=class_models, family=EDDA)
    return clf, table


def fit_mclustda(X, y, candidate_models=None, g_range=(1, 2, 3, 4, 5), *,
                 priors=None, seed=0, **em_kwargs):
    """Fit an MclustDA classifier: per-class BIC over a (model, G) grid.

    Each class density is selected independently; the reported total BIC is
    the sum of the class-local values.  A single class is accepted (the
    result is then a plain density estimate for exploration).

    Returns
    -------
    (MixtureClassifier, list of selection-table rows)
    """
    X, y = check_X_y(X, y)
    classes, groups = _split_by_class(X, y)
    if candidate_models is None:
        candidate_models = legal_models(X.shape[1])
    counts = [g.shape[0] for g in groups]
    table = []
    class_models = []
    for c, g in zip(classes, groups):
        usable_g = [G for G in g_range if G < g.shape[0]]
        if not usable_g:
            raise InputError(f"class {c!r} is too small for any G in range")
        fit, rows = select_mixture(g, candidate_models, usable_g, seed=seed,
                                   **em_kwargs)
        for row in rows:
            table.append({"class": c, **row})
        class_models.append(fit.model)
    clf = MixtureClassifier(classes=classes,
                            priors=_resolve_priors(priors, counts),
                            class_models=class_models, family=MCLUSTDA)
    return clf, table


def classifier_from_moments(X, y, *, common_covariance=False):
    """Single-Gaussian-per-class classifier from plain sample moments.

    No likelihood machinery is involved: class means, per-class (or pooled)
    covariances with the 1/n convention, frequency priors.  This is the
    population-parameter entry point used to verify subspace identities
    free of EM noise.
    """
    X, y = check_X_y(X, y)
    classes, groups = _split_by_class(X, y)
    counts = np.array([g.shape[0] for g in groups], dtype=float)
    means = np.stack([g.mean(axis=0) for g in groups])
    covs = np.stack([(g - m).T @ (g - m) / g.shape[0]
                     for g, m in zip(groups, means)])
    priors = counts / counts.sum()
    if common_covariance:
        pooled = np.einsum("k,kij->ij", priors, covs)
        covs = np.broadcast_to(pooled, covs.shape).copy()
        name = "EEE" if X.shape[1] > 1 else "E"
    else:
        name = "VVV" if X.shape[1] > 1 else "V"
    class_models = [
        MixtureModel(model=name, weights=np.ones(1), means=means[k:k + 1],
                     covariances=covs[k:k + 1])
        for k in range(len(classes))
    ]
    return MixtureClassifier(classes=classes, priors=priors,
                             class_models=class_models, family=EDDA)


class EDDAClassifier(ParamsMixin):
    """Single-Gaussian-per-class discriminant model with shared structure.

    Parameters
    ----------
    models : sequence of str, optional
        Candidate covariance models; defaults to every model legal for the
        data dimension.
    priors : array_like, optional
        Class priors by sorted class label; estimated from frequencies when
        omitted.
    seed : int
        Reserved for API symmetry (EDDA estimation is closed form).
    """

    def __init__(self, models=None, priors=None, seed=0):
        self.models = models
        self.priors = priors
        self.seed = seed

    def fit(self, X, y):
        clf, table = fit_edda(X, y, candidate_models=self.models,
                              priors=self.priors, seed=self.seed)
        self.classifier_ = clf
        self.selection_table_ = table
        self.classes_ = np.array(clf.classes)
        self.priors_ = clf.priors
        self.model_ = clf.class_models[0].model
        self.bic_ = max(row["bic"] for row in table)
        return self

    def predict(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict(X)

    def predict_proba(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict_proba(X)

    def uncertainty(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.uncertainty(X)


class MclustDAClassifier(ParamsMixin):
    """Per-class Gaussian mixture discriminant model.

    Parameters
    ----------
    models : sequence of str, optional
        Candidate covariance models per class.
    g_range : sequence of int
        Candidate component counts per class.
    priors : array_like, optional
        Class priors by sorted class label.
    seed : int
        Seed for the EM starts.
    """

    def __init__(self, models=None, g_range=(1, 2, 3, 4, 5), priors=None,
                 seed=0):
        self.models = models
        self.g_range = g_range
        self.priors = priors
        self.seed = seed

    def fit(self, X, y):
        clf, table = fit_mclustda(X, y, candidate_models=self.models,
                                  g_range=self.g_range, priors=self.priors,
                                  seed=self.seed)
        self.classifier_ = clf
        self.selection_table_ = table
        self.classes_ = np.array(clf.classes)
        self.priors_ = clf.priors
        self.bic_ = sum(
            max(r["bic"] for r in table if r["class"] == c)
            for c in clf.classes)
        return self

    def predict(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict(X)

    def predict_proba(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict_proba(X)

    def uncertainty(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.uncertainty(X)
