"""The twelve covariance parametrizations.

Each model name encodes which of volume / shape / orientation are shared
across mixture components ("E") or free to vary ("V"):

====== =========================== ==========================================
name   component covariance        free parameters
====== =========================== ==========================================
E      sigma                       1                      (univariate)
V      sigma_g                     G                      (univariate)
EII    lam * I                     1
VII    lam_g * I                   G
EEI    lam * A                     p
VEI    lam_g * A                   G + (p - 1)
EVI    lam * A_g                   1 + G * (p - 1)
VVI    lam_g * A_g                 G * p
EEE    lam * D A D'                p * (p + 1) / 2
EEV    lam * D_g A D_g'            1 + (p - 1) + G * p * (p - 1) / 2
VEV    lam_g * D_g A D_g'          G + (p - 1) + G * p * (p - 1) / 2
VVV    lam_g * D_g A_g D_g'        G * p * (p + 1) / 2
====== =========================== ==========================================

``A`` is a determinant-one diagonal shape matrix and ``D`` an orthogonal
orientation matrix.  The maximizers below take the weighted scatter
matrices of an M-step and return the constrained covariance estimates.
"""

import numpy as np

from .errors import InputError
from .linalg import sym_eigen

MODELS = ("E", "V", "EII", "VII", "EEI", "VEI", "EVI", "VVI",
          "EEE", "EEV", "VEV", "VVV")

UNIVARIATE_MODELS = ("E", "V")
DIAGONAL_MODELS = ("EEI", "VEI", "EVI", "VVI")

#: models whose covariance matrix is identical for every component
EQUAL_COVARIANCE_MODELS = ("E", "EII", "EEI", "EEE")


def validate_model(model, p):
    """Check that ``model`` is a legal name for dimension ``p``."""
    if model not in MODELS:
        raise InputError(f"unknown covariance model {model!r}",
                         code="covariance.model")
    if model in UNIVARIATE_MODELS and p != 1:
        raise InputError(f"model {model} requires p = 1, got p = {p}",
                         code="covariance.model")
    if model not in UNIVARIATE_MODELS and p < 2:
        raise InputError(f"model {model} requires p >= 2, got p = {p}",
                         code="covariance.model")


def legal_models(p):
    """All model names usable at dimension ``p``."""
    return UNIVARIATE_MODELS if p == 1 else tuple(m for m in MODELS
                                                  if m not in UNIVARIATE_MODELS)


def n_covariance_params(model, p, G):
    """Number of free covariance parameters for ``G`` components in ``p`` dims."""
    validate_model(model, p)
    orient = p * (p - 1) // 2
    return {
        "E": 1,
        "V": G,
        "EII": 1,
        "VII": G,
        "EEI": p,
        "VEI": G + (p - 1),
        "EVI": 1 + G * (p - 1),
        "VVI": G * p,
        "EEE": p * (p + 1) // 2,
        "EEV": 1 + (p - 1) + G * orient,
        "VEV": G + (p - 1) + G * orient,
        "VVV": G * p * (p + 1) // 2,
    }[model]


def _det1(diag_vals):
    """Scale a positive vector to determinant one; returns (shape, scale)."""
    logs = np.log(diag_vals)
    scale = np.exp(logs.mean())
    return diag_vals / scale, scale


def _fit_vei(B, counts, p, inner_max_iter, inner_tol):
    # B: (G, p) diagonal scatters; iterate volume | shape coordinate updates
    pooled = B.sum(axis=0)
    A, _ = _det1(np.maximum(pooled, np.finfo(float).tiny))
    lam = np.ones(len(counts))
    for _ in range(inner_max_iter):
        lam_new = (B / A).sum(axis=1) / (p * counts)
        lam_new = np.maximum(lam_new, np.finfo(float).tiny)
        a = (B / lam_new[:, None]).sum(axis=0)
        A_new, _ = _det1(np.maximum(a, np.finfo(float).tiny))
        delta = max(np.abs(A_new - A).max() / max(A.max(), 1e-300),
                    np.abs(lam_new - lam).max() / max(lam.max(), 1e-300))
        A, lam = A_new, lam_new
        if delta < inner_tol:
            break
    return lam[:, None] * A[None, :]


def _fit_vev(scatters, counts, p, inner_max_iter, inner_tol):
    G = len(counts)
    omegas = np.empty((G, p))
    rotations = []
    for g in range(G):
        vals, vecs = sym_eigen(scatters[g])
        omegas[g] = np.maximum(vals, 0.0)
        rotations.append(vecs)
    # same fixed point as VEI in the per-component eigenbasis
    diag = _fit_vei(omegas, counts, p, inner_max_iter, inner_tol)
    covs = np.empty((G, p, p))
    for g in range(G):
        covs[g] = (rotations[g] * diag[g]) @ rotations[g].T
    return covs


def fit_covariances(model, scatters, counts, *, inner_max_iter=50,
                    inner_tol=1e-8):
    """Constrained maximum-likelihood covariances from weighted scatters.

    Parameters
    ----------
    model : str
        One of :data:`MODELS`.
    scatters : (G, p, p) ndarray
        Weighted scatter matrix per component,
        ``W_g = sum_i z_ig (x_i - mean_g)(x_i - mean_g)'``.
    counts : (G,) ndarray
        Responsibility mass per component; ``n = counts.sum()``.
    inner_max_iter, inner_tol : int, float
        Fixed-point controls for the models without a closed-form M-step
        (VEI, VEV).

    Returns
    -------
    (G, p, p) ndarray of covariance matrices satisfying the model's
    equality constraints exactly.
    """
    scatters = np.asarray(scatters, dtype=float)
    counts = np.asarray(counts, dtype=float)
    G, p = scatters.shape[0], scatters.shape[1]
    validate_model(model, p)
    n = counts.sum()
    eye = np.eye(p)

    if model in ("E", "EII"):
        lam = np.trace(scatters.sum(axis=0)) / (n * p)
        return np.broadcast_to(lam * eye, (G, p, p)).copy()
    if model in ("V", "VII"):
        lam = np.trace(scatters, axis1=1, axis2=2) / (counts * p)
        return lam[:, None, None] * eye
    if model == "EEI":
        d = np.diagonal(scatters, axis1=1, axis2=2).sum(axis=0) / n
        return np.broadcast_to(np.diag(d), (G, p, p)).copy()
    if model == "VVI":
        d = np.diagonal(scatters, axis1=1, axis2=2) / counts[:, None]
        return np.stack([np.diag(row) for row in d])
    if model == "VEI":
        B = np.diagonal(scatters, axis1=1, axis2=2).copy()
        diag = _fit_vei(B, counts, p, inner_max_iter, inner_tol)
        return np.stack([np.diag(row) for row in diag])
    if model == "EVI":
        B = np.diagonal(scatters, axis1=1, axis2=2).copy()
        shapes = np.empty_like(B)
        vols = np.empty(G)
        for g in range(G):
            shapes[g], vols[g] = _det1(np.maximum(B[g], np.finfo(float).tiny))
        lam = vols.sum() / n
        return np.stack([np.diag(lam * row) for row in shapes])
    if model == "EEE":
        pooled = scatters.sum(axis=0) / n
        return np.broadcast_to(0.5 * (pooled + pooled.T), (G, p, p)).copy()
    if model == "EEV":
        omega_sum = np.zeros(p)
        rotations = []
        for g in range(G):
            vals, vecs = sym_eigen(scatters[g])
            omega_sum += np.maximum(vals, 0.0)
            rotations.append(vecs)
        covs = np.empty((G, p, p))
        for g in range(G):
            covs[g] = (rotations[g] * (omega_sum / n)) @ rotations[g].T
        return covs
    if model == "VEV":
        return _fit_vev(scatters, counts, p, inner_max_iter, inner_tol)
    # VVV
    covs = scatters / counts[:, None, None]
    return 0.5 * (covs + np.swapaxes(covs, 1, 2))


def constraint_deviation(model, covs):
    """Largest relative violation of the model's equality constraints.

    Zero (up to roundoff) for covariance sets produced by
    :func:`fit_covariances` with the same model.
    """
    covs = np.asarray(covs, dtype=float)
    G, p = covs.shape[0], covs.shape[1]
    validate_model(model, p)
    scale = max(float(np.abs(covs).max()), np.finfo(float).tiny)

    def equal_across(values):
        values = np.asarray(values, dtype=float)
        return float(np.abs(values - values[0]).max())

    dev = 0.0
    if model in ("EEI", "VEI", "EVI", "VVI", "EII", "VII"):
        off = covs - np.stack([np.diag(np.diag(c)) for c in covs])
        dev = max(dev, float(np.abs(off).max()))
    if model in ("EII", "VII"):
        diags = np.diagonal(covs, axis1=1, axis2=2)
        dev = max(dev, float(np.abs(diags - diags.mean(axis=1, keepdims=True)).max()))
    if model in ("E", "EII", "EEI", "EEE"):
        dev = max(dev, equal_across(covs))
        return dev / scale
    spectra = np.stack([sym_eigen(c).values for c in covs])
    spectra = np.maximum(spectra, np.finfo(float).tiny)
    vols = np.exp(np.log(spectra).mean(axis=1))
    if model in ("EVI", "EEV"):
        dev = max(dev, equal_across(vols))
    if model in ("VEI", "VEV", "EEV"):
        dev = max(dev, equal_across(spectra / vols[:, None]))
    return dev / scale
