"""Dense symmetric matrix primitives.

Symmetric eigendecomposition (cyclic Jacobi), inverse square roots and the
symmetric-definite generalized eigenproblem used by every estimator in the
package.  All functions are pure: inputs are never mutated and outputs are
freshly allocated, so concurrent callers need no coordination.
"""

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, InputError, SingularMatrixError


class EigenPairs(NamedTuple):
    """Eigenvalues in nonincreasing order with column-orthonormal vectors."""

    values: np.ndarray
    vectors: np.ndarray


class GeneralizedEigen(NamedTuple):
    """Solution of ``M b = l S b``.

    ``vectors`` are the orthonormal eigenvectors of the whitened problem,
    ``basis`` the back-transformed columns satisfying ``basis.T @ S @ basis
    == I``.
    """

    values: np.ndarray
    vectors: np.ndarray
    basis: np.ndarray


def as_sym(a) -> np.ndarray:
    """Validate a square matrix and return its exactly symmetric part.

    Symmetrization averages ``a`` with its transpose, so the result
    satisfies ``S[i, j] == S[j, i]`` bit-for-bit.

    Raises
    ------
    InputError
        If ``a`` is not square (order >= 1) or has non-finite entries.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"expected a square matrix, got shape {a.shape}",
                         code="linalg.shape")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries", code="linalg.nonfinite")
    return 0.5 * (a + a.T)


def _round_robin_schedule(m):
    """Tournament pairings covering all index pairs of 0..m-1 (m even).

    Returns ``m - 1`` rounds; within a round the pairs are disjoint, so the
    corresponding Jacobi rotations commute and can be applied in one
    vectorized step.
    """
    rest = list(range(1, m))
    rounds = []
    for r in range(m - 1):
        order = [0] + rest[r:] + rest[:r]
        pp = []
        qq = []
        for i in range(m // 2):
            a, b = order[i], order[m - 1 - i]
            pp.append(min(a, b))
            qq.append(max(a, b))
        rounds.append((np.array(pp), np.array(qq)))
    return rounds


def sym_eigen(a, *, tol=1e-12, max_sweeps=100) -> EigenPairs:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps follow a round-robin ordering: every round rotates a set of
    disjoint pivot pairs at once, which keeps the method exact while
    vectorizing the updates.

    Parameters
    ----------
    a : (p, p) array_like
        Symmetric matrix (symmetrized by averaging on entry).
    tol : float
        Sweep convergence threshold on the off-diagonal Frobenius norm,
        relative to the matrix norm.
    max_sweeps : int
        Hard cap on cyclic sweeps; convergence is quadratic so the cap is
        never reached for well-posed inputs.

    Returns
    -------
    EigenPairs
        ``values`` sorted nonincreasing, ``vectors`` column-orthonormal with
        ``a @ vectors[:, j] == values[j] * vectors[:, j]``.
    """
    A = as_sym(a).copy()
    n = A.shape[0]
    if n == 1:
        return EigenPairs(values=A[0, :1].copy(), vectors=np.ones((1, 1)))
    V = np.eye(n)
    scale = np.linalg.norm(A, "fro")
    if scale == 0.0:
        return EigenPairs(values=np.zeros(n), vectors=V)
    m = n + (n % 2)
    schedule = _round_robin_schedule(m)
    # rotations below this threshold cannot move the off-norm meaningfully
    skip = 0.01 * tol * scale / n
    for _ in range(max_sweeps):
        off = np.sqrt(max(0.0, np.sum(A * A) - np.sum(np.diag(A) ** 2)))
        if off <= tol * scale:
            break
        for pp, qq in schedule:
            if m != n:
                live = qq < n
                pp, qq = pp[live], qq[live]
            apq = A[pp, qq]
            act = np.abs(apq) > skip
            if not act.any():
                continue
            pp, qq, apq = pp[act], qq[act], apq[act]
            app = A[pp, pp]
            aqq = A[qq, qq]
            theta = 0.5 * (aqq - app) / apq
            t = np.where(theta == 0.0, 1.0,
                         np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0)))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp = A[pp, :]
            rq = A[qq, :]
            A[pp, :] = c[:, None] * rp - s[:, None] * rq
            A[qq, :] = s[:, None] * rp + c[:, None] * rq
            cp = A[:, pp]
            cq = A[:, qq]
            A[:, pp] = cp * c - cq * s
            A[:, qq] = cp * s + cq * c
            # analytic values for each rotated 2x2 block
            A[pp, pp] = app - t * apq
            A[qq, qq] = aqq + t * apq
            A[pp, qq] = 0.0
            A[qq, pp] = 0.0
            vp = V[:, pp]
            vq = V[:, qq]
            V[:, pp] = vp * c - vq * s
            V[:, qq] = vp * s + vq * c
    vals = np.diag(A).copy()
    order = np.argsort(-vals, kind="stable")
    return EigenPairs(values=vals[order], vectors=V[:, order])


def auto_ridge(a) -> float:
    """Default regularization: ``1e-8 * trace(a) / order``."""
    a = np.asarray(a, dtype=float)
    return 1e-8 * float(np.trace(a)) / a.shape[0]


def inv_sqrt(a, ridge=0.0) -> np.ndarray:
    """Symmetric inverse square root ``a^{-1/2}``.

    Parameters
    ----------
    a : (p, p) array_like
        Symmetric positive (semi)definite matrix.
    ridge : float or "auto"
        Nonnegative value added to every eigenvalue before inversion;
        ``"auto"`` uses :func:`auto_ridge`.

    Raises
    ------
    SingularMatrixError
        If any eigenvalue after adding the ridge is <= 1e-12; the message
        names the offending index in nonincreasing eigenvalue order.
    """
    A = as_sym(a)
    if ridge == "auto":
        ridge = auto_ridge(A)
    vals, vecs = sym_eigen(A)
    shifted = vals + ridge
    bad = np.nonzero(shifted <= 1e-12)[0]
    if bad.size:
        j = int(bad[0])
        raise SingularMatrixError(
            f"eigenvalue {j} is {vals[j]:.3e} (ridge {ridge:.3e}); "
            "matrix is numerically singular",
            eigen_index=j,
        )
    return as_sym((vecs * shifted ** -0.5) @ vecs.T)


def generalized_eigen(m, s, ridge=0.0) -> GeneralizedEigen:
    """Solve the symmetric-definite problem ``m b_j = l_j s b_j``.

    Whitens by ``s^{-1/2}``, decomposes ``s^{-1/2} m s^{-1/2}`` and maps the
    eigenvectors back, so the returned ``basis`` satisfies
    ``basis.T @ s @ basis == I`` and columns are ordered by nonincreasing
    eigenvalue.
    """
    M = as_sym(m)
    S = as_sym(s)
    if M.shape != S.shape:
        raise DimensionMismatchError(
            f"matrix orders differ: {M.shape[0]} vs {S.shape[0]}")
    w = inv_sqrt(S, ridge=ridge)
    vals, vecs = sym_eigen(w @ M @ w)
    return GeneralizedEigen(values=vals, vectors=vecs, basis=w @ vecs)


def principal_angle(b1, b2, sigma=None) -> float:
    """Largest principal angle (radians) between two column spaces.

    When ``sigma`` is given the angle is measured in the ``sigma`` inner
    product (both bases are whitened by ``sigma^{1/2}`` first), which is the
    natural metric for bases normalized against a covariance matrix.
    """
    b1 = np.atleast_2d(np.asarray(b1, dtype=float))
    b2 = np.atleast_2d(np.asarray(b2, dtype=float))
    if b1.shape[0] != b2.shape[0]:
        raise DimensionMismatchError("bases live in different spaces")
    if sigma is not None:
        vals, vecs = sym_eigen(as_sym(sigma))
        if np.any(vals <= 0):
            raise SingularMatrixError("metric matrix is not positive definite")
        half = (vecs * np.sqrt(vals)) @ vecs.T
        b1 = half @ b1
        b2 = half @ b2
    q1, _ = np.linalg.qr(b1)
    q2, _ = np.linalg.qr(b2)
    svals = np.linalg.svd(q1.T @ q2, compute_uv=False)
    k = min(q1.shape[1], q2.shape[1])
    cosines = np.clip(svals[:k], -1.0, 1.0)
    return float(np.arccos(cosines.min()))
