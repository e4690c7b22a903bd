"""Synthetic dataset generators, CSV ingestion and preprocessing.

All generators draw from a counter-based Philox stream keyed by the seed,
so identical (seed, n, config) inputs produce bit-identical datasets on
every platform.  The draw order per generator is documented in each
docstring (labels first, then feature noise row-major) so other
implementations can match the streams.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ._validation import check_X_y
from .errors import InputError


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix, labels, names and reproducibility provenance."""

    X: np.ndarray
    y: np.ndarray
    feature_names: list
    provenance: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def classes(self):
        return sorted(np.unique(self.y).tolist())


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=int(seed)))


def waveform_shapes():
    """The three shifted triangular waveforms on j = 1..21."""
    j = np.arange(1, 22)
    w1 = np.maximum(6.0 - np.abs(j - 11), 0.0)
    w2 = np.maximum(6.0 - np.abs(j - 15), 0.0)   # w1(j - 4)
    w3 = np.maximum(6.0 - np.abs(j - 7), 0.0)    # w1(j + 4)
    return w1, w2, w3


def gen_waveform(n, seed) -> LabeledDataset:
    """Three-class waveform problem in 21 dimensions.

    Rows are random convex combinations of two of the three triangular
    waveforms (pairs (1,2), (2,3), (3,1) for classes 0, 1, 2) plus unit
    Gaussian noise; classes are equiprobable.

    Stream order: labels (n uniform ints), mixing weights u (n uniforms),
    noise (n x 21 standard normals, row-major).
    """
    if n < 3:
        raise InputError("waveform data needs n >= 3")
    rng = _rng(seed)
    labels = rng.integers(0, 3, size=n)
    u = rng.random(n)
    eps = rng.standard_normal((n, 21))
    w1, w2, w3 = waveform_shapes()
    first = np.stack([w1, w2, w3])[labels]
    second = np.stack([w2, w3, w1])[labels]
    X = u[:, None] * first + (1.0 - u[:, None]) * second + eps
    return LabeledDataset(
        X=X, y=labels, feature_names=[f"x{j}" for j in range(1, 22)],
        provenance={"generator": "waveform", "seed": int(seed), "n": int(n),
                    "p": 21, "config": {}})


SCENARIO5_MEANS = np.array([[-2.0, -2.0], [-2.0, 2.0], [2.0, -2.0],
                            [2.0, 2.0]])
SCENARIO5_WEIGHTS = np.array([0.3, 0.2, 0.3, 0.2])
SCENARIO5_BETA = np.array([[0.5, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                           [0.0, 1.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0]])
SCENARIO5_NOISE_SD = np.sqrt(np.array([1.0, 1.0, 0.5, 0.5,
                                       1.0, 1.0, 1.0, 1.0]))


def gen_scenario5(n, seed) -> LabeledDataset:
    """Four spherical clusters plus redundant and irrelevant coordinates.

    The first two coordinates follow a four-component unit-spherical
    mixture with weights (0.3, 0.2, 0.3, 0.2); coordinates 3..6 are linear
    in the first two (coefficients (0.5, 0), (0, 1), (2, 0), (0, 3)) with
    noise variances (1, 1, 0.5, 0.5); coordinates 7..10 are pure unit
    noise.  Labels record the generating component.

    Stream order: labels (n uniforms through the weight CDF), cluster
    coordinates (n x 2 normals), regression/noise errors (n x 8 normals).
    """
    if n < 8:
        raise InputError("scenario5 data needs n >= 8")
    rng = _rng(seed)
    labels = np.searchsorted(np.cumsum(SCENARIO5_WEIGHTS), rng.random(n))
    base = rng.standard_normal((n, 2)) + SCENARIO5_MEANS[labels]
    eps = rng.standard_normal((n, 8)) * SCENARIO5_NOISE_SD
    tail = base @ SCENARIO5_BETA + eps
    X = np.hstack([base, tail])
    return LabeledDataset(
        X=X, y=labels, feature_names=[f"x{j}" for j in range(1, 11)],
        provenance={"generator": "scenario5", "seed": int(seed), "n": int(n),
                    "p": 10, "config": {}})


def gen_mean_vs_variance(n, seed, *, mu_shift=3.0, var_ratio=36.0,
                         noise_dims=8) -> LabeledDataset:
    """Two groups separated in mean on x1 and in spread on x2.

    Class 0: x1, x2 standard normal.  Class 1: x1 shifted by ``mu_shift``,
    x2 scaled to variance ``var_ratio``.  ``noise_dims`` independent
    standard-normal columns are appended.  ``n`` must be even; the first
    half of the rows is class 0 (labels are deterministic).

    With the defaults the spread difference dominates every second-moment
    summary (the leading dispersion direction is x2) while x1 separates the
    groups better, which is exactly the regime the blend tuning is meant to
    resolve.

    Stream order: x1 noise (n normals), x2 noise (n normals), appended
    noise (n x noise_dims normals).
    """
    if n < 2 or n % 2:
        raise InputError("mean-vs-variance data needs an even n >= 2")
    if noise_dims < 0:
        raise InputError("noise_dims must be nonnegative")
    rng = _rng(seed)
    half = n // 2
    y = np.repeat([0, 1], half)
    x1 = rng.standard_normal(n) + mu_shift * (y == 1)
    x2 = rng.standard_normal(n) * np.where(y == 1, math.sqrt(var_ratio), 1.0)
    cols = [x1, x2]
    if noise_dims:
        cols.append(rng.standard_normal((n, noise_dims)))
    X = np.column_stack(cols)
    return LabeledDataset(
        X=X, y=y, feature_names=[f"x{j}" for j in range(1, 3 + noise_dims)],
        provenance={"generator": "meanvar", "seed": int(seed), "n": int(n),
                    "p": 2 + noise_dims,
                    "config": {"mu_shift": mu_shift, "var_ratio": var_ratio,
                               "noise_dims": noise_dims}})


GENERATORS = {
    "waveform": gen_waveform,
    "scenario5": gen_scenario5,
    "meanvar": gen_mean_vs_variance,
}


def save_csv(dataset: LabeledDataset, path, label_column="class"):
    """Write features plus a label column; floats carry 17 significant digits.

    A provenance sidecar ``<path>.meta.json`` is written alongside.
    """
    path = str(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + [label_column])
        for row, label in zip(dataset.X, dataset.y):
            writer.writerow([f"{v:.17g}" for v in row] + [label])
    with open(path + ".meta.json", "w") as fh:
        json.dump(dataset.provenance, fh, indent=2, sort_keys=True)
    return path


def load_csv(path, label_column) -> LabeledDataset:
    """Read a header CSV with numeric features and one label column.

    Non-numeric feature cells are rejected with their row and column
    position; ragged rows and unknown label columns are rejected too.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}", code="data.missing")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path} is empty", code="data.empty")
        if label_column not in header:
            raise InputError(
                f"label column {label_column!r} not in header {header}",
                code="data.label_column")
        label_idx = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        rows, labels = [], []
        for lineno, cells in enumerate(reader, start=2):
            if len(cells) != len(header):
                raise InputError(
                    f"{path}:{lineno}: expected {len(header)} cells, "
                    f"got {len(cells)}", code="data.ragged")
            labels.append(cells[label_idx])
            values = []
            for i, cell in enumerate(cells):
                if i == label_idx:
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise InputError(
                        f"{path}:{lineno}: column {header[i]!r}: "
                        f"non-numeric value {cell!r}", code="data.cell")
            rows.append(values)
    if not rows:
        raise InputError(f"{path} has a header but no data rows",
                         code="data.empty")
    X = np.array(rows, dtype=float)
    if not np.all(np.isfinite(X)):
        raise InputError(f"{path} contains non-finite feature values",
                         code="data.nonfinite")
    y = np.array(labels)
    try:
        y = y.astype(int)
    except ValueError:
        pass
    return LabeledDataset(X=X, y=y, feature_names=feature_names,
                          provenance={"path": str(path),
                                      "label_column": label_column})


def welch_pvalues(X, y):
    """Two-sided Welch t-test p-value per feature for binary labels.

    Features with zero variance in both classes get p = 1 by convention.
    """
    X, y = check_X_y(X, y)
    classes = np.unique(y)
    if len(classes) != 2:
        raise InputError("the t-test filter needs exactly two classes",
                         code="data.classes")
    a = X[y == classes[0]]
    b = X[y == classes[1]]
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise InputError("each class needs at least two observations")
    va = a.var(axis=0, ddof=1)
    vb = b.var(axis=0, ddof=1)
    na, nb = a.shape[0], b.shape[0]
    se2 = va / na + vb / nb
    pvals = np.ones(X.shape[1])
    ok = se2 > 0
    t = (a.mean(axis=0) - b.mean(axis=0))[ok] / np.sqrt(se2[ok])
    df = se2[ok] ** 2 / ((va[ok] / na) ** 2 / (na - 1)
                         + (vb[ok] / nb) ** 2 / (nb - 1))
    pvals[ok] = 2.0 * stats.t.sf(np.abs(t), df)
    return pvals


def bh_select(pvals, q):
    """Benjamini-Hochberg step-up rule: indices of rejected hypotheses.

    The largest k with ``p_(k) <= k * q / m`` is found on the sorted
    p-values; the k smallest are rejected.  Indices come back sorted in the
    original order.
    """
    if not 0 < q < 1:
        raise InputError("q must lie in (0, 1)")
    pvals = np.asarray(pvals, dtype=float)
    m = len(pvals)
    order = np.argsort(pvals, kind="stable")
    ranked = pvals[order]
    below = np.nonzero(ranked <= (np.arange(1, m + 1) * q / m))[0]
    if below.size == 0:
        return np.array([], dtype=int)
    k = below[-1] + 1
    return np.sort(order[:k])


def bh_filter(X, y, q=0.05):
    """Feature selection: Welch t-test p-values through the step-up rule."""
    return bh_select(welch_pvalues(X, y), q)


def diag_sigma(X) -> np.ndarray:
    """Diagonal marginal covariance: per-feature variances, 1/n denominator.

    Equals the diagonal extraction of the full marginal covariance.
    Constant columns yield zero entries, so downstream whitening must be
    ridged.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.diag(X.var(axis=0))
