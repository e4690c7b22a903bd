"""Static SVG figures: projected scatters, density contours, boundaries.

Rendering is pure string assembly with fixed numeric formatting, so
identical inputs give identical output bytes.  Classification uncertainty
is drawn as a greyscale underlay (white at zero, 40% grey at the maximum
possible value ``1 - 1/K``), decision boundaries are extracted by marching
squares on pairwise class log-ratio fields.
"""

import math
from dataclasses import dataclass

import numpy as np

from .classifier import EDDA, MixtureClassifier, fit_edda
from .dimred import DimRedBasis, ProjectionFrame, _project_model_name
from .errors import InputError
from .gmm import em_fit
from .linalg import sym_eigen

CANVAS_W = 640
CANVAS_H = 480
MARGIN = 46

# colorblind-safe categorical palette, glyph shapes differ as well
PALETTE = ("#0072B2", "#D55E00", "#009E73", "#CC79A7",
           "#E69F00", "#56B4E9", "#F0E442", "#000000")
GLYPHS = ("circle", "square", "triangle", "diamond")

CONTOUR_MASSES = (0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True)
class BoundaryRaster:
    """Class labels and uncertainty on a lattice over the plot box."""

    x0: float
    x1: float
    y0: float
    y1: float
    grid: int
    labels: np.ndarray
    uncertainty: np.ndarray
    segments: list

    @property
    def cell_width(self):
        return (self.x1 - self.x0) / self.grid

    @property
    def cell_height(self):
        return (self.y1 - self.y0) / self.grid

    def to_dict(self, classes):
        return {
            "grid": self.grid,
            "x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1,
            "labels": [[classes[i] if hasattr(classes[i], "item") is False
                        else classes[i].item() for i in row]
                       for row in self.labels.tolist()],
            "uncertainty": self.uncertainty.tolist(),
            "segments": [[list(a), list(b)] for a, b in self.segments],
        }


def expanded_box(z, pad=0.10):
    """Data bounding box expanded by ``pad`` on every side."""
    z = np.asarray(z, dtype=float)
    lo = z.min(axis=0)
    hi = z.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    return (lo[0] - pad * span[0], hi[0] + pad * span[0],
            lo[1] - pad * span[1], hi[1] + pad * span[1])


def refit_on_projection(classifier: MixtureClassifier, frame: ProjectionFrame,
                        *, seed=0, dims=None) -> MixtureClassifier:
    """Refit the classifier's structure on the leading projected coordinates.

    Used only to draw contours and boundaries in the projection plane; the
    per-class family, covariance model and component count are kept, with
    models renamed to their one-dimensional analogue when the plane is 1-D.
    By default the first ``min(2, d)`` directions are used.
    """
    if frame.labels is None:
        raise InputError("the frame carries no labels to refit on")
    d = min(frame.z.shape[1], 2 if dims is None else int(dims))
    z = frame.z[:, :d]
    if classifier.family == EDDA:
        name = _project_model_name(classifier.class_models[0].model, d)
        clf, _ = fit_edda(z, frame.labels, [name],
                          priors=classifier.priors)
        return clf
    models = []
    for c, model in zip(classifier.classes, classifier.class_models):
        rows = z[np.asarray(frame.labels) == c]
        need = 2 * model.n_components
        if rows.shape[0] < need:
            raise InputError(
                f"class {c!r} has {rows.shape[0]} projected points, "
                f"needs at least {need}")
        name = _project_model_name(model.model, d)
        fit = em_fit(rows, model.n_components, name, seed=seed)
        models.append(fit.model)
    return MixtureClassifier(classes=classifier.classes,
                             priors=classifier.priors,
                             class_models=models,
                             family=classifier.family)


def _marching_squares(fx, xs, ys, mask=None):
    """Zero-level segments of a scalar field sampled on a node lattice.

    ``fx`` has shape (len(ys), len(xs)) with rows indexed by y; cells whose
    four corners are not all true in ``mask`` are skipped.  Returns line
    segments in data coordinates, cell by cell in row-major order.
    """

    def interp(va, vb, a, b):
        t = va / (va - vb)
        return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))

    segments = []
    for j in range(len(ys) - 1):
        for i in range(len(xs) - 1):
            if mask is not None and not mask[j:j + 2, i:i + 2].all():
                continue
            corners = [
                (fx[j, i], (xs[i], ys[j])),
                (fx[j, i + 1], (xs[i + 1], ys[j])),
                (fx[j + 1, i + 1], (xs[i + 1], ys[j + 1])),
                (fx[j + 1, i], (xs[i], ys[j + 1])),
            ]
            idx = sum(1 << k for k, (v, _) in enumerate(corners) if v > 0)
            if idx in (0, 15):
                continue
            edges = {
                "b": interp(corners[0][0], corners[1][0],
                            corners[0][1], corners[1][1])
                if (corners[0][0] > 0) != (corners[1][0] > 0) else None,
                "r": interp(corners[1][0], corners[2][0],
                            corners[1][1], corners[2][1])
                if (corners[1][0] > 0) != (corners[2][0] > 0) else None,
                "t": interp(corners[3][0], corners[2][0],
                            corners[3][1], corners[2][1])
                if (corners[3][0] > 0) != (corners[2][0] > 0) else None,
                "l": interp(corners[0][0], corners[3][0],
                            corners[0][1], corners[3][1])
                if (corners[0][0] > 0) != (corners[3][0] > 0) else None,
            }
            live = [p for p in (edges["b"], edges["r"], edges["t"],
                                edges["l"]) if p is not None]
            if len(live) == 2:
                segments.append((live[0], live[1]))
            elif len(live) == 4:
                # saddle: split by the sign of the center value
                center = np.mean([v for v, _ in corners])
                if (center > 0) == (corners[0][0] > 0):
                    segments.append((edges["b"], edges["r"]))
                    segments.append((edges["t"], edges["l"]))
                else:
                    segments.append((edges["b"], edges["l"]))
                    segments.append((edges["t"], edges["r"]))
    return segments


def compute_boundary(frame: ProjectionFrame, c2d: MixtureClassifier,
                     grid_size=64) -> BoundaryRaster:
    """Uncertainty raster plus decision-boundary segments on the plot box."""
    if frame.z.shape[0] == 0:
        raise InputError("empty frame")
    if grid_size < 32:
        raise InputError("grid_size must be at least 32")
    if frame.z.shape[1] < 2 or c2d.p != 2:
        raise InputError("boundary rendering needs a 2-D frame and model")
    x0, x1, y0, y1 = expanded_box(frame.z[:, :2])
    g = int(grid_size)
    cx = x0 + (np.arange(g) + 0.5) * (x1 - x0) / g
    cy = y0 + (np.arange(g) + 0.5) * (y1 - y0) / g
    centers = np.stack(np.meshgrid(cx, cy), axis=-1).reshape(-1, 2)
    proba = c2d.predict_proba(centers)
    labels = proba.argmax(axis=1).reshape(g, g)
    uncertainty = (1.0 - proba.max(axis=1)).reshape(g, g)

    segments = []
    if c2d.n_classes > 1:
        nx = np.linspace(x0, x1, g + 1)
        ny = np.linspace(y0, y1, g + 1)
        nodes = np.stack(np.meshgrid(nx, ny), axis=-1).reshape(-1, 2)
        logj = c2d.log_densities(nodes) + np.log(c2d.priors)
        node_top = logj.argmax(axis=1).reshape(g + 1, g + 1)
        present = np.unique(node_top)
        for ia in range(len(present)):
            for ib in range(ia + 1, len(present)):
                a, b = present[ia], present[ib]
                field = (logj[:, a] - logj[:, b]).reshape(g + 1, g + 1)
                # march only where the pair is locally the top two classes
                mask = np.isin(node_top, (a, b))
                segments.extend(_marching_squares(field, nx, ny, mask=mask))
    return BoundaryRaster(x0=x0, x1=x1, y0=y0, y1=y1, grid=g, labels=labels,
                          uncertainty=uncertainty, segments=segments)


def grey_for_uncertainty(u, n_classes):
    """Linear map from uncertainty to an SVG grey: 0 -> white, max -> 40% grey."""
    umax = 1.0 - 1.0 / n_classes
    frac = 0.0 if umax <= 0 else min(max(u / umax, 0.0), 1.0)
    level = int(round(255.0 - 102.0 * frac))
    return f"rgb({level},{level},{level})"


class _Canvas:
    def __init__(self, box):
        self.x0, self.x1, self.y0, self.y1 = box
        self.parts = []

    def sx(self, x):
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) \
            * (CANVAS_W - 2 * MARGIN)

    def sy(self, y):
        return CANVAS_H - MARGIN - (y - self.y0) / (self.y1 - self.y0) \
            * (CANVAS_H - 2 * MARGIN)

    def add(self, tag):
        self.parts.append(tag)

    def point(self, x, y, color, glyph, size=3.2):
        px, py = self.sx(x), self.sy(y)
        if glyph == "circle":
            self.add(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{size:.1f}" '
                     f'fill="{color}" fill-opacity="0.8"/>')
        elif glyph == "square":
            s = size
            self.add(f'<rect x="{px - s:.2f}" y="{py - s:.2f}" '
                     f'width="{2 * s:.1f}" height="{2 * s:.1f}" '
                     f'fill="{color}" fill-opacity="0.8"/>')
        elif glyph == "triangle":
            s = size * 1.3
            pts = f"{px:.2f},{py - s:.2f} {px - s:.2f},{py + s:.2f} " \
                  f"{px + s:.2f},{py + s:.2f}"
            self.add(f'<polygon points="{pts}" fill="{color}" '
                     f'fill-opacity="0.8"/>')
        else:
            s = size * 1.4
            pts = f"{px:.2f},{py - s:.2f} {px + s:.2f},{py:.2f} " \
                  f"{px:.2f},{py + s:.2f} {px - s:.2f},{py:.2f}"
            self.add(f'<polygon points="{pts}" fill="{color}" '
                     f'fill-opacity="0.8"/>')

    def frame_and_axes(self, xlabel, ylabel, title=""):
        self.add(f'<rect x="{MARGIN}" y="{MARGIN}" '
                 f'width="{CANVAS_W - 2 * MARGIN}" '
                 f'height="{CANVAS_H - 2 * MARGIN}" fill="none" '
                 f'stroke="#444444" stroke-width="1"/>')
        self.add(f'<text x="{CANVAS_W // 2}" y="{CANVAS_H - 10}" '
                 f'text-anchor="middle" font-size="13">{xlabel}</text>')
        self.add(f'<text x="14" y="{CANVAS_H // 2}" text-anchor="middle" '
                 f'font-size="13" transform="rotate(-90 14 '
                 f'{CANVAS_H // 2})">{ylabel}</text>')
        if title:
            self.add(f'<text x="{CANVAS_W // 2}" y="24" '
                     f'text-anchor="middle" font-size="14">{title}</text>')

    def render(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{CANVAS_W}" height="{CANVAS_H}" '
                f'viewBox="0 0 {CANVAS_W} {CANVAS_H}">')
        return head + "".join(self.parts) + "</svg>"


def _frame_box_and_coords(frame):
    if frame.z.shape[0] == 0:
        raise InputError("empty frame")
    if frame.z.shape[1] >= 2:
        return frame.z[:, :2]
    return np.column_stack([frame.z[:, 0], np.zeros(frame.z.shape[0])])


def _class_style(frame):
    if frame.labels is None:
        return None, {}
    classes = sorted(np.unique(frame.labels).tolist())
    style = {c: (PALETTE[i % len(PALETTE)], GLYPHS[i % len(GLYPHS)])
             for i, c in enumerate(classes)}
    return classes, style


def _axis_labels(frame):
    names = list(frame.axis_names)
    xlabel = names[0] if names else "Dir_1"
    ylabel = names[1] if len(names) > 1 else ""
    return xlabel, ylabel


def render_scatter(frame: ProjectionFrame, title="") -> str:
    """Class-colored scatter of the projected coordinates."""
    z = _frame_box_and_coords(frame)
    canvas = _Canvas(expanded_box(z))
    canvas.frame_and_axes(*_axis_labels(frame), title=title)
    _, style = _class_style(frame)
    for i, (x, y) in enumerate(z):
        color, glyph = style.get(frame.labels[i], ("#555555", "circle")) \
            if frame.labels is not None else ("#555555", "circle")
        canvas.point(x, y, color, glyph)
    return canvas.render()


def _component_ellipse(canvas, mean, cov, mass, color):
    vals, vecs = sym_eigen(cov)
    r2 = -2.0 * math.log(1.0 - mass)
    a = math.sqrt(max(vals[0], 0.0) * r2)
    b = math.sqrt(max(vals[1], 0.0) * r2)
    ang = math.degrees(math.atan2(vecs[1, 0], vecs[0, 0]))
    px, py = canvas.sx(mean[0]), canvas.sy(mean[1])
    sx = a / (canvas.x1 - canvas.x0) * (CANVAS_W - 2 * MARGIN)
    sy = b / (canvas.y1 - canvas.y0) * (CANVAS_H - 2 * MARGIN)
    canvas.add(f'<ellipse cx="0" cy="0" rx="{sx:.2f}" ry="{sy:.2f}" '
               f'fill="none" stroke="{color}" stroke-width="1" '
               f'transform="translate({px:.2f} {py:.2f}) '
               f'rotate({-ang:.2f})"/>')


def render_contours(frame: ProjectionFrame, c2d: MixtureClassifier,
                    masses=CONTOUR_MASSES, title="") -> str:
    """Scatter plus per-class-component highest-density ellipses."""
    z = _frame_box_and_coords(frame)
    if c2d.p != 2:
        raise InputError("contours need a 2-D refit model")
    canvas = _Canvas(expanded_box(z))
    canvas.frame_and_axes(*_axis_labels(frame), title=title)
    _, style = _class_style(frame)
    for i, (x, y) in enumerate(z):
        color, glyph = style.get(frame.labels[i], ("#555555", "circle")) \
            if frame.labels is not None else ("#555555", "circle")
        canvas.point(x, y, color, glyph, size=2.4)
    for c, model in zip(c2d.classes, c2d.class_models):
        color = style.get(c, ("#555555", "circle"))[0] if style else "#555555"
        for g in range(model.n_components):
            for mass in masses:
                _component_ellipse(canvas, model.means[g],
                                   model.covariances[g], mass, color)
    return canvas.render()


def render_boundary(frame: ProjectionFrame, c2d: MixtureClassifier,
                    grid_size=64, title="") -> str:
    """Greyscale uncertainty underlay, boundary polylines and points."""
    raster = compute_boundary(frame, c2d, grid_size)
    canvas = _Canvas((raster.x0, raster.x1, raster.y0, raster.y1))
    g = raster.grid
    for j in range(g):
        for i in range(g):
            u = raster.uncertainty[j, i]
            color = grey_for_uncertainty(u, c2d.n_classes)
            x = raster.x0 + i * raster.cell_width
            y = raster.y0 + (j + 1) * raster.cell_height
            px, py = canvas.sx(x), canvas.sy(y)
            w = raster.cell_width / (raster.x1 - raster.x0) \
                * (CANVAS_W - 2 * MARGIN)
            h = raster.cell_height / (raster.y1 - raster.y0) \
                * (CANVAS_H - 2 * MARGIN)
            canvas.add(f'<rect x="{px:.2f}" y="{py:.2f}" width="{w + 0.5:.2f}" '
                       f'height="{h + 0.5:.2f}" fill="{color}"/>')
    for (p1, p2) in raster.segments:
        canvas.add(f'<line x1="{canvas.sx(p1[0]):.2f}" '
                   f'y1="{canvas.sy(p1[1]):.2f}" '
                   f'x2="{canvas.sx(p2[0]):.2f}" '
                   f'y2="{canvas.sy(p2[1]):.2f}" '
                   f'stroke="#222222" stroke-width="1.4"/>')
    _, style = _class_style(frame)
    z = _frame_box_and_coords(frame)
    for i, (x, y) in enumerate(z):
        color, glyph = style.get(frame.labels[i], ("#555555", "circle")) \
            if frame.labels is not None else ("#555555", "circle")
        canvas.point(x, y, color, glyph, size=2.6)
    canvas.frame_and_axes(*_axis_labels(frame), title=title)
    return canvas.render()


def cumulative_percentages(values):
    """Cumulative eigenvalue shares in percent, truncated at two decimals.

    Truncation (not rounding) matches the conventional display of share
    tables where the running total must not overshoot; the last entry is
    exactly 100.00 for any positive total.
    """
    values = np.maximum(np.asarray(values, dtype=float), 0.0)
    cum = np.cumsum(values)
    if cum[-1] <= 0:
        return ["0.00" for _ in values]
    share = cum / cum[-1]
    return [f"{math.floor(10000.0 * s) / 100.0:.2f}" for s in share]


def render_eigen_table(basis: DimRedBasis, feature_names=None) -> str:
    """Plain-text table: basis coefficients, eigenvalues, cumulative %."""
    p, d = basis.beta.shape
    if feature_names is None:
        feature_names = [f"x{i + 1}" for i in range(p)]
    headers = [""] + [f"Dir_{j + 1}" for j in range(d)]
    rows = []
    for i in range(p):
        rows.append([feature_names[i]]
                    + [f"{basis.beta[i, j]:.3f}" for j in range(d)])
    rows.append(["eigenvalue"] + [f"{v:.4f}" for v in basis.eigenvalues])
    rows.append(["cum_pct"] + cumulative_percentages(basis.eigenvalues))
    widths = [max(len(r[i]) for r in [headers] + rows)
              for i in range(d + 1)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    for r in rows:
        lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    return "\n".join(lines) + "\n"
