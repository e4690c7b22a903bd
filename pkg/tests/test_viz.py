import re

import numpy as np
import pytest

from mixdr.classifier import EDDA, MixtureClassifier, fit_edda, fit_mclustda
from mixdr.dimred import DimRedBasis, ProjectionFrame, project
from mixdr.errors import InputError
from mixdr.gmm import MixtureModel
from mixdr.viz import (
    BoundaryRaster,
    compute_boundary,
    cumulative_percentages,
    expanded_box,
    grey_for_uncertainty,
    refit_on_projection,
    render_boundary,
    render_contours,
    render_eigen_table,
    render_scatter,
)


def symmetric_pair_classifier(shift=3.0):
    models = [
        MixtureModel("EEE", [1.0], [[-shift, 0.0]], np.eye(2)[None]),
        MixtureModel("EEE", [1.0], [[shift, 0.0]], np.eye(2)[None]),
    ]
    return MixtureClassifier([0, 1], [0.5, 0.5], models, EDDA)


def toy_frame(rng, n=120, shift=3.0):
    z = np.vstack([rng.standard_normal((n // 2, 2)) + [-shift, 0.0],
                   rng.standard_normal((n // 2, 2)) + [shift, 0.0]])
    y = np.repeat([0, 1], n // 2)
    return ProjectionFrame(z=z, labels=y, axis_names=["Dir_1", "Dir_2"],
                           eigenvalues=np.array([1.0, 0.5]), centered=False,
                           center=np.zeros(2))


class TestRefitOnProjection:
    def test_identity_projection_reproduces_model(self):
        rng = np.random.default_rng(3)
        X = np.vstack([rng.standard_normal((80, 2)) - [3, 0],
                       rng.standard_normal((80, 2)) + [3, 0]])
        y = np.repeat([0, 1], 80)
        clf, _ = fit_edda(X, y, ["EEE"])
        frame = ProjectionFrame(z=X, labels=y, axis_names=["a", "b"],
                                eigenvalues=np.ones(2), centered=False,
                                center=np.zeros(2))
        refit = refit_on_projection(clf, frame)
        for a, b in zip(refit.class_models, clf.class_models):
            assert np.allclose(a.means, b.means, atol=1e-10)
            assert np.allclose(a.covariances, b.covariances, atol=1e-10)

    def test_mclustda_structure_preserved(self):
        rng = np.random.default_rng(5)
        X = np.vstack([rng.standard_normal((60, 2)),
                       rng.standard_normal((30, 2)) + [6, 0],
                       rng.standard_normal((30, 2)) - [6, 0]])
        y = np.array([0] * 60 + [1] * 60)
        clf, _ = fit_mclustda(X, y, ["EII"], g_range=(1, 2), seed=2)
        frame = ProjectionFrame(z=X, labels=y, axis_names=["a", "b"],
                                eigenvalues=np.ones(2), centered=False,
                                center=np.zeros(2))
        refit = refit_on_projection(clf, frame, seed=2)
        assert refit.components_per_class == clf.components_per_class
        assert refit.family == clf.family

    def test_needs_labels(self):
        frame = ProjectionFrame(z=np.zeros((4, 2)), labels=None,
                                axis_names=[], eigenvalues=np.ones(2),
                                centered=False, center=np.zeros(2))
        clf = symmetric_pair_classifier()
        with pytest.raises(InputError):
            refit_on_projection(clf, frame)


class TestBoundaryRaster:
    def test_symmetric_boundary_on_bisector(self):
        rng = np.random.default_rng(7)
        frame = toy_frame(rng)
        clf = symmetric_pair_classifier()
        raster = compute_boundary(frame, clf, grid_size=64)
        assert raster.segments
        for (p1, p2) in raster.segments:
            assert abs(p1[0]) < raster.cell_width
            assert abs(p2[0]) < raster.cell_width

    def test_uncertainty_matches_predict_oracle(self):
        rng = np.random.default_rng(9)
        frame = toy_frame(rng)
        clf = symmetric_pair_classifier()
        raster = compute_boundary(frame, clf, grid_size=32)
        i, j = 10, 17
        cx = raster.x0 + (i + 0.5) * raster.cell_width
        cy = raster.y0 + (j + 0.5) * raster.cell_height
        pred = clf.predict_one([cx, cy])
        assert raster.uncertainty[j, i] == pytest.approx(pred.uncertainty,
                                                         abs=1e-12)
        assert clf.classes[raster.labels[j, i]] == pred.label

    def test_single_class_has_no_boundary(self):
        rng = np.random.default_rng(11)
        z = rng.standard_normal((50, 2))
        frame = ProjectionFrame(z=z, labels=np.zeros(50, dtype=int),
                                axis_names=["a", "b"],
                                eigenvalues=np.ones(2), centered=False,
                                center=np.zeros(2))
        clf = MixtureClassifier(
            [0], [1.0],
            [MixtureModel("VVV", [1.0], [[0.0, 0.0]], np.eye(2)[None])],
            "mclustda")
        raster = compute_boundary(frame, clf, grid_size=32)
        assert raster.segments == []
        assert np.allclose(raster.uncertainty, 0.0)

    def test_grid_bounds(self):
        rng = np.random.default_rng(13)
        frame = toy_frame(rng)
        with pytest.raises(InputError):
            compute_boundary(frame, symmetric_pair_classifier(), grid_size=8)

    def test_box_expansion(self):
        z = np.array([[0.0, 0.0], [10.0, 4.0]])
        x0, x1, y0, y1 = expanded_box(z)
        assert x0 == pytest.approx(-1.0) and x1 == pytest.approx(11.0)
        assert y0 == pytest.approx(-0.4) and y1 == pytest.approx(4.4)

    def test_linear_boundary_from_eee_refit(self):
        rng = np.random.default_rng(17)
        X = np.vstack([rng.standard_normal((100, 2)) - [2, 1],
                       rng.standard_normal((100, 2)) + [2, 1]])
        y = np.repeat([0, 1], 100)
        clf, _ = fit_edda(X, y, ["EEE"])
        frame = ProjectionFrame(z=X, labels=y, axis_names=["a", "b"],
                                eigenvalues=np.ones(2), centered=False,
                                center=np.zeros(2))
        raster = compute_boundary(frame, clf, grid_size=64)
        pts = np.array([p for seg in raster.segments for p in seg])
        pts -= pts.mean(axis=0)
        _, _, vt = np.linalg.svd(pts, full_matrices=False)
        residual = np.abs(pts @ vt[1])
        cell = max(raster.cell_width, raster.cell_height)
        assert residual.max() < cell

    def test_conic_boundary_from_vvv_refit(self):
        rng = np.random.default_rng(19)
        X = np.vstack([rng.standard_normal((150, 2)) * [0.6, 2.2],
                       rng.standard_normal((150, 2)) * [2.2, 0.6] + [4, 0]])
        y = np.repeat([0, 1], 150)
        clf, _ = fit_edda(X, y, ["VVV"])
        frame = ProjectionFrame(z=X, labels=y, axis_names=["a", "b"],
                                eigenvalues=np.ones(2), centered=False,
                                center=np.zeros(2))
        raster = compute_boundary(frame, clf, grid_size=64)
        pts = np.array([p for seg in raster.segments for p in seg])
        design = np.column_stack([pts[:, 0] ** 2, pts[:, 0] * pts[:, 1],
                                  pts[:, 1] ** 2, pts[:, 0], pts[:, 1],
                                  np.ones(len(pts))])
        _, _, vt = np.linalg.svd(design, full_matrices=False)
        coef = vt[-1]
        a, b, c, d, e, f = coef
        vals = design @ coef
        gx = 2 * a * pts[:, 0] + b * pts[:, 1] + d
        gy = b * pts[:, 0] + 2 * c * pts[:, 1] + e
        geom = np.abs(vals) / np.hypot(gx, gy)
        cell = max(raster.cell_width, raster.cell_height)
        assert np.median(geom) < cell


class TestSvgRendering:
    def test_deterministic_bytes(self):
        rng = np.random.default_rng(23)
        frame = toy_frame(rng)
        clf = symmetric_pair_classifier()
        assert render_scatter(frame) == render_scatter(frame)
        assert render_boundary(frame, clf, 32) == render_boundary(frame, clf,
                                                                  32)
        assert render_contours(frame, clf) == render_contours(frame, clf)

    def test_all_points_inside_viewbox(self):
        rng = np.random.default_rng(29)
        frame = toy_frame(rng)
        svg = render_scatter(frame)
        for cx, cy in re.findall(r'cx="([-\d.]+)" cy="([-\d.]+)"', svg):
            assert 0 <= float(cx) <= 640
            assert 0 <= float(cy) <= 480

    def test_grey_monotone_in_uncertainty(self):
        greys = []
        for u in np.linspace(0, 0.5, 11):
            m = re.match(r"rgb\((\d+),", grey_for_uncertainty(u, 2))
            greys.append(int(m.group(1)))
        assert all(a > b for a, b in zip(greys, greys[1:]))
        assert greys[0] == 255
        assert greys[-1] == 153  # 40% grey

    def test_empty_frame_rejected(self):
        frame = ProjectionFrame(z=np.zeros((0, 2)), labels=np.zeros(0),
                                axis_names=[], eigenvalues=np.ones(2),
                                centered=False, center=np.zeros(2))
        with pytest.raises(InputError):
            render_scatter(frame)

    def test_contours_are_valid_svg(self):
        rng = np.random.default_rng(31)
        frame = toy_frame(rng)
        svg = render_contours(frame, symmetric_pair_classifier())
        assert svg.startswith("<svg") and svg.endswith("</svg>")
        assert svg.count("<ellipse") == 2 * 4  # 2 components x 4 masses


class TestEigenTable:
    def test_reference_cumulative_percentages(self):
        assert cumulative_percentages([0.6527, 0.6069, 0.0005]) == \
            ["51.79", "99.96", "100.00"]

    def test_single_direction(self):
        assert cumulative_percentages([0.42]) == ["100.00"]

    def test_monotone_and_complete(self):
        rng = np.random.default_rng(37)
        vals = np.sort(rng.random(6))[::-1]
        pcts = [float(s) for s in cumulative_percentages(vals)]
        assert all(a <= b for a, b in zip(pcts, pcts[1:]))
        assert pcts[-1] == 100.00

    def test_table_layout(self):
        basis = DimRedBasis(beta=np.array([[0.7, 0.1], [-0.2, 0.9],
                                           [0.05, -0.3]]),
                            eigenvalues=np.array([0.6527, 0.6069]),
                            lam=0.5, d=2,
                            loc_part=np.array([0.6, 0.6]),
                            disp_part=np.array([0.0527, 0.0069]),
                            center=np.zeros(3))
        table = render_eigen_table(basis, feature_names=["alpha", "beta",
                                                         "gamma"])
        lines = table.strip().split("\n")
        assert lines[0].split() == ["Dir_1", "Dir_2"]
        assert lines[1].split()[0] == "alpha"
        # 0.6527 / (0.6527 + 0.6069) = 0.51818, truncated
        assert lines[-1].split() == ["cum_pct", "51.81", "100.00"]
        assert lines[-2].split()[0] == "eigenvalue"
