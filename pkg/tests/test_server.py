import hashlib
import io
import json
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mixdr.classifier import classifier_from_moments, fit_edda
from mixdr.datasets import gen_mean_vs_variance, gen_scenario5
from mixdr.dimred import default_lambda_grid, kernel_parts, solve_basis, tune_lambda
from mixdr.server import create_app, preload_session


def csv_bytes(ds):
    buf = io.StringIO()
    import csv as _csv
    writer = _csv.writer(buf)
    writer.writerow(list(ds.feature_names) + ["class"])
    for row, label in zip(ds.X, ds.y):
        writer.writerow([f"{v:.17g}" for v in row] + [label])
    return buf.getvalue().encode()


def upload(client, ds, config=None):
    return client.post(
        "/sessions",
        files={"file": ("data.csv", csv_bytes(ds), "text/csv")},
        data={"config": json.dumps(config or {})})


@pytest.fixture(scope="module")
def app():
    return create_app()


@pytest.fixture(scope="module")
def client(app):
    return TestClient(app)


@pytest.fixture(scope="module")
def session_id(client):
    ds = gen_scenario5(240, seed=3)
    resp = upload(client, ds, {"family": "edda", "models": ["EEE", "VVV"]})
    assert resp.status_code == 200, resp.text
    body = resp.json()
    assert body["status"] == "ready"
    assert body["schema"] == "mixdr-api/1"
    assert {row["model"] for row in body["selection_table"]} == {"EEE", "VVV"}
    return body["session_id"]


class TestSessionLifecycle:
    def test_info_endpoint(self, client, session_id):
        resp = client.get(f"/sessions/{session_id}")
        body = resp.json()
        assert resp.status_code == 200
        assert body["status"] == "ready"
        assert body["n"] == 240 and body["p"] == 10
        assert body["d"] == 3

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.get("/sessions/nope/projection").status_code == 404
        assert client.delete("/sessions/nope").status_code == 404

    def test_delete_then_404(self, client):
        ds = gen_mean_vs_variance(100, seed=1)
        sid = upload(client, ds, {"models": ["VVI"]}).json()["session_id"]
        assert client.delete(f"/sessions/{sid}").status_code == 200
        assert client.get(f"/sessions/{sid}").status_code == 404

    def test_bad_csv_422(self, client):
        resp = client.post(
            "/sessions",
            files={"file": ("x.csv", b"a,b,y\n1,NA,0\n2,3,1\n", "text/csv")},
            data={"config": json.dumps({"label_column": "y"})})
        assert resp.status_code == 422

    def test_tiny_class_is_input_error_422(self, client):
        resp = client.post(
            "/sessions",
            files={"file": ("x.csv", b"a,y\n1,0\n2,1\n3,0\n", "text/csv")},
            data={"config": json.dumps({"label_column": "y"})})
        assert resp.status_code == 422

    def test_oversized_dataset_413(self, client):
        rng = np.random.default_rng(0)
        from mixdr.datasets import LabeledDataset
        wide = LabeledDataset(X=rng.standard_normal((4, 2001)),
                              y=np.array([0, 0, 1, 1]),
                              feature_names=[f"c{i}" for i in range(2001)])
        assert upload(client, wide).status_code == 413

    def test_openapi_at_spec(self, client):
        resp = client.get("/spec")
        assert resp.status_code == 200
        assert "/sessions/{session_id}/projection" in resp.text

    def test_async_fit_polls_to_ready(self, client):
        ds = gen_mean_vs_variance(200, seed=2)
        resp = upload(client, ds, {"models": ["VVI"], "async": True})
        assert resp.status_code == 202
        sid = resp.json()["session_id"]
        for _ in range(100):
            body = client.get(f"/sessions/{sid}").json()
            if body["status"] == "ready":
                break
            time.sleep(0.05)
        assert body["status"] == "ready"


class TestProjectionEndpoint:
    def test_payload_shape(self, client, session_id):
        resp = client.get(f"/sessions/{session_id}/projection?lambda=0.5")
        assert resp.status_code == 200
        body = resp.json()
        assert body["schema"] == "mixdr-api/1"
        assert body["d"] == 3
        assert len(body["eigenvalues"]) == 3
        assert len(body["points"]) == 240
        point = body["points"][0]
        assert set(point) == {"z1", "z2", "label", "uncertainty"}
        assert 0.0 <= point["uncertainty"] <= 0.75 + 1e-9
        assert np.allclose(
            np.array(body["loc_part"]) + np.array(body["disp_part"]),
            body["eigenvalues"], rtol=1e-6, atol=1e-9)

    def test_matches_library_path_bit_for_bit(self, client, session_id):
        ds = gen_scenario5(240, seed=3)
        clf, _ = fit_edda(ds.X, ds.y, ["EEE", "VVV"])
        basis = solve_basis(kernel_parts(clf, ds.X), 0.5)
        body = client.get(
            f"/sessions/{session_id}/projection?lambda=0.5").json()
        assert body["eigenvalues"] == basis.eigenvalues.tolist()
        assert body["beta"] == basis.beta.tolist()

    def test_lambda_out_of_range_422(self, client, session_id):
        assert client.get(
            f"/sessions/{session_id}/projection?lambda=1.5").status_code == 422

    def test_concurrent_requests_no_crosstalk(self, client, session_id):
        lams = [0.1, 0.9, 0.3, 0.7, 0.5, 0.2, 0.8, 0.4]
        results = {}

        def fetch(lam):
            r = client.get(f"/sessions/{session_id}/projection?lambda={lam}")
            results[lam] = hashlib.sha256(r.content).hexdigest()

        threads = [threading.Thread(target=fetch, args=(lam,))
                   for lam in lams]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        # every concurrent response matches its sequential replay
        for lam in lams:
            r = client.get(f"/sessions/{session_id}/projection?lambda={lam}")
            assert hashlib.sha256(r.content).hexdigest() == results[lam]

    def test_latency_budget(self, client):
        rng = np.random.default_rng(7)
        n, p = 5000, 50
        X = np.vstack([rng.standard_normal((n // 2, p)),
                       rng.standard_normal((n // 2, p)) + 0.8])
        y = np.repeat([0, 1], n // 2)
        from mixdr.datasets import LabeledDataset
        ds = LabeledDataset(X=X, y=y,
                            feature_names=[f"c{i}" for i in range(p)])
        app2 = create_app()
        clf = classifier_from_moments(X, y)
        preload_session(app2, ds, clf, session_id="big")
        with TestClient(app2) as big_client:
            big_client.get("/sessions/big/projection?lambda=0.5")  # warm
            t0 = time.perf_counter()
            resp = big_client.get("/sessions/big/projection?lambda=0.3137")
            dt = time.perf_counter() - t0
        assert resp.status_code == 200
        assert dt < 0.2, f"projection took {dt * 1000:.0f} ms"


class TestBoundaryEndpoint:
    def test_raster_payload(self, client, session_id):
        resp = client.get(
            f"/sessions/{session_id}/boundary?lambda=0.5&grid=32")
        assert resp.status_code == 200
        body = resp.json()
        assert body["grid"] == 32
        assert len(body["labels"]) == 32
        assert len(body["uncertainty"]) == 32
        flat = [u for row in body["uncertainty"] for u in row]
        assert all(0.0 <= u <= 0.75 + 1e-9 for u in flat)
        assert body["segments"]

    def test_grid_limit_422(self, client, session_id):
        assert client.get(
            f"/sessions/{session_id}/boundary?grid=500").status_code == 422

    def test_one_dimensional_projection_422(self, client):
        ds = gen_mean_vs_variance(200, seed=4)
        sid = upload(client, ds, {"models": ["VVI"]}).json()["session_id"]
        resp = client.get(f"/sessions/{sid}/boundary")
        assert resp.status_code == 422


class TestLrEndpoint:
    def test_matches_tune_lambda(self, client, session_id):
        resp = client.get(f"/sessions/{session_id}/lr?steps=5")
        assert resp.status_code == 200
        body = resp.json()
        ds = gen_scenario5(240, seed=3)
        clf, _ = fit_edda(ds.X, ds.y, ["EEE", "VVV"])
        trace = tune_lambda(ds.X, ds.y, clf, grid=default_lambda_grid(5),
                            parts=kernel_parts(clf, ds.X), seed=0)
        assert body["argmax_lambda"] == trace.argmax_lambda
        assert body["lr_values"] == trace.lr_values.tolist()

    def test_steps_limit(self, client, session_id):
        assert client.get(
            f"/sessions/{session_id}/lr?steps=300").status_code == 422
