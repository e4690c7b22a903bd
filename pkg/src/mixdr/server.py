"""HTTP API for interactive projection exploration.

A session couples an uploaded dataset with a fitted classifier and the
cached kernel parts, so per-request work is only the eigen-solve at the
requested blend value plus the projection itself.  Sessions are immutable
after creation; re-fitting means creating a new session.

Error mapping: 404 unknown session, 413 dataset too large, 422 invalid
query or input, 409 numerical degeneracy (module error category in the
payload).  Every payload carries a ``schema`` field.  The OpenAPI document
is served at ``/spec``.
"""

import json
import os
import tempfile
import threading
import time
import uuid
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, File, Form, Query, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .classifier import MixtureClassifier, fit_edda, fit_mclustda
from .datasets import LabeledDataset, load_csv
from .dimred import (default_lambda_grid, kernel_parts, project, solve_basis,
                     tune_lambda)
from .errors import (DegenerateFitError, InputError, MixdrError,
                     SingularMatrixError)
from .viz import compute_boundary, refit_on_projection

SCHEMA = "mixdr-api/1"
MAX_ROWS = 100_000
MAX_COLS = 2000
LRU_SIZE = 32


@dataclass
class Session:
    id: str
    status: str = "fitting"
    dataset: LabeledDataset = None
    classifier: MixtureClassifier = None
    parts: object = None
    selection_table: list = None
    uncertainty: np.ndarray = None
    error: dict = None
    created: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)
    basis_cache: OrderedDict = field(default_factory=OrderedDict)

    def cached_basis(self, lam):
        key = round(float(lam), 4)
        with self.lock:
            if key in self.basis_cache:
                self.basis_cache.move_to_end(key)
                return self.basis_cache[key]
        basis = solve_basis(self.parts, key)
        with self.lock:
            self.basis_cache[key] = basis
            while len(self.basis_cache) > LRU_SIZE:
                self.basis_cache.popitem(last=False)
        return basis


def _error_response(exc, status):
    return JSONResponse(status_code=status,
                        content={"schema": SCHEMA, "error": str(exc),
                                 "category": getattr(exc, "code", "error")})


def _finish_session(session, family, models, g_range, seed, priors):
    ds = session.dataset
    try:
        if family == "edda":
            clf, table = fit_edda(ds.X, ds.y, models, priors=priors)
        else:
            clf, table = fit_mclustda(ds.X, ds.y, models, g_range=g_range,
                                      seed=seed, priors=priors)
        parts = kernel_parts(clf, ds.X)
        session.classifier = clf
        session.parts = parts
        session.selection_table = table
        session.uncertainty = clf.uncertainty(ds.X)
        session.status = "ready"
    except MixdrError as exc:
        session.error = {"error": str(exc),
                         "category": getattr(exc, "code", "error"),
                         "http_status": 422 if isinstance(exc, InputError)
                         else 409}
        session.status = "error"


def create_app() -> FastAPI:
    app = FastAPI(title="mixdr service", version="1", openapi_url="/spec")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.registry = {}
    app.state.lock = threading.Lock()
    app.state.executor = ThreadPoolExecutor(max_workers=2)

    def get_session(session_id):
        with app.state.lock:
            return app.state.registry.get(session_id)

    def session_or_404(session_id, require_ready=True):
        session = get_session(session_id)
        if session is None:
            return None, _error_response(
                InputError(f"unknown session {session_id!r}",
                           code="server.session"), 404)
        if require_ready and session.status != "ready":
            if session.status == "error":
                err = dict(session.error)
                status = err.pop("http_status", 409)
                return None, JSONResponse(
                    status_code=status,
                    content={"schema": SCHEMA, **err})
            return None, JSONResponse(
                status_code=409,
                content={"schema": SCHEMA, "status": session.status,
                         "error": "session is still fitting"})
        return session, None

    @app.post("/sessions")
    async def create_session(file: UploadFile = File(...),
                             config: str = Form("{}")):
        try:
            cfg = json.loads(config)
        except json.JSONDecodeError as exc:
            return _error_response(
                InputError(f"config is not valid JSON: {exc}",
                           code="server.config"), 422)
        raw = await file.read()
        tmp = tempfile.NamedTemporaryFile(mode="wb", suffix=".csv",
                                          delete=False)
        try:
            tmp.write(raw)
            tmp.close()
            ds = load_csv(tmp.name, cfg.get("label_column", "class"))
        except InputError as exc:
            return _error_response(exc, 422)
        finally:
            os.unlink(tmp.name)
        if ds.n > MAX_ROWS or ds.p > MAX_COLS:
            return _error_response(
                InputError(f"dataset too large: {ds.n} x {ds.p}",
                           code="server.size"), 413)
        session = Session(id=uuid.uuid4().hex, dataset=ds)
        with app.state.lock:
            app.state.registry[session.id] = session
        family = cfg.get("family", "edda")
        if family not in ("edda", "mclustda"):
            return _error_response(
                InputError(f"unknown family {family!r}",
                           code="server.family"), 422)
        models = cfg.get("models")
        g_range = tuple(range(1, int(cfg.get("g_max", 3)) + 1))
        seed = int(cfg.get("seed", 0))
        priors = cfg.get("priors")
        if cfg.get("async"):
            app.state.executor.submit(_finish_session, session, family,
                                      models, g_range, seed, priors)
            return JSONResponse(status_code=202, content={
                "schema": SCHEMA, "session_id": session.id,
                "status": "fitting"})
        _finish_session(session, family, models, g_range, seed, priors)
        if session.status == "error":
            err = dict(session.error)
            status = err.pop("http_status", 409)
            return JSONResponse(status_code=status,
                                content={"schema": SCHEMA, **err})
        return {"schema": SCHEMA, "session_id": session.id,
                "status": "ready", "selection_table": session.selection_table}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        session, err = session_or_404(session_id, require_ready=False)
        if err:
            return err
        payload = {"schema": SCHEMA, "session_id": session.id,
                   "status": session.status}
        if session.status == "ready":
            payload.update({
                "n": session.dataset.n, "p": session.dataset.p,
                "classes": [str(c) for c in session.classifier.classes],
                "d": min(session.dataset.p,
                         sum(session.classifier.components_per_class) - 1),
                "selection_table": session.selection_table,
                "family": session.classifier.family,
            })
        if session.status == "error":
            payload.update(session.error)
        return payload

    @app.get("/sessions/{session_id}/projection")
    def projection(session_id: str,
                   lam: float = Query(0.5, alias="lambda", ge=0.0, le=1.0),
                   dims: int = Query(2, ge=1, le=2)):
        session, err = session_or_404(session_id)
        if err:
            return err
        try:
            basis = session.cached_basis(lam)
        except (SingularMatrixError, DegenerateFitError) as exc:
            return _error_response(exc, 409)
        frame = project(basis, session.dataset.X, session.dataset.y)
        d = min(dims, frame.d)
        points = []
        for i in range(frame.z.shape[0]):
            z1 = frame.z[i, 0]
            z2 = frame.z[i, 1] if d > 1 else 0.0
            points.append({"z1": z1, "z2": z2,
                           "label": str(frame.labels[i]),
                           "uncertainty": float(session.uncertainty[i])})
        return {"schema": SCHEMA, "lambda": basis.lam, "d": basis.d,
                "eigenvalues": basis.eigenvalues.tolist(),
                "loc_part": basis.loc_part.tolist(),
                "disp_part": basis.disp_part.tolist(),
                "beta": basis.beta.tolist(),
                "center": basis.center.tolist(),
                "points": points}

    @app.get("/sessions/{session_id}/boundary")
    def boundary(session_id: str,
                 lam: float = Query(0.5, alias="lambda", ge=0.0, le=1.0),
                 grid: int = Query(64, ge=32, le=256)):
        session, err = session_or_404(session_id)
        if err:
            return err
        try:
            basis = session.cached_basis(lam)
            frame = project(basis, session.dataset.X, session.dataset.y)
            c2d = refit_on_projection(session.classifier, frame, seed=0)
            raster = compute_boundary(frame, c2d, grid)
        except InputError as exc:
            return _error_response(exc, 422)
        except (SingularMatrixError, DegenerateFitError) as exc:
            return _error_response(exc, 409)
        payload = raster.to_dict([str(c) for c in c2d.classes])
        payload.update({"schema": SCHEMA, "lambda": basis.lam})
        return payload

    @app.get("/sessions/{session_id}/lr")
    def lr_trace(session_id: str, steps: int = Query(21, ge=2, le=101)):
        session, err = session_or_404(session_id)
        if err:
            return err
        key = ("lr", steps)
        with session.lock:
            cached = session.basis_cache.get(key)
        if cached is not None:
            trace = cached
        else:
            try:
                trace = tune_lambda(session.dataset.X, session.dataset.y,
                                    session.classifier,
                                    grid=default_lambda_grid(steps),
                                    parts=session.parts, seed=0)
            except InputError as exc:
                return _error_response(exc, 422)
            except (SingularMatrixError, DegenerateFitError) as exc:
                return _error_response(exc, 409)
            with session.lock:
                session.basis_cache[key] = trace
        return {"schema": SCHEMA, **trace.to_dict()}

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        with app.state.lock:
            session = app.state.registry.pop(session_id, None)
        if session is None:
            return _error_response(
                InputError(f"unknown session {session_id!r}",
                           code="server.session"), 404)
        return {"schema": SCHEMA, "deleted": session_id}

    return app


def preload_session(app: FastAPI, dataset: LabeledDataset,
                    classifier: MixtureClassifier,
                    session_id="default") -> str:
    """Register a ready session built from already-loaded artifacts."""
    session = Session(id=session_id, dataset=dataset, classifier=classifier)
    session.parts = kernel_parts(classifier, dataset.X)
    session.selection_table = []
    session.uncertainty = classifier.uncertainty(dataset.X)
    session.status = "ready"
    with app.state.lock:
        app.state.registry[session_id] = session
    return session_id
