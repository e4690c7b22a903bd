"""Command-line interface.

Subcommands: ``generate``, ``fit``, ``project``, ``tune-lambda``, ``plot``
and ``serve``.  Every command writes a ``<out>.manifest.json`` sidecar next
to its first output (atomically, temp file + rename) recording the resolved
configuration hash, inputs, outputs, seed and versions.

Exit codes: 0 success, 2 usage, 3 bad input, 4 numerical degeneracy,
5 internal error.  Failures print one machine-parsable line to stderr:
``error code=<module.category> command=<name>: <message>``.

Option precedence is flags > JSON config file (``--config``) > defaults.
All randomness derives from ``--seed``: generators consume it directly,
estimation stages use child seeds spawned with fixed stage labels.
"""

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .classifier import MixtureClassifier, fit_edda, fit_mclustda
from .datasets import GENERATORS, load_csv, save_csv
from .dimred import (DimRedBasis, ProjectionFrame, default_lambda_grid,
                     kernel_parts, project, solve_basis, tune_lambda)
from .errors import (DegenerateFitError, InputError, MixdrError,
                     SingularMatrixError)
from .viz import (refit_on_projection, render_boundary, render_contours,
                  render_eigen_table, render_scatter)

log = logging.getLogger("mixdr")

_STAGE_LABELS = {"fit": 1, "tune": 2, "plot": 3, "serve": 4}


def child_seed(root_seed, stage):
    """Deterministic per-stage seed spawned from the root seed."""
    seq = np.random.SeedSequence(entropy=int(root_seed),
                                 spawn_key=(_STAGE_LABELS[stage],))
    return int(seq.generate_state(1)[0])


def _resolve(args, config_path, defaults):
    """flags > config file > defaults."""
    config = {}
    if config_path:
        try:
            with open(config_path) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {config_path}: {exc}",
                             code="cli.config")
    resolved = {}
    for key, default in defaults.items():
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            resolved[key] = flag
        elif key in config:
            resolved[key] = config[key]
        else:
            resolved[key] = default
    return resolved


def _write_manifest(command, resolved, inputs, outputs, seed, started):
    payload = {
        "command": command,
        "config_hash": hashlib.sha256(
            json.dumps(resolved, sort_keys=True, default=str).encode()
        ).hexdigest(),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "seed": seed,
        "versions": {"mixdr": __version__,
                     "numpy": np.__version__,
                     "python": sys.version.split()[0]},
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    path = str(outputs[0]) + ".manifest.json"
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    os.replace(tmp, path)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
    return path


def _load_classifier(path):
    try:
        with open(path) as fh:
            return MixtureClassifier.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot open model {path}: {exc}",
                         code="cli.model")
    except json.JSONDecodeError as exc:
        raise InputError(f"model {path} is not valid JSON: {exc}",
                         code="cli.model")


def _load_basis(path):
    try:
        with open(path) as fh:
            return DimRedBasis.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot open basis {path}: {exc}", code="cli.basis")
    except json.JSONDecodeError as exc:
        raise InputError(f"basis {path} is not valid JSON: {exc}",
                         code="cli.basis")


def _write_projection_csv(path, frame, label_column="class"):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"Dir_{j + 1}" for j in range(frame.d)]
                        + [label_column])
        labels = frame.labels if frame.labels is not None \
            else [""] * frame.z.shape[0]
        for row, label in zip(frame.z, labels):
            writer.writerow([f"{v:.17g}" for v in row] + [label])
    return path


def _load_projection_csv(path, label_column="class"):
    ds = load_csv(path, label_column)
    return ProjectionFrame(z=ds.X, labels=ds.y,
                           axis_names=list(ds.feature_names),
                           eigenvalues=np.ones(ds.p), centered=False,
                           center=np.zeros(ds.p))


def cmd_generate(args):
    started = time.monotonic()
    defaults = {"dataset": None, "n": 200, "seed": 0, "out": None,
                "mu-shift": None, "var-ratio": None, "noise-dims": None}
    cfg = _resolve(args, args.config, defaults)
    if not cfg["dataset"] or not cfg["out"]:
        raise InputError("--dataset and --out are required", code="cli.usage")
    name = cfg["dataset"]
    if name not in GENERATORS:
        raise InputError(f"unknown dataset {name!r}; "
                         f"choose from {sorted(GENERATORS)}",
                         code="cli.dataset")
    kwargs = {}
    if name == "meanvar":
        for key, arg in (("mu_shift", "mu-shift"), ("var_ratio", "var-ratio"),
                         ("noise_dims", "noise-dims")):
            if cfg[arg] is not None:
                kwargs[key] = cfg[arg]
    ds = GENERATORS[name](int(cfg["n"]), int(cfg["seed"]), **kwargs)
    save_csv(ds, cfg["out"])
    _write_manifest("generate", cfg, [], [cfg["out"],
                                          cfg["out"] + ".meta.json"],
                    int(cfg["seed"]), started)
    log.info("wrote %s (%d x %d)", cfg["out"], ds.n, ds.p)
    return 0


def cmd_fit(args):
    started = time.monotonic()
    defaults = {"data": None, "labels-col": "class", "family": "edda",
                "models": None, "gmax": 5, "seed": 0, "out": None}
    cfg = _resolve(args, args.config, defaults)
    if not cfg["data"] or not cfg["out"]:
        raise InputError("--data and --out are required", code="cli.usage")
    ds = load_csv(cfg["data"], cfg["labels-col"])
    models = None
    if cfg["models"]:
        models = [m.strip() for m in str(cfg["models"]).split(",") if m.strip()]
    seed = child_seed(int(cfg["seed"]), "fit")
    if cfg["family"] == "edda":
        clf, table = fit_edda(ds.X, ds.y, models)
    elif cfg["family"] == "mclustda":
        g_range = tuple(range(1, int(cfg["gmax"]) + 1))
        clf, table = fit_mclustda(ds.X, ds.y, models, g_range=g_range,
                                  seed=seed)
    else:
        raise InputError(f"unknown family {cfg['family']!r}",
                         code="cli.family")
    doc = clf.to_dict()
    doc["selection"] = table
    doc["feature_names"] = list(ds.feature_names)
    _write_json(cfg["out"], doc)
    _write_manifest("fit", cfg, [cfg["data"]], [cfg["out"]],
                    int(cfg["seed"]), started)
    return 0


def cmd_project(args):
    started = time.monotonic()
    defaults = {"model": None, "data": None, "labels-col": "class",
                "lambda": 0.5, "out-basis": None, "out-proj": None,
                "diag-sigma": False}
    cfg = _resolve(args, args.config, defaults)
    for key in ("model", "data", "out-basis", "out-proj"):
        if not cfg[key]:
            raise InputError(f"--{key} is required", code="cli.usage")
    clf = _load_classifier(cfg["model"])
    ds = load_csv(cfg["data"], cfg["labels-col"])
    parts = kernel_parts(clf, ds.X, diag_sigma=bool(cfg["diag-sigma"]))
    basis = solve_basis(parts, float(cfg["lambda"]))
    with open(cfg["out-basis"], "w") as fh:
        fh.write(basis.to_json(indent=2))
    frame = project(basis, ds.X, ds.y)
    _write_projection_csv(cfg["out-proj"], frame, cfg["labels-col"])
    _write_manifest("project", cfg, [cfg["model"], cfg["data"]],
                    [cfg["out-basis"], cfg["out-proj"]], 0, started)
    return 0


def cmd_tune_lambda(args):
    started = time.monotonic()
    defaults = {"model": None, "data": None, "labels-col": "class",
                "grid-steps": 21, "d-eval": None, "seed": 0, "out": None}
    cfg = _resolve(args, args.config, defaults)
    for key in ("model", "data", "out"):
        if not cfg[key]:
            raise InputError(f"--{key} is required", code="cli.usage")
    clf = _load_classifier(cfg["model"])
    ds = load_csv(cfg["data"], cfg["labels-col"])
    grid = default_lambda_grid(int(cfg["grid-steps"]))
    d_eval = None if cfg["d-eval"] in (None, "auto") else int(cfg["d-eval"])
    trace = tune_lambda(ds.X, ds.y, clf, grid=grid, d_eval=d_eval,
                        seed=child_seed(int(cfg["seed"]), "tune"))
    _write_json(cfg["out"], trace.to_dict())
    _write_manifest("tune-lambda", cfg, [cfg["model"], cfg["data"]],
                    [cfg["out"]], int(cfg["seed"]), started)
    return 0


def cmd_plot(args):
    started = time.monotonic()
    defaults = {"kind": "scatter", "proj": None, "model": None, "basis": None,
                "data": None, "labels-col": "class", "grid": 64, "out": None,
                "seed": 0}
    cfg = _resolve(args, args.config, defaults)
    if not cfg["out"]:
        raise InputError("--out is required", code="cli.usage")
    kind = cfg["kind"]
    inputs = []
    if kind == "eigentable":
        if not cfg["basis"]:
            raise InputError("--basis is required for eigentable",
                             code="cli.usage")
        basis = _load_basis(cfg["basis"])
        names = None
        if cfg["data"]:
            names = load_csv(cfg["data"], cfg["labels-col"]).feature_names
            inputs.append(cfg["data"])
        content = render_eigen_table(basis, feature_names=names)
        inputs.append(cfg["basis"])
    else:
        if not cfg["proj"]:
            raise InputError(f"--proj is required for {kind}",
                             code="cli.usage")
        frame = _load_projection_csv(cfg["proj"], cfg["labels-col"])
        inputs.append(cfg["proj"])
        if kind == "scatter":
            content = render_scatter(frame)
        elif kind in ("contours", "boundary"):
            if not cfg["model"]:
                raise InputError(f"--model is required for {kind}",
                                 code="cli.usage")
            clf = _load_classifier(cfg["model"])
            inputs.append(cfg["model"])
            c2d = refit_on_projection(clf, frame,
                                      seed=child_seed(int(cfg["seed"]),
                                                      "plot"))
            if kind == "contours":
                content = render_contours(frame, c2d)
            else:
                content = render_boundary(frame, c2d, int(cfg["grid"]))
        else:
            raise InputError(f"unknown plot kind {kind!r}", code="cli.kind")
    with open(cfg["out"], "w") as fh:
        fh.write(content)
    _write_manifest("plot", cfg, inputs, [cfg["out"]], int(cfg["seed"]),
                    started)
    return 0


def cmd_serve(args):
    defaults = {"model": None, "data": None, "labels-col": "class",
                "port": 8000, "host": "127.0.0.1"}
    cfg = _resolve(args, args.config, defaults)
    from .server import create_app, preload_session

    app = create_app()
    if cfg["model"] and cfg["data"]:
        clf = _load_classifier(cfg["model"])
        ds = load_csv(cfg["data"], cfg["labels-col"])
        sid = preload_session(app, ds, clf)
        log.info("preloaded session %s", sid)
    import uvicorn

    uvicorn.run(app, host=cfg["host"], port=int(cfg["port"]))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mixdr",
        description="Mixture discriminant analysis with discriminant "
                    "subspace projections")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, options):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="JSON config file (flags take precedence)")
        for opt, kwargs in options.items():
            p.add_argument(opt, **kwargs)
        p.set_defaults(func=func)

    add("generate", cmd_generate, {
        "--dataset": {"choices": sorted(GENERATORS), "default": None},
        "--n": {"type": int, "default": None},
        "--seed": {"type": int, "default": None},
        "--out": {"default": None},
        "--mu-shift": {"type": float, "default": None},
        "--var-ratio": {"type": float, "default": None},
        "--noise-dims": {"type": int, "default": None},
    })
    add("fit", cmd_fit, {
        "--data": {"default": None},
        "--labels-col": {"default": None},
        "--family": {"choices": ["edda", "mclustda"], "default": None},
        "--models": {"default": None,
                     "help": "comma-separated covariance model names"},
        "--gmax": {"type": int, "default": None},
        "--seed": {"type": int, "default": None},
        "--out": {"default": None},
    })
    add("project", cmd_project, {
        "--model": {"default": None},
        "--data": {"default": None},
        "--labels-col": {"default": None},
        "--lambda": {"type": float, "default": None},
        "--out-basis": {"default": None},
        "--out-proj": {"default": None},
        "--diag-sigma": {"action": "store_true", "default": None},
    })
    add("tune-lambda", cmd_tune_lambda, {
        "--model": {"default": None},
        "--data": {"default": None},
        "--labels-col": {"default": None},
        "--grid-steps": {"type": int, "default": None},
        "--d-eval": {"default": None},
        "--seed": {"type": int, "default": None},
        "--out": {"default": None},
    })
    add("plot", cmd_plot, {
        "--kind": {"choices": ["scatter", "contours", "boundary",
                               "eigentable"], "default": None},
        "--proj": {"default": None},
        "--model": {"default": None},
        "--basis": {"default": None},
        "--data": {"default": None},
        "--labels-col": {"default": None},
        "--grid": {"type": int, "default": None},
        "--seed": {"type": int, "default": None},
        "--out": {"default": None},
    })
    add("serve", cmd_serve, {
        "--model": {"default": None},
        "--data": {"default": None},
        "--labels-col": {"default": None},
        "--port": {"type": int, "default": None},
        "--host": {"default": None},
    })
    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("MIXDR_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error code={exc.code} command={command}: {exc}",
              file=sys.stderr)
        return 3
    except (DegenerateFitError, SingularMatrixError) as exc:
        print(f"error code={exc.code} command={command}: {exc}",
              file=sys.stderr)
        return 4
    except MixdrError as exc:
        print(f"error code={exc.code} command={command}: {exc}",
              file=sys.stderr)
        return 5
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error code=internal command={command}: {exc}",
              file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
