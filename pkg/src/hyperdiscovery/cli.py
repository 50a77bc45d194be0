"""Command-line entry point: ``hyperdiscovery {generate,denoise,discover,evaluate,check}``.

Exit codes: 0 success, 1 model failed ``check``, 2 usage error,
3 bad input data, 4 numerical failure.  ``HYPERDISCOVERY_THREADS`` caps
the BLAS thread pool.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, override
from .datagen import BENCHMARKS, benchmark_model, generate
from .denoise import denoise_displacements
from .errors import (
    DataQualityError,
    DiscoveryFailed,
    GeometryError,
    HyperDiscoveryError,
    PartitionError,
    SchemaError,
    SolverError,
)
from .kinematics import PATHS, deformation_gradient
from .mesh import load_dataset, save_dataset
from .modelio import ModelRecord, config_hash, evaluate_curves, format_model, timestamp, write_curves
from .pipeline import discover_from_data
from .solver import admissibility_check

log = logging.getLogger("hyperdiscovery")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4
THREADS_ENV = "HYPERDISCOVERY_THREADS"


class UsageError(Exception):
    pass


def _sigma_tag(sigma):
    return "0" if sigma == 0 else f"{sigma:g}"


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _run_config(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.with_seed(args.seed)
    return cfg


# ---------------------------------------------------------------- generate

def cmd_generate(args):
    cfg = _run_config(args)
    gen = override(
        cfg.generation,
        n_nodes=args.n_nodes,
        hole_radius=args.hole_radius,
        rho=args.rho,
        n_steps=args.steps,
        tangent=args.tangent,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sigmas = args.sigma if args.sigma else [gen.sigma]
    for name in args.model:
        for sigma in sigmas:
            g = override(gen, sigma=sigma)
            mesh, partition, clean, noisy = generate(name, g)
            stem = out / f"{name}_sigma{_sigma_tag(sigma)}"
            save_dataset(f"{stem}.json", mesh, partition, noisy)
            save_dataset(f"{stem}.clean.json", mesh, partition, clean)
            _write_json(f"{stem}.meta.json", {
                "model": name,
                "truth": BENCHMARKS[name],
                "display": format_model(benchmark_model(name)),
                "generation": g.to_dict(),
                "seed": g.seed,
                "n_nodes": mesh.n_nodes,
                "n_elements": mesh.n_elements,
                "clean_dataset": f"{stem.name}.clean.json",
                "version": __version__,
            })
            print(f"{stem}.json: {name}, sigma={sigma:g}, {mesh.n_nodes} nodes, {noisy.n_steps} steps")
    return EXIT_OK


# ----------------------------------------------------------------- denoise

def _denoise_settings(cfg, args):
    return override(
        cfg.denoise,
        budget=args.budget,
        objective=args.objective,
        xi=args.xi,
        chi=args.chi,
    )


def cmd_denoise(args):
    cfg = _run_config(args)
    settings = _denoise_settings(cfg, args)
    mesh, partition, data = load_dataset(args.dataset)
    smoothed, chosen = denoise_displacements(mesh, data, settings, return_hyperparameters=True)
    save_dataset(args.out, mesh, partition, smoothed)
    for l, i, xi, chi in chosen:
        print(f"step {l} component {'xy'[i]}: xi={xi:.3e} chi={chi:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------- discover

SOLVER_FLAGS = (
    "p", "lambda_p0", "kappa", "n_starts", "max_fp_iters", "eps_tol", "eps_conv",
    "threshold", "n_gamma", "gamma_min", "gamma_max", "lambda_r", "max_escalations",
)


def cmd_discover(args):
    cfg = _run_config(args)
    solver_cfg = override(cfg.solver, **{k: getattr(args, k) for k in SOLVER_FLAGS})
    settings = _denoise_settings(cfg, args)
    mesh, partition, data = load_dataset(args.dataset)
    provenance = {
        "dataset": Path(args.dataset).name,
        "dataset_sha256": _file_digest(args.dataset),
        "config_hash": config_hash(solver_cfg.to_dict(), None if args.no_denoise else vars(settings)),
        "solver": solver_cfg.to_dict(),
        "denoise": None if args.no_denoise else dict(vars(settings)),
        "exclude_log": bool(args.exclude_log),
        "version": __version__,
    }
    report_path = Path(args.report) if args.report else Path(args.out).with_suffix(".report.json")
    try:
        report = discover_from_data(
            mesh, partition, data, solver_cfg, None if args.no_denoise else settings, args.exclude_log
        )
    except DiscoveryFailed as exc:
        _write_json(report_path, {"status": "failed", "message": str(exc), "trail": exc.trail, **provenance})
        raise
    provenance["report"] = report_path.name
    provenance["lambda_p"] = report.lambda_p
    record = ModelRecord(report.model, provenance, timestamp(deterministic=not args.timestamp))
    record.save(args.out)
    _write_json(report_path, {"status": "ok", **report.to_document(), **provenance})
    print(format_model(report.model))
    return EXIT_OK


# ---------------------------------------------------------------- evaluate

def _gamma_grid(args):
    if args.n_gamma < 1 or args.gamma_min <= 0 or args.gamma_max < args.gamma_min:
        raise UsageError("gamma grid needs 0 < gamma-min <= gamma-max and n-gamma >= 1")
    return np.linspace(args.gamma_min, args.gamma_max, args.n_gamma)


def _parse_paths(text):
    paths = [p.strip().upper() for p in text.split(",") if p.strip()]
    if not paths:
        raise UsageError("empty path list")
    bad = [p for p in paths if p not in PATHS]
    if bad:
        raise UsageError(f"unknown path {bad[0]!r}; choose from {','.join(PATHS)}")
    return paths


def cmd_evaluate(args):
    paths = _parse_paths(args.paths)
    gamma = _gamma_grid(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for model_path in args.models:
        record = ModelRecord.load(model_path)
        stem = Path(model_path).name.removesuffix(".json")
        for kind in paths:
            target = out / f"{stem}_{kind}.csv"
            write_curves(target, evaluate_curves(record.model, kind, gamma))
            print(target)
    return EXIT_OK


# ------------------------------------------------------------------- check

def cmd_check(args):
    cfg = _run_config(args)
    record = ModelRecord.load(args.model)
    quadrature_F = None
    if args.dataset:
        mesh, _, data = load_dataset(args.dataset)
        quadrature_F = [deformation_gradient(mesh, u) for u in data.displacements]
    verdict = admissibility_check(record.model, quadrature_F, cfg.solver)
    print(format_model(record.model))
    print("admissible" if verdict else f"not admissible: {verdict.reason}")
    return EXIT_OK if verdict else EXIT_CHECK


# ------------------------------------------------------------------ parser

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="hyperdiscovery", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--seed", type=int, help="global seed (overrides the config file)")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="synthesize benchmark datasets")
    g.add_argument("--model", action="append", choices=sorted(BENCHMARKS), required=True)
    g.add_argument("--sigma", action="append", type=float, help="noise level; repeatable")
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--n-nodes", type=_positive_int)
    g.add_argument("--hole-radius", type=float)
    g.add_argument("--rho", type=float)
    g.add_argument("--steps", type=_positive_int)
    g.add_argument("--tangent", choices=["dual", "fd"])
    g.set_defaults(func=cmd_generate)

    denoise_opts = argparse.ArgumentParser(add_help=False)
    denoise_opts.add_argument("--budget", type=_positive_int, help="random-search candidates per load step")
    denoise_opts.add_argument("--objective", choices=["cv", "train"])
    denoise_opts.add_argument("--xi", type=float, help="fixed ridge strength (with --chi skips tuning)")
    denoise_opts.add_argument("--chi", type=float, help="fixed kernel length scale")

    d = sub.add_parser("denoise", parents=[common, denoise_opts], help="KRR-smooth a dataset")
    d.add_argument("dataset")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_denoise)

    s = sub.add_parser("discover", parents=[common, denoise_opts], help="discover a material model")
    s.add_argument("dataset")
    s.add_argument("--out", required=True, help="model file")
    s.add_argument("--report", help="report file (default: <out>.report.json)")
    s.add_argument("--no-denoise", action="store_true")
    s.add_argument("--exclude-log", action="store_true", help="drop the log(I2b/3) feature")
    s.add_argument("--timestamp", action="store_true", help="record wall-clock time (breaks byte-identity)")
    for name in SOLVER_FLAGS:
        kind = int if name in ("n_starts", "max_fp_iters", "n_gamma", "max_escalations") else float
        s.add_argument("--" + name.replace("_", "-"), dest=name, type=kind)
    s.set_defaults(func=cmd_discover)

    e = sub.add_parser("evaluate", help="write W and P curves along canonical paths")
    e.add_argument("models", nargs="+")
    e.add_argument("--paths", default=",".join(PATHS))
    e.add_argument("--gamma-min", type=float, default=0.01)
    e.add_argument("--gamma-max", type=float, default=1.0)
    e.add_argument("--n-gamma", type=int, default=100)
    e.add_argument("--out", default=".")
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("check", parents=[common], help="admissibility check of a model file")
    c.add_argument("model")
    c.add_argument("--dataset", help="also require W >= 0 at this dataset's states")
    c.set_defaults(func=cmd_check)
    return parser


def _thread_limit():
    value = os.environ.get(THREADS_ENV)
    if not value:
        return None
    try:
        n = int(value)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be positive")
    return n


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        threads = _thread_limit()
        if threads is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=threads):
                return args.func(args)
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (SchemaError, GeometryError, PartitionError, DataQualityError, FileNotFoundError, IsADirectoryError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except (DiscoveryFailed, SolverError, np.linalg.LinAlgError) as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except HyperDiscoveryError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
