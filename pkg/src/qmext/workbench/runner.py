"""Manifest-driven experiment runner.

A manifest is a JSON document ``{"seed": int, "tasks": [task, ...]}``.  Each
task names an ``op`` and a ``space`` (a generator spec such as
``{"kind": "grid", "n": 64}``, a ``{"file": path}`` reference, or an inline
``{"dist": ..., "weight": ...}`` document) plus op-specific parameters.
Tasks are independent; with ``QMEXT_THREADS`` > 1 they run on a thread pool
and results are collected in manifest order.

Exit codes: 0 success, 2 invariant violation or rejected input, 3 I/O error.
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import __version__
from ..embeddings import (EmbeddingError, characterization_matrix, embedding_report, matrix_trend,
                          test_family)
from ..extension import ExtensionConfig, extend, verify_extension
from ..functions import INF, NormError, minimal_norm
from ..measure import measure_density, regularity, uniform_perfectness
from ..metrization import estimate_index, regularize
from ..space import SpaceError, compute_constants
from ..whitney import WhitneyError, partition_of_unity, whitney_cover
from .generators import generate
from .io import WorkbenchIOError, loads, read_json, space_from_dict, space_to_dict

EXIT_OK, EXIT_INVARIANT, EXIT_IO = 0, 2, 3
THREAD_ENV = "QMEXT_THREADS"


class InvariantViolation(RuntimeError):
    pass


def _num(x):
    if isinstance(x, str) and x in ("inf", "Infinity", "-inf", "nan"):
        return float(x.replace("Infinity", "inf"))
    return x


def load_space(ref):
    """(space, omega or None) from a task's ``space`` entry."""
    if not isinstance(ref, dict):
        raise SpaceError("space must be an object")
    if "kind" in ref:
        return generate(ref)
    if "file" in ref:
        data = read_json(ref["file"])
        return space_from_dict(data), data.get("omega")
    return space_from_dict(ref), ref.get("omega")


def load_omega(task, generated):
    om = task.get("omega", generated)
    if isinstance(om, dict) and "file" in om:
        data = read_json(om["file"])
        om = data["omega"] if isinstance(data, dict) else data
    if om is None:
        return None
    return [int(i) for i in om]


def load_u(task, n_omega, seed):
    u = task.get("u")
    if isinstance(u, dict) and "file" in u:
        data = read_json(u["file"])
        u = data["u"] if isinstance(data, dict) else data
    if u is None:
        rng = np.random.Generator(np.random.PCG64(seed))
        return rng.random(n_omega)
    return np.array([float(_num(v)) for v in u])


def _exponents(task):
    return float(task["s"]), float(_num(task.get("p", 2))), float(_num(task.get("q", 2)))


def op_generate(task, space, omega, seed):
    return {"space": space_to_dict(space), "omega": omega}


def op_constants(task, space, omega, seed):
    return compute_constants(space)


def op_metrize(task, space, omega, seed):
    c = compute_constants(space).c_rho
    alpha = float(task.get("alpha", 1.0 / math.log2(c) if c > 1 else 8.0))
    reg = regularize(space, alpha)
    out = {"alpha": reg.alpha, "distortion": reg.distortion, "power_distortion": reg.power_distortion}
    if task.get("matrix"):
        out["matrix"] = reg.matrix
    return out


def op_index(task, space, omega, seed):
    return estimate_index(space, task.get("alpha_grid"), float(task.get("budget", 2.0)))


def op_regularity(task, space, omega, seed):
    band = task.get("band")
    return regularity(space, float(task.get("r_max", 1.0)), task.get("Q"), tuple(band) if band else None,
                      ahlfors=bool(task.get("ahlfors", False)))


def op_density(task, space, omega, seed):
    return measure_density(space, _need(omega), float(task.get("r_max", 1.0)))


def op_perfectness(task, space, omega, seed):
    return uniform_perfectness(space, _need(omega), float(task.get("r_max", 1.0)), float(task.get("r_min", 0.0)))


def op_norm(task, space, omega, seed):
    s, p, q = _exponents(task)
    idx = omega if omega is not None else list(range(space.n))
    sub = space.restrict(idx) if len(idx) < space.n else space
    u = load_u(task, sub.n, seed)
    res = minimal_norm(sub, u, s, p, q, task.get("flavor", "M"))
    return {"value": res.value, "status": res.status, "lower_bound": res.lower_bound,
            "levels": list(res.witness.levels), "witness": res.witness.values}


def op_whitney(task, space, omega, seed):
    c = compute_constants(space).c_rho
    alpha = float(task.get("alpha", min(8.0, 1.0 / math.log2(c)) if c > 1 else 8.0))
    reg = regularize(space, alpha)
    if task.get("open") is not None:
        open_set = load_omega({"omega": task["open"]}, None)
    else:
        om = set(_need(omega))
        open_set = [i for i in range(space.n) if i not in om]
    cover = whitney_cover(space, reg, open_set, task.get("theta"))
    pou = partition_of_unity(space, reg, cover)
    return {"cover": {k: getattr(cover, k) for k in ("centers", "radii", "theta", "Lambda", "c", "overlap",
                                                     "local_overlap", "neighbor_ratio")},
            "partition": {"c_star": pou.c_star, "theta_prime": pou.theta_prime, "alpha": pou.alpha}}


def _config(task):
    s, p, q = _exponents(task)
    return ExtensionConfig(s=s, p=p, q=q, mode=task.get("mode", "median"), flavor=task.get("flavor", "M"),
                           alpha=task.get("alpha"), Q=task.get("Q"))


def op_extend(task, space, omega, seed):
    om = _need(omega)
    u = load_u(task, len(om), seed)
    res = extend(space, om, u, _config(task))
    if not np.array_equal(res.u_ext[om], u):
        raise InvariantViolation("restriction identity failed")
    return {"u_ext": res.u_ext, "cutoff": res.cutoff, "V": res.V, "anchors": res.anchors, "c": res.c,
            "k0": res.k0, "report": res.report}


def op_verify_extension(task, space, omega, seed):
    om = _need(omega)
    u = load_u(task, len(om), seed)
    res = verify_extension(space, om, u, _config(task))
    if not res.report["restriction_exact"]:
        raise InvariantViolation("restriction identity failed")
    if not (res.validity_scale is not None and math.isfinite(res.validity_scale)):
        raise InvariantViolation("validity scale not finite")
    return {"validity_scale": res.validity_scale, "norm_ratio": res.norm_ratio, "report": res.report}


def op_embeddings(task, space, omega, seed):
    s, p, q = _exponents(task)
    fam, labels = test_family(space, seed, int(task.get("family_size", 20)), s, p, q, bool(task.get("bumps", False)))
    radii = task.get("radii", [0.5, 0.25])
    centers = task.get("centers") or list(np.unique(np.linspace(0, space.n - 1, 5).astype(int)))
    balls = [(int(x), float(r)) for x in centers for r in radii]
    rep = embedding_report(space, balls, fam, s, p, q, task.get("flavor", "M"), task.get("Q"), task.get("eps"),
                           seed, "standard")
    return {"regime": rep.regime, "max_constant": rep.max_constant, "median_constant": rep.median_constant,
            "rows": [{"center": r.center, "radius": r.radius, "lhs": r.lhs, "rhs_core": r.rhs_core,
                      "empirical_constant": r.empirical_constant} for r in rep.rows],
            "family": labels, "seed": seed}


def op_matrix(task, space, omega, seed):
    params = dict(task.get("params", {}))
    params.setdefault("seed", seed)
    rep = characterization_matrix(space, _need(omega), params)
    return {"cells": rep.cells, "witnesses": rep.witnesses, "tags": rep.tags, "params": rep.params}


def op_trend(task, space, omega, seed):
    """Characterization matrix on a refinement sequence given by ``levels`` (list of space refs)."""
    reports = []
    for ref in task["levels"]:
        sp, om = load_space(ref)
        params = dict(task.get("params", {}))
        params.setdefault("seed", seed)
        reports.append(characterization_matrix(sp, _need(load_omega(ref, om)), params))
    trend = matrix_trend(reports, float(task.get("budget", 2.0)))
    if task.get("svg"):
        plot_trend(trend, task["svg"], task.get("title", "constants under refinement"))
    return {"trend": trend, "cells": [r.cells for r in reports]}


OPS = {
    "generate": op_generate, "constants": op_constants, "metrize": op_metrize, "index": op_index,
    "regularity": op_regularity, "density": op_density, "perfectness": op_perfectness, "norm": op_norm,
    "whitney": op_whitney, "extend": op_extend, "verify-extension": op_verify_extension,
    "embeddings": op_embeddings, "matrix": op_matrix, "trend": op_trend,
}


def _need(omega):
    if omega is None:
        raise SpaceError("this operation needs omega")
    return omega


def plot_trend(trend, path, title):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for key, row in sorted(trend.items()):
        vals = [v if v and math.isfinite(v) else np.nan for v in row["values"]]
        ax.plot(range(len(vals)), vals, marker="o", label=key)
    ax.set_yscale("log")
    ax.set_xlabel("refinement level")
    ax.set_ylabel("empirical constant")
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run_task(task, seed):
    op = task.get("op")
    if op not in OPS:
        raise SpaceError(f"unknown op {op!r}")
    if op == "trend":
        space, omega = None, None
    else:
        space, generated = load_space(task.get("space"))
        omega = load_omega(task, generated)
    task_seed = int(task.get("seed", seed))
    return {"op": op, "result": OPS[op](task, space, omega, task_seed)}


def threads():
    try:
        return max(1, int(os.environ.get(THREAD_ENV, "1")))
    except ValueError:
        return 1


def run(manifest):
    """Run a manifest (dict, JSON text or path).  Returns (bundle, exit_code).

    The bundle keeps the numerical payload (``results``) apart from timing
    metadata so that payloads are byte-identical across runs and thread counts.
    """
    start = time.perf_counter()
    try:
        if isinstance(manifest, str):
            manifest = loads(manifest) if manifest.lstrip().startswith("{") else read_json(manifest)
        if not isinstance(manifest, dict):
            raise WorkbenchIOError("manifest must be a JSON object")
        tasks = manifest.get("tasks", [])
        seed = int(manifest.get("seed", 0))
    except WorkbenchIOError as exc:
        return {"error": str(exc), "tool_version": __version__}, EXIT_IO
    bundle = {"tool_version": __version__, "config": manifest, "seed": seed, "results": []}
    try:
        n = threads()
        if n > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(n) as pool:
                results = list(pool.map(lambda t: run_task(t, seed), tasks))
        else:
            results = [run_task(t, seed) for t in tasks]
        bundle["results"] = results
        code = EXIT_OK
    except WorkbenchIOError as exc:
        bundle["error"], code = str(exc), EXIT_IO
    except (InvariantViolation, SpaceError, WhitneyError, NormError, EmbeddingError, KeyError, TypeError,
            ValueError) as exc:
        bundle["error"], code = f"{type(exc).__name__}: {exc}", EXIT_INVARIANT
    bundle["meta"] = {"runtime_seconds": time.perf_counter() - start, "threads": threads()}
    return bundle, code


__all__ = ["run", "run_task", "OPS", "InvariantViolation", "EXIT_OK", "EXIT_INVARIANT", "EXIT_IO", "INF"]
