"""Config-driven experiment cells and their report rows.

A config names one experiment and describes partitions, measure, weights and
sampling.  It expands into *cells*; each cell is a self-contained JSON
document whose hash is stored with the row it produced, so any row can be
recomputed from the report alone.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .bspline import ClassicalBasis
from .chebyshev import ChebyshevBasis, compare_to_classical
from .gram import demko_fit, gram_matrix, invert, neumann_check
from .partition import (
    IntervalPartition,
    Measure,
    knot_sequence,
    mesh_norm,
    random_partition,
    uniform_partition,
)
from .perturb import check_conditions, family_basis
from .projector import Projector, dual_basis, lobatto_samples, operator_inf_norm, project
from .quadrature import PiecewiseFunction
from .weights import FAMILIES, WeightSystem

EXPERIMENTS = ("gram_bound", "demko", "cheb_compare", "proj_norm", "perturb_check",
               "theorem_pipeline")

COLUMNS = [
    "row", "experiment", "k", "instance", "seed", "n_atoms", "mesh", "mesh_mu",
    "G_norm", "G_inv_norm", "Gp_norm", "Gp_inv_norm", "demko_c", "demko_q",
    "demko_violation", "x_norm", "contraction", "inverse_bound", "op_norm",
    "theta_proxy", "band_C", "norm_C", "sup_diff", "bound_ratio",
    "invariants_ok", "warnings", "config_hash", "time_s",
]

# excluded from hashing and from replay comparison
TIMING_COLUMNS = ("time_s",)

DEFAULT_SAMPLING = {"samples_per_atom": 8, "grid_per_atom": 12}


class ConfigError(ValueError):
    pass


class ReplayError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# config handling


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _check_measure(spec):
    if spec is None or spec.get("kind", "lebesgue") == "lebesgue":
        return
    if spec.get("name") not in FAMILIES:
        raise ConfigError(f"unknown measure density {spec.get('name')!r}")


def _check_weights(spec):
    if spec is None:
        return
    specs = [spec] if isinstance(spec, Mapping) else list(spec)
    for s in specs:
        if s.get("name") not in FAMILIES:
            raise ConfigError(f"unknown weight family {s.get('name')!r}")


def _partition_instances(spec: Mapping, seed_override: int | None) -> list[dict]:
    kind = spec.get("kind")
    if kind == "uniform":
        return [{"kind": "uniform", "n": int(spec["n"])}]
    if kind == "explicit":
        return [{"kind": "explicit", "breakpoints": [float(b) for b in spec["breakpoints"]]}]
    if kind == "random":
        if "seed" not in spec and seed_override is None:
            raise ConfigError("random partitions need a seed")
        seed = int(spec["seed"] if seed_override is None else seed_override)
        count = int(spec.get("count", 1))
        return [{"kind": "random", "n": int(spec["n"]), "seed": seed + c,
                 "grading": float(spec.get("grading", 10.0))} for c in range(count)]
    if kind == "sweep":
        base = dict(spec.get("base", {"kind": "uniform"}))
        out = []
        for n in spec["ns"]:
            inner = dict(base, n=int(n))
            out.extend(_partition_instances(inner, seed_override))
        return out
    raise ConfigError(f"unknown partition kind {kind!r}")


def expand_config(config: Mapping, seed_override: int | None = None) -> list[dict]:
    """Cells of a config in deterministic order (orders outer, partitions inner)."""
    exp = config.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}")
    orders = config.get("order", config.get("orders"))
    if orders is None:
        raise ConfigError("config needs an order")
    orders = [int(orders)] if np.isscalar(orders) else [int(o) for o in orders]
    _check_measure(config.get("measure"))
    _check_weights(config.get("weights"))
    wspec = config.get("weights")
    if wspec is not None and not isinstance(wspec, Mapping):
        bad = [k for k in orders if len(wspec) != k]
        if bad:
            raise ConfigError(f"a list of weights needs one entry per order, got {len(wspec)} for k={bad}")
    family = config.get("family", "classical")
    if family not in ("classical", "weighted", "chebyshev"):
        raise ConfigError(f"unknown family {family!r}")
    sampling = dict(DEFAULT_SAMPLING, **config.get("sampling", {}))
    parts = _partition_instances(config.get("partition", {}), seed_override)
    cells = []
    for k, part in itertools.product(orders, parts):
        cells.append({
            "experiment": exp,
            "order": k,
            "partition": part,
            "measure": config.get("measure", {"kind": "lebesgue"}),
            "weights": config.get("weights"),
            "family": family,
            "sampling": sampling,
        })
    return cells


def cell_hash(cell: Mapping) -> str:
    blob = json.dumps(cell, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def build_partition(spec: Mapping) -> IntervalPartition:
    kind = spec["kind"]
    if kind == "uniform":
        return uniform_partition(spec["n"])
    if kind == "random":
        return random_partition(spec["n"], spec["seed"], spec["grading"])
    if kind == "explicit":
        return IntervalPartition(np.asarray(spec["breakpoints"], dtype=float))
    raise ConfigError(f"unknown partition kind {kind!r}")


def describe(spec: Mapping) -> str:
    if spec["kind"] == "uniform":
        return f"uniform:n={spec['n']}"
    if spec["kind"] == "random":
        return f"random:n={spec['n']},seed={spec['seed']},grading={spec['grading']:g}"
    return f"explicit:n={len(spec['breakpoints']) - 1}"


# ---------------------------------------------------------------------------
# cell evaluation


def _weights(cell, k) -> WeightSystem:
    spec = cell.get("weights")
    if spec is None:
        return WeightSystem.uniform(k)
    return WeightSystem.from_spec(spec, k)


def _projector_invariants(P: Projector, seed: int) -> dict:
    """Idempotence and biorthogonality defects on a seeded random function."""
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal(4)
    x0 = float(rng.uniform(0.1, 0.9))
    f = PiecewiseFunction(
        lambda x: coef[0] + coef[1] * x + coef[2] * np.sin(7 * x) + coef[3] * np.sign(x - x0),
        (x0,))
    p1 = project(P, f)
    p2 = project(P, p1.function)
    idem = float(np.max(np.abs(p1.coef - p2.coef)))
    bio = dual_basis(P).biorthogonality()
    return {"idempotence": idem, "biorthogonality": float(np.max(np.abs(bio - np.eye(P.count))))}


def run_cell(cell: Mapping) -> dict:
    """Evaluate one cell; returns a row (without the ``row`` index) plus detail."""
    t0 = time.perf_counter()
    k = int(cell["order"])
    part = build_partition(cell["partition"])
    mu = Measure.from_dict(cell.get("measure"))
    samp = cell["sampling"]
    exp = cell["experiment"]
    row: dict[str, Any] = {c: None for c in COLUMNS}
    row.update(experiment=exp, k=k, instance=describe(cell["partition"]),
               seed=cell["partition"].get("seed"), n_atoms=part.n_atoms,
               mesh=mesh_norm(part), mesh_mu=mesh_norm(part, mu))
    hard: dict[str, bool] = {}
    soft: dict[str, bool] = {}
    detail: dict[str, Any] = {}
    knots = knot_sequence(part, k)
    classical = ClassicalBasis(knots)

    if exp in ("gram_bound", "demko", "theorem_pipeline"):
        g = gram_matrix(classical)
        inv = invert(g)
        row.update(G_norm=g.inf_norm(), G_inv_norm=inv.inf_norm)
        hard["gram_row_sums"] = bool(np.max(np.abs(g.row_sums() - 1.0)) <= 1e-10)
        fit = demko_fit(inv.matrix, offset=g.bandwidth)
        row.update(demko_c=fit.c, demko_q=fit.q, demko_violation=fit.max_violation)
        soft["demko_decay"] = fit.ok and fit.max_violation <= 1e-12
        detail["G_inv_row_sums"] = np.abs(inv.matrix).sum(axis=1).tolist()

    if exp == "cheb_compare":
        ws = _weights(cell, k)
        cheb = ChebyshevBasis(knots, ws)
        grid = lobatto_samples(part, samp["grid_per_atom"])
        cmp = compare_to_classical(cheb, classical, grid)
        row.update(sup_diff=float(np.max(cmp.sup_diff)), bound_ratio=cmp.max_bound_ratio)
        vals = cheb.eval_M(grid)
        interior = (grid[:, None] > cheb.supports[None, :, 0]) & (grid[:, None] < cheb.supports[None, :, 1])
        scale = np.max(np.abs(vals))
        hard["positivity"] = bool(np.all(vals[interior] > -1e-10 * scale))
        hard["nonnegativity"] = bool(np.all(vals >= -1e-10 * scale))
        detail["sup_diff"] = cmp.sup_diff.tolist()

    if exp in ("proj_norm", "perturb_check", "theorem_pipeline"):
        ws = _weights(cell, k) if cell.get("family") == "chebyshev" else None
        family = cell.get("family", "classical")
        if exp == "theorem_pipeline" and family == "classical":
            family = "weighted"
        basis = family_basis(part, k, family, ws, mu)
        if exp in ("perturb_check", "theorem_pipeline"):
            rep = check_conditions(classical, basis, mu)
            row.update(theta_proxy=rep.theta_proxy, band_C=rep.band_C, norm_C=rep.norm_C)
        P = Projector(basis, mu)
        if exp in ("proj_norm", "theorem_pipeline"):
            est = operator_inf_norm(P, samp["samples_per_atom"])
            row["op_norm"] = est.value
            inv_chk = _projector_invariants(P, cell["partition"].get("seed") or 0)
            hard["idempotence"] = inv_chk["idempotence"] <= 1e-8
            hard["biorthogonality"] = inv_chk["biorthogonality"] <= 1e-8
            detail.update(inv_chk)
        if exp == "theorem_pipeline":
            gp = P.gram
            row.update(Gp_norm=gp.inf_norm(), Gp_inv_norm=P.inverse_norm)
            nc = neumann_check(gram_matrix(classical), gp)
            row.update(x_norm=nc.x_norm, contraction=nc.contraction,
                       inverse_bound=nc.inverse_bound_holds)
            if nc.contraction:
                soft["inverse_bound"] = bool(nc.inverse_bound_holds)
                fit_p = demko_fit(P.gram_inverse, offset=gp.bandwidth)
                soft["demko_decay_p"] = fit_p.ok
            detail["diff_norm"] = nc.diff_norm

    row["invariants_ok"] = all(hard.values())
    failed = [name for name, ok in {**hard, **soft}.items() if not ok]
    row["warnings"] = ";".join(failed)
    row["config_hash"] = cell_hash(cell)
    row["time_s"] = round(time.perf_counter() - t0, 6)
    detail["hard"] = hard
    detail["soft"] = soft
    return {"row": row, "detail": detail, "cell": dict(cell)}


def run_cells(cells, threads: int = 1) -> list[dict]:
    """Evaluate cells, in parallel if ``threads != 1``; order is preserved."""
    workers = (os.cpu_count() or 1) if threads == 0 else max(1, threads)
    if workers == 1 or len(cells) <= 1:
        results = [run_cell(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, cells))
    for i, r in enumerate(results):
        r["row"]["row"] = i
    return results


# ---------------------------------------------------------------------------
# reports


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in COLUMNS])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_report(results, out_dir, stem: str, config: Mapping | None = None) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [r["row"] for r in results]
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    csv_path.write_text(rows_to_csv(rows), encoding="utf-8")
    doc = {"columns": COLUMNS, "config": config, "rows": results}
    json_path.write_text(json.dumps(_jsonable(doc), indent=1, sort_keys=True), encoding="utf-8")
    return csv_path, json_path


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def replay_row(report: Mapping, index: int) -> dict:
    """Recompute row ``index`` of a report and compare it with the stored one.

    The cell is rebuilt with the row's seed; a hash mismatch means the row
    or its cell was edited.  Returns ``{"row", "stored", "identical"}``.
    """
    rows = report["rows"]
    if not 0 <= index < len(rows):
        raise ReplayError(f"row {index} out of range (report has {len(rows)} rows)")
    entry = rows[index]
    stored = entry["row"]
    cell = copy.deepcopy(entry["cell"])
    if stored.get("seed") is not None:
        cell["partition"]["seed"] = stored["seed"]
    if cell_hash(cell) != stored["config_hash"]:
        raise ReplayError(f"config hash mismatch for row {index}")
    fresh = run_cell(cell)["row"]
    fresh["row"] = stored["row"]
    fresh_j = _jsonable(fresh)
    same = all(fresh_j.get(c) == stored.get(c) for c in COLUMNS if c not in TIMING_COLUMNS)
    return {"row": fresh_j, "stored": stored, "identical": same}


def grid_configs(config: Mapping, grid: Mapping[str, list]) -> list[dict]:
    """Cartesian product of dotted-key overrides applied to ``config``."""
    keys = list(grid)
    out = []
    for values in itertools.product(*(grid[k] for k in keys)):
        c = copy.deepcopy(dict(config))
        c.pop("grid", None)
        for key, val in zip(keys, values):
            node = c
            parts = key.split(".")
            for p in parts[:-1]:
                node = node.setdefault(p, {})
            node[parts[-1]] = val
        out.append(c)
    return out


def plot_series(rows, x: str, y: str, group: str | None = None) -> dict:
    """``{group_value: {"x": [...], "y": [...]}}`` sorted by ``x``."""
    series: dict[str, list] = {}
    for r in rows:
        if r.get(x) is None or r.get(y) is None:
            continue
        key = "all" if group is None else str(r.get(group))
        series.setdefault(key, []).append((float(r[x]), float(r[y])))
    return {k: {"x": [a for a, _ in sorted(v)], "y": [b for _, b in sorted(v)]}
            for k, v in series.items()}
