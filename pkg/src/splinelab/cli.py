"""Command line entry point: ``splinelab {run,replay,sweep,plotdata}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import experiments as ex


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get("SPLINELAB_OUT") or "splinelab_out")


def _finish(results, strict: bool) -> int:
    hard_fail = [r["row"]["row"] for r in results if not r["row"]["invariants_ok"]]
    warned = [r["row"]["row"] for r in results if r["row"]["warnings"]]
    if hard_fail:
        print(f"hard invariant failures in rows {hard_fail}", file=sys.stderr)
        return 1
    if strict and warned:
        print(f"invariant warnings in rows {warned}", file=sys.stderr)
        return 1
    return 0


def _summary(results, paths):
    for r in results:
        row = r["row"]
        tag = "ok" if row["invariants_ok"] and not row["warnings"] else (row["warnings"] or "FAIL")
        print(f"{row['row']:4d} k={row['k']} {row['instance']:<40s} {tag}")
    for p in paths:
        print(f"wrote {p}")


def _guard_input(config_path, out: Path, stem: str) -> None:
    if (out / f"{stem}.json").resolve() == Path(config_path).resolve():
        raise ex.ConfigError(f"report would overwrite the config {config_path}; use --out")


def cmd_run(args) -> int:
    config = ex.load_config(args.config)
    cells = ex.expand_config(config, args.seed_override)
    stem = config.get("name") or Path(args.config).stem
    _guard_input(args.config, _out_dir(args), stem)
    results = ex.run_cells(cells, args.threads)
    paths = ex.write_report(results, _out_dir(args), stem, config)
    _summary(results, paths)
    return _finish(results, args.strict)


def _parse_grid(items) -> dict:
    grid = {}
    for item in items or []:
        key, _, vals = item.partition("=")
        if not key or not vals:
            raise ex.ConfigError(f"bad --grid entry {item!r}; expected key=v1,v2")
        grid[key] = [json.loads(v) for v in vals.split(",")]
    return grid


def cmd_sweep(args) -> int:
    template = ex.load_config(args.config)
    grid = dict(template.get("grid", {}))
    grid.update(_parse_grid(args.grid))
    if not grid:
        raise ex.ConfigError("sweep needs a grid (in the config or via --grid)")
    cells = []
    for cfg in ex.grid_configs(template, grid):
        cells.extend(ex.expand_config(cfg, args.seed_override))
    stem = (template.get("name") or Path(args.config).stem) + "_sweep"
    _guard_input(args.config, _out_dir(args), stem)
    results = ex.run_cells(cells, args.threads)
    paths = ex.write_report(results, _out_dir(args), stem, template)
    _summary(results, paths)
    return _finish(results, args.strict)


def cmd_replay(args) -> int:
    report = ex.load_report(args.report)
    try:
        res = ex.replay_row(report, args.row)
    except ex.ReplayError as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(res["row"], indent=1, sort_keys=True))
    if not res["identical"]:
        diff = [c for c in ex.COLUMNS if c not in ex.TIMING_COLUMNS
                and res["row"].get(c) != res["stored"].get(c)]
        print(f"replayed row differs in columns {diff}", file=sys.stderr)
        return 1
    print(f"row {args.row} reproduced", file=sys.stderr)
    return 0


def cmd_plotdata(args) -> int:
    report = ex.load_report(args.report)
    rows = [r["row"] for r in report["rows"]]
    series = ex.plot_series(rows, args.x, args.y, args.group)
    text = json.dumps({"x": args.x, "y": args.y, "group": args.group, "series": series},
                      indent=1, sort_keys=True)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        print(f"wrote {out}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="splinelab", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--out", help="output directory (default $SPLINELAB_OUT or ./splinelab_out)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
        sp.add_argument("--seed-override", type=int, default=None,
                        help="replace the base seed of random partitions")
        sp.add_argument("--strict", action="store_true", help="fail on any invariant warning")

    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")
    common(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a config template over a parameter grid")
    s.add_argument("config")
    s.add_argument("--grid", action="append", metavar="KEY=V1,V2",
                   help="dotted config key and JSON values, repeatable")
    common(s)
    s.set_defaults(func=cmd_sweep)

    rp = sub.add_parser("replay", help="recompute one row of a JSON report")
    rp.add_argument("report")
    rp.add_argument("--row", type=int, required=True)
    rp.set_defaults(func=cmd_replay)

    pd = sub.add_parser("plotdata", help="emit x/y series from a JSON report")
    pd.add_argument("report")
    pd.add_argument("--x", default="mesh")
    pd.add_argument("--y", default="G_inv_norm")
    pd.add_argument("--group", default="k")
    pd.add_argument("--out", help="write JSON here instead of stdout")
    pd.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ex.ConfigError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
