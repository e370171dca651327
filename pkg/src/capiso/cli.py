"""Command-line runner: ``capiso <subcommand> --config PATH [--seed N] [--out DIR] [--resolution N]``.

Exit status: 0 when every assertion passes, 1 when one fails, 2 for an
invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .acceptance import SUITES, run_criteria
from .config import DEFAULTS, ConfigError, RunConfig, load_config

SCHEMA_VERSION = 1
SUBCOMMANDS = ["eval", "identities", "fuglede", "sharpness", "select", "cone", "oracle", "all"]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    return x


def _eval_graph(cfg: RunConfig):
    """Graph and report for the ``eval`` subcommand."""
    from .capillarity import cap_report
    from .cones import ConeSpec, cone_grid, cone_report
    from .fuglede import zonal_fourier
    from .geometry import CapParams, RadialGraph, ScalarField, make_grid, w_values

    n = cfg["n"][0]
    res = cfg["grid.resolution"]
    if cfg["eval.target"] == "cone":
        spec = ConeSpec(n, cfg["cone.omega"][0])
        grid = cone_grid(spec, res)
        base = np.ones(grid.shape)
    else:
        params = CapParams(n, cfg["lambda"][0])
        grid = make_grid(params, resolution=res)
        base = w_values(params.lam, grid.height)
    kind = cfg["eval.graph"]
    if kind == "bubble":
        values = base
    elif kind == "perturbed":
        values = base * (1.0 + zonal_fourier(grid, cfg["eval.coeffs"]))
    else:
        try:
            text = Path(kind).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read graph file: {exc}") from None
        values = np.array([float(t) for t in text.replace(",", " ").split()])
        if values.shape != grid.shape:
            raise ConfigError(f"graph file must hold {grid.shape[0]} values for this grid")
    if np.any(values <= 0):
        raise ConfigError("graph values must be positive")
    f = RadialGraph(ScalarField(grid, values))
    if cfg["eval.target"] == "cone":
        return cone_report(f, spec).as_dict()
    return cap_report(f, params, cfg["grid.azimuth"]).as_dict()


def _write_csv(path: Path, rows: list) -> None:
    fields = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for k, v in r.items()})


def _write_plot(path: Path, groups: list) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "capiso"
    fig, axes = plt.subplots(1, len(groups), figsize=(5.5 * len(groups), 4.5), squeeze=False)
    for ax, (title, xlabel, ylabel, series) in zip(axes[0], groups):
        for label, xs, ys, slope in series:
            if not xs:
                continue
            tag = f"{label} (slope {slope:.3f})" if np.isfinite(slope) else f"{label} (at floor)"
            ax.loglog(xs, ys, "o-", ms=3, label=tag)
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=7)
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    keys = "\n".join(f"  {k} (default {v[1]!r}): {v[2]}" for k, v in DEFAULTS.items())
    ap = argparse.ArgumentParser(
        prog="capiso",
        description="Numerical checks of quantitative isoperimetric inequalities "
                    "for capillarity problems and convex cones.",
        epilog="config keys:\n" + keys,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", default=None, help="key = value file (defaults if omitted)")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--resolution", type=int, default=None, help="polar grid intervals")
    return ap


def run(subcommand: str, cfg: RunConfig, echo=print) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    report = {"schema_version": SCHEMA_VERSION, "subcommand": subcommand,
              "seed": cfg["seed"], "config": cfg.values}
    if subcommand == "eval":
        report["report"] = _eval_graph(cfg)
        finite = all(v is None or not isinstance(v, float) or math.isfinite(v)
                     for v in report["report"].values())
        report["passed"] = finite
        results = []
    else:
        results = run_criteria(SUITES[subcommand], cfg, echo=echo)
        report["criteria"] = [c.as_dict() for c in results]
        report["failed"] = [c.id for c in results if not c.passed]
        report["passed"] = not report["failed"]
    (out / "report.json").write_text(json.dumps(_jsonable(report), indent=2) + "\n",
                                     encoding="utf-8")
    rows = [{"criterion": c.id, **r} for c in results for r in c.rows]
    if rows:
        _write_csv(out / "sweep.csv", rows)
    groups = [g for c in results for g in c.series]
    if groups and cfg["plot"]:
        _write_plot(out / "plot.svg", groups)
    return 0 if report["passed"] else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        over = {}
        if args.seed is not None:
            over["seed"] = args.seed
        if args.out is not None:
            over["out"] = args.out
        if args.resolution is not None:
            over["grid__resolution"] = args.resolution
        if over:
            cfg = cfg.with_overrides(**over)
    except ConfigError as exc:
        print(f"capiso: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        code = run(args.subcommand, cfg)
    except ConfigError as exc:
        print(f"capiso: invalid configuration: {exc}", file=sys.stderr)
        return 2
    print(f"report written to {Path(cfg['out']) / 'report.json'}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
