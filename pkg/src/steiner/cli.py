"""Command line: ``steiner run|plot|inspect|selftest``.

Exit codes: 0 success, 1 I/O or configuration error, 2 invariant violation
(a gap below ``-epsilon``, a chain step that increases, a barycentre of a
symmetral further than half a cell from the axis, a failed selftest).
"""

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .config import ConfigError, build_integrand, build_surface, load_config
from .generators import generate
from .grid import FormatError, Grid, GridFunction, VoxelSet, load, read_header
from .plotting import PLOT_KINDS, PlotError, plot_csv
from .rearrange import steiner_rearrange, steiner_symmetrize_set
from .selftest import run_selftest

EXIT_OK, EXIT_IO, EXIT_INVARIANT = 0, 1, 2


class InvariantViolation(Exception):
    pass


# output helpers ----------------------------------------------------------


def _atomic_write(path, write):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _write_json(path, payload):
    def w(tmp):
        with open(tmp, "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")

    _atomic_write(path, w)


def _write_csv(path, header, rows):
    _atomic_write(path, lambda tmp: dg.write_csv(tmp, header, rows))


def _write_svg(csv_path, kind, svg_path):
    _atomic_write(svg_path, lambda tmp: plot_csv(csv_path, kind, tmp))


# building inputs ----------------------------------------------------------


def _grid(cfg, size=None):
    g = cfg.grid
    dims = list(g["dims"]) if size is None else [size] * len(g["dims"])
    if "extent" in g:
        spacing = [e / d for e, d in zip(g["extent"], dims)]
    else:
        spacing = g["spacing"]
    try:
        return Grid(tuple(dims), tuple(spacing), g["k"])
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None


def build_object(cfg, size=None):
    """The GridFunction or VoxelSet described by ``[grid]`` and ``[generator]``."""
    gen = cfg.generator
    if "file" in gen:
        try:
            return load(gen["file"])
        except FormatError as exc:
            raise ConfigError("generator.file", f"{gen['file']}: {exc}") from None
    params = dict(gen["params"])
    if gen["name"] == "random_smooth":
        params.setdefault("seed", cfg.seed)
    try:
        return generate(gen["name"], _grid(cfg, size), **params)
    except TypeError as exc:
        raise ConfigError("generator.params", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("generator.params", str(exc)) from None


def _need_function(obj, kind):
    if not isinstance(obj, GridFunction):
        raise ConfigError("generator", f"kind {kind!r} needs a function; the generator gave a set")
    return obj


def _need_set(obj, kind):
    if not isinstance(obj, VoxelSet):
        raise ConfigError("generator", f"kind {kind!r} needs a set; use params.output = \"set\"")
    return obj


def _n_x(obj):
    return obj.grid.n - obj.grid.k


# experiments ----------------------------------------------------------------


GAP_HEADER = ["functional", "scheme", "h", "value_original", "value_symmetrized", "gap"]


def _gap_row(rep):
    d = rep.to_dict()
    return [d[c] for c in GAP_HEADER]


def _check_gap(rep, eps):
    if rep.gap < -eps:
        raise InvariantViolation(f"gap {rep.gap!r} below -epsilon = {-eps!r}")


def _slice_rows(u):
    """Rows ``(i, j, u, u_sigma)`` of a 2-D cut through the middle of the grid."""
    us = steiner_rearrange(u)
    a, b = u.values, us.values
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    while a.ndim > 2:
        mid = a.shape[0] // 2
        a, b = a[mid], b[mid]
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            yield [i, j, float(a[i, j]), float(b[i, j])]


def _gap_experiment(cfg, obj):
    if cfg.kind == "polya_szego":
        u = _need_function(obj, cfg.kind)
        f = build_integrand(cfg.integrand, _n_x(u), cfg.seed)
        return dg.polya_szego_report(u, f, cfg.scheme["gradient"])
    E = _need_set(obj, cfg.kind)
    s = cfg.scheme
    return dg.perimeter_report(E, build_surface(cfg.surface), s["perimeter"], s["width"],
                               boundary=s["boundary"])


def run_gap(cfg):
    obj = build_object(cfg)
    rep = _gap_experiment(cfg, obj)
    out = cfg.outputs
    if "csv" in out:
        _write_csv(out["csv"], GAP_HEADER, [_gap_row(rep)])
    if "json" in out:
        _write_json(out["json"], rep.to_dict())
    if "slice_csv" in out:
        u = _need_function(obj, cfg.kind)
        _write_csv(out["slice_csv"], ["i", "j", "u", "u_sigma"], _slice_rows(u))
        if "svg" in out:
            _write_svg(out["slice_csv"], "heatmap", out["svg"])
    summary = f"{cfg.kind}: h={rep.h!r} original={rep.value_original!r} " \
              f"symmetrized={rep.value_symmetrized!r} gap={rep.gap!r}"
    return summary, lambda: _check_gap(rep, cfg.epsilon)


def run_chain(cfg):
    u = _need_function(build_object(cfg), cfg.kind)
    f = build_integrand(cfg.integrand, _n_x(u), cfg.seed)
    rep = dg.chain_report(u, f, cfg.scheme["gradient"])
    inc = [0.0] + rep.increments()
    rows = [[lab, val, d] for lab, val, d in zip(rep.labels, rep.values, inc)]
    if "csv" in cfg.outputs:
        _write_csv(cfg.outputs["csv"], ["label", "value", "increment"], rows)
    if "json" in cfg.outputs:
        _write_json(cfg.outputs["json"], {"h": rep.h, "scheme": rep.scheme, "labels": rep.labels,
                                          "values": rep.values})

    def check():
        worst = max(inc)
        if worst > cfg.epsilon:
            raise InvariantViolation(f"chain increases by {worst!r} > epsilon = {cfg.epsilon!r}")

    return f"chain: h={rep.h!r} values={rep.values!r}", check


def run_equality_scan(cfg):
    obj = build_object(cfg)
    target = cfg.scan["target"]
    if target == "symmetrized":
        obj = steiner_symmetrize_set(obj) if isinstance(obj, VoxelSet) else steiner_rearrange(obj)
    levels = None
    if isinstance(obj, GridFunction):
        if cfg.thresholds is None:
            raise ConfigError("thresholds", "required when the scanned object is a function")
        levels = cfg.thresholds
    rep = dg.slice_analysis(obj, levels, cfg.scheme["perimeter"], cfg.scheme["width"])
    cond = dg.condition_report(obj, width=cfg.scheme["width"])
    if "csv" in cfg.outputs:
        _write_csv(cfg.outputs["csv"], rep.header(), rep.rows())
        if "svg" in cfg.outputs:
            _write_svg(cfg.outputs["csv"], "beta", cfg.outputs["svg"])
    if "json" in cfg.outputs:
        _write_json(cfg.outputs["json"], {"target": target, "conditions": cond.to_dict(),
                                          "rows": len(rep), "max_beta": rep.max_beta()})

    def check():
        if target != "symmetrized" or not len(rep):
            return
        half = np.asarray(rep.y_spacing) / 2
        excess = np.abs(rep.beta) - half
        if np.any(excess > 1e-12 * half):
            raise InvariantViolation(f"barycentre of the symmetral exceeds h/2 by {float(excess.max())!r}")

    return f"equality_scan: target={target} sections={len(rep)} max_beta={rep.max_beta()!r}", check


def run_lambda(cfg):
    u = _need_function(build_object(cfg), cfg.kind)
    if cfg.thresholds is None:
        raise ConfigError("thresholds", "missing required key")
    direction = cfg.lam.get("direction", "t")
    try:
        rep = dg.verify_lambda_derivatives(u, direction, cfg.thresholds, cfg.lam.get("delta"))
    except ValueError as exc:
        raise ConfigError("lambda", str(exc)) from None
    if "csv" in cfg.outputs:
        _write_csv(cfg.outputs["csv"], rep.header(), rep.rows())
    if "json" in cfg.outputs:
        _write_json(cfg.outputs["json"], {"direction": str(direction), "delta": rep.delta,
                                          "max_error": rep.max_error(),
                                          "flagged": int(rep.flagged.sum())})
    return (f"lambda_derivatives: direction={direction} delta={rep.delta!r} "
            f"max_error={rep.max_error()!r} flagged={int(rep.flagged.sum())}"), None


def run_coarea(cfg):
    u = _need_function(build_object(cfg), cfg.kind)
    mass = dg.coarea_irregularity_probe(u, cfg.thresholds)
    crit = dg.critical_measure(u)
    if "csv" in cfg.outputs:
        _write_csv(cfg.outputs["csv"], ["h", "critical_measure", "irregularity"], [[u.grid.h, crit, mass]])
    if "json" in cfg.outputs:
        _write_json(cfg.outputs["json"], {"h": u.grid.h, "critical_measure": crit, "irregularity": mass})

    def check():
        if mass < 0:
            raise InvariantViolation(f"negative irregularity mass {mass!r}")

    return f"coarea_probe: critical_measure={crit!r} irregularity={mass!r}", check


def run_sweep(cfg):
    base = cfg.sweep["base"]
    rows, reports = [], []
    sub = type(cfg)(**{**cfg.__dict__, "kind": base})
    for size in cfg.sweep["sizes"]:
        rep = _gap_experiment(sub, build_object(cfg, size))
        reports.append(rep)
        rows.append([size] + _gap_row(rep))
    header = ["cells"] + GAP_HEADER
    if "csv" in cfg.outputs:
        _write_csv(cfg.outputs["csv"], header, rows)
        if "svg" in cfg.outputs:
            _write_svg(cfg.outputs["csv"], "gap", cfg.outputs["svg"])
    if "json" in cfg.outputs:
        _write_json(cfg.outputs["json"], {"base": base, "rows": [dict(zip(header, r)) for r in rows]})

    def check():
        for rep in reports:
            _check_gap(rep, cfg.epsilon)

    gaps = ", ".join(f"{r.h!r}:{r.gap!r}" for r in reports)
    return f"convergence_sweep({base}): {gaps}", check


RUNNERS = {
    "polya_szego": run_gap,
    "perimeter": run_gap,
    "chain": run_chain,
    "equality_scan": run_equality_scan,
    "lambda_derivatives": run_lambda,
    "coarea_probe": run_coarea,
    "convergence_sweep": run_sweep,
}


# verbs -----------------------------------------------------------------------


def cmd_run(args):
    try:
        cfg = load_config(args.config)
        summary, check = RUNNERS[cfg.kind](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, PlotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary)
    if check is not None:
        try:
            check()
        except InvariantViolation as exc:
            print(f"invariant violated: {exc}", file=sys.stderr)
            return EXIT_INVARIANT
    return EXIT_OK


def cmd_plot(args):
    out = args.output or str(Path(args.csv).with_suffix(".svg"))
    try:
        _write_svg(args.csv, args.kind, out)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(out)
    return EXIT_OK


def cmd_inspect(args):
    try:
        with open(args.file, "rb") as fh:
            buf = fh.read()
        kind, grid, off = read_header(buf)
        obj = load(args.file)
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except FormatError as exc:
        print(f"error: {args.file}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"kind: {'function' if isinstance(obj, GridFunction) else 'set'}")
    print(f"n: {grid.n}  k: {grid.k}  t-axis: {'yes' if grid.has_t_axis else 'no'}")
    print(f"dims: {list(grid.dims)}")
    print(f"spacing: {[float(h) for h in grid.spacing]}")
    print(f"header bytes: {off}  total bytes: {len(buf)}")
    if isinstance(obj, GridFunction):
        v = obj.values
        print(f"min: {float(v.min())!r}  max: {float(v.max())!r}  integral: {float(v.sum() * grid.cell_volume)!r}")
    else:
        print(f"cells set: {int(obj.mask.sum())}  volume: {float(obj.volume())!r}")
    return EXIT_OK


def cmd_selftest(args):
    results = run_selftest(seed=args.seed, count=args.cases)
    for name, ok, worst in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} worst={_jsonable(worst)!r}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_INVARIANT


def build_parser():
    p = argparse.ArgumentParser(prog="steiner", description="Discrete Steiner symmetrization experiments.")
    sub = p.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", help="run one experiment described by a TOML config")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    pl = sub.add_parser("plot", help="render a report CSV as SVG")
    pl.add_argument("csv")
    pl.add_argument("--kind", choices=PLOT_KINDS, required=True)
    pl.add_argument("-o", "--output", help="SVG path (default: CSV path with .svg)")
    pl.set_defaults(func=cmd_plot)
    i = sub.add_parser("inspect", help="describe an STNR1 file")
    i.add_argument("file")
    i.set_defaults(func=cmd_inspect)
    s = sub.add_parser("selftest", help="run the invariant suite")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cases", type=int, default=200)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        # e.g. a malformed STEINER_THREADS value
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
