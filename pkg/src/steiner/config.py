"""Experiment configuration files (TOML) and their validation.

Every key is checked against a fixed schema; an unknown or misplaced key is
an error that names the key. Relative paths are resolved against the
directory of the config file.

Layout::

    kind = "polya_szego"      # see KINDS
    seed = 0
    thresholds = [0.1, 0.5]   # levels, where the kind uses them

    [grid]        dims, k, and either extent (scalar or per axis) or spacing
    [generator]   name + [generator.params], or file = "u.stnr1"
    [integrand]   type = "power" | "radial_affine" | "random_affine"
    [surface]     type = "euclidean" | "y_norm"
    [scheme]      gradient, perimeter, width, boundary
    [lambda]      direction ("t" or an x-axis index), delta
    [scan]        target = "input" | "symmetrized"
    [sweep]       base = "polya_szego" | "perimeter", sizes = [...]
    [check]       epsilon (allowed negative gap / chain increase)
    [outputs]     csv, json, svg, slice_csv
"""

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .generators import GENERATORS
from .integrand import (
    PowerIntegrand,
    RadialAffineIntegrand,
    euclidean_norm,
    random_affine,
    y_norm,
)

KINDS = (
    "polya_szego",
    "perimeter",
    "chain",
    "equality_scan",
    "lambda_derivatives",
    "coarea_probe",
    "convergence_sweep",
)

_TOP = {"kind", "seed", "thresholds", "grid", "generator", "integrand", "surface",
        "scheme", "lambda", "scan", "sweep", "check", "outputs"}
_SECTIONS = {
    "grid": {"dims", "k", "extent", "spacing"},
    "generator": {"name", "params", "file"},
    "integrand": {"type", "alpha", "beta", "p", "pieces"},
    "surface": {"type"},
    "scheme": {"gradient", "perimeter", "width", "boundary"},
    "lambda": {"direction", "delta"},
    "scan": {"target"},
    "sweep": {"base", "sizes"},
    "check": {"epsilon"},
    "outputs": {"csv", "json", "svg", "slice_csv"},
}
# sections each kind may use (grid, generator, check and outputs are always allowed)
_USES = {
    "polya_szego": {"integrand", "scheme"},
    "perimeter": {"surface", "scheme"},
    "chain": {"integrand", "scheme"},
    "equality_scan": {"scheme", "scan", "thresholds"},
    "lambda_derivatives": {"lambda", "thresholds"},
    "coarea_probe": {"thresholds"},
    "convergence_sweep": {"integrand", "surface", "scheme", "sweep"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    grid: dict
    generator: dict
    integrand: dict = None
    surface: dict = None
    scheme: dict = field(default_factory=dict)
    thresholds: list = None
    lam: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    epsilon: float = 1e-9
    outputs: dict = field(default_factory=dict)
    base_dir: Path = Path(".")


def _need(table, key, prefix):
    if key not in table:
        raise ConfigError(f"{prefix}.{key}" if prefix else key, "missing required key")
    return table[key]


def _number(v, key, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    v = float(v)
    if positive and not v > 0:
        raise ConfigError(key, f"must be positive, got {v!r}")
    return v


def _int_list(v, key):
    if not isinstance(v, list) or not v or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ConfigError(key, f"expected a non-empty list of integers, got {v!r}")
    if any(x < 1 for x in v):
        raise ConfigError(key, "entries must be positive")
    return list(v)


def _check_keys(table, allowed, prefix):
    if not isinstance(table, dict):
        raise ConfigError(prefix, "expected a table")
    for key in table:
        if key not in allowed:
            name = f"{prefix}.{key}" if prefix else key
            raise ConfigError(name, f"unknown key (allowed: {', '.join(sorted(allowed))})")


def _validate_grid(g, generator):
    if "file" in generator and not g:
        return {}
    _check_keys(g, _SECTIONS["grid"], "grid")
    dims = _int_list(_need(g, "dims", "grid"), "grid.dims")
    k = _need(g, "k", "grid")
    if isinstance(k, bool) or not isinstance(k, int) or not 1 <= k <= len(dims):
        raise ConfigError("grid.k", f"must be an integer in [1, {len(dims)}], got {k!r}")
    if ("extent" in g) == ("spacing" in g):
        raise ConfigError("grid.extent", "give exactly one of grid.extent and grid.spacing")
    out = {"dims": dims, "k": k}
    if "extent" in g:
        ext = g["extent"]
        ext = ext if isinstance(ext, list) else [ext] * len(dims)
        if len(ext) != len(dims):
            raise ConfigError("grid.extent", f"needs {len(dims)} entries")
        out["extent"] = [_number(e, "grid.extent", positive=True) for e in ext]
    else:
        sp = g["spacing"]
        if not isinstance(sp, list) or len(sp) != len(dims):
            raise ConfigError("grid.spacing", f"needs a list of {len(dims)} numbers")
        out["spacing"] = [_number(s, "grid.spacing", positive=True) for s in sp]
    return out


def _validate_generator(gen, base_dir):
    _check_keys(gen, _SECTIONS["generator"], "generator")
    if ("name" in gen) == ("file" in gen):
        raise ConfigError("generator.name", "give exactly one of generator.name and generator.file")
    if "file" in gen:
        if "params" in gen:
            raise ConfigError("generator.params", "not allowed together with generator.file")
        path = (base_dir / str(gen["file"])).resolve()
        if not path.is_file():
            raise ConfigError("generator.file", f"file not found: {path}")
        return {"file": path}
    name = gen["name"]
    if name not in GENERATORS:
        raise ConfigError("generator.name", f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    params = gen.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("generator.params", "expected a table")
    return {"name": name, "params": dict(params)}


def _validate_integrand(t):
    _check_keys(t, _SECTIONS["integrand"], "integrand")
    kind = _need(t, "type", "integrand")
    allowed = {
        "power": {"type", "alpha", "beta", "p"},
        "radial_affine": {"type", "pieces"},
        "random_affine": {"type", "pieces"},
    }
    if kind not in allowed:
        raise ConfigError("integrand.type", f"unknown integrand {kind!r}; choose from {sorted(allowed)}")
    _check_keys(t, allowed[kind], "integrand")
    if kind == "power":
        return {
            "type": kind,
            "alpha": _number(t.get("alpha", 0.0), "integrand.alpha"),
            "beta": _number(t.get("beta", 1.0), "integrand.beta"),
            "p": _number(t.get("p", 1.0), "integrand.p"),
        }
    if kind == "random_affine":
        n = t.get("pieces", 5)
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError("integrand.pieces", f"expected a positive integer, got {n!r}")
        return {"type": kind, "pieces": n}
    pieces = _need(t, "pieces", "integrand")
    if not isinstance(pieces, list):
        raise ConfigError("integrand.pieces", "expected a list of [a, b, c] triples")
    for i, piece in enumerate(pieces):
        if not (isinstance(piece, list) and len(piece) == 3 and isinstance(piece[0], list)):
            raise ConfigError(f"integrand.pieces[{i}]", "expected [[a_1, ..., a_m], b, c]")
    return {"type": kind, "pieces": pieces}


def _validate_scheme(s):
    _check_keys(s, _SECTIONS["scheme"], "scheme")
    out = {
        "gradient": s.get("gradient", "forward"),
        "perimeter": s.get("perimeter", "faces"),
        "width": _number(s.get("width", 2.0), "scheme.width", positive=True),
        "boundary": s.get("boundary", "constant"),
    }
    if out["gradient"] not in ("forward", "central"):
        raise ConfigError("scheme.gradient", f"must be 'forward' or 'central', got {out['gradient']!r}")
    if out["perimeter"] not in ("faces", "mollified"):
        raise ConfigError("scheme.perimeter", f"must be 'faces' or 'mollified', got {out['perimeter']!r}")
    if out["boundary"] not in ("constant", "nearest"):
        raise ConfigError("scheme.boundary", f"must be 'constant' or 'nearest', got {out['boundary']!r}")
    if out["width"] < 1:
        raise ConfigError("scheme.width", "must be at least 1 cell")
    return out


def parse_config(data, base_dir="."):
    """Validate a decoded TOML document and return an :class:`ExperimentConfig`."""
    base_dir = Path(base_dir)
    _check_keys(data, _TOP, "")
    kind = _need(data, "kind", "")
    if kind not in KINDS:
        raise ConfigError("kind", f"unknown experiment kind {kind!r}; choose from {list(KINDS)}")
    uses = _USES[kind]
    for key in data:
        if key in ("kind", "seed", "grid", "generator", "check", "outputs"):
            continue
        if key not in uses:
            raise ConfigError(key, f"not used by kind {kind!r}")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", f"expected a non-negative integer, got {seed!r}")

    gen = _validate_generator(_need(data, "generator", ""), base_dir)
    grid = _validate_grid(data.get("grid", {}), gen)
    if not grid and "name" in gen:
        raise ConfigError("grid", "missing required section")
    cfg = ExperimentConfig(kind=kind, seed=seed, grid=grid, generator=gen, base_dir=base_dir)

    if "integrand" in data:
        cfg.integrand = _validate_integrand(data["integrand"])
    if "surface" in data:
        _check_keys(data["surface"], _SECTIONS["surface"], "surface")
        stype = _need(data["surface"], "type", "surface")
        if stype not in ("euclidean", "y_norm"):
            raise ConfigError("surface.type", f"must be 'euclidean' or 'y_norm', got {stype!r}")
        cfg.surface = {"type": stype}
    cfg.scheme = _validate_scheme(data.get("scheme", {}))

    if "thresholds" in data:
        th = data["thresholds"]
        if not isinstance(th, list) or not th:
            raise ConfigError("thresholds", "expected a non-empty list of numbers")
        cfg.thresholds = [_number(v, "thresholds") for v in th]
    if "lambda" in data:
        _check_keys(data["lambda"], _SECTIONS["lambda"], "lambda")
        lam = dict(data["lambda"])
        d = lam.get("direction", "t")
        if not (d == "t" or (isinstance(d, int) and not isinstance(d, bool) and d >= 0)):
            raise ConfigError("lambda.direction", f"must be 't' or an x-axis index, got {d!r}")
        out = {"direction": d}
        if "delta" in lam:
            out["delta"] = _number(lam["delta"], "lambda.delta", positive=True)
        cfg.lam = out
    if "scan" in data:
        _check_keys(data["scan"], _SECTIONS["scan"], "scan")
        target = data["scan"].get("target", "input")
        if target not in ("input", "symmetrized"):
            raise ConfigError("scan.target", f"must be 'input' or 'symmetrized', got {target!r}")
        cfg.scan = {"target": target}
    else:
        cfg.scan = {"target": "input"}
    if kind == "convergence_sweep":
        sw = _need(data, "sweep", "")
        _check_keys(sw, _SECTIONS["sweep"], "sweep")
        base = _need(sw, "base", "sweep")
        if base not in ("polya_szego", "perimeter"):
            raise ConfigError("sweep.base", f"must be 'polya_szego' or 'perimeter', got {base!r}")
        cfg.sweep = {"base": base, "sizes": _int_list(_need(sw, "sizes", "sweep"), "sweep.sizes")}
        if "file" in gen:
            raise ConfigError("generator.file", "a sweep needs a builtin generator")
        if "extent" not in grid:
            raise ConfigError("grid.extent", "a sweep needs grid.extent (spacing follows from sizes)")
    if kind in ("polya_szego", "chain") or (kind == "convergence_sweep" and cfg.sweep["base"] == "polya_szego"):
        if cfg.integrand is None:
            raise ConfigError("integrand", "missing required section")
    if kind == "perimeter" or (kind == "convergence_sweep" and cfg.sweep["base"] == "perimeter"):
        if cfg.surface is None:
            raise ConfigError("surface", "missing required section")
    if "check" in data:
        _check_keys(data["check"], _SECTIONS["check"], "check")
        if "epsilon" in data["check"]:
            eps = _number(data["check"]["epsilon"], "check.epsilon")
            if eps < 0:
                raise ConfigError("check.epsilon", "must be non-negative")
            cfg.epsilon = eps
    if "outputs" in data:
        _check_keys(data["outputs"], _SECTIONS["outputs"], "outputs")
        cfg.outputs = {key: (base_dir / str(v)).resolve() for key, v in data["outputs"].items()}
    return cfg


def load_config(path):
    """Read and validate a TOML experiment file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("config", f"{path}: {exc}") from None
    return parse_config(data, path.parent)


def build_integrand(spec, n_x, seed):
    if spec["type"] == "power":
        try:
            return PowerIntegrand(spec["alpha"], spec["beta"], spec["p"])
        except ValueError as exc:
            raise ConfigError("integrand", str(exc)) from None
    if spec["type"] == "random_affine":
        return random_affine(n_x, spec["pieces"], seed)
    try:
        return RadialAffineIntegrand([tuple(p) for p in spec["pieces"]], n_x=n_x)
    except (ValueError, TypeError) as exc:
        raise ConfigError("integrand.pieces", str(exc)) from None


def build_surface(spec):
    return euclidean_norm() if spec["type"] == "euclidean" else y_norm()
