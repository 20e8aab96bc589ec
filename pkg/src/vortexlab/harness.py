"""Experiment configs, presets and the runners behind the ``vortexlab`` CLI.

Every output file embeds the config echo and the package version.  Time
series go to CSV, sweep entries to JSON lines, reports to JSON.  Files are
written to a temporary name in the target directory and renamed into place.
"""

from __future__ import annotations

import copy
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .analysis import (
    check_rotation_invariance,
    classify,
    find_stationary_points,
    fit_log_law,
    fit_power_law,
    locate_unstable_example,
)
from .conformal import ConformalMap, DomainModel, require_usable
from .dynamics import (
    VortexSystem,
    hamiltonian,
    init_blob,
    measure_exit_time,
    simulate_single_vortex,
    step_point_vortices,
    unstable_exit_experiment,
)
from .errors import PhysicalEvent, VortexLabError
from .greens import lemdev_ratio

log = logging.getLogger("vortexlab")

EXPERIMENTS = (
    "stationary_scan", "classify", "single_vortex", "point_vortices", "blob_confinement",
    "exit_sweep", "unstable_sweep", "lemdev_scan", "boundary_export", "rotation_check",
)
CONFINEMENT = ("blob_confinement", "exit_sweep")
SWEEPS = ("exit_sweep", "unstable_sweep")

EXIT_OK, EXIT_VALIDATION, EXIT_PHYSICAL, EXIT_INTERNAL = 0, 2, 3, 4


class ConfigError(VortexLabError, ValueError):
    pass


# ----------------------------------------------------------------------
# named curves and example maps
def fig5_curve_a(x):
    """``b(x) = (2 + cos 8 pi x) exp(2 pi i x)``: invariant under quarter turns."""
    x = np.asarray(x, dtype=float)
    return (2 + np.cos(8 * np.pi * x)) * np.exp(2j * np.pi * x)


def fig5_curve_b(x):
    """``b(x) = exp(2 pi i (x + cos(6 pi x)/8)) / (3/2 + cos(6 pi x)/4)``."""
    x = np.asarray(x, dtype=float)
    c = np.cos(6 * np.pi * x)
    return np.exp(2j * np.pi * (x + c / 8)) / (1.5 + 0.25 * c)


CURVES: dict[str, tuple[Callable, int]] = {
    "fig5a": (fig5_curve_a, 4),
    "fig5b": (fig5_curve_b, 3),
}

FIGURE_MAPS: dict[str, dict] = {
    "fig2-left": {"kind": "identity", "label": "fig2-left"},
    "fig2-right": {"kind": "polynomial", "coeffs": [[40, 0], [0, 0], [0, 0], [1, 0]],
                   "label": "fig2-right"},
    "fig3-left": {"kind": "polynomial", "coeffs": [[40, 0]] + [[0, 0]] * 5 + [[1, 0]],
                  "label": "fig3-left"},
    "fig3-right": {"kind": "polynomial",
                   "coeffs": [[50, 0], [0, 0], [0, 0], [1, 1]] + [[0, 0]] * 18 + [[1, 0]],
                   "label": "fig3-right"},
    "fig4-left": {"kind": "polynomial",
                  "coeffs": [[20, 0], [0, 0], [0, 0], [1, 2], [0, 0], [0, 0], [1, 0]],
                  "label": "fig4-left"},
    "fig4-right": {"kind": "polynomial",
                   "coeffs": [[19, 0]] + [[0, 0]] * 5 + [[0, 1], [0, 0], [0, 0], [1, 0]],
                   "label": "fig4-right"},
}


def sample_boundary(map_or_curve: ConformalMap | Callable | str, samples: int) -> np.ndarray:
    """Closed boundary polyline: ``f(exp(2 pi i k/M))`` for maps, ``b(k/M)`` for
    parametric curves, ``k = 0..M``."""
    if samples < 16:
        raise ValueError("need at least 16 boundary samples")
    if isinstance(map_or_curve, str):
        map_or_curve = CURVES[map_or_curve][0]
    if isinstance(map_or_curve, ConformalMap):
        return map_or_curve.boundary(samples)
    pts = np.asarray(map_or_curve(np.arange(samples + 1) / samples), dtype=complex)
    pts[-1] = pts[0]
    return pts


def polyline_is_simple(points: np.ndarray) -> bool:
    from shapely.geometry import LinearRing

    p = np.asarray(points, dtype=complex)
    if p[0] == p[-1]:
        p = p[:-1]
    return bool(LinearRing(np.column_stack([p.real, p.imag])).is_simple)


# ----------------------------------------------------------------------
# config
NUMERIC_DEFAULTS: dict[str, Any] = {
    "dt": 1e-3,
    "horizon": 1.0,
    "record_every": 100,
    "n_particles": 200,
    "epsilon": 0.05,
    "epsilons": [],
    "beta": 0.45,
    "rng_seed": 0,
    "tail_radii": [],
    "profile": "uniform_disk",
    "total_mass": 1.0,
    "nu": 2.0,
    "rho": 0.0,
    "horizon_exponent": None,
}


@dataclass
class ExperimentConfig:
    domain: dict
    experiment: str
    numeric: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        num = dict(NUMERIC_DEFAULTS)
        num.update(self.numeric)
        self.numeric = num
        out = {"prefix": "vortexlab-out", "format": "csv"}
        out.update(self.output)
        self.output = out

    def to_dict(self) -> dict:
        return {"domain": self.domain, "experiment": self.experiment, "numeric": self.numeric,
                "output": self.output, "params": self.params}

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - {"domain", "experiment", "numeric", "output", "params"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(domain=raw.get("domain", {"kind": "identity"}),
                  experiment=raw.get("experiment", ""), numeric=raw.get("numeric", {}),
                  output=raw.get("output", {}), params=raw.get("params", {}))
        validate(cfg)
        return cfg

    def build_map(self) -> ConformalMap:
        return ConformalMap.from_dict(self.domain)


def validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; expected one of {EXPERIMENTS}")
    try:
        cfg.build_map()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad domain spec: {exc}") from None
    num = cfg.numeric
    unknown = set(num) - set(NUMERIC_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown numeric keys: {sorted(unknown)}")
    if not (isinstance(num["dt"], (int, float)) and num["dt"] > 0):
        raise ConfigError("numeric.dt must be > 0")
    if cfg.experiment in CONFINEMENT and not 0 < num["beta"] < 0.5:
        raise ConfigError("numeric.beta must lie in (0, 1/2) for confinement experiments")
    if cfg.experiment in SWEEPS:
        eps = num["epsilons"]
        if not eps:
            raise ConfigError("numeric.epsilons must be a non-empty list for sweeps")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("numeric.epsilons must be strictly decreasing")
        if any(e <= 0 for e in eps):
            raise ConfigError("numeric.epsilons must be positive")
    if cfg.output["format"] not in ("csv", "jsonl"):
        raise ConfigError("output.format must be csv or jsonl")
    if int(num["record_every"]) < 0:
        raise ConfigError("numeric.record_every must be >= 0")


def _set_dotted(d: dict, path: str, value: Any) -> None:
    keys = path.split(".")
    cur = d
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
    cur[keys[-1]] = value


def apply_overrides(cfg: ExperimentConfig, overrides: Sequence[str]) -> ExperimentConfig:
    """Apply ``key=value`` overrides (dotted paths, JSON-parsed values)."""
    raw = copy.deepcopy(cfg.to_dict())
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, val = item.split("=", 1)
        try:
            parsed = json.loads(val)
        except json.JSONDecodeError:
            parsed = val
        _set_dotted(raw, key.strip(), parsed)
    return ExperimentConfig.parse(json.dumps(raw))


# ----------------------------------------------------------------------
# presets
def _preset_table() -> dict[str, dict]:
    quartic = FIGURE_MAPS["fig2-right"]
    return {
        # circular orbit of a single vortex in the disk (closed-form period 3 pi^2)
        "disk-orbit": {
            "domain": {"kind": "identity", "label": "disk"},
            "experiment": "single_vortex",
            "numeric": {"dt": 1e-3, "horizon": 3 * math.pi**2, "record_every": 100},
            "params": {"z0": [0.5, 0.0]},
        },
        # boundaries of the valid domains f(z) = z and 40z + z^4
        "fig2-boundaries": {
            "domain": quartic,
            "experiment": "boundary_export",
            "params": {"samples": 512, "maps": ["fig2-left", "fig2-right"]},
        },
        # two rotation-invariant boundary curves
        "fig5-curves": {
            "domain": {"kind": "identity", "label": "disk"},
            "experiment": "rotation_check",
            "params": {"samples": 1200, "curves": ["fig5a", "fig5b"]},
        },
        # power-law confinement setting on a valid domain
        "thm-power-confinement": {
            "domain": quartic,
            "experiment": "blob_confinement",
            "numeric": {"dt": 2e-3, "epsilon": 0.05, "beta": 0.45, "n_particles": 200,
                        "horizon_exponent": 0.6, "record_every": 50,
                        "tail_radii": [0.01, 0.02, 0.05]},
        },
        # logarithmic escape from an unstable stationary point
        "unstable-log-exit": {
            "domain": {"kind": "polynomial", "label": "peanut-a0.40", "allow_unproven": True,
                       "coeffs": _peanut_coeffs(0.40)},
            "experiment": "unstable_sweep",
            "numeric": {"dt": 1e-2, "horizon": 500.0, "beta": 0.5,
                        "epsilons": [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]},
        },
        # difference-quotient rate near a valid stationary point (triangle)
        "lemdev-rate": {
            "domain": {"kind": "regular_polygon", "n": 3, "label": "polygon-3"},
            "experiment": "lemdev_scan",
            "numeric": {"rng_seed": 2024},
            "params": {"deltas": [0.2, 0.1, 0.05, 0.025], "samples": 2000},
        },
    }


def _peanut_coeffs(a: float, terms: int = 24) -> list[list[float]]:
    out = [[0.0, 0.0] for _ in range(2 * terms + 1)]
    for k in range(terms + 1):
        out[2 * k] = [a**k, 0.0]
    return out


PRESETS = tuple(_preset_table())


def preset(name: str) -> ExperimentConfig:
    table = _preset_table()
    if name not in table:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    raw = table[name]
    raw.setdefault("output", {"prefix": name, "format": "csv"})
    return ExperimentConfig.parse(json.dumps(raw))


# ----------------------------------------------------------------------
# output
def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _csv(cfg: ExperimentConfig, header: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
    lines = [f"# vortexlab {__version__}",
             "# config: " + json.dumps(cfg.to_dict(), sort_keys=True),
             ",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _g(v) for v in row))
    return "\n".join(lines) + "\n"


def _json(cfg: ExperimentConfig, payload: dict) -> str:
    doc = {"version": __version__, "config": cfg.to_dict(), **payload}
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _jsonl(cfg: ExperimentConfig, entries: Sequence[dict], footer: dict | None = None) -> str:
    lines = [json.dumps({"type": "header", "version": __version__, "config": cfg.to_dict()},
                        sort_keys=True)]
    lines += [json.dumps({"type": "entry", **e}, sort_keys=True, default=_jsonable)
              for e in entries]
    if footer is not None:
        lines.append(json.dumps({"type": "fit", **footer}, sort_keys=True, default=_jsonable))
    return "\n".join(lines) + "\n"


def _jsonable(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o)}")


def diagnostics_csv_header(tail_radii: Sequence[float]) -> list[str]:
    return ["t", "Bx", "By", "I", "R", "H", "m4", "m8"] + [
        f"tail_r{i + 1}" for i in range(len(tail_radii))]


def diagnostics_rows(records) -> list[list[float]]:
    return [[r.t, r.B.real, r.B.imag, r.I, r.R, r.H, r.m4, r.m8, *r.tail_mass] for r in records]


@dataclass
class RunOutcome:
    status: int
    summary: dict
    files: list[Path]


def _cplx(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(float(v[0]), float(v[1]))


# ----------------------------------------------------------------------
# experiments
def _exp_stationary_scan(cfg, fmap, prefix, threads):
    grid = cfg.params.get("grid", {"radial": 8, "angular": 16})
    reps = find_stationary_points(fmap, grid.get("radial", 8), grid.get("angular", 16))
    path = prefix.with_suffix(".json")
    _atomic_write(path, _json(cfg, {"points": [r.to_dict() for r in reps]}))
    return {"points": len(reps), "classes": [r.classification for r in reps]}, [path], None


def _exp_classify(cfg, fmap, prefix, threads):
    loc = _cplx(cfg.params.get("location", [fmap.x0.real, fmap.x0.imag]))
    rep = classify(fmap, loc)
    path = prefix.with_suffix(".json")
    _atomic_write(path, _json(cfg, {"report": rep.to_dict()}))
    return {"class": rep.classification}, [path], None


def _exp_single_vortex(cfg, fmap, prefix, threads):
    require_usable(fmap)
    num = cfg.numeric
    dom = DomainModel.at(fmap)
    z0 = _cplx(cfg.params.get("z0", [0.0, 0.0]))
    tr = simulate_single_vortex(dom, z0, num["dt"], num["horizon"], max(1, int(num["record_every"])))
    rows = [[t, z.real, z.imag, g] for t, z, g in zip(tr.times, tr.positions, tr.robin)]
    path = prefix.with_suffix(".csv")
    _atomic_write(path, _csv(cfg, ["t", "x", "y", "robin"], rows))
    drift = float(np.max(np.abs(tr.robin - tr.robin[0])))
    return {"samples": len(rows), "robin_drift": drift}, [path], None


def _exp_point_vortices(cfg, fmap, prefix, threads):
    require_usable(fmap)
    num = cfg.numeric
    dom = DomainModel.at(fmap)
    pos = [_cplx(p) for p in cfg.params["positions"]]
    sys = VortexSystem(np.array(pos), np.array(cfg.params["masses"], dtype=float))
    steps = int(math.floor(num["horizon"] / num["dt"] + 1e-9))
    every = max(1, int(num["record_every"]))
    header = ["t"] + [f"{c}{i + 1}" for i in range(len(pos)) for c in ("x", "y")] + ["H"]

    def row(s):
        return [s.time, *[v for z in s.positions for v in (z.real, z.imag)],
                hamiltonian(dom, s.positions, s.masses)]

    rows = [row(sys)]
    event = None
    try:
        for k in range(1, steps + 1):
            sys = step_point_vortices(dom, sys, num["dt"], threads)
            if k % every == 0 or k == steps:
                rows.append(row(sys))
    except PhysicalEvent as exc:
        event = str(exc)
    path = prefix.with_suffix(".csv")
    _atomic_write(path, _csv(cfg, header, rows))
    h = [r[-1] for r in rows]
    return {"samples": len(rows), "H_rel_drift": abs(h[-1] - h[0]) / abs(h[0])}, [path], event


def _horizon_for(num: dict, eps: float) -> float:
    if num.get("horizon_exponent") is not None:
        return eps ** (-float(num["horizon_exponent"]))
    return float(num["horizon"])


def _blob_run(cfg, fmap, eps: float, threads: int, record_every: int):
    num = cfg.numeric
    dom = DomainModel.at(fmap)
    x0 = _cplx(cfg.params.get("x0", [dom.x0.real, dom.x0.imag]))
    if x0 != dom.x0:
        dom = DomainModel.at_point(fmap, x0)
    blob = init_blob(dom, dom.x0, eps, num["beta"], int(num["n_particles"]), num["total_mass"],
                     num["profile"], int(num["rng_seed"]), num["nu"])
    return dom, blob, measure_exit_time(dom, blob, num["dt"], _horizon_for(num, eps), threads,
                                        record_every, num["tail_radii"], num["rho"])


def _exp_blob_confinement(cfg, fmap, prefix, threads):
    require_usable(fmap)
    num = cfg.numeric
    every = max(1, int(num["record_every"]))
    event = None
    try:
        dom, blob, run = _blob_run(cfg, fmap, num["epsilon"], threads, every)
    except PhysicalEvent as exc:
        return {"event": str(exc)}, [], str(exc)
    csv_path = prefix.with_suffix(".csv")
    _atomic_write(csv_path, _csv(cfg, diagnostics_csv_header(num["tail_radii"]),
                                 diagnostics_rows(run.records)))
    eps = num["epsilon"]
    summary = {
        "exit": run.result.to_dict(),
        "n_particles": len(blob.positions),
        "max_I": max(r.I for r in run.records),
        "max_B_offset": max(abs(r.B - blob.x0) for r in run.records),
        "max_R": max(r.R for r in run.records),
        "I_over_eps2": max(r.I for r in run.records) / eps**2,
    }
    json_path = prefix.with_suffix(".json")
    _atomic_write(json_path, _json(cfg, {"summary": summary, "blob_metadata": blob.metadata}))
    return summary, [csv_path, json_path], event


def _fan_out(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _exp_exit_sweep(cfg, fmap, prefix, threads):
    require_usable(fmap)

    def one(eps):
        try:
            _, _, run = _blob_run(cfg, fmap, eps, 1, 0)
            return run.result.to_dict()
        except PhysicalEvent as exc:
            return {"epsilon": eps, "beta": cfg.numeric["beta"], "event": str(exc),
                    "tau": exc.time}

    entries = sorted(_fan_out(one, list(cfg.numeric["epsilons"]), threads),
                     key=lambda e: -e["epsilon"])
    pts = [(e["epsilon"], e["tau"]) for e in entries if isinstance(e["tau"], float)]
    fit = None
    if len([p for p in pts if math.isfinite(p[1])]) >= 3:
        fit = fit_power_law(pts).to_dict()
    path = prefix.with_suffix(".jsonl")
    _atomic_write(path, _jsonl(cfg, entries, fit))
    return {"entries": len(entries), "fit": fit}, [path], None


def _exp_unstable_sweep(cfg, fmap, prefix, threads):
    require_usable(fmap)
    num = cfg.numeric
    if "x0" in cfg.params:
        x0 = _cplx(cfg.params["x0"])
    else:
        found = locate_unstable_example([fmap])
        if found is None:
            raise ConfigError(f"no unstable stationary point in domain {fmap.label!r}")
        x0 = found[1].location
    dom = DomainModel.at_point(fmap, x0)

    def one(eps):
        return unstable_exit_experiment(dom, x0, [eps], num["beta"], num["dt"],
                                        num["horizon"])[0].to_dict()

    entries = sorted(_fan_out(one, list(num["epsilons"]), threads), key=lambda e: -e["epsilon"])
    pts = [(e["epsilon"], e["tau"] if isinstance(e["tau"], float) else math.inf) for e in entries]
    fit = fit_log_law(pts).to_dict() if sum(math.isfinite(p[1]) for p in pts) >= 3 else None
    path = prefix.with_suffix(".jsonl")
    _atomic_write(path, _jsonl(cfg, entries, fit))
    return {"entries": len(entries), "fit": fit, "x0": [x0.real, x0.imag]}, [path], None


def _exp_lemdev_scan(cfg, fmap, prefix, threads):
    dom = DomainModel.at(fmap, fmap.invert(_cplx(cfg.params["x0"]))) if "x0" in cfg.params \
        else DomainModel.at(fmap)
    deltas = cfg.params.get("deltas", [0.2, 0.1, 0.05, 0.025])
    samples = int(cfg.params.get("samples", 2000))
    seed = int(cfg.numeric["rng_seed"])
    entries = []
    for d in deltas:
        r = lemdev_ratio(dom, d, samples, seed)
        entries.append({"delta": d, "sup_ratio": r.sup_ratio, "limit_coeff": r.limit_coeff,
                        "expected_limit": r.expected_limit, "samples": samples})
    ratios = [b["sup_ratio"] / a["sup_ratio"] for a, b in zip(entries, entries[1:])]
    path = prefix.with_suffix(".jsonl")
    _atomic_write(path, _jsonl(cfg, entries))
    return {"entries": len(entries), "successive_ratios": ratios}, [path], None


def _exp_boundary_export(cfg, fmap, prefix, threads):
    samples = int(cfg.params.get("samples", 512))
    targets: list[tuple[str, ConformalMap | str]] = []
    for name in cfg.params.get("maps", []):
        targets.append((name, ConformalMap.from_dict(FIGURE_MAPS[name])))
    for name in cfg.params.get("curves", []):
        targets.append((name, name))
    if not targets:
        targets.append((fmap.label or "domain", fmap))
    files, simple = [], {}
    for name, obj in targets:
        pts = sample_boundary(obj, samples)
        path = prefix.parent / f"{prefix.name}-{name}.csv"
        _atomic_write(path, _csv(cfg, ["k", "x", "y"],
                                 [[str(k), z.real, z.imag] for k, z in enumerate(pts)]))
        files.append(path)
        simple[name] = polyline_is_simple(pts)
    return {"polylines": len(files), "simple": simple}, files, None


def _exp_rotation_check(cfg, fmap, prefix, threads):
    samples = int(cfg.params.get("samples", 1200))
    results = {}
    for name in cfg.params.get("curves", ["fig5a", "fig5b"]):
        fn, p_default = CURVES[name]
        p = int(cfg.params.get("p", {}).get(name, p_default)) if isinstance(
            cfg.params.get("p"), dict) else int(cfg.params.get("p", p_default))
        pts = sample_boundary(fn, samples)[:-1]
        results[name] = {"p": p, "invariant": check_rotation_invariance(pts, p),
                         "simple": polyline_is_simple(sample_boundary(fn, samples))}
    path = prefix.with_suffix(".json")
    _atomic_write(path, _json(cfg, {"results": results}))
    return {"results": results}, [path], None


_DISPATCH = {
    "stationary_scan": _exp_stationary_scan,
    "classify": _exp_classify,
    "single_vortex": _exp_single_vortex,
    "point_vortices": _exp_point_vortices,
    "blob_confinement": _exp_blob_confinement,
    "exit_sweep": _exp_exit_sweep,
    "unstable_sweep": _exp_unstable_sweep,
    "lemdev_scan": _exp_lemdev_scan,
    "boundary_export": _exp_boundary_export,
    "rotation_check": _exp_rotation_check,
}


def run(config: ExperimentConfig, threads: int = 1, output_prefix: str | None = None) -> RunOutcome:
    """Run one experiment; physical events yield status 3 with the event recorded."""
    validate(config)
    prefix = Path(output_prefix or config.output["prefix"])
    fmap = config.build_map()
    log.info("running %s on %s", config.experiment, fmap.label or fmap.kind)
    summary, files, event = _DISPATCH[config.experiment](config, fmap, prefix, threads)
    status = EXIT_PHYSICAL if event else EXIT_OK
    summary = {"experiment": config.experiment, "status": status,
               "files": [str(f) for f in files], **summary}
    if event:
        summary["event"] = event
    return RunOutcome(status, summary, files)
