"""Configuration-driven experiment runners.

Every runner takes an :class:`ExperimentConfig`, returns its results as
Python objects and, when ``out_dir`` is given, writes CSV / JSON / DOT files
whose first line records the SHA-256 of the resolved configuration.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import crn
from .analysis import (
    ErrorReport,
    LyapunovReport,
    error_norms,
    lyapunov_decay_check,
)
from .core import (
    CopyOut,
    DensityState,
    DomainError,
    Fixed,
    FluxModel,
    Grid,
    PiecewiseConstant,
    PiecewiseLinear,
    RampConfig,
    Ring,
    StepSignal,
    cell_average_init,
)
from .exact import exact_cell_averages, rarefaction_problem, shock_problem
from .integrate import CflPolicy, Trajectory, integrate_reference, run_euler
from .schemes import SCHEMES, SemiDiscrete, make_flux

KINDS = ("simulate", "accuracy", "ring-stability", "crn-export")
PAPER_N = (10, 20, 30, 50, 70, 100, 200, 300)
PAPER_T = 2.0 / 60.0


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


@dataclass
class ExperimentConfig:
    kind: str = "accuracy"
    omega: float = 1.0
    rho_max: float = 100.0
    length: Optional[float] = None
    n_cells: Optional[list] = None
    layout: Optional[str] = None  # "node" (cells 0..N) or "cell" (cells 1..N)
    topology: Optional[str] = None
    boundary: dict = field(default_factory=lambda: {"type": "copy-out"})
    t_end: Optional[float] = None
    stride: int = 1
    integrator: Optional[str] = None  # "euler" | "rk4"
    courant: float = 0.9
    dt: Optional[float] = None
    schemes: Optional[list] = None
    lxf_diffusion: Optional[float] = None
    problem: Optional[dict] = None
    ramps: Optional[dict] = None
    seed: int = 0
    crn: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        known = {f.name for f in fields(cls)}
        flat: dict[str, Any] = {}
        for key, value in data.items():
            if key == "model":
                _expect(value, dict, "model")
                for k in value:
                    if k not in ("omega", "rho_max", "v_max"):
                        raise ConfigError(f"model.{k}: unknown field")
                flat.update({k: v for k, v in value.items() if k != "v_max"})
                if "v_max" in value:
                    flat["omega"] = value["v_max"] / value.get("rho_max", cls.rho_max)
            elif key == "grid":
                _expect(value, dict, "grid")
                for k, v in value.items():
                    if k not in ("length", "n_cells", "layout", "topology", "boundary"):
                        raise ConfigError(f"grid.{k}: unknown field")
                    flat[k] = v
            elif key == "time":
                _expect(value, dict, "time")
                for k, v in value.items():
                    if k not in ("t_end", "stride", "integrator", "courant", "dt"):
                        raise ConfigError(f"time.{k}: unknown field")
                    flat[k] = v
            elif key == "scheme":
                flat["schemes"] = [value]
            elif key in known:
                flat[key] = value
            else:
                raise ConfigError(f"{key}: unknown field")
        cfg = cls(**flat)
        return cfg.resolved()

    def resolved(self) -> "ExperimentConfig":
        """Fill kind-dependent defaults and validate every field."""
        c = ExperimentConfig(**asdict(self))
        if c.kind not in KINDS:
            raise ConfigError(f"kind: expected one of {KINDS}, got {c.kind!r}")
        _positive(c.omega, "model.omega")
        _positive(c.rho_max, "model.rho_max")
        ring = c.kind == "ring-stability"
        if c.topology is None:
            c.topology = "ring" if ring else "line"
        if c.topology not in ("line", "ring"):
            raise ConfigError(f"grid.topology: expected 'line' or 'ring', got {c.topology!r}")
        if c.n_cells is None:
            c.n_cells = list(PAPER_N) if c.kind == "accuracy" else [10 if ring else 50]
        if isinstance(c.n_cells, int):
            c.n_cells = [c.n_cells]
        if not isinstance(c.n_cells, list) or not c.n_cells or not all(
                isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in c.n_cells):
            raise ConfigError("grid.n_cells: expected a positive integer or a list of them")
        if c.length is None:
            c.length = float(c.n_cells[0]) if ring else 20.0
        _positive(c.length, "grid.length")
        if c.layout is None:
            c.layout = "node" if c.kind == "accuracy" else "cell"
        if c.layout not in ("node", "cell"):
            raise ConfigError(f"grid.layout: expected 'node' or 'cell', got {c.layout!r}")
        if c.t_end is None:
            c.t_end = 5.0 if ring else PAPER_T
        _positive(c.t_end, "time.t_end")
        if not isinstance(c.stride, int) or c.stride < 1:
            raise ConfigError("time.stride: expected a positive integer")
        if c.integrator is None:
            c.integrator = "euler" if c.kind == "simulate" else "rk4"
        if c.integrator not in ("euler", "rk4"):
            raise ConfigError(f"time.integrator: expected 'euler' or 'rk4', got {c.integrator!r}")
        if not (isinstance(c.courant, (int, float)) and 0 < c.courant <= 1):
            raise ConfigError("time.courant: expected a number in (0, 1]")
        if c.dt is not None:
            _positive(c.dt, "time.dt")
        if c.schemes is None:
            c.schemes = list(SCHEMES) if c.kind == "accuracy" else ["trm"]
        if isinstance(c.schemes, str):
            c.schemes = [c.schemes]
        for s in c.schemes:
            if str(s).lower() not in SCHEMES:
                raise ConfigError(f"schemes: unknown scheme {s!r}; expected one of {SCHEMES}")
        c.schemes = [str(s).lower() for s in c.schemes]
        if c.lxf_diffusion is not None and c.lxf_diffusion < 0.5 * c.omega * c.rho_max:
            raise ConfigError("lxf_diffusion: must be at least omega*rho_max/2")
        if c.problem is None:
            c.problem = {"type": "random", "low": 0.01 * c.rho_max, "high": 0.99 * c.rho_max} \
                if ring else {"type": "shock"}
        _expect(c.problem, dict, "problem")
        if c.problem.get("type") not in PROBLEM_TYPES:
            raise ConfigError(f"problem.type: expected one of {PROBLEM_TYPES}, got {c.problem.get('type')!r}")
        if c.kind == "accuracy" and c.problem["type"] not in ("shock", "rarefaction"):
            raise ConfigError("problem.type: accuracy runs need 'shock' or 'rarefaction'")
        _expect(c.boundary, dict, "grid.boundary")
        if c.boundary.get("type", "copy-out") not in ("copy-out", "fixed"):
            raise ConfigError("grid.boundary.type: expected 'copy-out' or 'fixed'")
        if c.boundary.get("type") == "fixed":
            for side in ("left", "right"):
                v = c.boundary.get(side)
                if not isinstance(v, (int, float)) or not 0 <= v <= c.rho_max:
                    raise ConfigError(f"grid.boundary.{side}: expected a density in [0, rho_max]")
        if c.ramps is not None:
            _expect(c.ramps, dict, "ramps")
            for k in c.ramps:
                if k not in ("on", "off", "u_on", "u_off"):
                    raise ConfigError(f"ramps.{k}: unknown field")
        if not isinstance(c.seed, int):
            raise ConfigError("seed: expected an integer")
        _expect(c.crn, dict, "crn")
        return c

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, **kw) -> "ExperimentConfig":
        data = asdict(self)
        data.update({k: v for k, v in kw.items() if v is not None})
        return ExperimentConfig(**data).resolved()


PROBLEM_TYPES = ("shock", "rarefaction", "uniform", "random", "piecewise-constant", "piecewise-linear")


def _expect(value, typ, where):
    if not isinstance(value, typ):
        raise ConfigError(f"{where}: expected {typ.__name__}, got {type(value).__name__}")


def _positive(value, where):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
        raise ConfigError(f"{where}: expected a positive number, got {value!r}")


def load_config(path) -> ExperimentConfig:
    """Read a JSON config; syntax errors report line and column."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# --- building blocks ------------------------------------------------------


def model_of(cfg: ExperimentConfig) -> FluxModel:
    return FluxModel(cfg.omega, cfg.rho_max)


def grid_of(cfg: ExperimentConfig, n: int) -> Grid:
    return Grid.node_centered(cfg.length, n) if cfg.layout == "node" else Grid(cfg.length, n)


def boundary_of(cfg: ExperimentConfig):
    if cfg.topology == "ring":
        return Ring()
    if cfg.boundary.get("type") == "fixed":
        return Fixed(cfg.boundary["left"], cfg.boundary["right"])
    return CopyOut()


def _signal(value, where):
    if value is None:
        return 0.0
    if isinstance(value, (int, float)):
        if value < 0:
            raise ConfigError(f"{where}: rates must be nonnegative")
        return float(value)
    if isinstance(value, dict) and "times" in value and "values" in value:
        try:
            return StepSignal(value["times"], value["values"])
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: expected a number or {{'times': [...], 'values': [...]}}")


def ramps_of(cfg: ExperimentConfig, grid: Grid) -> Optional[RampConfig]:
    if not cfg.ramps:
        return None
    r = cfg.ramps
    try:
        return RampConfig.from_intervals(grid, on=r.get("on", []), off=r.get("off", []),
                                         u_on=_signal(r.get("u_on"), "ramps.u_on"),
                                         u_off=_signal(r.get("u_off"), "ramps.u_off"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"ramps: {exc}") from None


def initial_state(cfg: ExperimentConfig, grid: Grid) -> DensityState:
    p = cfg.problem
    kind = p["type"]
    rm = cfg.rho_max
    x0 = 0.5 * cfg.length
    try:
        if kind == "shock":
            return cell_average_init(grid, PiecewiseConstant([x0], [0.0, rm]), rm)
        if kind == "rarefaction":
            return cell_average_init(grid, PiecewiseConstant([x0], [rm, 0.0]), rm)
        if kind == "uniform":
            return cell_average_init(grid, float(p.get("value", 0.5 * rm)), rm)
        if kind == "random":
            lo, hi = float(p.get("low", 0.0)), float(p.get("high", rm))
            rng = np.random.default_rng(cfg.seed)
            return DensityState(0.0, rng.uniform(lo, hi, grid.n_cells), rm)
        if kind == "piecewise-constant":
            return cell_average_init(grid, PiecewiseConstant(p["breaks"], p["values"]), rm)
        return cell_average_init(grid, PiecewiseLinear(p["xs"], p["ys"]), rm)
    except KeyError as exc:
        raise ConfigError(f"problem.{exc.args[0]}: missing field") from None
    except DomainError as exc:
        raise ConfigError(f"problem: {exc}") from None


def system_of(cfg: ExperimentConfig, scheme: str, n: int) -> SemiDiscrete:
    grid = grid_of(cfg, n)
    flux = make_flux(scheme, model_of(cfg), cfg.lxf_diffusion)
    return SemiDiscrete(grid, flux, boundary_of(cfg), ramps_of(cfg, grid))


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, digest: str, header: list, rows) -> None:
    buf = io.StringIO()
    buf.write(f"# config-sha256: {digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _prepare(out_dir) -> Optional[Path]:
    if out_dir is None:
        return None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- accuracy -------------------------------------------------------------


@dataclass
class AccuracyRun:
    report: ErrorReport
    x: np.ndarray
    rho: np.ndarray
    exact: np.ndarray


def accuracy_run(cfg: ExperimentConfig, scheme: str, n: int) -> AccuracyRun:
    """One (scheme, N) entry of the accuracy table, integrated with RK4."""
    model = model_of(cfg)
    rp = (shock_problem if cfg.problem["type"] == "shock" else rarefaction_problem)(model, cfg.length)
    system = system_of(cfg, scheme, n)
    grid = system.grid
    state = DensityState(0.0, exact_cell_averages(rp, grid, 0.0), model.rho_max)
    traj = integrate_reference(state, cfg.t_end, system, stride=cfg.stride, dt=cfg.dt)
    oracle = lambda t: exact_cell_averages(rp, grid, t)
    rep = error_norms(traj, oracle, grid.dx, scheme=scheme, n_cells=n)
    return AccuracyRun(rep, grid.centers, traj.rho[-1], oracle(traj.times[-1]))


def _accuracy_task(args):
    cfg_dict, scheme, n = args
    return accuracy_run(ExperimentConfig(**cfg_dict), scheme, n)


def run_accuracy(cfg: ExperimentConfig, out_dir=None, jobs: int = 1) -> list[AccuracyRun]:
    """Error table over every (scheme, N); written as accuracy.csv + profiles.csv."""
    cfg = cfg.resolved()
    if cfg.kind != "accuracy":
        cfg = cfg.with_overrides(kind="accuracy")
    tasks = [(asdict(cfg), s, n) for s in cfg.schemes for n in cfg.n_cells]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_accuracy_task, tasks))
    else:
        runs = [_accuracy_task(t) for t in tasks]
    out = _prepare(out_dir)
    if out is not None:
        digest = cfg.digest()
        _write_csv(out / "accuracy.csv", digest, ["scheme", "N", "l1", "linf"],
                   (r.report.csv_row().split(",") for r in runs))
        rows = ((r.report.scheme, r.report.n_cells, _fmt(x), _fmt(a), _fmt(b))
                for r in runs for x, a, b in zip(r.x, r.rho, r.exact))
        _write_csv(out / "profiles.csv", digest, ["scheme", "N", "x", "rho", "rho_exact"], rows)
    return runs


# --- simulate -------------------------------------------------------------


@dataclass
class SimulationResult:
    trajectory: Trajectory
    system: SemiDiscrete
    cfl_bound: float
    manifest: dict


def run_simulate(cfg: ExperimentConfig, out_dir=None) -> SimulationResult:
    """Simulate one road and write trajectory.csv (t, mass, rho_1..rho_N) + manifest.json."""
    cfg = cfg.resolved()
    if len(cfg.n_cells) != 1 or len(cfg.schemes) != 1:
        raise ConfigError("simulate: expects exactly one n_cells value and one scheme")
    system = system_of(cfg, cfg.schemes[0], cfg.n_cells[0])
    state = initial_state(cfg, system.grid)
    policy = CflPolicy(cfg.courant)
    bound = policy.dt_max(system)
    if cfg.integrator == "euler":
        traj = run_euler(state, cfg.t_end, system, policy, dt=cfg.dt, stride=cfg.stride)
    else:
        traj = integrate_reference(state, cfg.t_end, system, stride=cfg.stride, dt=cfg.dt)
    manifest = {
        "config": cfg.to_dict(),
        "config_sha256": cfg.digest(),
        "dx": system.grid.dx,
        "x_left": system.grid.x_left,
        "cfl_bound": bound,
        "dt": cfg.dt if cfg.dt is not None else (bound if cfg.integrator == "euler" else None),
        "samples": len(traj),
    }
    out = _prepare(out_dir)
    if out is not None:
        n = system.grid.n_cells
        header = ["t", "mass"] + [f"rho_{i}" for i in range(1, n + 1)]
        mass = traj.mass(system.grid.dx)
        rows = ([_fmt(t), _fmt(m)] + [_fmt(v) for v in r] for t, m, r in zip(traj.times, mass, traj.rho))
        _write_csv(out / "trajectory.csv", cfg.digest(), header, rows)
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return SimulationResult(traj, system, bound, manifest)


# --- ring stability -------------------------------------------------------


def run_ring_stability(cfg: ExperimentConfig, out_dir=None) -> LyapunovReport:
    """Track V along a ring trajectory; writes ring_stability.csv and a summary."""
    cfg = cfg.resolved()
    if cfg.topology != "ring":
        raise ConfigError("grid.topology: ring stability needs a ring")
    if cfg.schemes != ["trm"]:
        raise ConfigError("schemes: the Lyapunov analysis covers the TRM flux only")
    if len(cfg.n_cells) != 1:
        raise ConfigError("grid.n_cells: ring stability expects a single value")
    system = system_of(cfg, "trm", cfg.n_cells[0])
    state = initial_state(cfg, system.grid)
    if np.any(state.rho <= 0):
        raise DomainError("ring stability needs a strictly positive initial state")
    traj = integrate_reference(state, cfg.t_end, system, stride=cfg.stride, dt=cfg.dt)
    report = lyapunov_decay_check(traj, model_of(cfg), system.grid.dx)
    rho_bar = float(state.rho.mean())
    report.notes.append(f"final max deviation from equilibrium: {np.abs(traj.rho[-1] - rho_bar).max():.3e}")
    out = _prepare(out_dir)
    if out is not None:
        rows = ([_fmt(t), _fmt(v), _fmt(b), "" if np.isnan(d) else _fmt(d)] for t, v, b, d in report.rows())
        _write_csv(out / "ring_stability.csv", cfg.digest(), ["t", "V", "bound", "vdot"], rows)
        summary = {
            "config_sha256": cfg.digest(),
            "monotone": report.monotone,
            "bound_ok": report.bound_ok,
            "passed": report.passed,
            "worst_increase": report.worst_increase,
            "worst_bound_gap": report.worst_bound_gap,
            "rho_bar": rho_bar,
            "notes": report.notes,
        }
        (out / "ring_stability.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    return report


# --- reaction network export ---------------------------------------------


def network_of(cfg: ExperimentConfig) -> crn.ReactionNetwork:
    spec = cfg.crn
    segments = spec.get("segments", 3)
    topology = spec.get("topology", cfg.topology)
    dx = cfg.length / segments if isinstance(segments, int) and segments > 0 else 1.0
    k = spec.get("k", cfg.omega / dx)
    try:
        return crn.build_network(segments, topology, k, spec.get("k_on"), spec.get("k_off"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"crn: {exc}") from None


def run_crn_export(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Write network.dot and network.json (species, complexes, reactions, Y)."""
    cfg = cfg.resolved()
    net = network_of(cfg)
    digest = cfg.digest()
    dot = crn.to_dot(net, header=f"config-sha256: {digest}")
    doc = crn.to_json_dict(net)
    doc["config_sha256"] = digest
    out = _prepare(out_dir)
    if out is not None:
        (out / "network.dot").write_text(dot, encoding="utf-8")
        (out / "network.json").write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return {"network": net, "dot": dot, "json": doc}


RUNNERS = {
    "simulate": run_simulate,
    "accuracy": run_accuracy,
    "ring-stability": run_ring_stability,
    "crn-export": run_crn_export,
}


def default_jobs() -> int:
    return max(1, min(8, os.cpu_count() or 1))
