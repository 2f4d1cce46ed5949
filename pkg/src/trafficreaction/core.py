"""Domain types shared by the schemes, integrators and analysis tools.

Densities live on a uniform 1-D grid of cells. Boundaries are realized
through one ghost cell on each side, selected by a boundary policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate

BOUND_TOL = 1e-12


class DomainError(ValueError):
    """A density (or other input) lies outside its admissible range."""


class CflError(ValueError):
    """Time step exceeds the stability bound of an explicit scheme."""


class NumericalGuardError(RuntimeError):
    """A numerical safeguard tripped during integration."""


def check_density(rho, rho_max: float, tol: float = BOUND_TOL, what: str = "density") -> np.ndarray:
    """Validate densities against [0, rho_max] and clamp round-off.

    Values beyond the interval by more than ``tol`` raise DomainError.
    """
    arr = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} contains non-finite values")
    if arr.size and (arr.min() < -tol or arr.max() > rho_max + tol):
        raise DomainError(
            f"{what} outside [0, {rho_max}]: min={arr.min():.17g}, max={arr.max():.17g}"
        )
    return np.clip(arr, 0.0, rho_max)


@dataclass(frozen=True)
class FluxModel:
    """Quadratic fundamental diagram f(rho) = omega * rho * (rho_max - rho).

    ``omega`` is v_max / rho_max, so the speed v(rho) = omega*(rho_max - rho)
    drops linearly from v_max on an empty road to zero at jam density.
    """

    omega: float = 1.0
    rho_max: float = 100.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not self.rho_max > 0:
            raise ValueError("rho_max must be positive")

    @classmethod
    def from_vmax(cls, v_max: float, rho_max: float) -> "FluxModel":
        return cls(omega=v_max / rho_max, rho_max=rho_max)

    @property
    def v_max(self) -> float:
        return self.omega * self.rho_max

    @property
    def rho_crit(self) -> float:
        return 0.5 * self.rho_max

    @property
    def f_max(self) -> float:
        return 0.25 * self.omega * self.rho_max**2

    def speed(self, rho):
        return self.omega * (self.rho_max - np.asarray(rho, dtype=float))

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return self.omega * rho * (self.rho_max - rho)

    def derivative(self, rho):
        return self.omega * (self.rho_max - 2.0 * np.asarray(rho, dtype=float))


def flux_value(model: FluxModel, rho):
    """Traffic flow f(rho) for densities in [0, rho_max]."""
    rho = check_density(rho, model.rho_max)
    out = model(rho)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FactorizedFlux:
    """Flux written as a product f(rho) = f1(rho) * f2(rho).

    f1 must be non-decreasing with f1(0) = 0 and f2 non-increasing with
    f2(rho_max) = 0. Both callables should accept numpy arrays. The
    monotonicity requirements are checked by sampling, not proven.
    """

    f1: Callable
    f2: Callable
    rho_max: float
    n_check: int = 1000
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not self.rho_max > 0:
            raise ValueError("rho_max must be positive")
        if self.check:
            self.validate()

    @classmethod
    def quadratic(cls, model: FluxModel) -> "FactorizedFlux":
        omega, rho_max = model.omega, model.rho_max
        return cls(lambda r: np.asarray(r, dtype=float),
                   lambda r: omega * (rho_max - np.asarray(r, dtype=float)),
                   rho_max)

    def validate(self, tol: float = 1e-12):
        s = np.linspace(0.0, self.rho_max, self.n_check)
        g1 = np.broadcast_to(np.asarray(self.f1(s), dtype=float), s.shape)
        g2 = np.broadcast_to(np.asarray(self.f2(s), dtype=float), s.shape)
        if float(self.f1(0.0)) != 0.0:
            raise ValueError("f1(0) must be 0")
        if float(self.f2(self.rho_max)) != 0.0:
            raise ValueError("f2(rho_max) must be 0")
        scale1 = max(1.0, np.abs(g1).max())
        scale2 = max(1.0, np.abs(g2).max())
        if np.any(np.diff(g1) < -tol * scale1):
            raise ValueError("f1 must be non-decreasing on [0, rho_max]")
        if np.any(np.diff(g2) > tol * scale2):
            raise ValueError("f2 must be non-increasing on [0, rho_max]")

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.asarray(self.f1(rho), dtype=float) * np.asarray(self.f2(rho), dtype=float)

    def lipschitz_bounds(self, n: int = 1001) -> tuple[float, float]:
        """Sampled estimates of sup|dF/du| and sup|dF/dv| for F(u, v) = f1(u) f2(v)."""
        s = np.linspace(0.0, self.rho_max, n)
        g1 = np.broadcast_to(np.asarray(self.f1(s), dtype=float), s.shape)
        g2 = np.broadcast_to(np.asarray(self.f2(s), dtype=float), s.shape)
        h = s[1] - s[0]
        d1 = np.abs(np.diff(g1)).max() / h
        d2 = np.abs(np.diff(g2)).max() / h
        return d1 * np.abs(g2).max(), d2 * np.abs(g1).max()


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n_cells`` cells of width dx = length / n_cells.

    Cell i (1-based) covers [x_left + (i-1)*dx, x_left + i*dx].
    """

    length: float
    n_cells: int
    x_left: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("length must be positive")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError("n_cells must be a positive integer")

    @classmethod
    def node_centered(cls, length: float, n: int) -> "Grid":
        """N + 1 cells of width length/N centred on the nodes 0, dx, ..., length.

        This is the layout where the cells are indexed 0..N and the ghost
        cells are -1 and N + 1.
        """
        dx = length / n
        return cls(length=length + dx, n_cells=n + 1, x_left=-0.5 * dx)

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def x_right(self) -> float:
        return self.x_left + self.length

    @property
    def edges(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n_cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + self.dx * (np.arange(self.n_cells) + 0.5)


@dataclass(frozen=True)
class CopyOut:
    """Zero-gradient ghosts: rho_0 = rho_1 and rho_{N+1} = rho_N."""

    def ghosts(self, rho):
        return rho[..., :1], rho[..., -1:]


@dataclass(frozen=True)
class Ring:
    """Periodic ghosts: rho_0 = rho_N and rho_{N+1} = rho_1."""

    def ghosts(self, rho):
        return rho[..., -1:], rho[..., :1]


@dataclass(frozen=True)
class Fixed:
    """Constant ghost densities, e.g. a prescribed upstream/downstream state.

    ``Fixed(0, rho_max)`` seals both ends of the road for the TRM flux.
    """

    left: float
    right: float

    def ghosts(self, rho):
        shape = rho.shape[:-1] + (1,)
        return np.full(shape, float(self.left)), np.full(shape, float(self.right))


BoundaryPolicy = Union[CopyOut, Ring, Fixed]


def pad(rho: np.ndarray, bc: BoundaryPolicy) -> np.ndarray:
    """Return rho extended by one ghost cell on each side (last axis)."""
    left, right = bc.ghosts(rho)
    return np.concatenate([left, rho, right], axis=-1)


@dataclass(frozen=True)
class DensityState:
    """Cell densities at time ``t``.

    When ``rho_max`` is given, densities are checked against [0, rho_max]
    (with 1e-12 slack for round-off) and clamped.
    """

    t: float
    rho: np.ndarray
    rho_max: float | None = None

    def __post_init__(self):
        arr = np.array(self.rho, dtype=float).reshape(-1)
        if self.rho_max is None:
            if arr.size and arr.min() < -BOUND_TOL:
                raise DomainError("densities must be nonnegative")
            arr = np.maximum(arr, 0.0)
        else:
            arr = check_density(arr, self.rho_max)
        arr.flags.writeable = False
        object.__setattr__(self, "rho", arr)

    @property
    def n_cells(self) -> int:
        return self.rho.size

    def mass(self, dx: float) -> float:
        return dx * float(self.rho.sum())


class StepSignal:
    """Right-continuous piecewise-constant signal of time.

    ``values[k]`` holds on [times[k], times[k+1]); the first value also holds
    before ``times[0]`` and the last one forever after.
    """

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape or not self.times.size:
            raise ValueError("times and values must be equal-length 1-D sequences")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("rates must be nonnegative")

    def __call__(self, t: float) -> float:
        k = np.searchsorted(self.times, t, side="right") - 1
        return float(self.values[max(k, 0)])

    def __repr__(self):
        return f"StepSignal(times={self.times.tolist()}, values={self.values.tolist()})"


def as_signal(rate) -> Callable[[float], float]:
    if callable(rate):
        return rate
    rate = float(rate)
    if rate < 0:
        raise ValueError("ramp rates must be nonnegative")
    return StepSignal([0.0], [rate])


def coverage_weights(grid: Grid, intervals: Sequence[tuple[float, float]]) -> np.ndarray:
    """Fraction of each cell covered by the union of disjoint intervals."""
    edges = grid.edges
    w = np.zeros(grid.n_cells)
    spans = sorted((float(a), float(b)) for a, b in intervals)
    for (a, b), nxt in zip(spans, spans[1:] + [(np.inf, np.inf)]):
        if b < a:
            raise ValueError(f"interval ({a}, {b}) is reversed")
        if nxt[0] < b:
            raise ValueError("ramp intervals must be disjoint")
        w += np.clip(np.minimum(edges[1:], b) - np.maximum(edges[:-1], a), 0.0, None)
    return np.clip(w / grid.dx, 0.0, 1.0)


@dataclass(frozen=True)
class RampConfig:
    """Per-cell on/off-ramp coverage and their (time dependent) rates."""

    on_weights: np.ndarray
    off_weights: np.ndarray
    u_on: Callable[[float], float] = 0.0
    u_off: Callable[[float], float] = 0.0

    def __post_init__(self):
        on = np.array(self.on_weights, dtype=float).reshape(-1)
        off = np.array(self.off_weights, dtype=float).reshape(-1)
        if on.shape != off.shape:
            raise ValueError("on and off weights must have the same length")
        for w in (on, off):
            if np.any(w < 0) or np.any(w > 1):
                raise ValueError("ramp weights must lie in [0, 1]")
            w.flags.writeable = False
        object.__setattr__(self, "on_weights", on)
        object.__setattr__(self, "off_weights", off)
        object.__setattr__(self, "u_on", as_signal(self.u_on))
        object.__setattr__(self, "u_off", as_signal(self.u_off))

    @classmethod
    def from_intervals(cls, grid: Grid, on=(), off=(), u_on=0.0, u_off=0.0) -> "RampConfig":
        """Build weights from ramp intervals [x_lo, x_hi] along the road.

        Several ramps of one kind are allowed as long as they are disjoint;
        they are merged into a single weight per cell.
        """
        return cls(coverage_weights(grid, on), coverage_weights(grid, off), u_on, u_off)

    def source(self, rho, rho_max: float, t: float):
        uon, uoff = self.u_on(t), self.u_off(t)
        if uon < 0 or uoff < 0:
            raise DomainError("ramp rates must be nonnegative")
        return self.on_weights * uon * (rho_max - rho) - self.off_weights * uoff * rho


# --- initial data ---------------------------------------------------------


class PiecewiseConstant:
    """rho0(x) = values[k] for breaks[k-1] <= x < breaks[k] (open ends)."""

    def __init__(self, breaks: Sequence[float], values: Sequence[float]):
        self.breaks = np.asarray(breaks, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.values.size != self.breaks.size + 1:
            raise ValueError("need len(values) == len(breaks) + 1")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breaks must be increasing")

    def __call__(self, x):
        return self.values[np.searchsorted(self.breaks, x, side="right")]

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        lo = np.concatenate([[-np.inf], self.breaks])
        hi = np.concatenate([self.breaks, [np.inf]])
        for a, b, v in zip(lo, hi, self.values):
            # integral from 0 of v over [a, b]
            out += v * (np.clip(x, a, b) - np.clip(0.0, a, b))
        return out


class PiecewiseLinear:
    """Linear interpolation through (xs, ys), constant beyond the ends."""

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        if self.xs.shape != self.ys.shape or self.xs.size < 1:
            raise ValueError("xs and ys must have equal nonzero length")
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("xs must be increasing")

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        xs, ys = self.xs, self.ys
        xc = np.clip(x, xs[0], xs[-1])
        out = ys[0] * (np.minimum(x, xs[0]) - xs[0]) + ys[-1] * (np.maximum(x, xs[-1]) - xs[-1])
        if xs.size > 1:
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))])
            k = np.clip(np.searchsorted(xs, xc, side="right") - 1, 0, xs.size - 2)
            out = out + cum[k] + 0.5 * (xc - xs[k]) * (ys[k] + self(xc))
        return out


def _cell_integrals_generic(grid: Grid, rho0: Callable, rho_max: float) -> np.ndarray:
    def guarded(x):
        v = float(rho0(x))
        if not -BOUND_TOL <= v <= rho_max + BOUND_TOL:
            raise DomainError(f"initial profile leaves [0, {rho_max}] at x={x}: {v}")
        return v

    edges = grid.edges
    return np.array([
        integrate.quad(guarded, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        for a, b in zip(edges[:-1], edges[1:])
    ])


def cell_average_init(grid: Grid, rho0, rho_max: float) -> DensityState:
    """Exact cell averages of an initial profile at t = 0.

    ``rho0`` may be a constant, a PiecewiseConstant / PiecewiseLinear profile
    (integrated analytically) or any callable (adaptive quadrature).
    """
    if np.isscalar(rho0):
        rho = np.full(grid.n_cells, float(rho0))
        return DensityState(0.0, check_density(rho, rho_max, what="initial profile"), rho_max)
    if hasattr(rho0, "antiderivative"):
        vals = np.concatenate([np.atleast_1d(getattr(rho0, "values", [])),
                               np.atleast_1d(getattr(rho0, "ys", []))])
        check_density(vals, rho_max, what="initial profile")
        cum = rho0.antiderivative(grid.edges)
        avg = np.diff(cum) / grid.dx
    else:
        avg = _cell_integrals_generic(grid, rho0, rho_max) / grid.dx
    return DensityState(0.0, check_density(avg, rho_max, tol=1e-10), rho_max)
