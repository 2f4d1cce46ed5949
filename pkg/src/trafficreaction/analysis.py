"""Error metrics, total variation and ring-road Lyapunov diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.special import kl_div

from .core import DensityState, DomainError, FluxModel
from .integrate import Trajectory

ArrayLike = Union[DensityState, np.ndarray]


def _rho(state: ArrayLike) -> np.ndarray:
    return state.rho if isinstance(state, DensityState) else np.asarray(state, dtype=float)


def _sig(x: float, digits: int = 6) -> str:
    return f"{x:.{digits}g}"


@dataclass(frozen=True)
class ErrorReport:
    scheme: str
    n_cells: int
    l1: float
    linf: float

    CSV_HEADER = "scheme,N,l1,linf"

    def csv_row(self) -> str:
        return f"{self.scheme},{self.n_cells},{_sig(self.l1)},{_sig(self.linf)}"


def spatial_error(state: ArrayLike, oracle, dx: float) -> float:
    """e(t) = dx * sum_i |rho_i - rho_bar_i|."""
    rho, ref = _rho(state), np.asarray(oracle, dtype=float)
    if rho.shape != ref.shape:
        raise ValueError(f"length mismatch: {rho.shape} vs {ref.shape}")
    return float(dx * np.abs(rho - ref).sum())


def time_norms(times, errors) -> tuple[float, float]:
    """Trapezoidal time integral and maximum of sampled spatial errors."""
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("empty error history")
    if times.shape != errors.shape:
        raise ValueError("times and errors differ in length")
    l1 = float(np.trapezoid(errors, times)) if errors.size > 1 else 0.0
    return l1, float(errors.max())


def error_history(traj: Trajectory, oracle: Callable[[float], np.ndarray], dx: float) -> np.ndarray:
    return np.array([spatial_error(traj.rho[k], oracle(t), dx) for k, t in enumerate(traj.times)])


def error_norms(traj: Trajectory, oracle: Callable[[float], np.ndarray], dx: float,
                scheme: str = "", n_cells: int | None = None) -> ErrorReport:
    """l1 (time integral) and l-infinity (time max) norms of e(t) along ``traj``.

    ``oracle(t)`` returns the exact cell averages at time t.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if len(traj) < 2:
        raise ValueError("need at least two samples to integrate in time")
    e = error_history(traj, oracle, dx)
    l1, linf = time_norms(traj.times, e)
    return ErrorReport(scheme, traj.rho.shape[1] if n_cells is None else n_cells, l1, linf)


def total_variation(state: ArrayLike, ring: bool = False) -> float:
    rho = _rho(state)
    tv = float(np.abs(np.diff(rho)).sum())
    if ring and rho.size > 1:
        tv += abs(rho[0] - rho[-1])
    return tv


def ring_equilibrium(state: ArrayLike) -> float:
    """Uniform equilibrium density of a ring: the mean cell density."""
    return float(_rho(state).mean())


def lyapunov_value(state: ArrayLike, rho_bar: float | None = None) -> float:
    """V = sum_i rho_i (log(rho_i / rho_bar) - 1) + N rho_bar.

    Evaluated term by term as rho_i log(rho_i/rho_bar) - rho_i + rho_bar, each
    of which is nonnegative, to avoid cancellation near equilibrium.
    """
    rho = _rho(state)
    if np.any(rho <= 0):
        raise DomainError("V needs strictly positive densities")
    rb = rho.mean() if rho_bar is None else float(rho_bar)
    # kl_div can round a hair below zero right at equilibrium
    return float(np.maximum(kl_div(rho, rb), 0.0).sum())


def lyapunov_bound(state: ArrayLike, model: FluxModel, dx: float) -> float:
    """Upper bound -(omega / (2 dx)) * sum_i (rho_i - rho_{i+1})^2 on dV/dt (ring)."""
    rho = _rho(state)
    d = rho - np.roll(rho, -1)
    return float(-0.5 * model.omega / dx * np.dot(d, d))


@dataclass
class LyapunovReport:
    times: np.ndarray
    V: np.ndarray
    bound: np.ndarray
    vdot: np.ndarray  # forward differences, len(times) - 1
    monotone: bool
    bound_ok: bool
    worst_increase: float
    worst_bound_gap: float
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.monotone and self.bound_ok

    def rows(self):
        """(t, V, b, Vdot) rows; Vdot is the forward difference from each sample."""
        vd = np.append(self.vdot, np.nan)
        return zip(self.times, self.V, self.bound, vd)


def lyapunov_decay_check(traj: Trajectory, model: FluxModel, dx: float,
                         slack: float = 1e-10, bound_slack: float = 1e-8) -> LyapunovReport:
    """Check V never increases and that dV/dt respects the analytic bound.

    dV/dt is estimated by the forward difference between consecutive samples
    and compared with the larger of the bound values at the two ends of the
    interval, which bounds the interval average of b when b varies
    monotonically across it.
    """
    if np.any(traj.rho <= 0):
        k = int(np.argwhere(traj.rho <= 0)[0, 0])
        raise DomainError(f"trajectory touches zero density at t={traj.times[k]:.6g}")
    rho_bar = traj.rho[0].mean()
    V = np.array([lyapunov_value(r, rho_bar) for r in traj.rho])
    b = np.array([lyapunov_bound(r, model, dx) for r in traj.rho])
    dV = np.diff(V)
    dt = np.diff(traj.times)
    vdot = dV / dt if dt.size else np.array([])
    worst_inc = float(dV.max()) if dV.size else 0.0
    if dt.size:
        gap = vdot - (np.maximum(b[:-1], b[1:]) + bound_slack)
        worst_gap = float(gap.max())
    else:
        worst_gap = -bound_slack
    return LyapunovReport(traj.times, V, b, vdot, worst_inc <= slack, worst_gap <= 0.0,
                          worst_inc, worst_gap)
