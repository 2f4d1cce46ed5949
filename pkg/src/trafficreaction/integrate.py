"""Time stepping for the semi-discrete system.

``step_euler`` is the fully discrete monotone scheme, guarded by a CFL bound.
``integrate_reference`` is a fixed-step classical RK4 sweep used to study the
semi-discrete accuracy with negligible time-discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CflError, DensityState, NumericalGuardError, check_density
from .schemes import SemiDiscrete

CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class CflPolicy:
    """dt <= courant * dx / (sup|F_u| + sup|F_v|)."""

    courant: float = 0.9

    def __post_init__(self):
        if not 0 < self.courant <= 1:
            raise ValueError("courant must lie in (0, 1]")

    def dt_max(self, system: SemiDiscrete) -> float:
        return self.courant * system.grid.dx / system.flux.wave_bound()


def step_euler(state: DensityState, dt: float, system: SemiDiscrete,
               cfl: CflPolicy = CflPolicy()) -> DensityState:
    """One explicit Euler step rho^{k+1} = rho^k + dt * rhs(rho^k).

    Raises CflError if ``dt`` exceeds the bound of ``cfl``.
    """
    bound = cfl.dt_max(system)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt > bound * (1 + 1e-12):
        raise CflError(f"dt={dt:.6g} exceeds CFL bound {bound:.6g}")
    rho = state.rho + dt * system(state.t, state.rho)
    return DensityState(state.t + dt, check_density(rho, system.rho_max), system.rho_max)


@dataclass
class Trajectory:
    """Sampled states: ``times`` (K,) and ``rho`` (K, N)."""

    times: np.ndarray
    rho: np.ndarray
    rho_max: float | None = None

    def __len__(self):
        return self.times.size

    def state(self, k: int) -> DensityState:
        return DensityState(float(self.times[k]), self.rho[k], self.rho_max)

    def mass(self, dx: float) -> np.ndarray:
        return dx * self.rho.sum(axis=1)

    @property
    def final(self) -> DensityState:
        return self.state(-1)


def run_euler(state: DensityState, t_end: float, system: SemiDiscrete,
              cfl: CflPolicy = CflPolicy(), dt: float | None = None, stride: int = 1) -> Trajectory:
    """Repeated Euler steps up to ``t_end``; the last step is shortened to land on it."""
    bound = cfl.dt_max(system)
    dt = bound if dt is None else dt
    if dt > bound * (1 + 1e-12):
        raise CflError(f"dt={dt:.6g} exceeds CFL bound {bound:.6g}")
    n_steps = max(0, math.ceil((t_end - state.t) / dt - 1e-9))
    times, rows = [state.t], [state.rho]
    cur = state
    for k in range(n_steps):
        h = min(dt, t_end - cur.t)
        cur = step_euler(cur, h, system, cfl)
        if (k + 1) % stride == 0 or k == n_steps - 1:
            times.append(cur.t)
            rows.append(cur.rho)
    return Trajectory(np.array(times), np.array(rows), system.rho_max)


def reference_dt(system: SemiDiscrete, fraction: float = 0.1) -> float:
    """Default reference step: ``fraction`` of the courant-1 Euler bound."""
    return fraction * system.grid.dx / system.flux.wave_bound()


def _rk4(system: SemiDiscrete, rho0: np.ndarray, t0: float, t_end: float, n_steps: int,
         stride: int, rho_max: float):
    dt = (t_end - t0) / n_steps
    f = system
    rho = rho0.copy()
    times, rows = [t0], [rho0.copy()]
    for k in range(n_steps):
        t = t0 + k * dt
        k1 = f(t, rho)
        k2 = f(t + 0.5 * dt, rho + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, rho + 0.5 * dt * k2)
        k4 = f(t + dt, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        lo, hi = rho.min(), rho.max()
        if lo < -CLAMP_TOL or hi > rho_max + CLAMP_TOL:
            raise NumericalGuardError(
                f"density left [0, {rho_max}] at t={t + dt:.6g} (min={lo:.3g}, max={hi:.3g})"
            )
        np.clip(rho, 0.0, rho_max, out=rho)
        if (k + 1) % stride == 0 or k == n_steps - 1:
            times.append(t0 + (k + 1) * dt)
            rows.append(rho.copy())
    return np.array(times), np.array(rows)


def integrate_reference(state: DensityState, t_end: float, system: SemiDiscrete,
                        tol: float | None = None, stride: int = 1,
                        dt: float | None = None) -> Trajectory:
    """Classical RK4 with a fixed step, sampled every ``stride`` steps.

    The default step is 0.1 * dx / (sup|F_u| + sup|F_v|), i.e.
    0.1 * dx / (2 omega rho_max) for the quadratic flux, shrunk slightly so
    an integer number of steps ends exactly at ``t_end``. With ``tol`` set,
    the run is repeated at half the step and the final states must agree
    within ``tol`` in max norm.
    """
    if t_end < state.t:
        raise ValueError("t_end must not precede the initial time")
    rho0 = check_density(state.rho, system.rho_max)
    if t_end == state.t:
        return Trajectory(np.array([state.t]), rho0[None, :].copy(), system.rho_max)
    h = reference_dt(system) if dt is None else dt
    n_steps = max(1, math.ceil((t_end - state.t) / h - 1e-9))
    times, rows = _rk4(system, rho0, state.t, t_end, n_steps, stride, system.rho_max)
    if tol is not None:
        _, fine = _rk4(system, rho0, state.t, t_end, 2 * n_steps, 2 * n_steps, system.rho_max)
        gap = np.abs(fine[-1] - rows[-1]).max()
        if gap > tol:
            raise NumericalGuardError(f"step-halving disagreement {gap:.3g} exceeds tol {tol:.3g}")
    return Trajectory(times, rows, system.rho_max)
