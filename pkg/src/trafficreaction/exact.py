"""Entropy solutions of Riemann problems for the quadratic flux.

Cell averages are integrated in closed form from the antiderivative of the
piecewise constant / linear solution, so the error oracle carries no
quadrature noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, FluxModel, Grid, check_density


@dataclass(frozen=True)
class RiemannProblem:
    rho_left: float
    rho_right: float
    x0: float
    model: FluxModel

    def __post_init__(self):
        check_density([self.rho_left, self.rho_right], self.model.rho_max, what="Riemann state")

    @property
    def kind(self) -> str:
        if self.rho_left < self.rho_right:
            return "shock"
        if self.rho_left > self.rho_right:
            return "rarefaction"
        return "constant"

    @property
    def shock_speed(self) -> float:
        """Rankine-Hugoniot speed (f(rho_r) - f(rho_l)) / (rho_r - rho_l)."""
        rl, rr = self.rho_left, self.rho_right
        if rl == rr:
            return float(self.model.derivative(rl))
        # for the quadratic flux the quotient simplifies exactly
        return self.model.omega * (self.model.rho_max - rl - rr)

    def wave_extent(self, t: float) -> tuple[float, float]:
        """Leftmost and rightmost positions influenced by the wave at time t."""
        if self.kind == "rarefaction":
            m = self.model
            return (self.x0 + float(m.derivative(self.rho_left)) * t,
                    self.x0 + float(m.derivative(self.rho_right)) * t)
        if self.kind == "shock":
            xs = self.x0 + self.shock_speed * t
            return xs, xs
        return self.x0, self.x0


def shock_problem(model: FluxModel, length: float = 20.0) -> RiemannProblem:
    """Empty road upstream of a jam: 0 for x < L/2, rho_max beyond."""
    return RiemannProblem(0.0, model.rho_max, 0.5 * length, model)


def rarefaction_problem(model: FluxModel, length: float = 20.0) -> RiemannProblem:
    """Jam released into an empty road: rho_max for x < L/2, 0 beyond."""
    return RiemannProblem(model.rho_max, 0.0, 0.5 * length, model)


def _check_time(t):
    if t < 0:
        raise DomainError("the entropy solution is undefined for t < 0")


def exact_solution(rp: RiemannProblem, x, t: float):
    """Density of the entropy solution at positions ``x`` and time ``t``."""
    _check_time(t)
    x = np.asarray(x, dtype=float)
    rl, rr, x0 = rp.rho_left, rp.rho_right, rp.x0
    if t == 0 or rp.kind != "rarefaction":
        xs = x0 + (rp.shock_speed * t if rp.kind == "shock" else 0.0)
        out = np.where(x < xs, rl, rr)
    else:
        m = rp.model
        a, b = rp.wave_extent(t)
        fan = 0.5 * (m.rho_max - (x - x0) / (m.omega * t))
        out = np.where(x < a, rl, np.where(x > b, rr, fan))
    return float(out) if out.ndim == 0 else out


def _antiderivative(rp: RiemannProblem, x: np.ndarray, t: float) -> np.ndarray:
    """An antiderivative in x of the solution at time t (arbitrary constant)."""
    rl, rr = rp.rho_left, rp.rho_right
    if t == 0 or rp.kind != "rarefaction":
        xs = rp.x0 + (rp.shock_speed * t if rp.kind == "shock" else 0.0)
        return rl * np.minimum(x, xs) + rr * np.maximum(x, xs)
    m = rp.model
    a, b = rp.wave_extent(t)
    s = np.clip(x, a, b) - rp.x0
    fan = 0.5 * (m.rho_max * s - s * s / (2.0 * m.omega * t))
    return rl * np.minimum(x, a) + fan + rr * np.maximum(x, b)


def exact_cell_averages(rp: RiemannProblem, grid: Grid, t: float) -> np.ndarray:
    """Exact averages of the entropy solution over every cell of ``grid``.

    Raises DomainError once the wave has reached the ends of the grid, where
    the free-space solution no longer matches zero-gradient boundaries.
    """
    _check_time(t)
    lo, hi = rp.wave_extent(t)
    if rp.kind != "constant" and (lo < grid.x_left or hi > grid.x_right):
        raise DomainError(
            f"wave occupies [{lo:.6g}, {hi:.6g}] at t={t:.6g}, outside the grid "
            f"[{grid.x_left:.6g}, {grid.x_right:.6g}]"
        )
    # shift the origin to x0 before differencing to limit cancellation
    edges = grid.edges
    g = _antiderivative(rp, edges, t) - _antiderivative(rp, np.array(rp.x0), t)
    avg = np.diff(g) / grid.dx
    return check_density(avg, rp.model.rho_max, tol=1e-9)
