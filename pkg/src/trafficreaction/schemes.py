"""Numerical fluxes and the semi-discrete finite-volume right-hand side.

All schemes share the conservation form

    d rho_i / dt = (F(rho_{i-1}, rho_i) - F(rho_i, rho_{i+1})) / dx

and differ only in the interface flux F(u, v).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    BoundaryPolicy,
    DensityState,
    DomainError,
    FactorizedFlux,
    Fixed,
    FluxModel,
    Grid,
    RampConfig,
    check_density,
    pad,
)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def flux_trm(fx: FactorizedFlux, u, v):
    """TRM interface flux F(u, v) = f1(u) * f2(v)."""
    u = check_density(u, fx.rho_max)
    v = check_density(v, fx.rho_max)
    return _scalar_or_array(np.asarray(fx.f1(u), dtype=float) * np.asarray(fx.f2(v), dtype=float))


def flux_lxf(model: FluxModel, D: float, u, v):
    """Modified Lax-Friedrichs flux (f(u) + f(v))/2 + D (u - v)."""
    if D < 0.5 * model.omega * model.rho_max:
        raise ValueError(
            f"diffusion D={D} below omega*rho_max/2={0.5 * model.omega * model.rho_max}; "
            "the scheme would not be monotone"
        )
    u = check_density(u, model.rho_max)
    v = check_density(v, model.rho_max)
    return _scalar_or_array(0.5 * (model(u) + model(v)) + D * (u - v))


def flux_godunov(model: FluxModel, u, v):
    """Godunov flux for the concave quadratic flux, in closed form.

    For u <= v the minimum of f over [u, v] sits at an endpoint; for u > v
    the maximum is f_max when the critical density lies in [v, u], else the
    larger endpoint value.
    """
    u = check_density(u, model.rho_max)
    v = check_density(v, model.rho_max)
    fu, fv = model(u), model(v)
    rc = model.rho_crit
    out = np.where(
        u <= v,
        np.minimum(fu, fv),
        np.where((v <= rc) & (rc <= u), model.f_max, np.maximum(fu, fv)),
    )
    return _scalar_or_array(out)


@dataclass(frozen=True)
class TRM:
    """TRM flux for a factorized fundamental diagram."""

    fx: FactorizedFlux
    name: str = "TRM"

    @classmethod
    def quadratic(cls, model: FluxModel) -> "TRM":
        return cls(FactorizedFlux.quadratic(model))

    @property
    def rho_max(self) -> float:
        return self.fx.rho_max

    def physical(self, rho):
        return self.fx(rho)

    def __call__(self, u, v):
        return np.asarray(self.fx.f1(u), dtype=float) * np.asarray(self.fx.f2(v), dtype=float)

    def wave_bound(self) -> float:
        """sup|F_u| + sup|F_v| over [0, rho_max]^2."""
        a, b = self.fx.lipschitz_bounds()
        return a + b


@dataclass(frozen=True)
class LaxFriedrichs:
    model: FluxModel
    D: Optional[float] = None
    name: str = "LxF"

    def __post_init__(self):
        if self.D is None:
            object.__setattr__(self, "D", 0.5 * self.model.omega * self.model.rho_max)
        if self.D < 0.5 * self.model.omega * self.model.rho_max:
            raise ValueError("LxF diffusion must satisfy D >= omega*rho_max/2")

    @property
    def rho_max(self) -> float:
        return self.model.rho_max

    def physical(self, rho):
        return self.model(rho)

    def __call__(self, u, v):
        return 0.5 * (self.model(u) + self.model(v)) + self.D * (u - v)

    def wave_bound(self) -> float:
        return self.model.v_max + 2.0 * self.D


@dataclass(frozen=True)
class Godunov:
    model: FluxModel
    name: str = "Godunov"

    @property
    def rho_max(self) -> float:
        return self.model.rho_max

    def physical(self, rho):
        return self.model(rho)

    def __call__(self, u, v):
        m = self.model
        fu, fv = m(u), m(v)
        rc = m.rho_crit
        return np.where(u <= v, np.minimum(fu, fv),
                        np.where((v <= rc) & (rc <= u), m.f_max, np.maximum(fu, fv)))

    def wave_bound(self) -> float:
        return 2.0 * self.model.v_max


NumericalFlux = Union[TRM, LaxFriedrichs, Godunov]

SCHEMES = ("trm", "lxf", "godunov")


def make_flux(name: str, model: FluxModel, D: Optional[float] = None) -> NumericalFlux:
    key = name.lower()
    if key == "trm":
        return TRM.quadratic(model)
    if key in ("lxf", "lax-friedrichs"):
        return LaxFriedrichs(model, D)
    if key in ("godunov", "gdnv"):
        return Godunov(model)
    raise ValueError(f"unknown scheme {name!r}; expected one of {SCHEMES}")


@dataclass(frozen=True)
class SemiDiscrete:
    """The method-of-lines ODE system for one road: grid, flux, boundaries, ramps."""

    grid: Grid
    flux: NumericalFlux
    bc: BoundaryPolicy
    ramps: Optional[RampConfig] = None

    def __post_init__(self):
        if isinstance(self.bc, Fixed):
            check_density([self.bc.left, self.bc.right], self.rho_max, what="fixed boundary value")
        if self.ramps is not None and self.ramps.on_weights.size != self.grid.n_cells:
            raise ValueError("ramp weights do not match the number of cells")

    @property
    def rho_max(self) -> float:
        return self.flux.rho_max

    @property
    def dx(self) -> float:
        return self.grid.dx

    def interface_fluxes(self, rho: np.ndarray) -> np.ndarray:
        """Fluxes through the N + 1 interfaces, left boundary first."""
        g = pad(rho, self.bc)
        return self.flux(g[..., :-1], g[..., 1:])

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        fl = self.interface_fluxes(rho)
        out = (fl[..., :-1] - fl[..., 1:]) / self.grid.dx
        if self.ramps is not None:
            out = out + self.ramps.source(rho, self.rho_max, t)
        return out


def rhs(state: DensityState, grid: Grid, bc: BoundaryPolicy, flux: NumericalFlux,
        ramps: Optional[RampConfig] = None, t: Optional[float] = None) -> np.ndarray:
    """Time derivative of every cell density for the given state."""
    if state.n_cells != grid.n_cells:
        raise ValueError(f"state has {state.n_cells} cells, grid has {grid.n_cells}")
    rho = check_density(state.rho, flux.rho_max)
    return SemiDiscrete(grid, flux, bc, ramps)(state.t if t is None else t, rho)


def range_flux_balance(system: SemiDiscrete, rho: np.ndarray, lo: int, hi: int) -> float:
    """(F(rho_{lo-1}, rho_lo) - F(rho_hi, rho_{hi+1})) / dx for 0-based cells lo..hi."""
    if not 0 <= lo <= hi < rho.size:
        raise DomainError("invalid cell range")
    fl = system.interface_fluxes(rho)
    return (fl[lo] - fl[hi + 1]) / system.grid.dx
