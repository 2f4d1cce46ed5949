"""
Fundamental diagram and interface fluxes
========================================

The quadratic traffic flux and the three interface fluxes compared at a
few left/right density pairs.
"""

import numpy as np

from trafficreaction import FluxModel, Godunov, LaxFriedrichs, TRM

model = FluxModel(omega=1.0, rho_max=100.0)
print(f"v_max = {model.v_max}, critical density = {model.rho_crit}, capacity = {model.f_max}")

###############################################################################
# The flow peaks at half the jam density and vanishes on an empty road and in
# a jam.

for rho in (0, 25, 50, 75, 100):
    print(f"f({rho:3d}) = {model(rho):7.1f}")

###############################################################################
# TRM sends f1(u) = u vehicles per unit of free space f2(v) = omega (rho_max - v)
# downstream. Godunov picks the extremum of f between u and v and LxF adds
# numerical diffusion on top of the averaged flux.

fluxes = {"TRM": TRM.quadratic(model), "LxF": LaxFriedrichs(model), "Godunov": Godunov(model)}
pairs = [(20.0, 80.0), (80.0, 20.0), (0.0, 100.0), (100.0, 0.0), (50.0, 50.0)]
print("\n   (u, v)      " + "".join(f"{name:>10}" for name in fluxes))
for u, v in pairs:
    print(f"({u:5.1f},{v:5.1f})  " + "".join(f"{float(F(u, v)):10.1f}" for F in fluxes.values()))

###############################################################################
# TRM is the only one of the three that is exactly zero into a jam and out of
# an empty cell, which is why it can never push densities out of [0, rho_max].

u = np.linspace(0, 100, 5)
print("\nTRM into a jam:", TRM.quadratic(model)(u, 100.0))
