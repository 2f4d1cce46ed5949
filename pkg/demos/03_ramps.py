"""
On- and off-ramps on a ring road
================================

A metered on-ramp feeds a ring; vehicles enter only while there is room.
"""

import numpy as np

from trafficreaction import DensityState, FluxModel, Grid, RampConfig, Ring, StepSignal, TRM
from trafficreaction.integrate import run_euler
from trafficreaction.schemes import SemiDiscrete

model = FluxModel()
grid = Grid(20.0, 40)

###############################################################################
# The on-ramp covers [2, 4] and is closed for the first 0.05 time units; the
# off-ramp covers [12, 13] and drains at a constant rate.

ramps = RampConfig.from_intervals(
    grid,
    on=[(2.0, 4.0)],
    off=[(12.0, 13.0)],
    u_on=StepSignal([0.0, 0.05], [0.0, 4.0]),
    u_off=1.0,
)
system = SemiDiscrete(grid, TRM.quadratic(model), Ring(), ramps)

state = DensityState(0.0, np.full(grid.n_cells, 30.0), model.rho_max)
traj = run_euler(state, 0.3, system, stride=10)

for t, mass, rho in zip(traj.times, traj.mass(grid.dx), traj.rho):
    print(f"t={t:6.3f}  mass={mass:8.3f}  max density={rho.max():6.2f}")

###############################################################################
# Mass falls while only the off-ramp is active, then climbs once the meter
# opens; the densities stay inside [0, rho_max] throughout.
