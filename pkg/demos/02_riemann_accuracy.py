"""
Riemann problems and the accuracy tables
========================================

Integrate the semi-discrete schemes on the jam-release (rarefaction) and the
jam-front (shock) problems and measure the error against exact cell averages.
"""

from trafficreaction.experiments import ExperimentConfig, run_accuracy

###############################################################################
# The defaults reproduce the published setup: omega = 1, rho_max = 100, L = 20,
# T = 2/60 and cells centred on the nodes 0, dx, ..., L.

for problem in ("rarefaction", "shock"):
    cfg = ExperimentConfig(kind="accuracy", problem={"type": problem}, n_cells=[10, 50, 100, 300])
    print(f"\n{problem}")
    print("scheme,N,l1,linf")
    for run in run_accuracy(cfg, jobs=4):
        print(run.report.csv_row())

###############################################################################
# The shock here is a stationary jam front: its Rankine-Hugoniot speed is zero
# and both TRM and Godunov keep the initial step exactly, so their errors sit
# at round-off level. Only LxF smears the front.
