"""
A road as a chemical reaction network
=====================================

Each segment holds vehicles N_i and free slots S_i. Moving one vehicle
downstream is the reaction N_a + S_b -> N_b + S_a.
"""

import numpy as np

from trafficreaction import build_network, reduce_to_trm, simulate_mass_action, stoichiometric_subspace
from trafficreaction.crn import to_dot

net = build_network(3)
print("species:", net.species)
print("complexes:", [net.complex_label(j) for j in range(net.n_complexes)])
print("Y =")
print(net.Y)
print("stoichiometric subspace basis:")
print(stoichiometric_subspace(net))

###############################################################################
# With s_i = c_i - n_i eliminated the vehicle dynamics is the TRM scheme with
# k = omega / dx and c_i = rho_max.

red = reduce_to_trm(net, 100.0)
print("\nreduced field at n = (60, 30, 10):", red(np.array([60.0, 30.0, 10.0])))

###############################################################################
# n_i + s_i is a first integral of every segment.

x0 = np.array([60.0, 30.0, 10.0, 40.0, 70.0, 90.0])
t, X = simulate_mass_action(net, x0, 0.2, n_samples=5)
for tk, xk in zip(t, X):
    print(f"t={tk:.2f}  n={np.round(xk[:3], 3)}  n+s={np.round(xk[:3] + xk[3:], 12)}")

print()
print(to_dot(build_network(3, "ring", k=0.5, k_on={1: 0.2}, k_off={1: 0.1})))
