"""Radial discretization: hydrogen spectrum, Newton potential, dilations.

The grid is uniform with Dirichlet ends; the kinetic stencil is second
order, so bare-operator eigenvalues converge at O(h^2) toward -Z^2/(4 j^2).
The Hartree potential is assembled by the shell decomposition (inner charge
over r plus outer shells at their own radius) and never exceeds q/r.
"""

import numpy as np

from fermitherm import (
    DensityMatrix,
    build_grid,
    density_from_gamma,
    dilate,
    hartree_potential,
    hf_energy,
    kinetic_matrix,
    nuclear_potential,
)

grid = build_grid(1500, 60.0)
h_bare = kinetic_matrix(grid, 0) + np.diag(nuclear_potential(grid, 1.0))
levels = np.linalg.eigvalsh(h_bare)[:3]
print("l=0 spectrum of -d^2/dr^2 - 1/r on the grid (n=1500, r_max=60):")
for j, e in enumerate(levels, start=1):
    exact = -0.25 / j**2
    print(f"  j={j}: {e:+.8f}  exact {exact:+.8f}  error {e - exact:+.2e}")

coarse = build_grid(750, 60.0)
h_coarse = kinetic_matrix(coarse, 0) + np.diag(nuclear_potential(coarse, 1.0))
e_coarse = np.linalg.eigvalsh(h_coarse)[0]
ratio = (e_coarse + 0.25) / (levels[0] + 0.25)
print(f"\nhalving h shrinks the ground-level error by {ratio:.2f} (O(h^2) -> ~4)")

# ground orbital -> density -> Hartree potential
_, vecs = np.linalg.eigh(h_bare)
u = vecs[:, 0]
gamma = DensityMatrix(grid=grid, blocks=[np.outer(u, u)])
rho = density_from_gamma(gamma)
v_h = hartree_potential(grid, rho)
print(f"\ntotal charge: {rho.charge:.12f}")
print(f"max of r*V_H (Newton bound says <= charge): {np.max(grid.r * v_h):.12f}")
print(f"far field r_max*V_H(r_max): {grid.r[-1] * v_h[-1]:.12f}")

# dilation turns the scaling laws into exact identities
base = hf_energy(gamma, Z=0.0)
contracted = hf_energy(dilate(gamma, 2.0), Z=0.0)
print(f"\ndilation by eta=2 (Z=0): kinetic x{contracted.kinetic / base.kinetic:.12f}, "
      f"direct x{contracted.direct / base.direct:.12f}")
