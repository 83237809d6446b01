"""Build zig-zag chain specs and look at their geometry.

The chain lives in the x-z plane: cells repeat along z with period a,
each holding an A atom (left leg) and a B atom (right leg).  The two
topologies group the same zig-zag into opposite dimer pairings.
"""

import numpy as np

from rydphon import ChainSpec, Topology, dipole_unit, magic_angle, trap_centers

spec = ChainSpec(n_cells=7, d=2.0)
print("chain:", spec)
print("atoms:", spec.n_atoms, " cell period a =", spec.a)

print("\nmagic angle:", magic_angle(), "rad")
print("dipole axis m_hat:", dipole_unit(spec.theta, spec.phi))
print("angular factor along the chain axis: 1 - 3cos^2 =",
      1.0 - 3.0 * np.cos(spec.theta) ** 2)

for topology in (Topology.TRIVIAL, Topology.TOPOLOGICAL):
    pos = trap_centers(spec.with_(topology=topology)).positions
    print(f"\n{topology.value} trap centers (first two cells):")
    for k in range(4):
        leg = "A" if k % 2 == 0 else "B"
        print(f"  atom {k} ({leg}): x={pos[k,0]:+.2f}  z={pos[k,2]:+.2f}")

pos = trap_centers(spec).positions
print("\nconsecutive z spacings (a = 2d makes them uniform):",
      np.unique(np.round(np.diff(np.sort(pos[:, 2])), 12)))
