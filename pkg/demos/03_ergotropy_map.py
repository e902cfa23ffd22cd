"""Long-time stored energy and ergotropy over frequency and separation.

Uses the bound-state residues directly, so the whole map takes seconds.

Run: python3 demos/03_ergotropy_map.py
"""

import numpy as np

from qbwg import SystemParams, find_bound_states
from qbwg.model import PhysicalWaveguide
from qbwg.observables import steady_extrema
from qbwg.spectrum import sweep_values

omegas = sweep_values(0.5, 1.5, 11)
dzs = sweep_values(0.1, 1.0, 4)

print("max ergotropy (rows: delta_z, columns: omega0)")
print("dz   " + " ".join(f"{w:6.2f}" for w in omegas))
for dz in dzs:
    row = []
    for w in omegas:
        spec = find_bound_states(SystemParams(float(w), 0.5, float(dz)))
        row.append(steady_extrema(spec, float(w))["max_ergotropy"])
    print(f"{dz:4.1f} " + " ".join(f"{x:6.3f}" for x in row))

ext = steady_extrema(find_bound_states(SystemParams(1.0, 0.5, 0.1)), 1.0)
print(f"omega0 = 1.0: peak stored energy {ext['max_energy']:.3f}")

# Which square waveguide puts a 637 nm emitter at these frequencies?
for a in (0.45e-6, 0.27e-6):
    geom = PhysicalWaveguide.centered(a, a, 1e-29, 637e-9)
    print(f"a = b = {a * 1e6:.2f} um -> omega0/omega11 = {geom.omega0_ratio():.3f}")
