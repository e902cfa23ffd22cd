"""Bound states of the charger-battery pair below the waveguide cutoff.

Scans the emitter frequency at fixed separation, then the separation at
fixed frequency, and prints where the number of bound states changes.

Run: python3 demos/01_bound_states.py
"""

from qbwg import SystemParams, find_bound_states
from qbwg.spectrum import find_transitions, refine_threshold, spectrum_sweep

base = SystemParams(omega0=1.0, gamma11=0.5, delta_z=0.1)

# One point first: at omega0 = omega_11 both parity branches bind.
res = find_bound_states(base)
for s in res.states:
    print(f"branch {s.label}: E = {s.energy:.6f}  Z = {s.residue:.6f}")

# Frequency scan. The antisymmetric state leaves near omega0 = 1.11.
pts = spectrum_sweep(base, "omega0", 0.5, 3.5, 61)
for tr in find_transitions(pts):
    print(f"omega0 in [{tr.lo:.2f}, {tr.hi:.2f}]: M {tr.before[0]} -> {tr.after[0]}")
    if tr.before[0] == 2:
        exact = refine_threshold(base, "omega0", tr.lo, tr.hi, -1)
        print(f"  refined threshold omega0* = {exact:.5f}")

# The symmetric state never unbinds, it only fades: its residue keeps shrinking.
for w in (2.0, 3.0, 3.5):
    s = find_bound_states(base.replace(omega0=w)).plus
    print(f"omega0 = {w}: 1 - E+ = {1 - s.energy:.4f}, Z+ = {s.residue:.4f}")

# Separation scan at omega0 = 1.4: a second state appears near dz = 0.3.
pts = spectrum_sweep(base.replace(omega0=1.4), "delta_z", 0.05, 2.5, 50)
for tr in find_transitions(pts):
    print(f"delta_z in [{tr.lo:.2f}, {tr.hi:.2f}]: M {tr.before[0]} -> {tr.after[0]}")
for pt in pts[::10]:
    r = pt.result
    if r.count == 2:
        print(f"delta_z = {pt.axis_value:.2f}: E+ - E- = {r.plus.energy - r.minus.energy:+.2e}")
