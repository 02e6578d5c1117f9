"""
Bound states of the finite square well
======================================

Solves the single-particle well in one and three dimensions by root
finding on the matching conditions, then fills the levels with
non-interacting fermions to get exact ground-state energies.  These are
the reference numbers every stochastic run in this package is judged
against.
"""
from pauligfmc import bound_states_1d, bound_states_radial, fermi_ground_energy

# the working system: depth 3.5, radius 2, unit mass
V0, R, MASS = 3.5, 2.0, 1.0

# one dimension: even/odd solutions of the matching equation
levels_1d = bound_states_1d(V0, R, MASS)
print("1d well, V0=3.5, halfwidth 2:")
for lv in levels_1d:
    print(f"  {lv.label:>4}  E = {lv.energy:+.6f}")

# two 1d fermions stack the two lowest levels
e2 = fermi_ground_energy(levels_1d, 2)
print(f"two fermions: E0 = {e2:+.6f}")
print()

# three dimensions: s, p, d ... waves from the radial problem; each level
# holds 2l+1 spinless fermions
levels_3d = bound_states_radial(V0, R, MASS)
print("3d well, V0=3.5, R=2:")
for lv in levels_3d:
    print(f"  {lv.label:>4}  E = {lv.energy:+.6f}  (degeneracy {lv.degeneracy})")

# the well binds 10 fermions; filling 9 gives the headline reference value
for n in (5, 9):
    print(f"{n} fermions: E0 = {fermi_ground_energy(levels_3d, n):+.6f}")

# cross-check: odd-parity 1d levels (n1, n3, ...) solve the same matching
# equation as the l=0 radial problem, so they coincide with the s-wave
# energies exactly
odd = [lv for lv in levels_1d if int(lv.label[1:]) % 2 == 1]
s_wave = [lv for lv in levels_3d if lv.ell == 0]
print()
print("max |odd-1d - s-wave| =",
      max(abs(a.energy - b.energy) for a, b in zip(odd, s_wave)))
