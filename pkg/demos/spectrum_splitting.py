"""Level splitting of the two-mode q-oscillator.

At q = 1 the levels with the same total number of quanta are degenerate.  For
q < 1 the energy depends on the ordered tail sums of the occupations, so
(1,0) and (0,1) separate.  The gap closes linearly as q -> 1.
"""

from glq import FockSpace, spectrum
from glq.qqm import closed_form_energy

space = FockSpace(2, 4)

print("q = 0.5, lowest levels")
print(f"{'label':<8}{'numeric':>10}{'closed form':>14}{'single-N form':>15}")
for e in spectrum(space, 0.5)[:8]:
    print(f"{str(e.label):<8}{e.energy_numeric:>10.4f}{e.energy_closed_form:>14.4f}{e.energy_printed:>15.4f}")

print("\nsplitting E(1,0) - E(0,1) as q -> 1")
for q in (0.5, 0.9, 0.99, 0.999):
    gap = closed_form_energy((1, 0), q) - closed_form_energy((0, 1), q)
    print(f"  q = {q:<6} gap = {gap:.6f}   gap/(1-q) = {gap / (1 - q):.4f}")

# adding a quantum to the second mode can lower the energy
low, high = closed_form_energy((2, 1), 0.5), closed_form_energy((2, 0), 0.5)
print(f"\nE(2,1) = {low}  <  E(2,0) = {high}")
