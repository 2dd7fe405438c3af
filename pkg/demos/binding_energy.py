"""
Binding energy of a photon pair
===============================

In a large closed box the relative motion of two attracting photons has a
single bound level at ``-kappa**2 / 2`` (for ``m = 1/2``).
"""
from nlsetransport.nlse2 import bound_state_binding_check

for kappa, box in ((-0.5, 80.0), (-1.0, 40.0)):
    for n in (400, 800, 1600):
        e = bound_state_binding_check(kappa, 0.5, box, n)
        print(f"kappa={kappa:+.1f} n={n:5d}: E = {e:.7f}  (exact {-kappa**2 / 2:.4f})")
