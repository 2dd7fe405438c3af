"""
Open-boundary Bethe roots
=========================

Pairs of complex wavevectors quantized by the open ends.  Follow the bound
branches from weak attraction, read off energies and decay rates, and watch
the pair momenta drift toward half-integer multiples of ``pi/d`` as the pair
binds tightly.
"""
import math

from nlsetransport.bethe import bound_parents, bound_state_spectrum, free_state, resonance_kappas

d = 30.0
for r in bound_state_spectrum(d, -1 / 6, 4):
    print(f"n={r.label} (from pair {bound_parents(r.label)}): E = {r.energy.real:.5f}"
          f" {r.energy.imag:+.5f}i   residual {r.residual:.1e}")

res = resonance_kappas(d, (math.pi / d) ** 2, range(1, 4), (-12 / d, -1e-9 / d))
print("Re E_n = 2 delta_res at kappa d =", [(n, round(k * d, 3)) for n, k in res])

# strong repulsion: the (1,1) pair fermionizes onto the (1,2) single-particle momenta
for kd in (1, 10, 100):
    r = free_state(d, 1, 1, kd / d)
    print(f"kappa d = {kd:4d}: Re k d/pi = {r.k1.real * d / math.pi:.3f}, {r.k2.real * d / math.pi:.3f}")

# tight binding at d = 200: Im k -> +-|kappa|/2, Re k d/pi drifts toward n/2
d = 200.0
for kd in (-5.0, -10.0):
    for r in bound_state_spectrum(d, kd / d, 3):
        up = max((r.k1, r.k2), key=lambda k: k.imag)
        print(f"d=200 kappa d={kd:+.0f} n={r.label}: Re k d/pi {up.real * d / math.pi:.3f}, "
              f"Im k/(|kappa|/2) {up.imag / (abs(kd) / d / 2):.3f}")
