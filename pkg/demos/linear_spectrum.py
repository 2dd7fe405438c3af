"""
Linear transmission through the medium
======================================

Without interaction a single photon sees a cavity whose mirrors are the two
open ends.  Transmission peaks sit at ``delta = (n pi / d)**2``.
"""
import numpy as np
from scipy.signal import find_peaks, peak_widths

from nlsetransport.linear_solver import analytic_single_photon, transmission_spectrum
from nlsetransport.params import PhysicalParams, derive_effective_params, first_resonance, make_effective

# lossless medium, d = 30
d = 30.0
p = make_effective(0.5, 0.0, d, first_resonance(d), 1e-3)
rows = transmission_spectrum(p, np.linspace(0.2, 5, 9) * first_resonance(d), n=800)
print("delta/res   T_analytic   T_numeric   T+R-1")
for r in rows:
    print(f"{r.delta / first_resonance(d):8.3f}   {r.T_analytic:.6f}   {r.T_numeric:.6f}"
          f"   {r.T_numeric + r.R_numeric - 1:+.1e}")

# a lossy medium built from atomic parameters, OD = 1000
ph = PhysicalParams(gamma=1.0, gamma_1d=0.5, delta1=10.0, delta2=0.0, delta3=0.0, rabi=1.0,
                    density=2000.0, length=1.0)
q = derive_effective_params(ph, 1e-4)
res = first_resonance(q.d)
print(f"\nOD = {q.od:.0f} gives d = {q.d:.2f}, mass = {q.mass:.4f}")
x = np.linspace(0.3, 30, 20000) * res
t = np.array([analytic_single_photon(q.with_(delta=v)).transmission for v in x])
peaks, _ = find_peaks(t)
w = peak_widths(t, peaks, 0.5)[0] * (x[1] - x[0])
for n, (i, wi) in enumerate(zip(peaks[:5], w), start=1):
    print(f"n={n}: delta/res {x[i] / res:6.3f}  T {t[i]:.3f}  width/delta {wi / x[i]:.3f}")
# higher orders are weaker and relatively narrower, though wider in absolute detuning
