"""
Steady state against time evolution
===================================

Switch the drive on at ``t = 0`` and integrate both envelopes until the
once-per-period samples of ``g2`` settle; compare with the direct steady solve.
"""
from nlsetransport.fields import Grid
from nlsetransport.nlse2 import evolve_time_domain, solve_steady_state
from nlsetransport.observables import g2_zero
from nlsetransport.params import first_resonance, make_effective

d = 30.0
grid = Grid(60, d)
for kd in (0.0, -5.0):
    p = make_effective(0.5, kd / d, d, first_resonance(d), 1e-4)
    steady = g2_zero(solve_steady_state(p, grid))
    ev = evolve_time_domain(p, grid, t_final=20000, dt=0.3)
    print(f"kappa d = {kd:+.0f}: steady g2 {steady:.5f}, time-domain {ev.g2[-1]:.5f} after "
          f"t = {ev.t_final:.0f} ({'settled' if ev.converged else 'still drifting'})")
