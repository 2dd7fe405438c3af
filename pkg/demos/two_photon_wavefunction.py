"""
Two-photon wavefunction inside the medium
=========================================

``|phi(z1, z2)|`` for three interaction strengths.  Repulsion carves a cusp
along ``z1 = z2``; attraction near the second bound-state resonance piles the
pair onto the diagonal.  The maps are written as CSV for plotting.
"""
from pathlib import Path

import numpy as np

from nlsetransport.fields import Grid, write_phi_abs
from nlsetransport.nlse2 import solve_steady_state
from nlsetransport.params import first_resonance, make_effective

d = 30.0
grid = Grid(151, d)
out = Path("wavefunctions")
out.mkdir(exist_ok=True)
sep = np.abs(grid.z[:, None] - grid.z[None, :])

for kd in (0.0, 15.0, -5.3):
    p = make_effective(0.5, kd / d, d, first_resonance(d), 1e-4)
    phi = np.abs(solve_steady_state(p, grid).phi)
    off = phi.copy()
    np.fill_diagonal(off, 0)
    print(f"kappa d = {kd:+5.1f}: diag/off-diag max {np.diagonal(phi).max() / off.max():.3f}, "
          f"near/far mean {phi[sep < 2].mean() / phi[sep > d / 3].mean():.2f}")
    write_phi_abs(out / f"phi_abs_kd{kd:+.1f}.csv", phi)
