"""Where |m_N(xi)| is large for P(t) = t^1.5, and how the rest decays with N."""

import numpy as np

from hardyergodic import expsum, hardy

fam = [hardy.parse("t^1.5")]
xis = expsum.jittered_grid(512, 1, 0)

print(f"{'N':>7} {'box half-width':>15} {'max |m| at |xi|<=4/P(N)':>25} {'minor sup (l=0)':>16}")
for k in range(10, 17, 2):
    N = 2**k
    width = expsum.major_arc_box(fam, N, 0).half_widths[0]
    near = np.linspace(-4, 4, 65)[:, None] / hardy.eval(fam[0], N)
    peak = np.abs(expsum.m_discrete_many(fam, N, near)).max()
    sup = expsum.minor_arc_sup(fam, N, 0, grid_per_dim=512)
    print(f"{N:>7} {width:>15.3e} {peak:>25.4f} {sup:>16.4f}")
