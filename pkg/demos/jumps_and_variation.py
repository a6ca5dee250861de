"""Jump counts and 2.5-variation of the averages (1/N) sum e(xi floor(n^1.5))."""

from hardyergodic import ergodic, hardy

fam = [hardy.parse("t^1.5")]
deltas = [0.4, 0.2, 0.1, 0.05]
for xi in (0.3, 0.123, 1e-3):
    exp = ergodic.jump_experiment(fam, xi, deltas, 2**16, lam=2.0)
    counts = " ".join(f"{c:3d}" for c in exp.counts)
    print(f"xi={xi:<6} counts {counts}  V^2.5={exp.report.variation.value:.4f}  slope={exp.slope:+.2f}")
