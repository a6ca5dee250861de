"""Minor-arc piece of the averaging operator on random trial functions."""

from hardyergodic import arcs, hardy

fam = [hardy.parse("t^1.5")]
cfg = arcs.ArcConfig()
for N, l, trials, mx, med in arcs.operator_ratio_sweep(cfg, fam, [2**10], [2, 4, 6], trials=8, seed=0):
    print(f"N={N} l={l} trials={trials} max ratio {mx:.4f} median {med:.4f}")
