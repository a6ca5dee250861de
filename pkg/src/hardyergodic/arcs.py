"""Smooth cutoffs, the major/minor arc split and Littlewood-Paley pieces.

Two lattice models are used:

* ``Z^m`` with finitely supported functions: symbols are applied on a
  zero-padded DFT grid, and a wraparound check guarantees that the cyclic
  convolution agrees with the lattice one to ~1e-9 of the kernel mass;
* the cyclic group ``(Z/G)^m``: averages act exactly as circulant operators,
  which is where operator norms and pure frequencies are measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from . import hardy, variation
from .ergodic import lattice_average_trace
from .expsum import major_arc_box, m_discrete_trace, orbit_matrix, reduce_torus
from .hardy import HardyFunction
from .lattice import Character, LatticeFunction

__all__ = [
    "ArcConfig",
    "AnnularPiece",
    "GridTooSmallError",
    "psi",
    "psi_leq",
    "dyadic_scale",
    "major_arc_level",
    "major_symbol",
    "phi_Nl",
    "project_major",
    "orbit_kernel_symbol",
    "cyclic_average",
    "minor_arc_operator_ratio",
    "operator_ratio_sweep",
    "pure_frequency_ratio",
    "lp_envelope",
    "littlewood_paley_partition",
    "square_function",
    "short_variation_instance",
]

WRAP_TOLERANCE = 1e-9
MAX_GRID_POINTS = 1 << 24


class GridTooSmallError(RuntimeError):
    """The DFT grid cannot hold the convolution kernel without wraparound."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _next_pow2(n: float) -> int:
    return 1 << max(0, math.ceil(math.log2(max(n, 1))))


@dataclass(frozen=True)
class ArcConfig:
    """Decomposition constants and the per-dimension DFT size (``None`` = automatic)."""

    C0: int = 1
    C1: int = 2
    C2: int = 16
    grid_size: int | None = None

    def __post_init__(self):
        for name in ("C0", "C1", "C2"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.grid_size is not None and not _is_pow2(int(self.grid_size)):
            raise ValueError("grid_size must be a power of two")


@dataclass(frozen=True)
class AnnularPiece:
    N: int
    l: int
    family: tuple[HardyFunction, ...]

    def outer_box(self) -> tuple[float, ...]:
        """Box containing the support: half widths ``2^(l+1) / |P_i(N)|``."""
        return tuple(2.0 ** (self.l + 1) / abs(hardy.eval(P, self.N)) for P in self.family)

    def inner_box(self) -> tuple[float, ...]:
        """Box on which the piece vanishes (for ``l > -C1``): ``2^(l-2) / |P_i(N)|``."""
        return tuple(2.0 ** (self.l - 2) / abs(hardy.eval(P, self.N)) for P in self.family)

    def __call__(self, cfg: ArcConfig, xi) -> np.ndarray:
        return phi_Nl(cfg, self.family, self.N, self.l, xi)


# ---------------------------------------------------------------------------
# cutoffs


def _sigma(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _smoothstep(u: np.ndarray) -> np.ndarray:
    a = _sigma(u)
    b = _sigma(1.0 - u)
    return a / (a + b)


def psi(x):
    """Even smooth bump: 1 on ``[-1/2, 1/2]``, 0 off ``(-1, 1)``."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.where(x <= 0.5, 1.0, 0.0)
    mid = (x > 0.5) & (x < 1.0)
    if np.any(mid):
        out[mid] = _smoothstep(2.0 * (1.0 - x[mid]))
    return float(out) if out.ndim == 0 else out


def dyadic_scale(x: float) -> float:
    """``2^ceil(log2 x)``, exact at powers of two."""
    if not x > 0:
        raise ValueError("dyadic_scale needs a positive argument")
    mant, exp = math.frexp(x)
    return math.ldexp(1.0, exp - 1 if mant == 0.5 else exp)


def psi_leq(threshold: float, xi):
    """``psi(xi / 2^ceil(log2 threshold))``."""
    return psi(np.asarray(xi, dtype=float) / dyadic_scale(threshold))


def major_arc_level(cfg: ArcConfig, N: int) -> int:
    """``floor(C0 * log2 log2 N)``."""
    if N < 2:
        raise ValueError("N must be at least 2")
    return math.floor(cfg.C0 * math.log2(math.log2(N)))


def _points(xi, m: int) -> tuple[np.ndarray, bool]:
    """Coerce to shape ``(..., m)``; the flag marks a single point."""
    a = np.asarray(xi, dtype=float)
    if m == 1 and (a.ndim == 0 or a.shape[-1] != 1):
        a = a[..., None]
    if a.shape[-1] != m:
        raise ValueError(f"points need {m} coordinates, got shape {a.shape}")
    return a, a.ndim == 1


def _product_cutoff(widths: Sequence[float], xi):
    pts, single = _points(xi, len(widths))
    out = np.ones(pts.shape[:-1])
    for i, w in enumerate(widths):
        out = out * psi_leq(w, pts[..., i])
    return float(out) if single else out


def _widths(family: Sequence[HardyFunction], N: float, scale: float) -> list[float]:
    return [scale / abs(hardy.eval(P, float(N))) for P in family]


def major_symbol(cfg: ArcConfig, family: Sequence[HardyFunction], N: int, xi):
    """``prod_i psi_{<= 2^(l_N) / |P_i(N)|}(xi_i)``."""
    return _product_cutoff(_widths(family, N, 2.0 ** major_arc_level(cfg, N)), xi)


def phi_Nl(cfg: ArcConfig, family: Sequence[HardyFunction], N: int, l: int, xi):
    """Annular piece: difference of consecutive dyadic cutoffs, the bare cutoff at ``l = -C1``.

    ``xi`` is one point (length ``m``) or an array of points with coordinates
    on the last axis.
    """
    if l < -cfg.C1:
        raise ValueError(f"l must be at least -C1 = {-cfg.C1}")
    outer = _product_cutoff(_widths(family, N, 2.0**l), xi)
    if l > -cfg.C1:
        outer = outer - _product_cutoff(_widths(family, N, 2.0 ** (l - 1)), xi)
    return outer


# ---------------------------------------------------------------------------
# DFT grids


def _grid_freqs(shape: Sequence[int]) -> list[np.ndarray]:
    return list(np.meshgrid(*[np.fft.fftfreq(g) for g in shape], indexing="ij"))


def _symbol_on_grid(symbol: Callable[[np.ndarray], np.ndarray], shape: Sequence[int]) -> np.ndarray:
    freqs = _grid_freqs(shape)
    pts = np.stack(freqs, axis=-1).reshape(-1, len(shape))
    return np.asarray(symbol(pts), dtype=float).reshape(tuple(shape))


def _wrap_fraction(symbol_grid: np.ndarray) -> float:
    """Share of kernel l1 mass at circular distance >= G/4 in some coordinate."""
    kernel = np.abs(np.fft.ifftn(symbol_grid))
    total = kernel.sum()
    if total == 0:
        return 0.0
    far = np.zeros(kernel.shape, dtype=bool)
    for axis, g in enumerate(kernel.shape):
        idx = np.arange(g)
        dist = np.minimum(idx, g - idx)
        shape = [1] * kernel.ndim
        shape[axis] = g
        far |= (dist >= g / 4).reshape(shape)
    return float(kernel[far].sum() / total)


def _choose_grid(widths: Sequence[int], symbols, requested: int | None) -> tuple[int, ...]:
    base = [_next_pow2(4 * w) for w in widths]
    if requested is not None:
        shape = tuple(int(requested) for _ in widths)
        if any(g < b for g, b in zip(shape, base)):
            raise GridTooSmallError(f"grid {requested} is smaller than 4x the support width {max(widths)}")
        for s in symbols:
            frac = _wrap_fraction(_symbol_on_grid(s, shape))
            if frac >= WRAP_TOLERANCE:
                raise GridTooSmallError(f"kernel wraparound mass {frac:.3g} exceeds {WRAP_TOLERANCE:g} on grid {requested}")
        return shape
    shape = tuple(base)
    while True:
        if int(np.prod(shape)) > MAX_GRID_POINTS:
            raise GridTooSmallError("no grid within the size cap keeps the kernel wraparound below tolerance")
        if all(_wrap_fraction(_symbol_on_grid(s, shape)) < WRAP_TOLERANCE for s in symbols):
            return shape
        shape = tuple(2 * g for g in shape)


def _apply_symbols(f: LatticeFunction, symbols, grid_size: int | None, periodic: bool):
    """Place ``f`` on the grid and return (grid lower corner, DFT, symbol arrays)."""
    if periodic:
        shape = f.shape
        lower = f.lower
        placed = np.asarray(f.values, dtype=complex)
    else:
        shape = _choose_grid(f.shape, symbols, grid_size)
        lower = tuple(lo - (g - w) // 2 for lo, g, w in zip(f.lower, shape, f.shape))
        placed = f.embed(lower, shape).values
    F = np.fft.fftn(placed)
    grids = [_symbol_on_grid(s, shape) for s in symbols]
    return lower, F, grids


def project_major(cfg: ArcConfig, f: LatticeFunction, family: Sequence[HardyFunction], N: int,
                  periodic: bool = False) -> LatticeFunction:
    """Fourier projection of ``f`` with the major-arc cutoff at level ``l_N``.

    The result lives on the DFT grid box; ``f - project_major(...)`` is the
    minor-arc part.
    """
    if len(family) != f.m:
        raise ValueError("family size does not match the lattice dimension")

    def symbol(pts):
        return major_symbol(cfg, family, N, pts)

    lower, F, (S,) = _apply_symbols(f, [symbol], cfg.grid_size, periodic)
    return LatticeFunction(lower, np.fft.ifftn(F * S))


# ---------------------------------------------------------------------------
# cyclic averages


def _cyclic_shape(cfg: ArcConfig, family: Sequence[HardyFunction], N: int) -> tuple[int, ...]:
    need = tuple(_next_pow2(4 * abs(hardy.eval(P, float(N)))) for P in family)
    if cfg.grid_size is not None:
        shape = tuple(int(cfg.grid_size) for _ in family)
        if any(g < n for g, n in zip(shape, need)):
            raise GridTooSmallError(f"cyclic grid {cfg.grid_size} is below 4 max|P_i(N)| (needs {max(need)})")
    else:
        shape = need
    if int(np.prod(shape)) > MAX_GRID_POINTS:
        raise GridTooSmallError(f"cyclic grid {shape} exceeds the size cap of {MAX_GRID_POINTS} points")
    return shape


def orbit_kernel_symbol(family: Sequence[HardyFunction], N: int, shape: Sequence[int], upper_half: bool = True,
                        workers: int = 1) -> np.ndarray:
    """DFT of the orbit counting kernel ``(1/N) #{n : floor(P(n)) = y mod G}``."""
    orbit = orbit_matrix(family, N)[:, (N // 2 if upper_half else 0):]
    hist = np.zeros(tuple(shape))
    np.add.at(hist, tuple(np.mod(row, g) for row, g in zip(orbit, shape)), 1.0)
    return sfft.fftn(hist / N, workers=workers)


def cyclic_average(values: np.ndarray, kernel_symbol: np.ndarray, workers: int = 1) -> np.ndarray:
    """``A_N f`` on ``(Z/G)^m`` as a circular convolution with the orbit kernel."""
    return sfft.ifftn(sfft.fftn(values, workers=workers) * kernel_symbol, workers=workers)


def _box_mask(family, N, l, shape) -> np.ndarray:
    box = np.asarray(major_arc_box(family, N, l).half_widths)
    freqs = _grid_freqs(shape)
    inside = np.ones(tuple(shape), dtype=bool)
    for fr, w in zip(freqs, box):
        inside &= np.abs(fr) <= w
    return inside


def _operator_ratios(cfg, family, N, l, trials, seed, workers=1) -> np.ndarray:
    if trials < 8:
        raise ValueError("trials must be at least 8")
    shape = _cyclic_shape(cfg, family, N)
    K = orbit_kernel_symbol(family, N, shape, workers=workers)
    inside = _box_mask(family, N, l, shape)
    ratios = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        f = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        F = sfft.fftn(f, workers=workers)
        F[inside] = 0.0
        # Parseval: both norms can be read off on the frequency side
        norm = np.linalg.norm(F)
        if norm == 0:
            continue
        ratios.append(np.linalg.norm(F * K) / norm)
    if not ratios:
        raise RuntimeError("every trial function vanished after removing the major arc")
    return np.asarray(ratios)


def minor_arc_operator_ratio(cfg: ArcConfig, family: Sequence[HardyFunction], N: int, l: int,
                             trials: int = 32, seed: int = 0, workers: int = 1) -> float:
    """Largest ``||A_N f|| / ||f||`` over random ``f`` whose DFT vanishes on the major box."""
    return float(_operator_ratios(cfg, family, N, l, trials, seed, workers).max())


def operator_ratio_sweep(cfg: ArcConfig, family: Sequence[HardyFunction], Ns: Sequence[int], ls: Sequence[int],
                         trials: int = 32, seed: int = 0, workers: int = 1) -> list[tuple]:
    """Rows ``(N, l, trials, max_ratio, median_ratio)``."""
    rows = []
    for N in Ns:
        for l in ls:
            r = _operator_ratios(cfg, family, int(N), int(l), trials, seed, workers)
            rows.append((int(N), int(l), int(trials), float(r.max()), float(np.median(r))))
    return rows


def pure_frequency_ratio(cfg: ArcConfig, family: Sequence[HardyFunction], N: int, freq_index: Sequence[int]) -> tuple[float, tuple[float, ...]]:
    """``||A_N f|| / ||f||`` for ``f = e(xi . x)`` at the grid frequency ``freq_index / G``.

    Returns the ratio and the frequency in ``[-1/2, 1/2)^m``.
    """
    shape = _cyclic_shape(cfg, family, N)
    xi = tuple(float(reduce_torus(k / g)) for k, g in zip(np.atleast_1d(freq_index), shape))
    axes = np.meshgrid(*[np.arange(g) for g in shape], indexing="ij")
    f = Character(xi).at(np.stack(axes, axis=-1))
    Af = cyclic_average(f, orbit_kernel_symbol(family, N, shape))
    return float(np.linalg.norm(Af) / np.linalg.norm(f)), xi


# ---------------------------------------------------------------------------
# Littlewood-Paley


LP_HALF = 0.5


def lp_envelope(family: Sequence[HardyFunction], j: int, xi):
    """``u_j(xi) = prod_i psi_{<= 1/(2 |P_i(2^j)|)}(xi_i)``."""
    return _product_cutoff(_widths(family, 2.0**j, LP_HALF), xi)


def littlewood_paley_partition(family: Sequence[HardyFunction], j: int, xi):
    """``eta_j = u_j - u_{j+1}``, so that ``sum_{j<=J} eta_j = u_1 - u_{J+1}``."""
    if j < 1:
        raise ValueError("j must be at least 1")
    return lp_envelope(family, j, xi) - lp_envelope(family, j + 1, xi)


def square_function(family: Sequence[HardyFunction], f: LatticeFunction, j_max: int,
                    grid_size: int | None = None, periodic: bool = False) -> LatticeFunction:
    """``Sf = (sum_{j=1}^{j_max} |f * check(eta_j)|^2)^(1/2)`` on the DFT grid."""
    if len(family) != f.m:
        raise ValueError("family size does not match the lattice dimension")
    symbols = [
        (lambda pts, j=j: littlewood_paley_partition(family, j, pts)) for j in range(1, j_max + 1)
    ]
    lower, F, grids = _apply_symbols(f, symbols, grid_size, periodic)
    total = np.zeros(F.shape)
    for S in grids:
        total += np.abs(np.fft.ifftn(F * S)) ** 2
    return LatticeFunction(lower, np.sqrt(total))


# ---------------------------------------------------------------------------
# short variation


@dataclass(frozen=True)
class ShortVariationInstance:
    k: int
    xi: tuple[float, ...]
    v2_average: float
    v2_multiplier: float
    v2_nu: float
    A: float
    a: float

    @property
    def bound(self) -> float:
        return math.sqrt(2**self.k * self.A * self.a)

    def holds(self, safety: float = 4.0) -> bool:
        return self.v2_nu <= safety * self.bound


def short_variation_instance(family: Sequence[HardyFunction], k: int, xi, x=0) -> ShortVariationInstance:
    """Variation over ``I_k = {2^k..2^(k+1)}`` for ``f = e(xi . x)``.

    ``v2_average`` is ``V^2(A_N f(x))`` from direct orbit sums, ``v2_multiplier``
    is ``V^2(m_N(xi))``, and ``v2_nu`` is the ``V^2`` norm of
    ``nu_N = m_N - m_{2^k}`` whose size ``A`` and step ``a`` enter the bound.
    """
    xi = tuple(float(v) for v in np.atleast_1d(xi))
    scales = np.arange(2**k, 2 ** (k + 1) + 1)
    trace = lattice_average_trace(Character(xi), family, scales, x, upper_half=True)
    m = m_discrete_trace(family, xi, scales, upper_half=True)
    nu = m - m[0]
    v2_avg = variation.vr_norm(trace.as_sequence(), 2.0).value
    v2_m = variation.vr_norm(variation.IndexedSequence(scales, m), 2.0).value
    v2_nu = variation.vr_norm(variation.IndexedSequence(scales, nu), 2.0).value
    A = float(np.abs(nu).max())
    a = float(np.abs(np.diff(nu)).max())
    return ShortVariationInstance(int(k), xi, v2_avg, v2_m, v2_nu, A, a)
