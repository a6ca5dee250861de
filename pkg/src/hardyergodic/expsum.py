"""Exponential-sum multipliers attached to Hardy floor orbits.

The discrete multiplier is

    m_N(xi) = (1/N) * sum_{n<=N} [n > N/2] e(xi . floor(P(n)))

with ``e(x) = exp(2 pi i x)``; its continuous counterpart integrates
``e(xi . P(t))`` over ``[N/2, N]``.  Phases ``xi * k`` for integer ``k`` are
reduced modulo 1 exactly (Veltkamp splitting) so that orbit values up to 2^52
do not destroy the phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from . import hardy
from .hardy import HardyFunction

__all__ = [
    "TorusPoint",
    "MajorArcBox",
    "SawtoothExpansion",
    "QuadratureError",
    "reduce_torus",
    "frac_product",
    "orbit_matrix",
    "m_discrete",
    "m_discrete_many",
    "m_discrete_trace",
    "m_continuous",
    "major_arc_box",
    "jittered_grid",
    "scan",
    "minor_arc_sup",
    "smooth_exponential_sum",
    "vdc_bound",
    "derivative_range",
    "sawtooth_expansion",
    "correlation_function",
    "exceptional_measure",
]

TWO_PI = 2.0 * math.pi
_SPLITTER = 134217729.0  # 2**27 + 1
_K_SPLIT = 26
# complex entries per chunk in batched multiplier evaluation
_CHUNK = 1 << 22


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


def reduce_torus(x):
    """Map reals to the canonical box ``[-1/2, 1/2)``."""
    x = np.asarray(x, dtype=float)
    # x - rint(x) is exact, so the map is odd away from the seam at 1/2
    r = x - np.rint(x)
    return np.where(r >= 0.5, r - 1.0, r)


@dataclass(frozen=True)
class TorusPoint:
    """A frequency in ``T^m`` stored in ``[-1/2, 1/2)^m``."""

    coords: tuple[float, ...]

    def __post_init__(self):
        c = np.atleast_1d(reduce_torus(self.coords)).astype(float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("a torus point needs at least one coordinate")
        object.__setattr__(self, "coords", tuple(float(v) for v in c))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def norm(self) -> tuple[float, ...]:
        """Coordinatewise distance to the nearest integer."""
        return tuple(abs(c) for c in self.coords)

    def __neg__(self) -> "TorusPoint":
        return TorusPoint(tuple(-c for c in self.coords))

    def array(self) -> np.ndarray:
        return np.array(self.coords)


def _as_point(xi) -> TorusPoint:
    if isinstance(xi, TorusPoint):
        return xi
    return TorusPoint(tuple(np.atleast_1d(np.asarray(xi, dtype=float))))


@dataclass(frozen=True)
class MajorArcBox:
    """Coordinate box ``prod_i [-w_i, w_i]`` around the origin of ``T^m``."""

    half_widths: tuple[float, ...]

    def contains(self, xi) -> bool:
        xi = _as_point(xi)
        return all(abs(c) <= w for c, w in zip(xi.coords, self.half_widths))

    def contains_many(self, xis: np.ndarray) -> np.ndarray:
        xis = np.atleast_2d(np.asarray(xis, dtype=float))
        return np.all(np.abs(reduce_torus(xis)) <= np.asarray(self.half_widths), axis=1)


# ---------------------------------------------------------------------------
# exact phase reduction


def _split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = _SPLITTER * x
    hi = c - (c - x)
    return hi, x - hi


def frac_product(xi, k) -> np.ndarray:
    """Return ``xi*k - round(xi*k)`` for float ``xi`` and integer ``k``.

    All four partial products of the split operands are exact in float64, so
    the result is accurate to a few ulps of 1 for ``|k| < 2**52``.  The map is
    odd in ``xi`` bit for bit, which makes conjugate symmetry of the
    multipliers exact.
    """
    xi = np.asarray(xi, dtype=float)
    k = np.asarray(k, dtype=np.int64)
    xh, xl = _split(xi)
    kh = (k >> _K_SPLIT) << _K_SPLIT
    kl = (k - kh).astype(float)
    kh = kh.astype(float)
    s = np.zeros(np.broadcast(xi, k).shape)
    for p in (xh * kh, xh * kl, xl * kh, xl * kl):
        s = s + (p - np.rint(p))
    return s - np.rint(s)


@lru_cache(maxsize=64)
def _orbit_cached(family: tuple[HardyFunction, ...], N: int) -> np.ndarray:
    rows = np.stack([hardy.floor_orbit(P, N) for P in family])
    rows.setflags(write=False)
    return rows


def orbit_matrix(family: Sequence[HardyFunction], N: int) -> np.ndarray:
    """Integer array of shape ``(m, N)`` with ``floor(P_i(n))`` for ``n = 1..N``."""
    return _orbit_cached(tuple(family), int(N))


def _first_index(N: int, upper_half: bool) -> int:
    # n > N/2  <=>  n >= N//2 + 1, stored at offset N//2
    return N // 2 if upper_half else 0


def _check_dims(family, xi: TorusPoint) -> None:
    if len(family) != xi.dim:
        raise ValueError(f"dimension mismatch: {len(family)} functions, xi has {xi.dim} coordinates")


def _phases(orbit: np.ndarray, xis: np.ndarray) -> np.ndarray:
    # orbit (m, n), xis (p, m) -> reduced phases (p, n)
    theta = np.zeros((xis.shape[0], orbit.shape[1]))
    for i in range(orbit.shape[0]):
        theta += frac_product(xis[:, i : i + 1], orbit[i][None, :])
    return theta - np.rint(theta)


def m_discrete(family: Sequence[HardyFunction], N: int, xi, upper_half: bool = True) -> complex:
    """Discrete multiplier at a single frequency, with exactly rounded sums."""
    xi = _as_point(xi)
    _check_dims(family, xi)
    N = int(N)
    orbit = orbit_matrix(family, N)[:, _first_index(N, upper_half) :]
    theta = _phases(orbit, xi.array()[None, :])[0]
    ang = TWO_PI * theta
    re = math.fsum(np.cos(ang))
    im = math.fsum(np.sin(ang))
    return complex(re / N, im / N)


def _as_rows(xis, m: int) -> np.ndarray:
    xis = reduce_torus(np.asarray(xis, dtype=float))
    if xis.ndim <= 1 and m == 1:
        return xis.reshape(-1, 1)
    return np.atleast_2d(xis)


def m_discrete_many(family: Sequence[HardyFunction], N: int, xis, upper_half: bool = True) -> np.ndarray:
    """Discrete multiplier at many frequencies (rows of ``xis``), pairwise summed."""
    xis = _as_rows(xis, len(family))
    if xis.shape[1] != len(family):
        raise ValueError(f"dimension mismatch: {len(family)} functions, frequencies have {xis.shape[1]} coordinates")
    N = int(N)
    orbit = orbit_matrix(family, N)[:, _first_index(N, upper_half) :]
    out = np.empty(xis.shape[0], dtype=complex)
    step = max(1, _CHUNK // orbit.shape[1])
    for s in range(0, xis.shape[0], step):
        ang = TWO_PI * _phases(orbit, xis[s : s + step])
        out[s : s + step] = (np.cos(ang).sum(axis=1) + 1j * np.sin(ang).sum(axis=1)) / N
    return out


def m_discrete_trace(family: Sequence[HardyFunction], xi, scales, upper_half: bool = True) -> np.ndarray:
    """Discrete multiplier at one frequency for every ``N`` in ``scales`` (one pass)."""
    xi = _as_point(xi)
    _check_dims(family, xi)
    scales = np.asarray(scales, dtype=np.int64).ravel()
    if scales.size == 0 or scales.min() < 1:
        raise ValueError("scales must be positive")
    orbit = orbit_matrix(family, int(max(scales.max(), 2)))
    ang = TWO_PI * _phases(orbit, xi.array()[None, :])[0]
    # extended-precision prefix sums keep every snapshot close to a direct sum
    re = np.concatenate([[0.0], np.cumsum(np.cos(ang), dtype=np.longdouble)])
    im = np.concatenate([[0.0], np.cumsum(np.sin(ang), dtype=np.longdouble)])
    lo = scales // 2 if upper_half else np.zeros_like(scales)
    return ((re[scales] - re[lo]).astype(float) + 1j * (im[scales] - im[lo]).astype(float)) / scales


# ---------------------------------------------------------------------------
# continuous multiplier


_GL_ORDER = 16


def m_continuous(
    family: Sequence[HardyFunction],
    N: int,
    xi,
    tol: float = 1e-10,
    max_panels: int = 1 << 20,
) -> complex:
    """``(1/N) * integral_{N/2}^{N} e(xi . P(t)) dt`` by composite Gauss-Legendre.

    The starting panel count follows the number of phase oscillations on
    ``[N/2, N]``; panels are doubled until two successive levels agree to
    ``tol``.
    """
    xi = _as_point(xi)
    _check_dims(family, xi)
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = int(N)
    if N < 4:
        raise hardy.HardyDomainError("m_continuous needs N >= 4 so that [N/2, N] lies in t >= 2")
    coords = xi.array()
    if not np.any(coords):
        return complex(0.5)
    a, b = N / 2.0, float(N)
    osc = sum(abs(c) * abs(hardy.eval(P, b)) for c, P in zip(coords, family))
    panels = max(8, int(math.ceil(2.0 * osc)))
    nodes, weights = leggauss(_GL_ORDER)

    def integrate(npan: int) -> complex:
        edges = np.linspace(a, b, npan + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        phase = np.zeros_like(t)
        for c, P in zip(coords, family):
            if c != 0.0:
                phase += c * hardy.eval(P, t)
        phase -= np.rint(phase)
        w = (half[:, None] * weights[None, :]).ravel()
        ang = TWO_PI * phase
        return complex(math.fsum(w * np.cos(ang)), math.fsum(w * np.sin(ang))) / N

    prev = integrate(panels)
    while True:
        panels *= 2
        if panels > max_panels:
            raise QuadratureError(f"no convergence to tol={tol} within {max_panels} panels")
        cur = integrate(panels)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur


# ---------------------------------------------------------------------------
# arcs and scans


def major_arc_box(family: Sequence[HardyFunction], N: int, l: int) -> MajorArcBox:
    """Box with half widths ``2**l / |P_i(N)|``."""
    if N < 2:
        raise hardy.HardyDomainError("major_arc_box needs N >= 2")
    scale = math.ldexp(1.0, int(l))
    return MajorArcBox(tuple(scale / abs(hardy.eval(P, float(N))) for P in family))


def jittered_grid(grid_per_dim: int, m: int, seed: int) -> np.ndarray:
    """``grid_per_dim**m`` points of ``[-1/2, 1/2)^m``, one uniformly jittered point per cell."""
    rng = np.random.default_rng(seed)
    axes = np.meshgrid(*[np.arange(grid_per_dim)] * m, indexing="ij")
    cells = np.stack([a.ravel() for a in axes], axis=1).astype(float)
    jitter = rng.random(cells.shape)
    return reduce_torus((cells + jitter) / grid_per_dim - 0.5)


@dataclass(frozen=True)
class ScanResult:
    N: int
    l: int
    xis: np.ndarray
    abs_m: np.ndarray
    in_major_arc: np.ndarray

    def rows(self):
        for xi, a, inside in zip(self.xis, self.abs_m, self.in_major_arc):
            yield (self.N, self.l, *xi, a, int(inside))

    def header(self) -> list[str]:
        m = self.xis.shape[1]
        return ["N", "l", *[f"xi_{i + 1}" for i in range(m)], "abs_m", "in_major_arc"]


def scan(
    family: Sequence[HardyFunction],
    N: int,
    l: int,
    xis=None,
    grid_per_dim: int = 64,
    seed: int = 0,
    upper_half: bool = True,
) -> ScanResult:
    """Evaluate ``|m_N|`` over a point set (default: seeded jittered grid)."""
    if xis is None:
        xis = jittered_grid(grid_per_dim, len(family), seed)
    xis = _as_rows(xis, len(family))
    box = major_arc_box(family, N, l)
    vals = np.abs(m_discrete_many(family, N, xis, upper_half=upper_half))
    return ScanResult(int(N), int(l), xis, vals, box.contains_many(xis))


def minor_arc_sup(family: Sequence[HardyFunction], N: int, l: int, grid_per_dim: int = 64, seed: int = 0) -> float:
    """Max of ``|m_N|`` (upper half) over the jittered grid outside the major arc box."""
    if grid_per_dim < 8:
        raise ValueError("grid_per_dim must be at least 8")
    res = scan(family, N, l, grid_per_dim=grid_per_dim, seed=seed)
    outside = res.abs_m[~res.in_major_arc]
    return float(outside.max()) if outside.size else 0.0


# ---------------------------------------------------------------------------
# van der Corput


def smooth_exponential_sum(
    family: Sequence[HardyFunction], coeffs: Sequence[float], a: int, b: int, N: int
) -> complex:
    """``(1/N) * sum_{a<=n<=b} e(sum_i coeffs_i P_i(n))`` with no floors."""
    n = np.arange(int(a), int(b) + 1, dtype=float)
    phase = np.zeros_like(n)
    for c, P in zip(coeffs, family):
        if c != 0.0:
            v = c * hardy.eval(P, n)
            phase += v - np.rint(v)
    ang = TWO_PI * (phase - np.rint(phase))
    return complex(math.fsum(np.cos(ang)), math.fsum(np.sin(ang))) / N


def vdc_bound(j: int, N: int, lam: float, h: float) -> float:
    """``h * (lam**(1/(J-2)) + N**(-2/J) + (lam*N**j)**(-2/J))`` with ``J = 2**j``."""
    if j < 2:
        raise ValueError("van der Corput bound needs j >= 2")
    if lam <= 0 or h < 1:
        raise ValueError("need lam > 0 and h >= 1")
    J = 2**j
    return h * (lam ** (1.0 / (J - 2)) + N ** (-2.0 / J) + (lam * float(N) ** j) ** (-2.0 / J))


def derivative_range(
    family: Sequence[HardyFunction],
    coeffs: Sequence[float],
    j: int,
    a: float,
    b: float,
    samples: int = 64,
) -> tuple[float, float]:
    """Min and max of ``|sum_i coeffs_i P_i^(j)(t)|`` on ``[a, b]``.

    A uniform scan locates the extrema, which are then polished with a bounded
    Brent search on the neighbouring cells.
    """
    if not (2 <= a < b):
        raise ValueError("need 2 <= a < b")
    if samples < 16:
        raise ValueError("samples must be at least 16")
    derivs = [(c, hardy.derivative(P, j)) for c, P in zip(coeffs, family) if c != 0.0]
    if not derivs:
        return 0.0, 0.0

    def g(t):
        return np.abs(sum(c * hardy.eval(D, t) for c, D in derivs))

    ts = np.linspace(a, b, samples)
    vals = g(ts)
    lo, hi = float(vals.min()), float(vals.max())
    for sign, idx in ((1.0, int(np.argmin(vals))), (-1.0, int(np.argmax(vals)))):
        left, right = ts[max(idx - 1, 0)], ts[min(idx + 1, samples - 1)]
        res = minimize_scalar(lambda t: sign * float(g(t)), bounds=(left, right), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, right)})
        v = float(g(res.x))
        if sign > 0:
            lo = min(lo, v)
        else:
            hi = max(hi, v)
    return lo, hi


# ---------------------------------------------------------------------------
# sawtooth expansion


@dataclass(frozen=True)
class SawtoothExpansion:
    """Truncated Fourier series of ``x -> e(-xi {x})``."""

    xi: float
    K: int
    a_xi: complex
    terms: tuple[tuple[int, complex], ...]

    def coefficient(self, k: int) -> complex:
        return dict(self.terms).get(k, 0j)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ks = np.array([k for k, _ in self.terms])
        cs = np.array([c for _, c in self.terms])
        return (np.exp(1j * TWO_PI * np.multiply.outer(x, ks)) * cs).sum(axis=-1)

    def target(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(-1j * TWO_PI * self.xi * (x - np.floor(x)))


def sawtooth_expansion(xi: float, K: int) -> SawtoothExpansion:
    """Expansion ``e(-xi {x}) ~ a(xi) * sum_{|k|<=K} e(kx) / (xi + k)``.

    ``a(xi) = (1 - e(-xi)) / (2 pi i)``, so ``|a(xi)| = |sin(pi xi)| / pi``.
    """
    xi = float(xi)
    if not -0.5 <= xi <= 0.5:
        raise ValueError("xi must lie in [-1/2, 1/2]")
    if K < 1:
        raise ValueError("K must be positive")
    if xi == 0.0:
        return SawtoothExpansion(0.0, K, 0j, ((0, 1 + 0j),))
    # (1 - e(-xi)) / (2 pi i) = e(-xi/2) sin(pi xi) / pi, stable for tiny xi
    rot = np.exp(-1j * math.pi * xi)
    a = rot * math.sin(math.pi * xi) / math.pi
    terms = tuple((k, complex(rot * np.sinc(xi) if k == 0 else a / (xi + k))) for k in range(-K, K + 1))
    return SawtoothExpansion(xi, K, complex(a), terms)


# ---------------------------------------------------------------------------
# correlation function


def correlation_function(coeffs: Sequence[float], family: Sequence[HardyFunction], t):
    """``sum a_i |P_i(t)| / sum |a_i| |P_i(t)|``; ``t = 1`` uses the limit convention."""
    if len(coeffs) != len(family):
        raise ValueError("coeffs and family differ in length")
    if not any(coeffs):
        raise ValueError("not all coefficients may vanish")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 1.0) or np.any((t_arr > 1.0) & (t_arr < 2.0)):
        raise hardy.HardyDomainError("correlation_function needs t >= 2 (or t = 1)")
    mags = [np.abs(hardy.value(P, t_arr)) for P in family]
    num = sum(c * v for c, v in zip(coeffs, mags))
    den = sum(abs(c) * v for c, v in zip(coeffs, mags))
    tiny = np.finfo(float).tiny
    if np.any(den <= tiny):
        raise ZeroDivisionError("correlation denominator underflows")
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def exceptional_measure(
    coeffs: Sequence[float],
    family: Sequence[HardyFunction],
    N: int,
    threshold: float,
    samples: int = 4096,
) -> float:
    """Length of ``{t in [N/2, N] : |C(t)| < threshold}`` by midpoint sampling."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if N < 4:
        raise ValueError("N must be at least 4")
    h = (N / 2.0) / samples
    t = N / 2.0 + h * (np.arange(samples) + 0.5)
    c = correlation_function(coeffs, family, t)
    return (N / 2.0) * float(np.count_nonzero(np.abs(c) < threshold)) / samples
