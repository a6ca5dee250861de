"""Torus rotations, lattice shifts and averages along Hardy floor orbits.

The torus model is the rotation system ``T_i x = x + alpha_i e_i`` on ``T^m``
with the character ``f(x) = e(beta . x)``; its averages factor as

    A_N f(x0) = e(beta . x0) * (1/N) sum_{n<=N} e(xi . floor(P(n))),  xi_i = alpha_i beta_i,

which is how exponential-sum traces become ergodic averages.  Orbit positions
are computed from the integer floor values, so no rounding error accumulates
along the orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import hardy, variation
from .expsum import TWO_PI, TorusPoint, frac_product, m_discrete_trace, orbit_matrix
from .hardy import HardyFunction
from .variation import IndexedSequence, VariationResult

__all__ = [
    "TorusSystem",
    "AverageTrace",
    "torus_average_trace",
    "lattice_average",
    "lattice_average_trace",
    "multiplier_trace",
    "equidistribution_trace",
    "ConvergenceReport",
    "convergence_diagnostics",
    "JumpExperiment",
    "jump_experiment",
    "fit_loglog_slope",
]


@dataclass(frozen=True)
class TorusSystem:
    """Commuting rotations by ``alphas`` with observable ``e(beta . x)``.

    ``beta`` must be an integer vector so that the observable is a character of
    the torus.
    """

    alphas: tuple[float, ...]
    beta: tuple[int, ...]

    def __post_init__(self):
        alphas = tuple(float(a) % 1.0 for a in np.atleast_1d(self.alphas))
        beta_f = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if len(alphas) != beta_f.size:
            raise ValueError("alphas and beta differ in length")
        if not np.all(beta_f == np.round(beta_f)):
            raise ValueError("beta must be an integer vector (a character of the torus)")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "beta", tuple(int(b) for b in beta_f))

    @property
    def m(self) -> int:
        return len(self.alphas)

    @property
    def frequency(self) -> TorusPoint:
        """The frequency ``alpha_i * beta_i`` seen by the exponential sum."""
        return TorusPoint(tuple(a * b for a, b in zip(self.alphas, self.beta)))

    def positions(self, family: Sequence[HardyFunction], N: int, x0) -> np.ndarray:
        """Orbit points ``x0 + alpha . floor(P(n))`` in ``[0, 1)^m``, shape ``(N, m)``."""
        self._check(family)
        orbit = orbit_matrix(family, N)
        x0 = np.broadcast_to(np.asarray(x0, dtype=float), (self.m,))
        out = np.empty((int(N), self.m))
        for i, a in enumerate(self.alphas):
            out[:, i] = (x0[i] + frac_product(a, orbit[i])) % 1.0
        return out

    def _check(self, family) -> None:
        if len(family) != self.m:
            raise ValueError(f"dimension mismatch: {len(family)} functions for a rotation of T^{self.m}")


@dataclass(frozen=True)
class AverageTrace:
    scales: tuple[int, ...]
    values: np.ndarray
    basepoint: tuple = ()

    def as_sequence(self) -> IndexedSequence:
        return IndexedSequence(np.asarray(self.scales), self.values)


def _check_scales(scales) -> np.ndarray:
    s = np.asarray(scales, dtype=np.int64).ravel()
    if s.size == 0 or s[0] < 1 or np.any(np.diff(s) <= 0):
        raise ValueError("scales must be a nonempty increasing list of positive integers")
    return s


def _prefix_averages(terms: np.ndarray, scales: np.ndarray) -> np.ndarray:
    # extended-precision prefix sums keep every snapshot close to a direct sum
    re = np.cumsum(terms.real, dtype=np.longdouble)
    im = np.cumsum(terms.imag, dtype=np.longdouble)
    k = scales - 1
    return (re[k].astype(float) + 1j * im[k].astype(float)) / scales


def torus_average_trace(system: TorusSystem, family: Sequence[HardyFunction], x0, scales) -> AverageTrace:
    """``A_N f(x0)`` for every ``N`` in ``scales`` from one pass along the orbit."""
    scales = _check_scales(scales)
    Nmax = int(max(scales[-1], 2))
    pos = system.positions(family, Nmax, x0)
    beta = np.asarray(system.beta, dtype=float)
    theta = np.zeros(Nmax)
    for i in range(system.m):
        theta += frac_product(pos[:, i], np.int64(beta[i]))
    ang = TWO_PI * (theta - np.rint(theta))
    terms = np.cos(ang) + 1j * np.sin(ang)
    return AverageTrace(tuple(int(s) for s in scales), _prefix_averages(terms, scales),
                        tuple(np.broadcast_to(np.asarray(x0, dtype=float), (system.m,)).tolist()))


def multiplier_trace(family: Sequence[HardyFunction], xi, scales) -> AverageTrace:
    """``(1/N) sum_{n<=N} e(xi . floor(P(n)))`` over ``scales`` (full averages)."""
    scales = _check_scales(scales)
    values = m_discrete_trace(family, xi, scales, upper_half=False)
    return AverageTrace(tuple(int(s) for s in scales), values)


def lattice_average(f, family: Sequence[HardyFunction], N: int, x, upper_half: bool = False) -> complex:
    """``(1/N) sum_{n<=N} [n > N/2 if upper_half] f(x - floor(P(n)))`` by direct summation."""
    N = int(N)
    if N < 2:
        raise ValueError("N must be at least 2")
    orbit = orbit_matrix(family, N)
    start = N // 2 if upper_half else 0
    x = np.broadcast_to(np.asarray(x, dtype=np.int64), (len(family),))
    pts = x[:, None] - orbit[:, start:]
    vals = f.at(pts.T)
    return complex(math.fsum(vals.real), math.fsum(vals.imag)) / N


def lattice_average_trace(f, family: Sequence[HardyFunction], scales, x, upper_half: bool = False) -> AverageTrace:
    """``A_N f(x)`` for every ``N`` in ``scales`` via prefix sums along the orbit."""
    scales = _check_scales(scales)
    Nmax = int(max(scales[-1], 2))
    orbit = orbit_matrix(family, Nmax)
    x = np.broadcast_to(np.asarray(x, dtype=np.int64), (len(family),))
    vals = np.asarray(f.at((x[:, None] - orbit).T), dtype=complex)
    re = np.concatenate([[0.0], np.cumsum(vals.real, dtype=np.longdouble)])
    im = np.concatenate([[0.0], np.cumsum(vals.imag, dtype=np.longdouble)])
    lo = scales // 2 if upper_half else np.zeros_like(scales)
    out = ((re[scales] - re[lo]).astype(float) + 1j * (im[scales] - im[lo]).astype(float)) / scales
    return AverageTrace(tuple(int(s) for s in scales), out, tuple(int(v) for v in x))


def _in_arcs(pos: np.ndarray, arcs) -> np.ndarray:
    inside = np.ones(pos.shape[0], dtype=bool)
    for i, (lo, hi) in enumerate(arcs):
        lo, hi = float(lo), float(hi)
        if lo == 0.0 and hi == 1.0:
            continue
        lo, hi = lo % 1.0, hi % 1.0
        p = pos[:, i]
        if lo == hi:
            inside[:] = False
        elif lo < hi:
            inside &= (p >= lo) & (p < hi)
        else:
            inside &= (p >= lo) | (p < hi)
    return inside


def equidistribution_trace(system: TorusSystem, family: Sequence[HardyFunction], x0, arcs, scales) -> np.ndarray:
    """Fraction of ``n <= N`` whose orbit point lies in the box of half-open arcs.

    Each arc is ``(lo, hi)`` with ``[lo, hi)`` read on the circle: ``lo > hi``
    wraps through 0, ``(0, 1)`` is the whole circle, ``lo == hi`` is empty.
    """
    arcs = [tuple(a) for a in arcs]
    if len(arcs) != system.m:
        raise ValueError("need one arc per torus coordinate")
    scales = _check_scales(scales)
    Nmax = int(max(scales[-1], 2))
    hits = _in_arcs(system.positions(family, Nmax, x0), arcs)
    counts = np.cumsum(hits, dtype=np.int64)
    return counts[scales - 1] / scales


# ---------------------------------------------------------------------------
# convergence and jump experiments


@dataclass(frozen=True)
class ConvergenceReport:
    r: float
    variation: VariationResult
    jump_counts: dict[float, int]
    limit: complex
    ratios: dict[float, float]
    epsilon: float = 0.5

    def consistent(self) -> bool:
        """``delta * N_delta^(1/r) <= V^r`` for every reported delta."""
        return all(d * c ** (1.0 / self.r) <= self.variation.value * (1 + 1e-12) for d, c in self.jump_counts.items())


def convergence_diagnostics(trace: AverageTrace, r: float, deltas: Sequence[float], epsilon: float = 0.5) -> ConvergenceReport:
    """V^r of the trace, delta-jump counts, tail limit and ``count * delta^(2+eps)``."""
    if any(d <= 0 for d in deltas):
        raise ValueError("deltas must be positive")
    seq = trace.as_sequence()
    var = variation.vr_norm(seq, r)
    counts = {float(d): variation.jump_count(seq, d) for d in deltas}
    q = max(1, len(trace.values) // 4)
    limit = complex(np.mean(trace.values[-q:]))
    ratios = {d: c * d ** (2.0 + epsilon) for d, c in counts.items()}
    return ConvergenceReport(float(r), var, counts, limit, ratios, epsilon)


def fit_loglog_slope(deltas: Sequence[float], counts: Sequence[int]) -> float:
    """Least-squares slope of ``log count`` against ``log delta`` over positive counts.

    With fewer than two positive counts there is no growth to fit and the
    slope is reported as 0.
    """
    d = np.asarray(deltas, dtype=float)
    c = np.asarray(counts, dtype=float)
    keep = c > 0
    if np.count_nonzero(keep) < 2 or np.unique(d[keep]).size < 2:
        return 0.0
    slope, _ = np.polyfit(np.log(d[keep]), np.log(c[keep]), 1)
    return float(slope)


@dataclass(frozen=True)
class JumpExperiment:
    deltas: tuple[float, ...]
    counts: tuple[int, ...]
    report: ConvergenceReport
    slope: float
    scales: tuple[int, ...] = field(repr=False, default=())

    HEADER = ("delta", "count", "vr", "limit_re", "limit_im", "slope")

    def rows(self):
        for d, c in zip(self.deltas, self.counts):
            yield (d, c, self.report.variation.value, self.report.limit.real, self.report.limit.imag, self.slope)


def jump_experiment(
    family: Sequence[HardyFunction],
    xi,
    deltas: Sequence[float],
    n_max: int,
    lam: float | None = 2.0,
    r: float = 2.5,
) -> JumpExperiment:
    """Jump counts of the exponential-sum averages over a scale set.

    With ``lam`` set the scales are the greedy ``lam``-lacunary chain up to
    ``n_max`` (family must be in P); with ``lam=None`` every ``N <= n_max``
    is used, which is only claimed for families in P'.
    """
    cls = hardy.classify_family(family)
    if lam is None:
        if not cls.in_p_prime:
            raise ValueError(f"full-scale jump experiment needs a P' family: {'; '.join(cls.violations)}")
        scales = list(range(1, int(n_max) + 1))
    else:
        if not cls.in_p:
            raise ValueError(f"lacunary jump experiment needs a P family: {'; '.join(cls.violations)}")
        scales = variation.lacunary_subset(int(n_max), lam)
    trace = multiplier_trace(family, xi, scales)
    report = convergence_diagnostics(trace, r, deltas)
    counts = tuple(report.jump_counts[float(d)] for d in deltas)
    return JumpExperiment(tuple(float(d) for d in deltas), counts, report,
                          fit_loglog_slope(deltas, counts), tuple(scales))
