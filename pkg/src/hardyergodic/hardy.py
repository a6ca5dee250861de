"""Hardy-field functions of the form ``sum_k a_k * t**c_k * (log2 t)**b_k``.

Every function in this package that is fed to an orbit, an exponential sum or
an arc decomposition is a :class:`HardyFunction`.  The monomial class is closed
under differentiation, and growth type, leading behaviour and sign thresholds
are read off exactly from the leading monomial.

Logarithms are base 2 throughout.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

__all__ = [
    "HardyDomainError",
    "HardyMonomial",
    "HardyFunction",
    "Verdict",
    "FamilyClass",
    "parse",
    "parse_family",
    "format_function",
    "eval",
    "value",
    "derivative",
    "growth_type",
    "classify_family",
    "floor_orbit",
    "MAX_ORBIT_VALUE",
]

LN2 = math.log(2.0)

# floor values must stay exactly representable as float64 and leave head room
# for the exact phase reduction in expsum
MAX_ORBIT_VALUE = 2**52

# values this close to an integer get re-evaluated at high precision
_FLOOR_GUARD_ABS = 1e-9
_FLOOR_GUARD_ULPS = 64.0


class HardyDomainError(ValueError):
    """Raised when a Hardy function is evaluated outside its domain."""


@dataclass(frozen=True, order=True)
class HardyMonomial:
    """A single term ``coef * t**power * (log2 t)**logpower``.

    Orbit-generating functions have ``power >= 0``; derivatives may carry
    negative powers, which are allowed.
    """

    coef: float
    power: float
    logpower: float = 0.0

    def __post_init__(self):
        for name in ("coef", "power", "logpower"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.coef == 0.0:
            raise ValueError("monomial coefficient must be nonzero")

    @property
    def key(self) -> tuple[float, float]:
        return (self.power, self.logpower)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.coef * t**self.power
        if self.logpower != 0.0:
            out = out * np.log2(t) ** self.logpower
        return out


@dataclass(frozen=True)
class HardyFunction:
    """Finite sum of :class:`HardyMonomial` terms.

    Terms are kept sorted by ``(power, logpower)`` descending with unique keys,
    so ``monomials[0]`` is the leading term.  Terms with equal keys are merged
    on construction; a function whose terms all cancel is the zero function
    (empty ``monomials``), which only arises as a derivative.
    """

    monomials: tuple[HardyMonomial, ...] = field(default_factory=tuple)

    def __post_init__(self):
        merged: dict[tuple[float, float], float] = {}
        for mono in self.monomials:
            if not isinstance(mono, HardyMonomial):
                mono = HardyMonomial(*mono)
            merged.setdefault(mono.key, [])
            merged[mono.key].append(mono.coef)
        terms = []
        for (c, b), coefs in merged.items():
            total = math.fsum(coefs)
            if total != 0.0:
                terms.append(HardyMonomial(total, c, b))
        terms.sort(key=lambda m: m.key, reverse=True)
        object.__setattr__(self, "monomials", tuple(terms))

    @classmethod
    def monomial(cls, coef: float = 1.0, power: float = 1.0, logpower: float = 0.0) -> "HardyFunction":
        return cls((HardyMonomial(coef, power, logpower),))

    @classmethod
    def from_terms(cls, terms: Iterable[Sequence[float]]) -> "HardyFunction":
        return cls(tuple(HardyMonomial(*t) for t in terms))

    @property
    def is_zero(self) -> bool:
        return not self.monomials

    @property
    def leading(self) -> HardyMonomial:
        if self.is_zero:
            raise ValueError("the zero function has no leading term")
        return self.monomials[0]

    def __call__(self, t):
        return eval(self, t)

    def __str__(self) -> str:
        return format_function(self)

    def __repr__(self) -> str:
        return f"HardyFunction({format_function(self)!r})"


# ---------------------------------------------------------------------------
# serialization


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def format_function(P: HardyFunction) -> str:
    """Serialize as ``"a*t^c*log^b"`` terms joined by ``+`` (``log^0`` omitted)."""
    if P.is_zero:
        return "0"
    parts = []
    for i, m in enumerate(P.monomials):
        coef = m.coef
        sign = ""
        if i > 0:
            sign = " - " if coef < 0 else " + "
            coef = abs(coef)
        term = f"{_fmt_num(coef)}*t^{_fmt_num(m.power)}"
        if m.logpower != 0.0:
            term += f"*log^{_fmt_num(m.logpower)}"
        parts.append(sign + term)
    return "".join(parts)


_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_FACTOR_T = re.compile(rf"^t(?:\^\(?({_NUM})\)?)?$")
_FACTOR_LOG = re.compile(rf"^log(?:\^\(?({_NUM})\)?)?$")
_FACTOR_NUM = re.compile(rf"^{_NUM}$")


def _parse_term(text: str, sign: float) -> HardyMonomial:
    coef, power, logpower = sign, 0.0, 0.0
    for factor in text.split("*"):
        factor = factor.strip()
        if not factor:
            raise ValueError(f"empty factor in term {text!r}")
        if _FACTOR_NUM.match(factor):
            coef *= float(factor)
        elif (mt := _FACTOR_T.match(factor)) is not None:
            power += float(mt.group(1)) if mt.group(1) is not None else 1.0
        elif (ml := _FACTOR_LOG.match(factor)) is not None:
            logpower += float(ml.group(1)) if ml.group(1) is not None else 1.0
        else:
            raise ValueError(f"cannot parse factor {factor!r} in term {text!r}")
    return HardyMonomial(coef, power, logpower)


def parse(text: str) -> HardyFunction:
    """Parse ``"1*t^1.5 + 2*t^0.5*log^1"``-style strings.

    Accepts ``+``/``-`` between terms, an omitted coefficient (``t^1.5``) and
    bare ``t``/``log`` factors.
    """
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty Hardy function string")
    terms = []
    # split on +/- that are not part of an exponent like 1e-5 or ^-0.5
    start, sign = 0, 1.0
    if s[0] in "+-":
        sign = -1.0 if s[0] == "-" else 1.0
        start = 1
    i = start
    while i < len(s):
        ch = s[i]
        if ch in "+-" and i > start and s[i - 1] not in "eE^(":
            terms.append((s[start:i], sign))
            sign = -1.0 if ch == "-" else 1.0
            start = i + 1
        i += 1
    terms.append((s[start:], sign))
    return HardyFunction(tuple(_parse_term(t, sg) for t, sg in terms))


def parse_family(text: str | Sequence[str]) -> list[HardyFunction]:
    """Parse a family given as a list of strings or one string separated by ``;``."""
    if isinstance(text, str):
        text = [t for t in text.split(";") if t.strip()]
    return [parse(t) if isinstance(t, str) else t for t in text]


# ---------------------------------------------------------------------------
# evaluation


def _compensated_sum(terms: list[np.ndarray]) -> np.ndarray:
    # Neumaier summation over the (few) monomials, vectorized over t
    total = np.zeros_like(terms[0])
    comp = np.zeros_like(terms[0])
    for x in terms:
        t = total + x
        big = np.abs(total) >= np.abs(x)
        comp += np.where(big, (total - t) + x, (x - t) + total)
        total = t
    return total + comp


def eval(P: HardyFunction, t):
    """Evaluate ``P`` at ``t >= 2`` (scalar or array)."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 2.0) or np.any(~np.isfinite(arr)):
        raise HardyDomainError("Hardy functions are evaluated on t >= 2")
    if P.is_zero:
        out = np.zeros_like(arr)
    elif arr.ndim == 0:
        x = float(arr)
        lg = math.log2(x)
        return math.fsum(m.coef * x**m.power * lg**m.logpower for m in P.monomials)
    else:
        out = _compensated_sum([m(arr) for m in P.monomials])
    return out if out.ndim else float(out)


def _value_at_one(P: HardyFunction) -> float:
    total = []
    for m in P.monomials:
        if m.logpower > 0:
            continue
        if m.logpower < 0:
            raise HardyDomainError(f"term {format_function(HardyFunction((m,)))} is singular at t = 1")
        total.append(m.coef)
    return math.fsum(total)


def value(P: HardyFunction, t):
    """Like :func:`eval` but also defined at ``t = 1`` by the limit convention.

    At ``t = 1`` a term with positive log power vanishes, one with zero log
    power contributes its coefficient, and negative log powers are an error.
    """
    arr = np.asarray(t, dtype=float)
    if arr.ndim == 0:
        return _value_at_one(P) if float(arr) == 1.0 else eval(P, float(arr))
    out = np.empty_like(arr)
    one = arr == 1.0
    if np.any(one):
        out[one] = _value_at_one(P)
    if np.any(~one):
        out[~one] = eval(P, arr[~one])
    return out


# ---------------------------------------------------------------------------
# calculus and classification


def derivative(P: HardyFunction, order: int = 1) -> HardyFunction:
    """Symbolic derivative of the given order.

    ``d/dt [t^c L^b] = c t^(c-1) L^b + (b / ln 2) t^(c-1) L^(b-1)`` with
    ``L = log2 t``.
    """
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    for _ in range(order):
        terms = []
        for m in P.monomials:
            if m.power != 0.0:
                terms.append(HardyMonomial(m.coef * m.power, m.power - 1.0, m.logpower))
            if m.logpower != 0.0:
                terms.append(HardyMonomial(m.coef * m.logpower / LN2, m.power - 1.0, m.logpower - 1.0))
        P = HardyFunction(tuple(terms))
    return P


def growth_type(P: HardyFunction) -> float:
    """Growth type: the leading power (log factors have type 0); ``-inf`` for zero."""
    if P.is_zero:
        return -math.inf
    return P.leading.power


class Verdict(enum.Enum):
    MEMBER_OF_P_PRIME = "MemberOfPPrime"
    MEMBER_OF_P = "MemberOfP"
    NOT_MEMBER = "NotMember"


@dataclass(frozen=True)
class FamilyClass:
    verdict: Verdict
    violations: tuple[str, ...] = ()

    @property
    def in_p(self) -> bool:
        return self.verdict is not Verdict.NOT_MEMBER

    @property
    def in_p_prime(self) -> bool:
        return self.verdict is Verdict.MEMBER_OF_P_PRIME


def _is_integer(x: float) -> bool:
    return float(x).is_integer()


def classify_family(family: Sequence[HardyFunction]) -> FamilyClass:
    """Check the polynomial-growth / non-polynomial / distinct-type conditions.

    Regularity (halving and derivative-order asymptotics) always holds for the
    monomial class and is recorded as satisfied without testing.
    """
    if not family:
        raise ValueError("family must be nonempty")
    violations = []
    for i, P in enumerate(family):
        tau = growth_type(P)
        if not (0.0 < tau < math.inf):
            violations.append(f"(i) growth type of P_{i + 1} is {tau!r}, not in (0, inf)")
        if not P.is_zero:
            lead = P.leading
            if lead.logpower == 0.0 and _is_integer(lead.power) and lead.power >= 1:
                violations.append(f"(ii) polynomial leading term in P_{i + 1}: t^{_fmt_num(lead.power)}")
    taus = [growth_type(P) for P in family]
    if len(set(taus)) != len(taus):
        violations.append(f"(iii) growth types not distinct: {taus!r}")
    if violations:
        return FamilyClass(Verdict.NOT_MEMBER, tuple(violations))

    prime_violations = []
    for i, P in enumerate(family):
        lead = P.leading
        if lead.logpower != 0.0 or _is_integer(lead.power):
            prime_violations.append(f"P': non-integer pure power required (P_{i + 1} = {format_function(P)})")
    if prime_violations:
        return FamilyClass(Verdict.MEMBER_OF_P, tuple(prime_violations))
    return FamilyClass(Verdict.MEMBER_OF_P_PRIME)


# ---------------------------------------------------------------------------
# floor orbits


def _int_root(n: int, q: int) -> int | None:
    """Exact integer q-th root of n, or None."""
    if n in (0, 1):
        return n
    if q > n.bit_length():
        return None
    r = int(round(n ** (1.0 / q)))
    for cand in (r - 1, r, r + 1):
        if cand > 0 and cand**q == n:
            return cand
    return None


def _rational(x: float, max_den: int = 1000) -> Fraction:
    """``x`` as ``p/q`` when a small-denominator fraction rounds to exactly ``x``.

    So ``t^1.3333333333333333`` is read as ``t^(4/3)``: the floor at a perfect
    cube is the integer the user means, not the float exponent's.
    """
    q = Fraction(x).limit_denominator(max_den)
    return q if float(q) == x else Fraction(x)


def _exact_monomial(m: HardyMonomial, n: int) -> Fraction | None:
    c = _rational(m.power)
    coef = Fraction(m.coef)
    if m.logpower == 0.0:
        root = _int_root(n, c.denominator)
        if root is None:
            return None
        return coef * Fraction(root) ** c.numerator
    # log2 n is rational only at powers of two
    if n & (n - 1):
        return None
    e = n.bit_length() - 1
    ec = c * e
    b = Fraction(m.logpower)
    if ec.denominator != 1 or b.denominator != 1 or (e == 0 and b < 0):
        return None
    return coef * Fraction(2) ** int(ec) * Fraction(e) ** int(b)


def _mp_fraction(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _exact_floor(P: HardyFunction, n: int) -> int:
    if n == 1:
        return math.floor(_value_at_one(P))
    parts = [_exact_monomial(m, n) for m in P.monomials]
    if all(p is not None for p in parts):
        return math.floor(sum(parts, Fraction(0)))
    with mpmath.workdps(60):
        t = mpmath.mpf(n)
        lg = mpmath.log(t, 2)
        s = mpmath.fsum(mpmath.mpf(m.coef) * t ** _mp_fraction(_rational(m.power)) * lg ** _mp_fraction(_rational(m.logpower))
                        for m in P.monomials)
        nearest = mpmath.nint(s)
        if abs(s - nearest) <= mpmath.mpf(10) ** -40 * max(1, abs(s)):
            return int(nearest)
        return int(mpmath.floor(s))


def floor_orbit(P: HardyFunction, N: int) -> np.ndarray:
    """Return ``(floor(P(n)))_{n=1..N}`` as an int64 array.

    ``n = 1`` uses the limit convention of :func:`value`.  Values within a small
    guard band of an integer are recomputed exactly (rational powers of perfect
    powers) or at 60-digit precision, so ``floor(4**1.5) == 8``.
    """
    N = int(N)
    if N < 2:
        raise HardyDomainError("floor_orbit needs N >= 2")
    if P.is_zero:
        raise HardyDomainError("the zero function generates no orbit")
    n = np.arange(1, N + 1, dtype=float)
    vals = np.empty(N)
    vals[0] = _value_at_one(P)
    vals[1:] = eval(P, n[1:])
    if np.any(vals[1:] <= 0.0):
        raise HardyDomainError(f"{format_function(P)} is not positive on [2, {N}]")
    if vals.max() >= MAX_ORBIT_VALUE:
        raise HardyDomainError(f"orbit of {format_function(P)} exceeds 2^52 before n = {N}")
    floors = np.floor(vals)
    guard = np.maximum(_FLOOR_GUARD_ABS, _FLOOR_GUARD_ULPS * np.spacing(np.abs(vals)))
    suspect = np.abs(vals - np.rint(vals)) <= guard
    suspect[0] = True
    for idx in np.flatnonzero(suspect):
        floors[idx] = _exact_floor(P, int(idx) + 1)
    return floors.astype(np.int64)
