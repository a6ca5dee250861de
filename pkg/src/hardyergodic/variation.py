"""r-variation norms and delta-jump counts of indexed complex sequences.

For a sequence ``(a_N)`` over an increasing index set ``D``

    V^r(a) = sup_N |a_N| + sup_{N_0 < ... < N_J} (sum_j |a_{N_{j+1}} - a_{N_j}|^r)^(1/r)

and ``N_delta(a)`` is the largest ``J`` admitting a chain whose consecutive
differences are all ``>= delta``.  Both suprema are computed exactly by
O(n^2) dynamic programming; the ``*_bruteforce`` functions enumerate every
subsequence and serve as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "IndexedSequence",
    "VariationResult",
    "vr_norm",
    "vr_norm_bruteforce",
    "jump_count",
    "jump_count_bruteforce",
    "lacunary_subset",
    "dyadic_blocks",
    "long_short_split",
    "BRUTEFORCE_MAX_LEN",
]

BRUTEFORCE_MAX_LEN = 18


@dataclass(frozen=True)
class IndexedSequence:
    """Complex values ``a_N`` on a strictly increasing set of positive scales."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        vals = np.asarray(self.values, dtype=complex).ravel()
        if idx.size == 0:
            raise ValueError("an indexed sequence must be nonempty")
        if idx.size != vals.size:
            raise ValueError("indices and values differ in length")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        if idx[0] < 1:
            raise ValueError("indices must be positive")
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, start: int = 1) -> "IndexedSequence":
        values = np.asarray(values)
        return cls(np.arange(start, start + values.size), values)

    def __len__(self) -> int:
        return self.indices.size

    def restrict(self, keep) -> "IndexedSequence":
        """Subsequence on the scales in ``keep`` (a set or boolean mask)."""
        if isinstance(keep, np.ndarray) and keep.dtype == bool:
            mask = keep
        else:
            mask = np.isin(self.indices, np.fromiter(keep, dtype=np.int64))
        return IndexedSequence(self.indices[mask], self.values[mask])


def _as_seq(seq) -> IndexedSequence:
    if isinstance(seq, IndexedSequence):
        return seq
    return IndexedSequence.from_values(np.atleast_1d(np.asarray(seq)))


@dataclass(frozen=True)
class VariationResult:
    value: float
    sup_term: float
    jump_term: float
    witness: tuple[int, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "sup_term": self.sup_term,
            "jump_term": self.jump_term,
            "witness": list(self.witness),
        }


def _check_r(r: float) -> float:
    r = float(r)
    if not r >= 1.0:
        raise ValueError(f"r-variation needs r >= 1, got {r!r}")
    return r


def vr_norm(seq, r: float) -> VariationResult:
    """Exact ``V^r`` with the lexicographically smallest optimal chain as witness."""
    r = _check_r(r)
    seq = _as_seq(seq)
    a = seq.values
    n = a.size
    sup_term = float(np.abs(a).max())
    # best[i]: largest power sum of a chain starting at position i
    best = np.zeros(n)
    for i in range(n - 2, -1, -1):
        cand = np.abs(a[i + 1 :] - a[i]) ** r + best[i + 1 :]
        best[i] = max(0.0, float(cand.max()))
    total = float(best.max())
    tol = 1e-12 * max(1.0, total)

    i = int(np.flatnonzero(best >= total - tol)[0])
    chain = [i]
    while best[i] > tol:
        cand = np.abs(a[i + 1 :] - a[i]) ** r + best[i + 1 :]
        j = i + 1 + int(np.flatnonzero(cand >= best[i] - tol)[0])
        chain.append(j)
        i = j
    jump_term = total ** (1.0 / r)
    return VariationResult(sup_term + jump_term, sup_term, jump_term, tuple(int(seq.indices[k]) for k in chain))


@lru_cache(maxsize=None)
def _subset_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Bit table of all subsets of ``range(n)`` and, per member, its next member."""
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    nxt = np.full((masks.size, n), n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        nxt[:, i] = np.where(bits[:, i + 1], i + 1, nxt[:, i + 1])
    return bits, nxt


def _check_len(seq: IndexedSequence) -> None:
    if len(seq) > BRUTEFORCE_MAX_LEN:
        raise ValueError(f"brute force is capped at length {BRUTEFORCE_MAX_LEN}, got {len(seq)}")


def _pair_table(a: np.ndarray, fn) -> np.ndarray:
    # (n, n+1) table with a sentinel column for "no successor"
    n = a.size
    tab = np.zeros((n, n + 1))
    tab[:, :n] = fn(np.abs(a[None, :] - a[:, None]))
    return tab


def vr_norm_bruteforce(seq, r: float) -> float:
    """``V^r`` by enumerating every increasing subsequence."""
    r = _check_r(r)
    seq = _as_seq(seq)
    _check_len(seq)
    a = seq.values
    n = a.size
    bits, nxt = _subset_tables(n)
    tab = _pair_table(a, lambda d: d**r)
    rows = np.arange(n)[None, :]
    sums = np.where(bits, tab[rows, nxt], 0.0).sum(axis=1)
    return float(np.abs(a).max()) + float(sums.max()) ** (1.0 / r)


def jump_count(seq, delta: float) -> int:
    """Largest number of consecutive ``>= delta`` moves along any increasing chain."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    a = _as_seq(seq).values
    n = a.size
    ending = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        ok = np.abs(a[i] - a[:i]) >= delta
        if ok.any():
            ending[i] = ending[:i][ok].max() + 1
    return int(ending.max())


def jump_count_bruteforce(seq, delta: float) -> int:
    """``N_delta`` by enumerating every increasing subsequence."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    seq = _as_seq(seq)
    _check_len(seq)
    a = seq.values
    n = a.size
    bits, nxt = _subset_tables(n)
    big = np.ones((n, n + 1), dtype=bool)
    big[:, :n] = np.abs(a[None, :] - a[:, None]) >= delta
    rows = np.arange(n)[None, :]
    valid = np.all(~bits | big[rows, nxt], axis=1)
    sizes = bits.sum(axis=1)
    return int(max(0, (sizes[valid] - 1).max()))


def lacunary_subset(n_max: int, lam: float) -> list[int]:
    """Greedy chain from 1, each element the least integer exceeding ``lam`` times the last."""
    lam_q = Fraction(lam)
    if lam_q <= 1:
        raise ValueError("lam must exceed 1")
    out = [1]
    while True:
        nxt = math.floor(lam_q * out[-1]) + 1
        if nxt > n_max:
            break
        out.append(nxt)
    return out if n_max >= 1 else []


def dyadic_blocks(kmax: int) -> list[range]:
    """``I_k = {2^k, ..., 2^(k+1)}`` for ``k = 1..kmax-1``."""
    return [range(2**k, 2 ** (k + 1) + 1) for k in range(1, kmax)]


@dataclass(frozen=True)
class LongShort:
    long: float
    short: float
    full: float

    def __iter__(self):
        return iter((self.long, self.short, self.full))


def long_short_split(seq: IndexedSequence, r: float) -> LongShort:
    """Long variation over ``{2^k}``, short ``(sum_k V^2(I_k)^2)^(1/2)`` and full ``V^r``.

    ``seq`` must be indexed by exactly ``2, 3, ..., 2^kmax``.
    """
    r = _check_r(r)
    if r <= 2:
        raise ValueError("the long/short split is used with r > 2")
    idx = seq.indices
    top = int(idx[-1])
    kmax = top.bit_length() - 1
    if kmax < 1 or top != 2**kmax or idx[0] != 2 or idx.size != top - 1:
        raise ValueError("incomplete block coverage: indices must be exactly 2..2^kmax")
    dyadic = [2**k for k in range(1, kmax + 1)]
    long = vr_norm(seq.restrict(dyadic), r).value
    # positions are index - 2 since the sequence is contiguous from 2
    blocks = [vr_norm(IndexedSequence(np.asarray(b), seq.values[b.start - 2 : b.stop - 2]), 2.0).value
              for b in dyadic_blocks(kmax)]
    short = math.sqrt(math.fsum(v * v for v in blocks))
    full = vr_norm(seq, r).value
    return LongShort(long, short, full)
