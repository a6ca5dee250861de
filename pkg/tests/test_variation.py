import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardyergodic import variation
from hardyergodic.variation import IndexedSequence

complex_vals = st.lists(
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=1, max_size=10
)
r_vals = st.sampled_from([1.0, 1.5, 2.0, 2.5, 3.0, 7.0])


def seq(*vals):
    return IndexedSequence.from_values(np.array(vals, dtype=complex))


# -- the container -------------------------------------------------------------


def test_indexed_sequence_validation():
    with pytest.raises(ValueError):
        IndexedSequence([1, 1], [0, 0])
    with pytest.raises(ValueError):
        IndexedSequence([0, 1], [0, 0])
    with pytest.raises(ValueError):
        IndexedSequence([], [])
    with pytest.raises(ValueError):
        IndexedSequence([1, 2], [0])
    s = IndexedSequence([2, 5, 9], [1, 2, 3])
    assert len(s) == 3
    assert s.restrict({5, 9}).indices.tolist() == [5, 9]
    assert s.restrict(np.array([True, False, True])).values.tolist() == [1, 3]


# -- V^r -----------------------------------------------------------------------


def test_vr_examples():
    r = variation.vr_norm(seq(3, 3, 3), 2)
    assert (r.value, r.sup_term, r.jump_term) == (3.0, 3.0, 0.0)
    r = variation.vr_norm(seq(0, 1, 2), 1)
    assert (r.value, r.sup_term, r.jump_term) == (4.0, 2.0, 2.0)
    r = variation.vr_norm(seq(0, 1, 0), 2)
    assert r.value == pytest.approx(1 + math.sqrt(2), rel=1e-15)
    assert r.witness == (1, 2, 3)
    assert variation.vr_norm_bruteforce(seq(0, 1, 0), 2) == pytest.approx(1 + math.sqrt(2), rel=1e-15)
    assert variation.vr_norm_bruteforce(seq(5), 3) == 5.0
    assert variation.vr_norm(seq(5), 3).value == 5.0


def test_vr_rejects_small_r_and_long_bruteforce():
    with pytest.raises(ValueError):
        variation.vr_norm(seq(0, 1), 0.5)
    with pytest.raises(ValueError):
        variation.vr_norm_bruteforce(IndexedSequence.from_values(np.zeros(19)), 2)


def test_witness_is_lexicographically_smallest():
    # many optimal chains; (1, 2, 3, 4) beats (1, 2, 4) and (1, 3, 5) lexicographically
    r = variation.vr_norm(seq(0, 1, 1, 0, 0), 2)
    assert r.witness == (1, 2, 3, 4)
    assert variation.vr_norm(seq(0, 1, 0, 1), 1).witness == (1, 2, 3, 4)
    assert variation.vr_norm(seq(0, 2, 2), 2).witness == (1, 2)


@given(complex_vals, r_vals)
def test_vr_matches_bruteforce(vals, r):
    s = IndexedSequence.from_values(np.array(vals))
    fast = variation.vr_norm(s, r)
    assert fast.value == pytest.approx(variation.vr_norm_bruteforce(s, r), rel=1e-12, abs=1e-12)
    assert fast.value == pytest.approx(fast.sup_term + fast.jump_term, rel=1e-15)
    # the witness realizes the jump term
    w = s.restrict(set(fast.witness)).values
    realized = float(np.sum(np.abs(np.diff(w)) ** r)) ** (1 / r)
    assert realized == pytest.approx(fast.jump_term, rel=1e-12, abs=1e-12)


@given(complex_vals, r_vals, r_vals)
def test_vr_decreasing_in_r(vals, r1, r2):
    r1, r2 = sorted((r1, r2))
    s = IndexedSequence.from_values(np.array(vals))
    assert variation.vr_norm(s, r2).value <= variation.vr_norm(s, r1).value * (1 + 1e-12) + 1e-12


@given(complex_vals, r_vals)
def test_vr_dominated_by_lr(vals, r):
    a = np.array(vals)
    s = IndexedSequence.from_values(a)
    assert variation.vr_norm(s, r).value <= 3 * float(np.sum(np.abs(a) ** r)) ** (1 / r) + 1e-12


@given(complex_vals, r_vals, st.data())
def test_vr_ordered_partition(vals, r, data):
    a = np.array(vals)
    if a.size < 2:
        return
    cut = data.draw(st.integers(min_value=1, max_value=a.size - 1))
    s = IndexedSequence.from_values(a)
    left = IndexedSequence(s.indices[:cut], a[:cut])
    right = IndexedSequence(s.indices[cut:], a[cut:])
    bound = 3 * (variation.vr_norm(left, r).value + variation.vr_norm(right, r).value)
    assert variation.vr_norm(s, r).value <= bound + 1e-12


@given(st.integers(min_value=1, max_value=8), r_vals, st.data())
def test_vr_is_a_norm(n, r, data):
    c = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
    a = np.array(data.draw(st.lists(c, min_size=n, max_size=n)))
    b = np.array(data.draw(st.lists(c, min_size=n, max_size=n)))
    lam = data.draw(c)
    V = lambda v: variation.vr_norm(IndexedSequence.from_values(v), r).value
    assert V(a + b) <= V(a) + V(b) + 1e-9
    assert V(lam * a) == pytest.approx(abs(lam) * V(a), rel=1e-9, abs=1e-9)


# -- jumps ---------------------------------------------------------------------


def test_jump_examples():
    assert variation.jump_count(seq(0, 1, 0, 1), 1) == 3
    assert variation.jump_count_bruteforce(seq(0, 1, 0, 1), 1) == 3
    assert variation.jump_count(seq(2, 2, 2, 2), 0.1) == 0
    assert variation.jump_count(seq(0, 1, 0, 1), 1.5) == 0
    assert variation.jump_count_bruteforce(seq(0, 2), 1) == 1
    assert variation.jump_count(seq(0), 0.3) == 0
    assert variation.jump_count_bruteforce(seq(0), 0.3) == 0
    with pytest.raises(ValueError):
        variation.jump_count(seq(0, 1), 0)


def test_jump_count_beats_greedy():
    # the left-to-right greedy stops at 1 here; 0 -> 1.9 -> 0.8 has two jumps
    s = seq(0, 1, 0.9, 1.9, 0.8)
    assert variation.jump_count(s, 1.0) == 2
    assert variation.jump_count_bruteforce(s, 1.0) == 2


@given(complex_vals, st.sampled_from([0.1, 0.5, 1.0, 2.0]))
def test_jump_matches_bruteforce(vals, delta):
    s = IndexedSequence.from_values(np.array(vals))
    assert variation.jump_count(s, delta) == variation.jump_count_bruteforce(s, delta)


@given(complex_vals, st.floats(min_value=0.01, max_value=5), r_vals)
def test_jump_counting_inequality(vals, delta, r):
    s = IndexedSequence.from_values(np.array(vals))
    n = variation.jump_count(s, delta)
    assert delta * n ** (1 / r) <= variation.vr_norm(s, r).value * (1 + 1e-12)


# -- lacunary sets and the long/short split ------------------------------------


def test_lacunary_examples():
    assert variation.lacunary_subset(20, 2) == [1, 3, 7, 15]
    assert variation.lacunary_subset(10, 1.5) == [1, 2, 4, 7]
    assert variation.lacunary_subset(1, 2) == [1]
    with pytest.raises(ValueError):
        variation.lacunary_subset(10, 1.0)


@given(st.floats(min_value=1.01, max_value=3.0), st.integers(min_value=1, max_value=10**6))
def test_lacunary_ratios(lam, n_max):
    out = variation.lacunary_subset(n_max, lam)
    assert out[0] == 1 and out[-1] <= n_max
    assert all(b > lam * a for a, b in zip(out, out[1:]))
    # greedy: one less would violate the ratio
    assert all(b - 1 <= lam * a for a, b in zip(out, out[1:]))


def test_dyadic_blocks():
    blocks = variation.dyadic_blocks(4)
    assert [list(b) for b in blocks] == [[2, 3, 4], [4, 5, 6, 7, 8], list(range(8, 17))]


def _contiguous(values):
    return IndexedSequence(np.arange(2, 2 + len(values)), np.asarray(values, dtype=complex))


def test_long_short_monotone_example():
    s = _contiguous(np.arange(15.0))
    long, short, full = variation.long_short_split(s, 2.5)
    assert full == pytest.approx(14 + 14, rel=1e-12)
    assert long == pytest.approx(14 + 14, rel=1e-12)
    # blocks {2..4}, {4..8}, {8..16} carry 2+2, 6+4, 14+8
    assert short == pytest.approx(math.sqrt(4**2 + 10**2 + 22**2), rel=1e-12)
    assert full <= 3 * (long + short)


def test_long_short_constant_sequence():
    long, short, full = variation.long_short_split(_contiguous(np.full(15, 2.0)), 3)
    assert long == full == 2.0
    assert short == pytest.approx(2.0 * math.sqrt(3))


def test_long_short_full_matches_bruteforce(rng):
    vals = rng.standard_normal(15) + 1j * rng.standard_normal(15)
    s = _contiguous(vals)
    long, short, full = variation.long_short_split(s, 2.5)
    assert full == pytest.approx(variation.vr_norm_bruteforce(s, 2.5), rel=1e-12)
    assert full <= 3 * (long + short)


def test_long_short_coverage_errors():
    with pytest.raises(ValueError, match="incomplete block coverage"):
        variation.long_short_split(IndexedSequence(np.arange(2, 16), np.zeros(14)), 2.5)
    with pytest.raises(ValueError, match="incomplete block coverage"):
        variation.long_short_split(IndexedSequence([2, 3, 5, 6, 7, 8], np.zeros(6)), 2.5)
    with pytest.raises(ValueError):
        variation.long_short_split(_contiguous(np.zeros(15)), 2.0)


@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=15, max_size=15), st.sampled_from([2.5, 3.0, 4.0]))
def test_long_short_inequality(vals, r):
    long, short, full = variation.long_short_split(_contiguous(vals), r)
    assert full <= 3 * (long + short) + 1e-12
