"""Norm evaluators: frozen examples, norm axioms, DP vs enumeration."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqcert.errors import ParameterError
from seqcert.spaces import (
    CoordinateVector,
    NormTag,
    james_enumeration,
    james_power_sum_exact,
    james_power_sums_batch,
    james_summing_norm,
    lin_norm,
    norm,
    norm_batch,
    summing_basis_norm,
    summing_basis_norm_batch,
)

# grid floats keep norm arithmetic exact enough for tight tolerances
grid_floats = st.integers(-64, 64).map(lambda k: k / 16.0)
small_vectors = st.lists(grid_floats, min_size=0, max_size=8)

TAGS = [NormTag.sup(), NormTag.ell_p(1), NormTag.ell_p(2), NormTag.lin(), NormTag.james(2)]


def test_norm_dispatch_examples():
    assert norm((0, 0, 0), NormTag.sup()) == 0
    assert norm((1, -2, 3), NormTag.ell_p(1)) == 6
    assert norm((1, -2, 3), NormTag.sup()) == 3


def test_norm_tag_validation():
    with pytest.raises(ParameterError):
        NormTag.ell_p(0.5)
    with pytest.raises(ParameterError):
        NormTag.james(1)
    with pytest.raises(ParameterError):
        NormTag("sup", p=2)
    with pytest.raises(ParameterError):
        NormTag("ell_p")
    with pytest.raises(ParameterError):
        NormTag("nope")


def test_coordinate_vector_rejects_nonfinite():
    with pytest.raises(ParameterError):
        CoordinateVector((1.0, float("nan")))
    with pytest.raises(ParameterError):
        CoordinateVector((float("inf"),))


def test_lin_norm_examples_exact():
    assert lin_norm((1, 0, 0)) == Fraction(8, 9)
    assert lin_norm((0, 1, 0)) == Fraction(64, 65)
    assert lin_norm((0, 0, 0)) == 0
    assert lin_norm(()) == 0


def test_james_examples():
    assert james_summing_norm((1,), 2) == 1
    assert abs(james_summing_norm((1, -1), 2) - math.sqrt(2)) < 1e-12
    assert james_summing_norm((1, 1), 2) == 2
    assert james_summing_norm((), 2) == 0


def test_james_rejects_bad_p():
    with pytest.raises(ParameterError):
        james_summing_norm((1, 2), 1)
    with pytest.raises(ParameterError):
        james_power_sum_exact((1, 2), 1.5)


def test_summing_basis_norm_examples():
    assert summing_basis_norm((1, 0, 0)) == 1
    assert summing_basis_norm((Fraction(1, 2), Fraction(1, 2))) == 1
    assert summing_basis_norm((1, -1)) == 1
    assert summing_basis_norm(()) == 0


@given(st.lists(st.integers(-2, 2), min_size=0, max_size=8), st.sampled_from([1.5, 2, 3]))
def test_james_dp_equals_enumeration(entries, p):
    assert abs(james_summing_norm(entries, p) - james_enumeration(entries, p)) < 1e-10


small_fracs = st.fractions(min_value=-3, max_value=3, max_denominator=8)


@given(st.lists(small_fracs, min_size=1, max_size=5), st.sampled_from([2, 3]))
def test_james_exact_power_sum_vs_exact_enumeration(entries, p):
    # independent exact oracle: enumerate chains directly over Fractions
    n = len(entries)
    prefix = [Fraction(0)]
    for e in entries:
        prefix.append(prefix[-1] + e)
    best = Fraction(0)
    for size in range(2, n + 2):
        for chain in itertools.combinations(range(1, n + 2), size):
            s = Fraction(0)
            for k in range(len(chain) - 1):
                s += abs(prefix[chain[k + 1] - 1] - prefix[chain[k] - 1]) ** p
            best = max(best, s)
    assert james_power_sum_exact(entries, p) == best


@given(st.lists(st.integers(-2, 2), min_size=1, max_size=8), st.sampled_from([1.5, 2, 3]))
def test_james_dominates_singletons(entries, p):
    assert james_summing_norm(entries, p) >= max(abs(e) for e in entries) - 1e-12


@given(small_vectors, st.sampled_from(TAGS))
def test_norm_zero_iff_zero(entries, tag):
    v = CoordinateVector(tuple(entries))
    value = norm(v, tag)
    if all(e == 0 for e in entries):
        assert value == 0
    else:
        assert value > 0


@given(small_vectors, grid_floats, st.sampled_from(TAGS))
def test_absolute_homogeneity(entries, lam, tag):
    v = tuple(entries)
    scaled = tuple(lam * e for e in v)
    assert abs(norm(scaled, tag) - abs(lam) * norm(v, tag)) <= 1e-12


@given(small_vectors, small_vectors, st.sampled_from(TAGS))
def test_triangle_inequality(us, vs, tag):
    n = max(len(us), len(vs))
    u = tuple(us) + (0.0,) * (n - len(us))
    v = tuple(vs) + (0.0,) * (n - len(vs))
    s = tuple(a + b for a, b in zip(u, v))
    assert norm(s, tag) <= norm(u, tag) + norm(v, tag) + 1e-12


@given(small_vectors)
def test_lin_sandwich(entries):
    ell1 = sum(abs(e) for e in entries)
    value = lin_norm(entries)
    assert value <= ell1 + 1e-12
    assert value >= (8.0 / 9.0) * ell1 - 1e-12


@given(st.lists(st.integers(0, 20), min_size=1, max_size=10).filter(lambda l: sum(l) > 0))
def test_summing_norm_of_convex_coefficients_is_one(ks):
    total = sum(ks)
    t = tuple(Fraction(k, total) for k in ks)
    assert summing_basis_norm(t) == 1


@given(st.lists(st.lists(grid_floats, min_size=3, max_size=3), min_size=1, max_size=6),
       st.sampled_from(TAGS))
def test_batch_matches_scalar(rows, tag):
    mat = np.array(rows)
    batch = norm_batch(mat, tag)
    for row, value in zip(rows, batch):
        assert abs(float(norm(tuple(row), tag)) - value) <= 1e-12


@given(st.lists(st.lists(grid_floats, min_size=4, max_size=4), min_size=1, max_size=6))
def test_summing_batch_matches_scalar(rows):
    mat = np.array(rows)
    batch = summing_basis_norm_batch(mat)
    for row, value in zip(rows, batch):
        assert abs(float(summing_basis_norm(tuple(row))) - value) <= 1e-12


def test_james_dp_equals_enumeration_at_n10():
    rng = np.random.default_rng(17)
    for _ in range(20):
        a = tuple(int(v) for v in rng.integers(-2, 3, size=10))
        for p in (1.5, 2):
            assert abs(james_summing_norm(a, p) - james_enumeration(a, p)) < 1e-10


def test_power_sums_batch_matches_exact_on_integers():
    rng = np.random.default_rng(11)
    mat = rng.integers(-2, 3, size=(200, 7)).astype(float)
    powers = james_power_sums_batch(mat, 2)
    for row, value in zip(mat, powers):
        assert james_power_sum_exact(tuple(int(x) for x in row), 2) == int(value)
