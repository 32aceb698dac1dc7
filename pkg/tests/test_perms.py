"""Metric layer: permutations, partial injections, Hamming / HS distances."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permstab.errors import SizeMismatchError
from permstab.perms import (
    PartialInjection,
    Perm,
    commutator_defect,
    compose,
    from_cycles,
    hamming,
    hs_distance,
    identity,
    inverse,
    random_perm,
    swap,
)


def perms(n):
    return st.permutations(range(n)).map(lambda t: Perm(np.array(t)))


def test_identity_and_cycles():
    e = identity(5)
    assert e.is_identity()
    c = from_cycles(5, [(0, 1, 2)])
    assert c(0) == 1 and c(2) == 0 and c(4) == 4
    assert swap(4, 1, 3)(1) == 3


def test_perm_validation():
    with pytest.raises(ValueError):
        Perm([0, 0, 1])
    with pytest.raises(ValueError):
        Perm([0, 5, 1])


def test_compose_convention():
    a = from_cycles(3, [(0, 1)])
    b = from_cycles(3, [(1, 2)])
    # compose(a, b)(x) = a(b(x))
    assert compose(a, b)(1) == a(b(1)) == a(2) == 2


def test_size_mismatch():
    with pytest.raises(SizeMismatchError):
        compose(identity(3), identity(4))
    with pytest.raises(SizeMismatchError):
        hamming(identity(3), identity(4))


def test_hamming_examples():
    assert hamming(identity(4), identity(4)) == 0
    assert hamming(identity(4), swap(4, 0, 1)) == Fraction(1, 2)
    assert hamming(identity(2), swap(2, 0, 1)) == 1


def test_hs_identity_formula():
    a, b = from_cycles(6, [(0, 1, 2)]), from_cycles(6, [(3, 4)])
    d = hamming(a, b)
    assert hs_distance(a, b) == pytest.approx(math.sqrt(2 * d))


@settings(max_examples=60)
@given(perms(6), perms(6), perms(6))
def test_metric_axioms(a, b, c):
    assert hamming(a, b) == hamming(b, a)
    assert (hamming(a, b) == 0) == (a == b)
    assert hamming(a, c) <= hamming(a, b) + hamming(b, c)
    assert 0 <= hamming(a, b) <= 1


@settings(max_examples=60)
@given(perms(6), perms(6), perms(6))
def test_bi_invariance(a, b, c):
    assert hamming(compose(c, a), compose(c, b)) == hamming(a, b)
    assert hamming(compose(a, c), compose(b, c)) == hamming(a, b)


@settings(max_examples=40)
@given(perms(7))
def test_inverse(p):
    assert compose(p, inverse(p)).is_identity()
    assert compose(inverse(p), p).is_identity()


def test_commutator_defect():
    a = from_cycles(4, [(0, 1)])
    b = from_cycles(4, [(2, 3)])
    assert commutator_defect(a, b) == 0  # disjoint supports commute
    c = from_cycles(4, [(1, 2)])
    assert commutator_defect(a, c) > 0


def test_partial_injection_conventions():
    # undefined vs defined = mismatch; undefined vs undefined = match
    p = PartialInjection([0, -1, 2])
    q = PartialInjection([0, -1, -1])
    assert hamming(p, q) == Fraction(1, 3)
    assert p.defined_count() == 2
    with pytest.raises(ValueError):
        PartialInjection([0, 0, -1])  # repeated target


def test_partial_injection_from_restriction():
    p = from_cycles(4, [(0, 1, 2, 3)])
    r = PartialInjection.from_perm_restriction(p, [0, 2])
    assert r.to_json() == [1, None, 3, None]
    assert hamming(r, p) == Fraction(2, 4)


def test_random_perm_deterministic():
    a = random_perm(8, np.random.default_rng(42))
    b = random_perm(8, np.random.default_rng(42))
    assert a == b
