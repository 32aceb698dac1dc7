"""Kazhdan constants: exact abelian values and certified Laplacian brackets."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permstab.errors import NonGeneratingError, NotAbelianError
from permstab.groups import cyclic, direct_product, left_regular, sl2_mod
from permstab.spectral import (
    check_expansion,
    global_from_generators,
    kazhdan_abelian_exact,
    kazhdan_bracket,
)


def test_cyclic_exact_closed_form():
    # for Z/n with S = {1}: kappa = 2 sin(pi/n), lambda1 = 2 - 2 cos(2 pi/n)
    for n in range(2, 25):
        br = kazhdan_abelian_exact(cyclic(n), [1])
        assert br.method == "abelian-exact"
        assert br.lower == br.upper
        assert br.lower == pytest.approx(2 * math.sin(math.pi / n), abs=1e-12)
        assert br.lambda1 == pytest.approx(2 - 2 * math.cos(2 * math.pi / n), abs=1e-12)


def test_abelian_exact_product():
    G = direct_product(cyclic(3), cyclic(4))
    S = [G.encode(1, 0), G.encode(0, 1)]
    br = kazhdan_abelian_exact(G, S)
    # the worst character is trivial on the larger factor
    assert br.lower == pytest.approx(2 * math.sin(math.pi / 4), abs=1e-12)


def test_abelian_exact_rejects_nonabelian():
    X = sl2_mod(3)
    with pytest.raises(NotAbelianError):
        kazhdan_abelian_exact(X, list(X.generators))


def test_nongenerating_raises():
    G = cyclic(6)
    with pytest.raises(NonGeneratingError):
        kazhdan_abelian_exact(G, [2])  # <2> has order 3
    with pytest.raises(NonGeneratingError):
        kazhdan_bracket(G, [3])


def test_bracket_contains_exact_value():
    for n in (5, 12, 30, 101):
        exact = kazhdan_abelian_exact(cyclic(n), [1]).lower
        br = kazhdan_bracket(cyclic(n), [1])
        assert br.method == "laplacian-bracket"
        assert br.lower <= exact <= br.upper


def test_bracket_nonabelian():
    X = sl2_mod(5)
    br = kazhdan_bracket(X, list(X.generators))
    assert 0 < br.lower <= br.upper <= 2
    assert br.lambda1 > 0  # generating set => positive gap


def test_lambda1_monotone_in_generators():
    # adding generators can only increase the Laplacian, hence lambda1
    G = cyclic(20)
    small = kazhdan_abelian_exact(G, [1]).lambda1
    large = kazhdan_abelian_exact(G, [1, 3]).lambda1
    assert large >= small - 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 16), st.integers(0, 1000))
def test_expansion_property(n, seed):
    # kappa^2 |A||G\A| <= max_g |gA xor A| |G| for every subset A
    G = cyclic(n)
    br = kazhdan_abelian_exact(G, [1])
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, n))
    A = rng.choice(n, size=size, replace=False)
    chk = check_expansion(G, [1], [int(a) for a in A], br.lower)
    assert chk.holds
    assert chk.witness_generator in (1,)


def test_expansion_full_and_empty():
    G = cyclic(8)
    br = kazhdan_abelian_exact(G, [1])
    assert check_expansion(G, [1], list(range(8)), br.lower).holds
    assert check_expansion(G, [1], [], br.lower).holds
    with pytest.raises(ValueError):
        check_expansion(G, [1], [99], br.lower)


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 10), st.integers(0, 500))
def test_global_from_generators_property(n, seed):
    # kappa * max_{g in G} ||pi(g)xi - xi|| <= 2 max_{g in S} ||pi(g)xi - xi||
    G = cyclic(n)
    act = left_regular(G)
    br = kazhdan_abelian_exact(G, [1])
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(n)
    xi -= xi.mean()  # mean-zero: the regime where the constant bites
    chk = global_from_generators(G, [1], act, xi, br.lower)
    assert chk.holds


def test_global_dimension_mismatch():
    G = cyclic(4)
    with pytest.raises(ValueError):
        global_from_generators(G, [1], left_regular(G), np.ones(3), 0.5)
