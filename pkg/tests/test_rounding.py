"""Rounding algorithms: right translations, conjugacies, commuting extensions,
and the full pipeline, cross-checked against brute-force minima."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permstab.errors import OutOfRegimeError
from permstab.groups import PermAction, cyclic, direct_product, left_regular, sl2_mod
from permstab.perms import (
    Perm,
    compose,
    from_cycles,
    hamming,
    identity,
    inverse,
    random_perm,
    swap,
)
from permstab.rounding import (
    MatchMatrix,
    commuting_extension,
    extract_conjugacy,
    nearest_right_translation,
    rigidity_pipeline,
)


def _beta(G, h):
    return G.right_perm(G.inv(h))


def _embed(p, y_size):
    image = np.arange(y_size, dtype=np.int64)
    image[: p.n] = p.image
    return Perm(image)


def _z2k(k):
    G = cyclic(2)
    for _ in range(k - 1):
        G = direct_product(G, cyclic(2))
    return G


# -- nearest right translation ------------------------------------------------


def test_nearest_translation_exact():
    G = cyclic(12)
    for h in (0, 3, 7):
        got, dist = nearest_right_translation(G, [1], _beta(G, h))
        assert got == h and dist == 0


def test_nearest_translation_perturbed():
    G = cyclic(12)
    phi = compose(swap(12, 0, 1), _beta(G, 3))
    h, dist = nearest_right_translation(G, [1], phi)
    assert h == 3 and dist == Fraction(2, 12)


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 14), st.integers(0, 1000))
def test_nearest_translation_vs_bruteforce(n, seed):
    G = cyclic(n)
    rng = np.random.default_rng(seed)
    h0 = int(rng.integers(0, n))
    phi = _beta(G, h0)
    if n >= 7:  # small perturbation keeps the defect in range
        a, b = rng.choice(n, size=2, replace=False)
        phi = compose(swap(n, int(a), int(b)), phi)
    h, dist = nearest_right_translation(G, [1], phi)
    brute = min(hamming(phi, _beta(G, x)) for x in G.elements())
    assert dist >= brute
    # the certified bound holds with the exact abelian kappa
    kappa = 2 * np.sin(np.pi / n)
    defect = hamming(compose(G.left_perm(1), phi), compose(phi, G.left_perm(1)))
    assert kappa**2 * float(dist) <= 4 * float(defect) + 1e-9


def test_nearest_translation_nonabelian():
    X = sl2_mod(3)
    phi = _beta(X, 5)
    h, dist = nearest_right_translation(X, list(X.generators), phi)
    assert h == 5 and dist == 0


# -- conjugacy extraction ------------------------------------------------------


def test_extract_conjugacy_identical_actions():
    K = cyclic(6)
    act = left_regular(K)
    res = extract_conjugacy(K, act, list(act.perms))
    assert res.epsilon == 0 and res.set_loss == 0 and res.displacement == 0
    assert res.X1 == list(range(6))
    assert all(res.phi_of(x) == x for x in res.X1)


@settings(max_examples=40, deadline=None)
@given(st.integers(6, 24), st.integers(0, 2000))
def test_extract_conjugacy_property(n, seed):
    # alpha2 = tau alpha1 tau^{-1} for a transposition tau: a genuine action
    # pointwise close to alpha1
    K = cyclic(n)
    act = left_regular(K)
    rng = np.random.default_rng(seed)
    a, b = rng.choice(n, size=2, replace=False)
    tau = swap(n, int(a), int(b))
    conj = [compose(tau, compose(p, tau)) for p in act.perms]  # tau = tau^{-1}
    res = extract_conjugacy(K, list(act.perms), conj)
    assert Fraction(res.set_loss) <= 16 * res.epsilon * n
    assert Fraction(res.displacement) <= 16 * res.epsilon * n
    res.match.check_substochastic()
    # exact equivariance on X1
    x1 = set(res.X1)
    for k in K.elements():
        for x in res.X1:
            kx = act.perms[k](x)
            assert kx in x1
            assert res.phi_of(kx) == conj[k](res.phi_of(x))
    # transitive + small defect: nothing is lost
    if res.epsilon < Fraction(1, 16):
        assert res.set_loss == 0


def test_match_matrix_weight():
    m = MatchMatrix(n=3, k_order=4, counts={(0, 0): 4, (1, 2): 3})
    assert m.weight(0, 0) == 1 and m.weight(1, 2) == Fraction(3, 4)
    assert m.weight(2, 2) == 0
    m.check_substochastic()


# -- commuting extension -------------------------------------------------------


def test_commuting_extension_exact_input():
    G = cyclic(6)
    act = left_regular(G)
    phi = _beta(G, 2)  # already commutes with all left translations
    psi, dist = commuting_extension(G, act, phi)
    assert dist == 0 and psi == phi


def test_commuting_extension_vs_centralizer_bruteforce():
    # for the regular action the exact commutant is the right translations
    G = cyclic(6)
    act = left_regular(G)
    phi = compose(swap(6, 0, 1), _beta(G, 2))
    psi, dist = commuting_extension(G, act, phi)
    for p in act.perms:
        assert compose(psi, p) == compose(p, psi)
    brute = min(hamming(phi, _beta(G, h)) for h in G.elements())
    assert brute <= dist
    eps = max(
        hamming(compose(p, phi), compose(phi, p)) for p in act.perms
    )
    assert dist <= 32 * eps


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 12), st.integers(0, 1000))
def test_commuting_extension_property(n, seed):
    G = cyclic(n)
    act = left_regular(G)
    rng = np.random.default_rng(seed)
    a, b = rng.choice(n, size=2, replace=False)
    phi = compose(swap(n, int(a), int(b)), _beta(G, int(rng.integers(0, n))))
    psi, dist = commuting_extension(G, act, phi)
    eps = max(hamming(compose(p, phi), compose(phi, p)) for p in act.perms)
    assert dist <= 32 * eps
    for p in act.perms:
        assert compose(psi, p) == compose(p, psi)


def test_commuting_extension_nonregular_action():
    # two 3-orbits of cyclic(3) on six points; phi swapping the orbits commutes
    G = cyclic(3)
    act = PermAction(G, [identity(6), from_cycles(6, [(0, 1, 2), (3, 4, 5)]),
                         from_cycles(6, [(0, 2, 1), (3, 5, 4)])])
    phi = from_cycles(6, [(0, 3), (1, 4), (2, 5)])
    psi, dist = commuting_extension(G, act, phi)
    assert dist == 0 and psi == phi


# -- full pipeline ---------------------------------------------------------------


def test_pipeline_exact_instance():
    G = cyclic(8)
    y_size = 10
    k_gens = [_embed(_beta(G, 3), y_size)]
    res = rigidity_pipeline(G, [1], y_size, k_gens)
    assert res.epsilon == 0
    assert res.set_loss == 0 and res.displacement == 0
    assert res.X1 == list(range(8)) and res.X2 == list(range(8))
    # K0 = <beta(3)> has order 8 and delta recovers every translation amount
    res.delta.verify()
    assert len(res.K0) == 8
    assert sorted(int(v) for v in res.delta.image) == list(range(8))


def test_pipeline_in_regime_perturbed():
    # kappa = 2 for (Z/2)^6 with all non-identity generators, so the regime
    # boundary kappa^4/200 = 0.08 admits the measured defect 3/64
    G = _z2k(6)
    S = list(range(1, G.order))
    y_size = G.order + 4
    tau = swap(y_size, G.order - 1, G.order)
    k_gens = [
        compose(tau, compose(_embed(_beta(G, g), y_size), tau))
        for g in G.generators
    ]
    res = rigidity_pipeline(G, S, y_size, k_gens, kappa_lower=2.0)
    assert res.epsilon == Fraction(3, 64)
    assert res.set_loss < res.bound_set_loss
    assert res.displacement <= res.bound_displacement
    res.delta.verify()
    data = res.to_json()
    assert data["epsilon"] == "3/64" and data["K0_size"] == len(res.K0)


def test_pipeline_out_of_regime():
    G = _z2k(4)
    S = list(range(1, G.order))
    y_size = G.order + 4
    tau = swap(y_size, G.order - 1, G.order)
    k_gens = [
        compose(tau, compose(_embed(_beta(G, g), y_size), tau))
        for g in G.generators
    ]
    with pytest.raises(OutOfRegimeError):
        rigidity_pipeline(G, S, y_size, k_gens, kappa_lower=2.0)


def test_pipeline_input_validation():
    G = cyclic(4)
    with pytest.raises(ValueError):
        rigidity_pipeline(G, [1], 2, [identity(2)])  # Y smaller than X
    with pytest.raises(ValueError):
        rigidity_pipeline(G, [1], 6, [identity(5)])  # wrong point count
