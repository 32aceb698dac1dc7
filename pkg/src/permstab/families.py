"""Almost-homomorphisms of (Γ∗ℤ)×Λ built from commuting translation actions.

The construction: realize Γ and Λ inside a finite group X through a
surjection p and a homomorphism q, let Γ act by left translation and Λ by
right translation (these commute exactly), and send the free letter t to a
swap permutation θ that exchanges a set A with a disjoint translate gA.
Because A is assembled from a density-window subset of q(Λ) spread over
coset representatives, the commutator of θ with some right translation is
provably bounded below — the family is almost multiplicative but uniformly
far from exact homomorphisms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .almost_invariant import window_cardinality
from .errors import ConfigError, NotSurjectiveError
from .groups import (
    FinGroup,
    GroupHom,
    MarkedGroup,
    MarkedHom,
    MarkedMap,
    SL2Group,
    left_coset_reps,
    product_with_free_z,
    sl2_mod,
)
from .perms import Perm, compose, hamming, identity

HomLike = Union[GroupHom, MarkedHom]

DEFAULT_WINDOW = (Fraction(1, 7), Fraction(1, 6))


def _gen_images(hom: HomLike) -> List[int]:
    if isinstance(hom, MarkedHom):
        return list(hom.gen_images)
    return [int(hom.image[g]) for g in hom.source.generators]


def _image_subgroup(hom: HomLike) -> List[int]:
    if isinstance(hom, MarkedHom):
        return list(hom.image_subgroup)
    return sorted(set(int(v) for v in hom.image))


def _is_surjective(hom: HomLike) -> bool:
    return bool(hom.surjective)


@dataclass
class BiTranslationAction:
    """Left translations for p(Γ)-generators, right translations for q(Λ)."""

    X: FinGroup
    p: HomLike
    q: HomLike
    gamma_perms: List[Perm] = field(init=False)
    lambda_perms: List[Perm] = field(init=False)

    def __post_init__(self):
        if not _is_surjective(self.p):
            raise NotSurjectiveError("p must map onto the carrier group")
        self.gamma_perms = [self.X.left_perm(g) for g in _gen_images(self.p)]
        # right translation by q(h): x -> x·q(h)^{-1} (a left action of Λ)
        self.lambda_perms = [
            self.X.right_perm(self.X.inv(h)) for h in _gen_images(self.q)
        ]
        for a in self.gamma_perms:
            for b in self.lambda_perms:
                if compose(a, b) != compose(b, a):
                    raise ValueError("left and right translations fail to commute")

    def lambda_image(self) -> List[int]:
        return _image_subgroup(self.q)

    def right_translation(self, h: int) -> Perm:
        """x -> x·h^{-1} for an element index h of the carrier."""
        return self.X.right_perm(self.X.inv(h))


@dataclass
class SwapFamily:
    """The swap permutation θ exchanging A with gA, plus its provenance."""

    base: BiTranslationAction
    A: List[int]
    g: int
    t_image: Perm
    C: List[int]
    Z: List[int]
    B: List[int]

    @property
    def a_density(self) -> Fraction:
        return Fraction(len(self.A), self.base.X.order)

    @property
    def b_density(self) -> Fraction:
        return Fraction(len(self.B), self.base.X.order)

    def to_json(self) -> dict:
        return {
            "carrier": self.base.X.name,
            "carrier_order": self.base.X.order,
            "g": int(self.g),
            "g_label": self.base.X.label(self.g),
            "C_size": len(self.C),
            "Z_size": len(self.Z),
            "B_size": len(self.B),
            "A_size": len(self.A),
            "b_density": str(self.b_density),
            "a_density": str(self.a_density),
        }


@dataclass
class DefectReport:
    relator_defects: Dict[Tuple[int, ...], Fraction]
    sofic_profile: Dict[int, Fraction]  # generator index (1-based) -> d_H(σ(g), id)
    commutator_curve: Dict[int, Fraction]  # q(Λ) element index -> defect

    @property
    def max_relator_defect(self) -> Fraction:
        return max(self.relator_defects.values(), default=Fraction(0))

    @property
    def max_commutator_defect(self) -> Fraction:
        return max(self.commutator_curve.values(), default=Fraction(0))

    def to_json(self) -> dict:
        return {
            "relator_defects": {
                " ".join(map(str, r)): str(d) for r, d in self.relator_defects.items()
            },
            "sofic_profile": {str(i): str(d) for i, d in self.sofic_profile.items()},
            "commutator_curve": {
                str(h): str(d) for h, d in sorted(self.commutator_curve.items())
            },
        }


def build_bitranslation(X: FinGroup, p: HomLike, q: HomLike) -> BiTranslationAction:
    return BiTranslationAction(X, p, q)


def _equidistribution_spot_check(
    X: FinGroup, b_arr: np.ndarray, q_members: List[int], n_checks: int = 3
):
    """Σ_h |Bh ∩ Y| = |B||Y||q(Λ)| / |X| exactly, for random test sets Y."""
    rng = np.random.default_rng(0)
    q_arr = np.asarray(q_members, dtype=np.int64)
    b_masks = np.zeros((len(q_members), X.order), dtype=bool)
    for j, h in enumerate(q_members):
        b_masks[j, X.mul_many(b_arr, np.int64(h))] = True
    for _ in range(n_checks):
        y_size = int(rng.integers(1, X.order + 1))
        y = rng.choice(X.order, size=y_size, replace=False)
        total = int(b_masks[:, y].sum())
        expected = Fraction(len(b_arr) * y_size * len(q_members), X.order)
        assert Fraction(total) == expected, "equidistribution identity failed"


def build_swap_family(
    base: BiTranslationAction,
    window: Tuple[Fraction, Fraction] = DEFAULT_WINDOW,
    spot_check: bool = True,
) -> SwapFamily:
    """Assemble A, g, and the swap permutation from a density-window set.

    C is the smallest-index subset of q(Λ) whose density sits in the window;
    B = Z·C over the left coset representatives Z, so |B|/|X| = |C|/|q(Λ)|;
    g maximizes |B ∖ g⁻¹B| (ties to the smallest index) and A = B ∖ g⁻¹B.
    """
    X = base.X
    alpha, beta = window
    q_members = base.lambda_image()
    c_size = window_cardinality(len(q_members), alpha, beta)
    C = sorted(q_members)[:c_size]
    Z = left_coset_reps(X, q_members)
    z_arr = np.asarray(Z, dtype=np.int64)
    c_arr = np.asarray(C, dtype=np.int64)
    b_arr = np.unique(X.mul_many(z_arr[:, None], c_arr[None, :]).ravel())
    assert b_arr.size == len(Z) * len(C), "coset translates of C overlap"
    b_density = Fraction(int(b_arr.size), X.order)
    assert alpha <= b_density <= beta
    if spot_check and len(q_members) * X.order <= 50_000_000:
        _equidistribution_spot_check(X, b_arr, q_members)

    # counts[g] = |B ∩ g^{-1}B| = #{(y,x) ∈ B²: g = y·x^{-1}};
    # maximizing |B ∖ g^{-1}B| = |B| - counts[g] means minimizing counts.
    counts = np.zeros(X.order, dtype=np.int64)
    inv_b = X.inv_many(b_arr)
    chunk = max(1, 2_000_000 // max(1, int(b_arr.size)))
    for start in range(0, b_arr.size, chunk):
        block = inv_b[start : start + chunk]
        prods = X.mul_many(b_arr[:, None], block[None, :])
        counts += np.bincount(prods.ravel(), minlength=X.order)
    g = int(np.argmin(counts))  # first minimum = smallest index

    b_mask = np.zeros(X.order, dtype=bool)
    b_mask[b_arr] = True
    gb = X.mul_many(np.int64(g), b_arr)
    a_arr = b_arr[~b_mask[gb]]  # x ∈ B with gx ∉ B
    assert a_arr.size == int(b_arr.size) - int(counts[g])
    a_density = Fraction(int(a_arr.size), X.order)
    lower = b_density * (1 - b_density)
    assert a_density >= lower >= Fraction(5, 42), (
        f"|A|/|X| = {a_density} fell below the certified floor {lower}"
    )

    ga_arr = X.mul_many(np.int64(g), a_arr)
    assert not np.isin(ga_arr, a_arr).any(), "A and gA intersect"
    image = np.arange(X.order, dtype=np.int64)
    image[a_arr] = ga_arr
    image[ga_arr] = a_arr
    t_image = Perm(image)
    return SwapFamily(
        base=base,
        A=[int(v) for v in a_arr],
        g=g,
        t_image=t_image,
        C=[int(v) for v in C],
        Z=[int(v) for v in Z],
        B=[int(v) for v in b_arr],
    )


def family_on_marked(fam: SwapFamily, marked: MarkedGroup) -> MarkedMap:
    """Generator images in the declared order (Γ-gens, t, Λ-gens)."""
    images = list(fam.base.gamma_perms) + [fam.t_image] + list(fam.base.lambda_perms)
    if marked.generator_count != len(images):
        raise ConfigError(
            f"presentation has {marked.generator_count} generators, "
            f"construction provides {len(images)}"
        )
    return MarkedMap(marked, images)


def relator_defects(m: MarkedMap) -> Dict[Tuple[int, ...], Fraction]:
    ident = identity(m.points)
    return {tuple(r): hamming(m.evaluate(r), ident) for r in m.marked.relators}


def _commutator_curve(fam: SwapFamily) -> Dict[int, Fraction]:
    """Exact defect of [θ, right-translation by h] for every h in q(Λ).

    Computed twice — by direct composition and by the closed-form count over
    the displaced parts of A and A ∪ gA — and the two must agree exactly.
    """
    X = fam.base.X
    theta = fam.t_image
    a_arr = np.asarray(fam.A, dtype=np.int64)
    g = fam.g
    ga_arr = X.mul_many(np.int64(g), a_arr)
    u_arr = np.concatenate([a_arr, ga_arr])
    a_mask = np.zeros(X.order, dtype=bool)
    a_mask[a_arr] = True
    u_mask = np.zeros(X.order, dtype=bool)
    u_mask[u_arr] = True
    g_is_involution = X.mul(g, g) == X.identity_index
    curve: Dict[int, Fraction] = {}
    for h in fam.base.lambda_image():
        rho = fam.base.right_translation(h)
        direct = hamming(compose(theta, rho), compose(rho, theta))
        ah = X.mul_many(a_arr, np.int64(h))
        uh = X.mul_many(u_arr, np.int64(h))
        ah_mask = np.zeros(X.order, dtype=bool)
        ah_mask[ah] = True
        uh_mask = np.zeros(X.order, dtype=bool)
        uh_mask[uh] = True
        u_loss = int((u_mask & ~uh_mask).sum())  # |U ∖ Uh|, U = A ∪ gA
        if g_is_involution:
            closed = Fraction(2 * u_loss, X.order)
        else:
            a_loss = int((a_mask & ~ah_mask).sum())  # |A ∖ Ah|
            closed = Fraction(2 * a_loss + u_loss, X.order)
        assert closed == direct, f"closed-form defect disagrees at h={h}"
        curve[int(h)] = direct
    return curve


def defect_report(m: MarkedMap, fam: Optional[SwapFamily] = None) -> DefectReport:
    ident = identity(m.points)
    sofic = {
        i + 1: hamming(p, ident) for i, p in enumerate(m.images)
    }
    curve = _commutator_curve(fam) if fam is not None else {}
    return DefectReport(
        relator_defects=relator_defects(m),
        sofic_profile=sofic,
        commutator_curve=curve,
    )


def commuting_distance_floor(fam: SwapFamily) -> Fraction:
    """Lower bound on d_H(θ, ψ) over ψ commuting exactly with all right translations.

    For such ψ the commutator defect of ψ vanishes, and the defect of θ obeys
    defect(θ) <= 2 d_H(θ, ψ), so half the measured curve maximum is a floor.
    """
    curve = _commutator_curve(fam)
    return max(curve.values(), default=Fraction(0)) / 2


def product_lift(
    m: MarkedMap, extra: FinGroup, p_extra: HomLike, gamma_count: Optional[int] = None
) -> MarkedMap:
    """Diagonal lift to extra × X: Γ-generators also translate the extra factor.

    The first `gamma_count` marked generators are the Γ-generators (default:
    the generator count of p_extra's source presentation); t and the
    Λ-generators act trivially on the extra coordinate.
    """
    if not _is_surjective(p_extra):
        raise NotSurjectiveError("the extra-factor map must be onto")
    extra_gens = _gen_images(p_extra)
    if gamma_count is None:
        gamma_count = len(extra_gens)
    if gamma_count > m.marked.generator_count:
        raise ConfigError("more Γ-generators than the presentation has")
    n = m.points
    new_images = []
    for i, p in enumerate(m.images):
        if i < gamma_count:
            extra_perm = extra.left_perm(extra_gens[i])
        else:
            extra_perm = identity(extra.order)
        # (a, x) -> (extra_perm(a), p(x)) under index (a, x) = a·n + x
        img = (extra_perm.image[:, None] * n + p.image[None, :]).ravel()
        new_images.append(Perm(img, _checked=True))
    return MarkedMap(m.marked, new_images)


@dataclass
class CosetStructure:
    """Action of Γ on the cosets Γ/Γ₀ with a cocycle rewritten into Γ₀'s generators.

    Coset 0 is the trivial coset Γ₀ (the section is normalized there);
    `gen_action[i]` is how the (i+1)-st Γ-generator permutes cosets, and
    `cocycle_words[(i, c)]` is the word, over Γ₀'s marked generators, equal
    to s(g_i·c)⁻¹ g_i s(c).
    """

    marked: MarkedGroup  # presentation of Γ
    index: int
    gen_action: List[Perm]
    cocycle_words: Dict[Tuple[int, int], Tuple[int, ...]]

    def __post_init__(self):
        if len(self.gen_action) != self.marked.generator_count:
            raise ConfigError("one coset permutation per Γ-generator required")
        for p in self.gen_action:
            if p.n != self.index:
                raise ConfigError("coset permutations must act on `index` points")
        for i in range(self.marked.generator_count):
            for c in range(self.index):
                if (i, c) not in self.cocycle_words:
                    raise ConfigError(f"missing cocycle rewriting for ({i},{c})")


def induce_finite_index(m: MarkedMap, cosets: CosetStructure) -> MarkedMap:
    """Induce a map on Γ₀ up to Γ along the coset action.

    The induced generator image sends (c, x) to (g_i·c, σ(w_{i,c}) x) where
    w_{i,c} is the supplied cocycle word; an exact homomorphism stays exact,
    and relator defects of the induced map average the constituent defects
    over cosets.
    """
    n = m.points
    new_images = []
    for i, coset_perm in enumerate(cosets.gen_action):
        img = np.empty(cosets.index * n, dtype=np.int64)
        for c in range(cosets.index):
            w = cosets.cocycle_words[(i, c)]
            block = m.evaluate(w).image
            img[c * n : (c + 1) * n] = coset_perm(c) * n + block
        new_images.append(Perm(img))
    return MarkedMap(cosets.marked, new_images)


# ---------------------------------------------------------------------------
# Flagship instances over SL2(Z/pZ)
# ---------------------------------------------------------------------------

FLAGSHIP_PRIMES = (7, 13, 19, 43)


@dataclass
class FlagshipInstance:
    prime: int
    X: SL2Group
    family: SwapFamily
    marked: MarkedGroup
    map: MarkedMap
    report: DefectReport
    floor: Fraction


def flagship_family(
    p: int, window: Tuple[Fraction, Fraction] = DEFAULT_WINDOW
) -> FlagshipInstance:
    """Swap family on SL2(Z/pZ) with Γ = F₂ and Λ = ℤ into a unipotent subgroup.

    Γ maps through [[1,2],[0,1]] and [[1,0],[2,1]]; Λ's generator maps to
    [[1,2],[0,1]], whose cyclic image has order p.  Raises WindowEmptyError
    for primes (such as 5, 11, 17) whose cyclic order misses the window.
    """
    X = sl2_mod(p)
    gamma = MarkedGroup.free(2, name="F2")
    lam = MarkedGroup.free(1, name="Z")
    p_hom = MarkedHom(gamma, X, [X.index_of(1, 2, 0, 1), X.index_of(1, 0, 2, 1)])
    if not p_hom.surjective:
        raise NotSurjectiveError(f"F2 generators do not cover SL2(Z/{p}Z)")
    q_hom = MarkedHom(lam, X, [X.index_of(1, 2, 0, 1)])
    base = build_bitranslation(X, p_hom, q_hom)
    fam = build_swap_family(base, window=window)
    marked = product_with_free_z(gamma, lam)
    mmap = family_on_marked(fam, marked)
    report = defect_report(mmap, fam)
    return FlagshipInstance(
        prime=p,
        X=X,
        family=fam,
        marked=marked,
        map=mmap,
        report=report,
        floor=report.max_commutator_defect / 2,
    )
