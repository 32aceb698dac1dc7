"""Construction of almost-invariant subsets of finite groups.

Three constructive steps: rounding a nearly invariant set to an exactly
invariant one, shrinking a set while keeping small translation defects, and
growing a small set by greedy right translates into a density window
[alpha, beta].  At fixed finite size the asymptotic guarantees can fail; the
failures are surfaced as errors instead of silently relaxed bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import NoWitnessError, WindowEmptyError
from .groups import CyclicGroup, DirectProductGroup, FinGroup, group_from_perm_generators
from .perms import Perm


@dataclass
class AlmostInvSet:
    """A subset of a group with its exact density and translation defects."""

    group: FinGroup
    members: List[int]
    density: Fraction
    defect_profile: Dict[int, Fraction]  # generator index -> |gC △ C| / |G|

    def to_json(self) -> dict:
        return {
            "members": [int(m) for m in self.members],
            "density": str(self.density),
            "defect_profile": {
                str(g): str(d) for g, d in sorted(self.defect_profile.items())
            },
        }


def _mask_of(order: int, members: Sequence[int]) -> np.ndarray:
    mask = np.zeros(order, dtype=bool)
    idx = np.asarray(sorted(set(int(m) for m in members)), dtype=np.int64)
    if idx.size:
        mask[idx] = True
    return mask


def translate_mask(G: FinGroup, mask: np.ndarray, g: int, side: str = "left") -> np.ndarray:
    """Indicator of gC (side='left') or Cg (side='right')."""
    idx = np.nonzero(mask)[0]
    out = np.zeros_like(mask)
    if idx.size:
        if side == "left":
            out[G.mul_many(np.int64(g), idx)] = True
        else:
            out[G.mul_many(idx, np.int64(g))] = True
    return out


def left_defect_profile(G: FinGroup, members: Sequence[int]) -> Dict[int, Fraction]:
    mask = _mask_of(G.order, members)
    return {
        g: Fraction(int((translate_mask(G, mask, g, "left") ^ mask).sum()), G.order)
        for g in G.generators
    }


def almost_inv_set(G: FinGroup, members: Sequence[int]) -> AlmostInvSet:
    mem = sorted(set(int(m) for m in members))
    return AlmostInvSet(
        group=G,
        members=mem,
        density=Fraction(len(mem), G.order),
        defect_profile=left_defect_profile(G, mem),
    )


def round_to_invariant(
    y_size: int, X: Sequence[int], H: Sequence[Perm], cap: int = 100_000
) -> Tuple[Set[int], int]:
    """Round X ⊂ {0..y_size-1} to an exactly H-invariant X0.

    Averages the indicator of X over the full subgroup generated by H and
    thresholds at 1/2.  Returns (X0, max_h |X △ hX|); the output satisfies
    |X0 △ X| <= 2 max_h |X △ hX|.
    """
    x_mask = _mask_of(y_size, X)
    subgroup = group_from_perm_generators(list(H), cap=cap) if H else None
    if subgroup is None or subgroup.order == 1:
        return set(int(v) for v in np.nonzero(x_mask)[0]), 0
    counts = np.zeros(y_size, dtype=np.int64)
    max_move = 0
    x_idx = np.nonzero(x_mask)[0]
    for i in range(subgroup.order):
        row = subgroup.rows[i]
        h_mask = np.zeros(y_size, dtype=bool)
        h_mask[row[x_idx]] = True
        counts += h_mask
        max_move = max(max_move, int((h_mask ^ x_mask).sum()))
    x0_mask = 2 * counts >= subgroup.order  # f(y) >= 1/2
    x0 = set(int(v) for v in np.nonzero(x0_mask)[0])
    sym_diff = int((x0_mask ^ x_mask).sum())
    assert sym_diff <= 2 * max_move, "invariant rounding bound violated"
    # exact invariance under every generator
    for p in H:
        assert x0 == {int(p(v)) for v in x0}, "rounded set is not invariant"
    return x0, max_move


def shrink_step(G: FinGroup, D: Sequence[int]) -> Tuple[int, List[int]]:
    """First h with |D|²/(4|G|) <= |Dh ∩ D| <= 3|D|/4; returns (h, Dh ∩ D)."""
    d_list = sorted(set(int(x) for x in D))
    d = len(d_list)
    if not (0 < d < Fraction(3, 4) * G.order):
        raise ValueError(f"|D|={d} must satisfy 0 < |D| < 3|G|/4")
    mask = _mask_of(G.order, d_list)
    lo = Fraction(d * d, 4 * G.order)
    hi = Fraction(3 * d, 4)
    d_idx = np.asarray(d_list, dtype=np.int64)
    for h in G.elements():
        shifted = np.zeros(G.order, dtype=bool)
        shifted[G.mul_many(d_idx, np.int64(h))] = True
        inter = shifted & mask
        cnt = int(inter.sum())
        if lo <= cnt <= hi:
            return h, [int(v) for v in np.nonzero(inter)[0]]
    raise NoWitnessError(
        "no group element satisfies the shrink inequalities at this size"
    )


def grow_to_window(
    G: FinGroup, D: Sequence[int], alpha: Fraction, beta: Fraction
) -> AlmostInvSet:
    """Greedy union of right translates Dg until density reaches [alpha, beta)."""
    d_list = sorted(set(int(x) for x in D))
    if not d_list:
        raise ValueError("D must be nonempty")
    dens = Fraction(len(d_list), G.order)
    if not (0 < alpha < beta <= Fraction(1, 2)):
        raise ValueError("need 0 < alpha < beta <= 1/2")
    if dens > min(beta - alpha, alpha):
        raise ValueError(
            f"|D|/|G| = {dens} exceeds min(beta-alpha, alpha) = {min(beta - alpha, alpha)}"
        )
    k_cap = math.ceil(math.log(1 - float(alpha)) / math.log(1 - float(dens)))
    d_idx = np.asarray(d_list, dtype=np.int64)
    covered = np.zeros(G.order, dtype=bool)
    translates: List[int] = []
    while Fraction(int(covered.sum()), G.order) < alpha:
        best_g, best_gain = -1, -1
        for g in G.elements():
            shifted = np.zeros(G.order, dtype=bool)
            shifted[G.mul_many(d_idx, np.int64(g))] = True
            gain = int((shifted & ~covered).sum())
            if gain > best_gain:
                best_gain, best_g = gain, g
        covered |= _right_translate(G, d_idx, best_g)
        translates.append(best_g)
        assert len(translates) <= k_cap, "greedy cover exceeded the translate bound"
    result = almost_inv_set(G, [int(v) for v in np.nonzero(covered)[0]])
    assert result.density < beta, "greedy cover overshot the density window"
    return result


def _right_translate(G: FinGroup, d_idx: np.ndarray, g: int) -> np.ndarray:
    out = np.zeros(G.order, dtype=bool)
    out[G.mul_many(d_idx, np.int64(g))] = True
    return out


def window_cardinality(order: int, alpha: Fraction, beta: Fraction) -> int:
    """Smallest integer c with alpha·order <= c <= beta·order (closed window)."""
    c = math.ceil(alpha * order)
    if c > beta * order:
        raise WindowEmptyError(
            f"no integer c with {alpha}·{order} <= c <= {beta}·{order}"
        )
    return c


def window_set_cyclic(
    G: FinGroup, S: Optional[Sequence[int]], alpha: Fraction, beta: Fraction
) -> AlmostInvSet:
    """Closed-form almost-invariant set for cyclic / box-product groups.

    Cyclic groups get an initial interval {0..c-1}; a direct product with a
    cyclic right factor gets the box (full left factor) x interval when an
    integer cardinality fits.  Raises WindowEmptyError when none does.
    """
    if not G.is_abelian:
        raise ValueError("window_set_cyclic requires an abelian group")
    if isinstance(G, CyclicGroup):
        c = window_cardinality(G.order, alpha, beta)
        return almost_inv_set(G, list(range(c)))
    if isinstance(G, DirectProductGroup) and isinstance(G.right, CyclicGroup):
        c = window_cardinality(G.right.order, alpha, beta)
        members = [
            G.encode(i, j) for i in range(G.left.order) for j in range(c)
        ]
        return almost_inv_set(G, members)
    raise ValueError("unsupported abelian group shape for the closed-form window")
