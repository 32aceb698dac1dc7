"""Fully enumerated finite groups, homomorphisms, actions and coset machinery.

Elements of a group of order N are the indices 0..N-1.  Small groups carry a
flat multiplication table; larger ones (matrix groups, products) multiply
through a vectorized backend so that index arrays stay the only currency.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    CapacityError,
    NotAHomomorphismError,
    NotAnActionError,
    NotASubgroupError,
    NotSurjectiveError,
)
from .perms import Perm, compose, identity, inverse

TABLE_CAP = 4096


class FinGroup:
    """Base class; subclasses provide mul/inv (scalar and vectorized)."""

    order: int
    identity_index: int
    generators: List[int]
    labels: Optional[List[str]] = None
    name: str = "group"

    _abelian: Optional[bool] = None

    # -- core multiplication ------------------------------------------------

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_many(np.int64(a), np.int64(b)))

    def inv(self, a: int) -> int:
        return int(self.inv_many(np.int64(a)))

    def mul_many(self, a, b) -> np.ndarray:
        raise NotImplementedError

    def inv_many(self, a) -> np.ndarray:
        raise NotImplementedError

    # -- derived helpers ----------------------------------------------------

    def elements(self) -> range:
        return range(self.order)

    def left_perm(self, g: int) -> Perm:
        """x -> g*x as a permutation of element indices."""
        return Perm(self.mul_many(np.int64(g), np.arange(self.order)), _checked=True)

    def right_perm(self, g: int) -> Perm:
        """x -> x*g as a permutation of element indices."""
        return Perm(self.mul_many(np.arange(self.order), np.int64(g)), _checked=True)

    def label(self, g: int) -> str:
        return self.labels[g] if self.labels else str(g)

    @property
    def is_abelian(self) -> bool:
        if self._abelian is None:
            ab = True
            idx = np.arange(self.order)
            for g in self.generators:
                if not np.array_equal(
                    self.mul_many(np.int64(g), idx), self.mul_many(idx, np.int64(g))
                ):
                    ab = False
                    break
            # generators commuting pairwise with everything forces abelian
            self._abelian = ab
        return self._abelian

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity_index:
            x = self.mul(x, g)
            k += 1
        return k

    def closure(self, seed: Sequence[int], cap: Optional[int] = None) -> List[int]:
        """BFS product closure of a set of element indices, discovery order."""
        cap = cap if cap is not None else self.order
        seen = np.zeros(self.order, dtype=bool)
        seen[self.identity_index] = True
        out = [self.identity_index]
        frontier = np.array([self.identity_index], dtype=np.int64)
        gens = [np.int64(g) for g in seed]
        while frontier.size:
            if gens:
                cands = np.concatenate([self.mul_many(frontier, g) for g in gens])
            else:
                cands = np.empty(0, dtype=np.int64)
            uniq, first = np.unique(cands, return_index=True)
            fresh = ~seen[uniq]
            new = uniq[fresh][np.argsort(first[fresh], kind="stable")]
            if len(out) + new.size > cap:
                raise CapacityError(
                    f"closure exceeds cap {cap} in group of order {self.order}"
                )
            seen[new] = True
            out.extend(int(v) for v in new)
            frontier = new
        return out

    def generates(self, seed: Sequence[int]) -> bool:
        closed = set(seed) | {self.inv(g) for g in seed}
        return len(self.closure(list(closed))) == self.order

    def is_subgroup(self, members: Sequence[int]) -> bool:
        s = set(int(m) for m in members)
        if self.identity_index not in s:
            return False
        for a in s:
            if self.inv(a) not in s:
                return False
            for b in s:
                if self.mul(a, b) not in s:
                    return False
        return True

    def to_json(self, table_cap: int = TABLE_CAP) -> dict:
        data: dict = {
            "order": self.order,
            "generators": [int(g) for g in self.generators],
        }
        if self.labels is not None:
            data["labels"] = list(self.labels)
        if self.order <= table_cap:
            idx = np.arange(self.order)
            data["mul_rows"] = [
                [int(v) for v in self.mul_many(np.int64(i), idx)]
                for i in range(self.order)
            ]
        return data

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, order={self.order})"


class TableGroup(FinGroup):
    """Group backed by a flat order x order multiplication table."""

    def __init__(
        self,
        table: np.ndarray,
        generators: Sequence[int],
        labels: Optional[Sequence[str]] = None,
        name: str = "table-group",
        identity_index: Optional[int] = None,
    ):
        table = np.asarray(table, dtype=np.int64)
        n = table.shape[0]
        if table.shape != (n, n):
            raise ValueError("table must be square")
        self.order = n
        self.table = table
        if identity_index is None:
            idx = np.arange(n)
            matches = [e for e in range(n) if np.array_equal(table[e], idx)]
            if not matches:
                raise ValueError("no identity element in table")
            identity_index = matches[0]
        self.identity_index = int(identity_index)
        inv = np.empty(n, dtype=np.int64)
        for a in range(n):
            hits = np.nonzero(table[a] == self.identity_index)[0]
            if hits.size != 1:
                raise ValueError("table row has no unique inverse")
            inv[a] = hits[0]
        self._inv = inv
        self.generators = [int(g) for g in generators]
        self.labels = list(labels) if labels is not None else None
        self.name = name

    def mul_many(self, a, b) -> np.ndarray:
        return self.table[a, b]

    def inv_many(self, a) -> np.ndarray:
        return self._inv[a]


class CyclicGroup(FinGroup):
    """Z/nZ, additive, identity 0, canonical generator 1."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.order = n
        self.identity_index = 0
        self.generators = [1] if n > 1 else []
        self.labels = None
        self.name = f"cyclic({n})"
        self._abelian = True

    def mul_many(self, a, b) -> np.ndarray:
        return (np.asarray(a) + np.asarray(b)) % self.order

    def inv_many(self, a) -> np.ndarray:
        return (-np.asarray(a)) % self.order


class DirectProductGroup(FinGroup):
    """A x B with index (a, b) -> a*|B| + b."""

    def __init__(self, a: FinGroup, b: FinGroup):
        self.left = a
        self.right = b
        self.order = a.order * b.order
        self.identity_index = a.identity_index * b.order + b.identity_index
        self.generators = [g * b.order + b.identity_index for g in a.generators] + [
            a.identity_index * b.order + h for h in b.generators
        ]
        if a.labels is not None or b.labels is not None:
            self.labels = [
                f"({a.label(i)},{b.label(j)})"
                for i in range(a.order)
                for j in range(b.order)
            ]
        else:
            self.labels = None
        self.name = f"{a.name}x{b.name}"
        self._abelian = a.is_abelian and b.is_abelian

    def encode(self, i: int, j: int) -> int:
        return i * self.right.order + j

    def decode(self, x: int) -> Tuple[int, int]:
        return divmod(int(x), self.right.order)

    def mul_many(self, a, b) -> np.ndarray:
        m = self.right.order
        a = np.asarray(a)
        b = np.asarray(b)
        ai, aj = a // m, a % m
        bi, bj = b // m, b % m
        return self.left.mul_many(ai, bi) * m + self.right.mul_many(aj, bj)

    def inv_many(self, a) -> np.ndarray:
        m = self.right.order
        a = np.asarray(a)
        return self.left.inv_many(a // m) * m + self.right.inv_many(a % m)


class SL2Group(FinGroup):
    """SL2(Z/nZ), elements enumerated in lexicographic (a,b,c,d) order."""

    def __init__(self, n: int, order_cap: int = 200_000):
        if n < 2:
            raise ValueError("modulus must be >= 2")
        self.modulus = n
        rows = []
        bc = np.stack(
            np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij"), -1
        ).reshape(-1, 3)
        for a in range(n):
            b, c, d = bc[:, 0], bc[:, 1], bc[:, 2]
            det = (a * d - b * c) % n
            sel = det == 1
            block = np.empty((int(sel.sum()), 4), dtype=np.int64)
            block[:, 0] = a
            block[:, 1] = b[sel]
            block[:, 2] = c[sel]
            block[:, 3] = d[sel]
            rows.append(block)
            if sum(len(r) for r in rows) > order_cap:
                raise CapacityError(f"|SL2(Z/{n}Z)| exceeds cap {order_cap}")
        elems = np.concatenate(rows)
        self.elems = elems
        self.order = int(elems.shape[0])
        keys = ((elems[:, 0] * n + elems[:, 1]) * n + elems[:, 2]) * n + elems[:, 3]
        lut = np.full(n**4, -1, dtype=np.int64)
        lut[keys] = np.arange(self.order)
        self._lut = lut
        self.identity_index = self.index_of(1, 0, 0, 1)
        self.generators = [self.index_of(1, 1, 0, 1), self.index_of(1, 0, 1, 1)]
        self.labels = [
            f"[[{r[0]},{r[1]}],[{r[2]},{r[3]}]]" for r in elems.tolist()
        ]
        self.name = f"sl2({n})"
        self._abelian = False

    def index_of(self, a: int, b: int, c: int, d: int) -> int:
        n = self.modulus
        a, b, c, d = a % n, b % n, c % n, d % n
        if (a * d - b * c) % n != 1:
            raise ValueError("matrix is not in SL2")
        idx = int(self._lut[((a * n + b) * n + c) * n + d])
        assert idx >= 0
        return idx

    def mul_many(self, a, b) -> np.ndarray:
        n = self.modulus
        A = self.elems[np.asarray(a)]
        B = self.elems[np.asarray(b)]
        a11 = (A[..., 0] * B[..., 0] + A[..., 1] * B[..., 2]) % n
        a12 = (A[..., 0] * B[..., 1] + A[..., 1] * B[..., 3]) % n
        a21 = (A[..., 2] * B[..., 0] + A[..., 3] * B[..., 2]) % n
        a22 = (A[..., 2] * B[..., 1] + A[..., 3] * B[..., 3]) % n
        return self._lut[((a11 * n + a12) * n + a21) * n + a22]

    def inv_many(self, a) -> np.ndarray:
        n = self.modulus
        A = self.elems[np.asarray(a)]
        # inverse of [[a,b],[c,d]] with det 1 is [[d,-b],[-c,a]]
        a11, a12 = A[..., 3] % n, (-A[..., 1]) % n
        a21, a22 = (-A[..., 2]) % n, A[..., 0] % n
        return self._lut[((a11 * n + a12) * n + a21) * n + a22]


class PermGroup(FinGroup):
    """Group of permutations of m points, elements stored by image rows."""

    def __init__(
        self,
        rows: np.ndarray,
        generators: Sequence[int],
        name: str = "perm-group",
    ):
        rows = np.asarray(rows, dtype=np.int64)
        self.rows = rows
        self.order = int(rows.shape[0])
        self.points = int(rows.shape[1])
        self._index: Dict[bytes, int] = {
            rows[i].tobytes(): i for i in range(self.order)
        }
        ident = np.arange(self.points, dtype=np.int64)
        self.identity_index = self._index[ident.tobytes()]
        self.generators = [int(g) for g in generators]
        self.labels = None
        self.name = name

    def perm(self, g: int) -> Perm:
        return Perm(self.rows[g], _checked=True)

    def index_of_perm(self, p: Perm) -> int:
        key = np.asarray(p.image, dtype=np.int64).tobytes()
        if key not in self._index:
            raise ValueError("permutation not in this group")
        return self._index[key]

    def mul(self, a: int, b: int) -> int:
        return self._index[self.rows[a][self.rows[b]].tobytes()]

    def inv(self, a: int) -> int:
        inv = np.empty(self.points, dtype=np.int64)
        inv[self.rows[a]] = np.arange(self.points)
        return self._index[inv.tobytes()]

    def mul_many(self, a, b) -> np.ndarray:
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        b = np.atleast_1d(np.asarray(b, dtype=np.int64))
        a, b = np.broadcast_arrays(a, b)
        out = np.empty(a.shape, dtype=np.int64)
        flat_a, flat_b, flat_o = a.ravel(), b.ravel(), out.ravel()
        for i in range(flat_a.size):
            flat_o[i] = self.mul(int(flat_a[i]), int(flat_b[i]))
        return out

    def inv_many(self, a) -> np.ndarray:
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        out = np.empty(a.shape, dtype=np.int64)
        flat_a, flat_o = a.ravel(), out.ravel()
        for i in range(flat_a.size):
            flat_o[i] = self.inv(int(flat_a[i]))
        return out


def cyclic(n: int) -> CyclicGroup:
    return CyclicGroup(n)


def direct_product(a: FinGroup, b: FinGroup, order_cap: int = 10_000_000) -> DirectProductGroup:
    if a.order * b.order > order_cap:
        raise CapacityError(f"product order {a.order * b.order} exceeds cap {order_cap}")
    return DirectProductGroup(a, b)


def sl2_mod(n: int, order_cap: int = 200_000) -> SL2Group:
    return SL2Group(n, order_cap=order_cap)


def group_from_perm_generators(gens: Sequence[Perm], cap: int = 100_000) -> PermGroup:
    """BFS closure of permutation generators; identity has index 0."""
    if not gens:
        raise ValueError("need at least one generator")
    m = gens[0].n
    for g in gens:
        if g.n != m:
            raise ValueError("generators act on different point counts")
    ident = np.arange(m, dtype=np.int64)
    rows = [ident]
    index = {ident.tobytes(): 0}
    gen_rows = [np.asarray(g.image, dtype=np.int64) for g in gens]
    frontier = [0]
    while frontier:
        nxt = []
        for ei in frontier:
            e = rows[ei]
            for gr in gen_rows:
                f = e[gr]  # e∘g
                key = f.tobytes()
                if key not in index:
                    if len(rows) >= cap:
                        raise CapacityError(f"perm closure exceeds cap {cap}")
                    index[key] = len(rows)
                    rows.append(f)
                    nxt.append(index[key])
        frontier = nxt
    rows_arr = np.stack(rows)
    gen_indices = [index[gr.tobytes()] for gr in gen_rows]
    return PermGroup(rows_arr, gen_indices, name=f"perm-closure({len(gens)} gens)")


# ---------------------------------------------------------------------------
# Homomorphisms, marked groups, actions
# ---------------------------------------------------------------------------


@dataclass
class GroupHom:
    """Element-wise homomorphism between enumerated groups."""

    source: FinGroup
    target: FinGroup
    image: np.ndarray
    surjective: bool = False

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.int64)
        if self.image.shape != (self.source.order,):
            raise ValueError("image array has wrong length")
        self.surjective = len(set(self.image.tolist())) == self.target.order

    def __call__(self, g: int) -> int:
        return int(self.image[g])

    def verify(self, pair_cap: int = 10_000, rng: Optional[np.random.Generator] = None):
        """Check multiplicativity: exhaustive up to pair_cap pairs, sampled above."""
        n = self.source.order
        if n * n <= pair_cap:
            xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
            xs, ys = xs.ravel(), ys.ravel()
        else:
            rng = rng or np.random.default_rng(0)
            xs = rng.integers(0, n, size=pair_cap)
            ys = rng.integers(0, n, size=pair_cap)
        lhs = self.image[self.source.mul_many(xs, ys)]
        rhs = self.target.mul_many(self.image[xs], self.image[ys])
        if not np.array_equal(lhs, rhs):
            bad = int(np.nonzero(lhs != rhs)[0][0])
            raise NotAHomomorphismError(
                f"map is not multiplicative at pair ({xs[bad]},{ys[bad]})"
            )


@dataclass(frozen=True)
class MarkedGroup:
    """A finite presentation: k generators and relator words (letters ±1..±k)."""

    generator_count: int
    relators: Tuple[Tuple[int, ...], ...]
    name: str = "marked"

    def __post_init__(self):
        for rel in self.relators:
            for letter in rel:
                if letter == 0 or abs(letter) > self.generator_count:
                    raise ValueError(f"relator letter {letter} out of range")

    @staticmethod
    def free(k: int, name: Optional[str] = None) -> "MarkedGroup":
        return MarkedGroup(k, (), name or f"F{k}")

    @staticmethod
    def free_abelian(d: int, name: Optional[str] = None) -> "MarkedGroup":
        rels = tuple(
            (i, j, -i, -j)
            for i in range(1, d + 1)
            for j in range(i + 1, d + 1)
        )
        return MarkedGroup(d, rels, name or f"Z^{d}")

    def to_json(self) -> dict:
        return {
            "generator_count": self.generator_count,
            "relators": [list(r) for r in self.relators],
            "name": self.name,
        }


def product_with_free_z(gamma: MarkedGroup, lam: MarkedGroup) -> MarkedGroup:
    """Presentation of (Γ*Z) x Λ with generators (Γ-gens, t, Λ-gens)."""
    k, m = gamma.generator_count, lam.generator_count
    t = k + 1
    shift = k + 1
    rels: List[Tuple[int, ...]] = [tuple(r) for r in gamma.relators]
    for r in lam.relators:
        rels.append(tuple(l + shift if l > 0 else l - shift for l in r))
    for i in range(1, k + 1):  # Γ-gens commute with Λ-gens
        for j in range(1, m + 1):
            rels.append((i, shift + j, -i, -(shift + j)))
    for j in range(1, m + 1):  # t commutes with Λ-gens
        rels.append((t, shift + j, -t, -(shift + j)))
    return MarkedGroup(
        k + 1 + m, tuple(rels), name=f"({gamma.name}*Z)x{lam.name}"
    )


@dataclass
class MarkedHom:
    """Homomorphism from a marked (presented) group into a FinGroup."""

    marked: MarkedGroup
    target: FinGroup
    gen_images: List[int]
    surjective: bool = field(init=False)
    image_subgroup: List[int] = field(init=False)

    def __post_init__(self):
        if len(self.gen_images) != self.marked.generator_count:
            raise ValueError("wrong number of generator images")
        for rel in self.marked.relators:
            if self.evaluate(rel) != self.target.identity_index:
                raise NotAHomomorphismError(
                    f"relator {rel} not satisfied by generator images", relator=rel
                )
        seed = set(self.gen_images) | {self.target.inv(g) for g in self.gen_images}
        self.image_subgroup = sorted(self.target.closure(sorted(seed)))
        self.surjective = len(self.image_subgroup) == self.target.order

    def evaluate(self, word: Sequence[int]) -> int:
        x = self.target.identity_index
        for letter in word:
            g = self.gen_images[abs(letter) - 1]
            if letter < 0:
                g = self.target.inv(g)
            x = self.target.mul(x, g)
        return x

    def __call__(self, word: Sequence[int]) -> int:
        return self.evaluate(word)


@dataclass
class MarkedMap:
    """Generator -> Perm assignment for a presentation; need not satisfy relators."""

    marked: MarkedGroup
    images: List[Perm]

    def __post_init__(self):
        if len(self.images) != self.marked.generator_count:
            raise ValueError("one Perm per marked generator required")
        n = self.images[0].n
        if any(p.n != n for p in self.images):
            raise ValueError("generator images act on different point counts")
        self.points = n

    def evaluate(self, word: Sequence[int]) -> Perm:
        """Image of a word; letters apply right-to-left as functions."""
        out = identity(self.points)
        for letter in word:
            p = self.images[abs(letter) - 1]
            if letter < 0:
                p = inverse(p)
            out = compose(out, p)
        return out


def hom_from_generator_images(src, tgt: FinGroup, images: Sequence[int]):
    """Build a GroupHom (FinGroup source) or MarkedHom (MarkedGroup source).

    Raises NotAHomomorphismError when images violate a relator or the
    multiplication structure.
    """
    if isinstance(src, MarkedGroup):
        return MarkedHom(src, tgt, list(images))
    if not isinstance(src, FinGroup):
        raise TypeError("src must be a FinGroup or MarkedGroup")
    gens = src.generators
    if len(images) != len(gens):
        raise ValueError("one image per source generator required")
    # propagate images over a BFS spanning of the source
    img = np.full(src.order, -1, dtype=np.int64)
    img[src.identity_index] = tgt.identity_index
    gen_pairs = list(zip(gens, images)) + [
        (src.inv(g), tgt.inv(im)) for g, im in zip(gens, images)
    ]
    frontier = [src.identity_index]
    while frontier:
        nxt = []
        for x in frontier:
            for g, im in gen_pairs:
                y = src.mul(x, g)
                v = tgt.mul(int(img[x]), im)
                if img[y] == -1:
                    img[y] = v
                    nxt.append(y)
                elif img[y] != v:
                    raise NotAHomomorphismError(
                        "generator images are inconsistent on the source group"
                    )
        frontier = nxt
    if (img == -1).any():
        raise NotAHomomorphismError("generators do not generate the source group")
    hom = GroupHom(src, tgt, img)
    hom.verify()
    return hom


@dataclass
class PermAction:
    """An action of a FinGroup given by one Perm per element index."""

    group: FinGroup
    perms: List[Perm]

    def __post_init__(self):
        if len(self.perms) != self.group.order:
            raise NotAnActionError("need one permutation per group element")
        self.points = self.perms[0].n
        for p in self.perms:
            if p.n != self.points:
                raise NotAnActionError("permutations act on different point counts")

    def perm(self, g: int) -> Perm:
        return self.perms[g]

    def verify(self, pair_cap: int = 4096, rng: Optional[np.random.Generator] = None):
        n = self.group.order
        if not self.perms[self.group.identity_index].is_identity():
            raise NotAnActionError("identity element does not act trivially")
        pairs: List[Tuple[int, int]]
        if n * n <= pair_cap:
            pairs = [(a, b) for a in range(n) for b in range(n)]
        else:
            rng = rng or np.random.default_rng(0)
            pairs = [
                (int(a), int(b))
                for a, b in zip(
                    rng.integers(0, n, pair_cap), rng.integers(0, n, pair_cap)
                )
            ]
        for a, b in pairs:
            if compose(self.perms[a], self.perms[b]) != self.perms[self.group.mul(a, b)]:
                raise NotAnActionError(f"action fails at pair ({a},{b})")


def left_regular(G: FinGroup) -> PermAction:
    """α(g)x = g x on the group itself."""
    return PermAction(G, [G.left_perm(g) for g in G.elements()])


def right_regular(G: FinGroup) -> PermAction:
    """β(g)x = x g^{-1} on the group itself (a genuine left action)."""
    return PermAction(G, [G.right_perm(G.inv(g)) for g in G.elements()])


def action_from_generator_images(
    G: FinGroup, images: Dict[int, Perm], verify: bool = True
) -> PermAction:
    """Extend generator -> Perm images to all of G along a BFS spanning."""
    perms: List[Optional[Perm]] = [None] * G.order
    pts = next(iter(images.values())).n
    perms[G.identity_index] = identity(pts)
    pairs = [(g, p) for g, p in images.items()] + [
        (G.inv(g), inverse(p)) for g, p in images.items()
    ]
    frontier = [G.identity_index]
    while frontier:
        nxt = []
        for x in frontier:
            for g, p in pairs:
                y = G.mul(x, g)
                if perms[y] is None:
                    perms[y] = compose(perms[x], p)
                    nxt.append(y)
        frontier = nxt
    if any(p is None for p in perms):
        raise NotAnActionError("generator images do not span the group")
    action = PermAction(G, perms)  # type: ignore[arg-type]
    if verify:
        action.verify()
    return action


def left_coset_reps(G: FinGroup, H: Sequence[int]) -> List[int]:
    """Smallest-index representative of each left coset gH."""
    members = sorted(set(int(h) for h in H))
    if not G.is_subgroup(members):
        raise NotASubgroupError("H is not a subgroup")
    idx = np.arange(G.order)
    m = None
    for h in members:
        col = G.mul_many(idx, np.int64(h))
        m = col if m is None else np.minimum(m, col)
    reps = np.unique(m)
    return [int(r) for r in reps]


# ---------------------------------------------------------------------------
# Orbit-type census
# ---------------------------------------------------------------------------


def _orbits(action: PermAction) -> List[List[int]]:
    """Orbits under the generated group, each sorted, ordered by min point."""
    pts = action.points
    seen = np.zeros(pts, dtype=bool)
    gens = [action.perms[g] for g in action.group.generators] or [
        action.perms[action.group.identity_index]
    ]
    gens = gens + [inverse(p) for p in gens]
    orbits = []
    for x in range(pts):
        if seen[x]:
            continue
        orbit = [x]
        seen[x] = True
        queue = [x]
        while queue:
            y = queue.pop()
            for p in gens:
                z = p(y)
                if not seen[z]:
                    seen[z] = True
                    orbit.append(z)
                    queue.append(z)
        orbits.append(sorted(orbit))
    return orbits


def _stabilizer(action: PermAction, point: int) -> Tuple[int, ...]:
    return tuple(
        g for g in action.group.elements() if action.perms[g](point) == point
    )


def canonical_subgroup_key(G: FinGroup, H: Sequence[int], order_cap: int = 4096) -> Tuple[int, ...]:
    """Lexicographically-smallest conjugate of H, as a sorted index tuple."""
    if G.order > order_cap:
        raise CapacityError(
            f"subgroup conjugacy testing limited to order {order_cap}"
        )
    h_arr = np.asarray(sorted(set(int(x) for x in H)), dtype=np.int64)
    best: Optional[Tuple[int, ...]] = None
    for c in G.elements():
        conj = G.mul_many(G.mul_many(np.int64(c), h_arr), np.int64(G.inv(c)))
        key = tuple(sorted(int(v) for v in conj))
        if best is None or key < best:
            best = key
    assert best is not None
    return best


def orbit_type_census(
    action: PermAction, verify: bool = True, order_cap: int = 4096
) -> Dict[Tuple[int, ...], int]:
    """Count orbits by the conjugacy class of their point stabilizers."""
    if verify:
        action.verify()
    census: Dict[Tuple[int, ...], int] = {}
    for orbit in _orbits(action):
        stab = _stabilizer(action, orbit[0])
        key = canonical_subgroup_key(action.group, stab, order_cap=order_cap)
        census[key] = census.get(key, 0) + 1
    return census
