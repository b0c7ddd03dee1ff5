"""Canonical families of finite ordered structures.

Chains, ordered graphs, convexly ordered equivalence relations, and finite
tree fragments with their reducts.  All generators are deterministic given
their parameters (and seed), and every structure they produce follows the
domain-order normalization of :mod:`ramseykit.structures`.
"""

from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .search import CapExceeded
from .structures import FinStructure, Signature, induced_substructure

EDGE_SYMBOL = "R"
EQUIV_SYMBOL = "E"

# Tree fragment variants and the symbols each keeps.  "ext" is the sequence
# extension order, "meet" the ternary longest-common-prefix relation,
# "lenlt" the strict length preorder, and "levN" the membership in level N.
TREE_VARIANTS = ("i0", "it", "istr", "itr")

AGE_KINDS = (
    "chains",
    "ordered_graphs",
    "conv_equiv",
    "tree_i0",
    "tree_it",
    "tree_istr",
    "tree_itr",
    "explicit",
)

_AGE_SUBSET_CAP = 2_000_000


@dataclass(frozen=True)
class AgeSpec:
    """A finitely generated class of structures, truncated at ``size_bound``."""

    kind: str
    size_bound: int
    explicit: tuple[FinStructure, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind not in AGE_KINDS:
            raise ValueError(f"unknown age kind {self.kind!r}")
        if self.size_bound < 1:
            raise ValueError("size_bound must be >= 1")
        if self.kind == "explicit":
            for i, a in enumerate(self.explicit):
                for b in self.explicit[:i]:
                    if a.sig == b.sig and a.size == b.size and a.tables == b.tables:
                        raise ValueError("explicit members must be pairwise non-isomorphic")


def chain(n: int) -> FinStructure:
    """The pure linear order on ``n`` points."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return FinStructure.build(Signature(), n)


def equiv_from_blocks(sizes: Sequence[int]) -> FinStructure:
    """The convexly ordered equivalence relation with the given block sizes."""
    for s in sizes:
        if s < 1:
            raise ValueError("block sizes must be >= 1")
    n = sum(sizes)
    pairs = []
    start = 0
    for s in sizes:
        block = range(start, start + s)
        pairs.extend(itertools.product(block, repeat=2))
        start += s
    sig = Signature(((EQUIV_SYMBOL, 2),))
    return FinStructure.build(sig, n, {EQUIV_SYMBOL: pairs})


def conv_equiv(classes: int, class_size: int) -> FinStructure:
    """``classes`` consecutive equivalence blocks of ``class_size`` points,
    ordered lexicographically by (block, position)."""
    if classes < 1 or class_size < 1:
        raise ValueError("classes and class_size must be >= 1")
    return equiv_from_blocks([class_size] * classes)


def _tree_sequences(height: int, branching: int) -> list[tuple[int, ...]]:
    seqs: list[tuple[int, ...]] = []
    for length in range(height + 1):
        seqs.extend(itertools.product(range(branching), repeat=length))
    # Tuple comparison is lexicographic with prefixes first, exactly the
    # lexicographic order on finite sequences.
    seqs.sort()
    return seqs


def _meet(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    i = 0
    for x, y in zip(a, b):
        if x != y:
            break
        i += 1
    return a[:i]


@functools.lru_cache(maxsize=6)
def tree_fragment(height: int, branching: int, variant: str) -> FinStructure:
    """The tree ``branching^(<=height)`` under lexicographic order.

    The domain is all sequences of length at most ``height`` over
    ``branching`` directions, sorted by the lexicographic order, which is
    the structure order.  Relational encoding:

    * ``ext(x, y)``: x is an initial segment of y (reflexive),
    * ``meet(x, y, z)``: the longest common prefix of x and y is z
      (the domain is closed under meets, so this is total on pairs),
    * ``lenlt(x, y)``: the sequence x is strictly shorter than y,
    * ``levN(x)``: the sequence x has length N.

    Variants keep: ``itr`` ext+meet+levels, ``istr`` ext+meet+lenlt,
    ``i0`` ext+meet, ``it`` ext only.
    """
    if height < 1 or branching < 1:
        raise ValueError("height and branching must be >= 1")
    if variant not in TREE_VARIANTS:
        raise ValueError(f"variant must be one of {TREE_VARIANTS}")
    seqs = _tree_sequences(height, branching)
    index = {s: i for i, s in enumerate(seqs)}
    n = len(seqs)

    ext = []
    for i, a in enumerate(seqs):
        for j, b in enumerate(seqs):
            if b[: len(a)] == a:
                ext.append((i, j))
    tables: dict[str, list] = {"ext": ext}
    symbols: list[tuple[str, int]] = [("ext", 2)]

    if variant in ("i0", "istr", "itr"):
        meet = []
        for i in range(n):
            a = seqs[i]
            meet.append((i, i, i))
            for j in range(i + 1, n):
                k = index[_meet(a, seqs[j])]
                meet.append((i, j, k))
                meet.append((j, i, k))
        tables["meet"] = meet
        symbols.append(("meet", 3))

    if variant == "istr":
        lenlt = [
            (i, j)
            for i, a in enumerate(seqs)
            for j, b in enumerate(seqs)
            if len(a) < len(b)
        ]
        tables["lenlt"] = lenlt
        symbols.append(("lenlt", 2))

    if variant == "itr":
        for lev in range(height + 1):
            name = f"lev{lev}"
            tables[name] = [(i,) for i, a in enumerate(seqs) if len(a) == lev]
            symbols.append((name, 1))

    return FinStructure.build(Signature(tuple(symbols)), n, tables)


def tree_sequence_index(height: int, branching: int) -> dict[tuple[int, ...], int]:
    """Map each sequence of ``branching^(<=height)`` to its domain index."""
    return {s: i for i, s in enumerate(_tree_sequences(height, branching))}


def ordered_graphs_upto(n: int, symbol: str = EDGE_SYMBOL) -> list[FinStructure]:
    """All ordered graphs on at most ``n`` vertices, one per isomorphism
    class.

    Vertices are ordered, so labeled enumeration over edge subsets of
    increasing pairs is already canonical.  Deterministic order: by size,
    then by the edge subset read as a binary counter.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    sig = Signature(((symbol, 2),))
    out = []
    for size in range(n + 1):
        pairs = list(itertools.combinations(range(size), 2))
        for mask in range(1 << len(pairs)):
            edges = []
            for b, (i, j) in enumerate(pairs):
                if mask >> b & 1:
                    edges.extend([(i, j), (j, i)])
            out.append(FinStructure.build(sig, size, {symbol: edges}))
    return out


def random_ordered_graph(n: int, seed: int, symbol: str = EDGE_SYMBOL) -> FinStructure:
    """An ordered graph where each increasing pair is an edge with
    probability 1/2.

    Scheme (stable, documented): a ``random.Random(seed)`` Mersenne Twister
    draws ``getrandbits(1)`` for each pair ``(i, j)``, ``i < j``, in
    lexicographic order; 1 means edge.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = random.Random(seed)
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.getrandbits(1):
            edges.extend([(i, j), (j, i)])
    return FinStructure.build(Signature(((symbol, 2),)), n, {symbol: edges})


def extension_property_check(g: FinStructure, k: int, symbol: str = EDGE_SYMBOL) -> bool:
    """Audit how closely ``g`` resembles the generic ordered graph.

    True iff for every pair of disjoint vertex sets U, V with
    ``1 <= |U| + |V| <= k`` there is a vertex outside both adjacent to all
    of U and none of V.  Advisory only: no finite graph has the full
    property.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    adj = {v: set() for v in range(g.size)}
    for a, b in g.tables[symbol]:
        adj[a].add(b)
    verts = range(g.size)
    for t in range(1, k + 1):
        for support in itertools.combinations(verts, t):
            for u_size in range(t + 1):
                for u_set in itertools.combinations(support, u_size):
                    v_set = [x for x in support if x not in u_set]
                    witness = any(
                        w not in support
                        and all(a in adj[w] for a in u_set)
                        and not any(b in adj[w] for b in v_set)
                        for w in verts
                    )
                    if not witness:
                        return False
    return True


def _compositions(total: int) -> Iterator[tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            yield (first,) + rest


def _dedupe(structures: Iterator[FinStructure]) -> list[FinStructure]:
    seen: set[FinStructure] = set()
    out = []
    for s in structures:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def _tree_age(variant: str, bound: int) -> list[FinStructure]:
    host = tree_fragment(bound, bound, variant)
    meet_closed = variant != "it"
    seqs = _tree_sequences(bound, bound)
    index = {s: i for i, s in enumerate(seqs)}

    found: list[tuple[int, ...]] = [()]
    budget = [_AGE_SUBSET_CAP]

    def extend(current: tuple[int, ...]) -> None:
        start = current[-1] + 1 if current else 0
        for nxt in range(start, host.size):
            budget[0] -= 1
            if budget[0] < 0:
                raise CapExceeded(
                    "tree age enumeration exceeded the subset cap; "
                    f"lower size_bound (cap={_AGE_SUBSET_CAP})",
                    nodes=_AGE_SUBSET_CAP,
                )
            if meet_closed:
                # Meets are lexicographically below both arguments, so a
                # missing meet can never be supplied by a later element.
                ok = all(
                    index[_meet(seqs[x], seqs[nxt])] in current
                    or index[_meet(seqs[x], seqs[nxt])] in (x, nxt)
                    for x in current
                )
                if not ok:
                    continue
            candidate = current + (nxt,)
            found.append(candidate)
            if len(candidate) < bound:
                extend(candidate)

    extend(())
    members = (induced_substructure(host, sub)[0] for sub in found)
    out = _dedupe(members)
    out.sort(key=lambda s: s.size)
    return out


def age_generate(spec: AgeSpec) -> list[FinStructure]:
    """All members of the age up to isomorphism with size <= size_bound.

    For the tree kinds the members are substructures of the host fragment
    ``tree_fragment(size_bound, size_bound, variant)``: meet-closed subsets
    when the meet relation is present, arbitrary subsets for the it
    variant.  Output order: size ascending, then first occurrence in the
    deterministic enumeration.
    """
    bound = spec.size_bound
    if spec.kind == "chains":
        return [chain(s) for s in range(bound + 1)]
    if spec.kind == "ordered_graphs":
        return ordered_graphs_upto(bound)
    if spec.kind == "conv_equiv":
        out = []
        for s in range(bound + 1):
            for parts in _compositions(s):
                if parts:
                    out.append(equiv_from_blocks(parts))
                else:
                    out.append(FinStructure.build(Signature(((EQUIV_SYMBOL, 2),)), 0))
        return out
    if spec.kind.startswith("tree_"):
        return _tree_age(spec.kind.removeprefix("tree_"), bound)
    if spec.kind == "explicit":
        return [s for s in spec.explicit if s.size <= bound]
    raise AssertionError(spec.kind)
