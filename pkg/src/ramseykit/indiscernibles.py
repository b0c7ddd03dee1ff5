"""Index-structured families over a finite universe.

A family assigns a fixed-width tuple of universe elements to every index
element.  Indiscernibility means the universe makes no more distinctions
on image tuples than the index structure makes on index tuples.  All
verdicts here are finite-scale surrogates and are tagged with the tuple
length bound they were checked at.

Tuple equivalence in the universe comes in two modes: ``orbit`` (some
automorphism carries one tuple to the other pointwise, which on a finite
structure coincides with full elementary equivalence) and ``qf``
(quantifier-free type equality).  Because every structure here carries its
domain order, order-respecting automorphisms are trivial; pass
``include_order=False`` to treat the order as an encoding artifact and
work over the declared relations only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

from .structures import (
    FinStructure,
    ORDER_SYMBOL,
    qftp,
    reduct,
    same_qftp,
)

EQUIV_SYMBOL = "E"

# An atomic or negated-atomic fact over tuple positions: for relation
# symbols ("R", positions, polarity); the symbols "=" and "<" describe the
# equality and order pattern of position pairs.
DiagramFact = tuple[str, tuple[int, ...], bool]


@dataclass(frozen=True)
class IndexedFamily:
    """One width-d tuple of universe elements per index element."""

    index: FinStructure
    universe: FinStructure
    width: int
    tuples: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError("width must be >= 1")
        if len(self.tuples) != self.index.size:
            raise ValueError("need exactly one tuple per index element")
        for t in self.tuples:
            if len(t) != self.width:
                raise ValueError(f"tuple {t} does not have width {self.width}")
            for x in t:
                if not 0 <= x < self.universe.size:
                    raise ValueError(f"universe index {x} out of range")

    def image(self, index_tuple: tuple[int, ...]) -> tuple[int, ...]:
        """Concatenated image of an index tuple."""
        out: list[int] = []
        for i in index_tuple:
            out.extend(self.tuples[i])
        return tuple(out)


def find_automorphism(
    u: FinStructure,
    pinned: Mapping[int, int],
    include_order: bool = True,
) -> tuple[int, ...] | None:
    """First automorphism of ``u`` extending ``pinned``, or None.

    With ``include_order`` the order must be preserved, which forces the
    identity on a finite linear order; without it only the declared
    relations constrain the search.
    """
    for k, v in pinned.items():
        if not (0 <= k < u.size and 0 <= v < u.size):
            raise ValueError("pinned entries out of range")
    if include_order:
        ident = tuple(range(u.size))
        if all(pinned[k] == k for k in pinned):
            return ident
        return None

    images = [-1] * u.size
    used = [False] * u.size

    def consistent(j: int) -> bool:
        assigned = [x for x in range(j + 1)]
        for name, arity in u.sig.symbols:
            for tup in itertools.product(assigned, repeat=arity):
                if j not in tup:
                    continue
                mapped = tuple(images[x] for x in tup)
                if u.holds(name, tup) != u.holds(name, mapped):
                    return False
        return True

    def recurse(j: int) -> bool:
        if j == u.size:
            return True
        candidates = [pinned[j]] if j in pinned else list(range(u.size))
        for v in candidates:
            if used[v]:
                continue
            images[j] = v
            used[v] = True
            if consistent(j) and recurse(j + 1):
                return True
            used[v] = False
            images[j] = -1
        return False

    return tuple(images) if recurse(0) else None


def _equality_pattern(t: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(t.index(x) for x in t)


def _qf_equal(
    u: FinStructure, t1: tuple[int, ...], t2: tuple[int, ...], include_order: bool
) -> bool:
    if include_order:
        return same_qftp(u, t1, t2)
    # Without the order only the relation facts and the equality pattern
    # distinguish tuples; TupleType.facts never mentions "<".
    return qftp(u, t1).facts == qftp(u, t2).facts and _equality_pattern(
        t1
    ) == _equality_pattern(t2)


def tuple_equivalent(
    u: FinStructure,
    t1: tuple[int, ...],
    t2: tuple[int, ...],
    mode: str = "orbit",
    include_order: bool = True,
) -> bool:
    """Whether the universe cannot tell ``t1`` from ``t2``."""
    if len(t1) != len(t2):
        raise ValueError("tuples must have equal length")
    if mode == "qf":
        return _qf_equal(u, t1, t2, include_order)
    if mode != "orbit":
        raise ValueError(f"unknown mode {mode!r}")
    pinned: dict[int, int] = {}
    for x, y in zip(t1, t2):
        if x in pinned and pinned[x] != y:
            return False
        pinned[x] = y
    if len(set(pinned.values())) != len(pinned):
        return False
    return find_automorphism(u, pinned, include_order) is not None


def _index_tuples(n: int, arity_bound: int) -> Iterator[tuple[int, ...]]:
    for length in range(1, arity_bound + 1):
        yield from itertools.product(range(n), repeat=length)


def is_indexed_indiscernible(
    fam: IndexedFamily,
    arity_bound: int,
    mode: str = "qf",
    include_order: bool = True,
) -> tuple[bool, tuple | None]:
    """Exhaustive over index tuples up to the bound: type-equal index
    tuples must have equivalent images.  Returns (ok, first (i, j) pair of
    index tuples violating it)."""
    if arity_bound < 1:
        raise ValueError("arity_bound must be >= 1")
    reps: dict = {}
    for t in _index_tuples(fam.index.size, arity_bound):
        ty = qftp(fam.index, t)
        if ty in reps:
            rep = reps[ty]
            if not tuple_equivalent(
                fam.universe, fam.image(rep), fam.image(t), mode, include_order
            ):
                return False, (rep, t)
        else:
            reps[ty] = t
    return True, None


def _atomic_diagram(u: FinStructure, tup: tuple[int, ...]) -> frozenset[DiagramFact]:
    m = len(tup)
    facts: set[DiagramFact] = set()
    for name, arity in u.sig.symbols:
        for pos in itertools.product(range(m), repeat=arity):
            held = u.holds(name, tuple(tup[p] for p in pos))
            facts.add((name, pos, held))
    for p, q in itertools.product(range(m), repeat=2):
        facts.add(("=", (p, q), tup[p] == tup[q]))
        facts.add((ORDER_SYMBOL, (p, q), tup[p] < tup[q]))
    return frozenset(facts)


@dataclass
class EMRuleTable:
    """For each realized index type, the facts every realization's image
    satisfies.

    Entries are keyed by complete quantifier-free index types; the fact
    set is exactly the intersection of the image atomic diagrams over all
    realizations, so enlarging the family can only shrink it.
    """

    width: int
    arity_bound: int
    entries: dict

    def __len__(self) -> int:
        return len(self.entries)


def extract_em_rules(fam: IndexedFamily, arity_bound: int) -> EMRuleTable:
    entries: dict = {}
    for t in _index_tuples(fam.index.size, arity_bound):
        ty = qftp(fam.index, t)
        diagram = _atomic_diagram(fam.universe, fam.image(t))
        if ty in entries:
            entries[ty] &= diagram
        else:
            entries[ty] = diagram
    return EMRuleTable(fam.width, arity_bound, entries)


def locally_based_check(
    based: IndexedFamily,
    source: IndexedFamily,
    arity_bound: int,
) -> tuple[bool, tuple | None]:
    """Whether every rule extracted from ``source`` is honored by every
    realizing image of ``based``.

    Both families must share index, universe and width.  Returns (ok,
    first violated (index type, fact) pair).
    """
    if based.index != source.index:
        raise ValueError("families must share the index structure")
    if based.universe != source.universe:
        raise ValueError("families must share the universe")
    if based.width != source.width:
        raise ValueError("families must share the width")
    rules = extract_em_rules(source, arity_bound)
    for t in _index_tuples(based.index.size, arity_bound):
        ty = qftp(based.index, t)
        rule = rules.entries.get(ty)
        if rule is None:
            continue
        diagram = _atomic_diagram(based.universe, based.image(t))
        missing = rule - diagram
        if missing:
            return False, (ty, sorted(missing)[0])
    return True, None


@dataclass
class ReductGapResult:
    """Outcome of the reduct-indiscernibility gap probe."""

    status: str  # gap_found | no_gap | not_base_indiscernible
    pair: tuple | None = None
    base_counterexample: tuple | None = None

    @property
    def gap(self) -> bool:
        return self.status == "gap_found"


def reduct_gap(
    fam: IndexedFamily,
    arity_bound: int,
    mode: str = "qf",
) -> ReductGapResult:
    """Probe a family indexed by a product-with-blocks structure.

    First verifies the family is indiscernible over the full index
    signature; if not, reports ``not_base_indiscernible``.  Then checks
    indiscernibility over the blocks-and-order reduct of the index and
    returns the first pair of reduct-equivalent index tuples whose images
    the universe distinguishes.  Such a pair is necessarily inequivalent
    over the full index signature.
    """
    if not fam.index.sig.has(EQUIV_SYMBOL):
        raise ValueError("index structure has no block relation E")
    ok, ce = is_indexed_indiscernible(fam, arity_bound, mode)
    if not ok:
        return ReductGapResult("not_base_indiscernible", base_counterexample=ce)
    o_index = reduct(fam.index, {EQUIV_SYMBOL})
    o_fam = IndexedFamily(o_index, fam.universe, fam.width, fam.tuples)
    ok, ce = is_indexed_indiscernible(o_fam, arity_bound, mode)
    if ok:
        return ReductGapResult("no_gap")
    return ReductGapResult("gap_found", pair=ce)


# ---------------------------------------------------------------------------
# Family JSON: {"width": d, "map": {"0": [..], "1": [..], ...}}
# ---------------------------------------------------------------------------


def family_to_json(fam: IndexedFamily) -> dict:
    return {
        "width": fam.width,
        "map": {str(i): list(t) for i, t in enumerate(fam.tuples)},
    }


def family_from_json(
    data: Mapping, index: FinStructure, universe: FinStructure
) -> IndexedFamily:
    try:
        width = int(data["width"])
        raw = data["map"]
        tuples = tuple(
            tuple(int(x) for x in raw[str(i)]) for i in range(index.size)
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed family JSON: {exc}") from exc
    return IndexedFamily(index, universe, width, tuples)
