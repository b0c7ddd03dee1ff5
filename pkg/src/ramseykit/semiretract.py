"""Quantifier-free-type-preserving maps and semi-retraction witnesses.

A pair of injections g: A -> B, f: B -> A is a semi-retraction witness
when both preserve quantifier-free types and the composite f.g fixes the
complete type of every tuple of A.  On finite fragments every satisfied
quantifier-free type is implied by the complete one, so fixing complete
types up to a tuple-length bound is the checkable surrogate; every verdict
is explicitly bounded and never an infinite claim.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .generators import conv_equiv, tree_fragment, tree_sequence_index
from .search import DEFAULT_NODE_CAP, CapExceeded, SearchStats
from .structures import (
    FinStructure,
    StructureMap,
    are_isomorphic,
    induced_substructure,
    qftp,
)


def _tuples_up_to(size: int, bound: int) -> Iterator[tuple[int, ...]]:
    for length in range(1, bound + 1):
        yield from itertools.product(range(size), repeat=length)


def is_qftp_preserving(
    h: StructureMap, arity_bound: int
) -> tuple[bool, tuple | None]:
    """Exhaustive check that type-equal source tuples (repeats allowed, all
    lengths up to the bound) have type-equal images.

    Returns (ok, first violating tuple pair).  Failure at a bound persists
    at every larger bound.
    """
    if arity_bound < 1:
        raise ValueError("arity_bound must be >= 1")
    reps: dict = {}
    for t in _tuples_up_to(h.source.size, arity_bound):
        source_type = qftp(h.source, t)
        image_type = qftp(h.target, h.apply(t))
        if source_type in reps:
            rep_tuple, rep_image_type = reps[source_type]
            if rep_image_type != image_type:
                return False, (rep_tuple, t)
        else:
            reps[source_type] = (t, image_type)
    return True, None


@dataclass
class SemiRetractionWitness:
    """A candidate witness pair; ``f`` may be absent (g-only witness)."""

    a: FinStructure
    b: FinStructure
    g: StructureMap
    f: StructureMap | None
    arity_bound: int
    g_increasing: bool = False


@dataclass
class SemiRetractReport:
    """Verdicts only claim what was exhaustively checked up to the bound."""

    arity_bound: int
    g_qftp_preserving: bool
    g_counterexample: tuple | None
    f_qftp_preserving: bool | None = None
    f_counterexample: tuple | None = None
    types_fixed: bool | None = None
    types_counterexample: tuple | None = None
    image_isomorphic_to_source: bool | None = None

    @property
    def all_pass(self) -> bool:
        return bool(
            self.g_qftp_preserving
            and self.f_qftp_preserving
            and self.types_fixed
        )


def check_semiretraction(w: SemiRetractionWitness) -> SemiRetractReport:
    """Check the witness conditions up to ``w.arity_bound``:

    a. g preserves quantifier-free types,
    b. f preserves quantifier-free types,
    c. every tuple of A (length <= bound) has the same complete type as its
       f.g image.

    As a by-product, reports whether the f.g image induces a substructure
    isomorphic to A (meaningful when the bound reaches the size of A).
    """
    g_ok, g_ce = is_qftp_preserving(w.g, w.arity_bound)
    report = SemiRetractReport(w.arity_bound, g_ok, g_ce)
    if w.f is None:
        return report
    report.f_qftp_preserving, report.f_counterexample = is_qftp_preserving(
        w.f, w.arity_bound
    )

    composite = [w.f.images[w.g.images[i]] for i in range(w.a.size)]
    report.types_fixed = True
    for t in _tuples_up_to(w.a.size, w.arity_bound):
        image = tuple(composite[i] for i in t)
        if qftp(w.a, t) != qftp(w.a, image):
            report.types_fixed = False
            report.types_counterexample = (t, image)
            break

    image_sorted = tuple(sorted(composite))
    induced = induced_substructure(w.a, image_sorted)[0]
    report.image_isomorphic_to_source = are_isomorphic(induced, w.a)
    return report


def treecor_witness(
    classes: int,
    class_size: int,
    tree_height_slack: int = 0,
    arity_bound: int = 4,
) -> SemiRetractionWitness:
    """The explicit type-preserving map from a convexly ordered equivalence
    relation into a tree fragment with length comparison.

    Block ``i`` (0-indexed) is sent to the children ``<0,...,0>^(2i) + <j+1>``
    of the all-zeros spine: the j-th block element maps to the sequence of
    2i zeros followed by j+1.  The tree fragment has height
    ``2(classes-1) + 1 + slack`` and branching ``class_size + 1``, the
    smallest sizes that contain the image.  No return map f is fabricated;
    use :func:`search_retraction_map` to hunt for one on fragments.

    Note the map reverses the block order in the lexicographic order of the
    tree (deeper spines compare smaller), so it is recorded as
    non-increasing; preservation of types is what matters.
    """
    if classes < 1 or class_size < 1:
        raise ValueError("classes and class_size must be >= 1")
    if tree_height_slack < 0:
        raise ValueError("tree_height_slack must be >= 0")
    a = conv_equiv(classes, class_size)
    height = 2 * (classes - 1) + 1 + tree_height_slack
    branching = class_size + 1
    b = tree_fragment(height, branching, "istr")
    index = tree_sequence_index(height, branching)

    images = []
    for i in range(classes):
        spine = (0,) * (2 * i)
        for j in range(class_size):
            seq = spine + (j + 1,)
            if seq not in index:
                raise ValueError("fragment too small for the image")
            images.append(index[seq])
    g = StructureMap(a, b, tuple(images))
    increasing = all(
        g.images[i] < g.images[i + 1] for i in range(len(g.images) - 1)
    )
    flags = frozenset({"increasing"}) if increasing else frozenset()
    g = StructureMap(a, b, g.images, flags)
    return SemiRetractionWitness(a, b, g, None, arity_bound, increasing)


def search_retraction_map(
    a: FinStructure,
    b: FinStructure,
    g: StructureMap,
    arity_bound: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> StructureMap | None:
    """Backtracking search for an injective f: B -> A completing the
    witness, lexicographically first.

    Prunes on pair-level type preservation while assigning; a complete
    assignment must pass the full bounded check.  Returns None when no
    completion exists; raises CapExceeded when the node budget runs out.
    """
    if b.size > a.size:
        return None
    stats = SearchStats()
    images = [-1] * b.size
    used = [False] * a.size

    pair_types: dict = {}

    def pairs_ok(j: int) -> bool:
        for i in range(j + 1):
            for s, t in ((i, j), (j, i)):
                key = qftp(b, (s, t))
                image_type = qftp(a, (images[s], images[t]))
                if key in pair_types:
                    if pair_types[key][1] != image_type:
                        return False
                else:
                    pair_types[key] = ((s, t), image_type)
        return True

    def full_check(f: StructureMap) -> bool:
        w = SemiRetractionWitness(a, b, g, f, arity_bound)
        return check_semiretraction(w).all_pass

    def recurse(j: int) -> StructureMap | None:
        if j == b.size:
            f = StructureMap(b, a, tuple(images))
            return f if full_check(f) else None
        for v in range(a.size):
            if used[v]:
                continue
            stats.nodes += 1
            if stats.nodes > node_cap:
                raise CapExceeded(
                    f"node cap {node_cap} exceeded", nodes=stats.nodes
                )
            images[j] = v
            used[v] = True
            saved = dict(pair_types)
            if pairs_ok(j):
                found = recurse(j + 1)
                if found is not None:
                    return found
            pair_types.clear()
            pair_types.update(saved)
            used[v] = False
            images[j] = -1
        return None

    return recurse(0)
