"""Ordered unions and semi-direct products of finite ordered structures.

An ordered union concatenates fibers along a linear order and tags each
block with a fresh unary predicate.  A semi-direct product concatenates
fibers along the elements of a base structure, marks the blocks with a
fresh equivalence relation E, and lifts every base relation class-wise.
This module also provides class-property audits (HP, JEP, AP), the
block-wise amalgamation construction for products, and the sequence
version of the bad-coloring search.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import re

from .generators import AgeSpec, chain
from .ramsey import (
    RamseyCertificate,
    _members_of_size,
    _require_member,
    copies_inside,
)
from .search import (
    DEFAULT_NODE_CAP,
    CapExceeded,
    SearchStats,
    find_bad_assignment,
)
from .structures import (
    FinStructure,
    Signature,
    StructureMap,
    are_isomorphic,
    enumerate_copies,
    induced_substructure,
    is_embedding,
    qftp,
    reduct,
)

EQUIV_SYMBOL = "E"
BLOCK_PREFIX = "P"


@dataclass(frozen=True)
class ProductStructure:
    """A structure assembled from a base and one fiber per base element.

    ``result`` is the assembled structure on the concatenated domain;
    ``class_map`` sends each result element to its base index.  Blocks are
    consecutive and follow the base order.
    """

    result: FinStructure
    base: FinStructure
    fibers: tuple[FinStructure, ...]
    kind: str  # "union" | "semidirect"
    class_map: tuple[int, ...]
    l2_symbols: frozenset[str] = field(default_factory=frozenset)
    age_warning: str | None = None


def _concat_layout(fibers: Sequence[FinStructure]) -> tuple[int, list[int], list[int]]:
    offsets = []
    class_map = []
    total = 0
    for i, fib in enumerate(fibers):
        offsets.append(total)
        class_map.extend([i] * fib.size)
        total += fib.size
    return total, offsets, class_map


def _common_fiber_signature(fibers: Sequence[FinStructure]) -> Signature:
    if not fibers:
        return Signature()
    sig = fibers[0].sig
    for fib in fibers[1:]:
        if fib.sig != sig:
            raise ValueError("all fibers must share one signature")
    return sig


def _age_consistency_note(fibers: Sequence[FinStructure]) -> str | None:
    """Bounded check that the fibers could come from one age.

    Compares, for every pair of fibers, the substructures of each up to
    the smaller fiber's size.  Advisory: ages are infinite, a finite
    artifact can only bound-check, and a mismatch does not block
    construction.
    """
    sets = []
    for fib in fibers:
        subs = set()
        for size in range(fib.size + 1):
            for subset in itertools.combinations(range(fib.size), size):
                subs.add(induced_substructure(fib, subset)[0])
        sets.append(subs)
    for i, j in itertools.combinations(range(len(fibers)), 2):
        bound = min(fibers[i].size, fibers[j].size)
        left = {s for s in sets[i] if s.size <= bound}
        right = {s for s in sets[j] if s.size <= bound}
        if left != right:
            return f"fibers {i} and {j} disagree on substructures up to size {bound}"
    return None


def ordered_union(fibers: Sequence[FinStructure]) -> ProductStructure:
    """Concatenate the fibers and tag block ``i`` with predicate ``P{i}``."""
    fibers = tuple(fibers)
    fiber_sig = _common_fiber_signature(fibers)
    total, offsets, class_map = _concat_layout(fibers)

    symbols = list(fiber_sig.symbols)
    for i in range(len(fibers)):
        name = f"{BLOCK_PREFIX}{i}"
        if fiber_sig.has(name):
            raise ValueError(f"fiber signature already uses {name!r}")
        symbols.append((name, 1))

    tables: dict[str, list] = {name: [] for name, _ in symbols}
    for i, fib in enumerate(fibers):
        off = offsets[i]
        tables[f"{BLOCK_PREFIX}{i}"] = [(off + x,) for x in range(fib.size)]
        for name, _ in fiber_sig.symbols:
            tables[name].extend(
                tuple(off + x for x in tup) for tup in fib.tables[name]
            )

    result = FinStructure.build(Signature(tuple(symbols)), total, tables)
    return ProductStructure(
        result, chain(len(fibers)), fibers, "union", tuple(class_map)
    )


def semidirect_product(
    base: FinStructure, fibers: Sequence[FinStructure]
) -> ProductStructure:
    """Blocks follow the base order; E marks the blocks; every base
    relation holds on a result tuple exactly when it holds on the tuple of
    block indices (repeated indices included)."""
    fibers = tuple(fibers)
    if len(fibers) != base.size:
        raise ValueError(f"need {base.size} fibers, got {len(fibers)}")
    for i, fib in enumerate(fibers):
        if fib.size == 0:
            raise ValueError(f"fiber {i} is empty; its block would vanish")
    fiber_sig = _common_fiber_signature(fibers) if fibers else Signature()
    l1_names = {n for n, _ in fiber_sig.symbols}
    l2_names = {n for n, _ in base.sig.symbols}
    if l1_names & l2_names:
        raise ValueError(
            f"base and fiber symbols must be disjoint: {sorted(l1_names & l2_names)}"
        )
    if EQUIV_SYMBOL in l1_names | l2_names:
        raise ValueError(f"{EQUIV_SYMBOL!r} is reserved for the block relation")

    total, offsets, class_map = _concat_layout(fibers)
    symbols = list(fiber_sig.symbols) + list(base.sig.symbols) + [(EQUIV_SYMBOL, 2)]
    tables: dict[str, list] = {name: [] for name, _ in symbols}

    for i, fib in enumerate(fibers):
        off = offsets[i]
        for name, _ in fiber_sig.symbols:
            tables[name].extend(
                tuple(off + x for x in tup) for tup in fib.tables[name]
            )

    tables[EQUIV_SYMBOL] = [
        (a, b) for a in range(total) for b in range(total)
        if class_map[a] == class_map[b]
    ]

    for name, arity in base.sig.symbols:
        tbl = base.tables[name]
        tables[name] = [
            tup
            for tup in itertools.product(range(total), repeat=arity)
            if tuple(class_map[x] for x in tup) in tbl
        ]

    result = FinStructure.build(Signature(tuple(symbols)), total, tables)
    note = _age_consistency_note(fibers)
    if note is not None:
        warnings.warn(f"semidirect_product: {note}", stacklevel=2)
    return ProductStructure(
        result,
        base,
        fibers,
        "semidirect",
        tuple(class_map),
        l2_symbols=frozenset(l2_names),
        age_warning=note,
    )


def gr_classes(p: ProductStructure, elems: Iterable[int]) -> tuple[int, ...]:
    """The sorted base indices met by ``elems``."""
    return tuple(sorted({p.class_map[x] for x in elems}))


def gr(p: ProductStructure, elems: Iterable[int]) -> FinStructure:
    """The base substructure induced on the classes met by ``elems``."""
    return induced_substructure(p.base, gr_classes(p, elems))[0]


def fiber_symbol_names(p: ProductStructure) -> set[str]:
    if not p.fibers:
        return set()
    return {n for n, _ in p.fibers[0].sig.symbols}


def red_keep_symbols(p: ProductStructure) -> set[str]:
    keep = fiber_symbol_names(p)
    if p.kind == "semidirect":
        keep.add(EQUIV_SYMBOL)
    else:
        keep.update(f"{BLOCK_PREFIX}{i}" for i in range(len(p.fibers)))
    return keep


def red(p: ProductStructure, elems: Iterable[int]) -> FinStructure:
    """The induced substructure on ``elems`` reduced to the fiber symbols
    plus the block data (E, or the block predicates for unions)."""
    subset = tuple(sorted(set(elems)))
    sub, _ = induced_substructure(p.result, subset)
    return reduct(sub, red_keep_symbols(p))


@dataclass
class PropRedReport:
    """Both block-projection biconditionals evaluated on one tuple pair."""

    status: str  # ok | hypothesis_violated | violation
    hypothesis_ok: bool
    same_blocks: bool | None = None
    same_union_type: bool | None = None
    iso_blocks: bool | None = None
    same_product_type: bool | None = None

    @property
    def holds(self) -> bool:
        return self.status == "ok"


def check_prop_red(
    p: ProductStructure, a: tuple[int, ...], b: tuple[int, ...]
) -> PropRedReport:
    """Check, for a pair of tuples with the same type in the E-reduct:

    i.  equal block sets  <=>  equal types in the ordered-union companion,
    ii. isomorphic block substructures  <=>  equal types in the product.

    Any violation indicates a construction bug, never a property of the
    inputs.
    """
    if p.kind != "semidirect":
        raise ValueError("check_prop_red expects a semidirect product")
    red_full = reduct(p.result, red_keep_symbols(p))
    if qftp(red_full, a) != qftp(red_full, b):
        return PropRedReport("hypothesis_violated", hypothesis_ok=False)

    union = ordered_union(p.fibers)
    same_blocks = gr_classes(p, a) == gr_classes(p, b)
    same_union_type = qftp(union.result, a) == qftp(union.result, b)
    iso_blocks = are_isomorphic(gr(p, a), gr(p, b))
    same_product_type = qftp(p.result, a) == qftp(p.result, b)

    ok = (same_blocks == same_union_type) and (iso_blocks == same_product_type)
    return PropRedReport(
        "ok" if ok else "violation",
        hypothesis_ok=True,
        same_blocks=same_blocks,
        same_union_type=same_union_type,
        iso_blocks=iso_blocks,
        same_product_type=same_product_type,
    )


# ---------------------------------------------------------------------------
# Class properties and amalgamation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AmalgamationProblem:
    """A common substructure with two extensions; the maps are embeddings."""

    a: FinStructure
    b1: FinStructure
    b2: FinStructure
    e1: StructureMap
    e2: StructureMap

    def __post_init__(self) -> None:
        if self.e1.source != self.a or self.e2.source != self.a:
            raise ValueError("e1 and e2 must start at a")
        if self.e1.target != self.b1 or self.e2.target != self.b2:
            raise ValueError("e1 must land in b1 and e2 in b2")
        if not is_embedding(self.e1) or not is_embedding(self.e2):
            raise ValueError("e1 and e2 must be embeddings")


@dataclass
class ClassPropertyReport:
    hp: str
    jep: str
    ap: str
    hp_counterexample: tuple | None = None
    jep_counterexample: tuple | None = None
    ap_counterexample: tuple | None = None
    problems_checked: int = 0

    @property
    def all_hold(self) -> bool:
        return all(v == "holds_up_to_bound" for v in (self.hp, self.jep, self.ap))


def _embeddings_into(small: FinStructure, big: FinStructure) -> list[StructureMap]:
    return [
        StructureMap(small, big, tup) for tup in enumerate_copies(big, small)
    ]


def check_class_properties(age: Sequence[FinStructure]) -> ClassPropertyReport:
    """Bounded audit of HP, JEP and AP over the given members.

    Joint-embedding instances are limited to ``|A| + |B| <= max size`` and
    amalgamation instances to ``|B1| + |B2| - |A| <= max size``: larger
    instances cannot have solutions inside the truncated class, so their
    failure would say nothing.  Verdicts are therefore "holds_up_to_bound"
    rather than absolute.
    """
    members = list(age)
    if not members:
        return ClassPropertyReport("holds_up_to_bound", "holds_up_to_bound", "holds_up_to_bound")
    max_size = max(m.size for m in members)

    def member_iso(s: FinStructure) -> bool:
        return any(
            m.sig == s.sig and are_isomorphic(m, s) for m in members
        )

    hp, hp_ce = "holds_up_to_bound", None
    for m in members:
        for size in range(m.size + 1):
            for subset in itertools.combinations(range(m.size), size):
                sub = induced_substructure(m, subset)[0]
                if not member_iso(sub):
                    hp, hp_ce = "fails", (m, subset)
                    break
            if hp == "fails":
                break
        if hp == "fails":
            break

    jep, jep_ce = "holds_up_to_bound", None
    for x, y in itertools.combinations_with_replacement(members, 2):
        if x.size + y.size > max_size:
            continue
        if not any(
            enumerate_copies(c, x) and enumerate_copies(c, y) for c in members
        ):
            jep, jep_ce = "fails", (x, y)
            break

    ap, ap_ce = "holds_up_to_bound", None
    problems = 0
    for a in members:
        for b1 in members:
            embs1 = _embeddings_into(a, b1)
            if not embs1:
                continue
            for b2 in members:
                if b1.size + b2.size - a.size > max_size:
                    continue
                embs2 = _embeddings_into(a, b2)
                if not embs2:
                    continue
                for e1 in embs1:
                    for e2 in embs2:
                        problems += 1
                        if not _ap_solvable(members, a, b1, b2, e1, e2):
                            ap, ap_ce = "fails", (a, b1, b2, e1.images, e2.images)
                            break
                    if ap == "fails":
                        break
                if ap == "fails":
                    break
            if ap == "fails":
                break
        if ap == "fails":
            break

    return ClassPropertyReport(hp, jep, ap, hp_ce, jep_ce, ap_ce, problems)


def _ap_solvable(members, a, b1, b2, e1, e2) -> bool:
    for c in members:
        for f1 in _embeddings_into(b1, c):
            img1 = f1.apply(e1.images)
            for f2 in _embeddings_into(b2, c):
                if f2.apply(e2.images) == img1:
                    return True
    return False


def ordered_free_amalgam(
    problem: AmalgamationProblem,
) -> tuple[FinStructure, StructureMap, StructureMap]:
    """Free amalgam of two ordered extensions over a shared part.

    The domain is b1 plus the non-shared part of b2.  The order is merged
    deterministically: elements sort by (number of shared elements strictly
    below, side, position), with the shared element of a bucket last, which
    extends both input orders.  No relations are added between the two
    non-shared sides.  Returns the amalgam and the two verified commuting
    embeddings.
    """
    a, b1, b2, e1, e2 = problem.a, problem.b1, problem.b2, problem.e1, problem.e2
    img1, img2 = e1.images, e2.images
    shared2 = {v: i for i, v in enumerate(img2)}

    def bucket(images: tuple[int, ...], x: int) -> int:
        return sum(1 for v in images if v < x)

    entries: list[tuple[tuple[int, int, int], str, int]] = []
    for x in range(b1.size):
        shared_rank = 2 if x in set(img1) else 0
        entries.append(((bucket(img1, x), shared_rank, x), "b1", x))
    for y in range(b2.size):
        if y in shared2:
            continue
        entries.append(((bucket(img2, y), 1, y), "b2", y))
    entries.sort(key=lambda e: e[0])

    pos1: dict[int, int] = {}
    pos2: dict[int, int] = {}
    for idx, (_, side, x) in enumerate(entries):
        if side == "b1":
            pos1[x] = idx
        else:
            pos2[x] = idx
    for a_idx in range(a.size):
        pos2[img2[a_idx]] = pos1[img1[a_idx]]

    sig = b1.sig
    if b2.sig != sig or a.sig != sig:
        raise ValueError("amalgamation requires one shared signature")
    tables: dict[str, set] = {name: set() for name, _ in sig.symbols}
    for name, _ in sig.symbols:
        for tup in b1.tables[name]:
            tables[name].add(tuple(pos1[x] for x in tup))
        for tup in b2.tables[name]:
            tables[name].add(tuple(pos2[y] for y in tup))

    c = FinStructure.build(sig, len(entries), tables)
    f1 = StructureMap(b1, c, tuple(pos1[x] for x in range(b1.size)))
    f2 = StructureMap(b2, c, tuple(pos2[y] for y in range(b2.size)))
    if not is_embedding(f1) or not is_embedding(f2):
        raise RuntimeError("internal error: free amalgam maps fail to embed")
    if f1.apply(e1.images) != f2.apply(e2.images):
        raise RuntimeError("internal error: free amalgam maps do not commute")
    return c, f1.with_flag("embedding"), f2.with_flag("embedding")


@dataclass
class ProductAmalgam:
    solution: ProductStructure
    f1: StructureMap
    f2: StructureMap
    base_solution: FinStructure


def _block_layout(s: FinStructure) -> tuple[list[tuple[int, ...]], list[int]]:
    """E-classes of ``s`` as consecutive blocks, plus element -> class."""
    if not s.sig.has(EQUIV_SYMBOL):
        raise ValueError("structure has no block relation E")
    table = s.tables[EQUIV_SYMBOL]
    classes: list[tuple[int, ...]] = []
    cls_of = [-1] * s.size
    for x in range(s.size):
        if cls_of[x] >= 0:
            continue
        block = tuple(y for y in range(s.size) if (x, y) in table)
        if x not in block:
            raise ValueError("E is not reflexive")
        if block != tuple(range(block[0], block[-1] + 1)):
            raise ValueError("E-classes must be convex")
        for y in block:
            if cls_of[y] >= 0:
                raise ValueError("E is not an equivalence relation")
            cls_of[y] = len(classes)
        classes.append(block)
    return classes, cls_of


def _split_product_substructure(
    s: FinStructure, l2_symbols: Iterable[str]
) -> tuple[FinStructure, list[FinStructure], list[tuple[int, ...]], list[int]]:
    """Recover base, fibers and layout from a product-like structure."""
    l2 = set(l2_symbols)
    l1 = {n for n, _ in s.sig.symbols} - l2 - {EQUIV_SYMBOL}
    classes, cls_of = _block_layout(s)

    base_tables: dict[str, set] = {}
    for name in sorted(l2):
        arity = s.sig.arity(name)
        tbl = set()
        for tup in itertools.product(range(len(classes)), repeat=arity):
            votes = {
                s.holds(name, reps)
                for reps in itertools.product(*(classes[t] for t in tup))
            }
            if len(votes) > 1:
                raise ValueError(
                    f"{name!r} is not class-constant on classes {tup}"
                )
            if votes.pop():
                tbl.add(tup)
        base_tables[name] = tbl
    base_sig = Signature(tuple((n, s.sig.arity(n)) for n in sorted(l2)))
    base = FinStructure.build(base_sig, len(classes), base_tables)

    fibers = []
    for block in classes:
        sub, _ = induced_substructure(s, block)
        fibers.append(reduct(sub, l1))
    return base, fibers, classes, cls_of


def amalgamate_product(
    problem: AmalgamationProblem,
    l2_symbols: Iterable[str],
) -> ProductAmalgam:
    """Solve a product amalgamation block-wise.

    The base problem (block substructures) is solved by the ordered free
    amalgam; then, class by class, the fiber problem is solved the same
    way (a joint embedding when the class misses the shared part), and the
    blocks are reassembled into a semi-direct product.  All four maps are
    verified to embed and commute before returning.
    """
    l2 = frozenset(l2_symbols)
    a, b1, b2 = problem.a, problem.b1, problem.b2
    base_a, fibs_a, _, cls_a = _split_product_substructure(a, l2)
    base_1, fibs_1, _, cls_1 = _split_product_substructure(b1, l2)
    base_2, fibs_2, _, cls_2 = _split_product_substructure(b2, l2)

    def class_embedding(
        e: StructureMap, src_base: FinStructure, dst_base: FinStructure,
        src_cls: list[int], dst_cls: list[int],
    ) -> StructureMap:
        images = [-1] * src_base.size
        for x in range(e.source.size):
            images[src_cls[x]] = dst_cls[e.images[x]]
        return StructureMap(src_base, dst_base, tuple(images))

    alpha1 = class_embedding(problem.e1, base_a, base_1, cls_a, cls_1)
    alpha2 = class_embedding(problem.e2, base_a, base_2, cls_a, cls_2)
    base_problem = AmalgamationProblem(base_a, base_1, base_2, alpha1, alpha2)
    base_c, beta1, beta2 = ordered_free_amalgam(base_problem)

    from_1 = {beta1.images[t]: t for t in range(base_1.size)}
    from_2 = {beta2.images[t]: t for t in range(base_2.size)}
    from_a = {alpha1.images[t]: t for t in range(base_a.size)}

    empty_fiber = None
    if fibs_1:
        empty_fiber = FinStructure.build(fibs_1[0].sig, 0)
    elif fibs_2:
        empty_fiber = FinStructure.build(fibs_2[0].sig, 0)

    fibers: list[FinStructure] = []
    fiber_maps_1: dict[int, StructureMap] = {}
    fiber_maps_2: dict[int, StructureMap] = {}
    for gamma in range(base_c.size):
        t1 = from_1.get(gamma)
        t2 = from_2.get(gamma)
        if t1 is not None and t2 is not None:
            ta = from_a.get(t1)
            if ta is None:
                # joint fiber embedding over the empty shared part
                fa = empty_fiber
                ea1 = StructureMap(fa, fibs_1[t1], ())
                ea2 = StructureMap(fa, fibs_2[t2], ())
            else:
                fa = fibs_a[ta]
                ea1 = _restrict_to_block(problem.e1, a, b1, cls_a, cls_1, ta, t1, fa, fibs_1[t1])
                ea2 = _restrict_to_block(problem.e2, a, b2, cls_a, cls_2, ta, t2, fa, fibs_2[t2])
            sub = AmalgamationProblem(fa, fibs_1[t1], fibs_2[t2], ea1, ea2)
            cfib, phi1, phi2 = ordered_free_amalgam(sub)
            fibers.append(cfib)
            fiber_maps_1[t1] = phi1
            fiber_maps_2[t2] = phi2
        elif t1 is not None:
            fibers.append(fibs_1[t1])
            fiber_maps_1[t1] = StructureMap(
                fibs_1[t1], fibs_1[t1], tuple(range(fibs_1[t1].size))
            )
        elif t2 is not None:
            fibers.append(fibs_2[t2])
            fiber_maps_2[t2] = StructureMap(
                fibs_2[t2], fibs_2[t2], tuple(range(fibs_2[t2].size))
            )
        else:
            raise AssertionError("base class from nowhere")

    solution = semidirect_product(base_c, fibers)
    offsets = []
    run = 0
    for fib in fibers:
        offsets.append(run)
        run += fib.size

    def assemble_map(
        s: FinStructure, cls_s: list[int], base_map: StructureMap,
        fiber_maps: dict[int, StructureMap],
    ) -> StructureMap:
        block_pos: dict[int, int] = {}
        counters: dict[int, int] = {}
        for x in range(s.size):
            t = cls_s[x]
            block_pos[x] = counters.get(t, 0)
            counters[t] = block_pos[x] + 1
        images = []
        for x in range(s.size):
            t = cls_s[x]
            gamma = base_map.images[t]
            images.append(offsets[gamma] + fiber_maps[t].images[block_pos[x]])
        return StructureMap(s, solution.result, tuple(images))

    f1 = assemble_map(b1, cls_1, beta1, fiber_maps_1)
    f2 = assemble_map(b2, cls_2, beta2, fiber_maps_2)
    if not is_embedding(f1) or not is_embedding(f2):
        raise RuntimeError("internal error: assembled maps fail to embed")
    if f1.apply(problem.e1.images) != f2.apply(problem.e2.images):
        raise RuntimeError("internal error: assembled maps do not commute")
    return ProductAmalgam(
        solution, f1.with_flag("embedding"), f2.with_flag("embedding"), base_c
    )


def _restrict_to_block(
    e: StructureMap,
    src: FinStructure,
    dst: FinStructure,
    src_cls: list[int],
    dst_cls: list[int],
    ta: int,
    td: int,
    fib_src: FinStructure,
    fib_dst: FinStructure,
) -> StructureMap:
    src_block = [x for x in range(src.size) if src_cls[x] == ta]
    dst_block = [y for y in range(dst.size) if dst_cls[y] == td]
    dst_pos = {y: i for i, y in enumerate(dst_block)}
    images = tuple(dst_pos[e.images[x]] for x in src_block)
    return StructureMap(fib_src, fib_dst, images)


# ---------------------------------------------------------------------------
# Product Ramsey
# ---------------------------------------------------------------------------


def product_ramsey_witness(
    classes: Sequence[AgeSpec],
    a_seq: Sequence[FinStructure],
    b_seq: Sequence[FinStructure],
    r: int,
    size_cap: int | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
) -> tuple[tuple[FinStructure, ...], RamseyCertificate]:
    """Coordinate-wise hosts such that every r-coloring of copy sequences
    of ``a_seq`` is constant on the copy sequences inside some copy
    sequence of ``b_seq``.

    Candidates are tried by total size, then lexicographically by the size
    vector, then by per-class generation order; verification is the same
    bad-coloring backtracking run on sequence copies.
    """
    s = len(classes)
    if not (s == len(a_seq) == len(b_seq)) or s < 1:
        raise ValueError("classes, a_seq and b_seq must have equal positive length")
    for spec, a, b in zip(classes, a_seq, b_seq):
        _require_member(spec, a, "small structure")
        _require_member(spec, b, "big structure")
    if size_cap is None:
        size_cap = max(spec.size_bound for spec in classes)

    minimums = [max(a.size, b.size) for a, b in zip(a_seq, b_seq)]
    total_nodes = 0
    for total in range(sum(minimums), s * size_cap + 1):
        for sizes in _size_vectors(total, minimums, size_cap):
            member_lists = [
                _members_of_size(spec, n) for spec, n in zip(classes, sizes)
            ]
            for candidate in itertools.product(*member_lists):
                verdict, nodes = _verify_product_arrow(
                    candidate, a_seq, b_seq, r, node_cap
                )
                total_nodes += nodes
                if verdict == "witness_verified":
                    cert = RamseyCertificate("witness_verified", nodes=total_nodes)
                    return tuple(candidate), cert
                if verdict == "cap_exceeded":
                    raise CapExceeded(
                        f"cap hit while checking sizes {sizes}", nodes=total_nodes
                    )
    raise CapExceeded(
        f"no witness found with per-class size cap {size_cap}", nodes=total_nodes
    )


def _size_vectors(
    total: int, minimums: Sequence[int], cap: int
) -> Iterable[tuple[int, ...]]:
    s = len(minimums)

    def rec(i: int, remaining: int) -> Iterable[tuple[int, ...]]:
        if i == s - 1:
            if minimums[i] <= remaining <= cap:
                yield (remaining,)
            return
        lo = minimums[i]
        hi = min(cap, remaining - sum(minimums[i + 1:]))
        for n in range(lo, hi + 1):
            for rest in rec(i + 1, remaining - n):
                yield (n,) + rest

    return rec(0, total)


def _verify_product_arrow(
    c_seq: Sequence[FinStructure],
    a_seq: Sequence[FinStructure],
    b_seq: Sequence[FinStructure],
    r: int,
    node_cap: int,
) -> tuple[str, int]:
    """Backtracking verdict for one candidate host sequence."""
    copies_a = [enumerate_copies(c, a) for c, a in zip(c_seq, a_seq)]
    copies_b = [enumerate_copies(c, b) for c, b in zip(c_seq, b_seq)]
    if any(not lst for lst in copies_b):
        return "refuted", 0  # no copy sequence of b_seq at all
    items = list(itertools.product(*copies_a))
    index = {item: i for i, item in enumerate(items)}
    groups = []
    for b_tuple in itertools.product(*copies_b):
        inside_per_coord = [
            copies_inside(c, b_copy, a)
            for c, b_copy, a in zip(c_seq, b_tuple, a_seq)
        ]
        group = [index[combo] for combo in itertools.product(*inside_per_coord)]
        groups.append(group)
    stats = SearchStats()
    try:
        assignment = find_bad_assignment(
            len(items), r, groups, node_cap=node_cap, stats=stats
        )
    except CapExceeded:
        return "cap_exceeded", stats.nodes
    return ("refuted" if assignment is not None else "witness_verified"), stats.nodes


# ---------------------------------------------------------------------------
# JSON: the result structure plus kind, class_map and the base symbols.
# ---------------------------------------------------------------------------


def product_to_json(p: ProductStructure) -> dict:
    from .structures import structure_to_json

    data = structure_to_json(p.result)
    data["kind"] = p.kind
    data["class_map"] = list(p.class_map)
    data["l2_symbols"] = sorted(p.l2_symbols)
    return data


def product_from_json(data) -> ProductStructure:
    from .structures import structure_from_json

    try:
        kind = data["kind"]
        class_map = tuple(int(x) for x in data["class_map"])
        l2 = frozenset(data.get("l2_symbols", ()))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed product JSON: {exc}") from exc
    result = structure_from_json(data)
    if kind not in ("union", "semidirect"):
        raise ValueError(f"unknown product kind {kind!r}")

    n_classes = max(class_map) + 1 if class_map else 0
    blocks: list[list[int]] = [[] for _ in range(n_classes)]
    for x, t in enumerate(class_map):
        blocks[t].append(x)

    if kind == "semidirect":
        base, fibers, _, _ = _split_product_substructure(result, l2)
        p = semidirect_product(base, fibers)
    else:
        block_pred = re.compile(rf"^{BLOCK_PREFIX}\d+$")
        l1 = {
            n for n, _ in result.sig.symbols if not block_pred.match(n)
        }
        fibers = []
        for block in blocks:
            sub, _ = induced_substructure(result, tuple(block))
            fibers.append(reduct(sub, l1))
        p = ordered_union(fibers)
    if p.result != result or p.class_map != class_map:
        raise ValueError("product JSON is not a faithful product encoding")
    return p
