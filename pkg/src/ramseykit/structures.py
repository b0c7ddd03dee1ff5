"""Finite linearly ordered relational structures.

Conventions used throughout the package:

* A structure lives on the domain ``{0, ..., n-1}`` and is linearly ordered
  by the natural order of its domain.  Constructors renumber elements so
  that this normalization always holds.  Between two linearly ordered
  structures the order-preserving bijection is unique, so isomorphism and
  copy detection reduce to table comparisons.
* The order relation ``<`` is never stored in a table; it is implicit.
* Tables are closed-world: a tuple not listed does not satisfy the relation.
* All values are immutable after construction and all operations are pure
  functions of their inputs, hence safe for concurrent use.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

ORDER_SYMBOL = "<"

Fact = tuple[str, tuple[int, ...]]


@dataclass(frozen=True)
class Signature:
    """Relation symbols with arities.

    The binary order symbol ``<`` is part of every signature but is kept
    implicit: ``symbols`` lists the non-order symbols only, sorted by name.
    """

    symbols: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        pairs = tuple(sorted((str(n), int(a)) for n, a in self.symbols))
        names = [n for n, _ in pairs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in signature: {names}")
        for name, arity in pairs:
            if not name:
                raise ValueError("empty symbol name")
            if name == ORDER_SYMBOL:
                raise ValueError('"<" is implicit and cannot be redeclared')
            if arity < 1:
                raise ValueError(f"arity of {name!r} must be >= 1, got {arity}")
        object.__setattr__(self, "symbols", pairs)

    @property
    def names(self) -> tuple[str, ...]:
        """All symbol names, including the implicit order symbol."""
        return tuple(n for n, _ in self.symbols) + (ORDER_SYMBOL,)

    def arity(self, name: str) -> int:
        if name == ORDER_SYMBOL:
            return 2
        for n, a in self.symbols:
            if n == name:
                return a
        raise ValueError(f"unknown symbol {name!r}")

    def has(self, name: str) -> bool:
        return name == ORDER_SYMBOL or any(n == name for n, _ in self.symbols)

    def restrict(self, keep: Iterable[str]) -> "Signature":
        kept = set(keep) - {ORDER_SYMBOL}
        for name in kept:
            if not self.has(name):
                raise ValueError(f"unknown symbol {name!r}")
        return Signature(tuple((n, a) for n, a in self.symbols if n in kept))


@dataclass(frozen=True, eq=False)
class FinStructure:
    """A finite relational structure on ``{0..size-1}``, ordered naturally.

    ``tables`` maps every non-order symbol to the frozenset of tuples
    satisfying it.  Use :meth:`build` to construct with validation.
    """

    sig: Signature
    size: int
    tables: Mapping[str, frozenset[tuple[int, ...]]]

    @classmethod
    def build(
        cls,
        sig: Signature,
        size: int,
        tables: Mapping[str, Iterable[Iterable[int]]] | None = None,
    ) -> "FinStructure":
        if size < 0:
            raise ValueError(f"size must be >= 0, got {size}")
        tables = dict(tables or {})
        normalized: dict[str, frozenset[tuple[int, ...]]] = {}
        for name, _arity in sig.symbols:
            normalized[name] = frozenset(tuple(t) for t in tables.pop(name, ()))
        if tables:
            raise ValueError(f"tables for symbols not in signature: {sorted(tables)}")
        out = cls(sig, size, normalized)
        out._validate()
        return out

    def _validate(self) -> None:
        for name, arity in self.sig.symbols:
            for tup in self.tables[name]:
                if len(tup) != arity:
                    raise ValueError(f"{name!r} expects arity {arity}, got {tup}")
                for x in tup:
                    if not 0 <= x < self.size:
                        raise ValueError(f"index {x} out of range in {name!r} table")

    def holds(self, name: str, tup: tuple[int, ...]) -> bool:
        if name == ORDER_SYMBOL:
            return tup[0] < tup[1]
        return tup in self.tables[name]

    def table(self, name: str) -> tuple[tuple[int, ...], ...]:
        """The table of ``name`` in sorted order (deterministic)."""
        return tuple(sorted(self.tables[name]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinStructure):
            return NotImplemented
        return (
            self.sig == other.sig
            and self.size == other.size
            and self.tables == other.tables
        )

    def __hash__(self) -> int:
        cached = self.__dict__.get("_hash")
        if cached is None:
            cached = hash(
                (self.sig, self.size, frozenset(self.tables.items()))
            )
            self.__dict__["_hash"] = cached
        return cached

    def __repr__(self) -> str:
        syms = ",".join(f"{n}/{a}" for n, a in self.sig.symbols)
        return f"FinStructure(size={self.size}, sig=[{syms}])"


@dataclass(frozen=True)
class TupleType:
    """The complete quantifier-free type of a tuple.

    ``pattern`` gives, position by position, the rank of the entry among the
    distinct entries of the tuple; it records the full order/equality
    pattern, so order facts are not repeated in ``facts``.  ``facts`` holds
    the non-order atomic facts as ``(symbol, position-tuple)`` pairs; facts
    not listed are false (closed world over the ambient signature).
    """

    length: int
    pattern: tuple[int, ...]
    facts: frozenset[Fact]


@dataclass(frozen=True)
class StructureMap:
    """An injection between structure domains.

    ``checked_flags`` records properties that were established either by
    construction or by running the corresponding checker; a flag is never
    set speculatively.
    """

    source: FinStructure
    target: FinStructure
    images: tuple[int, ...]
    checked_flags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        images = tuple(int(x) for x in self.images)
        object.__setattr__(self, "images", images)
        if len(images) != self.source.size:
            raise ValueError(
                f"expected {self.source.size} images, got {len(images)}"
            )
        if len(set(images)) != len(images):
            raise ValueError(f"images are not injective: {images}")
        for x in images:
            if not 0 <= x < self.target.size:
                raise ValueError(f"image {x} out of target range")

    def apply(self, tup: Iterable[int]) -> tuple[int, ...]:
        return tuple(self.images[i] for i in tup)

    def with_flag(self, flag: str) -> "StructureMap":
        return StructureMap(
            self.source, self.target, self.images, self.checked_flags | {flag}
        )


def _check_entries(s: FinStructure, tup: Iterable[int]) -> tuple[int, ...]:
    t = tuple(tup)
    for x in t:
        if not 0 <= x < s.size:
            raise IndexError(f"index {x} out of range for size {s.size}")
    return t


def qftp(s: FinStructure, tup: Iterable[int]) -> TupleType:
    """The complete quantifier-free type of ``tup`` in ``s``.

    Entries may repeat; the equality pattern is part of the type.  Two calls
    on tuples with the same type return structurally equal values.
    """
    t = _check_entries(s, tup)
    ranks = {v: r for r, v in enumerate(sorted(set(t)))}
    pattern = tuple(ranks[v] for v in t)
    m = len(t)
    facts: set[Fact] = set()
    for name, arity in s.sig.symbols:
        tbl = s.tables[name]
        if not tbl:
            continue
        for pos in itertools.product(range(m), repeat=arity):
            if tuple(t[p] for p in pos) in tbl:
                facts.add((name, pos))
    return TupleType(m, pattern, frozenset(facts))


def same_qftp(s: FinStructure, t1: Iterable[int], t2: Iterable[int]) -> bool:
    """Whether two tuples have equal quantifier-free types in ``s``."""
    a, b = tuple(t1), tuple(t2)
    if len(a) != len(b):
        raise ValueError(f"tuple lengths differ: {len(a)} vs {len(b)}")
    return qftp(s, a) == qftp(s, b)


def induced_substructure(
    s: FinStructure, subset: Iterable[int]
) -> tuple[FinStructure, StructureMap]:
    """The renormalized substructure on ``subset`` plus its inclusion map.

    ``subset`` must be strictly increasing; the inclusion is an embedding by
    construction and carries the ``embedding`` flag.
    """
    sub = _check_entries(s, subset)
    if any(sub[i] >= sub[i + 1] for i in range(len(sub) - 1)):
        raise ValueError(f"subset must be strictly increasing: {sub}")
    pos = {v: i for i, v in enumerate(sub)}
    tables: dict[str, frozenset[tuple[int, ...]]] = {}
    for name, arity in s.sig.symbols:
        tbl = s.tables[name]
        hits = [
            tuple(pos[x] for x in cand)
            for cand in itertools.product(sub, repeat=arity)
            if cand in tbl
        ]
        tables[name] = frozenset(hits)
    out = FinStructure(s.sig, len(sub), tables)
    inc = StructureMap(out, s, sub, frozenset({"increasing", "embedding"}))
    return out, inc


def is_embedding(m: StructureMap) -> bool:
    """Whether ``m`` preserves the order strictly and preserves *and*
    reflects every relation symbol shared by source and target.

    Comparing structures whose non-order signatures are both nonempty but
    disjoint is rejected: there is nothing meaningful to compare.
    """
    src, tgt = m.source, m.target
    shared: list[tuple[str, int]] = []
    for name, arity in src.sig.symbols:
        if tgt.sig.has(name):
            if tgt.sig.arity(name) != arity:
                raise ValueError(f"symbol {name!r} has conflicting arities")
            shared.append((name, arity))
    if src.sig.symbols and tgt.sig.symbols and not shared:
        raise ValueError("source and target share no non-order symbols")
    imgs = m.images
    if any(imgs[i] >= imgs[i + 1] for i in range(len(imgs) - 1)):
        return False
    for name, arity in shared:
        for tup in itertools.product(range(src.size), repeat=arity):
            if src.holds(name, tup) != tgt.holds(name, m.apply(tup)):
                return False
    return True


def enumerate_copies(
    b: FinStructure, a: FinStructure
) -> list[tuple[int, ...]]:
    """All increasing tuples from ``b`` inducing a copy of ``a``.

    Both structures are linearly ordered, so the order-preserving bijection
    is the only candidate isomorphism and the test is quantifier-free type
    equality of the full tuples.  Output is sorted lexicographically.
    """
    if a.sig != b.sig:
        raise ValueError("enumerate_copies requires a shared signature")
    if a.size > b.size:
        return []
    target = qftp(a, tuple(range(a.size)))
    return [
        t
        for t in itertools.combinations(range(b.size), a.size)
        if qftp(b, t) == target
    ]


def are_isomorphic(a: FinStructure, b: FinStructure) -> bool:
    """Whether the unique order-preserving bijection is an isomorphism.

    On normalized domains that bijection is the identity renaming, so this
    is a size and table comparison.
    """
    if a.sig != b.sig:
        raise ValueError("are_isomorphic requires a shared signature")
    return a.size == b.size and a.tables == b.tables


def reduct(s: FinStructure, keep: Iterable[str]) -> FinStructure:
    """The reduct of ``s`` to the named symbols; ``<`` is always kept."""
    kept = set(keep) - {ORDER_SYMBOL}
    for name in kept:
        if not s.sig.has(name):
            raise ValueError(f"unknown symbol {name!r}")
    sig = s.sig.restrict(kept)
    return FinStructure(sig, s.size, {n: s.tables[n] for n, _ in sig.symbols})


# ---------------------------------------------------------------------------
# JSON interchange
#
# FinStructure: {"signature": [{"name": "R", "arity": 2}, ...],
#                "size": n, "tables": {"R": [[0, 1], ...]}}
# The order is implicit.  StructureMap: {"images": [...]}.
# ---------------------------------------------------------------------------


def structure_to_json(s: FinStructure) -> dict:
    return {
        "signature": [{"name": n, "arity": a} for n, a in s.sig.symbols],
        "size": s.size,
        "tables": {n: [list(t) for t in s.table(n)] for n, _ in s.sig.symbols},
    }


def structure_from_json(data: Mapping) -> FinStructure:
    try:
        raw = [
            (d["name"], d["arity"])
            for d in data["signature"]
            if d["name"] != ORDER_SYMBOL
        ]
        sig = Signature(tuple(raw))
        size = int(data["size"])
        tables = {k: [tuple(t) for t in v] for k, v in data.get("tables", {}).items()}
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed structure JSON: {exc}") from exc
    return FinStructure.build(sig, size, tables)


def map_to_json(m: StructureMap) -> dict:
    return {"images": list(m.images)}


def map_from_json(
    data: Mapping, source: FinStructure, target: FinStructure
) -> StructureMap:
    try:
        images = tuple(int(x) for x in data["images"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed map JSON: {exc}") from exc
    return StructureMap(source, target, images)


def dumps_canonical(obj: object) -> str:
    """Deterministic JSON serialization used by every report and file."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
