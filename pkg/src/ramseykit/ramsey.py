"""The Ramsey-property engine.

Homogeneous-copy detection, adversarial bad-coloring search, witness
search over an age, simultaneous homogenization for all sub-shapes, and
the color-homogenizing-map checker.  Tie-breaking is lexicographic-first
everywhere so that identical inputs give identical outputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .generators import AgeSpec, age_generate
from .search import (
    DEFAULT_NODE_CAP,
    CapExceeded,
    SearchStats,
    find_bad_assignment,
)
from .structures import (
    FinStructure,
    StructureMap,
    are_isomorphic,
    enumerate_copies,
    induced_substructure,
    is_embedding,
    qftp,
)


@dataclass(frozen=True)
class Coloring:
    """A finite coloring of increasing ``m``-tuples with colors ``1..k``.

    The assignment may be total on all increasing m-tuples of a host or
    just on the copies of a fixed shape; operations validate totality on
    the tuples they actually visit.
    """

    m: int
    k: int
    colors: Mapping[tuple[int, ...], int]

    def __post_init__(self) -> None:
        if self.m < 0 or self.k < 1:
            raise ValueError("need m >= 0 and k >= 1")
        for tup, c in self.colors.items():
            if len(tup) != self.m:
                raise ValueError(f"tuple {tup} is not of length {self.m}")
            if any(tup[i] >= tup[i + 1] for i in range(len(tup) - 1)):
                raise ValueError(f"tuple {tup} is not increasing")
            if not 1 <= c <= self.k:
                raise ValueError(f"color {c} out of range 1..{self.k}")

    def color_of(self, tup: tuple[int, ...]) -> int:
        try:
            return self.colors[tup]
        except KeyError:
            raise ValueError(f"coloring not defined on {tup}") from None

    @staticmethod
    def constant(m: int, k: int, tuples: Iterable[tuple[int, ...]], color: int = 1) -> "Coloring":
        return Coloring(m, k, {t: color for t in tuples})


@dataclass(frozen=True)
class ShapeColoring:
    """One coloring per shape, the shapes pairwise non-isomorphic."""

    parts: tuple[tuple[FinStructure, Coloring], ...]

    def __post_init__(self) -> None:
        for i, (shape, coloring) in enumerate(self.parts):
            if coloring.m != shape.size:
                raise ValueError("coloring tuple length must match shape size")
            for other, _ in self.parts[:i]:
                if other.sig == shape.sig and are_isomorphic(other, shape):
                    raise ValueError("shapes must be pairwise non-isomorphic")

    def for_shape(self, shape: FinStructure) -> Coloring:
        for s, c in self.parts:
            if s.sig == shape.sig and are_isomorphic(s, shape):
                return c
        raise ValueError(f"no coloring for shape {shape!r}")


@dataclass
class RamseyCertificate:
    """Outcome of a verification or search run.

    ``refuted`` always comes with a bad coloring that has been re-verified
    by the homogeneous-copy scan before being handed out.
    """

    verdict: str  # witness_verified | refuted | cap_exceeded
    bad_coloring: Coloring | None = None
    homogeneous_copy: tuple[int, ...] | None = None
    nodes: int = 0
    detail: dict = field(default_factory=dict)


def copies_inside(
    c: FinStructure, host_tuple: tuple[int, ...], a: FinStructure
) -> list[tuple[int, ...]]:
    """Copies of ``a`` in ``c`` using only elements of ``host_tuple``."""
    if a.size > len(host_tuple):
        return []
    target = qftp(a, tuple(range(a.size)))
    return [
        t
        for t in itertools.combinations(sorted(host_tuple), a.size)
        if qftp(c, t) == target
    ]


def is_homogeneous(
    c: FinStructure,
    b_copy: tuple[int, ...],
    a: FinStructure,
    coloring: Coloring,
) -> bool:
    """Whether all copies of ``a`` inside ``b_copy`` share one color.

    Vacuously true when no copy of ``a`` lies inside ``b_copy``.
    """
    if any(b_copy[i] >= b_copy[i + 1] for i in range(len(b_copy) - 1)):
        raise ValueError(f"b_copy must be increasing: {b_copy}")
    seen = {coloring.color_of(t) for t in copies_inside(c, b_copy, a)}
    return len(seen) <= 1


def find_homogeneous_copy(
    c: FinStructure,
    b: FinStructure,
    a: FinStructure,
    coloring: Coloring,
) -> tuple[int, ...] | None:
    """First (lexicographic) copy of ``b`` in ``c`` homogeneous for the
    coloring on copies of ``a``, or None."""
    for b_copy in enumerate_copies(c, b):
        if is_homogeneous(c, b_copy, a, coloring):
            return b_copy
    return None


def find_bad_coloring(
    c: FinStructure,
    b: FinStructure,
    a: FinStructure,
    k: int,
    node_cap: int = DEFAULT_NODE_CAP,
    time_cap: float | None = None,
    stats: SearchStats | None = None,
) -> Coloring | None:
    """A k-coloring of the copies of ``a`` in ``c`` with no homogeneous copy
    of ``b``, or None exactly when no such coloring exists.

    Every returned coloring is re-verified by the independent
    homogeneous-copy scan before being handed out.
    """
    if a.sig != b.sig or a.sig != c.sig:
        raise ValueError("find_bad_coloring requires one shared signature")
    copies_a = enumerate_copies(c, a)
    copies_b = enumerate_copies(c, b)
    index = {t: i for i, t in enumerate(copies_a)}
    groups = [
        [index[t] for t in copies_inside(c, b_copy, a)] for b_copy in copies_b
    ]
    if stats is None:
        stats = SearchStats()
    assignment = find_bad_assignment(
        len(copies_a), k, groups, node_cap=node_cap, time_cap=time_cap, stats=stats
    )
    if assignment is None:
        return None
    coloring = Coloring(a.size, k, dict(zip(copies_a, assignment)))
    if find_homogeneous_copy(c, b, a, coloring) is not None:
        raise RuntimeError("internal error: emitted coloring is not bad")
    return coloring


def verify_ramsey(
    c: FinStructure,
    b: FinStructure,
    a: FinStructure,
    k: int,
    node_cap: int = DEFAULT_NODE_CAP,
    time_cap: float | None = None,
) -> RamseyCertificate:
    """Certificate-producing wrapper around :func:`find_bad_coloring`."""
    stats = SearchStats()
    try:
        bad = find_bad_coloring(
            c, b, a, k, node_cap=node_cap, time_cap=time_cap, stats=stats
        )
    except CapExceeded as exc:
        return RamseyCertificate("cap_exceeded", nodes=exc.nodes)
    if bad is None:
        return RamseyCertificate("witness_verified", nodes=stats.nodes)
    return RamseyCertificate("refuted", bad_coloring=bad, nodes=stats.nodes)


def _members_of_size(spec: AgeSpec, size: int) -> list[FinStructure]:
    bounded = AgeSpec(spec.kind, max(size, 1), spec.explicit)
    return [m for m in age_generate(bounded) if m.size == size]


def _require_member(spec: AgeSpec, s: FinStructure, role: str) -> None:
    for m in _members_of_size(spec, s.size):
        if m.sig == s.sig and are_isomorphic(m, s):
            return
    raise ValueError(f"{role} is not a member of the {spec.kind} age")


def witness_search(
    spec: AgeSpec,
    a: FinStructure,
    b: FinStructure,
    k: int,
    size_cap: int | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
    time_cap: float | None = None,
) -> tuple[FinStructure, RamseyCertificate]:
    """Smallest age member ``C`` (ties broken by generation order) with no
    bad k-coloring for ``(b, a)``.

    ``size_cap`` bounds the candidate size (default: the age's own bound).
    Raises CapExceeded when the caps run out before a witness appears.
    """
    _require_member(spec, a, "small structure")
    _require_member(spec, b, "big structure")
    if size_cap is None:
        size_cap = spec.size_bound
    total_nodes = 0
    for size in range(b.size, size_cap + 1):
        for candidate in _members_of_size(spec, size):
            cert = verify_ramsey(
                candidate, b, a, k, node_cap=node_cap, time_cap=time_cap
            )
            total_nodes += cert.nodes
            if cert.verdict == "witness_verified":
                cert.nodes = total_nodes
                return candidate, cert
            if cert.verdict == "cap_exceeded":
                raise CapExceeded(
                    f"node/time cap hit while checking size {size}",
                    nodes=total_nodes,
                )
    raise CapExceeded(
        f"no witness found up to size {size_cap}", nodes=total_nodes
    )


def sub_shapes(b0: FinStructure) -> list[FinStructure]:
    """Nonempty substructures of ``b0`` up to isomorphism, listed size
    descending and, within a size, in first-occurrence order of the
    lexicographic subset enumeration.

    The listing order is a documented convention, not canonical; the size
    of iterated witnesses depends on it.
    """
    out: list[FinStructure] = []
    for size in range(b0.size, 0, -1):
        seen: set[FinStructure] = set()
        for subset in itertools.combinations(range(b0.size), size):
            sub = induced_substructure(b0, subset)[0]
            if sub not in seen:
                seen.add(sub)
                out.append(sub)
    return out


def multi_shape_find(
    c: FinStructure,
    b0: FinStructure,
    sc: ShapeColoring,
) -> tuple[int, ...] | None:
    """First copy of ``b0`` in ``c`` homogeneous for every shape's coloring
    simultaneously, or None."""
    shapes = sub_shapes(b0)
    colorings = [(s, sc.for_shape(s)) for s in shapes]  # raises if not covered
    for b_copy in enumerate_copies(c, b0):
        if all(is_homogeneous(c, b_copy, s, col) for s, col in colorings):
            return b_copy
    return None


def iterated_witness(
    spec: AgeSpec,
    b0: FinStructure,
    k: int,
    size_cap: int | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
) -> FinStructure:
    """Iterate witness_search through the sub-shape listing of ``b0``.

    Starting from ``b0``, each listed shape D replaces the current
    structure Z by a witness for "every k-coloring of copies of D admits a
    homogeneous copy of Z".  The result admits, for every assignment of
    colorings to all sub-shapes, a copy of ``b0`` homogeneous for all of
    them at once.
    """
    _require_member(spec, b0, "b0")
    z = b0
    for shape in sub_shapes(b0):
        z, _cert = witness_search(
            spec, shape, z, k, size_cap=size_cap, node_cap=node_cap
        )
    return z


def check_color_homogenizing(
    g: StructureMap,
    ambient: FinStructure,
    b0_elements: tuple[int, ...],
    coloring: Coloring,
    strict_increasing: bool = False,
) -> tuple[bool, tuple | None]:
    """Whether ``g`` sends tuples of one ambient type to tuples of one color.

    ``b0_elements`` names g's source inside ``ambient`` (increasing).  For
    all length-m tuples of distinct source positions, equality of the
    quantifier-free types of the corresponding ambient tuples must imply
    equality of colors of the image tuples.  A non-increasing image tuple
    is read on its increasing rearrangement; with ``strict_increasing`` it
    counts as a violation instead.

    Returns (ok, first violating pair of position tuples or offending tuple).
    """
    if len(b0_elements) != g.source.size:
        raise ValueError("b0_elements must enumerate g's source")
    m = coloring.m
    rep_color: dict = {}
    for pos in itertools.permutations(range(g.source.size), m):
        ambient_tuple = tuple(b0_elements[p] for p in pos)
        image = g.apply(pos)
        if list(image) != sorted(image):
            if strict_increasing:
                return False, (pos,)
            image = tuple(sorted(image))
        color = coloring.color_of(image)
        ty = qftp(ambient, ambient_tuple)
        if ty in rep_color:
            rep_pos, rep_col = rep_color[ty]
            if rep_col != color:
                return False, (rep_pos, pos)
        else:
            rep_color[ty] = (pos, color)
    return True, None


def all_increasing_tuples(s: FinStructure, m: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(s.size), m))


def thm2_pipeline(
    ambient: FinStructure,
    b: FinStructure,
    f: StructureMap,
    g_provider: Callable[[tuple[int, ...], Coloring], StructureMap],
    b0_elements: tuple[int, ...],
    m: int,
    k: int,
    coloring: Coloring,
) -> RamseyCertificate:
    """Run the homogenized-coloring transfer as an executable check.

    The coloring on increasing m-tuples of ``ambient`` is pulled back along
    ``f`` to a coloring on increasing m-tuples of ``b``; the provider
    supplies a candidate map g from the substructure of ``ambient`` on
    ``b0_elements`` into ``b``.  The certificate reports which of the three
    steps fails, if any:

    a. the composite f.g embeds the substructure back into ``ambient``,
    b. g is color-homogenizing for the pulled-back coloring,
    c. the image of the composite is homogeneous for the original coloring
       on copies of every size-m sub-shape.
    """
    if f.source != b:
        raise ValueError("f must map b into ambient")
    pullback = {}
    for t in all_increasing_tuples(b, m):
        pullback[t] = coloring.color_of(tuple(sorted(f.apply(t))))
    c_b = Coloring(m, k, pullback)

    b0_struct, _ = induced_substructure(ambient, b0_elements)
    g = g_provider(b0_elements, c_b)
    if g.source != b0_struct:
        raise ValueError("provider returned a map with the wrong source")

    composite = StructureMap(b0_struct, ambient, f.apply(g.images))
    step_a = is_embedding(composite)
    step_b, violation = check_color_homogenizing(g, ambient, b0_elements, c_b)

    image_sorted = tuple(sorted(composite.images))
    step_c = True
    for shape in sub_shapes(b0_struct):
        if shape.size != m:
            continue
        if not is_homogeneous(ambient, image_sorted, shape, coloring):
            step_c = False
            break

    ok = step_a and step_b and step_c
    return RamseyCertificate(
        "witness_verified" if ok else "refuted",
        homogeneous_copy=image_sorted if ok else None,
        detail={
            "embedding": step_a,
            "color_homogenizing": step_b,
            "image_homogeneous": step_c,
            "violation": violation if not step_b else None,
        },
    )


# ---------------------------------------------------------------------------
# Coloring JSON: {"m": 2, "k": 2, "colors": {"0,1": 1, ...}}
# ---------------------------------------------------------------------------


def coloring_to_json(c: Coloring) -> dict:
    return {
        "m": c.m,
        "k": c.k,
        "colors": {",".join(map(str, t)): col for t, col in sorted(c.colors.items())},
    }


def coloring_from_json(data: Mapping) -> Coloring:
    try:
        colors = {}
        for key, col in data["colors"].items():
            tup = tuple(int(x) for x in key.split(",")) if key else ()
            colors[tup] = int(col)
        return Coloring(int(data["m"]), int(data["k"]), colors)
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed coloring JSON: {exc}") from exc
