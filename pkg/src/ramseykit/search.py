"""Deterministic backtracking kernel shared by the coloring searches.

The kernel looks for an assignment of colors ``1..k`` to ``n`` items such
that no group is monochromatic.  Searches are worst-case doubly
exponential, so exceeding a cap is a first-class outcome (CapExceeded),
never a silent "absent".
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Sequence

DEFAULT_NODE_CAP = 10_000_000
DEFAULT_TIME_CAP = 60.0

_CAP_ENV = "RAMSEYKIT_CAP"


def node_cap_from_env(default: int = DEFAULT_NODE_CAP) -> int:
    raw = os.environ.get(_CAP_ENV)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"{_CAP_ENV} must be an integer, got {raw!r}") from exc


class CapExceeded(RuntimeError):
    """A bounded search ran out of its node or time budget."""

    def __init__(self, message: str, nodes: int = 0, seconds: float | None = None):
        super().__init__(message)
        self.nodes = nodes
        self.seconds = seconds


@dataclass
class SearchStats:
    nodes: int = 0


def find_bad_assignment(
    n_items: int,
    k: int,
    groups: Sequence[Sequence[int]],
    node_cap: int = DEFAULT_NODE_CAP,
    time_cap: float | None = None,
    stats: SearchStats | None = None,
) -> list[int] | None:
    """First assignment (lexicographic) leaving every group non-monochromatic.

    Items are colored in index order, colors tried ascending.  A group is
    checked exactly once, when its last item receives a color (a partial
    assignment is pruned only by such completed-group checks).  A color
    ``c`` is tried only if ``c <= 1 + max color used so far``: whether an
    assignment is bad is invariant under renaming colors, and renaming any
    bad assignment into first-use order never increases it
    lexicographically, so the restriction is sound and the result is still
    the lexicographic minimum.

    Returns the color list, or None when every assignment makes some group
    monochromatic.  Groups with at most one item force None immediately.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if stats is None:
        stats = SearchStats()
    if any(len(g) <= 1 for g in groups):
        return None

    # For each item, the groups whose largest item it is, stored as a
    # bitmask over the *other* items of the group.
    ending: list[list[int]] = [[] for _ in range(n_items)]
    for g in groups:
        g = sorted(g)
        mask = 0
        for x in g[:-1]:
            mask |= 1 << x
        ending[g[-1]].append(mask)

    colors = [0] * n_items
    color_mask = [0] * (k + 1)
    deadline = None if time_cap is None else time.monotonic() + time_cap

    def recurse(i: int, max_used: int) -> bool:
        if i == n_items:
            return True
        bit = 1 << i
        for c in range(1, min(max_used + 1, k) + 1):
            stats.nodes += 1
            if stats.nodes > node_cap:
                raise CapExceeded(
                    f"node cap {node_cap} exceeded", nodes=stats.nodes
                )
            if deadline is not None and stats.nodes % 4096 == 0:
                if time.monotonic() > deadline:
                    raise CapExceeded(
                        f"time cap {time_cap}s exceeded", nodes=stats.nodes
                    )
            cm = color_mask[c]
            if any(om & cm == om for om in ending[i]):
                continue  # would complete a monochromatic group
            colors[i] = c
            color_mask[c] = cm | bit
            if recurse(i + 1, max(max_used, c)):
                return True
            color_mask[c] = cm
        colors[i] = 0
        return False

    if recurse(0, 0):
        return list(colors)
    return None
