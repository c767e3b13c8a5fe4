"""Mixed graphs (directed + undirected edges) and three-color state maps.

Nodes are dense integers 0..node_count-1.  A coloring is a string over
the alphabet "ABC" with one character per node, so colorings are cheap
to hash, compare and serialize.  Two recolorings act pointwise:

* ``transliterate`` swaps B and C,
* ``complement`` swaps A and B.

Both are involutions.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

from .errors import GraphFormatError

COLORS = "ABC"

_TRANSLIT = str.maketrans("BC", "CB")
_COMPLEMENT = str.maketrans("AB", "BA")


def transliterate(coloring: str) -> str:
    """Swap colors B and C pointwise (an involution)."""
    return coloring.translate(_TRANSLIT)


def complement(coloring: str) -> str:
    """Swap colors A and B pointwise (an involution); C is unchanged."""
    return coloring.translate(_COMPLEMENT)


def validate_coloring(coloring: str, node_count: int) -> None:
    """Reject colorings of the wrong length or alphabet."""
    if len(coloring) != node_count:
        raise ValueError(
            f"coloring length {len(coloring)} != node count {node_count}"
        )
    if not set(coloring) <= set(COLORS):
        raise ValueError(f"coloring {coloring!r} contains letters outside 'ABC'")


class MixedGraph:
    """A finite graph with both directed and undirected edges.

    Structural invariants, enforced at construction:

    * no loops in either edge set,
    * no duplicate edges within a set,
    * no pair of nodes carries both an undirected edge and a directed
      edge (in either orientation).

    Instances are immutable after construction and safe to share
    between threads.
    """

    __slots__ = ("node_count", "directed", "undirected", "_out", "_out_masks")

    def __init__(
        self,
        node_count: int,
        directed: Iterable[Sequence[int]] = (),
        undirected: Iterable[Sequence[int]] = (),
    ):
        if node_count < 1:
            raise GraphFormatError("graph needs at least one node")
        self.node_count = node_count

        dir_set: set[tuple[int, int]] = set()
        for u, v in directed:
            self._check_pair(u, v)
            if (u, v) in dir_set:
                raise GraphFormatError(f"duplicate directed edge ({u},{v})")
            dir_set.add((u, v))

        und_set: set[tuple[int, int]] = set()
        for u, v in undirected:
            self._check_pair(u, v)
            key = (u, v) if u < v else (v, u)
            if key in und_set:
                raise GraphFormatError(f"duplicate undirected edge {{{u},{v}}}")
            und_set.add(key)

        for u, v in und_set:
            if (u, v) in dir_set or (v, u) in dir_set:
                raise GraphFormatError(
                    f"nodes {u},{v} carry both an undirected and a directed edge"
                )

        self.directed = frozenset(dir_set)
        self.undirected = frozenset(und_set)

        out: list[set[int]] = [set() for _ in range(node_count)]
        for u, v in dir_set:
            out[u].add(v)
        for u, v in und_set:
            out[u].add(v)
            out[v].add(u)
        self._out = tuple(tuple(sorted(s)) for s in out)
        self._out_masks = tuple(
            sum(1 << v for v in neigh) for neigh in self._out
        )

    def _check_pair(self, u: int, v: int) -> None:
        n = self.node_count
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge ({u},{v}) references a missing node")
        if u == v:
            raise GraphFormatError(f"loop at node {u} is not allowed")

    # -- adjacency ---------------------------------------------------

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        """Targets of directed edges from v plus undirected partners of v,
        in ascending node order."""
        return self._out[v]

    @property
    def out_masks(self) -> tuple[int, ...]:
        """Per-node out-neighborhoods as bitmasks (bit u set iff u is an
        out-neighbor).  This is the step engine's working form."""
        return self._out_masks

    # -- comparison --------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MixedGraph)
            and self.node_count == other.node_count
            and self.directed == other.directed
            and self.undirected == other.undirected
        )

    def __hash__(self) -> int:
        return hash((self.node_count, self.directed, self.undirected))

    def __repr__(self) -> str:
        return (
            f"MixedGraph(nodes={self.node_count}, "
            f"directed={len(self.directed)}, undirected={len(self.undirected)})"
        )

    # -- serialization -----------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "nodes": self.node_count,
            "directed": sorted([u, v] for u, v in self.directed),
            "undirected": sorted([u, v] for u, v in self.undirected),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MixedGraph":
        try:
            nodes = data["nodes"]
            directed = data.get("directed", [])
            undirected = data.get("undirected", [])
        except (TypeError, KeyError) as exc:
            raise GraphFormatError(f"bad graph object: {exc}") from exc
        return cls(nodes, directed, undirected)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "MixedGraph":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise GraphFormatError(f"{path}: {exc}") from exc
        return cls.from_json_dict(data)


# -- computability predicates ----------------------------------------


def weak_computable(g: MixedGraph) -> bool:
    """True iff every node can be walked through using undirected edges
    only, i.e. the undirected subgraph is connected and spans all nodes."""
    n = g.node_count
    if n == 1:
        return True
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in g.undirected:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


def super_weak_computable(g: MixedGraph) -> bool:
    """True iff a closed walk through all nodes exists when directed
    edges are used forward and undirected edges either way.

    Equivalent test: one strongly connected component spans the digraph
    obtained by replacing each undirected edge with two opposite arcs.
    """
    n = g.node_count
    if n == 1:
        return True
    fwd: list[list[int]] = [[] for _ in range(n)]
    rev: list[list[int]] = [[] for _ in range(n)]
    for u, v in g.directed:
        fwd[u].append(v)
        rev[v].append(u)
    for u, v in g.undirected:
        fwd[u].append(v)
        fwd[v].append(u)
        rev[u].append(v)
        rev[v].append(u)

    def reaches_all(adj: list[list[int]]) -> bool:
        seen = [False] * n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    stack.append(w)
        return count == n

    return reaches_all(fwd) and reaches_all(rev)
