"""Undirected simple graphs with dense integer vertices, plus surface edge bounds.

Vertices are always 0..n-1.  Adjacency is kept as a list of sets; edges are
counted once.  Parsing rejects loops and duplicate edges instead of collapsing
them.
"""

from __future__ import annotations

from typing import Iterable, TextIO

from .errors import InputError

PLANAR = "planar"
NONNEG_EULER = "nonneg-euler"
SURFACES = (PLANAR, NONNEG_EULER)


class Graph:
    """Mutable simple graph on vertices 0..n-1."""

    def __init__(self, n: int):
        if n < 0:
            raise InputError(f"vertex count must be nonnegative, got {n}")
        self.n = n
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.m = 0

    def _check_vertex(self, v: int) -> None:
        if not (0 <= v < self.n):
            raise InputError(f"vertex {v} out of range 0..{self.n - 1}")

    def add_edge(self, u: int, v: int) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise InputError(f"self-loop at vertex {u}")
        if v in self.adj[u]:
            raise InputError(f"duplicate edge {u}-{v}")
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.m += 1

    def remove_edge(self, u: int, v: int) -> None:
        if v not in self.adj[u]:
            raise InputError(f"edge {u}-{v} not present")
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.m -= 1

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (min, max) pairs in lexicographic order."""
        out = []
        for u in range(self.n):
            for v in self.adj[u]:
                if u < v:
                    out.append((u, v))
        out.sort()
        return out

    def copy(self) -> "Graph":
        g = Graph(self.n)
        g.adj = [set(a) for a in self.adj]
        g.m = self.m
        return g

    def subgraph_without(self, x: int) -> "Graph":
        """Copy with vertex x isolated (kept in place so ids stay dense)."""
        g = self.copy()
        for u in list(g.adj[x]):
            g.remove_edge(x, u)
        return g

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        g = cls(n)
        for u, v in edges:
            g.add_edge(u, v)
        return g


def surface_bounds_ok(g: Graph, surface: str) -> bool:
    """Edge-count sanity bound for the claimed surface.

    Planar graphs on n >= 3 vertices have at most 3n-6 edges; graphs
    embeddable on a surface of nonnegative Euler characteristic have at most
    3n.  This is a necessary condition only; embeddability itself is trusted.
    """
    if surface == PLANAR:
        if g.n >= 3:
            return g.m <= 3 * g.n - 6
        return g.m <= max(0, g.n - 1)
    if surface == NONNEG_EULER:
        return g.m <= 3 * g.n
    raise InputError(f"unknown surface {surface!r}")


def min_nonisolated_degree(g: Graph) -> int:
    """Smallest degree among vertices of degree >= 1; 0 if the graph has no edges."""
    degs = [len(a) for a in g.adj if a]
    return min(degs) if degs else 0


def elimination_order(g: Graph, cap: int) -> list[int] | None:
    """Greedy min-degree elimination: repeatedly delete a vertex of residual
    degree <= cap, lowest degree first, ties by lowest id.

    Returns the deletion order covering every vertex, or None if the residual
    graph gets stuck with all degrees above the cap.
    """
    deg = [len(a) for a in g.adj]
    alive = [True] * g.n
    adj = [set(a) for a in g.adj]
    order: list[int] = []
    for _ in range(g.n):
        best = -1
        best_deg = cap + 1
        for v in range(g.n):
            if alive[v] and deg[v] < best_deg:
                best, best_deg = v, deg[v]
        if best < 0 or best_deg > cap:
            return None
        alive[best] = False
        order.append(best)
        for u in adj[best]:
            if alive[u]:
                deg[u] -= 1
                adj[u].discard(best)
    return order


def cut_edges_count(g: Graph, side_a: set[int], side_b: set[int]) -> int:
    """Number of edges with one endpoint in side_a and the other in side_b.

    The sides must be disjoint.
    """
    if side_a & side_b:
        raise InputError("cut sides overlap")
    small, other = (side_a, side_b) if len(side_a) <= len(side_b) else (side_b, side_a)
    return sum(1 for u in small for v in g.adj[u] if v in other)


def read_dimacs(fh: TextIO) -> Graph:
    """Parse DIMACS edge format.  1-based vertex ids, `c` comments, one
    `p edge n m` line, then `e u v` lines.  Loops and repeats are errors."""
    g: Graph | None = None
    declared_m = 0
    for lineno, raw in enumerate(fh, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if g is not None:
                raise InputError(f"line {lineno}: repeated problem line")
            if len(parts) != 4 or parts[1] != "edge":
                raise InputError(f"line {lineno}: malformed problem line {line!r}")
            try:
                n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise InputError(f"line {lineno}: non-integer sizes in {line!r}")
            g = Graph(n)
        elif parts[0] == "e":
            if g is None:
                raise InputError(f"line {lineno}: edge before problem line")
            if len(parts) != 3:
                raise InputError(f"line {lineno}: malformed edge line {line!r}")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise InputError(f"line {lineno}: non-integer endpoints in {line!r}")
            g.add_edge(u - 1, v - 1)
        else:
            raise InputError(f"line {lineno}: unrecognized line {line!r}")
    if g is None:
        raise InputError("missing problem line")
    if g.m != declared_m:
        raise InputError(f"problem line declares {declared_m} edges, found {g.m}")
    return g


def write_dimacs(g: Graph, fh: TextIO) -> None:
    """Emit DIMACS edge format with edges sorted, so output is byte-stable."""
    fh.write(f"p edge {g.n} {g.m}\n")
    for u, v in g.edges():
        fh.write(f"e {u + 1} {v + 1}\n")
