"""Exact equitable-coloring search by quota-bounded backtracking.

Small-n ground truth for the constructive solver.  The search assigns
classes vertex by vertex under per-class size quotas, so any returned
coloring is equitable by construction; properness is enforced with
incremental conflict counts.  Exhaustion proves no equitable r-coloring
exists.
"""

from __future__ import annotations

from .coloring import Coloring, verify
from .errors import InputError, ResourceCapError
from .graph import Graph

ORACLE_CAP = 16


def quota_sizes(n: int, r: int) -> list[int]:
    """Class-size quotas for an equitable r-coloring of n vertices.

    The first n % r classes get the larger size.
    """
    s, extra = divmod(n, r)
    return [s + 1] * extra + [s] * (r - extra)


def backtrack_equitable(g: Graph, r: int, node_budget: int | None = None) -> Coloring | None:
    """Complete search for an equitable r-coloring; None proves absence.

    Symmetry breaking: the first vertex tried is restricted to one class
    of each distinct quota size.  Raises ResourceCapError if the node
    budget runs out before the search settles either way.
    """
    if r < 1:
        raise InputError(f"need at least one class, got r={r}")
    n = g.n
    if n == 0:
        return Coloring(0, r)
    quotas = quota_sizes(n, r)

    # most-edges-first ordering fails fast on dense conflict cores
    order = sorted(range(n), key=lambda v: (-g.degree(v), v))
    col = Coloring(n, r)
    fill = [0] * r
    # conflicts[v][c] = colored neighbors of v currently in class c
    conflicts = [[0] * r for _ in range(n)]

    root_classes = []
    seen_quota = set()
    for c in range(r):
        if quotas[c] not in seen_quota:
            seen_quota.add(quotas[c])
            root_classes.append(c)

    nodes = 0

    def place(idx: int) -> bool:
        nonlocal nodes
        if idx == n:
            return True
        v = order[idx]
        candidates = root_classes if idx == 0 else range(r)
        for c in candidates:
            if fill[c] >= quotas[c] or conflicts[v][c]:
                continue
            nodes += 1
            if node_budget is not None and nodes > node_budget:
                raise ResourceCapError(
                    f"equitable search exceeded {node_budget} nodes at n={n}, r={r}"
                )
            col.assign(v, c)
            fill[c] += 1
            for u in g.adj[v]:
                conflicts[u][c] += 1
            if place(idx + 1):
                return True
            col.uncolor(v)
            fill[c] -= 1
            for u in g.adj[v]:
                conflicts[u][c] -= 1
        return False

    if not place(0):
        return None
    ok, reason = verify(g, col, r)
    if not ok:
        raise AssertionError(f"search produced a bad coloring: {reason}")
    return col


def oracle_equitable(g: Graph, r: int, cap: int = ORACLE_CAP) -> Coloring | None:
    """Ground-truth equitable r-coloring, or None when provably impossible.

    Refuses graphs above the size cap; the search is exponential and the
    cap keeps it honest as an oracle rather than a solver.
    """
    if g.n > cap:
        raise InputError(f"oracle capped at n <= {cap}, got n={g.n}")
    return backtrack_equitable(g, r)
