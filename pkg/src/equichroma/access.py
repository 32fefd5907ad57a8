"""Accessibility analysis over the class-exchange digraph.

For an almost equitable coloring, the class digraph has an arc i -> j when
some vertex of class i has no neighbor in class j (it could move there).  A
class is accessible when the one-short class is reachable from it; the
accessible/blocked split drives every repair decision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coloring import AlmostEquitableState, UNCOLORED
from .errors import InputError


@dataclass
class AuxDigraph:
    """Class digraph with witness lists.

    witnesses maps arc (i, j) to the sorted vertices of class i having no
    neighbor in class j; the arc exists iff the list is nonempty.
    neighbor_counts[v][c] counts v's neighbors in class c (kept for every
    vertex, colored or not).
    """

    r: int
    witnesses: dict[tuple[int, int], list[int]]
    neighbor_counts: list[list[int]] | None = None

    def has_arc(self, i: int, j: int) -> bool:
        return (i, j) in self.witnesses

    def witnesses_of(self, i: int, j: int) -> list[int]:
        return self.witnesses.get((i, j), [])

    def arcs(self) -> list[tuple[int, int]]:
        return sorted(self.witnesses)

    def out_neighbors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.witnesses if a == i)

    def in_neighbors(self, j: int) -> list[int]:
        return sorted(i for (i, b) in self.witnesses if b == j)


@dataclass
class AccessPartition:
    """Split of class indices by whether the small class is reachable."""

    A: set[int]
    B: set[int]
    parent: dict[int, int | None]  # next hop toward small, None at small
    a: int
    b: int
    small: int

    def path_to_small(self, start: int) -> list[int]:
        """Class sequence start, ..., small following parent pointers."""
        if start not in self.A:
            raise InputError(f"class {start} is not accessible")
        path = [start]
        while path[-1] != self.small:
            path.append(self.parent[path[-1]])
        return path


@dataclass
class SoloProfile:
    """Blocked-side contact structure of an accessible-side vertex v."""

    v: int
    Q: set[int]  # blocked-side neighbors whose only contact in v's class is v
    Qprime: set[int]  # members of Q having a non-neighbor inside Q
    F0: set[int]  # blocked classes containing no neighbor of v

    @property
    def q(self) -> int:
        return len(self.Q)

    @property
    def qprime(self) -> int:
        return len(self.Qprime)


def build_aux(state: AlmostEquitableState, audit: bool = False) -> AuxDigraph:
    g, col = state.g, state.coloring
    r = col.r
    cnt = [[0] * r for _ in range(g.n)]
    for v in range(g.n):
        row = cnt[v]
        for u in g.adj[v]:
            c = col.class_of[u]
            if c != UNCOLORED:
                row[c] += 1
    wit: dict[tuple[int, int], list[int]] = {}
    for v in range(g.n):
        cv = col.class_of[v]
        if cv == UNCOLORED:
            continue
        row = cnt[v]
        for j in range(r):
            if j != cv and row[j] == 0:
                wit.setdefault((cv, j), []).append(v)  # v ascending: sorted
    aux = AuxDigraph(r=r, witnesses=wit, neighbor_counts=cnt)
    if audit:
        _audit_aux(state, aux)
    return aux


def _audit_aux(state: AlmostEquitableState, aux: AuxDigraph) -> None:
    """Slow definition-scan rebuild; mismatch means a bookkeeping bug."""
    g, col = state.g, state.coloring
    for i in range(col.r):
        for j in range(col.r):
            if i == j:
                continue
            naive = [
                v
                for v in sorted(col.classes[i])
                if not any(col.class_of[u] == j for u in g.adj[v])
            ]
            if naive != aux.witnesses_of(i, j):
                raise AssertionError(
                    f"witness list for arc {i}->{j} is {aux.witnesses_of(i, j)}, "
                    f"definition scan gives {naive}"
                )


def accessible(h: AuxDigraph, small: int) -> AccessPartition:
    """Reverse layered BFS from the small class.

    parent[j] is the lowest-indexed class of the previous layer that j has an
    arc into, so parent chains are shortest paths with deterministic ties.
    """
    parent: dict[int, int | None] = {small: None}
    frontier = [small]
    while frontier:
        nxt = []
        for j in range(h.r):
            if j in parent:
                continue
            for i in frontier:
                if h.has_arc(j, i):
                    parent[j] = i
                    nxt.append(j)
                    break
        frontier = nxt  # built in ascending j order, then scanned ascending
    A = set(parent)
    B = set(range(h.r)) - A
    return AccessPartition(A=A, B=B, parent=parent, a=len(A), b=len(B), small=small)


def _reaches(h: AuxDigraph, frm: int, to: int, excluded: int) -> bool:
    if frm == to:
        return True
    if frm == excluded:
        return False
    seen = {frm, excluded}
    stack = [frm]
    while stack:
        i = stack.pop()
        for j in h.out_neighbors(i):
            if j == to:
                return True
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return False


def blocked_by(h: AuxDigraph, ap: AccessPartition, cls: int) -> set[int]:
    """Accessible classes that lose their route to small when cls is removed."""
    out = set()
    for y in ap.A:
        if y in (cls, ap.small):
            continue
        if cls == ap.small or not _reaches(h, y, ap.small, excluded=cls):
            out.add(y)
    return out


def terminal_classes(h: AuxDigraph, ap: AccessPartition) -> set[int]:
    """Accessible classes whose removal cuts off no other accessible class.

    The small class itself is terminal only when it is the whole accessible
    side (removing it otherwise strands everyone).
    """
    if ap.A == {ap.small}:
        return {ap.small}
    return {cls for cls in ap.A if cls != ap.small and not blocked_by(h, ap, cls)}


def solo_profile(state: AlmostEquitableState, ap: AccessPartition, v: int) -> SoloProfile:
    g, col = state.g, state.coloring
    cv = col.class_of[v]
    if cv == UNCOLORED or cv not in ap.A:
        raise InputError(f"vertex {v} is not in an accessible class")
    Q = set()
    for u in g.adj[v]:
        cu = col.class_of[u]
        if cu in ap.B and sum(1 for w in g.adj[u] if col.class_of[w] == cv) == 1:
            Q.add(u)
    Qprime = {u for u in Q if any(w != u and w not in g.adj[u] for w in Q)}
    classes_touched = {col.class_of[u] for u in g.adj[v]}
    F0 = {W for W in ap.B if W not in classes_touched}
    return SoloProfile(v=v, Q=Q, Qprime=Qprime, F0=F0)


def weighted_solo_score(
    state: AlmostEquitableState,
    ap: AccessPartition,
    v: int,
    halved: frozenset[int] | set[int] = frozenset(),
) -> Fraction:
    """Each blocked-side neighbor u contributes 1 split evenly across u's
    contacts in v's class; contributions from classes in `halved` count half."""
    g, col = state.g, state.coloring
    cv = col.class_of[v]
    if cv == UNCOLORED or cv not in ap.A:
        raise InputError(f"vertex {v} is not in an accessible class")
    total = Fraction(0)
    for u in g.adj[v]:
        cu = col.class_of[u]
        if cu in ap.B:
            contacts = sum(1 for w in g.adj[u] if col.class_of[w] == cv)
            term = Fraction(1, contacts)
            if cu in halved:
                term = term / 2
            total += term
    return total


def strong_components(h: AuxDigraph) -> list[set[int]]:
    """Tarjan's algorithm; components are listed sources-first, so every arc
    between components points from an earlier list position to a later one."""
    index = {}
    low = {}
    on_stack = set()
    stack: list[int] = []
    out: list[set[int]] = []
    counter = [0]

    def visit(v: int) -> None:
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in h.out_neighbors(v):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = set()
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.add(w)
                if w == v:
                    break
            out.append(comp)

    for v in range(h.r):
        if v not in index:
            visit(v)
    out.reverse()  # Tarjan emits reverse-topologically
    return out


def d_of_x(state: AlmostEquitableState) -> set[int]:
    """Classes containing no neighbor of the pending vertex."""
    col = state.coloring
    touched = {col.class_of[u] for u in state.g.adj[state.x]}
    touched.discard(UNCOLORED)
    return set(range(col.r)) - touched


def movable_set(
    state: AlmostEquitableState, h: AuxDigraph, frm: int, to: int
) -> set[int]:
    """Vertices of class frm with no neighbor in class to."""
    if frm == to:
        raise InputError("movable_set needs two distinct classes")
    return set(h.witnesses_of(frm, to))


def is_ordinary(
    state: AlmostEquitableState, h: AuxDigraph, ap: AccessPartition, v: int
) -> bool:
    """v's class can spare it: some classmate moves within the accessible
    side, or the accessible side is so small the exchange lemma covers it."""
    if ap.a <= 2:
        return True
    cv = state.coloring.class_of[v]
    for j in sorted(ap.A):
        if j == cv:
            continue
        if any(w != v for w in h.witnesses_of(cv, j)):
            return True
    return False
