"""Vertex colorings, the one-small-class repair state, and move traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .errors import InputError
from .graph import Graph

UNCOLORED = -1


class Coloring:
    """Assignment of vertices to color classes 0..r-1 (or UNCOLORED).

    Keeps the inverse map (class -> member set) in sync with class_of.
    """

    def __init__(self, n: int, r: int):
        if r < 1:
            raise InputError(f"need at least one class, got r={r}")
        self.n = n
        self.r = r
        self.class_of = [UNCOLORED] * n
        self.classes: list[set[int]] = [set() for _ in range(r)]

    def assign(self, v: int, c: int) -> None:
        if not (0 <= c < self.r):
            raise InputError(f"class {c} out of range 0..{self.r - 1}")
        old = self.class_of[v]
        if old != UNCOLORED:
            self.classes[old].discard(v)
        self.class_of[v] = c
        self.classes[c].add(v)

    def uncolor(self, v: int) -> None:
        old = self.class_of[v]
        if old != UNCOLORED:
            self.classes[old].discard(v)
            self.class_of[v] = UNCOLORED

    def size(self, c: int) -> int:
        return len(self.classes[c])

    def sizes(self) -> list[int]:
        return [len(cl) for cl in self.classes]

    def copy(self) -> "Coloring":
        out = Coloring(self.n, self.r)
        out.class_of = list(self.class_of)
        out.classes = [set(cl) for cl in self.classes]
        return out

    def members_sorted(self, c: int) -> list[int]:
        return sorted(self.classes[c])

    def is_proper(self, g: Graph) -> bool:
        for u, v in g.edges():
            cu, cv = self.class_of[u], self.class_of[v]
            if cu != UNCOLORED and cu == cv:
                return False
        return True

    def is_complete(self) -> bool:
        return UNCOLORED not in self.class_of

    def is_equitable(self) -> bool:
        sz = self.sizes()
        return max(sz) - min(sz) <= 1

    def key(self) -> tuple:
        """Hashable snapshot of the assignment."""
        return tuple(self.class_of)


def verify(g: Graph, coloring: Coloring, r: int) -> tuple[bool, str]:
    """Full independent check: complete, proper, equitable, r classes."""
    if coloring.r != r:
        return False, f"expected {r} classes, coloring has {coloring.r}"
    if coloring.n != g.n:
        return False, f"coloring covers {coloring.n} vertices, graph has {g.n}"
    for v in range(g.n):
        if coloring.class_of[v] == UNCOLORED:
            return False, f"vertex {v} uncolored"
    for u, v in g.edges():
        if coloring.class_of[u] == coloring.class_of[v]:
            return False, f"edge {u}-{v} monochromatic in class {coloring.class_of[u]}"
    sz = coloring.sizes()
    if max(sz) - min(sz) > 1:
        return False, f"class sizes {sz} differ by more than one"
    # cross-check the inverse map
    for c in range(r):
        for v in coloring.classes[c]:
            if coloring.class_of[v] != c:
                return False, f"inverse map broken at vertex {v}"
    if sum(sz) != g.n:
        return False, "inverse map loses vertices"
    return True, "ok"


@dataclass(frozen=True)
class MoveStep:
    vertex: int
    src: int  # class id, or UNCOLORED
    dst: int


@dataclass
class MoveTrace:
    """Sequence of single-vertex relocations applied as one unit.

    Residence is checked per step in order; properness is checked on the
    final coloring (simultaneous exchanges pass through improper prefixes).
    """

    steps: list[MoveStep] = field(default_factory=list)
    tag: str = ""

    def add(self, vertex: int, src: int, dst: int) -> None:
        self.steps.append(MoveStep(vertex, src, dst))

    def apply(self, g: Graph, coloring: Coloring) -> None:
        done: list[MoveStep] = []
        try:
            for step in self.steps:
                if coloring.class_of[step.vertex] != step.src:
                    raise InputError(
                        f"trace step expects vertex {step.vertex} in class "
                        f"{step.src}, found {coloring.class_of[step.vertex]}"
                    )
                if step.dst == UNCOLORED:
                    coloring.uncolor(step.vertex)
                else:
                    coloring.assign(step.vertex, step.dst)
                done.append(step)
            bad = self._improper_edge(g, coloring)
            if bad is not None:
                raise InputError(f"trace leaves edge {bad[0]}-{bad[1]} monochromatic")
        except InputError:
            for step in reversed(done):
                if step.src == UNCOLORED:
                    coloring.uncolor(step.vertex)
                else:
                    coloring.assign(step.vertex, step.src)
            raise

    def revert(self, coloring: Coloring) -> None:
        for step in reversed(self.steps):
            if step.src == UNCOLORED:
                coloring.uncolor(step.vertex)
            else:
                coloring.assign(step.vertex, step.src)

    def _improper_edge(self, g: Graph, coloring: Coloring) -> tuple[int, int] | None:
        touched = {s.vertex for s in self.steps}
        for v in touched:
            c = coloring.class_of[v]
            if c == UNCOLORED:
                continue
            for u in g.adj[v]:
                if coloring.class_of[u] == c:
                    return (min(u, v), max(u, v))
        return None


@dataclass
class AlmostEquitableState:
    """Repair state: g minus the pending vertex x is colored with one class a
    vertex short and all others at the common size s."""

    g: Graph
    x: int
    coloring: Coloring
    s: int
    small: int
    y: int | None = None  # the just-uncolored endpoint, when there is one

    def validate(self) -> None:
        col = self.coloring
        r = col.r
        if col.class_of[self.x] != UNCOLORED:
            raise InputError(f"pending vertex {self.x} is colored")
        for v in range(self.g.n):
            if v != self.x and col.class_of[v] == UNCOLORED:
                raise InputError(f"vertex {v} uncolored but not pending")
        for c in range(r):
            want = self.s - 1 if c == self.small else self.s
            if col.size(c) != want:
                raise InputError(
                    f"class {c} has size {col.size(c)}, expected {want}"
                )
        for v in range(self.g.n):
            c = col.class_of[v]
            if c == UNCOLORED:
                continue
            for u in self.g.adj[v]:
                if u > v and col.class_of[u] == c:
                    raise InputError(f"edge {v}-{u} monochromatic in class {c}")

    def snapshot_key(self) -> tuple:
        return (self.coloring.key(), self.small)


def parse_coloring(text: str, n: int) -> tuple[Coloring, int, int]:
    """Parse the text serialization back into (coloring, r, s)."""
    r = s = None
    rows: dict[int, list[int]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("class "):
            head, _, rest = line.partition(":")
            try:
                cid = int(head.split()[1])
                verts = [int(t) for t in rest.split()]
            except (ValueError, IndexError):
                raise InputError(f"malformed class line {line!r}")
            if cid in rows:
                raise InputError(f"class {cid} repeated")
            rows[cid] = verts
        elif line.startswith("r="):
            for tok in line.split():
                key, _, val = tok.partition("=")
                if key == "r":
                    r = int(val)
                elif key == "s":
                    s = int(val)
        else:
            raise InputError(f"unrecognized line {line!r}")
    if r is None or s is None:
        raise InputError("missing summary line")
    if sorted(rows) != list(range(r)):
        raise InputError(f"expected classes 0..{r - 1}, got {sorted(rows)}")
    col = Coloring(n, r)
    for cid, verts in rows.items():
        for v in verts:
            if not (0 <= v < n):
                raise InputError(f"vertex {v} out of range")
            if col.class_of[v] != UNCOLORED:
                raise InputError(f"vertex {v} listed twice")
            col.assign(v, cid)
    return col, r, s


def format_coloring(coloring: Coloring, fh: TextIO) -> None:
    """Stable text serialization: one sorted line per class, then a summary."""
    for c in range(coloring.r):
        members = " ".join(str(v) for v in coloring.members_sorted(c))
        fh.write(f"class {c}: {members}\n" if members else f"class {c}:\n")
    s = max(coloring.sizes()) if coloring.n else 0
    fh.write(f"r={coloring.r} s={s}\n")
