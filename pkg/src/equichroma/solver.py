"""Equitable coloring by incremental edge insertion and conflict repair.

The solver starts from an equitable coloring of the edgeless graph and
inserts edges one at a time.  A conflicted edge gets one endpoint
uncolored, leaving an almost equitable coloring whose missing vertex is
then re-placed through witness cascades, expanding accessibility first
when no placement class is open.  Divisibility of n by r is arranged up
front by padding with a small clique or stripping a few low-degree
vertices, and undone after solving.

A Hajnal-Szemeredi style entry point covers arbitrary graphs whenever
r >= max_degree + 1; it runs the same engine with an exhaustive rescue
bolted on, so it can never return an unverified answer.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from . import access
from . import repair as moves
from .coloring import AlmostEquitableState, Coloring, MoveTrace, UNCOLORED, verify
from .errors import InputError, ResourceCapError, TheoryViolation
from .graph import (
    Graph,
    NONNEG_EULER,
    PLANAR,
    SURFACES,
    cut_edges_count,
    elimination_order,
    surface_bounds_ok,
)
from .oracle import backtrack_equitable, oracle_equitable

SURFACE_MIN_R = {PLANAR: 8, NONNEG_EULER: 9}
# pending-vertex degree admitted by the repair engine, per surface
SURFACE_X_BOUND = {PLANAR: 5, NONNEG_EULER: 6}

HS_IDDFS_BUDGET = 200_000
HS_SEARCH_BUDGET = 4_000_000


@dataclass
class SolverConfig:
    r: int
    surface: str = PLANAR
    seed: int = 0
    audit: bool = False
    oracle_cross_check_max_n: int = 0

    def __post_init__(self):
        if self.surface not in SURFACES:
            raise InputError(f"unknown surface {self.surface!r}")
        if self.r < 1:
            raise InputError(f"need at least one color class, got r={self.r}")


@dataclass
class SolverStats:
    edge_insertions: int = 0
    repairs: int = 0
    expansions: dict[str, int] = field(default_factory=dict)
    max_deficit: int = 0
    deferrals: int = 0
    hs_calls: int = 0
    hs_rescues: int = 0
    claim_violations: list[tuple] = field(default_factory=list)
    wall_time: float = 0.0

    def bump(self, rule: str) -> None:
        self.expansions[rule] = self.expansions.get(rule, 0) + 1


@dataclass
class ChargeReport:
    scenario: str
    charge: dict[int, Fraction]
    rule_flow: dict[str, Fraction]
    total: Fraction
    edge_count: int
    violations: list[tuple[str, int, Fraction]]

    def conserved(self) -> bool:
        return self.total == self.edge_count


@dataclass(frozen=True)
class RestorePlan:
    """How to turn a coloring of the adjusted graph back into one of the
    original: drop padding, or greedily re-color the stripped vertices."""

    kind: str  # identity | pad | strip
    n: int
    added: int = 0
    stripped: tuple[int, ...] = ()
    kept: tuple[int, ...] = ()  # strip: adjusted id -> original id


# --- divisibility ------------------------------------------------------------

def reduce_divisibility(g: Graph, r: int) -> tuple[Graph, RestorePlan]:
    """Return a graph whose order r divides, plus the recipe to undo it.

    A shortfall of at most 4 is padded with a clique on fresh vertices
    (their colors are forced distinct, so peeling them off leaves class
    sizes within one).  A larger shortfall strips low-degree vertices
    instead; they get re-colored greedily afterwards, which always works
    because each has few colored neighbors at its strip position.
    """
    n = g.n
    p = (-n) % r
    if p == 0:
        return g, RestorePlan("identity", n=n)
    if p <= 4:
        g2 = Graph(n + p)
        for u, v in g.edges():
            g2.add_edge(u, v)
        for i in range(n, n + p):
            for j in range(i + 1, n + p):
                g2.add_edge(i, j)
        return g2, RestorePlan("pad", n=n, added=p)

    k = r - p
    order = elimination_order(g, cap=6)
    if order is None:
        raise InputError(
            "no low-degree elimination order exists; route through hs_equitable"
        )
    stripped = tuple(order[:k])
    gone = set(stripped)
    kept = tuple(v for v in range(n) if v not in gone)
    new_id = {old: i for i, old in enumerate(kept)}
    g2 = Graph(n - k)
    for u, v in g.edges():
        if u not in gone and v not in gone:
            g2.add_edge(new_id[u], new_id[v])
    return g2, RestorePlan("strip", n=n, stripped=stripped, kept=kept)


def restore_coloring(g: Graph, plan: RestorePlan, col: Coloring) -> Coloring:
    """Pull a coloring of the adjusted graph back onto the original g."""
    r = col.r
    if plan.kind == "identity":
        return col
    out = Coloring(plan.n, r)
    if plan.kind == "pad":
        for v in range(plan.n):
            out.assign(v, col.class_of[v])
        return out
    for i, old in enumerate(plan.kept):
        out.assign(old, col.class_of[i])
    # later-stripped vertices are colored first; each new color must dodge
    # the vertex's colored neighbors and every color already handed out here
    used: set[int] = set()
    for v in reversed(plan.stripped):
        forbidden = set(used)
        for u in g.adj[v]:
            if out.class_of[u] != UNCOLORED:
                forbidden.add(out.class_of[u])
        free = [c for c in range(r) if c not in forbidden]
        if not free:
            raise TheoryViolation(
                f"restoration ran out of colors at vertex {v}",
                dump={"vertex": v, "forbidden": sorted(forbidden)},
            )
        out.assign(v, free[0])
        used.add(out.class_of[v])
    return out


# --- diagnostics --------------------------------------------------------------

def claim_checks(
    state: AlmostEquitableState,
    h: access.AuxDigraph | None = None,
    ap: access.AccessPartition | None = None,
    surface: str = PLANAR,
) -> list[tuple]:
    """Solo-neighbor degree bounds the theory promises on valid instances.

    Planar: a vertex of an accessible class with at least 5 solo neighbors
    has at most one of them adjacent to all the others.  Nonneg-Euler: 8
    solo neighbors leave at least 5 mutually spread ones, 7 leave 4.
    Returns violation tuples; empty means healthy.
    """
    if h is None:
        h = access.build_aux(state)
    if ap is None:
        ap = access.accessible(h, state.small)
    bad = []
    col = state.coloring
    for cls in sorted(ap.A):
        for v in col.members_sorted(cls):
            prof = access.solo_profile(state, ap, v)
            q, qp = len(prof.Q), len(prof.Qprime)
            if surface == PLANAR:
                if q >= 5 and qp < q - 1:
                    bad.append(("solo-spread-planar", v, q, qp))
            else:
                if q >= 8 and qp < 5:
                    bad.append(("solo-spread-8", v, q, qp))
                if q == 7 and qp < 4:
                    bad.append(("solo-spread-7", v, q, qp))
    return bad


def cut_bound_checks(
    state: AlmostEquitableState, ap: access.AccessPartition
) -> list[tuple]:
    """Every blocked class must send at least s edges into each accessible
    class; shortfalls are reported as (blocked, accessible, count)."""
    col = state.coloring
    bad = []
    for u_cls in sorted(ap.B):
        for v_cls in sorted(ap.A):
            cut = cut_edges_count(state.g, col.classes[u_cls], col.classes[v_cls])
            if cut < state.s:
                bad.append((u_cls, v_cls, cut))
    return bad


def _component_shape(h: access.AuxDigraph, ap: access.AccessPartition) -> dict:
    comps = [sorted(c) for c in access.strong_components(h)]
    blocked_arcs = {
        arc: w for arc, w in h.witnesses.items() if arc[0] in ap.B and arc[1] in ap.B
    }
    sub = access.AuxDigraph(r=h.r, witnesses=blocked_arcs)
    blocked_comps = [sorted(c & ap.B) for c in access.strong_components(sub)]
    blocked_comps = [c for c in blocked_comps if c]
    sizes = sorted(len(c) for c in comps)
    reach4 = _subset_sums(sizes)
    return {
        "components": comps,
        "blocked_components": blocked_comps,
        "largest_blocked": max((len(c) for c in blocked_comps), default=0),
        "union_of_four": 4 in reach4,
    }


def _subset_sums(sizes: list[int]) -> set[int]:
    sums = {0}
    for s in sizes:
        sums |= {t + s for t in sums}
    return sums


def _violation_dump(
    state: AlmostEquitableState,
    cfg: SolverConfig,
    stuck: moves.Stuck | None,
) -> dict:
    h = access.build_aux(state)
    ap = access.accessible(h, state.small)
    col = state.coloring
    dump = {
        "n": state.g.n,
        "r": col.r,
        "s": state.s,
        "x": state.x,
        "small": state.small,
        "surface": cfg.surface,
        "edges": state.g.edges(),
        "class_of": list(col.class_of),
        "accessible": sorted(ap.A),
        "aux": {f"{i}->{j}": w for (i, j), w in sorted(h.witnesses.items())},
        "solo_bounds": claim_checks(state, h, ap, cfg.surface),
        "cut_bounds": cut_bound_checks(state, ap),
        "component_shape": _component_shape(h, ap),
    }
    if stuck is not None:
        dump["stuck"] = {"a": stuck.a, **stuck.details}
    return dump


# --- repair loop ---------------------------------------------------------------

def _repair(state, cfg, stats, bound, rescue) -> Coloring:
    stats.repairs += 1
    r = state.coloring.r
    cap = max(16, 4 * r * state.g.n)
    seen: set = set()
    audit_log: list | None = [] if cfg.audit else None
    for _ in range(cap):
        h = access.build_aux(state)
        ap = access.accessible(h, state.small)
        stats.max_deficit = max(stats.max_deficit, r - ap.a)
        if cfg.audit:
            stats.claim_violations.extend(claim_checks(state, h, ap, cfg.surface))
        targets = sorted(set(access.d_of_x(state)) & ap.A)
        if targets:
            out = moves.cascade_place(state, targets[0], h=h, ap=ap)
            stats.bump(out.rule)
            return out.coloring
        out = moves.expand_accessibility(state, audit_log=audit_log)
        if isinstance(out, moves.Stuck):
            if rescue is not None:
                stats.hs_rescues += 1
                return rescue(state)
            raise TheoryViolation(
                "accessibility expansion exhausted",
                dump=_violation_dump(state, cfg, out),
            )
        stats.bump(out.rule)
        if out.kind == moves.PLACED:
            return out.coloring
        key = state.snapshot_key()
        if key in seen:
            raise TheoryViolation(
                "repair revisited a state", dump=_violation_dump(state, cfg, None)
            )
        seen.add(key)
    raise TheoryViolation(
        "repair exceeded its iteration cap", dump=_violation_dump(state, cfg, None)
    )


def repair(
    state: AlmostEquitableState,
    cfg: SolverConfig | None = None,
    stats: SolverStats | None = None,
) -> Coloring:
    """Finish an almost equitable coloring by placing its pending vertex.

    Alternates witness-cascade placement with accessibility expansion;
    every commit is re-measured from scratch, so a successful return is a
    verified equitable coloring of state.g.
    """
    if cfg is None:
        cfg = SolverConfig(r=state.coloring.r)
    if stats is None:
        stats = SolverStats()
    bound = SURFACE_X_BOUND[cfg.surface]
    if state.g.degree(state.x) > bound:
        raise InputError(
            f"pending vertex has degree {state.g.degree(state.x)}; "
            f"the {cfg.surface} engine admits at most {bound}"
        )
    return _repair(state, cfg, stats, bound, rescue=None)


# --- edge insertion -------------------------------------------------------------

def _insertion_solve(g, r, cfg, stats, bound, rescue) -> Coloring:
    n = g.n
    s = n // r
    col = Coloring(n, r)
    for v in range(n):
        col.assign(v, v % r)
    gcur = Graph(n)
    queue = deque(sorted(g.edges()))
    stall = 0
    while queue:
        u, v = queue.popleft()
        if col.class_of[u] != col.class_of[v]:
            gcur.add_edge(u, v)
            stats.edge_insertions += 1
            stall = 0
            continue
        gcur.add_edge(u, v)
        eligible = [w for w in (u, v) if gcur.degree(w) <= bound]
        if not eligible:
            gcur.remove_edge(u, v)
            queue.append((u, v))
            stats.deferrals += 1
            stall += 1
            if stall > len(queue):
                raise TheoryViolation(
                    "every remaining edge is conflicted with both endpoints "
                    "over the repair degree bound",
                    dump={"n": n, "r": r, "deferred": sorted(queue)},
                )
            continue
        x = min(eligible, key=lambda w: (gcur.degree(w), w))
        y = u if x == v else v
        small = col.class_of[x]
        col.uncolor(x)
        state = AlmostEquitableState(gcur, x, col, s, small, y=y)
        col = _repair(state, cfg, stats, bound, rescue)
        stats.edge_insertions += 1
        stall = 0
    return col


def solve_divisible(
    g: Graph, cfg: SolverConfig, stats: SolverStats | None = None
) -> Coloring:
    """Equitably color a graph whose order r divides.

    Six-regular nonneg-Euler graphs skip the surface engine: their minimum
    degree leaves no low-degree endpoint to uncolor, but r >= 7 makes the
    degree-bounded route available instead.
    """
    if stats is None:
        stats = SolverStats()
    r = cfg.r
    if g.n % r:
        raise InputError(f"order {g.n} not divisible by r={r}")
    if g.max_degree() > r:
        raise InputError(f"max degree {g.max_degree()} exceeds r={r}")
    if g.n == 0:
        return Coloring(0, r)
    if (
        cfg.surface == NONNEG_EULER
        and g.max_degree() == 6
        and all(g.degree(v) == 6 for v in range(g.n))
    ):
        return hs_equitable(g, r, stats=stats)
    bound = SURFACE_X_BOUND[cfg.surface]
    col = _insertion_solve(g, r, cfg, stats, bound, rescue=None)
    ok, reason = verify(g, col, r)
    if not ok:
        raise TheoryViolation(f"solver output failed verification: {reason}")
    return col


def equitable_color(
    g: Graph, cfg: SolverConfig, stats: SolverStats | None = None
) -> Coloring:
    """Equitable r-coloring of a degree-bounded graph on its surface.

    Requires max_degree <= r and the surface edge bound; r must be at
    least 8 (planar) or 9 (nonneg-Euler), or failing that at least
    max_degree + 1, which reroutes through the degree-bounded engine.
    The returned coloring is always verified against g.
    """
    if stats is None:
        stats = SolverStats()
    t0 = time.perf_counter()
    if g.max_degree() > cfg.r:
        raise InputError(f"max degree {g.max_degree()} exceeds r={cfg.r}")
    if not surface_bounds_ok(g, cfg.surface):
        raise InputError(
            f"edge count {g.m} exceeds the {cfg.surface} bound for n={g.n}"
        )
    floor = SURFACE_MIN_R[cfg.surface]
    try:
        if cfg.r < floor:
            if cfg.r >= g.max_degree() + 1:
                return hs_equitable(g, cfg.r, stats=stats)
            raise InputError(
                f"r={cfg.r} below the {cfg.surface} floor {floor} "
                f"and below max_degree + 1"
            )
        if (
            cfg.surface == NONNEG_EULER
            and g.n > 0
            and all(g.degree(v) == 6 for v in range(g.n))
        ):
            return hs_equitable(g, cfg.r, stats=stats)
        try:
            g2, plan = reduce_divisibility(g, cfg.r)
        except InputError:
            if cfg.r >= g.max_degree() + 1:
                return hs_equitable(g, cfg.r, stats=stats)
            raise
        col2 = solve_divisible(g2, cfg, stats)
        col = restore_coloring(g, plan, col2)
        ok, reason = verify(g, col, cfg.r)
        if not ok:
            raise TheoryViolation(
                f"restored coloring failed verification: {reason}",
                dump={"plan": plan.kind, "reason": reason},
            )
        _maybe_cross_check(g, cfg)
        return col
    finally:
        stats.wall_time += time.perf_counter() - t0


def _maybe_cross_check(g: Graph, cfg: SolverConfig) -> None:
    if 0 < g.n <= cfg.oracle_cross_check_max_n:
        if oracle_equitable(g, cfg.r) is None:
            raise TheoryViolation(
                "solver succeeded where exhaustive search finds no coloring"
            )


# --- degree-bounded route ---------------------------------------------------------

def _hs_rescue_factory(k: int, iddfs_budget: int, search_budget: int):
    def rescue(state: AlmostEquitableState) -> Coloring:
        col = _witness_rotation_search(state, k, iddfs_budget)
        if col is not None:
            return col
        col = backtrack_equitable(state.g, k, node_budget=search_budget)
        if col is None:
            raise TheoryViolation(
                "no equitable coloring exists despite r >= max_degree + 1",
                dump={"n": state.g.n, "r": k},
            )
        return col

    return rescue


def _witness_rotation_search(
    state: AlmostEquitableState, k: int, budget: int
) -> Coloring | None:
    """Iterative-deepening hunt for a move sequence that opens a placement.

    Each move sends one witness into the current small class, which hands
    the small role to the witness's old class.  Depth is capped at k;
    repeated positions are pruned per deepening pass.
    """
    nodes = 0

    def attempt(depth: int, seen: set) -> Coloring | None:
        nonlocal nodes
        h = access.build_aux(state)
        ap = access.accessible(h, state.small)
        targets = sorted(set(access.d_of_x(state)) & ap.A)
        if targets:
            return moves.cascade_place(state, targets[0], h=h, ap=ap).coloring
        if depth == 0:
            return None
        for cls in range(k):
            if cls == state.small or not h.has_arc(cls, state.small):
                continue
            for w in h.witnesses_of(cls, state.small):
                nodes += 1
                if nodes > budget:
                    raise ResourceCapError(
                        f"witness rotation exceeded {budget} nodes"
                    )
                trace = MoveTrace([])
                trace.add(w, cls, state.small)
                trace.apply(state.g, state.coloring)
                old_small, state.small = state.small, cls
                key = state.snapshot_key()
                if key not in seen:
                    seen.add(key)
                    found = attempt(depth - 1, seen)
                    if found is not None:
                        return found
                state.small = old_small
                trace.revert(state.g, state.coloring)
        return None

    for depth in range(1, k + 1):
        try:
            found = attempt(depth, set())
        except ResourceCapError:
            return None
        if found is not None:
            return found
    return None


def hs_equitable(
    g: Graph,
    k: int,
    stats: SolverStats | None = None,
    iddfs_budget: int = HS_IDDFS_BUDGET,
    search_budget: int = HS_SEARCH_BUDGET,
) -> Coloring:
    """Equitable k-coloring of any graph with max_degree < k.

    Runs the insertion engine with the degree bound relaxed to k - 1 and
    an exhaustive two-stage rescue behind it, so the answer is either a
    verified coloring or a resource-cap error, never silently wrong.
    """
    if stats is None:
        stats = SolverStats()
    stats.hs_calls += 1
    t0 = time.perf_counter()
    try:
        if k < 1:
            raise InputError(f"need at least one color class, got k={k}")
        if g.max_degree() + 1 > k:
            raise InputError(
                f"degree-bounded route needs k >= max_degree + 1 = {g.max_degree() + 1}"
            )
        n = g.n
        p = (-n) % k
        g2 = Graph(n + p)
        for u, v in g.edges():
            g2.add_edge(u, v)
        for i in range(n, n + p):
            for j in range(i + 1, n + p):
                g2.add_edge(i, j)
        cfg = SolverConfig(r=k, surface=PLANAR)
        rescue = _hs_rescue_factory(k, iddfs_budget, search_budget)
        col2 = _insertion_solve(g2, k, cfg, stats, bound=k - 1, rescue=rescue)
        col = restore_coloring(g, RestorePlan("pad", n=n, added=p), col2)
        ok, reason = verify(g, col, k)
        if not ok:
            raise TheoryViolation(f"degree-bounded route failed verification: {reason}")
        return col
    finally:
        stats.wall_time += time.perf_counter() - t0


# --- discharge audit ---------------------------------------------------------------

SCENARIOS = {
    "a3-case31": (3, Fraction(3), Fraction(3, 2)),
    "a5-nice": (5, Fraction(5), Fraction(5, 2)),
}


def discharge_audit(state: AlmostEquitableState, scenario: str) -> ChargeReport:
    """Route one unit of charge per edge of g - x and check the totals.

    An edge touching the small class sends everything to its other end;
    an edge joining a vertex of a non-small accessible class to one of its
    solo neighbors sends everything to the blocked end; every other edge
    splits evenly.  Conservation is exact by construction and re-checked.
    In a genuinely stuck state every blocked vertex must collect at least
    3 (resp. 5) and every non-isolated accessible-side vertex at least
    3/2 (resp. 5/2); vertices under those floors are reported.
    """
    if scenario not in SCENARIOS:
        raise InputError(f"unknown scenario {scenario!r}; pick from {sorted(SCENARIOS)}")
    a_req, blocked_floor, side_floor = SCENARIOS[scenario]
    h = access.build_aux(state)
    ap = access.accessible(h, state.small)
    if ap.a != a_req:
        raise InputError(f"scenario {scenario} expects {a_req} accessible classes, got {ap.a}")
    if scenario == "a5-nice" and not moves.is_nice(h, ap):
        raise InputError("scenario a5-nice expects every non-small accessible class to block at most one")

    col = state.coloring
    cls_of = col.class_of
    charge: dict[int, Fraction] = {
        v: Fraction(0) for v in range(state.g.n) if v != state.x
    }
    flow = {"R1": Fraction(0), "R2": Fraction(0), "R3": Fraction(0)}
    half = Fraction(1, 2)

    def is_solo_arm(a_end: int, b_end: int) -> bool:
        # edge from a non-small accessible-class vertex to a solo neighbor
        if cls_of[a_end] == state.small or cls_of[a_end] not in ap.A:
            return False
        if cls_of[b_end] not in ap.B:
            return False
        return sum(1 for w in state.g.adj[b_end] if cls_of[w] == cls_of[a_end]) == 1

    for u, v in state.g.edges():
        if u == state.x or v == state.x:
            continue
        if cls_of[u] == state.small:
            charge[v] += 1
            flow["R1"] += 1
        elif cls_of[v] == state.small:
            charge[u] += 1
            flow["R1"] += 1
        elif is_solo_arm(u, v):
            charge[v] += 1
            flow["R2"] += 1
        elif is_solo_arm(v, u):
            charge[u] += 1
            flow["R2"] += 1
        else:
            charge[u] += half
            charge[v] += half
            flow["R3"] += 1

    total = sum(charge.values(), Fraction(0))
    edge_count = state.g.m - state.g.degree(state.x)
    violations = []
    for v in sorted(charge):
        c = cls_of[v]
        if c in ap.B and charge[v] < blocked_floor:
            violations.append(("blocked", v, charge[v]))
        elif c in ap.A and c != state.small:
            deg_without_x = state.g.degree(v) - (state.x in state.g.adj[v])
            if deg_without_x > 0 and charge[v] < side_floor:
                violations.append(("side", v, charge[v]))
    report = ChargeReport(scenario, charge, flow, total, edge_count, violations)
    if not report.conserved():
        raise TheoryViolation(
            f"charge total {report.total} != edge count {edge_count}"
        )
    return report
