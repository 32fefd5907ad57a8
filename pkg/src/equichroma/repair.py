"""Recoloring move catalogue and the accessibility-expansion driver.

Every move is expressed as a MoveTrace and applied atomically.  Moves that
restructure the coloring are committed only after rebuilding the class
digraph from scratch and confirming the declared improvement; otherwise they
are reverted and the search continues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .access import (
    AccessPartition,
    AuxDigraph,
    accessible,
    blocked_by,
    build_aux,
    d_of_x,
    is_ordinary,
    solo_profile,
    terminal_classes,
    weighted_solo_score,
)
from .coloring import AlmostEquitableState, Coloring, MoveTrace, UNCOLORED, verify
from .errors import InputError, TheoryViolation
from .graph import cut_edges_count

PLACED = "placed"
EXPANDED = "expanded"
NORMALIZED = "normalized"

# restructures allowed to keep |A| flat while relocating the small class
SANCTIONED_RESTRUCTURES = ("solo-exchange-small-swap", "small-lift")


@dataclass
class MoveOutcome:
    kind: str  # PLACED, EXPANDED or NORMALIZED
    trace: MoveTrace
    rule: str
    coloring: Coloring | None = None  # full coloring, PLACED only
    state: AlmostEquitableState | None = None
    a_before: int = 0
    a_after: int = 0


@dataclass
class Stuck:
    """No sanctioned move applies; data for the caller to diagnose."""

    a: int
    details: dict = field(default_factory=dict)


@dataclass
class ChainSpec:
    """Participants of a pivot/partner relocation chain.

    pivot and partner sit in the same accessible class `home`. partner
    crosses into the blocked class `dest`, swap_in (a solo contact of pivot
    inside dest) backfills home, pivot escapes into a blocked class it does
    not touch, a witness cascade runs along `path` to mover's class, and
    mover (a solo contact of partner) completes home.  `witness` is a second
    solo contact of pivot inside dest, non-adjacent to mover, which ends up
    witnessing dest's new arc to home.
    """

    rule: str
    home: int
    pivot: int
    partner: int
    dest: int
    swap_in: int
    mover: int
    witness: int
    path: list[int]  # class route escape .. class(mover), inside B - {dest}


def is_nice(h: AuxDigraph, ap: AccessPartition) -> bool:
    """Every accessible class besides small blocks at most one other."""
    return all(
        len(blocked_by(h, ap, c)) <= 1 for c in ap.A if c != ap.small
    )


def bfs_path(
    h: AuxDigraph, sources: list[int], target: int, forbidden: set[int] = frozenset()
) -> list[int] | None:
    """Shortest arc path from any source to target, avoiding forbidden
    classes; layered BFS with lowest-id tie-breaks."""
    if target in forbidden:
        return None
    parent: dict[int, int | None] = {}
    for s in sorted(sources):
        if s not in forbidden and s not in parent:
            parent[s] = None
    frontier = sorted(parent)
    while frontier and target not in parent:
        nxt = []
        for i in frontier:
            for j in h.out_neighbors(i):
                if j not in parent and j not in forbidden:
                    parent[j] = i
                    nxt.append(j)
        frontier = sorted(set(nxt))
    if target not in parent:
        return None
    path = [target]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def _lowest_witness(h: AuxDigraph, i: int, j: int) -> int:
    wit = h.witnesses_of(i, j)
    if not wit:
        raise InputError(f"arc {i}->{j} has no witness")
    return wit[0]


def _cascade_steps(h: AuxDigraph, path: list[int], trace: MoveTrace) -> None:
    """One witness hops forward along each arc of the class path."""
    for frm, to in zip(path, path[1:]):
        trace.add(_lowest_witness(h, frm, to), frm, to)


def _rebuild(state: AlmostEquitableState) -> tuple[AuxDigraph, AccessPartition]:
    h = build_aux(state)
    return h, accessible(h, state.small)


def _apply_measured(
    state: AlmostEquitableState,
    trace: MoveTrace,
    rule: str,
    a_before: int,
    new_small: int,
    sanction_post=None,
) -> MoveOutcome | None:
    """Apply, recompute accessibility, and commit only on strict growth (or a
    sanctioned small-class relocation whose post-predicate holds)."""
    old_small = state.small
    trace.apply(state.g, state.coloring)
    state.small = new_small
    h2, ap2 = _rebuild(state)
    if ap2.a > a_before:
        return MoveOutcome(
            EXPANDED, trace, rule, state=state, a_before=a_before, a_after=ap2.a
        )
    if (
        rule in SANCTIONED_RESTRUCTURES
        and new_small != old_small
        and ap2.a >= a_before
        and sanction_post is not None
        and sanction_post(h2, ap2)
    ):
        return MoveOutcome(
            EXPANDED, trace, rule, state=state, a_before=a_before, a_after=ap2.a
        )
    trace.revert(state.coloring)
    state.small = old_small
    return None


# --- placement ---------------------------------------------------------------

def cascade_place(
    state: AlmostEquitableState,
    target: int,
    h: AuxDigraph | None = None,
    ap: AccessPartition | None = None,
) -> MoveOutcome:
    """Color x with `target` and shift one witness per arc along the parent
    path so the small class absorbs the surplus."""
    if h is None or ap is None:
        h, ap = _rebuild(state)
    if target not in ap.A or target not in d_of_x(state):
        raise InputError(f"class {target} is not an accessible non-neighbor class of x")
    trace = MoveTrace(tag="cascade")
    path = ap.path_to_small(target)
    _cascade_steps(h, path, trace)
    trace.add(state.x, UNCOLORED, target)
    trace.apply(state.g, state.coloring)
    coloring = state.coloring
    ok, msg = verify(state.g, coloring, coloring.r)
    if not ok:
        raise TheoryViolation(f"cascade produced a bad coloring: {msg}")
    return MoveOutcome(
        PLACED, trace, "cascade", coloring=coloring, a_before=ap.a, a_after=ap.a
    )


# --- solo exchanges ----------------------------------------------------------

def _movable_classmate(
    state: AlmostEquitableState, h: AuxDigraph, ap: AccessPartition, v: int
) -> int | None:
    """Lowest classmate of v with a move into another accessible class."""
    cv = state.coloring.class_of[v]
    best = None
    for j in sorted(ap.A):
        if j == cv:
            continue
        for w in h.witnesses_of(cv, j):
            if w != v and (best is None or w < best):
                best = w
    return best


def exchange_solo_direct(
    state: AlmostEquitableState,
    v: int,
    u: int,
    h: AuxDigraph | None = None,
    ap: AccessPartition | None = None,
) -> MoveOutcome:
    """Swap v with its mutual solo contact u (or, in the two-class corner
    case, lift v into the small class).  Grows the accessible side."""
    if h is None or ap is None:
        h, ap = _rebuild(state)
    col = state.coloring
    vi = col.class_of[v]
    wj = col.class_of[u]
    if vi not in terminal_classes(h, ap):
        raise InputError(f"class {vi} of vertex {v} is not terminal")
    prof = solo_profile(state, ap, v)
    if u not in prof.Qprime:
        raise InputError(f"vertex {u} lacks a non-neighbor among {v}'s solo contacts")
    if h.neighbor_counts[v][wj] != 1:
        raise InputError(f"vertex {v} has several neighbors in class {wj}")
    v_alt = _movable_classmate(state, h, ap, v)
    if v_alt is not None or ap.a == 1:
        trace = MoveTrace(tag="solo-exchange")
        trace.add(v, vi, wj)
        trace.add(u, wj, vi)
        out = _apply_measured(state, trace, "solo-exchange", ap.a, state.small)
        if out is None:
            raise TheoryViolation(
                "solo exchange failed to grow the accessible side",
                dump=_stuck_dump(state, "solo-exchange", v=v, u=u),
            )
        return out
    if ap.a == 2 and h.neighbor_counts[v][ap.small] == 0:
        trace = MoveTrace(tag="solo-exchange-small-swap")
        trace.add(v, vi, ap.small)

        def both_contacts_accessible(h2, ap2):
            return wj in ap2.A and vi in ap2.A

        out = _apply_measured(
            state,
            trace,
            "solo-exchange-small-swap",
            ap.a,
            vi,
            sanction_post=both_contacts_accessible,
        )
        if out is None:
            raise TheoryViolation(
                "small-class swap failed to open the solo contact classes",
                dump=_stuck_dump(state, "solo-exchange-small-swap", v=v, u=u),
            )
        return out
    raise InputError(
        f"vertex {v} has no movable classmate and the two-class fallback is unavailable"
    )


def exchange_solo_via_path(
    state: AlmostEquitableState,
    v: int,
    u: int,
    path: list[int],
    h: AuxDigraph | None = None,
    ap: AccessPartition | None = None,
) -> MoveOutcome:
    """Send v into a blocked class it does not touch, cascade witnesses along
    `path`, and pull u into v's class."""
    if h is None or ap is None:
        h, ap = _rebuild(state)
    col = state.coloring
    vi = col.class_of[v]
    if vi not in terminal_classes(h, ap):
        raise InputError(f"class {vi} of vertex {v} is not terminal")
    prof = solo_profile(state, ap, v)
    if u not in prof.Qprime:
        raise InputError(f"vertex {u} lacks a non-neighbor among {v}'s solo contacts")
    if len(path) < 2 or path[0] not in prof.F0 or path[-1] != col.class_of[u]:
        raise InputError("path must run from an untouched blocked class to u's class")
    for frm, to in zip(path, path[1:]):
        if not h.has_arc(frm, to):
            raise InputError(f"path arc {frm}->{to} missing")
    if not is_ordinary(state, h, ap, v):
        raise InputError(f"vertex {v} is not ordinary")
    trace = MoveTrace(tag="solo-path-exchange")
    trace.add(v, vi, path[0])
    _cascade_steps(h, path, trace)
    trace.add(u, path[-1], vi)
    out = _apply_measured(state, trace, "solo-path-exchange", ap.a, state.small)
    if out is None:
        raise TheoryViolation(
            "solo path exchange failed to grow the accessible side",
            dump=_stuck_dump(state, "solo-path-exchange", v=v, u=u, path=path),
        )
    return out


def _solo_candidates(state, h, ap):
    """Terminal-class vertices paired with exchangeable solo contacts, in
    (class, vertex, contact) order."""
    col = state.coloring
    for vi in sorted(terminal_classes(h, ap)):
        for v in col.members_sorted(vi):
            prof = solo_profile(state, ap, v)
            if not prof.Qprime:
                continue
            yield v, prof


def find_exchange_solo_direct(state, h, ap) -> MoveOutcome | None:
    col = state.coloring
    for v, prof in _solo_candidates(state, h, ap):
        vi = col.class_of[v]
        v_alt = _movable_classmate(state, h, ap, v)
        for u in sorted(prof.Qprime):
            if h.neighbor_counts[v][col.class_of[u]] != 1:
                continue
            if v_alt is not None or ap.a == 1:
                return exchange_solo_direct(state, v, u, h, ap)
            if ap.a == 2 and h.neighbor_counts[v][ap.small] == 0 and vi != ap.small:
                return exchange_solo_direct(state, v, u, h, ap)
    return None


def find_exchange_solo_via_path(state, h, ap) -> MoveOutcome | None:
    col = state.coloring
    for v, prof in _solo_candidates(state, h, ap):
        if not prof.F0:
            continue
        if not is_ordinary(state, h, ap, v):
            continue
        sources = sorted(prof.F0)
        for u in sorted(prof.Qprime):
            path = bfs_path(h, sources, col.class_of[u])
            if path is None:
                continue
            # if the partner's class sits inside the path, swap roles so the
            # chain ends at the first of the pair it reaches
            partner = min(
                (w for w in prof.Q if w != u and w not in state.g.adj[u]),
                default=None,
            )
            if partner is None:
                continue
            interior = path[:-1]
            if col.class_of[partner] in interior:
                u, partner = partner, u
                path = path[: interior.index(col.class_of[u]) + 1]
            return exchange_solo_via_path(state, v, u, path, h, ap)
    return None


# --- two-for-one swap --------------------------------------------------------

def two_for_one_swap(
    state: AlmostEquitableState,
    v: int,
    w: int,
    w2: int,
    h: AuxDigraph | None = None,
    ap: AccessPartition | None = None,
) -> AlmostEquitableState:
    """Trade v (small class) for its exactly-two solo contacts w, w2 in their
    class; that class, one short, becomes the new small class."""
    if h is None or ap is None:
        h, ap = _rebuild(state)
    col = state.coloring
    if col.class_of[v] != ap.small:
        raise InputError(f"vertex {v} is not in the small class")
    t = col.class_of[w]
    if col.class_of[w2] != t or w == w2:
        raise InputError("the two contacts must be distinct classmates")
    if {u for u in state.g.adj[v] if col.class_of[u] == t} != {w, w2}:
        raise InputError(f"vertex {v} must touch class {t} exactly at {w} and {w2}")
    prof = solo_profile(state, ap, v)
    if w not in prof.Q or w2 not in prof.Q:
        raise InputError("both contacts must be solo neighbors of v")
    trace = MoveTrace(tag="two-for-one")
    trace.add(w, t, ap.small)
    trace.add(w2, t, ap.small)
    trace.add(v, ap.small, t)
    trace.apply(state.g, state.coloring)
    state.small = t
    state.validate()
    state._last_trace = trace  # for the finder's revert/commit bookkeeping
    return state


def find_two_for_one(state, h, ap) -> MoveOutcome | None:
    col = state.coloring
    g = state.g
    order = sorted(
        col.members_sorted(ap.small),
        key=lambda v: (-weighted_solo_score(state, ap, v), v),
    )
    for v in order:
        prof = solo_profile(state, ap, v)
        by_class: dict[int, list[int]] = {}
        for u in sorted(prof.Q):
            by_class.setdefault(col.class_of[u], []).append(u)
        for t in sorted(by_class):
            pair = by_class[t]
            if len(pair) != 2 or sum(1 for u in g.adj[v] if col.class_of[u] == t) != 2:
                continue
            old_small = ap.small
            st = two_for_one_swap(state, v, pair[0], pair[1], h, ap)
            trace = st._last_trace
            if all(col.class_of[u] != t for u in g.adj[st.x]):
                trace.add(st.x, UNCOLORED, t)
                st.coloring.assign(st.x, t)
                ok, msg = verify(g, st.coloring, st.coloring.r)
                if not ok:
                    raise TheoryViolation(f"two-for-one placement invalid: {msg}")
                return MoveOutcome(
                    PLACED, trace, "two-for-one", coloring=st.coloring,
                    a_before=ap.a, a_after=ap.a,
                )
            _, ap2 = _rebuild(st)
            if ap2.a > ap.a:
                return MoveOutcome(
                    EXPANDED, trace, "two-for-one", state=st,
                    a_before=ap.a, a_after=ap2.a,
                )
            trace.revert(st.coloring)
            st.small = old_small
    return None


# --- relocation chains -------------------------------------------------------

def chain_relocate(
    state: AlmostEquitableState,
    spec: ChainSpec,
    h: AuxDigraph | None = None,
    ap: AccessPartition | None = None,
) -> MoveOutcome:
    if h is None or ap is None:
        h, ap = _rebuild(state)
    out = _try_chain(state, spec, h, ap)
    if out is None:
        raise TheoryViolation(
            "relocation chain failed to grow the accessible side",
            dump=_stuck_dump(state, spec.rule, spec=spec.__dict__),
        )
    return out


def _try_chain(state, spec: ChainSpec, h, ap) -> MoveOutcome | None:
    col = state.coloring
    g = state.g
    cnt = h.neighbor_counts
    if spec.home not in ap.A:
        raise InputError("chain home class must be accessible")
    if col.class_of[spec.pivot] != spec.home or col.class_of[spec.partner] != spec.home:
        raise InputError("pivot and partner must share the home class")
    if spec.pivot == spec.partner:
        raise InputError("pivot and partner must differ")
    if spec.dest not in ap.B or cnt[spec.partner][spec.dest] != 0:
        raise InputError("partner must have a blocked destination class it does not touch")
    prof_pivot = solo_profile(state, ap, spec.pivot)
    prof_partner = solo_profile(state, ap, spec.partner)
    for z in (spec.swap_in, spec.witness):
        if z not in prof_pivot.Q or col.class_of[z] != spec.dest:
            raise InputError("swap_in and witness must be pivot solo contacts in dest")
    if spec.swap_in == spec.witness:
        raise InputError("swap_in and witness must differ")
    if spec.mover not in prof_partner.Q:
        raise InputError("mover must be a solo contact of partner")
    end = col.class_of[spec.mover]
    if end == spec.dest or spec.path[-1] != end:
        raise InputError("mover's class must terminate the path outside dest")
    if spec.path[0] not in prof_pivot.F0 or spec.path[0] == spec.dest:
        raise InputError("path must start at a blocked class untouched by pivot")
    if len(set(spec.path)) != len(spec.path) or spec.dest in spec.path:
        raise InputError("path must be simple and avoid dest")
    for frm, to in zip(spec.path, spec.path[1:]):
        if not h.has_arc(frm, to):
            raise InputError(f"path arc {frm}->{to} missing")
    if spec.swap_in in g.adj[spec.mover] or spec.witness in g.adj[spec.mover]:
        raise InputError("mover must avoid both of pivot's dest contacts")
    trace = MoveTrace(tag=spec.rule)
    trace.add(spec.partner, spec.home, spec.dest)
    trace.add(spec.swap_in, spec.dest, spec.home)
    trace.add(spec.pivot, spec.home, spec.path[0])
    _cascade_steps(h, spec.path, trace)
    trace.add(spec.mover, end, spec.home)
    return _apply_measured(state, trace, spec.rule, ap.a, state.small)


def _find_chain(state, h, ap, home: int, rule: str) -> MoveOutcome | None:
    col = state.coloring
    g = state.g
    cnt = h.neighbor_counts
    members = col.members_sorted(home)
    if len(members) < 2:
        return None
    profiles = {v: solo_profile(state, ap, v) for v in members}
    order = sorted(members, key=lambda v: (-weighted_solo_score(state, ap, v), v))
    for pivot in order:
        solos_by_dest: dict[int, list[int]] = {}
        for z in sorted(profiles[pivot].Q):
            solos_by_dest.setdefault(col.class_of[z], []).append(z)
        f0_pivot = profiles[pivot].F0
        if not f0_pivot:
            continue
        for partner in order:
            if partner == pivot:
                continue
            for dest in sorted(solos_by_dest):
                if cnt[partner][dest] != 0 or len(solos_by_dest[dest]) < 2:
                    continue
                sources = sorted(f0_pivot - {dest})
                if not sources:
                    continue
                for mover in sorted(profiles[partner].Q):
                    end = col.class_of[mover]
                    if end == dest:
                        continue
                    free = [z for z in solos_by_dest[dest] if z not in g.adj[mover]]
                    if len(free) < 2:
                        continue
                    path = bfs_path(h, sources, end, forbidden={dest})
                    if path is None:
                        continue
                    spec = ChainSpec(
                        rule=rule, home=home, pivot=pivot, partner=partner,
                        dest=dest, swap_in=free[0], mover=mover,
                        witness=free[1], path=path,
                    )
                    out = _try_chain(state, spec, h, ap)
                    if out is not None:
                        return out
    return None


def find_chain_from_small(state, h, ap) -> MoveOutcome | None:
    return _find_chain(state, h, ap, ap.small, "chain:small")


def find_chain_from_side(state, h, ap) -> MoveOutcome | None:
    for home in sorted(ap.A):
        if home == ap.small:
            continue
        out = _find_chain(state, h, ap, home, "chain:side")
        if out is not None:
            return out
    return None


# --- bulk swap (two-class balance breaker) -----------------------------------

def find_bulk_swap(state, h, ap) -> MoveOutcome | None:
    """Free a blocked vertex z whose only contacts in the non-small
    accessible class are movable: swap those contacts out for movable
    small-class vertices that avoid z."""
    if ap.a != 2:
        return None
    col = state.coloring
    g = state.g
    other = next(c for c in ap.A if c != ap.small)
    m_other = sorted(h.witnesses_of(other, ap.small))
    m_small = sorted(h.witnesses_of(ap.small, other))
    if not m_other:
        return None
    blocked_vertices = sorted(v for c in ap.B for v in col.classes[c])
    for z in blocked_vertices:
        contacts = {u for u in g.adj[z] if col.class_of[u] == other}
        if not contacts or not contacts.issubset(m_other):
            continue
        pool = [u for u in m_small if u not in g.adj[z]]
        if len(pool) < len(contacts):
            continue
        take = pool[: len(contacts)]
        trace = MoveTrace(tag="bulk-swap")
        for k in sorted(contacts):
            trace.add(k, other, ap.small)
        for l in take:
            trace.add(l, ap.small, other)
        out = _apply_measured(state, trace, "bulk-swap", ap.a, state.small)
        if out is not None:
            return out
    return None


# --- normalizations ----------------------------------------------------------

def normalize_movable_balance(state: AlmostEquitableState) -> MoveOutcome:
    """With two accessible classes, keep the into-small movable pool at most
    one larger than the out-of-small pool (relabeling small if needed)."""
    h, ap = _rebuild(state)
    if ap.a != 2:
        raise InputError("movable balance applies only with two accessible classes")
    other = next(c for c in ap.A if c != ap.small)
    m1 = h.witnesses_of(ap.small, other)
    m2 = h.witnesses_of(other, ap.small)
    if len(m2) <= len(m1) + 1:
        return MoveOutcome(
            NORMALIZED, MoveTrace(tag="balance"), "balance",
            state=state, a_before=ap.a, a_after=ap.a,
        )
    v = m2[0]
    trace = MoveTrace(tag="balance")
    trace.add(v, other, ap.small)
    trace.apply(state.g, state.coloring)
    state.small = other
    state.validate()
    h2, ap2 = _rebuild(state)
    if ap2.a > ap.a:
        return MoveOutcome(
            EXPANDED, trace, "balance", state=state, a_before=ap.a, a_after=ap2.a
        )
    other2 = next(c for c in ap2.A if c != state.small)
    m1b = h2.witnesses_of(state.small, other2)
    m2b = h2.witnesses_of(other2, state.small)
    if ap2.a < ap.a or len(m2b) > len(m1b) + 1:
        raise TheoryViolation(
            "movable-balance move failed to even out the pools",
            dump=_stuck_dump(state, "balance", m1=m1b, m2=m2b),
        )
    return MoveOutcome(
        NORMALIZED, trace, "balance", state=state, a_before=ap.a, a_after=ap2.a
    )


def normalize_terminal_pair(state: AlmostEquitableState) -> MoveOutcome:
    """With three accessible classes, make both non-small ones terminal by
    lifting one witness of the blocker into the small class."""
    h, ap = _rebuild(state)
    if ap.a != 3:
        raise InputError("terminal-pair normalization applies only at three classes")
    terminal = terminal_classes(h, ap)
    nonsmall = sorted(c for c in ap.A if c != ap.small)
    if all(c in terminal for c in nonsmall):
        return MoveOutcome(
            NORMALIZED, MoveTrace(tag="terminal-pair"), "terminal-pair",
            state=state, a_before=ap.a, a_after=ap.a,
        )
    blocker = next(c for c in nonsmall if c not in terminal)
    v = _lowest_witness(h, blocker, ap.small)
    trace = MoveTrace(tag="terminal-pair")
    trace.add(v, blocker, ap.small)
    trace.apply(state.g, state.coloring)
    state.small = blocker
    state.validate()
    h2, ap2 = _rebuild(state)
    if ap2.a > ap.a:
        return MoveOutcome(
            EXPANDED, trace, "terminal-pair", state=state,
            a_before=ap.a, a_after=ap2.a,
        )
    if ap2.a < ap.a:
        raise TheoryViolation(
            "terminal-pair lift lost accessible classes",
            dump=_stuck_dump(state, "terminal-pair"),
        )
    still_bad = [
        c for c in ap2.A
        if c != ap2.small and c not in terminal_classes(h2, ap2)
    ]
    if still_bad:
        raise TheoryViolation(
            "terminal-pair lift left a blocking class",
            dump=_stuck_dump(state, "terminal-pair", blocking=still_bad),
        )
    return MoveOutcome(
        NORMALIZED, trace, "terminal-pair", state=state,
        a_before=ap.a, a_after=ap2.a,
    )


def make_nice(state: AlmostEquitableState) -> MoveOutcome:
    """At five accessible classes, relocate witnesses into the small class
    until no accessible class blocks two others."""
    h, ap = _rebuild(state)
    if ap.a != 5:
        raise InputError("nice normalization applies only at five accessible classes")
    if is_nice(h, ap):
        return MoveOutcome(
            NORMALIZED, MoveTrace(tag="nice"), "nice",
            state=state, a_before=ap.a, a_after=ap.a,
        )
    combined = MoveTrace(tag="nice")
    seen = {state.snapshot_key()}

    def attempt(depth: int, cur_h, cur_ap) -> MoveOutcome | None:
        if depth >= 3:
            return None
        cands = sorted(
            (c for c in cur_ap.A if c != cur_ap.small and cur_h.has_arc(c, cur_ap.small)),
            key=lambda c: (-len(blocked_by(cur_h, cur_ap, c)), c),
        )
        for c in cands:
            w = _lowest_witness(cur_h, c, cur_ap.small)
            step = MoveTrace(tag="nice")
            step.add(w, c, cur_ap.small)
            old_small = state.small
            step.apply(state.g, state.coloring)
            state.small = c
            key = state.snapshot_key()
            if key in seen:
                step.revert(state.coloring)
                state.small = old_small
                continue
            seen.add(key)
            h2, ap2 = _rebuild(state)
            if ap2.a > ap.a:
                combined.steps.extend(step.steps)
                return MoveOutcome(
                    EXPANDED, combined, "nice", state=state,
                    a_before=ap.a, a_after=ap2.a,
                )
            if ap2.a == ap.a:
                if is_nice(h2, ap2):
                    combined.steps.extend(step.steps)
                    return MoveOutcome(
                        NORMALIZED, combined, "nice", state=state,
                        a_before=ap.a, a_after=ap2.a,
                    )
                deeper = attempt(depth + 1, h2, ap2)
                if deeper is not None:
                    combined.steps[:0] = step.steps
                    return deeper
            step.revert(state.coloring)
            state.small = old_small
        return None

    out = attempt(0, h, ap)
    if out is not None:
        return out
    raise TheoryViolation(
        "could not reorganize the accessible side into a nice shape",
        dump=_stuck_dump(state, "nice", cuts=_cut_certificate(state)),
    )


# --- a=5 placement через solo contacts ---------------------------------------

def solo_assisted_place(state, h, ap) -> MoveOutcome | None:
    """Nice five-class endgame: route x through a blocked class whose solo
    contact frees a seat, or swap the solo vertex sideways for growth."""
    if ap.a != 5 or not is_nice(h, ap):
        return None
    col = state.coloring
    g = state.g
    cnt = h.neighbor_counts
    for vi in sorted(ap.A):
        if vi == ap.small:
            continue
        for v in col.members_sorted(vi):
            prof = solo_profile(state, ap, v)
            if not prof.Q:
                continue
            targets = [j for j in sorted(ap.A) if j != vi and cnt[v][j] == 0]
            if not targets:
                continue
            for vj in targets:
                path = bfs_path(h, [vj], ap.small, forbidden={vi})
                for u in sorted(prof.Q):
                    w_cls = col.class_of[u]
                    if path is not None and cnt[state.x][w_cls] == 0:
                        trace = MoveTrace(tag="solo-place")
                        trace.add(v, vi, vj)
                        trace.add(u, w_cls, vi)
                        trace.add(state.x, UNCOLORED, w_cls)
                        _cascade_steps(h, path, trace)
                        trace.apply(g, state.coloring)
                        ok, msg = verify(g, state.coloring, col.r)
                        if not ok:
                            raise TheoryViolation(f"solo-assisted placement invalid: {msg}")
                        return MoveOutcome(
                            PLACED, trace, "solo-place", coloring=state.coloring,
                            a_before=ap.a, a_after=ap.a,
                        )
                    for v2 in h.witnesses_of(vj, vi):
                        if v2 == v or v2 in g.adj[u]:
                            continue
                        trace = MoveTrace(tag="solo-place")
                        trace.add(v, vi, vj)
                        trace.add(v2, vj, vi)
                        out = _apply_measured(
                            state, trace, "solo-place", ap.a, state.small
                        )
                        if out is not None:
                            return out
                        break  # one sideways try per (v, vj, u)
    return None


# --- three-class probes --------------------------------------------------------

def find_lm5_probe(state, h, ap) -> MoveOutcome | None:
    """Three-class shuffle: a solo-contact vertex hops to the sibling class
    whose witness vacates into the small class."""
    if ap.a != 3:
        return None
    col = state.coloring
    cnt = h.neighbor_counts
    nonsmall = sorted(c for c in ap.A if c != ap.small)
    for vi in nonsmall:
        sibling = next(c for c in nonsmall if c != vi)
        for v in col.members_sorted(vi):
            if cnt[v][sibling] != 0:
                continue
            if not solo_profile(state, ap, v).Q:
                continue
            for v2 in h.witnesses_of(sibling, ap.small):
                trace = MoveTrace(tag="lm5-probe")
                trace.add(v2, sibling, ap.small)
                trace.add(v, vi, sibling)
                out = _apply_measured(state, trace, "lm5-probe", ap.a, vi)
                if out is not None:
                    return out
    return None


def find_small_lift(state, h, ap) -> MoveOutcome | None:
    """Lift a solo-contact vertex of a non-small class into the small class;
    sanctioned when the freed class and the contact's class both open up."""
    if ap.a != 3:
        return None
    col = state.coloring
    cnt = h.neighbor_counts
    for vi in sorted(ap.A):
        if vi == ap.small:
            continue
        for v in col.members_sorted(vi):
            if cnt[v][ap.small] != 0:
                continue
            prof = solo_profile(state, ap, v)
            if not prof.Q:
                continue
            contact_classes = {col.class_of[u] for u in prof.Q}
            trace = MoveTrace(tag="small-lift")
            trace.add(v, vi, ap.small)

            def opened(h2, ap2, _cc=contact_classes):
                return bool(_cc & ap2.A)

            out = _apply_measured(
                state, trace, "small-lift", ap.a, vi, sanction_post=opened
            )
            if out is not None:
                return out
    return None


def witness_probe(state, h, ap) -> MoveOutcome | None:
    """Last resort: try each witness hop into the small class, keeping only
    strict growth."""
    for c in sorted(ap.A):
        if c == ap.small or not h.has_arc(c, ap.small):
            continue
        for w in h.witnesses_of(c, ap.small):
            trace = MoveTrace(tag="probe")
            trace.add(w, c, ap.small)
            out = _apply_measured(state, trace, "probe", ap.a, c)
            if out is not None:
                return out
    return None


# --- driver -------------------------------------------------------------------

def expand_accessibility(
    state: AlmostEquitableState, audit_log: list | None = None
) -> MoveOutcome | Stuck:
    """One expansion attempt, trying move families in fixed priority order."""
    h, ap = _rebuild(state)
    if set(d_of_x(state)) & ap.A:
        raise InputError("a placement class is available; cascade instead")
    nice_failure = None

    outcome = None
    if ap.a == 3:
        probe = normalize_terminal_pair(state)
        if probe.trace.steps:
            outcome = probe
    elif ap.a == 2:
        probe = normalize_movable_balance(state)
        if probe.trace.steps:
            outcome = probe
    elif ap.a == 5 and not is_nice(h, ap):
        try:
            probe = make_nice(state)
            if probe.trace.steps:
                outcome = probe
        except TheoryViolation as exc:
            nice_failure = exc

    if outcome is None:
        h, ap = _rebuild(state)
        finders = [find_exchange_solo_direct, find_exchange_solo_via_path]
        if ap.a == 1:
            finders += [find_two_for_one, find_chain_from_small]
        elif ap.a == 2:
            finders += [find_bulk_swap, find_chain_from_side]
        elif ap.a == 3:
            finders += [find_lm5_probe, find_small_lift]
        elif ap.a == 5:
            finders += [solo_assisted_place]
        finders += [witness_probe]
        for finder in finders:
            outcome = finder(state, h, ap)
            if outcome is not None:
                break

    if outcome is None:
        details = {"arcs": len(h.witnesses), "terminal": sorted(terminal_classes(h, ap))}
        if nice_failure is not None:
            details["nice_failure"] = str(nice_failure)
            details.update(nice_failure.dump)
        return Stuck(a=ap.a, details=details)
    if audit_log is not None:
        audit_log.append(
            {
                "rule": outcome.rule,
                "kind": outcome.kind,
                "a_before": outcome.a_before,
                "a_after": outcome.a_after,
                "steps": [(s.vertex, s.src, s.dst) for s in outcome.trace.steps],
            }
        )
    return outcome


# --- diagnostics ---------------------------------------------------------------

def _cut_certificate(state: AlmostEquitableState) -> dict:
    col = state.coloring
    pairs = {}
    for i in range(col.r):
        for j in range(i + 1, col.r):
            pairs[f"{i}-{j}"] = cut_edges_count(state.g, col.classes[i], col.classes[j])
    return {"pair_cuts": pairs}


def _stuck_dump(state: AlmostEquitableState, rule: str, **extra) -> dict:
    col = state.coloring
    return {
        "rule": rule,
        "small": state.small,
        "x": state.x,
        "classes": [col.members_sorted(c) for c in range(col.r)],
        **extra,
    }
