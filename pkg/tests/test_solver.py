"""End-to-end solver, divisibility round-trips, and the charge auditor."""

import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import craft
from equichroma.access import accessible, build_aux
from equichroma.coloring import AlmostEquitableState, Coloring, verify
from equichroma.errors import InputError, TheoryViolation
from equichroma.generators import GenSpec, gen
from equichroma.graph import Graph, NONNEG_EULER, PLANAR
from equichroma.solver import (
    SolverConfig,
    SolverStats,
    claim_checks,
    discharge_audit,
    equitable_color,
    hs_equitable,
    reduce_divisibility,
    repair,
    restore_coloring,
    solve_divisible,
)

PROPERTY_SETTINGS = settings(
    max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)

RULE_TAGS = {
    "cascade", "solo-exchange", "solo-exchange-small-swap", "solo-path-exchange",
    "two-for-one", "chain:small", "chain:side", "bulk-swap", "balance",
    "terminal-pair", "nice", "solo-place", "lm5-probe", "small-lift", "probe",
}

ICOSAHEDRON = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5),
    (1, 2), (2, 3), (3, 4), (4, 5), (5, 1),
    (1, 6), (2, 6), (2, 7), (3, 7), (3, 8), (4, 8), (4, 9), (5, 9), (5, 10), (1, 10),
    (6, 7), (7, 8), (8, 9), (9, 10), (10, 6),
    (6, 11), (7, 11), (8, 11), (9, 11), (10, 11),
]


def complete_graph(n):
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def checked(g, col, r):
    ok, reason = verify(g, col, r)
    assert ok, reason
    return col


class TestReduceDivisibility:
    def test_identity(self):
        g = gen(GenSpec("planar-degree-bounded", 16, delta_cap=8, seed=1))
        g2, plan = reduce_divisibility(g, 8)
        assert plan.kind == "identity" and g2 is g

    def test_pad_adds_clique(self):
        g = gen(GenSpec("planar-degree-bounded", 14, delta_cap=8, seed=2))
        g2, plan = reduce_divisibility(g, 8)
        assert plan.kind == "pad" and plan.added == 2
        assert g2.n == 16 and g2.has_edge(14, 15)

    def test_strip_reaches_divisibility(self):
        g = gen(GenSpec("planar-degree-bounded", 11, delta_cap=8, seed=3))
        g2, plan = reduce_divisibility(g, 8)
        assert plan.kind == "strip" and len(plan.stripped) == 3
        assert g2.n == 8 and g2.n % 8 == 0

    def test_strip_restore_round_trip(self):
        g = gen(GenSpec("planar-degree-bounded", 11, delta_cap=8, seed=3))
        g2, plan = reduce_divisibility(g, 8)
        col2 = solve_divisible(g2, SolverConfig(r=8))
        col = restore_coloring(g, plan, col2)
        checked(g, col, 8)

    def test_dense_core_has_no_strip_order(self):
        with pytest.raises(InputError):
            reduce_divisibility(complete_graph(9), 8)

    @given(n=st.integers(9, 40), seed=st.integers(0, 500))
    @PROPERTY_SETTINGS
    def test_round_trip_all_remainders(self, n, seed):
        g = gen(GenSpec("planar-degree-bounded", n, delta_cap=8, seed=seed))
        g2, plan = reduce_divisibility(g, 8)
        assert g2.n % 8 == 0
        col2 = solve_divisible(g2, SolverConfig(r=8))
        col = restore_coloring(g, plan, col2)
        checked(g, col, 8)


class TestSolveDivisible:
    def test_rejects_indivisible(self):
        with pytest.raises(InputError):
            solve_divisible(Graph(10), SolverConfig(r=8))

    def test_rejects_degree_overflow(self):
        g = Graph.from_edges(16, [(0, v) for v in range(1, 10)])
        with pytest.raises(InputError):
            solve_divisible(g, SolverConfig(r=8))

    def test_empty_graph(self):
        col = solve_divisible(Graph(0), SolverConfig(r=8))
        assert col.sizes() == [0] * 8

    def test_edgeless_sixteen(self):
        col = solve_divisible(Graph(16), SolverConfig(r=8))
        assert col.sizes() == [2] * 8

    def test_planar_instance_verifies(self):
        g = gen(GenSpec("planar-degree-bounded", 48, delta_cap=8, seed=4))
        checked(g, solve_divisible(g, SolverConfig(r=8)), 8)

    def test_six_regular_delegates(self):
        g = gen(GenSpec("toroidal-6-regular", 36))
        stats = SolverStats()
        col = solve_divisible(g, SolverConfig(r=9, surface=NONNEG_EULER), stats)
        checked(g, col, 9)
        assert stats.hs_calls == 1


class TestEquitableColor:
    def test_edgeless(self):
        col = equitable_color(Graph(16), SolverConfig(r=8))
        assert col.sizes() == [2] * 8

    def test_icosahedron_pads_to_sixteen(self):
        g = Graph.from_edges(12, ICOSAHEDRON)
        assert g.max_degree() == 5 and g.m == 30
        checked(g, equitable_color(g, SolverConfig(r=8)), 8)

    def test_icosahedron_nonneg_euler(self):
        g = Graph.from_edges(12, ICOSAHEDRON)
        checked(g, equitable_color(g, SolverConfig(r=9, surface=NONNEG_EULER)), 9)

    def test_clique_plus_path_strips(self):
        edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
        edges += [(v, v + 1) for v in range(4, 9)]
        g = Graph.from_edges(10, edges)
        col = checked(g, equitable_color(g, SolverConfig(r=8)), 8)
        assert sorted(col.sizes()) == [1, 1, 1, 1, 1, 1, 2, 2]

    def test_k9_rejected(self):
        with pytest.raises(InputError):
            equitable_color(complete_graph(9), SolverConfig(r=8))

    def test_k88_rejected(self):
        g = Graph.from_edges(16, [(u, v) for u in range(8) for v in range(8, 16)])
        with pytest.raises(InputError):
            equitable_color(g, SolverConfig(r=8))

    def test_degree_above_r_rejected(self):
        star = Graph.from_edges(10, [(0, v) for v in range(1, 10)])
        with pytest.raises(InputError):
            equitable_color(star, SolverConfig(r=8))

    def test_small_r_reroutes_when_degree_allows(self):
        g = gen(GenSpec("planar-degree-bounded", 20, delta_cap=5, seed=5))
        stats = SolverStats()
        checked(g, equitable_color(g, SolverConfig(r=7), stats), 7)
        assert stats.hs_calls >= 1

    def test_small_r_rejected_when_degree_too_high(self):
        g = gen(GenSpec("planar-degree-bounded", 20, delta_cap=8, seed=6))
        assert g.max_degree() == 8
        with pytest.raises(InputError):
            equitable_color(g, SolverConfig(r=7))

    def test_oracle_cross_check_passes(self):
        g = gen(GenSpec("planar-degree-bounded", 12, delta_cap=8, seed=7))
        cfg = SolverConfig(r=8, oracle_cross_check_max_n=12)
        checked(g, equitable_color(g, cfg), 8)

    def test_stats_populated(self):
        g = gen(GenSpec("planar-degree-bounded", 40, delta_cap=8, seed=8))
        stats = SolverStats()
        checked(g, equitable_color(g, SolverConfig(r=8), stats), 8)
        assert stats.edge_insertions == g.m
        assert stats.wall_time > 0
        assert set(stats.expansions) <= RULE_TAGS

    def test_order_robust(self):
        base = gen(GenSpec("planar-degree-bounded", 30, delta_cap=8, seed=9))
        reference = equitable_color(base, SolverConfig(r=8)).key()
        rng = random.Random(0)
        for _ in range(10):
            edges = base.edges()
            rng.shuffle(edges)
            g = Graph.from_edges(30, edges)
            assert equitable_color(g, SolverConfig(r=8)).key() == reference

    def test_audit_collects_no_claim_violations(self):
        g = gen(GenSpec("planar-degree-bounded", 40, delta_cap=8, seed=10))
        stats = SolverStats()
        checked(g, equitable_color(g, SolverConfig(r=8, audit=True), stats), 8)
        assert stats.claim_violations == []


class TestRepair:
    def test_completes_crafted_states(self):
        for seed in range(6):
            state = craft.sealed_state(8, 2, 3, seed)
            g = state.g
            col = repair(state, SolverConfig(r=8))
            checked(g, col, 8)

    def test_x_degree_bound_enforced(self):
        state = craft.sealed_state(8, 2, 3, 1)
        extra = [v for v in range(state.g.n)
                 if v != state.x and not state.g.has_edge(state.x, v)]
        while state.g.degree(state.x) <= 5:
            state.g.add_edge(state.x, extra.pop())
        with pytest.raises(InputError):
            repair(state, SolverConfig(r=8))

    def test_placement_is_proper_at_x(self):
        state = craft.sealed_state(8, 2, 4, 2)
        g, x = state.g, state.x
        col = repair(state, SolverConfig(r=8))
        assert all(col.class_of[u] != col.class_of[x] for u in g.adj[x])


class TestHsEquitable:
    def test_c5_three_classes(self):
        g = Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
        col = checked(g, hs_equitable(g, 3), 3)
        assert sorted(col.sizes()) == [1, 2, 2]

    def test_degree_precondition(self):
        g = Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
        with pytest.raises(InputError):
            hs_equitable(g, 2)

    def test_k9_needs_nine(self):
        col = checked(complete_graph(9), hs_equitable(complete_graph(9), 9), 9)
        assert col.sizes() == [1] * 9

    def test_toroidal_at_nine(self):
        g = gen(GenSpec("toroidal-6-regular", 36))
        checked(g, hs_equitable(g, 9), 9)

    def test_padded_odd_order(self):
        checked(complete_graph(7), hs_equitable(complete_graph(7), 8), 8)

    def test_er_instance(self):
        g = gen(GenSpec("erdos-renyi-capped", 40, delta_cap=5, seed=11))
        checked(g, hs_equitable(g, 6), 6)

    def test_deterministic(self):
        g = gen(GenSpec("erdos-renyi-capped", 30, delta_cap=5, seed=12))
        assert hs_equitable(g, 6).key() == hs_equitable(g, 6).key()


class TestDischargeAudit:
    def test_conservation_and_flows_a3(self):
        state = craft.fixture_three_direct()
        report = discharge_audit(state, "a3-case31")
        assert report.conserved()
        g, x, col = state.g, state.x, state.coloring
        h = build_aux(state)
        ap = accessible(h, state.small)
        r1 = r2 = r3 = 0
        for u, v in g.edges():
            if x in (u, v):
                continue
            if state.small in (col.class_of[u], col.class_of[v]):
                r1 += 1
            elif _solo_edge(state, ap, u, v):
                r2 += 1
            else:
                r3 += 1
        assert report.rule_flow == {
            "R1": Fraction(r1), "R2": Fraction(r2), "R3": Fraction(r3)
        }
        assert report.edge_count == r1 + r2 + r3

    def test_crafted_a3_state_meets_floors(self):
        report = discharge_audit(craft.audit_side_state(), "a3-case31")
        assert report.violations == []
        # hand count: 6 small-touching edges, 8 solo arms, 1 owner-owner edge
        assert report.rule_flow == {
            "R1": Fraction(6), "R2": Fraction(8), "R3": Fraction(1)
        }
        assert report.total == report.edge_count == 15
        assert report.charge[6] == Fraction(3)
        assert report.charge[2] == Fraction(3, 2)

    def test_nice_five_state_meets_floors(self):
        report = discharge_audit(craft.audit_nice_state(), "a5-nice")
        assert report.conserved() and report.violations == []
        assert report.rule_flow == {
            "R1": Fraction(10), "R2": Fraction(24), "R3": Fraction(6)
        }
        assert report.total == report.edge_count == 40
        assert all(report.charge[u] == Fraction(5) for u in range(10, 16))
        assert all(report.charge[o] == Fraction(5, 2) for o in (2, 4, 6, 8))

    def test_decorated_nice_states_keep_floors(self):
        for seed in range(8):
            report = discharge_audit(craft.audit_nice_state(9, 3, seed), "a5-nice")
            assert report.conserved()
            assert report.violations == []

    def test_scenario_mismatch(self):
        with pytest.raises(InputError):
            discharge_audit(craft.fixture_three_direct(), "a5-nice")

    def test_unknown_scenario(self):
        with pytest.raises(InputError):
            discharge_audit(craft.fixture_three_direct(), "a4-anything")

    @given(seed=st.integers(0, 300))
    @PROPERTY_SETTINGS
    def test_conservation_property(self, seed):
        state = craft.sealed_state(6, 2, 3, seed)
        h = build_aux(state)
        ap = accessible(h, state.small)
        if ap.a != 3:
            return
        report = discharge_audit(state, "a3-case31")
        assert report.conserved()
        assert report.total == state.g.m - state.g.degree(state.x)


def _solo_edge(state, ap, u, v):
    col = state.coloring.class_of

    def arm(a, b):
        return (
            col[a] in ap.A
            and col[a] != state.small
            and col[b] in ap.B
            and sum(1 for w in state.g.adj[b] if col[w] == col[a]) == 1
        )

    return arm(u, v) or arm(v, u)


class TestClaimChecks:
    def test_clean_on_crafted_state(self):
        state = craft.fixture_three_direct()
        assert claim_checks(state, surface=PLANAR) == []

    def test_flags_spread_failure(self):
        # vertex 0 gets 5 solo contacts, two of which (6 and 9) are adjacent
        # to every other one, so the spread count falls to 3 < q - 1 = 4
        edges = [(6, 0), (9, 0), (12, 0), (13, 0), (14, 0)]
        edges += [(7, 1), (8, 1), (10, 1), (11, 1)]
        edges += [(u, 3) for u in range(6, 15)]
        edges += [(6, 9), (6, 12), (6, 13), (6, 14), (9, 12), (9, 13), (9, 14)]
        g = Graph.from_edges(15, edges)
        col = Coloring(15, 5)
        for v in range(15):
            col.assign(v, v // 3)
        col.uncolor(2)
        state = AlmostEquitableState(g, 2, col, 3, 0)
        state.validate()
        bad = claim_checks(state, surface=PLANAR)
        assert bad == [("solo-spread-planar", 0, 5, 3)]
