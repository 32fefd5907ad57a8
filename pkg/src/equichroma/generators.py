"""Seeded instance generators for the solver's target graph families.

Every family is built by a construction that guarantees its embedding
bound, so no planarity test is needed: the construction trace is the
certificate.  The same spec always yields the same graph, byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import InputError
from .graph import Graph, NONNEG_EULER, PLANAR, surface_bounds_ok

FAMILIES = (
    "maximal-planar",
    "planar-degree-bounded",
    "bipartite-planar",
    "toroidal-6-regular",
    "erdos-renyi-capped",
)


@dataclass(frozen=True)
class GenSpec:
    family: str
    n: int
    delta_cap: int | None = None
    seed: int = 0


def _maximal_planar(n: int, rng: random.Random) -> Graph:
    # Apollonian growth: each new vertex lands inside a face picked by the
    # rng and joins its three corners, keeping the graph a triangulation.
    g = Graph(n)
    g.add_edge(0, 1)
    g.add_edge(1, 2)
    g.add_edge(0, 2)
    faces = [(0, 1, 2), (0, 1, 2)]  # inner and outer face of K3
    for v in range(3, n):
        a, b, c = faces.pop(rng.randrange(len(faces)))
        g.add_edge(v, a)
        g.add_edge(v, b)
        g.add_edge(v, c)
        faces.extend(((a, b, v), (b, c, v), (a, c, v)))
    return g


def _trim_to_cap(g: Graph, cap: int) -> None:
    # shave edges off max-degree vertices; deletion keeps any surface bound
    while g.max_degree() > cap:
        v = min(range(g.n), key=lambda u: (-g.degree(u), u))
        u = min(g.adj[v], key=lambda w: (-g.degree(w), w))
        g.remove_edge(v, u)


def _bipartite_planar(n: int, rng: random.Random) -> Graph:
    # quadrangulation growth: a new vertex splits a quad face across one
    # diagonal, joining two opposite (same-side) corners
    g = Graph(n)
    for u, v in ((0, 1), (1, 2), (2, 3), (0, 3)):
        g.add_edge(u, v)
    faces = [(0, 1, 2, 3), (0, 1, 2, 3)]
    for v in range(4, n):
        a, b, c, d = faces.pop(rng.randrange(len(faces)))
        g.add_edge(v, a)
        g.add_edge(v, c)
        faces.extend(((a, b, c, v), (a, v, c, d)))
    return g


def _torus_grid(n: int) -> Graph:
    p = next((d for d in range(3, n) if n % d == 0 and n // d >= 3), None)
    if p is None:
        raise InputError(f"toroidal grid needs n = p*q with p, q >= 3, got n={n}")
    q = n // p
    g = Graph(n)
    for i in range(p):
        for j in range(q):
            v = i * q + j
            g.add_edge(v, ((i + 1) % p) * q + j)
            g.add_edge(v, i * q + (j + 1) % q)
            g.add_edge(v, ((i + 1) % p) * q + (j + 1) % q)
    return g


def _er_capped(n: int, cap: int, rng: random.Random) -> Graph:
    g = Graph(n)
    if n < 2:
        return g
    prob = min(1.0, cap / (n - 1)) if n > 1 else 0.0
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < prob and g.degree(u) < cap and g.degree(v) < cap:
                g.add_edge(u, v)
    return g


def gen(spec: GenSpec) -> Graph:
    """Build the graph a spec describes; same spec, same graph."""
    if spec.family not in FAMILIES:
        raise InputError(f"unknown family {spec.family!r}")
    n = spec.n
    rng = random.Random(spec.seed)

    if spec.family == "maximal-planar":
        if n < 3:
            raise InputError("triangulation needs n >= 3")
        g = _maximal_planar(n, rng)
    elif spec.family == "planar-degree-bounded":
        if n < 3:
            raise InputError("triangulation needs n >= 3")
        if spec.delta_cap is None:
            raise InputError("planar-degree-bounded needs delta_cap")
        g = _maximal_planar(n, rng)
        _trim_to_cap(g, spec.delta_cap)
    elif spec.family == "bipartite-planar":
        if n < 4:
            raise InputError("quadrangulation needs n >= 4")
        g = _bipartite_planar(n, rng)
        if spec.delta_cap is not None:
            _trim_to_cap(g, spec.delta_cap)
    elif spec.family == "toroidal-6-regular":
        g = _torus_grid(n)
    else:
        if spec.delta_cap is None:
            raise InputError("erdos-renyi-capped needs delta_cap")
        g = _er_capped(n, spec.delta_cap, rng)

    _check_family_bound(spec, g)
    return g


def _check_family_bound(spec: GenSpec, g: Graph) -> None:
    if spec.family in ("maximal-planar", "planar-degree-bounded", "bipartite-planar"):
        assert surface_bounds_ok(g, PLANAR), "planar construction broke its bound"
        assert min(g.degree(v) for v in range(g.n)) <= 5
    elif spec.family == "toroidal-6-regular":
        assert all(g.degree(v) == 6 for v in range(g.n))
        assert surface_bounds_ok(g, NONNEG_EULER)
    if spec.delta_cap is not None:
        assert g.max_degree() <= spec.delta_cap


def sweep_specs(
    family: str,
    count: int,
    n_lo: int,
    n_hi: int,
    delta_cap: int | None = None,
    base_seed: int = 0,
) -> list[GenSpec]:
    """Deterministic batch of specs with sizes drawn from [n_lo, n_hi]."""
    if family not in FAMILIES:
        raise InputError(f"unknown family {family!r}")
    rng = random.Random(base_seed)
    specs = []
    for i in range(count):
        if family == "toroidal-6-regular":
            n = _composite_in(rng, n_lo, n_hi)
        else:
            n = rng.randint(n_lo, n_hi)
        specs.append(GenSpec(family, n, delta_cap, rng.randrange(2**32)))
    return specs


def _composite_in(rng: random.Random, lo: int, hi: int) -> int:
    feasible = [n for n in range(max(lo, 9), hi + 1)
                if any(n % p == 0 and n // p >= 3 for p in range(3, n))]
    if not feasible:
        raise InputError(f"no p*q with p,q >= 3 fits in [{lo}, {hi}]")
    return feasible[rng.randrange(len(feasible))]
