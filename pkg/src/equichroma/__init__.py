"""Constructive equitable r-coloring of sparse graphs.

Equitably r-colors any planar graph with maximum degree <= r (r >= 8) and any
graph of nonnegative Euler characteristic with maximum degree <= r (r >= 9),
by inserting edges one at a time and repairing each conflict through
accessibility-expanding exchanges.  A Hajnal-Szemeredi style fallback covers
r >= max_degree + 1 on arbitrary graphs.
"""

from .errors import InputError, ResourceCapError, TheoryViolation
from .graph import Graph, NONNEG_EULER, PLANAR, read_dimacs, write_dimacs

__all__ = [
    "Graph",
    "PLANAR",
    "NONNEG_EULER",
    "read_dimacs",
    "write_dimacs",
    "InputError",
    "TheoryViolation",
    "ResourceCapError",
    "EquitableColorer",
    "equitable_color",
    "hs_equitable",
    "SolverConfig",
]


def __getattr__(name):
    # solver and estimator pull in heavier imports; load them lazily
    if name in ("equitable_color", "hs_equitable", "SolverConfig", "discharge_audit"):
        from . import solver

        return getattr(solver, name)
    if name == "EquitableColorer":
        from .estimator import EquitableColorer

        return EquitableColorer
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
