"""Command line front end.

Subcommands:
  solve    read a DIMACS graph, emit an equitable coloring
  verify   check a coloring file against a graph
  gen      emit a generated instance in DIMACS format
  oracle   exhaustive small-instance search, optional solver cross-check
  stress   batch solve-and-verify over a generated sweep
  audit    pretty-print a violation dump
  replay   rebuild a dumped stuck state and re-run the repair engine

Exit codes: 0 success, 1 verification failure, 2 bad input, 3 repair-engine
invariant breach, 4 resource cap exceeded.  Structured output (--format
records) is line oriented and byte-stable for a fixed invocation and seed;
wall-clock timings go to stderr only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .coloring import (
    AlmostEquitableState,
    Coloring,
    UNCOLORED,
    format_coloring,
    parse_coloring,
    verify,
)
from .errors import InputError, ResourceCapError, TheoryViolation
from .generators import FAMILIES, GenSpec, gen, sweep_specs
from .graph import PLANAR, SURFACES, Graph, read_dimacs, write_dimacs
from .oracle import ORACLE_CAP, oracle_equitable
from .solver import SolverConfig, SolverStats, equitable_color, repair

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_THEORY = 3
EXIT_CAP = 4

_VERDICT_CODE = {
    "ok": EXIT_OK,
    "verify-failed": EXIT_VERIFY,
    "input-error": EXIT_INPUT,
    "theory-violation": EXIT_THEORY,
    "resource-cap": EXIT_CAP,
}


def _fail(reason: str, message: str) -> int:
    """Report an error with its machine-readable reason code on stderr."""
    print(f"equichroma: error {reason}: {message}", file=sys.stderr)
    return _VERDICT_CODE[reason]


def _load_graph(path: str) -> Graph:
    if path == "-":
        return read_dimacs(sys.stdin)
    try:
        with open(path) as fh:
            return read_dimacs(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")


def _thread_cap() -> int:
    raw = os.environ.get("EQUICHROMA_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"EQUICHROMA_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise InputError(f"EQUICHROMA_THREADS must be positive, got {cap}")
    return cap


def _write_dump(exc: TheoryViolation, path: str) -> None:
    payload = {"message": str(exc), **(exc.dump or {})}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _stat_lines(stats: SolverStats) -> list[str]:
    # Wall time is omitted: records must not vary between identical runs.
    out = [
        f"stat edge_insertions {stats.edge_insertions}",
        f"stat repairs {stats.repairs}",
        f"stat deferrals {stats.deferrals}",
        f"stat max_deficit {stats.max_deficit}",
        f"stat hs_calls {stats.hs_calls}",
        f"stat hs_rescues {stats.hs_rescues}",
        f"stat claim_violations {len(stats.claim_violations)}",
    ]
    for rule, count in sorted(stats.expansions.items()):
        out.append(f"rule {rule} {count}")
    return out


def _claim_lines(stats: SolverStats) -> list[str]:
    return [
        f"claim {tag} vertex {v} spread {q} after {qp}"
        for tag, v, q, qp in stats.claim_violations
    ]


# --- solve ----------------------------------------------------------------------

def cmd_solve(args: argparse.Namespace) -> int:
    try:
        g = _load_graph(args.graph)
        cfg = SolverConfig(
            r=args.r, surface=args.surface, seed=args.seed, audit=args.audit
        )
        stats = SolverStats()
        col = equitable_color(g, cfg, stats)
    except InputError as e:
        return _fail("input-error", str(e))
    except TheoryViolation as e:
        try:
            _write_dump(e, args.dump)
            print(f"equichroma: dump written to {args.dump}", file=sys.stderr)
        except OSError as we:
            print(f"equichroma: dump not written: {we}", file=sys.stderr)
        return _fail("theory-violation", str(e))
    except ResourceCapError as e:
        return _fail("resource-cap", str(e))

    ok, why = verify(g, col, args.r)  # success is never printed unchecked
    if not ok:
        return _fail("verify-failed", why)

    if args.format == "records":
        print("record solve")
        print(f"graph n {g.n} m {g.m}")
        print(f"params r {args.r} surface {args.surface} seed {args.seed}")
        format_coloring(col, sys.stdout)
        for line in _stat_lines(stats):
            print(line)
        if args.audit:
            for line in _claim_lines(stats):
                print(line)
        print("verified ok")
        print("end solve")
    else:
        format_coloring(col, sys.stdout)
        print(
            f"solved n={g.n} m={g.m} r={args.r} "
            f"insertions={stats.edge_insertions} repairs={stats.repairs} "
            f"wall={stats.wall_time:.3f}s",
            file=sys.stderr,
        )
        if args.audit:
            for line in _claim_lines(stats):
                print(line, file=sys.stderr)
    return EXIT_OK


# --- verify ---------------------------------------------------------------------

def cmd_verify(args: argparse.Namespace) -> int:
    try:
        g = _load_graph(args.graph)
        with open(args.coloring) as fh:
            col, r, _ = parse_coloring(fh.read(), g.n)
    except OSError as e:
        return _fail("input-error", f"cannot read {args.coloring}: {e}")
    except InputError as e:
        return _fail("input-error", str(e))
    if args.r is not None and args.r != r:
        return _fail("input-error", f"--r {args.r} but coloring declares r={r}")
    ok, why = verify(g, col, r)
    if ok:
        print("verify ok")
        return EXIT_OK
    print(f"verify failed: {why}")
    return _fail("verify-failed", why)


# --- gen ------------------------------------------------------------------------

def cmd_gen(args: argparse.Namespace) -> int:
    try:
        spec = GenSpec(args.family, args.n, delta_cap=args.delta_cap, seed=args.seed)
        g = gen(spec)
    except InputError as e:
        return _fail("input-error", str(e))
    try:
        if args.out == "-":
            write_dimacs(g, sys.stdout)
        else:
            with open(args.out, "w") as fh:
                write_dimacs(g, fh)
    except OSError as e:
        return _fail("input-error", f"cannot write {args.out}: {e}")
    return EXIT_OK


# --- oracle ---------------------------------------------------------------------

def cmd_oracle(args: argparse.Namespace) -> int:
    try:
        g = _load_graph(args.graph)
        col = oracle_equitable(g, args.r)
    except InputError as e:
        return _fail("input-error", str(e))
    except ResourceCapError as e:
        return _fail("resource-cap", str(e))

    if col is None:
        print("oracle none")
    else:
        ok, why = verify(g, col, args.r)
        if not ok:
            return _fail("verify-failed", f"oracle produced a bad coloring: {why}")
        print("oracle coloring")
        format_coloring(col, sys.stdout)

    if not args.cross_check:
        return EXIT_OK

    try:
        solver_col = equitable_color(g, SolverConfig(r=args.r, surface=args.surface))
    except InputError as e:
        if col is None:
            print(f"cross-check ok: no coloring exists, solver refused ({e})")
            return EXIT_OK
        print(f"cross-check skipped: solver out of scope ({e})")
        return EXIT_OK
    except TheoryViolation as e:
        if col is None:
            print("cross-check ok: no coloring exists, solver reported violation")
            return EXIT_OK
        return _fail("theory-violation", f"solver failed where oracle succeeds: {e}")
    except ResourceCapError as e:
        return _fail("resource-cap", str(e))

    if col is None:
        return _fail(
            "theory-violation",
            "solver claims a coloring where exhaustive search finds none",
        )
    ok, why = verify(g, solver_col, args.r)
    if not ok:
        return _fail("verify-failed", f"solver coloring bad: {why}")
    print("cross-check ok")
    return EXIT_OK


# --- stress ---------------------------------------------------------------------

def _stress_one(job: tuple[int, GenSpec, int, str]) -> tuple[int, int, int, str, str]:
    """Worker: generate, solve, verify.  Returns (idx, n, seed, verdict, detail)."""
    idx, spec, r, surface = job
    try:
        g = gen(spec)
        col = equitable_color(g, SolverConfig(r=r, surface=surface))
        ok, why = verify(g, col, r)
        if not ok:
            return idx, spec.n, spec.seed, "verify-failed", why
        return idx, spec.n, spec.seed, "ok", ""
    except InputError as e:
        return idx, spec.n, spec.seed, "input-error", str(e)
    except TheoryViolation as e:
        return idx, spec.n, spec.seed, "theory-violation", str(e)
    except ResourceCapError as e:
        return idx, spec.n, spec.seed, "resource-cap", str(e)


def cmd_stress(args: argparse.Namespace) -> int:
    try:
        cap = _thread_cap()
        specs = sweep_specs(
            args.family,
            args.count,
            args.n_lo,
            args.n_hi,
            delta_cap=args.delta_cap,
            base_seed=args.seed,
        )
    except InputError as e:
        return _fail("input-error", str(e))

    jobs = [(i, spec, args.r, args.surface) for i, spec in enumerate(specs)]
    if cap <= 1 or len(jobs) <= 1:
        results = [_stress_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(cap, len(jobs))) as pool:
            results = list(pool.map(_stress_one, jobs))

    # results arrive in submission order, so output is deterministic
    if args.format == "records":
        print("record stress")
        print(
            f"params family {args.family} count {args.count} "
            f"n {args.n_lo} {args.n_hi} r {args.r} surface {args.surface} "
            f"seed {args.seed}"
        )
    worst = EXIT_OK
    failed = 0
    for idx, n, seed, verdict, detail in results:
        line = f"instance {idx} n {n} seed {seed} verdict {verdict}"
        if detail:
            line += f" detail {detail}"
        print(line)
        code = _VERDICT_CODE[verdict]
        if code != EXIT_OK:
            failed += 1
            worst = max(worst, code)
    print(f"summary total {len(results)} ok {len(results) - failed} failed {failed}")
    if args.format == "records":
        print("end stress")
    return worst


# --- audit ----------------------------------------------------------------------

def _load_dump(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read dump {path}: {e}")


def cmd_audit(args: argparse.Namespace) -> int:
    try:
        dump = _load_dump(args.dump)
    except InputError as e:
        return _fail("input-error", str(e))

    out = sys.stdout
    print(f"dump reason {dump.get('message', '?')}", file=out)
    print(
        f"state n {dump.get('n')} r {dump.get('r')} s {dump.get('s')} "
        f"x {dump.get('x')} small {dump.get('small')} "
        f"surface {dump.get('surface')}",
        file=out,
    )
    print(f"edges {len(dump.get('edges', []))}", file=out)
    class_of = dump.get("class_of", [])
    by_class: dict[int, list[int]] = {}
    for v, c in enumerate(class_of):
        if c != UNCOLORED:
            by_class.setdefault(c, []).append(v)
    for c in sorted(by_class):
        print(f"class {c} : {' '.join(str(v) for v in by_class[c])}", file=out)
    acc = dump.get("accessible", [])
    print(f"accessible {' '.join(str(c) for c in acc)}", file=out)
    blocked = [c for c in sorted(by_class) if c not in set(acc)]
    print(f"blocked {' '.join(str(c) for c in blocked)}", file=out)
    for arc, wits in sorted(dump.get("aux", {}).items()):
        i, _, j = arc.partition("->")
        print(f"aux {i} -> {j} : {' '.join(str(w) for w in wits)}", file=out)
    for tag, v, q, qp in dump.get("solo_bounds", []):
        print(f"solo-bound {tag} vertex {v} spread {q} after {qp}", file=out)
    for b, a, cut in dump.get("cut_bounds", []):
        print(f"cut-bound blocked {b} accessible {a} cut {cut}", file=out)
    shape = dump.get("component_shape", {})
    if shape:
        sizes = ",".join(str(len(comp)) for comp in shape.get("components", []))
        print(
            f"components sizes {sizes} "
            f"largest-blocked {shape.get('largest_blocked')} "
            f"union-of-four {'yes' if shape.get('union_of_four') else 'no'}",
            file=out,
        )
    stuck = dump.get("stuck")
    if stuck:
        parts = " ".join(f"{k} {stuck[k]}" for k in sorted(stuck))
        print(f"stuck {parts}", file=out)
    return EXIT_OK


# --- replay ---------------------------------------------------------------------

def _state_from_dump(dump: dict) -> tuple[AlmostEquitableState, SolverConfig]:
    try:
        n, r, s = dump["n"], dump["r"], dump["s"]
        x, small = dump["x"], dump["small"]
        edges = dump["edges"]
        class_of = dump["class_of"]
        surface = dump.get("surface", PLANAR)
    except KeyError as e:
        raise InputError(f"dump is missing field {e}")
    g = Graph(n)
    for u, v in edges:
        g.add_edge(u, v)
    col = Coloring(n, r)
    for v, c in enumerate(class_of):
        if c != UNCOLORED:
            col.assign(v, c)
    state = AlmostEquitableState(g, x, col, s, small)
    state.validate()
    return state, SolverConfig(r=r, surface=surface)


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        dump = _load_dump(args.dump)
        state, cfg = _state_from_dump(dump)
    except InputError as e:
        return _fail("input-error", str(e))
    try:
        col = repair(state, cfg)
    except InputError as e:
        return _fail("input-error", str(e))
    except TheoryViolation as e:
        print("replay reproduced the stuck state")
        return _fail("theory-violation", str(e))
    except ResourceCapError as e:
        return _fail("resource-cap", str(e))
    ok, why = verify(state.g, col, cfg.r)
    if not ok:
        return _fail("verify-failed", why)
    print("replay solved: coloring verified")
    return EXIT_OK


# --- argument plumbing ------------------------------------------------------------

def _add_surface(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--surface",
        choices=sorted(SURFACES),
        default=PLANAR,
        help="embeddability regime the input is promised to satisfy",
    )


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "records"), default="text")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="equichroma",
        description="equitable coloring of sparse embeddable graphs",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="color a DIMACS graph equitably")
    p.add_argument("graph", nargs="?", default="-", help="DIMACS file, - for stdin")
    p.add_argument("--r", type=int, required=True, help="number of classes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--audit", action="store_true", help="collect spread diagnostics")
    p.add_argument("--dump", default="violation.json", help="where to write a dump")
    _add_surface(p)
    _add_format(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("verify", help="check a coloring file against a graph")
    p.add_argument("graph")
    p.add_argument("coloring", help="file in the solve output format")
    p.add_argument("--r", type=int, default=None, help="expected class count")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta-cap", type=int, default=None, dest="delta_cap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="output path, - for stdout")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser(
        "oracle", help=f"exhaustive search for graphs with at most {ORACLE_CAP} vertices"
    )
    p.add_argument("graph", nargs="?", default="-")
    p.add_argument("--r", type=int, required=True)
    p.add_argument(
        "--cross-check",
        action="store_true",
        dest="cross_check",
        help="also run the constructive solver and compare verdicts",
    )
    _add_surface(p)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("stress", help="sweep a family and solve every instance")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--n-lo", type=int, required=True, dest="n_lo")
    p.add_argument("--n-hi", type=int, required=True, dest="n_hi")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--delta-cap", type=int, default=None, dest="delta_cap")
    p.add_argument("--seed", type=int, default=0, help="base seed for the sweep")
    _add_surface(p)
    _add_format(p)
    p.set_defaults(fn=cmd_stress)

    p = sub.add_parser("audit", help="pretty-print a violation dump")
    p.add_argument("dump")
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("replay", help="re-run the repair engine on a dumped state")
    p.add_argument("dump")
    p.set_defaults(fn=cmd_replay)

    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
