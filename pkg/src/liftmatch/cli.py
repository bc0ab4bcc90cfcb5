"""Command line entry point: ``liftmatch <command> --graph FILE ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from . import reports as rp
from .first_moment import (MomentError, allowed_n, asymptotic_first_moment, exact_first_moment,
                           ratio_to_estimate)
from .graph import (GraphError, Multigraph, banana, build_matrices, cube, is_bipartite, k4,
                    load_graph, petersen, prism3)
from .laplace import BudgetExceeded, LaplaceError
from .lattice import LatticeError, first_moment_lattice, second_moment_lattice
from .lifts import compare_with_limit, exhaustive_lift_oracle, monte_carlo_moments
from .nbwalks import a4_check, cycle_series, sample_limit_W, ssc_constant
from .second_moment import asymptotic_second_moment, exact_second_moment

BUILTIN = {"k4": k4, "banana3": lambda: banana(3), "banana4": lambda: banana(4),
           "petersen": petersen, "prism3": prism3, "cube": cube}

COMMANDS = ("analyze", "first-moment", "second-moment", "cycles", "ssc-check", "simulate", "exact")


class UsageError(ValueError):
    pass


def resolve_graph(source: str) -> Multigraph:
    """A graph file path, or one of the built-in names when no such file exists."""
    if not Path(source).exists() and source in BUILTIN:
        return BUILTIN[source]()
    if not Path(source).exists():
        raise GraphError(f"no graph file {source!r}")
    return load_graph(source)


def parse_grid(args) -> list[int]:
    if args.n_grid:
        try:
            grid = [int(v) for v in args.n_grid.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --n-grid {args.n_grid!r}") from exc
    elif args.n is not None:
        grid = [args.n]
    else:
        grid = list(args.default_grid)
    if any(v < 0 for v in grid):
        raise UsageError("n must be nonnegative")
    return grid


def regular_degree(G: Multigraph) -> int | None:
    d = G.regular_degree()
    return d if d is not None and d >= 3 else None


def first_moment_cmd(G, args) -> dict:
    rows = []
    asym = None
    if regular_degree(G):
        fm = asymptotic_first_moment(G, multistart=args.multistart, seed=args.seed or 0)
        asym = fm.estimate
    for n in parse_grid(args):
        if not allowed_n(G, n):
            rows.append({"n": n, "exact": rp.exact(0), "note": "n not allowed, X = 0"})
            continue
        val = exact_first_moment(G, n, cap=args.cap)
        row = {"n": n, "exact": rp.exact(val), "exact_float": rp.real(float(val))}
        if asym is not None and n > 0:
            row["asymptotic"] = rp.real(asym.value(n))
            row["ratio"] = rp.real(ratio_to_estimate(val, asym, n))
        rows.append(row)
    out = {"rows": rows}
    if asym is not None:
        out["asymptotic"] = asym.to_dict()
        out["asymptotic"]["C_symbolic"] = rp.symbolic(asym.C)
        out["closed_form_relative_gap"] = f"{fm.relative_gap:.3e}"
    else:
        out["asymptotic"] = None
        out["note"] = "asymptotics are only assembled for d-regular graphs with d >= 3"
    return out


def second_moment_cmd(G, args) -> dict:
    rows = []
    asym = None
    if regular_degree(G):
        sm = asymptotic_second_moment(G, multistart=args.multistart, seed=args.seed or 0)
        asym = sm.estimate
    for n in parse_grid(args):
        if not allowed_n(G, n):
            rows.append({"n": n, "exact": rp.exact(0), "note": "n not allowed, X = 0"})
            continue
        val = exact_second_moment(G, n, cap=args.cap)
        row = {"n": n, "exact": rp.exact(val), "exact_float": rp.real(float(val))}
        if asym is not None and n > 0:
            row["asymptotic"] = rp.real(asym.value(n))
            row["ratio"] = rp.real(ratio_to_estimate(val, asym, n))
        rows.append(row)
    out = {"rows": rows}
    if asym is not None:
        out["asymptotic"] = asym.to_dict()
        out["asymptotic"]["C_symbolic"] = rp.symbolic(asym.C)
        out["asymptotic"]["det_symbolic"] = rp.symbolic(asym.det_neg_H_restricted)
        out["maximizer_status"] = sm.maximizer_status
    else:
        out["asymptotic"] = None
        out["note"] = "asymptotics are only assembled for d-regular graphs with d >= 3"
    return out


def cycles_cmd(G, args) -> dict:
    if not regular_degree(G):
        raise UsageError("cycle statistics need a d-regular graph with d >= 3")
    cs = cycle_series(G, kmax=args.kmax)
    return {"d": cs.d, "bipartite": cs.bipartite, "rows": cs.rows(),
            "ssc_constant": rp.constant(cs.ssc_constant),
            "tail_bound_beyond_kmax": f"{cs.tail_bound:.3e}"}


def ssc_cmd(G, args) -> dict:
    if not regular_degree(G):
        raise UsageError("the conditioning check needs a d-regular graph with d >= 3")
    rep = a4_check(G, multistart=args.multistart)
    out = rep.to_dict()
    out["rhs_symbolic"] = rp.symbolic(rep.rhs)
    return out


def simulate_cmd(G, args) -> dict:
    if args.seed is None:
        raise UsageError("simulate needs --seed")
    if args.n is None:
        raise UsageError("simulate needs --n")
    lam = mu = None
    cs = None
    if regular_degree(G):
        cs = cycle_series(G, kmax=max(args.kmax, 20))
        lam = dict(zip(cs.ks, cs.lam))
        mu = dict(zip(cs.ks, cs.mu))
    rep = monte_carlo_moments(G, args.n, args.trials, args.kmax, args.seed, lam, mu,
                              threads=args.threads)
    out = rep.to_dict()
    if cs is not None and any(rep.X):
        if allowed_n(G, args.n):
            EX = float(exact_first_moment(G, args.n, cap=args.cap))
            out["E[X] exact"] = rp.real(EX)
            W = sample_limit_W(cs, 100_000, args.seed)
            out["limit_law_comparison"] = compare_with_limit(rep.X, EX, W)
    out["_csv"] = rep.to_csv()
    return out


def exact_cmd(G, args) -> dict:
    if args.n is None:
        raise UsageError("exact needs --n")
    o = exhaustive_lift_oracle(G, args.n, kmax=args.kmax, cap=args.cap)
    return {"n": o.n, "lifts_visited": o.lifts, "E[X]": rp.exact(o.EX), "E[X^2]": rp.exact(o.EX2),
            "E[Z_k]": {str(k): rp.exact(v) for k, v in enumerate(o.EZ, 2)},
            "E[X Z_k]": {str(k): rp.exact(v) for k, v in enumerate(o.EXZ, 2)}}


def analyze_cmd(G, args) -> dict:
    mats = build_matrices(G)
    bip, _ = is_bipartite(G)
    out = {"g": G.g, "h": G.h, "degrees": list(G.degrees), "bipartite": bip,
           "adjacency_eigenvalues": [rp.real(a) for a in mats.alphas],
           "first_moment_lattice": first_moment_lattice(G).to_dict()}
    vol = first_moment_lattice(G).lattice.gram_det
    out["first_moment_lattice"]["vol_squared_factored"] = rp.factorize(vol)
    if regular_degree(G):
        lat2 = second_moment_lattice(G)
        out["second_moment_lattice"] = lat2.to_dict()
        out["second_moment_lattice"]["vol_squared_factored"] = rp.factorize(lat2.lattice.gram_det)
        fm = asymptotic_first_moment(G, multistart=args.multistart)
        sm = asymptotic_second_moment(G, multistart=args.multistart)
        out["first_moment"] = fm.estimate.to_dict()
        out["second_moment"] = sm.estimate.to_dict()
        out["ssc_constant"] = rp.constant(ssc_constant(G).value)
    return out


HANDLERS = {"analyze": analyze_cmd, "first-moment": first_moment_cmd,
            "second-moment": second_moment_cmd, "cycles": cycles_cmd, "ssc-check": ssc_cmd,
            "simulate": simulate_cmd, "exact": exact_cmd}

DEFAULT_GRIDS = {"first-moment": (1, 2, 3, 6, 12), "second-moment": (1, 2)}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liftmatch", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--graph", required=True,
                       help="graph JSON file, or one of: " + ", ".join(sorted(BUILTIN)))
        s.add_argument("--n", type=int, default=None, help="lift size")
        s.add_argument("--n-grid", default=None, help="comma separated lift sizes")
        s.add_argument("--trials", type=int, default=2000)
        s.add_argument("--seed", type=int, default=None, help="required for simulate")
        s.add_argument("--kmax", type=int, default=6)
        s.add_argument("--cap", type=int, default=10**7, help="enumeration budget")
        s.add_argument("--multistart", type=int, default=20)
        s.add_argument("--out", default=None, help="output file (default stdout)")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--threads", type=int, default=1)
        s.set_defaults(default_grid=DEFAULT_GRIDS.get(name, (1,)))
    return p


def resolved_config(args) -> dict:
    keys = ("command", "graph", "n", "n_grid", "trials", "seed", "kmax", "cap", "multistart",
            "format", "threads")
    return {k: getattr(args, k) for k in keys}


def render(args, G, body: dict) -> str:
    csv_text = body.pop("_csv", None)
    if args.format == "csv":
        if csv_text is None:
            raise UsageError("csv output is only available for simulate")
        return csv_text
    report = {"version": __version__, "config": resolved_config(args),
              "graph": G.to_dict(), "result": body}
    return rp.dumps(report)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        G = resolve_graph(args.graph)
        text = render(args, G, HANDLERS[args.command](G, args))
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (UsageError, GraphError, MomentError, LatticeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LaplaceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
