"""Command line front end.

Every study run by the package is reachable as a subcommand of
``python3 -m tentdg``; results print as aligned tables and land in CSV
files when ``--out`` is given.  Failures exit nonzero after a single
``error: <Type>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import studies
from .mesh import (
    make_interval_mesh,
    make_lshape_graded,
    make_square_mesh,
    read_mesh,
    write_mesh,
)

__all__ = ["main", "build_parser"]


def _ints(text: str):
    return tuple(int(s) for s in text.split(",") if s)


def _floats(text: str):
    return tuple(float(s) for s in text.split(",") if s)


def _print_table(header: str, rows) -> None:
    cols = header.split(",")
    body = [[_cell(v) for v in row] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in body)) if body else len(c)
              for i, c in enumerate(cols)]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
    for r in body:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int,)) or hasattr(v, "dtype") and v.dtype.kind == "i":
        return str(int(v))
    return f"{float(v):.6g}"


# -- subcommand handlers ---------------------------------------------------

def _cmd_basis_info(args) -> int:
    rows = studies.basis_info(args.p)
    if args.out:
        studies.write_csv(args.out, "n,p,dim_scalar,dim_wave", rows)
    _print_table("n,p,dim_scalar,dim_wave", rows)
    return 0


def _cmd_convergence(args) -> int:
    rows = studies.convergence_study(
        n=args.n, ps=args.p, hs=args.h, T=args.T, gamma=args.gamma,
        workers=args.workers, kind=args.seed_kind, alpha=args.alpha,
        beta=args.beta, out=args.out)
    _print_table("h,p,dofs,error,rate,seconds", rows)
    return 0


def _cmd_pconvergence(args) -> int:
    rows = studies.p_convergence_study(
        n=args.n, h=args.h, ps=args.p, T=args.T, kind=args.seed_kind,
        alpha=args.alpha, beta=args.beta, out=args.out)
    _print_table("h,p,dofs,error,rate,seconds", rows)
    return 0


def _cmd_compare_spaces(args) -> int:
    rows = studies.compare_spaces_study(
        ps=args.p, nx=args.nx, nt=args.nt, T=args.T, alpha=args.alpha,
        beta=args.beta, out=args.out)
    _print_table("space,h,p,dofs,error,rate,seconds", rows)
    return 0


def _cmd_compare_meshing(args) -> int:
    rows = studies.compare_meshing_study(
        hs=args.h, p=args.p, T=args.T, alpha=args.alpha, beta=args.beta,
        out=args.out)
    _print_table("scheme,h,p,dofs,error,rate,seconds", rows)
    return 0


def _cmd_seed_study(args) -> int:
    rows = studies.seed_study(kinds=args.seed_kind, ps=args.p,
                              T=args.T, alpha=args.alpha, beta=args.beta,
                              out=args.out)
    _print_table("kind,p,dofs,cond,error,seconds", rows)
    return 0


def _cmd_energy(args) -> int:
    rows = studies.energy_study(ps=args.p, T=args.T, window=args.window,
                                alpha=args.alpha, beta=args.beta,
                                out=args.out)
    _print_table("t,p,E,relerr", rows)
    return 0


def _cmd_lshape(args) -> int:
    rows = studies.lshape_study(
        h_uniform=args.h_uniform, h_graded=args.h_graded, p=args.p,
        T=args.T, mu=args.mu, recovery=args.recovery, alpha=args.alpha,
        beta=args.beta, workers=args.workers, out=args.out)
    _print_table("mesh,h,p,dofs,error,rate,seconds", rows)
    return 0


def _cmd_hetero(args) -> int:
    out_meas = out_snap = None
    if args.out:
        base = Path(args.out)
        out_meas = base / "measurement.csv"
        out_snap = base / "snapshots.csv"
    res = studies.hetero_study(
        p=args.p, T=args.T, fine=args.h, workers=args.workers,
        arrivals=args.arrivals, recovery=args.recovery, alpha=args.alpha,
        beta=args.beta, out_measurement=out_meas, out_snapshots=out_snap)
    oracle = res["oracle"]
    print("ray-theory arrivals: "
          + "  ".join(f"{k}={v:.4f}" for k, v in sorted(oracle.items(),
                                                        key=lambda kv: kv[1])))
    if len(res["arrivals"]):
        print("detected arrivals:   "
              + "  ".join(f"{t:.4f}" for t in res["arrivals"]))
    if args.out:
        print(f"wrote {out_meas} and {out_snap}")
    return 0


_SHAPES = ("interval", "square", "lshape")


def _cmd_mesh(args) -> int:
    if args.action == "generate":
        if args.shape == "interval":
            mesh = make_interval_mesh(0.0, 1.0, max(1, round(1.0 / args.h)))
        elif args.shape == "square":
            mesh = make_square_mesh(args.h)
        else:
            mesh = make_lshape_graded(args.h, args.mu)
        if args.out:
            with open(args.out, "w") as f:
                write_mesh(mesh, f)
            print(f"wrote {args.out}: {len(mesh.vertices)} vertices, "
                  f"{mesh.num_elements} elements")
        else:
            write_mesh(mesh, sys.stdout)
        return 0
    with open(args.path) as f:
        mesh = read_mesh(f)
    print(f"ok: dim={mesh.n} vertices={len(mesh.vertices)} "
          f"elements={mesh.num_elements} "
          f"materials={len(set(mesh.material.tolist()))}")
    return 0


# -- parser ----------------------------------------------------------------

def _common(sub, *, p=None, p_list=None, h=None, h_list=None, T=None,
            workers=False, seed=False, seeds=False, penalties=True,
            recovery=None, out=True):
    if p is not None:
        sub.add_argument("--p", type=int, default=p)
    if p_list is not None:
        sub.add_argument("--p", type=_ints, default=p_list, metavar="P[,P...]")
    if h is not None:
        sub.add_argument("--h", type=float, default=h)
    if h_list is not None:
        sub.add_argument("--h", type=_floats, default=h_list,
                         metavar="H[,H...]")
    if T is not None:
        sub.add_argument("--T", type=float, default=T)
    if workers:
        sub.add_argument("--workers", type=int, default=1)
    if seed:
        sub.add_argument("--seed-kind", default="monomial",
                         choices=("monomial", "legendre", "chebyshev"))
    if seeds:
        sub.add_argument("--seed-kind", type=lambda s: tuple(s.split(",")),
                         default=("monomial", "legendre", "chebyshev"),
                         metavar="KIND[,KIND...]")
    if penalties:
        sub.add_argument("--alpha", type=float, default=0.5)
        sub.add_argument("--beta", type=float, default=0.5)
    if recovery is not None:
        sub.add_argument("--recovery", default=recovery,
                         choices=("bottom", "top", "top-nt"))
    if out:
        sub.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tentdg",
        description="Space-time Trefftz DG wave solver on tent meshes.")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("basis-info", help="dimension table of the local spaces")
    _common(s, p=3, penalties=False)
    s.set_defaults(func=_cmd_basis_info)

    s = subs.add_parser("convergence", help="h-refinement error study")
    s.add_argument("--n", type=int, default=1, choices=(1, 2))
    _common(s, p_list=(1, 2, 3), h_list=(1 / 8, 1 / 16, 1 / 32, 1 / 64),
            T=1.0, workers=True, seed=True)
    s.add_argument("--gamma", type=float, default=0.5)
    s.set_defaults(func=_cmd_convergence)

    s = subs.add_parser("pconvergence", help="degree-refinement error study")
    s.add_argument("--n", type=int, default=1, choices=(1, 2))
    _common(s, p_list=(1, 2, 3, 4, 5, 6), h=0.25, T=1.0, seed=True)
    s.set_defaults(func=_cmd_pconvergence)

    s = subs.add_parser("compare-spaces",
                        help="wave-compliant versus full tensor space")
    _common(s, p_list=(1, 2, 3, 4), T=1.0)
    s.add_argument("--nx", type=int, default=8)
    s.add_argument("--nt", type=int, default=8)
    s.set_defaults(func=_cmd_compare_spaces)

    s = subs.add_parser("compare-meshing",
                        help="tent-pitched versus Cartesian slab")
    _common(s, p=2, h_list=(1 / 4, 1 / 8, 1 / 16), T=0.5)
    s.set_defaults(func=_cmd_compare_meshing)

    s = subs.add_parser("seed-study",
                        help="seed polynomial conditioning and accuracy")
    _common(s, p_list=tuple(range(1, 10)), T=1.0, seeds=True)
    s.set_defaults(func=_cmd_seed_study)

    s = subs.add_parser("energy", help="long-time energy behavior")
    _common(s, p_list=(2, 3, 4, 5, 6, 7, 8), T=100.0)
    s.add_argument("--window", type=float, default=10.0)
    s.set_defaults(func=_cmd_energy)

    s = subs.add_parser("lshape",
                        help="corner singularity, uniform versus graded")
    _common(s, p=3, T=1.0, workers=True, recovery="bottom")
    s.add_argument("--h-uniform", type=_floats, default=(0.14, 0.10, 0.07),
                   metavar="H[,H...]")
    s.add_argument("--h-graded", type=_floats, default=(0.19, 0.17, 0.14),
                   metavar="H[,H...]")
    s.add_argument("--mu", type=float, default=1.0 / 3.0)
    s.set_defaults(func=_cmd_lshape)

    s = subs.add_parser("hetero",
                        help="pulse through a wavespeed jump with "
                             "measurement and snapshots")
    _common(s, p=4, h=0.04, T=0.92, workers=True, recovery="bottom")
    s.add_argument("--arrivals", type=int, default=3)
    s.set_defaults(func=_cmd_hetero)

    s = subs.add_parser("mesh", help="generate or validate mesh files")
    acts = s.add_subparsers(dest="action", required=True)
    g = acts.add_parser("generate")
    g.add_argument("--shape", choices=_SHAPES, default="square")
    g.add_argument("--h", type=float, default=0.25)
    g.add_argument("--mu", type=float, default=1.0 / 3.0)
    g.add_argument("--out", default=None)
    g.set_defaults(func=_cmd_mesh)
    v = acts.add_parser("validate")
    v.add_argument("path")
    v.set_defaults(func=_cmd_mesh)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
