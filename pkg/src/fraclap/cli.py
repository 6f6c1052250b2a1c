"""Command-line front end.

Subcommands: mesh, assemble, invert, compress, study, fit.  Exit codes:
0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io as fio
from .assembly import FracParams, QuadratureSpec, assemble_stiffness
from .cluster import build_cluster_tree, build_partition, partition_to_csv
from .errors import AssemblyError, SingularMatrixError, SvdConvergenceError
from .hmatrix import compress, storage_bytes
from .linalg import lu_invert
from .study import StudyConfig, build_mesh, fit_by_s, read_csv, run_study, write_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_ranks(text):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError("ranks must be lo:hi or lo:hi:step")
    lo, hi = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 1
    if lo < 1 or hi < lo or step < 1:
        raise argparse.ArgumentTypeError(f"bad rank range {text!r}")
    return tuple(range(lo, hi + 1, step))


def _parse_s_list(text):
    return tuple(float(tok) for tok in text.split(","))


def _quad_args(args):
    return QuadratureSpec(args.gauss_order, args.singular_order, args.complement_order)


def _add_quad_flags(p):
    p.add_argument("--gauss-order", type=int, default=4)
    p.add_argument("--singular-order", type=int, default=6)
    p.add_argument("--complement-order", type=int, default=8)


def build_parser():
    parser = _Parser(prog="fraclap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate a mesh and write it as JSON")
    p.add_argument("--domain", choices=("interval", "square", "lshape"), required=True)
    p.add_argument("--refine", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("assemble", help="assemble the stiffness matrix of a mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--s", type=float, required=True)
    _add_quad_flags(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("invert", help="invert a FRACMAT1 matrix by LU")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compress", help="compress a matrix over an admissible partition")
    p.add_argument("--mesh", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--eta", type=float, default=2.0)
    p.add_argument("--nleaf", type=int, default=20)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("study", help="run the rank-sweep decay study")
    p.add_argument("--domain", choices=("interval", "square", "lshape"), default="square")
    p.add_argument("--refine", type=int, default=37)
    p.add_argument("--s", type=_parse_s_list, default=(0.25, 0.5, 0.75),
                   help="comma-separated list of fractional orders")
    p.add_argument("--eta", type=float, default=2.0)
    p.add_argument("--nleaf", type=int, default=20)
    p.add_argument("--ranks", type=_parse_ranks, default=tuple(range(1, 31)),
                   help="lo:hi[:step]")
    _add_quad_flags(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock times (makes the CSV non-reproducible)")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit the decay rate of a study CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--floor", type=float, default=1e-13)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 1

    try:
        return _dispatch(args)
    except (AssemblyError, SingularMatrixError, SvdConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"fraclap: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"fraclap: error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args):
    if args.command == "mesh":
        mesh = build_mesh(args.domain, args.refine)
        fio.write_mesh(args.out, mesh)
        print(f"wrote {args.out}: {mesh.num_elements} elements, N={mesh.num_dofs}")
        return 0

    if args.command == "assemble":
        mesh = fio.read_mesh(args.mesh)
        a = assemble_stiffness(mesh, FracParams(mesh.dim, args.s), _quad_args(args))
        fio.write_matrix(args.out, a)
        print(f"wrote {args.out}: {a.shape[0]}x{a.shape[1]}")
        return 0

    if args.command == "invert":
        a = fio.read_matrix(args.input)
        inv, residual = lu_invert(a)
        fio.write_matrix(args.out, inv)
        print(f"wrote {args.out}: residual {residual:.3e}")
        return 0

    if args.command == "compress":
        mesh = fio.read_mesh(args.mesh)
        mtx = fio.read_matrix(args.input)
        tree = build_cluster_tree(mesh, args.nleaf)
        partition = build_partition(tree, args.eta)
        h = compress(mtx, partition, args.rank)
        _write_hmatrix_dir(args.out, partition, h)
        print(f"wrote {args.out}: {len(partition.far)} far and {len(partition.near)} near "
              f"blocks, {storage_bytes(h)} bytes")
        return 0

    if args.command == "study":
        cfg = StudyConfig(domain=args.domain, refine=args.refine, s_values=args.s,
                          eta=args.eta, n_leaf=args.nleaf, ranks=args.ranks,
                          quadrature=_quad_args(args), out=args.out,
                          threads=args.threads, timing=args.timing)
        log = None if args.quiet else (lambda msg: print(msg, file=sys.stderr))
        records = run_study(cfg, log=log)
        write_csv(args.out, records)
        print(f"wrote {args.out}: {len(records)} records")
        return 0

    if args.command == "fit":
        records = read_csv(args.input)
        for s, (b, r2) in fit_by_s(records, floor=args.floor).items():
            print(f"s={s:g} b={b:.6g} R2={r2:.6g}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def _write_hmatrix_dir(path, partition, h):
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "partition.csv"), "w", encoding="ascii", newline="\n") as fh:
        fh.write(partition_to_csv(partition))
    with open(os.path.join(path, "permutation.json"), "w", encoding="ascii", newline="\n") as fh:
        fh.write("[" + ",".join(str(int(i)) for i in h.permutation) + "]\n")
    for k, factor in enumerate(h.far_blocks):
        fio.write_matrix(os.path.join(path, f"far_{k}_X"), factor.x_factor)
        fio.write_matrix(os.path.join(path, f"far_{k}_Y"), factor.y_factor)
    for k, dense in enumerate(h.near_blocks):
        fio.write_matrix(os.path.join(path, f"near_{k}"), dense)


if __name__ == "__main__":
    sys.exit(main())
