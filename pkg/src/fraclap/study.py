"""The rank-sweep decay study: mesh -> assemble -> invert -> partition ->
compress at each rank -> spectral-norm error, written as CSV, plus the
least-squares fit of the exponential decay rate."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import FracParams, QuadratureSpec, assemble_stiffness
from .cluster import build_cluster_tree, build_partition
from .hmatrix import BlockSvdCache, approximation_error, storage_bytes
from .linalg import lu_invert
from .mesh import interval_mesh, lshape_mesh, unit_square_mesh

_DOMAINS = {
    "interval": interval_mesh,
    "square": unit_square_mesh,
    "lshape": lshape_mesh,
}


@dataclass(frozen=True)
class StudyConfig:
    """Configuration of one decay study; the defaults match the reference
    protocol (eta = 2, n_leaf = 20, s in {0.25, 0.5, 0.75}, ranks 1..30)."""

    domain: str = "square"
    refine: int = 37
    s_values: tuple = (0.25, 0.5, 0.75)
    eta: float = 2.0
    n_leaf: int = 20
    ranks: tuple = tuple(range(1, 31))
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    out: str = "study.csv"
    threads: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.domain not in _DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}, pick one of {sorted(_DOMAINS)}")
        if any(not 0.0 < s < 1.0 for s in self.s_values):
            raise ValueError("all s values must lie in (0, 1)")
        if len(self.ranks) == 0 or min(self.ranks) < 1:
            raise ValueError("ranks must be positive")


@dataclass(frozen=True)
class StudyRecord:
    s: float
    eta: float
    n_leaf: int
    n: int
    r: int
    error_2norm: float
    storage_bytes: int
    elapsed_seconds: float


def build_mesh(domain, refine):
    return _DOMAINS[domain](refine)


def run_study(cfg, log=None):
    """Run the configured study and return records in ascending (s, r) order.

    Wall-clock timings enter the records only when cfg.timing is set, so the
    default output is bit-reproducible run to run.
    """
    say = log or (lambda msg: None)
    mesh = build_mesh(cfg.domain, cfg.refine)
    dim = mesh.dim
    say(f"mesh: {cfg.domain} refine={cfg.refine}, {mesh.num_elements} elements, "
        f"N={mesh.num_dofs}")
    tree = build_cluster_tree(mesh, cfg.n_leaf)
    partition = build_partition(tree, cfg.eta)
    say(f"partition: {len(partition.far)} admissible, {len(partition.near)} non-admissible")

    records = []
    for s in sorted(cfg.s_values):
        t_setup = time.monotonic()
        a = assemble_stiffness(mesh, FracParams(dim, s), cfg.quadrature)
        inv, residual = lu_invert(a)
        cache = BlockSvdCache(inv, partition, threads=cfg.threads)
        say(f"s={s}: assembled and inverted (residual {residual:.2e}) "
            f"in {time.monotonic() - t_setup:.1f}s")
        for r in sorted(cfg.ranks):
            t0 = time.monotonic()
            h = cache.hmatrix(r)
            err = approximation_error(inv, h)
            elapsed = time.monotonic() - t0 if cfg.timing else 0.0
            records.append(StudyRecord(s, cfg.eta, cfg.n_leaf, mesh.num_dofs, r,
                                       float(err.value), storage_bytes(h), elapsed))
            say(f"  r={r}: error {err.value:.6e}")
    return records


_HEADER = "s,eta,nleaf,N,r,error_2norm,storage_bytes,elapsed_seconds"


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(path, records):
    """Study CSV: fixed header, one row per (s, r), 17 significant digits, LF."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(_HEADER + "\n")
        for rec in records:
            fh.write(",".join([
                _fmt(rec.s), _fmt(rec.eta), str(rec.n_leaf), str(rec.n), str(rec.r),
                _fmt(rec.error_2norm), str(rec.storage_bytes), _fmt(rec.elapsed_seconds),
            ]) + "\n")


def read_csv(path):
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != _HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        records = []
        for line in fh:
            if not line.strip():
                continue
            s, eta, nleaf, n, r, err, stor, elapsed = line.split(",")
            records.append(StudyRecord(float(s), float(eta), int(nleaf), int(n), int(r),
                                       float(err), int(stor), float(elapsed)))
    return records


def fit_exponential(records, floor=1e-13):
    """Least squares of ln(error) = c - b * r^(1/3) over non-floor points.

    `records` must share one s value.  Points with error <= `floor` are
    dropped as saturated; at least three must survive.  Returns (b, r_squared).
    """
    if len({rec.s for rec in records}) > 1:
        raise ValueError("fit_exponential expects records of a single s value")
    usable = [rec for rec in records if rec.error_2norm > floor]
    if len(usable) < 3:
        raise ValueError(f"need at least 3 non-floor records, have {len(usable)}")
    x = np.array([rec.r ** (1.0 / 3.0) for rec in usable])
    y = np.log(np.array([rec.error_2norm for rec in usable]))
    design = np.stack([np.ones_like(x), -x], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if total == 0.0 else 1.0 - float(resid @ resid) / total
    b = float(coef[1])
    if total == 0.0:
        b = 0.0
    return b, r_squared


def fit_by_s(records, floor=1e-13):
    """Group records by s and fit each; returns {s: (b, r_squared)}."""
    out = {}
    for s in sorted({rec.s for rec in records}):
        out[s] = fit_exponential([rec for rec in records if rec.s == s], floor=floor)
    return out
