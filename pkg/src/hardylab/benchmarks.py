"""Backend benchmark: compiled quadrature kernel vs the numpy reference.

Runs the shared hot-loop contract (``weighted_piece_sum``) on identical
piece arrays through both implementations, reporting wall time, speedup and
the relative disagreement (expected ~1e-15: the two differ only by ulps in
the elementwise transcendentals).  Run as a module::

    python3 -m hardylab.benchmarks --cells 4096 --reps 50
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels_py
from .meshfn import PiecewiseFn, graded_mesh
from .quad import WeightSpec, _assemble_pieces, gauss_rule

try:
    from . import _kernels
except ImportError:  # pragma: no cover - source-only installs
    _kernels = None

__all__ = ["BenchRow", "run_benchmark", "main"]


@dataclass
class BenchRow:
    label: str
    cells: int
    t_python: float
    t_cython: float | None
    rel_disagreement: float | None

    @property
    def speedup(self) -> float | None:
        if not self.t_cython:
            return None
        return self.t_python / self.t_cython


def _workloads(cells, seed=0):
    rng = np.random.default_rng(seed)
    nodes = graded_mesh(cells, 1e-6, 2.0)
    values = rng.standard_normal(cells + 1)
    values[0] = 0.0
    fn = PiecewiseFn(nodes, values, support_floor=1)
    R = np.e ** 3
    specs = [
        ("power weight, |u|^p", 2.0, 0.0, WeightSpec(-1.5)),
        ("gradient term", 0.0, 2.5, WeightSpec(0.5)),
        ("log weight", 2.0, 0.0, WeightSpec(-1.0, 2.0, 0.0, R)),
        ("log-log weight", 2.0, 0.0, WeightSpec(-1.0, 2.0, 2.0, R)),
    ]
    pieces = _assemble_pieces(fn, None, (1.0, -0.5), False)
    gx, gw = gauss_rule(8)
    for label, a, b, w in specs:
        args = (*pieces, a, b, w.s, w.k, w.m, w.log_r, gx, gw)
        yield label, args


def _time(fun, args, reps):
    best = float("inf")
    value = None
    for _ in range(reps):
        t0 = time.perf_counter()
        value = fun(*args)
        best = min(best, time.perf_counter() - t0)
    return best, value


def run_benchmark(cells=4096, reps=30, seed=0):
    """Best-of-``reps`` timings per workload through both kernels."""
    rows = []
    for label, args in _workloads(cells, seed):
        t_py, v_py = _time(_kernels_py.weighted_piece_sum, args, reps)
        if _kernels is not None:
            t_cy, v_cy = _time(_kernels.weighted_piece_sum, args, reps)
            rel = abs(v_py - v_cy) / max(abs(v_py), abs(v_cy), 1e-300)
        else:
            t_cy, rel = None, None
        rows.append(BenchRow(label, cells, t_py, t_cy, rel))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=4096)
    ap.add_argument("--reps", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rows = run_benchmark(args.cells, args.reps, args.seed)
    header = f"{'workload':24s} {'cells':>6s} {'python':>10s} {'cython':>10s} {'speedup':>8s} {'rel diff':>10s}"
    print(header)
    print("-" * len(header))
    for r in rows:
        cy = f"{r.t_cython * 1e6:9.1f}u" if r.t_cython is not None else "       n/a"
        sp = f"{r.speedup:7.2f}x" if r.speedup is not None else "     n/a"
        rd = f"{r.rel_disagreement:10.2e}" if r.rel_disagreement is not None else "       n/a"
        print(f"{r.label:24s} {r.cells:6d} {r.t_python * 1e6:9.1f}u {cy} {sp} {rd}")
    if _kernels is None:
        print("compiled kernel not available; showing the numpy path only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
