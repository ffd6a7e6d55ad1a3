"""Graded meshes on (0, 1], piecewise-linear test functions, and the named
probe families used by the sharpness and degeneration experiments.

Everything downstream works with :class:`PiecewiseFn`: nodes, nodal values
and a ``support_floor`` marking how many leading values are pinned to zero
(the discrete surrogate for compact support near the singular endpoint).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Params, a1

__all__ = [
    "make_mesh",
    "graded_mesh",
    "insert_breakpoints",
    "PiecewiseFn",
    "TestFamily",
    "differentiate",
    "validate_shape",
    "sample_family",
    "FAMILIES",
    "write_piecewise",
    "read_piecewise",
    "PartitionResult",
    "partition_sets",
]


def graded_mesh(n, t_min, gamma=1.0, mode="offset", t_max=1.0):
    """Graded mesh of ``n`` cells on [t_min, t_max].

    mode="offset" (default)
        ``t_i = t_min + (t_max - t_min) * (i/n)**gamma``.  Every cell has
        positive width; grading concentrates cells near ``t_min``.  The
        maximum relative cell width ``(t_{i+1}-t_i)/t_{i+1}`` is bounded by
        ``gamma / (n * t_min**(1/gamma))``.

    mode="power"
        ``t_i = t_max * (i/n)**gamma`` clipped below at ``t_min``; clipped
        leading nodes collapse and are deduplicated, so the returned mesh may
        have fewer than ``n`` cells.

    Returns the array of nodes (length ``n+1`` for "offset").
    """
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if not (0.0 < t_min < t_max):
        raise ValueError(f"need 0 < t_min < t_max, got t_min={t_min}, t_max={t_max}")
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    x = (np.arange(n + 1) / n) ** float(gamma)
    if mode == "offset":
        nodes = t_min + (t_max - t_min) * x
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError(
                "grading too aggressive: leading cells collapse below the "
                "floating-point resolution of t_min"
            )
    elif mode == "power":
        nodes = np.maximum(t_max * x, t_min)
        nodes = np.unique(nodes)
    else:
        raise ValueError(f"unknown mesh mode {mode!r}")
    nodes[0] = t_min
    nodes[-1] = t_max
    return nodes


def make_mesh(n, gamma, t_min, mode="offset"):
    """Graded mesh of ``n`` cells on [t_min, 1] (argument order n, gamma,
    t_min; see :func:`graded_mesh` for the grading formulas).

    Intended production ranges are n >= 16, gamma >= 1, t_min <= 1e-2, but
    smaller meshes are accepted — the uniform 4-cell mesh on [1/4, 1] is a
    documented reference case.
    """
    return graded_mesh(n, t_min, gamma, mode=mode)


def insert_breakpoints(nodes, points):
    """Insert explicit breakpoints into a mesh (union of node sets).

    Points must lie inside [nodes[0], nodes[-1]]; duplicates are dropped.
    Useful before sampling a family with kinks (Ramp, LogRamp) so the
    piecewise-linear representation is exact.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if pts.size and (pts.min() < nodes[0] or pts.max() > nodes[-1]):
        raise ValueError("breakpoints must lie inside the mesh interval")
    return np.union1d(np.asarray(nodes, dtype=float), pts)


@dataclass
class PiecewiseFn:
    """Continuous piecewise-linear function on [nodes[0], nodes[-1]].

    ``values[:support_floor]`` must all be zero; the function is understood
    to vanish identically to the left of ``nodes[support_floor]`` (and below
    the mesh, down to 0).
    """

    nodes: np.ndarray
    values: np.ndarray
    support_floor: int = 0

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.size < 2:
            raise ValueError("nodes must be a 1-D array with at least 2 entries")
        if self.values.shape != self.nodes.shape:
            raise ValueError("values must have the same shape as nodes")
        if not np.all(np.diff(self.nodes) > 0.0):
            raise ValueError("nodes must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        if not (0 <= self.support_floor <= self.nodes.size):
            raise ValueError(f"support_floor out of range: {self.support_floor}")
        if self.support_floor and np.any(self.values[: self.support_floor] != 0.0):
            raise ValueError("values below the support floor must be exactly zero")

    @property
    def n(self) -> int:
        return self.nodes.size - 1

    @property
    def t_min(self) -> float:
        return float(self.nodes[0])

    @property
    def t_max(self) -> float:
        return float(self.nodes[-1])

    def slopes(self):
        """Per-cell derivative values (length n)."""
        return np.diff(self.values) / np.diff(self.nodes)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < self.nodes[0]) or np.any(arr > self.nodes[-1]):
            raise ValueError("evaluation point outside the mesh interval")
        out = np.interp(arr, self.nodes, self.values)
        return float(out) if np.ndim(t) == 0 else out

    def scaled(self, c) -> "PiecewiseFn":
        return replace(self, values=self.values * float(c))


def differentiate(fn: PiecewiseFn):
    """Exact per-cell slopes of a piecewise-linear function (length n array).

    Linear in the nodal values: differentiate(a*f + b*g) = a*f' + b*g'.
    """
    return fn.slopes()


def validate_shape(fn: PiecewiseFn):
    """Advisory shape flags for probe-class functions.

    The probe class consists of functions vanishing at the left endpoint,
    rising with a nonzero initial slope and flat at the right endpoint.
    Returns a list of flag strings (empty list = fully conforming); callers
    decide whether any flag is an error.
    """
    flags = []
    if not np.any(fn.values != 0.0):
        return ["identically_zero"]
    if fn.values[0] != 0.0:
        flags.append("nonzero_left_value")
    s = fn.slopes()
    if s[-1] != 0.0:
        flags.append("nonzero_right_slope")
    return flags


def _family_power_probe(params: Params, nodes, eps):
    if eps <= 0.0:
        raise ValueError("PowerProbe requires eps > 0")
    expo = params.beta + eps
    vals = np.asarray(nodes, dtype=float) ** expo
    return PiecewiseFn(nodes, vals, support_floor=0)


def _family_log_probe(params: Params, nodes, eps):
    bc = 1.0 - 1.0 / params.p
    if not (0.0 < eps < bc):
        raise ValueError(f"LogProbe requires 0 < eps < 1 - 1/p = {bc}")
    vals = a1(np.asarray(nodes, dtype=float), params.R) ** (bc - eps)
    return PiecewiseFn(nodes, vals, support_floor=0)


def _family_ramp(params: Params, nodes, eps):
    nodes = np.asarray(nodes, dtype=float)
    if not (nodes[0] <= eps <= nodes[-1]):
        raise ValueError("Ramp requires t_min <= eps <= t_max")
    vals = np.minimum(nodes / eps, 1.0)
    return PiecewiseFn(nodes, vals, support_floor=0)


def _family_log_ramp(params: Params, nodes, eps):
    nodes = np.asarray(nodes, dtype=float)
    if not (nodes[0] <= eps < 0.5):
        raise ValueError("LogRamp requires t_min <= eps < 1/2")
    if nodes[-1] < 0.5:
        raise ValueError("LogRamp requires the mesh to reach 1/2")
    A1e = a1(eps, params.R)
    A1h = a1(0.5, params.R)
    vals = np.clip((A1e - a1(nodes, params.R)) / (A1e - A1h), 0.0, 1.0)
    vals[nodes <= eps] = 0.0
    floor = int(np.searchsorted(nodes, eps, side="right"))
    return PiecewiseFn(nodes, vals, support_floor=floor)


FAMILIES = {
    "PowerProbe": _family_power_probe,
    "LogProbe": _family_log_probe,
    "Ramp": _family_ramp,
    "LogRamp": _family_log_ramp,
}


@dataclass(frozen=True)
class TestFamily:
    """A named probe family with its parameter context.

    PowerProbe
        ``t**(1 - alpha - 1/p + eps)``, the near-extremal power for the
        plain weighted inequality (clipped at t_min; support_floor 0).
    LogProbe
        ``A1(t)**(1 - 1/p - eps)``, the near-extremal profile on the
        critical line; requires 0 < eps < 1 - 1/p.
    Ramp
        ``min(t/eps, 1)`` — plateau family driving critical-regime energies
        to zero.  Insert ``eps`` as a breakpoint for an exact representation.
    LogRamp
        0 on [t_min, eps], then ``(A1(eps)-A1(t))/(A1(eps)-A1(1/2))`` up to
        1/2, then 1.  Insert ``eps`` and 1/2 as breakpoints.
    """

    __test__ = False  # not a test case despite the name

    kind: str
    eps: float
    params: Params

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError(
                f"unknown family {self.kind!r}; options: {sorted(FAMILIES)}"
            )


def sample_family(family: TestFamily, mesh):
    """Sample a probe family onto a mesh (nodal interpolation).

    The support floor is set to the first node where the family is nonzero.
    """
    return FAMILIES[family.kind](family.params, mesh, family.eps)


# ---------------------------------------------------------------------------
# Text round-trip
# ---------------------------------------------------------------------------


def write_piecewise(fn: PiecewiseFn, path, params: Params | None = None):
    """Write a function as two columns ``node value`` with a header line
    carrying the experiment context (alpha, p, R, t_min, support_floor)."""
    with open(path, "w") as fh:
        if params is not None:
            fh.write(
                f"# alpha={params.alpha!r} p={params.p!r} R={params.R!r} "
                f"t_min={fn.t_min!r} support_floor={fn.support_floor}\n"
            )
        else:
            fh.write(f"# t_min={fn.t_min!r} support_floor={fn.support_floor}\n")
        for t, v in zip(fn.nodes, fn.values):
            fh.write(f"{format(t, '.17g')} {format(v, '.17g')}\n")


def read_piecewise(path):
    """Inverse of :func:`write_piecewise`; returns (fn, header_dict)."""
    header = {}
    nodes, values = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, val = token.split("=", 1)
                        header[key] = float(val)
                continue
            t, v = line.split()
            nodes.append(float(t))
            values.append(float(v))
    floor = int(header.get("support_floor", 0))
    fn = PiecewiseFn(np.asarray(nodes), np.asarray(values), support_floor=floor)
    return fn, header


# ---------------------------------------------------------------------------
# Ratio partitions
# ---------------------------------------------------------------------------


@dataclass
class PartitionResult:
    """Ratio partition of [nodes[0], nodes[-1]] into interval lists.

    ``a_set`` holds the low-ratio intervals (ratio <= threshold M, ties
    included per the defining convention), ``b_set`` the intervals where the
    ratio strictly exceeds M, and ``c_points`` the common boundary points of
    the two closures.  The interval interiors are disjoint and together the
    sets cover the domain exactly.  The domain endpoints themselves are
    low-ratio points by convention; being measure-zero they are not
    represented as degenerate intervals.
    """

    a_set: list = field(default_factory=list)
    b_set: list = field(default_factory=list)
    c_points: list = field(default_factory=list)
    threshold: float = 0.0
    weight_kind: str = "plain"

    def measure(self):
        ma = sum(hi - lo for lo, hi in self.a_set)
        mb = sum(hi - lo for lo, hi in self.b_set)
        return ma, mb


def _threshold_roots(lo, hi, ulo, slope, threshold, kind, R):
    """Solutions of weight(t)*|slope| = threshold*|u(t)| inside (lo, hi).

    For the plain ratio the equation is linear in t and solved exactly, then
    polished by bisection on the residual (a no-op in exact arithmetic, and
    the behavioural contract for the log-weighted ratio where the equation
    is transcendental).
    """
    def resid(t):
        u = ulo + slope * (t - lo)
        w = t if kind == "plain" else t * (np.log(R) - np.log(t))
        return w * abs(slope) - threshold * abs(u)

    roots = []
    if kind == "plain" and slope != 0.0:
        # |s| t = M*sigma*(ulo + s (t - lo)) for each sign sigma of u
        for sigma in (+1.0, -1.0):
            denom = abs(slope) - threshold * sigma * slope
            if denom == 0.0:
                continue
            t = threshold * sigma * (ulo - slope * lo) / denom
            if lo < t < hi:
                roots.append(t)
    # bisection polish / fallback on a sign-change scan
    candidates = sorted(set(roots))
    grid = np.linspace(lo, hi, 9)
    rv = [resid(float(t)) for t in grid]
    for i in range(len(grid) - 1):
        if rv[i] == 0.0 or rv[i] * rv[i + 1] >= 0.0:
            continue
        x0, x1 = float(grid[i]), float(grid[i + 1])
        for _ in range(80):
            xm = 0.5 * (x0 + x1)
            fm = resid(xm)
            if fm == 0.0:
                x0 = x1 = xm
                break
            if fm * resid(x0) < 0.0:
                x1 = xm
            else:
                x0 = xm
        candidates.append(0.5 * (x0 + x1))
    out = []
    for t in sorted(candidates):
        if lo < t < hi and not any(abs(t - s) <= 1e-13 * hi for s in out):
            out.append(t)
    return out


def partition_sets(fn: PiecewiseFn, threshold, weight_kind="plain", R=None):
    """Split the domain of ``fn`` by the derivative-to-value ratio.

    weight_kind="plain" uses ratio ``t |fn'| / |fn|``; "logweighted" uses
    ``t A1(t) |fn'| / |fn|`` (requires R).  The high-ratio set collects the
    points where the ratio strictly exceeds ``threshold``; ties go to the
    low-ratio set.  On each cell the ratio is monotone between zeros of
    ``fn``, so the split points are cell endpoints, zeros of ``fn`` and
    solutions of the threshold equation (exact for the plain ratio, then
    bisection-polished).  Adjacent intervals with the same label are merged
    and the surviving label-change points are reported as ``c_points``.
    """
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    if weight_kind not in ("plain", "logweighted"):
        raise ValueError(f"unknown partition weight_kind {weight_kind!r}")
    if weight_kind == "logweighted" and R is None:
        raise ValueError("logweighted partition requires R")

    nodes, values = fn.nodes, fn.values
    slopes = fn.slopes()
    lo_all, hi_all = nodes[:-1], nodes[1:]
    ulo_all, uhi_all = values[:-1], values[1:]
    zero_cells = (ulo_all == 0.0) & (uhi_all == 0.0)
    crosses = ulo_all * uhi_all < 0.0

    # residual weight(t)|s| - M|u(t)| on a 9-point scan of every cell at
    # once; cells without any sign structure are labelled by the midpoint
    # ratio directly, the rest go through the per-cell root finder.
    tau = np.linspace(0.0, 1.0, 9)
    t_scan = lo_all[:, None] + (hi_all - lo_all)[:, None] * tau[None, :]
    u_scan = ulo_all[:, None] + slopes[:, None] * (t_scan - lo_all[:, None])
    if weight_kind == "plain":
        w_scan = t_scan
    else:
        w_scan = t_scan * (math.log(R) - np.log(t_scan))
    res = w_scan * np.abs(slopes)[:, None] - threshold * np.abs(u_scan)
    # exact ties (ratio == threshold) reach here as +-1 ulp noise; a relative
    # dead band keeps them out of the high-ratio set (ties belong to A)
    mag = w_scan * np.abs(slopes)[:, None] + threshold * np.abs(u_scan)
    res[np.abs(res) <= 1e-12 * mag] = 0.0
    all_tie = np.all(res == 0.0, axis=1)
    sign_change = np.any(res[:, :-1] * res[:, 1:] < 0.0, axis=1)
    interior_zero = np.any(res[:, 1:-1] == 0.0, axis=1) & ~all_tie
    structured = (~zero_cells) & ~all_tie & (sign_change | crosses | interior_zero)
    mid_is_b = (res[:, 4] > 0.0) & ~all_tie

    pieces = []  # (lo, hi, label)
    for i in range(fn.n):
        lo, hi = float(lo_all[i]), float(hi_all[i])
        if zero_cells[i]:
            pieces.append((lo, hi, "a"))  # ratio 0/0 -> 0 by convention
            continue
        if not structured[i]:
            pieces.append((lo, hi, "b" if mid_is_b[i] else "a"))
            continue
        ulo, s = float(ulo_all[i]), float(slopes[i])
        cuts = [lo]
        if crosses[i]:
            cuts.append(lo - ulo / s)
        cuts.extend(_threshold_roots(lo, hi, ulo, s, threshold, weight_kind, R))
        cuts.append(hi)
        cuts = sorted(set(cuts))
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            if x1 - x0 <= 0.0:
                continue
            mid = 0.5 * (x0 + x1)
            u_mid = ulo + s * (mid - lo)
            if u_mid == 0.0:
                r = float("inf") if s != 0.0 else 0.0
            else:
                w_mid = mid if weight_kind == "plain" else mid * (
                    math.log(R) - math.log(mid)
                )
                r = w_mid * abs(s) / abs(u_mid)
            pieces.append((x0, x1, "b" if r > threshold * (1.0 + 1e-12) else "a"))

    part = PartitionResult(threshold=float(threshold), weight_kind=weight_kind)
    previous_label = None
    for lo, hi, label in pieces:
        target = part.b_set if label == "b" else part.a_set
        if target and abs(target[-1][1] - lo) <= 1e-15 * max(1.0, abs(lo)) and (
            previous_label == label
        ):
            target[-1] = (target[-1][0], hi)
        else:
            target.append((lo, hi))
            if previous_label is not None and previous_label != label:
                part.c_points.append(lo)
        previous_label = label
    return part
