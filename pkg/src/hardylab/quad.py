"""Weighted quadrature of piecewise-linear functions.

Weights are the one catalogue the whole package uses:

    w(t) = t^s * A1(t)^-k * A2(t)^-m,   A1 = log(R/t), A2 = log A1.

Integrals of ``|u|^a |u'|^b w(t)`` over the support of a piecewise-linear
``u`` are Gauss sums per cell, dispatched to the active kernel backend.  A
small closed-form catalogue provides independent oracles for the pure weight
integrals (a = b = 0, u == 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .meshfn import PiecewiseFn

__all__ = [
    "WeightSpec",
    "IntegralResult",
    "integrate_weighted",
    "closed_form_oracle",
    "CatalogueError",
    "boundary_trace_1d",
]

_E = math.e


class CatalogueError(ValueError):
    """Raised when no closed form is catalogued for a weight/bounds pair."""


@dataclass(frozen=True)
class WeightSpec:
    """Weight ``t^s A1^-k A2^-m`` with A1 = log(R/t).

    ``R`` is required as soon as a log factor is present (k or m nonzero);
    for m != 0 the weight is only defined up to t = 1 when R > e, which is
    enforced here.
    """

    s: float
    k: float = 0.0
    m: float = 0.0
    R: float | None = None

    def __post_init__(self):
        if (self.k != 0.0 or self.m != 0.0) and self.R is None:
            raise ValueError("log-weighted spec requires R")
        if self.R is not None:
            if self.k != 0.0 and self.R <= 1.0:
                raise ValueError("A1 factor requires R > 1")
            if self.m != 0.0 and self.R <= _E:
                raise ValueError("A2 factor requires R > e")

    @classmethod
    def power(cls, s):
        return cls(float(s))

    @classmethod
    def power_log(cls, s, k, R):
        return cls(float(s), float(k), 0.0, float(R))

    @classmethod
    def power_log_log(cls, s, k, m, R):
        return cls(float(s), float(k), float(m), float(R))

    @property
    def log_r(self) -> float:
        return 0.0 if self.R is None else math.log(self.R)

    def evaluate(self, t):
        """Pointwise values (reference path, used by tests and oracles)."""
        t = np.asarray(t, dtype=float)
        out = t ** self.s if self.s != 0.0 else np.ones_like(t)
        if self.k != 0.0 or self.m != 0.0:
            a1v = self.log_r - np.log(t)
            if self.k != 0.0:
                out = out * a1v ** (-self.k)
            if self.m != 0.0:
                out = out * np.log(a1v) ** (-self.m)
        return out

    def describe(self) -> str:
        parts = []
        if self.s != 0.0:
            parts.append(f"t^{self.s:g}")
        if self.k != 0.0:
            parts.append(f"A1^-{self.k:g}")
        if self.m != 0.0:
            parts.append(f"A2^-{self.m:g}")
        return " ".join(parts) if parts else "1"


@dataclass
class IntegralResult:
    value: float
    error_estimate: float | None = None
    cells: int = 0
    warnings: list = field(default_factory=list)


_GAUSS_CACHE: dict = {}


def gauss_rule(order: int):
    """Cached Gauss-Legendre nodes/weights on [-1, 1]."""
    rule = _GAUSS_CACHE.get(order)
    if rule is None:
        x, w = np.polynomial.legendre.leggauss(order)
        rule = (np.ascontiguousarray(x), np.ascontiguousarray(w))
        _GAUSS_CACHE[order] = rule
    return rule


def _assemble_pieces(fn: PiecewiseFn, intervals, multiplier, keep_zero_cells):
    nodes = fn.nodes
    values = fn.values
    slopes = fn.slopes()
    n_cells = fn.n

    if intervals is None:
        span_lo = np.array([nodes[0]])
        span_hi = np.array([nodes[-1]])
    else:
        span_lo = np.array([float(a) for a, _ in intervals])
        span_hi = np.array([float(b) for _, b in intervals])
        keep = span_hi > span_lo
        span_lo, span_hi = span_lo[keep], span_hi[keep]
    if span_lo.size == 0:
        empty = np.empty(0)
        return (empty,) * 6
    if span_lo.min() < nodes[0] - 1e-12 or span_hi.max() > nodes[-1] + 1e-12:
        raise ValueError("integration interval outside the mesh")

    # clipped cell ranges per span, flattened without a per-cell Python loop
    i0 = np.clip(np.searchsorted(nodes, span_lo, side="right") - 1, 0, n_cells - 1)
    i1 = np.clip(np.searchsorted(nodes, span_hi, side="left") - 1, 0, n_cells - 1)
    counts = i1 - i0 + 1
    total = int(counts.sum())
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    idx = np.repeat(i0 - offsets, counts) + np.arange(total)
    lo = np.maximum(np.repeat(span_lo, counts), nodes[idx])
    hi = np.minimum(np.repeat(span_hi, counts), nodes[idx + 1])

    mask = hi > lo
    if not keep_zero_cells:
        mask &= ~((values[idx] == 0.0) & (values[idx + 1] == 0.0))
    idx, lo, hi = idx[mask], lo[mask], hi[mask]

    slope = slopes[idx]
    ulo = values[idx] + slope * (lo - nodes[idx])
    if multiplier is None:
        mlo = np.ones_like(lo)
        mslope = np.zeros_like(lo)
    elif isinstance(multiplier, tuple):
        c0, c1 = multiplier
        mlo = c0 + c1 * lo
        mslope = np.full_like(lo, float(c1))
    else:
        if not np.array_equal(multiplier.nodes, fn.nodes):
            raise ValueError("piecewise multiplier must share the function's mesh")
        m_slopes = multiplier.slopes()
        mslope = m_slopes[idx]
        mlo = multiplier.values[idx] + mslope * (lo - nodes[idx])

    return tuple(
        np.ascontiguousarray(arr, dtype=float)
        for arr in (lo, hi, ulo, slope, mlo, mslope)
    )


def _split_pieces(pieces):
    lo, hi, ulo, slope, mlo, mslope = pieces
    mid = 0.5 * (lo + hi)
    umid = ulo + slope * (mid - lo)
    mmid = mlo + mslope * (mid - lo)

    def interleave(first, second):
        out = np.empty(first.size * 2)
        out[0::2] = first
        out[1::2] = second
        return out

    return (
        interleave(lo, mid),
        interleave(mid, hi),
        interleave(ulo, umid),
        interleave(slope, slope),
        interleave(mlo, mmid),
        interleave(mslope, mslope),
    )


def _kernel(pieces, a, b, weight, gx, gw):
    lo, hi, ulo, slope, mlo, mslope = pieces
    return backend.weighted_piece_sum(
        lo, hi, ulo, slope, mlo, mslope,
        float(a), float(b), float(weight.s), float(weight.k), float(weight.m),
        weight.log_r, gx, gw,
    )


def integrate_weighted(fn: PiecewiseFn, a_exp, b_exp, weight: WeightSpec, *,
                       intervals=None, multiplier=None, gauss_order=8,
                       estimate_error=True) -> IntegralResult:
    """Integrate ``|fn|^a_exp |fn'|^b_exp * weight * multiplier``.

    ``intervals`` restricts the integral to a list of (lo, hi) subintervals
    of the mesh (used by the partition inequalities); ``multiplier`` is an
    optional extra linear factor — a ``(c0, c1)`` tuple meaning ``c0 + c1*t``
    or a :class:`PiecewiseFn` on the same mesh.

    Cells where the function vanishes identically are skipped when any of
    the exponents is positive (the integrand is zero there); a pure weight
    integral (a_exp = b_exp = 0) keeps them.

    By default every piece is also evaluated split at its midpoint; the
    error estimate is the difference between the two sums, and a divergence
    warning is attached when the leftmost piece dominates the total while
    refinement still moves it.  ``estimate_error=False`` skips the second
    pass (used by the bulk randomized suites, where the tolerance already
    accounts for quadrature error).
    """
    if weight.m != 0.0 and fn.t_max >= weight.R / _E:
        raise ValueError("A2 factor undefined on part of the mesh (need t < R/e)")
    keep_zero = (a_exp == 0.0 and b_exp == 0.0)
    pieces = _assemble_pieces(fn, intervals, multiplier, keep_zero)
    gx, gw = gauss_rule(gauss_order)
    value = _kernel(pieces, a_exp, b_exp, weight, gx, gw)
    result = IntegralResult(value=value, cells=int(pieces[0].size))
    if estimate_error:
        refined = _kernel(_split_pieces(pieces), a_exp, b_exp, weight, gx, gw)
        result.error_estimate = abs(value - refined)
        if pieces[0].size:
            first = tuple(arr[:1] for arr in pieces)
            head = _kernel(first, a_exp, b_exp, weight, gx, gw)
            if (
                abs(head) > 0.5 * abs(value)
                and result.error_estimate > 0.1 * abs(value) > 0.0
            ):
                result.warnings.append(
                    f"leftmost cell [{pieces[0][0]:.3e}, {pieces[1][0]:.3e}] "
                    "dominates the integral and refinement still moves it; "
                    "the integral may be divergent at the left endpoint"
                )
    return result


def closed_form_oracle(weight: WeightSpec, bounds) -> float:
    """Closed-form value of ``integral of weight over (lower, upper)``.

    Catalogue (independent of the quadrature path):

    * pure power: antiderivative ``t^(s+1)/(s+1)`` (log for s = -1);
    * ``s = -1`` with an A1 factor: ``A1^(1-k)/(k-1)`` (A2 for k = 1);
    * ``s = -1, k = 1`` with an A2 factor: ``A2^(1-m)/(m-1)``
      (log A2 for m = 1).

    ``lower = 0`` is allowed whenever the integral converges there;
    divergent or uncatalogued combinations raise :class:`CatalogueError`.
    """
    lower, upper = (float(x) for x in bounds)
    if not (0.0 <= lower < upper):
        raise CatalogueError(f"need 0 <= lower < upper, got {bounds}")
    s, k, m, R = weight.s, weight.k, weight.m, weight.R

    if k == 0.0 and m == 0.0:
        if s == -1.0:
            if lower == 0.0:
                raise CatalogueError("integral of 1/t diverges at 0")
            return math.log(upper / lower)
        if lower == 0.0 and s + 1.0 <= 0.0:
            raise CatalogueError(f"integral of t^{s:g} diverges at 0")
        return (upper ** (s + 1.0) - lower ** (s + 1.0)) / (s + 1.0)

    if s != -1.0:
        raise CatalogueError(
            f"no closed form catalogued for {weight.describe()} (need s = -1)"
        )
    log_r = math.log(R)

    def A1(t):
        return log_r - math.log(t)

    if m == 0.0:
        if k == 1.0:
            if lower == 0.0:
                raise CatalogueError("integral of 1/(t A1) diverges at 0")
            return math.log(A1(lower)) - math.log(A1(upper))
        if lower == 0.0:
            if k < 1.0:
                raise CatalogueError(f"integral of A1^-{k:g}/t diverges at 0")
            return A1(upper) ** (1.0 - k) / (k - 1.0)
        return (A1(upper) ** (1.0 - k) - A1(lower) ** (1.0 - k)) / (k - 1.0)

    if k != 1.0:
        raise CatalogueError(
            f"no closed form catalogued for {weight.describe()} (need k = 1)"
        )
    if A1(upper) <= 1.0:
        raise CatalogueError("A2 catalogue needs A1(upper) > 1, i.e. upper < R/e")

    def A2(t):
        return math.log(A1(t))

    if m == 1.0:
        if lower == 0.0:
            raise CatalogueError("integral of 1/(t A1 A2) diverges at 0")
        return math.log(A2(lower)) - math.log(A2(upper))
    if lower == 0.0:
        if m < 1.0:
            raise CatalogueError(f"integral of A2^-{m:g}/(t A1) diverges at 0")
        return A2(upper) ** (1.0 - m) / (m - 1.0)
    return (A2(upper) ** (1.0 - m) - A2(lower) ** (1.0 - m)) / (m - 1.0)


def boundary_trace_1d(fn: PiecewiseFn, p: float) -> float:
    """``|fn(t_max)|^p`` — the one-sided boundary term of the inequalities."""
    return abs(float(fn.values[-1])) ** p
