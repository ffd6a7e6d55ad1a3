"""Pure-Python (numpy) quadrature kernel.

Reference implementation of the hot loop: Gauss sums of
``|u|^a |u'|^b t^s A1(t)^-k A2(t)^-m mult(t)`` over linear pieces, with
compensated (Kahan) accumulation across pieces in array order.  The compiled
kernel in ``hardylab._kernels`` implements the identical contract; results
agree to rounding (~1e-15 relative), not bitwise, because the elementwise
transcendentals differ by ulps between libm and numpy's SIMD paths.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def weighted_piece_sum(lo, hi, ulo, slope, mlo, mslope,
                       a, b, s, k, m, log_r, gauss_x, gauss_w):
    """Sum of per-piece Gauss quadratures.

    Each piece i is the interval [lo[i], hi[i]] carrying the linear function
    u(t) = ulo[i] + slope[i]*(t - lo[i]) and the linear multiplier
    mult(t) = mlo[i] + mslope[i]*(t - lo[i]).  The integrand is

        |u(t)|^a * |slope[i]|^b * t^s * A1(t)^-k * A2(t)^-m * mult(t)

    with A1(t) = log_r - log t and A2 = log A1.  Factors with zero exponent
    are skipped entirely (so a=b=0 integrates the bare weight).  Piece
    results are accumulated with Kahan summation in array order.
    """
    lo = np.asarray(lo, dtype=float)
    if lo.size == 0:
        return 0.0
    hi = np.asarray(hi, dtype=float)
    ulo = np.asarray(ulo, dtype=float)
    slope = np.asarray(slope, dtype=float)
    mlo = np.asarray(mlo, dtype=float)
    mslope = np.asarray(mslope, dtype=float)

    half = 0.5 * (hi - lo)
    t = lo[:, None] + half[:, None] * (gauss_x[None, :] + 1.0)
    if s != 0.0:
        vals = t ** s
    else:
        vals = np.ones_like(t)
    if k != 0.0 or m != 0.0:
        a1v = log_r - np.log(t)
        if k != 0.0:
            vals = vals * a1v ** (-k)
        if m != 0.0:
            vals = vals * np.log(a1v) ** (-m)
    if a != 0.0:
        u = ulo[:, None] + slope[:, None] * (t - lo[:, None])
        vals = vals * np.abs(u) ** a
    if b != 0.0:
        vals = vals * np.abs(slope[:, None]) ** b
    vals = vals * (mlo[:, None] + mslope[:, None] * (t - lo[:, None]))
    per_piece = (vals * gauss_w[None, :]).sum(axis=1) * half

    total = 0.0
    comp = 0.0
    for x in per_piece:
        y = float(x) - comp
        tmp = total + y
        comp = (tmp - total) - y
        total = tmp
    return total
