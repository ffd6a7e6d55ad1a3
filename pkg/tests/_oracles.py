"""Independent slow-path oracles shared by the test modules.

Nothing in this file goes through the package's quadrature, ledger or
descent code: the eigensolver is a Sturm-count bisection on tridiagonal
pencils assembled from scratch, the convexity-constant scan is a plain
grid, and the high-precision weight integrals call mpmath directly.
"""

import math

import mpmath
import numpy as np


def smallest_pencil_eigenvalue(dA, oA, dB, oB, hi0=10.0):
    """Smallest eigenvalue of (A - lam*B) x = 0, A/B tridiagonal, B SPD.

    Sturm-count bisection: the number of eigenvalues below sigma equals the
    number of nonpositive pivots in the LDL factorization of A - sigma*B.
    No shifts, no iteration on vectors -- immune to the clustering that can
    stall inverse iteration on these badly graded meshes.
    """
    dA = np.asarray(dA, dtype=float)
    oA = np.asarray(oA, dtype=float)
    dB = np.asarray(dB, dtype=float)
    oB = np.asarray(oB, dtype=float)

    def count_below(sigma):
        d = dA - sigma * dB
        o = oA - sigma * oB
        cnt = 0
        piv = d[0]
        if piv <= 0.0:
            cnt += 1
        for i in range(1, d.size):
            denom = piv if piv != 0.0 else 1e-300
            piv = d[i] - o[i - 1] ** 2 / denom
            if piv <= 0.0:
                cnt += 1
        return cnt

    lo, hi = 0.0, hi0
    for _ in range(200):
        if count_below(hi) >= 1:
            break
        hi *= 4.0
    else:
        raise RuntimeError("no eigenvalue bracketed below hi0 * 4**200")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if count_below(mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def fe_pencil(alpha, nodes, boundary_coeff):
    """P1 finite-element matrices of the p = 2 quotient on the given nodes.

    A = stiffness with weight t^(2 alpha) minus the boundary term at the
    right endpoint; B = mass with weight t^(2 alpha - 2).  Assembled here
    with leggauss(16) per cell, independently of the package quadrature.
    Returns the tridiagonal data (dA, oA, dB, oB).
    """
    nodes = np.asarray(nodes, dtype=float)
    h = np.diff(nodes)
    ap = 2.0 * alpha
    t0, t1 = nodes[:-1], nodes[1:]
    if ap == -1.0:
        mom = np.log(t1 / t0)
    else:
        mom = (t1 ** (ap + 1.0) - t0 ** (ap + 1.0)) / (ap + 1.0)

    N = nodes.size
    stiff = mom / h ** 2
    dA = np.zeros(N)
    dA[:-1] += stiff
    dA[1:] += stiff
    dA[-1] -= boundary_coeff
    oA = -stiff

    gx, gw = np.polynomial.legendre.leggauss(16)
    xi = 0.5 * (gx + 1.0)
    tg = t0[:, None] + h[:, None] * xi[None, :]
    w = tg ** (ap - 2.0) * (0.5 * h)[:, None] * gw[None, :]
    b1 = xi[None, :]
    b0 = 1.0 - b1
    dB = np.zeros(N)
    dB[:-1] += (w * b0 * b0).sum(axis=1)
    dB[1:] += (w * b1 * b1).sum(axis=1)
    oB = (w * b0 * b1).sum(axis=1)
    return dA, oA, dB, oB


def pinned_eigenvalue(alpha, nodes, boundary_coeff, pin_right=False):
    """Discrete infimum of the p = 2 quotient with u(t_min) = 0.

    ``pin_right`` additionally imposes u(t_max) = 0 (the plain mode with
    no boundary term).
    """
    dA, oA, dB, oB = fe_pencil(alpha, nodes, boundary_coeff)
    lo = 1
    hi = len(dA) - (1 if pin_right else 0)
    return smallest_pencil_eigenvalue(
        dA[lo:hi], oA[lo:hi - 1], dB[lo:hi], oB[lo:hi - 1]
    )


def brute_cp(p, q, points_per_sign=500_000):
    """Grid infimum of (|1+X|^p - 1 - p X) / |X|^q over both signs of X.

    Log-spaced scan over |X| in [1e-8, 1e6]; plain arithmetic, no series.
    """
    mags = np.logspace(-8.0, 6.0, points_per_sign)
    best = math.inf
    for sign in (1.0, -1.0):
        x = sign * mags
        gap = np.abs(1.0 + x) ** p - 1.0 - p * x
        best = min(best, float(np.min(gap / np.abs(x) ** q)))
    return best


def mp_weight_integral(s, k, m, R, lower, upper, dps=40):
    """High-precision integral of t^s * A1^-k * A2^-m over (lower, upper)."""
    with mpmath.workdps(dps):
        logR = mpmath.log(R)

        def f(t):
            val = t ** s
            if k:
                val /= (logR - mpmath.log(t)) ** k
            if m:
                val /= mpmath.log(logR - mpmath.log(t)) ** m
            return val

        return float(mpmath.quad(f, [lower, upper]))


def boundary_polyline_distance(a, b, x, samples):
    """Distance from x to the closest of `samples` points on the ellipse
    t -> (a cos t, b sin t); the sampling oracle of the geometry tests."""
    t = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    dx = a * np.cos(t) - x[0]
    dy = b * np.sin(t) - x[1]
    return float(np.sqrt(np.min(dx * dx + dy * dy)))
