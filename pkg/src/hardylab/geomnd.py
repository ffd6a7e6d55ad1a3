"""Planar domains with distance-to-boundary weights.

Distance functions for disks, annuli and ellipses; band (tubular-coordinate)
quadrature over the collar ``Omega_eta = {0 < delta < eta}`` and its level
curves ``Sigma_t = {delta = t}``; deficit reports for the six
distance-weight displays; and the critical-regime degeneration demo driven
by radial ramp fields.

Coordinates.  Each boundary component is parameterized by ``theta`` in
[0, 2*pi); the point at distance ``t`` from the boundary along the inward
normal sits on ``Sigma_t``, whose surface measure is ``g(t, theta) dtheta``
with ``g = |c'(theta)| * (1 - t * kappa(theta))``.  The factor
``1 - t*kappa`` is the Jacobian of the normal map relative to the boundary
measure and obeys the sandwich ``1 - c*t <= Jac <= 1 + c*t`` where ``c`` is
the domain's curvature bound.  Integrals over a band are therefore exact
products: Gauss cells in ``t`` times the periodic trapezoid rule in
``theta`` (spectrally accurate for the trigonometric angular factors used
here).

The angular integral of ``g`` is linear in ``t``:
``int g(t, theta) dtheta = A0 + A1c * t`` with ``A0`` the component length
and ``A1c = -2*pi`` for an outer boundary curve (``+2*pi`` for a hole) —
the turning number makes the coefficient curvature-independent.  Radial
fields consequently reduce every band integral to a one-dimensional
weighted integral with that linear multiplier; :func:`reduced_multiplier`
exposes the pair and the tests hold the two routes against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ellipe

from .core import (
    ConstantLedger,
    LedgerEntry,
    LedgerError,
    Params,
    Regime,
    build_ledger,
    classify,
    envelope_bound,
    lambda_const,
)
from .ineq1d import (
    DeficitReport,
    DemoRow,
    DemoTable,
    RegimeMismatchError,
    SuiteResult,
    SuiteRow,
    _case_seed,
)
from .meshfn import PiecewiseFn, graded_mesh
from .quad import WeightSpec, gauss_rule

__all__ = [
    "DomainError",
    "Disk",
    "Annulus",
    "Ellipse",
    "TrigPoly",
    "FieldFn",
    "TubularGrid",
    "ND_IDS",
    "default_eta",
    "distance",
    "tubular_grid",
    "tubular_quadrature",
    "trace_integral",
    "reduced_multiplier",
    "build_nd_ledger",
    "nd_deficit",
    "nd_nonnegativity_suite",
    "nd_critical_demo",
    "load_domain_config",
]

_TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Geometric failure: point outside the closure, band wider than the
    tubular reach, or an operation needing coordinates past that reach."""


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Component:
    """One boundary component in inward normal coordinates.

    ``speed`` and ``curvature`` are vectorized callables of theta;
    ``turning`` is the integral of ``curvature * speed`` over one period
    (2*pi for an outer curve, -2*pi for a hole); ``reach`` is the largest
    band width whose rays stay inside the domain without crossing rays of
    another component.
    """

    name: str
    speed: object
    curvature: object
    length: float
    turning: float
    reach: float

    def theta_factor(self, t, theta):
        """Surface-measure factor ``g(t, theta)`` on the grid t x theta."""
        sp = self.speed(theta)
        ka = self.curvature(theta)
        t = np.asarray(t, dtype=float)
        return sp[None, :] * (1.0 - t[:, None] * ka[None, :])


def _const_fn(value):
    v = float(value)

    def fn(theta):
        return np.full_like(np.asarray(theta, dtype=float), v)

    return fn


@dataclass(frozen=True)
class Disk:
    """Disk of radius ``rho`` centered at the origin."""

    rho: float

    def __post_init__(self):
        if not (isinstance(self.rho, (int, float)) and math.isfinite(self.rho)
                and self.rho > 0.0):
            raise ValueError(f"rho must be a positive finite number, got {self.rho!r}")

    @property
    def eta0(self) -> float:
        return self.rho

    @property
    def sup_delta(self) -> float:
        return self.rho

    @property
    def jacobian_c(self) -> float:
        return 1.0 / self.rho

    @property
    def supports_whole(self) -> bool:
        return True

    @property
    def components(self):
        return (
            _Component(
                name="boundary",
                speed=_const_fn(self.rho),
                curvature=_const_fn(1.0 / self.rho),
                length=_TWO_PI * self.rho,
                turning=_TWO_PI,
                reach=self.rho,
            ),
        )


@dataclass(frozen=True)
class Annulus:
    """Annulus ``r_in < |x| < r_out``; the distance ridge is the mid circle."""

    r_in: float
    r_out: float

    def __post_init__(self):
        ok = (
            isinstance(self.r_in, (int, float))
            and isinstance(self.r_out, (int, float))
            and math.isfinite(self.r_in)
            and math.isfinite(self.r_out)
            and 0.0 < self.r_in < self.r_out
        )
        if not ok:
            raise ValueError(
                f"need 0 < r_in < r_out, got r_in={self.r_in!r}, r_out={self.r_out!r}"
            )

    @property
    def width(self) -> float:
        return self.r_out - self.r_in

    @property
    def eta0(self) -> float:
        return 0.5 * self.width

    @property
    def sup_delta(self) -> float:
        return 0.5 * self.width

    @property
    def jacobian_c(self) -> float:
        return 1.0 / self.r_in

    @property
    def supports_whole(self) -> bool:
        return True

    @property
    def components(self):
        half = 0.5 * self.width
        return (
            _Component(
                name="outer",
                speed=_const_fn(self.r_out),
                curvature=_const_fn(1.0 / self.r_out),
                length=_TWO_PI * self.r_out,
                turning=_TWO_PI,
                reach=half,
            ),
            _Component(
                name="inner",
                speed=_const_fn(self.r_in),
                curvature=_const_fn(-1.0 / self.r_in),
                length=_TWO_PI * self.r_in,
                turning=-_TWO_PI,
                reach=half,
            ),
        )


@dataclass(frozen=True)
class Ellipse:
    """Ellipse with semi-axes ``a`` (x) and ``b`` (y).

    The boundary is ``(a cos theta, b sin theta)``; the inward normal map is
    a diffeomorphism up to the minimal curvature radius ``min(a,b)^2 /
    max(a,b)``, which is the tubular reach ``eta0``.  Whole-domain
    operations are not available (the region past the reach is not covered
    by normal coordinates); band operations are fully supported.
    """

    a: float
    b: float

    def __post_init__(self):
        ok = (
            isinstance(self.a, (int, float))
            and isinstance(self.b, (int, float))
            and math.isfinite(self.a)
            and math.isfinite(self.b)
            and self.a > 0.0
            and self.b > 0.0
        )
        if not ok:
            raise ValueError(f"need a, b > 0, got a={self.a!r}, b={self.b!r}")

    @property
    def eta0(self) -> float:
        return min(self.a, self.b) ** 2 / max(self.a, self.b)

    @property
    def sup_delta(self) -> float:
        # the distance to the boundary is maximal at the center
        return min(self.a, self.b)

    @property
    def jacobian_c(self) -> float:
        return max(self.a, self.b) / min(self.a, self.b) ** 2

    @property
    def supports_whole(self) -> bool:
        return False

    def _speed(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.sqrt(
            (self.a * np.sin(theta)) ** 2 + (self.b * np.cos(theta)) ** 2
        )

    def _curvature(self, theta):
        return self.a * self.b / self._speed(theta) ** 3

    @property
    def perimeter(self) -> float:
        major, minor = max(self.a, self.b), min(self.a, self.b)
        return 4.0 * major * float(ellipe(1.0 - (minor / major) ** 2))

    @property
    def components(self):
        return (
            _Component(
                name="boundary",
                speed=self._speed,
                curvature=self._curvature,
                length=self.perimeter,
                turning=_TWO_PI,
                reach=self.eta0,
            ),
        )


def default_eta(domain) -> float:
    """Default band width: a quarter of the tubular reach, capped at 0.25."""
    return min(domain.eta0 / 4.0, 0.25)


def reduced_multiplier(domain):
    """Exact linear factor ``(A0, A1c)`` of the angular measure integral.

    ``int_Sigma g(t, .) dtheta = A0 + A1c * t`` with ``A0`` the total
    boundary length and ``A1c`` minus the total turning (``-2*pi`` per outer
    curve, ``+2*pi`` per hole; zero for the annulus, where the two cancel).
    Feeding the pair to ``integrate_weighted(..., multiplier=...)`` turns a
    radial band integral into its one-dimensional reduction.
    """
    a0 = sum(c.length for c in domain.components)
    a1c = -sum(c.turning for c in domain.components)
    return (a0, a1c)


# ---------------------------------------------------------------------------
# Distance to the boundary
# ---------------------------------------------------------------------------

_OUT_TOL = 1e-12


def _ellipse_foot_distance(a, b, x0, x1):
    """Distance from an interior first-quadrant point to the ellipse.

    Solves the foot equation ``f(theta) = (a^2-b^2) sin cos - x0 a sin
    + x1 b cos = 0`` on (0, pi/2) by a bracketed Newton iteration (50-step
    cap, bisection fallback); axis points use the closed forms, including
    the off-axis foot for major-axis points inside the evolute.
    """
    if a < b:
        a, b, x0, x1 = b, a, x1, x0
    if x1 == 0.0:
        c2 = a * a - b * b
        if c2 == 0.0 or x0 * a >= c2:
            return a - x0
        return b * math.sqrt(1.0 - x0 * x0 / c2)
    if x0 == 0.0:
        return b - x1

    def f(th):
        s, c = math.sin(th), math.cos(th)
        return (a * a - b * b) * s * c - x0 * a * s + x1 * b * c

    def fprime(th):
        s, c = math.sin(th), math.cos(th)
        return (a * a - b * b) * (c * c - s * s) - x0 * a * c - x1 * b * s

    lo, hi = 0.0, 0.5 * math.pi
    th = math.atan2(a * x1, b * x0)  # parameter of the radial projection
    for _ in range(50):
        val = f(th)
        if val > 0.0:
            lo = th
        else:
            hi = th
        dv = fprime(th)
        step = th - val / dv if dv != 0.0 else None
        if step is None or not (lo < step < hi):
            step = 0.5 * (lo + hi)
        if step == th:
            break
        th = step
    else:
        for _ in range(200):  # bisection fallback
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if f(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        th = 0.5 * (lo + hi)

    scale = a * a + b * b + a * x0 + b * x1
    if abs(f(th)) > 1e-12 * scale:
        raise DomainError(
            f"ellipse foot iteration did not converge at ({x0}, {x1}): "
            f"residual {abs(f(th)):.3e}"
        )
    return math.hypot(x0 - a * math.cos(th), x1 - b * math.sin(th))


def distance(domain, x) -> float:
    """Distance from a point of the closed domain to its boundary.

    Exact radial formulas for the disk and the annulus; for the ellipse a
    bracketed Newton iteration on the boundary-foot equation (residual
    certified below 1e-12 relative).  Raises :class:`DomainError` for
    points outside the closure.
    """
    pt = np.asarray(x, dtype=float).reshape(-1)
    if pt.size != 2 or not np.all(np.isfinite(pt)):
        raise ValueError(f"x must be a finite planar point, got {x!r}")
    x0, x1 = float(pt[0]), float(pt[1])

    if isinstance(domain, Disk):
        r = math.hypot(x0, x1)
        if r > domain.rho * (1.0 + _OUT_TOL):
            raise DomainError(f"point at radius {r} lies outside Disk({domain.rho})")
        return max(domain.rho - r, 0.0)

    if isinstance(domain, Annulus):
        r = math.hypot(x0, x1)
        if (r < domain.r_in * (1.0 - _OUT_TOL)
                or r > domain.r_out * (1.0 + _OUT_TOL)):
            raise DomainError(
                f"point at radius {r} lies outside "
                f"Annulus({domain.r_in}, {domain.r_out})"
            )
        return max(min(r - domain.r_in, domain.r_out - r), 0.0)

    if isinstance(domain, Ellipse):
        q = (x0 / domain.a) ** 2 + (x1 / domain.b) ** 2
        if q > 1.0 + 4.0 * _OUT_TOL:
            raise DomainError(
                f"point ({x0}, {x1}) lies outside Ellipse({domain.a}, {domain.b})"
            )
        return _ellipse_foot_distance(domain.a, domain.b, abs(x0), abs(x1))

    raise TypeError(f"unsupported domain {domain!r}")


# ---------------------------------------------------------------------------
# Angular factors and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrigPoly:
    """Finite trigonometric polynomial
    ``psi(theta) = const + sum a_k cos(k theta) + sum b_k sin(k theta)``.

    ``cos`` and ``sin`` are tuples of ``(mode, coefficient)`` pairs with
    positive integer modes.
    """

    const: float = 0.0
    cos: tuple = ()
    sin: tuple = ()

    def __post_init__(self):
        for name in ("cos", "sin"):
            pairs = []
            for entry in getattr(self, name):
                k, coeff = entry
                if int(k) != k or k < 1:
                    raise ValueError(f"modes must be positive integers, got {k!r}")
                pairs.append((int(k), float(coeff)))
            object.__setattr__(self, name, tuple(pairs))
        object.__setattr__(self, "const", float(self.const))

    @property
    def max_mode(self) -> int:
        modes = [k for k, _ in self.cos] + [k for k, _ in self.sin]
        return max(modes, default=0)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.const)
        for k, coeff in self.cos:
            out += coeff * np.cos(k * theta)
        for k, coeff in self.sin:
            out += coeff * np.sin(k * theta)
        return out

    def derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for k, coeff in self.cos:
            out -= coeff * k * np.sin(k * theta)
        for k, coeff in self.sin:
            out += coeff * k * np.cos(k * theta)
        return out


@dataclass(frozen=True)
class FieldFn:
    """Separable field ``u(t, theta) = phi(t) * psi(theta)`` in band
    coordinates (t = distance to the boundary, theta = boundary parameter).

    ``psi=None`` means the radial field ``u = phi(delta)``.  The profile
    must vanish on its leading cell (support floor >= 1) — the discrete
    stand-in for membership in the zero-trace weighted Sobolev class.
    """

    phi: PiecewiseFn
    psi: TrigPoly | None = None

    def __post_init__(self):
        if self.phi.support_floor < 1:
            raise ValueError(
                "field profile must vanish near t = 0 (support_floor >= 1)"
            )
        if self.psi is not None and not isinstance(self.psi, TrigPoly):
            raise TypeError(f"psi must be a TrigPoly or None, got {self.psi!r}")

    @property
    def is_radial(self) -> bool:
        return self.psi is None


def _theta_nodes(m_sigma):
    if not (isinstance(m_sigma, (int, np.integer)) and m_sigma >= 8):
        raise ValueError(f"m_sigma must be an integer >= 8, got {m_sigma!r}")
    return np.linspace(0.0, _TWO_PI, m_sigma, endpoint=False), _TWO_PI / m_sigma


def _theta_sums(comp: _Component, psi, m_sigma, power=None):
    """Angular sums ``(P0, P1)`` with ``sum_j F(psi_j) g(t, theta_j) dtheta
    = P0 - t * P1`` — exact in ``t`` because ``g`` is linear in ``t``.

    ``power=None`` sums the signed values ``psi_j`` (plain field
    integrals); ``power=p`` sums ``|psi_j|^p`` (display terms).
    """
    theta, dtheta = _theta_nodes(m_sigma)
    sp = comp.speed(theta)
    ka = comp.curvature(theta)
    if psi is None:
        pv = np.ones_like(theta)
    elif power is None:
        pv = psi(theta)
    else:
        pv = np.abs(psi(theta)) ** power
    p0 = float((pv * sp).sum() * dtheta)
    p1 = float((pv * sp * ka).sum() * dtheta)
    return p0, p1


# ---------------------------------------------------------------------------
# Band quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TubularGrid:
    """Product grid for one band: graded ``t_nodes``, uniform
    ``sigma_nodes`` and the normal-map Jacobian ``1 - t*kappa(theta)`` per
    component (shape ``(n_components, len(t_nodes), len(sigma_nodes))``)."""

    domain: object
    eta: float
    t_nodes: np.ndarray
    sigma_nodes: np.ndarray
    jacobian: np.ndarray


def tubular_grid(domain, eta, *, n_t=256, m_sigma=256, t_min=None,
                 gamma=2.0) -> TubularGrid:
    """Materialize the band grid used by the quadrature helpers.

    The Jacobian values satisfy the sandwich ``1 - c*t <= Jac <= 1 + c*t``
    with ``c = domain.jacobian_c``; for the disk the single component has
    ``Jac = (rho - t)/rho`` exactly.
    """
    eta = float(eta)
    if not eta < domain.eta0:
        raise DomainError(
            f"eta must be smaller than the tubular reach eta0 = {domain.eta0}"
        )
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    if t_min is None:
        t_min = 1e-6 * eta
    t_nodes = graded_mesh(n_t, t_min, gamma, t_max=eta)
    sigma, _ = _theta_nodes(m_sigma)
    jac = np.stack(
        [1.0 - t_nodes[:, None] * comp.curvature(sigma)[None, :]
         for comp in domain.components]
    )
    return TubularGrid(domain=domain, eta=eta, t_nodes=t_nodes,
                       sigma_nodes=sigma, jacobian=jac)


def _gauss_points(nodes, order):
    """Flattened Gauss nodes/weights for the cells of a 1-D mesh."""
    gx, gw = gauss_rule(order)
    lo, hi = nodes[:-1], nodes[1:]
    half = 0.5 * (hi - lo)
    t = (lo[:, None] + half[:, None] * (gx[None, :] + 1.0)).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    return t, w


def _phi_cells(phi: PiecewiseFn, t_lo, t_hi):
    """Sub-mesh of the profile's nodes covering ``[t_lo, t_hi]``.

    Below its own mesh the profile vanishes identically, so the region
    ``t < phi.t_min`` is dropped; the profile must reach ``t_hi``.
    """
    if phi.t_max < t_hi * (1.0 - 1e-12):
        raise ValueError(
            f"field profile is defined up to t = {phi.t_max} but the region "
            f"extends to {t_hi}"
        )
    lo = max(t_lo, phi.t_min)
    hi = min(t_hi, phi.t_max)
    inner = phi.nodes[(phi.nodes > lo) & (phi.nodes < hi)]
    return np.concatenate([[lo], inner, [hi]])


def _phi_on(phi: PiecewiseFn, t):
    """Profile values and exact slopes at interior quadrature points."""
    idx = np.clip(np.searchsorted(phi.nodes, t, side="right") - 1, 0, phi.n - 1)
    s = phi.slopes()[idx]
    v = phi.values[idx] + s * (t - phi.nodes[idx])
    return v, s


_CHUNK = 8192


def _grad_band(comp, field, tq, wq, wv, p, m_sigma):
    """Gradient-term integral over one band region.

    ``|grad u|^2 = phi'^2 psi^2 + phi^2 psi'^2 / g^2`` in normal
    coordinates; the tangential factor needs the full (t, theta) tensor, so
    angular fields are evaluated in chunks of t-rows.
    """
    v, s = _phi_on(field.phi, tq)
    if field.is_radial:
        p0, p1 = _theta_sums(comp, None, m_sigma, power=p)
        return float((np.abs(s) ** p * wv * wq * (p0 - tq * p1)).sum())
    theta, dtheta = _theta_nodes(m_sigma)
    sp = comp.speed(theta)
    ka = comp.curvature(theta)
    psi_v = field.psi(theta)
    psi_d = field.psi.derivative(theta)
    live = ~((v == 0.0) & (s == 0.0))
    total = 0.0
    idx = np.flatnonzero(live)
    for start in range(0, idx.size, _CHUNK):
        rows = idx[start:start + _CHUNK]
        g = sp[None, :] * (1.0 - tq[rows, None] * ka[None, :])
        sq = (s[rows, None] * psi_v[None, :]) ** 2 \
            + (v[rows, None] * psi_d[None, :] / g) ** 2
        vals = (sq ** (0.5 * p) * g).sum(axis=1) * dtheta
        total += float((vals * wv[rows] * wq[rows]).sum())
    return total


def _value_band(comp, field, tq, wq, wv, p, m_sigma):
    """Integral of ``|u|^p`` (or of ``u`` itself for ``p=None``) against a
    radial weight over one band region; separability makes it exactly
    one-dimensional."""
    v, _ = _phi_on(field.phi, tq)
    p0, p1 = _theta_sums(comp, field.psi, m_sigma, power=p)
    fv = v if p is None else np.abs(v) ** p
    return float((fv * wv * wq * (p0 - tq * p1)).sum())


def tubular_quadrature(domain, eta, integrand, *, n_t=256, m_sigma=256,
                       gauss_order=12, gamma=2.0) -> float:
    """Integral of a scalar field over the band ``Omega_eta``.

    ``integrand`` may be a :class:`FieldFn` (the field value
    ``phi(t) psi(theta)`` is integrated, on the profile's own t-cells), a
    vectorized callable ``f(t, theta)``, or a number.  The t-direction uses
    per-cell Gauss rules, the angular direction the periodic trapezoid
    rule, and the surface measure ``g(t, theta)`` is exact per domain.
    """
    eta = float(eta)
    if not eta < domain.eta0:
        raise DomainError(
            f"eta must be smaller than the tubular reach eta0 = {domain.eta0}"
        )
    if eta <= 0.0:
        raise ValueError("eta must be positive")

    if isinstance(integrand, FieldFn):
        tq, wq = _gauss_points(_phi_cells(integrand.phi, 0.0, eta), gauss_order)
        ones = np.ones_like(tq)
        return sum(
            _value_band(comp, integrand, tq, wq, ones, None, m_sigma)
            for comp in domain.components
        )

    if isinstance(integrand, (int, float)):
        value = float(integrand)

        def fn(t, theta):
            return np.full((t.size, theta.size), value)
    else:
        fn = integrand

    grid_nodes = graded_mesh(n_t, 1e-9 * eta, gamma, t_max=eta)
    nodes = np.concatenate([[0.0], grid_nodes])
    tq, wq = _gauss_points(nodes, gauss_order)
    theta, dtheta = _theta_nodes(m_sigma)
    total = 0.0
    for comp in domain.components:
        g = comp.theta_factor(tq, theta)
        vals = np.asarray(fn(tq, theta), dtype=float)
        if vals.shape != g.shape:
            vals = np.broadcast_to(vals, g.shape)
        total += float(((vals * g).sum(axis=1) * dtheta * wq).sum())
    return total


def trace_integral(domain, eta, field, alpha_p_weight, *, p=2.0,
                   m_sigma=256) -> float:
    """Weighted trace ``int_{Sigma_eta} |u|^p delta^{alpha_p_weight}`` on
    the level curve at distance ``eta``, in its intrinsic surface measure
    ``g(eta, theta) dtheta`` (summed over all components for the annulus).

    ``field`` may be a :class:`FieldFn` or a number (a constant field).
    """
    eta = float(eta)
    if not eta < domain.eta0:
        raise DomainError(
            f"eta must be smaller than the tubular reach eta0 = {domain.eta0}"
        )
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    if isinstance(field, FieldFn):
        phi_eta = abs(float(field.phi(eta))) ** p
        psi = field.psi
    else:
        phi_eta = abs(float(field)) ** p
        psi = None
    total = 0.0
    for comp in domain.components:
        p0, p1 = _theta_sums(comp, psi, m_sigma, power=p)
        total += phi_eta * (p0 - eta * p1)
    return float(eta ** alpha_p_weight * total)


# ---------------------------------------------------------------------------
# Constants: band certificates and whole-domain chains
# ---------------------------------------------------------------------------

ND_IDS = ("Eq2_6", "Eq2_7", "Eq2_11", "Eq2_12", "Eq2_14", "Eq2_15")

_ND_INFO = {
    "Eq2_6": (Regime.NONCRITICAL, "band"),
    "Eq2_7": (Regime.NONCRITICAL, "whole"),
    "Eq2_11": (Regime.CRITICAL_INTERIOR, "band"),
    "Eq2_12": (Regime.CRITICAL_BOUNDARY, "band"),
    "Eq2_14": (Regime.CRITICAL_INTERIOR, "whole"),
    "Eq2_15": (Regime.CRITICAL_BOUNDARY, "whole"),
}


def _kp_core(r_lo, r_hi, interface, p, cells=200, order=16):
    """Weighted-Hoelder constant of the core chain.

    ``K = int_{r_lo}^{r_hi} Phi(r)^(p-1) r dr`` with ``Phi(r) = |int from r
    to the interface radius of s^(-1/(p-1)) ds|`` — the sharp factor in
    ``|int v' dtau|^p <= K * int |v'|^p r dr`` when the core is written in
    polar radius ``r`` with measure ``r dr``.  For ``p = 2`` and a disk
    core ``[0, b]`` this is ``b^2/4``.
    """
    grade = 3.0 if r_lo == 0.0 else 1.0
    x = (np.arange(cells + 1) / cells) ** grade
    nodes = r_lo + (r_hi - r_lo) * x
    rq, wq = _gauss_points(nodes, order)
    if p == 2.0:
        phi = np.abs(np.log(interface / rq))
    else:
        nu = (p - 2.0) / (p - 1.0)
        phi = np.abs(interface ** nu - rq ** nu) / abs(nu)
    return float((phi ** (p - 1.0) * rq * wq).sum())


def _band_jac_range(comp: _Component, eta, m_sigma=512):
    """Min/max of the measure factor g over the band (0, eta] x theta."""
    theta, _ = _theta_nodes(m_sigma)
    sp = comp.speed(theta)
    ka = comp.curvature(theta)
    cand = np.concatenate([sp * (1.0 - eta * ka), sp])
    return float(cand.min()), float(cand.max())


def _one_sided_trace(params: Params, regime, eta):
    """Trace constant of the scale-free one-sided inequality on (0, eta].

    Noncritical and critical-interior displays carry
    ``lambda^(1-1/p) * eta^(alpha p + 1 - p)``; the critical-boundary one
    is the log-weighted form at scale ``R/eta``, and the rescaling factor
    is exactly one there (``alpha p = p - 1``).
    """
    p = params.p
    lam = lambda_const(params)
    if regime is Regime.CRITICAL_BOUNDARY:
        return lam ** params.alpha * math.log(params.R / eta) ** (1.0 - p)
    return lam ** (1.0 - 1.0 / p) * eta ** (params.alpha * p + 1.0 - p)


def _core_weight_extremes(params: Params, regime, eta, delta_hi):
    """(W0, W1): min gradient weight and max Hardy-type weight on the core
    ``eta <= delta <= delta_hi``.

    Plain displays: gradient weight ``delta^{alpha p}``, Hardy weight
    ``delta^{alpha p - p}`` — both monotone, extremes at the endpoints.
    The critical-boundary display carries ``delta^{p-1}`` against
    ``delta^{-1} A1(delta)^{-p}``; the latter has one interior stationary
    point at ``A1 = p``.
    """
    p = params.p
    ap = params.alpha * p
    if regime is Regime.CRITICAL_BOUNDARY:
        w0 = min(eta ** (p - 1.0), delta_hi ** (p - 1.0))

        def h(d):
            return 1.0 / (d * math.log(params.R / d) ** p)

        cand = [h(eta), h(delta_hi)]
        d_star = params.R * math.exp(-p)
        if eta < d_star < delta_hi:
            cand.append(h(d_star))
        return w0, max(cand)
    w0 = min(eta ** ap, delta_hi ** ap)
    w1 = max(eta ** (ap - p), delta_hi ** (ap - p))
    return w0, w1


def _whole_domain_constants(domain, params: Params, regime, eta):
    """Constructive constants (gamma, L') of the whole-domain displays.

    Per boundary component the domain splits into the band (0, eta] and a
    polar-coordinate core.  On the band the scale-free one-sided
    inequality gives ``H_band <= A0c * (G_band -/+ T |v(eta)|^p)``; on the
    core ``|v(t)| <= |v(eta)| + int |v'|`` with the weighted Hoelder factor
    :func:`_kp_core` gives ``H_core <= E0 |v(eta)|^p + (B0/W0) G_core``.
    Away from the critical line the band's trace surplus absorbs the core
    trace debt and ``gamma = min(1/A0c, W0/B0, T/E0)``; on and above the
    line the debt is paid by the explicit trace term, so ``gamma =
    min(1/A0c, W0/B0)`` and ``L' = gamma (A0c T + E0) / (eta^{alpha p}
    j)`` with ``j`` the trace measure factor of the component.
    """
    lam = lambda_const(params)
    p = params.p
    ap = params.alpha * p

    if regime is Regime.NONCRITICAL and isinstance(domain, Annulus):
        # two half-width bands meeting at the mid circle; no core at all
        r_mid = 0.5 * (domain.r_in + domain.r_out)
        gamma = lam * min(domain.r_in / r_mid, r_mid / domain.r_out)
        return {"gamma": gamma, "route": "two bands, no core"}

    gammas = []
    debts = []  # (A0c*T + E0, trace measure factor j) per component
    detail = {}
    for comp in domain.components:
        m_jac, big_m = _band_jac_range(comp, eta)
        a0c = big_m / (m_jac * lam)
        t_c = m_jac * _one_sided_trace(params, regime, eta)
        if isinstance(domain, Disk):
            r_lo, r_hi, interface = 0.0, domain.rho - eta, domain.rho - eta
            delta_hi = domain.rho
            j_c = domain.rho - eta
        else:  # annulus component cores meet at the mid circle
            r_mid = 0.5 * (domain.r_in + domain.r_out)
            if comp.name == "inner":
                r_lo, r_hi, interface = domain.r_in + eta, r_mid, domain.r_in + eta
                j_c = domain.r_in + eta
            else:
                r_lo, r_hi, interface = r_mid, domain.r_out - eta, domain.r_out - eta
                j_c = domain.r_out - eta
            delta_hi = 0.5 * domain.width
        w0, w1 = _core_weight_extremes(params, regime, eta, delta_hi)
        kp = _kp_core(r_lo, r_hi, interface, p)
        s_core = 0.5 * (r_hi * r_hi - r_lo * r_lo)
        b0 = 2.0 ** (p - 1.0) * w1 * kp
        e0 = 2.0 ** (p - 1.0) * w1 * s_core
        if regime is Regime.NONCRITICAL:
            gammas.append(min(1.0 / a0c, w0 / b0, t_c / e0))
        else:
            gammas.append(min(1.0 / a0c, w0 / b0))
            debts.append((a0c * t_c + e0, j_c))
        detail[comp.name] = {
            "A0c": a0c, "T": t_c, "W0": w0, "W1": w1,
            "Kp": kp, "B0": b0, "E0": e0,
        }
    gamma = min(gammas)
    out = {"gamma": gamma, "detail": detail}
    if regime is not Regime.NONCRITICAL:
        out["L_prime"] = max(
            gamma * debt / (eta ** ap * j_c) for debt, j_c in debts
        )
    return out


def build_nd_ledger(domain, params: Params, eta=None, *,
                    max_halvings=60) -> ConstantLedger:
    """Constants for the distance-weight displays on one domain.

    Band displays reduce along inward normal rays to the one-dimensional
    chain at scale ``R' = R/eta``: the remainder constant transfers as
    ``C2 = C0(R')`` and the trace constant as ``L = L(R') * eta^(1-p) /
    (1 +/- c*eta)``, provided the certificate ``C1(R') >= c*eta`` holds,
    where ``c`` is the curvature bound and ``C1(R')`` uses the exact
    envelope of the remainder weight.  The band width for these constants
    starts at ``eta`` (default :func:`default_eta`) and halves until
    certified; the result is the ledger's ``eta`` entry.

    Whole-domain constants (gamma and, in the critical regimes, L') come
    from the band+core chain of :func:`_whole_domain_constants`, which
    needs no certificate and is evaluated at the requested width itself
    (the ``eta_whole`` entry) — shrinking the band would only weaken its
    constants, so the two widths are recorded separately.
    """
    regime = classify(params)
    sup_d = domain.sup_delta
    c = domain.jacobian_c
    need = math.e ** math.e if regime is not Regime.NONCRITICAL else math.e
    if params.R < need * sup_d * (1.0 - 1e-12):
        raise LedgerError(
            f"R = {params.R} is below {need:.6g} * sup(delta) = "
            f"{need * sup_d:.6g} required in this regime"
        )

    eta_whole = default_eta(domain) if eta is None else float(eta)
    if not 0.0 < eta_whole < domain.eta0:
        raise DomainError(
            f"eta must lie in (0, eta0) with eta0 = {domain.eta0}, got "
            f"{eta_whole}"
        )

    env_kind = "A2sq" if regime is Regime.CRITICAL_BOUNDARY else "A1sq"
    eta_band = eta_whole
    halvings = 0
    while True:
        led1 = build_ledger(Params(params.alpha, params.p, params.R / eta_band))
        if "C1_prime" in led1 and "L" in led1:
            c1_sharp = led1["C1_prime"] / envelope_bound(
                params.R / eta_band, env_kind)
            if c1_sharp >= c * eta_band and c * eta_band < 1.0:
                break
        eta_band *= 0.5
        halvings += 1
        if halvings > max_halvings:
            raise LedgerError("no certified band width found")

    p = params.p
    sign = 1.0 if regime is Regime.NONCRITICAL else -1.0
    l_nd = led1["L"] * eta_band ** (1.0 - p) / (1.0 + sign * c * eta_band)

    entries = {}

    def add(name, value, formula, note=""):
        if not (math.isfinite(value) and value > 0.0):
            raise LedgerError(f"constant {name} = {value} is not strictly positive")
        entries[name] = LedgerEntry(name, float(value), formula, note)

    add("lambda", lambda_const(params), "|beta|^p off the critical line, "
        "(1 - 1/p)^p on it")
    add("eta", eta_band, "band width of the band displays",
        f"halved {halvings}x for the certificate" if halvings else "")
    add("eta0", domain.eta0, "tubular reach of the domain")
    add("jacobian_c", c, "curvature bound in |Jac - 1| <= c*t")
    add("R_band", params.R / eta_band, "R/eta",
        "scale of the reduced one-dimensional chain")
    add("certificate_C1", c1_sharp, "C1_prime(R/eta) / sup(t * logweight^2)",
        "must stay >= c*eta for the ray-wise reduction to absorb the "
        "Jacobian remainder")
    add("C2", led1["C0"], "C0 at scale R/eta",
        "remainder constant of the band display")
    trace_sign = "+" if sign > 0 else "-"
    add("L", l_nd, f"L(R/eta) * eta^(1-p) / (1 {trace_sign} c*eta)",
        "trace constant of the band display in the intrinsic level-curve "
        "measure")

    if domain.supports_whole:
        add("eta_whole", eta_whole,
            "band width of the whole-domain band+core chain")
        whole = _whole_domain_constants(domain, params, regime, eta_whole)
        add("gamma", whole["gamma"],
            "min over components of the band/core chain constraints",
            whole.get("route", ""))
        if "L_prime" in whole:
            add("L_prime", whole["L_prime"],
                "gamma * (A0c*T + E0) / (eta^(alpha p) * j)",
                "pays the band and core trace debts out of the level-curve "
                "term")
        for name, vals in whole.get("detail", {}).items():
            for key, val in vals.items():
                tag = f"{key}_{name}" if len(domain.components) > 1 else key
                entries[tag] = LedgerEntry(
                    tag, float(val), f"{key} of the {name} component chain"
                )

    return ConstantLedger(params, regime, entries)


# ---------------------------------------------------------------------------
# Deficits
# ---------------------------------------------------------------------------


def _check_whole_field(domain, field):
    if not domain.supports_whole:
        raise DomainError(
            "whole-domain displays need coordinates past the tubular reach; "
            "this domain only supports the band forms"
        )
    if isinstance(domain, Disk) and not field.is_radial:
        raise ValueError(
            "whole-domain displays on the disk accept radial fields only "
            "(the angular gradient factor 1/(rho - t) is not p-integrable "
            "across the center); use the band displays for angular modes"
        )


def _band_terms(domain, field, regions, weight, kind, p, m_sigma, order):
    """One display term summed over per-component regions.

    ``regions`` maps component -> (tq, wq); ``kind`` is "grad" or "hardy"
    (the Hardy weight already carries its ``t^-p``)."""
    total = 0.0
    for comp, (tq, wq) in regions.items():
        wv = weight.evaluate(tq)
        if kind == "grad":
            total += _grad_band(comp, field, tq, wq, wv, p, m_sigma)
        else:
            total += _value_band(comp, field, tq, wq, wv, p, m_sigma)
    return total


def nd_deficit(spec_id, domain, field: FieldFn, ledger: ConstantLedger,
               eta=None, *, m_sigma=256, gauss_order=8) -> DeficitReport:
    """Term-by-term deficit of one distance-weight display.

    ``ledger`` is either the output of :func:`build_nd_ledger` (its band
    width is used; ``eta`` may restate it) or a plain parameter ledger, in
    which case the domain constants are derived here at the given ``eta``.
    The report has the same shape as the one-dimensional ones: the display
    holds iff ``deficit >= 0`` up to quadrature tolerance.
    """
    if spec_id not in _ND_INFO:
        raise ValueError(f"unknown spec id {spec_id!r}; known: {ND_IDS}")
    want_regime, form = _ND_INFO[spec_id]
    params = ledger.params
    regime = classify(params)
    if regime is not want_regime:
        raise RegimeMismatchError(
            f"{spec_id} needs the {want_regime.value} regime, but the "
            f"parameters are {regime.value} (alpha={params.alpha}, p={params.p})"
        )
    if "eta" not in ledger:
        # plain parameter ledger: derive the domain constants here
        ledger = build_nd_ledger(domain, params, eta)
        eta = None
    elif abs(ledger["eta0"] - domain.eta0) > 1e-12 * domain.eta0 \
            or ledger["jacobian_c"] != domain.jacobian_c:
        raise ValueError(
            "the ledger was built for a different domain (tubular reach or "
            "curvature bound disagrees)"
        )
    if form == "whole":
        _check_whole_field(domain, field)
        eta_l = ledger["eta_whole"]
    else:
        eta_l = ledger["eta"]
    if eta is not None and abs(float(eta) - eta_l) > 1e-12 * eta_l:
        raise ValueError(
            f"eta = {eta} disagrees with the ledger's width {eta_l} for "
            f"the {form} form"
        )
    eta = eta_l
    if not isinstance(field, FieldFn):
        raise TypeError(f"field must be a FieldFn, got {field!r}")

    p = params.p
    ap = params.alpha * p
    lam = ledger["lambda"]
    R = params.R

    if form == "whole":
        regions = {
            comp: _gauss_points(
                _phi_cells(field.phi, 0.0, comp.reach), gauss_order
            )
            for comp in domain.components
        }
    else:
        regions = {
            comp: _gauss_points(
                _phi_cells(field.phi, 0.0, eta), gauss_order
            )
            for comp in domain.components
        }

    def grad(weight):
        return _band_terms(domain, field, regions, weight, "grad", p,
                           m_sigma, gauss_order)

    def hardy(weight):
        return _band_terms(domain, field, regions, weight, "hardy", p,
                           m_sigma, gauss_order)

    def trace():
        return trace_integral(domain, eta, field, ap, p=p, m_sigma=m_sigma)

    lhs_terms = {}
    rhs_terms = {}
    constants = {"lambda": lam}

    if spec_id == "Eq2_6":
        lhs_terms["gradient"] = grad(WeightSpec(ap))
        lhs_terms["hardy"] = -lam * hardy(WeightSpec(ap - p))
        rhs_terms["log_hardy"] = ledger["C2"] * hardy(
            WeightSpec(ap - p, 2.0, 0.0, R))
        rhs_terms["trace"] = ledger["L"] * trace()
        constants.update(C2=ledger["C2"], L=ledger["L"])
    elif spec_id == "Eq2_11":
        lhs_terms["gradient"] = grad(WeightSpec(ap))
        lhs_terms["hardy"] = -lam * hardy(WeightSpec(ap - p))
        lhs_terms["trace"] = ledger["L"] * trace()
        rhs_terms["log_hardy"] = ledger["C2"] * hardy(
            WeightSpec(ap - p, 2.0, 0.0, R))
        constants.update(C2=ledger["C2"], L=ledger["L"])
    elif spec_id == "Eq2_12":
        lhs_terms["gradient"] = grad(WeightSpec(p - 1.0))
        lhs_terms["log_hardy"] = -lam * hardy(WeightSpec(-1.0, p, 0.0, R))
        lhs_terms["trace"] = ledger["L"] * trace()
        rhs_terms["loglog_hardy"] = ledger["C2"] * hardy(
            WeightSpec(-1.0, p, 2.0, R))
        constants.update(C2=ledger["C2"], L=ledger["L"])
    elif spec_id == "Eq2_7":
        lhs_terms["gradient"] = grad(WeightSpec(ap))
        lhs_terms["hardy"] = -ledger["gamma"] * hardy(WeightSpec(ap - p))
        constants.update(gamma=ledger["gamma"])
    elif spec_id == "Eq2_14":
        lhs_terms["gradient"] = grad(WeightSpec(ap))
        lhs_terms["hardy"] = -ledger["gamma"] * hardy(WeightSpec(ap - p))
        lhs_terms["trace"] = ledger["L_prime"] * trace()
        constants.update(gamma=ledger["gamma"], L_prime=ledger["L_prime"])
    else:  # Eq2_15
        lhs_terms["gradient"] = grad(WeightSpec(p - 1.0))
        lhs_terms["log_hardy"] = -ledger["gamma"] * hardy(
            WeightSpec(-1.0, p, 0.0, R))
        lhs_terms["trace"] = ledger["L_prime"] * trace()
        constants.update(gamma=ledger["gamma"], L_prime=ledger["L_prime"])

    lhs = float(sum(lhs_terms.values()))
    rhs = float(sum(rhs_terms.values()))
    return DeficitReport(
        ineq_id=spec_id,
        alpha=params.alpha,
        p=p,
        R=R,
        lhs=lhs,
        rhs=rhs,
        deficit=lhs - rhs,
        lhs_terms=lhs_terms,
        rhs_terms=rhs_terms,
        constants=constants,
        t_min=field.phi.t_min,
        n=field.phi.n,
        gauss_order=gauss_order,
        meta={
            "domain": repr(domain),
            "eta": eta,
            "m_sigma": m_sigma,
            "form": form,
            "radial": field.is_radial,
        },
    )


# ---------------------------------------------------------------------------
# Randomized suite
# ---------------------------------------------------------------------------


def _supported_ids(domain):
    if domain.supports_whole:
        return ND_IDS
    return tuple(i for i in ND_IDS if _ND_INFO[i][1] == "band")


def _angular_ok(spec_id, domain):
    return not (_ND_INFO[spec_id][1] == "whole" and isinstance(domain, Disk))


def _draw_nd_params(spec_id, domain, rng):
    regime = _ND_INFO[spec_id][0]
    p = float(rng.choice(_ND_P_GRID))
    line = 1.0 - 1.0 / p
    if regime is Regime.NONCRITICAL:
        alpha = line - float(rng.uniform(0.05, 1.2))
        log_gap = float(rng.uniform(1.05, 4.0))
    elif regime is Regime.CRITICAL_INTERIOR:
        alpha = line + float(rng.uniform(0.05, 1.5))
        log_gap = float(rng.uniform(math.e + 0.05, 6.0))
    else:
        alpha = line
        log_gap = float(rng.uniform(math.e + 0.05, 6.0))
    R = domain.sup_delta * math.exp(log_gap)
    return Params(alpha, p, max(R, math.e))


_ND_P_GRID = tuple(round(x, 4) for x in np.linspace(1.25, 4.0, 12))


def _random_field(rng, nodes, angular) -> FieldFn:
    n = nodes.size - 1
    values = rng.standard_normal(n + 1)
    values[1:-1] = (values[:-2] + values[1:-1] + values[2:]) / 3.0
    floor = int(rng.integers(1, n // 2 + 1))
    values[:floor] = 0.0
    phi = PiecewiseFn(nodes, values, support_floor=floor)
    if not angular:
        return FieldFn(phi)
    k1 = int(rng.integers(1, 5))
    k2 = int(rng.integers(1, 5))
    psi = TrigPoly(
        const=float(rng.uniform(-1.0, 1.0)),
        cos=((k1, float(rng.uniform(-1.0, 1.0))),),
        sin=((k2, float(rng.uniform(-1.0, 1.0))),),
    )
    if abs(psi.const) + sum(abs(c) for _, c in psi.cos + psi.sin) < 0.1:
        psi = TrigPoly(const=1.0, cos=psi.cos, sin=psi.sin)
    return FieldFn(phi, psi)


def _nd_suite_case(spec_id, id_index, case, master_seed, domain, angular,
                   n, t_min, gamma, m_sigma, gauss_order, tol_factor):
    seed = _case_seed(master_seed, id_index, case)
    rng = np.random.default_rng(seed)
    params = _draw_nd_params(spec_id, domain, rng)
    eta_try = default_eta(domain) * float(rng.uniform(0.3, 1.0))
    ledger = build_nd_ledger(domain, params, eta_try)
    t_hi = (ledger["eta"] if _ND_INFO[spec_id][1] == "band"
            else max(c.reach for c in domain.components))
    nodes = graded_mesh(n, min(t_min, 0.01 * t_hi), gamma, t_max=t_hi)
    field = _random_field(rng, nodes, angular)
    report = nd_deficit(spec_id, domain, field, ledger,
                        m_sigma=m_sigma, gauss_order=gauss_order)
    tol = tol_factor * (abs(report.lhs) + abs(report.rhs))
    return SuiteRow(
        ineq_id=spec_id, case=case, seed=seed, n=n, t_min=float(nodes[0]),
        lhs=report.lhs, rhs=report.rhs, deficit=report.deficit,
        violation=bool(report.deficit < -tol),
    )


def nd_nonnegativity_suite(ids=None, domain=None, *, cases=200,
                           angular_cases=50, n=256, t_min=1e-6, gamma=2.0,
                           seed=0, m_sigma=128, gauss_order=8, workers=None,
                           tol_factor=1e-8) -> SuiteResult:
    """Randomized verification of the distance-weight displays.

    Per id, ``cases`` radial fields plus ``angular_cases`` separable
    angular-mode fields (skipped where the display restricts to radial
    fields, i.e. the whole-domain ids on the disk).  Parameters are drawn
    regime-conforming with ``R`` scaled to the domain; each case derives
    its certified band constants before evaluating, so every row checks a
    proved inequality and the tolerance only absorbs quadrature roundoff.
    Rows are emitted in (id, case) order regardless of the worker pool.
    """
    domain = Disk(1.0) if domain is None else domain
    if ids is None:
        ids = _supported_ids(domain)
    unknown = set(ids) - set(ND_IDS)
    if unknown:
        raise ValueError(f"unknown spec ids: {sorted(unknown)}")
    unsupported = set(ids) - set(_supported_ids(domain))
    if unsupported:
        raise DomainError(
            f"{sorted(unsupported)} are whole-domain displays, not available "
            f"on {domain!r}"
        )

    jobs = []
    for spec_id in ids:
        id_index = ND_IDS.index(spec_id)
        total = cases + (angular_cases if _angular_ok(spec_id, domain) else 0)
        for case in range(total):
            jobs.append((spec_id, id_index, case, case >= cases))

    def run_one(job):
        spec_id, id_index, case, angular = job
        return _nd_suite_case(
            spec_id, id_index, case, seed, domain, angular,
            n, t_min, gamma, m_sigma, gauss_order, tol_factor,
        )

    if workers and workers > 1:
        import concurrent.futures

        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_one, jobs))
    else:
        rows = [run_one(job) for job in jobs]
    return SuiteResult(rows=rows, cases=cases, master_seed=seed,
                       tol_factor=tol_factor)


# ---------------------------------------------------------------------------
# Critical-regime degeneration demo
# ---------------------------------------------------------------------------


def nd_critical_demo(domain, params: Params, eps_sequence=None, eta=None, *,
                     n=512, m_sigma=256, gauss_order=12) -> DemoTable:
    """Degeneration of the whole-domain gradient energy in the critical
    regimes, driven by radial ramp fields equal to one on the level curve
    ``Sigma_eta``.

    Interior regime: ``phi = min(t/eps, 1)`` with energy (closed form)
    ``eps^-p * [A0 eps^(ap+1)/(ap+1) + A1c eps^(ap+2)/(ap+2)]``; boundary
    regime: the log ramp between ``eps`` and ``eta/2`` with energy
    ``A0 D^(1-p) + A1c D^-p (eta/2 - eps)``, ``D = log(eta/(2 eps))``.
    Each row also carries an independent quadrature value of the same
    energy (Gauss cells in t times the angular trapezoid sums); the table
    asserts strictly decreasing energies.
    """
    regime = classify(params)
    if regime is Regime.NONCRITICAL:
        raise RegimeMismatchError(
            "the degeneration demo needs the critical regime "
            "(alpha >= 1 - 1/p); in the noncritical regime the energy is "
            "bounded below by the Hardy term"
        )
    eta = default_eta(domain) if eta is None else float(eta)
    if not 0.0 < eta < domain.eta0:
        raise DomainError(
            f"eta must lie in (0, eta0) with eta0 = {domain.eta0}, got {eta}"
        )
    p = params.p
    ap = params.alpha * p
    a0, a1c = reduced_multiplier(domain)
    boundary = regime is Regime.CRITICAL_BOUNDARY

    if eps_sequence is None:
        if boundary:
            eps_list = [0.5 * eta * math.exp(-k) for k in (3.0, 10.0, 50.0, 200.0)]
        else:
            eps_list = [eta * f for f in (0.3, 0.1, 0.03, 0.01)]
    else:
        eps_list = [float(e) for e in eps_sequence]
    if any(e <= 0.0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps values must be strictly decreasing")

    def theta_sums_all():
        p0 = p1 = 0.0
        for comp in domain.components:
            q0, q1 = _theta_sums(comp, None, m_sigma, power=p)
            p0 += q0
            p1 += q1
        return p0, p1

    s0, s1 = theta_sums_all()  # numeric (A0, -A1c) for the dual route

    rows = []
    for eps in eps_list:
        if boundary:
            if not eps < 0.5 * eta:
                raise ValueError(
                    f"the log ramp needs eps < eta/2 = {0.5 * eta}, got {eps}"
                )
            depth = math.log(0.5 * eta / eps)
            energy = a0 * depth ** (1.0 - p) \
                + a1c * depth ** (-p) * (0.5 * eta - eps)
            # quadrature of D^-p t^-1 (A0 - A1c-sum * t) on a geometric mesh
            nodes = eps * (0.5 * eta / eps) ** np.linspace(0.0, 1.0, n + 1)
            tq, wq = _gauss_points(nodes, gauss_order)
            vals = depth ** (-p) / tq * (s0 - s1 * tq)
            quadrature = float((vals * wq).sum())
        else:
            if not eps < eta:
                raise ValueError(f"the ramp needs eps < eta = {eta}, got {eps}")
            energy = eps ** (-p) * (
                a0 * eps ** (ap + 1.0) / (ap + 1.0)
                + a1c * eps ** (ap + 2.0) / (ap + 2.0)
            )
            nodes = eps * (np.arange(n + 1) / n) ** 3.0
            tq, wq = _gauss_points(nodes, gauss_order)
            vals = eps ** (-p) * tq ** ap * (s0 - s1 * tq)
            quadrature = float((vals * wq).sum())
        rows.append(DemoRow(eps=eps, energy=energy,
                            energy_quadrature=quadrature))

    energies = [r.energy for r in rows]
    if any(b >= a for a, b in zip(energies, energies[1:])):
        raise AssertionError(
            "ramp energies failed to decrease strictly — the schedule is "
            "inconsistent with the closed forms"
        )
    return DemoTable(
        kind="LogRamp" if boundary else "Ramp",
        alpha=params.alpha,
        p=p,
        R=params.R,
        rows=rows,
        note=(
            f"domain={domain!r}, eta={eta}; fields are radial ramps equal "
            "to 1 on the level curve at eta; energies are the whole-domain "
            "gradient integrals and the closed forms use the exact linear "
            "angular factor"
        ),
    )


# ---------------------------------------------------------------------------
# Declarative config
# ---------------------------------------------------------------------------

_DOMAIN_KEYS = {
    "disk": ("rho",),
    "annulus": ("r_in", "r_out"),
    "ellipse": ("a", "b"),
}


def load_domain_config(source) -> dict:
    """Parse a declarative ``key = value`` config into domain and run data.

    ``source`` is a path or a string of lines.  Schema: ``domain`` is one
    of ``disk`` (needs ``rho``), ``annulus`` (``r_in``, ``r_out``),
    ``ellipse`` (``a``, ``b``); optional ``eta``, ``alpha``, ``p``, ``R``
    (``R`` accepts the symbolic forms ``e``, ``e^k``/``ek``, ``ee``), and
    any further numeric keys are returned verbatim.  Lines starting with
    ``#`` and blank lines are ignored.  Returns a dict with the built
    ``domain`` object plus the parsed scalars.
    """
    from .core import parse_scale

    text = source
    if "\n" not in str(source) and "=" not in str(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    data = {}
    for lineno, raw in enumerate(str(text).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        data[key.strip().lower()] = value.strip()

    out = {}
    kind = data.pop("domain", None)
    if kind is not None:
        kind = kind.lower()
        if kind not in _DOMAIN_KEYS:
            raise ValueError(
                f"unknown domain {kind!r}; expected one of {sorted(_DOMAIN_KEYS)}"
            )
        args = []
        for key in _DOMAIN_KEYS[kind]:
            if key not in data:
                raise ValueError(f"domain {kind!r} needs the key {key!r}")
            args.append(float(data.pop(key)))
        out["domain"] = {"disk": Disk, "annulus": Annulus,
                         "ellipse": Ellipse}[kind](*args)
    for key, value in data.items():
        out[key] = parse_scale(value) if key == "r" else float(value)
    return out
