"""Variational search for the best constants.

Discretizes the Rayleigh-type quotient

    Q(u) = ( int |u'|^p t^(alpha p) dt - L |u(1)|^p ) / int |u/t|^p t^(alpha p) dt

over piecewise-linear functions on a graded mesh, pinned to zero at the left
mesh endpoint (the discrete stand-in for vanishing near the singularity).
``plain`` mode sets L = 0 and also pins u(1) = 0; ``with_boundary`` leaves
u(1) free and subtracts the boundary term.  In the critical regimes the
quotient has no positive infimum, so :func:`best_constant` refuses to report
one and returns the closed-form degeneration table instead.

The descent itself is a generic preconditioned gradient method with
Barzilai-Borwein steps and an Armijo backtracking safeguard, so the recorded
history is nonincreasing by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .core import Params, Regime, classify, lambda_const
from .ineq1d import DemoTable, critical_infimum_demo
from .meshfn import PiecewiseFn, TestFamily, graded_mesh, sample_family
from .quad import gauss_rule

__all__ = [
    "MinimizeConfig",
    "MinimizeResult",
    "DegenerationTable",
    "QuotientObjective",
    "minimize_energy",
    "best_constant",
    "sweep_best_constant",
    "SweepResult",
]


@dataclass(frozen=True)
class MinimizeConfig:
    """Knobs for the quotient minimization.

    ``boundary_coeff`` is the L in front of |u(1)|^p; ``None`` means the
    sharp value Lambda^(1-1/p) of the parameters.  ``tol`` is the relative
    gradient norm below which the iteration declares convergence (checked at
    the top of the loop, so a stationary start converges in 0 iterations).
    """

    n: int = 4096
    gamma: float = 3.0
    t_min: float = 1e-6
    max_iters: int = 2000
    tol: float = 1e-9
    step0: float = 1.0
    armijo: float = 1e-4
    backtrack: float = 0.5
    boundary_coeff: float | None = None
    mesh_mode: str = "offset"  # "power" resolves profiles living on log scale


@dataclass
class MinimizeResult:
    quotient: float
    minimizer: PiecewiseFn | None
    iterations: int
    converged: bool
    history: list
    smoothing_mu: float = 0.0
    mode: str = ""


class DegenerationTable(DemoTable):
    """Closed-form energies witnessing quotient collapse in a critical regime."""


class _EnergyModel:
    """Discrete J(u) = G(u) - L|u(1)|^p and H(u) with exact gradients.

    The gradient-energy cell moments int t^(alpha p) dt are closed-form; the
    Hardy term uses per-cell Gauss points with the linear hat basis.  For
    p < 2 the kink of |s|^p at s = 0 is smoothed to (s^2 + mu^2)^(p/2) - mu^p
    with a tiny mu (gradient-consistent, and reported in the result).
    """

    def __init__(self, params: Params, nodes, boundary_coeff, mu=0.0,
                 gauss_order=8):
        self.params = params
        self.p = params.p
        self.nodes = np.asarray(nodes, dtype=float)
        self.h = np.diff(self.nodes)
        self.L = float(boundary_coeff)
        self.mu = float(mu)

        ap = params.alpha * params.p
        t0, t1 = self.nodes[:-1], self.nodes[1:]
        if ap == -1.0:
            self.moments = np.log(t1 / t0)
        else:
            self.moments = (t1 ** (ap + 1.0) - t0 ** (ap + 1.0)) / (ap + 1.0)

        gx, gw = gauss_rule(gauss_order)
        xi = 0.5 * (gx + 1.0)           # cell-local coordinate in [0, 1]
        self.b1 = xi[None, :]
        self.b0 = 1.0 - self.b1
        tg = t0[:, None] + self.h[:, None] * self.b1
        self.hardy_w = tg ** (ap - params.p) * (0.5 * self.h)[:, None] * gw[None, :]

        # stiffness-diagonal preconditioner; it captures the huge scale
        # spread of the graded mesh near t_min
        diag = np.zeros(self.nodes.size)
        stiff = self.moments / self.h ** 2
        diag[:-1] += stiff
        diag[1:] += stiff
        self.precond_diag = diag

    def _phi(self, s):
        p = self.p
        if self.mu == 0.0:
            return np.abs(s) ** p
        return (s * s + self.mu ** 2) ** (0.5 * p) - self.mu ** p

    def _phi_prime(self, s):
        p = self.p
        if self.mu == 0.0:
            return p * np.abs(s) ** (p - 1.0) * np.sign(s)
        return p * s * (s * s + self.mu ** 2) ** (0.5 * p - 1.0)

    def value_J(self, u):
        s = np.diff(u) / self.h
        val = float(self._phi(s) @ self.moments)
        if self.L != 0.0:
            val -= self.L * abs(u[-1]) ** self.p
        return val

    def grad_J(self, u):
        s = np.diff(u) / self.h
        flux = self._phi_prime(s) * self.moments / self.h
        g = np.zeros_like(u)
        g[:-1] -= flux
        g[1:] += flux
        if self.L != 0.0 and u[-1] != 0.0:
            g[-1] -= self.L * self.p * abs(u[-1]) ** (self.p - 2.0) * u[-1]
        return g

    def value_H(self, u):
        ug = u[:-1, None] * self.b0 + u[1:, None] * self.b1
        return float((np.abs(ug) ** self.p * self.hardy_w).sum())

    def grad_H(self, u):
        ug = u[:-1, None] * self.b0 + u[1:, None] * self.b1
        # |u|^(p-2) u with the 0^negative case killed by the u factor
        safe = np.where(ug != 0.0, np.abs(ug), 1.0)
        core = self.p * safe ** (self.p - 2.0) * ug * self.hardy_w
        g = np.zeros_like(u)
        g[:-1] += (core * self.b0).sum(axis=1)
        g[1:] += (core * self.b1).sum(axis=1)
        return g


class QuotientObjective:
    """Q = J/H restricted to the free nodal values (pinned ends dropped).

    Both J and H are p-homogeneous, so Q is scale invariant; ``project``
    renormalizes to H = 1 without changing the value.  ``precondition``
    solves with the (secant) gradient-energy stiffness matrix — tridiagonal,
    so the solve is O(n) — which turns plain descent into an inverse-
    iteration-like method; without it the spectrum near the infimum is far
    too clustered to converge in a reasonable iteration budget.
    """

    def __init__(self, model: _EnergyModel, pin_right: bool):
        self.model = model
        self.pin_right = pin_right
        self._slice = slice(1, -1 if pin_right else None)
        self.diag = model.precond_diag[self._slice].copy()

    def precondition(self, x, g):
        model = self.model
        u = self.embed(x)
        s = np.diff(u) / model.h
        p = model.p
        if p == 2.0:
            w = 2.0 * model.moments / model.h ** 2
        else:
            mu2 = max(model.mu, 1e-30) ** 2
            w = p * (p - 1.0) * (s * s + mu2) ** (0.5 * p - 1.0) * (
                model.moments / model.h ** 2
            )
        w = np.maximum(w, 1e-14 * float(w.max()))
        full_diag = np.zeros(u.size)
        full_diag[:-1] += w
        full_diag[1:] += w
        lo = 1
        hi = u.size - 1 if self.pin_right else u.size
        m = hi - lo
        ab = np.zeros((3, m))
        ab[1] = full_diag[lo:hi]
        ab[0, 1:] = -w[lo:hi - 1]
        ab[2, :-1] = -w[lo:hi - 1]
        return solve_banded((1, 1), ab, g)

    def embed(self, x):
        u = np.zeros(self.model.nodes.size)
        u[self._slice] = x
        return u

    def value(self, x):
        u = self.embed(x)
        return self.model.value_J(u) / self.model.value_H(u)

    def gradient(self, x):
        u = self.embed(x)
        H = self.model.value_H(u)
        q = self.model.value_J(u) / H
        g = (self.model.grad_J(u) - q * self.model.grad_H(u)) / H
        return g[self._slice]

    def project(self, x):
        u = self.embed(x)
        H = self.model.value_H(u)
        return x / H ** (1.0 / self.model.p)


def minimize_energy(objective, start, config: MinimizeConfig) -> MinimizeResult:
    """Preconditioned descent with BB steps and Armijo backtracking.

    ``objective`` provides ``value(x)`` and ``gradient(x)`` (and optionally
    ``project(x)`` for scale-invariant objectives and a ``diag``
    preconditioner).  Convergence is checked before stepping, so starting at
    a stationary point reports 0 iterations.  When the iteration budget runs
    out, the best iterate so far is returned with ``converged=False`` — no
    exception.
    """
    project = getattr(objective, "project", None)
    diag = getattr(objective, "diag", None)
    precond = getattr(objective, "precondition", None)
    x = np.asarray(start, dtype=float).copy()
    if project is not None:
        x = project(x)
    inv_diag = 1.0 / diag if diag is not None else None

    value = objective.value(x)
    grad = objective.gradient(x)
    history = [value]
    prev_dx = prev_dg = None
    step = config.step0
    iterations = 0
    converged = False

    for it in range(config.max_iters):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= config.tol * max(1.0, abs(value)):
            converged = True
            break
        if precond is not None:
            # stiffness-solve direction; its natural step length is O(1)
            direction = -precond(x, grad)
            step = config.step0
        else:
            direction = -(grad * inv_diag) if inv_diag is not None else -grad
            if prev_dx is not None:
                sy = float(prev_dx @ prev_dg)
                if sy > 0.0:
                    # BB step consistent with the preconditioned metric
                    if diag is not None:
                        step = float(prev_dx @ (diag * prev_dx)) / sy
                    else:
                        step = float(prev_dx @ prev_dx) / sy
        slope = float(grad @ direction)
        if slope >= 0.0:  # preconditioner made it non-descent; fall back
            direction = -grad
            slope = -gnorm ** 2
        t = step
        accepted = False
        for _ in range(60):
            x_try = x + t * direction
            v_try = objective.value(x_try)
            if v_try <= value + config.armijo * t * slope:
                accepted = True
                break
            t *= config.backtrack
        if not accepted:
            break  # stalled; return best so far, flagged below
        g_new = objective.gradient(x_try)
        prev_dx = x_try - x
        prev_dg = g_new - grad
        x, value, grad = x_try, v_try, g_new
        if project is not None:
            # renormalization rescales x, so the gradient scale must follow
            x = project(x)
            grad = objective.gradient(x)
        history.append(value)
        iterations = it + 1

    return MinimizeResult(
        quotient=value,
        minimizer=x,  # raw vector; best_constant wraps it
        iterations=iterations,
        converged=converged,
        history=history,
    )


def best_constant(params: Params, mode="with_boundary",
                  config: MinimizeConfig | None = None):
    """Minimize the discrete quotient; the infimum certifies the constant.

    In either critical regime the continuum quotient degenerates to zero, so
    instead of reporting a spurious positive constant this returns the
    closed-form :class:`DegenerationTable` for the matching minimizing
    family.  Note the left pin at t_min biases the discrete infimum upward
    by roughly (pi / (2 log(1/t_min)))^2 at p = 2: resolving the sharp
    constant to a given accuracy requires pushing t_min down accordingly.
    """
    if mode not in ("plain", "with_boundary"):
        raise ValueError(f"mode must be 'plain' or 'with_boundary', got {mode!r}")
    if config is None:
        config = MinimizeConfig()

    regime = classify(params)
    if regime is not Regime.NONCRITICAL:
        demo = critical_infimum_demo(params)
        table = DegenerationTable(
            kind=demo.kind, alpha=demo.alpha, p=demo.p, R=demo.R,
            rows=demo.rows,
            note="quotient degenerates: " + demo.note,
        )
        return table

    if mode == "plain":
        boundary_coeff = 0.0
    else:
        boundary_coeff = (
            config.boundary_coeff if config.boundary_coeff is not None
            else lambda_const(params) ** (1.0 - 1.0 / params.p)
        )

    nodes = graded_mesh(config.n, config.t_min, config.gamma,
                        mode=config.mesh_mode)
    start_fn = sample_family(TestFamily("PowerProbe", 0.1, params), nodes)
    start_full = start_fn.values.copy()
    start_full[0] = 0.0
    if mode == "plain":
        start_full[-1] = 0.0

    mu = 0.0
    if params.p < 2.0:
        slopes0 = np.diff(start_full) / np.diff(nodes)
        mu = 1e-12 * max(1.0, float(np.abs(slopes0).max()))

    model = _EnergyModel(params, nodes, boundary_coeff, mu=mu)
    obj = QuotientObjective(model, pin_right=(mode == "plain"))
    x0 = start_full[obj._slice]
    res = minimize_energy(obj, x0, config)

    u = obj.embed(obj.project(res.minimizer))
    res.minimizer = PiecewiseFn(nodes, u, support_floor=1)
    res.smoothing_mu = mu
    res.mode = mode
    return res


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["alpha,p,quotient,lambda,rel_gap,n,t_min,iterations"]
        for r in self.rows:
            lines.append(
                f"{format(r['alpha'], '.17g')},{format(r['p'], '.17g')},"
                f"{format(r['quotient'], '.17g')},{format(r['lambda'], '.17g')},"
                f"{format(r['rel_gap'], '.17g')},{r['n']},"
                f"{format(r['t_min'], '.17g')},{r['iterations']}"
            )
        return "\n".join(lines) + "\n"


def sweep_best_constant(alphas, ps, R, mode="with_boundary",
                        config: MinimizeConfig | None = None) -> SweepResult:
    """Quotient minimization over an (alpha, p) grid, as CSV-able rows."""
    if config is None:
        config = MinimizeConfig()
    out = SweepResult()
    for alpha in alphas:
        for p in ps:
            params = Params(float(alpha), float(p), float(R))
            lam = lambda_const(params)
            res = best_constant(params, mode=mode, config=config)
            if isinstance(res, DegenerationTable):
                continue  # critical points have no positive constant to report
            out.rows.append({
                "alpha": float(alpha),
                "p": float(p),
                "quotient": res.quotient,
                "lambda": lam,
                "rel_gap": (res.quotient - lam) / lam,
                "n": config.n,
                "t_min": config.t_min,
                "iterations": res.iterations,
            })
    return out
