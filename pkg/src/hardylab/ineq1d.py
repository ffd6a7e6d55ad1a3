"""One-dimensional weighted inequalities with a one-sided boundary term.

Twenty displays are registered, from the plain inequality through the
remainder-improved theorems down to the partition lemmas that drive their
proofs.  Each is evaluated as a *deficit* (left side minus right side) on a
piecewise-linear test function; the inequality is the statement that the
deficit is nonnegative.  The module also provides the randomized
nonnegativity suites, the sharpness probes for the boundary constants and
the closed-form degeneration tables for the critical regimes.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Params,
    Regime,
    build_ledger,
    classify,
    lambda_const,
)
from .meshfn import (
    PiecewiseFn,
    TestFamily,
    graded_mesh,
    insert_breakpoints,
    partition_sets,
    sample_family,
    validate_shape,
)
from .quad import WeightSpec, boundary_trace_1d, gauss_rule, integrate_weighted

__all__ = [
    "INEQUALITY_IDS",
    "InequalitySpec",
    "DeficitReport",
    "RegimeMismatchError",
    "deficit",
    "lemma31_check",
    "nonnegativity_suite",
    "SuiteResult",
    "sharpness_probe",
    "SharpnessReport",
    "critical_infimum_demo",
    "DemoTable",
]

_E = math.e
_EE = math.e ** math.e
_REL_TOL = 1e-12


class RegimeMismatchError(ValueError):
    """Inequality id and parameter regime do not match."""


# id -> (allowed regimes or None, p rule, R rule, needs partition kind)
_INFO = {
    "EqA":      ((Regime.NONCRITICAL,), "any", "any", None),
    "CorB":     ((Regime.NONCRITICAL,), "any", "any", None),
    "ThmNC1":   ((Regime.NONCRITICAL,), "any", "any", None),
    "ThmC1":    ((Regime.CRITICAL_INTERIOR,), "any", "any", None),
    "ThmC2_10": ((Regime.CRITICAL_BOUNDARY,), "any", "ge_ee", None),
    "CorD":     ((Regime.CRITICAL_INTERIOR,), "any", "any", None),
    "CorE":     ((Regime.CRITICAL_BOUNDARY,), "any", "any", None),
    "Lem3_1":   ((Regime.NONCRITICAL,), "any", "any", None),
    "Lem3_2":   ((Regime.NONCRITICAL,), "any", "any", None),
    "Lem3_3":   ((Regime.NONCRITICAL,), "any", "any", None),
    "Lem3_6a":  ((Regime.CRITICAL_INTERIOR,), "any", "any", None),
    "Lem3_6b":  ((Regime.CRITICAL_BOUNDARY,), "any", "gt_e", None),
    "Lem3_7a":  ((Regime.CRITICAL_INTERIOR,), "any", "any", None),
    "Lem3_7b":  ((Regime.CRITICAL_BOUNDARY,), "any", "ge_ee", None),
    "Eq3_16":   ((Regime.CRITICAL_BOUNDARY,), "any", "ge_ee", None),
    "Lem7_1":   (None, "two", "any", None),
    "Lem7_2":   (None, "two", "ge_ee", None),
    "Lem7_5":   (None, "lt_two", "any", "plain"),
    "Lem7_6":   (None, "two", "any", "plain"),
    "Lem7_7":   (None, "two", "ge_ee", "logweighted"),
}

INEQUALITY_IDS = tuple(_INFO)


class InequalitySpec:
    """An inequality id bound to parameters, constants and extras.

    ``extras`` carries the per-id optional inputs: a monotone nondecreasing
    multiplier ``f`` for Lem3_1, and the ratio threshold ``M`` for the
    partition lemmas Lem7_5–Lem7_7 (Lem7_5 defaults to the ledger's cap M;
    the other two default to 2).  The constants ledger is built lazily when
    an id needs one.
    """

    __slots__ = ("ineq_id", "params", "ledger", "extras")

    def __init__(self, ineq_id, params, ledger=None, extras=None):
        if ineq_id not in _INFO:
            raise ValueError(
                f"unknown inequality id {ineq_id!r}; known: {list(INEQUALITY_IDS)}"
            )
        self.ineq_id = ineq_id
        self.params = params
        self.ledger = ledger
        self.extras = dict(extras) if extras else {}
        _validate_spec(self)

    def __repr__(self):
        return (f"InequalitySpec({self.ineq_id!r}, alpha={self.params.alpha}, "
                f"p={self.params.p}, R={self.params.R})")


def _validate_spec(spec: InequalitySpec):
    regimes, p_rule, r_rule, _ = _INFO[spec.ineq_id]
    params = spec.params
    regime = classify(params)
    if spec.ineq_id == "EqA" and params.alpha != 0.0:
        raise RegimeMismatchError("EqA is the alpha = 0 display; set alpha = 0")
    if regimes is not None and regime not in regimes:
        wanted = "/".join(r.value for r in regimes)
        raise RegimeMismatchError(
            f"{spec.ineq_id} requires regime {wanted}, "
            f"but (alpha={params.alpha}, p={params.p}) is {regime.value}"
        )
    if p_rule == "two" and params.p != 2.0:
        raise ValueError(f"{spec.ineq_id} is a quadratic display; requires p = 2")
    if p_rule == "lt_two" and not (1.0 < params.p < 2.0):
        raise ValueError(f"{spec.ineq_id} requires 1 < p < 2")
    if r_rule == "ge_ee" and params.R < _EE * (1.0 - 1e-12):
        raise ValueError(f"{spec.ineq_id} requires R >= e**e, got R = {params.R}")
    if r_rule == "gt_e" and not math.log(math.log(params.R)) > 0.0:
        raise ValueError(f"{spec.ineq_id} requires R > e strictly, got R = {params.R}")
    f = spec.extras.get("f")
    if f is not None:
        if np.any(np.diff(f.values) < -1e-12 * max(1.0, float(np.abs(f.values).max()))):
            raise ValueError("Lem3_1 multiplier f must be monotone nondecreasing")
        if f.values[-1] > 1.0 + 1e-12:
            raise ValueError("Lem3_1 multiplier f must satisfy f(1) <= 1")
    M = spec.extras.get("M")
    if M is not None and not M > 1.0:
        raise ValueError(f"partition threshold M must exceed 1, got {M}")


@dataclass
class DeficitReport:
    """Term-by-term evaluation of one inequality instance.

    ``lhs == sum(lhs_terms.values())`` and likewise for the right side, in
    dict order, so ``deficit = lhs - rhs`` is exactly reproducible from the
    stored breakdown.
    """

    ineq_id: str
    alpha: float
    p: float
    R: float
    lhs: float
    rhs: float
    deficit: float
    lhs_terms: dict
    rhs_terms: dict
    constants: dict
    t_min: float
    n: int
    gauss_order: int
    warnings: list = field(default_factory=list)
    error_estimates: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def terms(self):
        return {"lhs": self.lhs_terms, "rhs": self.rhs_terms}

    def to_json(self) -> str:
        doc = {
            "id": self.ineq_id,
            "alpha": self.alpha,
            "p": self.p,
            "R": self.R,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deficit": self.deficit,
            "terms": self.terms,
            "constants": self.constants,
            "t_min": self.t_min,
            "n": self.n,
            "gauss_order": self.gauss_order,
            "warnings": self.warnings,
            "error_estimates": self.error_estimates,
            "meta": self.meta,
        }
        return json.dumps(doc, indent=2)


class _Ctx:
    """Shared state for one deficit evaluation."""

    def __init__(self, spec, fn, gauss_order, estimate_error):
        self.spec = spec
        self.fn = fn
        self.params = spec.params
        self.p = spec.params.p
        self.lam = lambda_const(spec.params)
        self.gauss_order = gauss_order
        self.estimate_error = estimate_error
        self.warnings = []
        self.error_estimates = {}
        self.meta = {}
        self._ledger = spec.ledger

    @property
    def ledger(self):
        if self._ledger is None:
            self._ledger = build_ledger(self.params)
        return self._ledger

    def w(self, s, k=0.0, m=0.0):
        R = self.params.R if (k != 0.0 or m != 0.0) else None
        return WeightSpec(float(s), float(k), float(m), R)

    def run(self, name, a_exp, b_exp, weight, intervals=None, multiplier=None):
        res = integrate_weighted(
            self.fn, a_exp, b_exp, weight,
            intervals=intervals, multiplier=multiplier,
            gauss_order=self.gauss_order, estimate_error=self.estimate_error,
        )
        if res.error_estimate is not None:
            self.error_estimates[name] = res.error_estimate
        self.warnings.extend(res.warnings)
        return res.value

    def grad(self, name, s, k=0.0, m=0.0, **kw):
        """Integral of |u'|^p against the display weight t^s A1^-k A2^-m."""
        return self.run(name, 0.0, self.p, self.w(s, k, m), **kw)

    def hardy(self, name, s, k=0.0, m=0.0, **kw):
        """Integral of |u/t|^p against the display weight t^s A1^-k A2^-m."""
        return self.run(name, self.p, 0.0, self.w(s - self.p, k, m), **kw)

    def trace(self):
        return boundary_trace_1d(self.fn, self.p)

    def threshold(self, default=None):
        M = self.spec.extras.get("M")
        if M is not None:
            return float(M)
        if default is not None:
            return float(default)
        return float(self.ledger["M"])

    def partition(self, kind):
        M = self.threshold(default=None if self.p < 2.0 else 2.0)
        part = partition_sets(self.fn, M, kind, R=self.params.R)
        self.meta["partition"] = {
            "threshold": M,
            "weight_kind": kind,
            "measure_a": part.measure()[0],
            "measure_b": part.measure()[1],
            "c_points": len(part.c_points),
        }
        return M, part


def _eval_EqA(c: _Ctx):
    p = c.p
    lam0 = (1.0 - 1.0 / p) ** p
    trace_coeff = (1.0 - 1.0 / p) ** (p - 1.0)
    lhs = {"gradient": c.grad("gradient", 0.0)}
    rhs = {
        "hardy": lam0 * c.hardy("hardy", 0.0),
        "trace": trace_coeff * c.trace(),
    }
    return lhs, rhs, {"lambda": lam0, "trace_coeff": trace_coeff}


def _eval_CorB(c: _Ctx):
    ap = c.params.alpha * c.p
    coeff = c.lam ** (1.0 - 1.0 / c.p)
    lhs = {"gradient": c.grad("gradient", ap)}
    rhs = {
        "hardy": c.lam * c.hardy("hardy", ap),
        "trace": coeff * c.trace(),
    }
    return lhs, rhs, {"lambda": c.lam, "trace_coeff": coeff}


def _eval_ThmNC1(c: _Ctx):
    ap = c.params.alpha * c.p
    led = c.ledger
    C0, C1, L = led["C0"], led["C1"], led["L"]
    lhs = {
        "gradient": c.grad("gradient", ap),
        "hardy": -c.lam * c.hardy("hardy", ap),
        "log_hardy": -C0 * c.hardy("log_hardy", ap, k=2.0),
    }
    rhs = {
        "remainder_gradient": C1 * c.grad("remainder_gradient", ap + 1.0),
        "remainder_hardy": C1 * c.lam * c.hardy("remainder_hardy", ap + 1.0),
        "remainder_log_hardy": C1 * C0 * c.hardy("remainder_log_hardy", ap + 1.0, k=2.0),
        "trace": L * c.trace(),
    }
    return lhs, rhs, {"lambda": c.lam, "C0": C0, "C1": C1, "L": L}


def _eval_ThmC1(c: _Ctx):
    ap = c.params.alpha * c.p
    led = c.ledger
    C0, C1, L = led["C0"], led["C1"], led["L"]
    lhs = {
        "gradient": c.grad("gradient", ap),
        "hardy": -c.lam * c.hardy("hardy", ap),
        "log_hardy": -C0 * c.hardy("log_hardy", ap, k=2.0),
        "trace": L * c.trace(),
    }
    rhs = {
        "remainder_gradient": C1 * c.grad("remainder_gradient", ap + 1.0),
        "remainder_hardy": C1 * c.lam * c.hardy("remainder_hardy", ap + 1.0),
        "remainder_log_hardy": C1 * C0 * c.hardy("remainder_log_hardy", ap + 1.0, k=2.0),
    }
    return lhs, rhs, {"lambda": c.lam, "C0": C0, "C1": C1, "L": L}


def _eval_ThmC2_10(c: _Ctx):
    p = c.p
    led = c.ledger
    C0, C1, L = led["C0"], led["C1"], led["L"]
    lhs = {
        "gradient": c.grad("gradient", p - 1.0),
        "hardy": -c.lam * c.hardy("hardy", p - 1.0, k=p),
        "loglog_hardy": -C0 * c.hardy("loglog_hardy", p - 1.0, k=p, m=2.0),
        "trace": L * c.trace(),
    }
    rhs = {
        "remainder_gradient": C1 * c.grad("remainder_gradient", p),
        "remainder_hardy": C1 * c.lam * c.hardy("remainder_hardy", p, k=p),
        "remainder_loglog_hardy": C1 * C0 * c.hardy(
            "remainder_loglog_hardy", p, k=p, m=2.0
        ),
    }
    return lhs, rhs, {"lambda": c.lam, "C0": C0, "C1": C1, "L": L}


def _eval_CorD(c: _Ctx):
    ap = c.params.alpha * c.p
    coeff = c.lam ** (1.0 - 1.0 / c.p)
    lhs = {
        "gradient": c.grad("gradient", ap),
        "trace": coeff * c.trace(),
    }
    rhs = {"hardy": c.lam * c.hardy("hardy", ap)}
    return lhs, rhs, {"lambda": c.lam, "trace_coeff": coeff}


def _eval_CorE(c: _Ctx):
    p = c.p
    a1_at_1 = math.log(c.params.R)
    # The display's boundary coefficient is Lambda^alpha * A1(1)^(1-p); on
    # the critical line alpha equals 1 - 1/p, so both readings of the
    # exponent give the same number — the report carries each.
    coeff_alpha = c.lam ** c.params.alpha * a1_at_1 ** (1.0 - p)
    coeff_1m1p = c.lam ** (1.0 - 1.0 / p) * a1_at_1 ** (1.0 - p)
    lhs = {
        "gradient": c.grad("gradient", p - 1.0),
        "trace": coeff_alpha * c.trace(),
    }
    rhs = {"hardy": c.lam * c.hardy("hardy", p - 1.0, k=p)}
    constants = {
        "lambda": c.lam,
        "boundary_coeff_lambda_pow_alpha": coeff_alpha,
        "boundary_coeff_lambda_pow_1m1p": coeff_1m1p,
    }
    return lhs, rhs, constants


def _eval_Lem3_1(c: _Ctx):
    f = c.spec.extras.get("f")
    if f is None:
        raise ValueError("Lem3_1 needs extras={'f': <monotone PiecewiseFn>}")
    one_minus_f = PiecewiseFn(f.nodes, 1.0 - f.values)
    ap = c.params.alpha * c.p
    lhs = {
        "gradient_weighted": c.grad("gradient_weighted", ap, multiplier=one_minus_f),
        "hardy_weighted": -c.lam * c.hardy("hardy_weighted", ap, multiplier=one_minus_f),
    }
    return lhs, {}, {"lambda": c.lam, "f_at_1": float(f.values[-1])}


def _eval_Lem3_2(c: _Ctx):
    ap = c.params.alpha * c.p
    led = c.ledger
    C3, L3 = led["C3"], led["L3"]
    lhs = {
        "gradient": c.grad("gradient", ap),
        "hardy": -c.lam * c.hardy("hardy", ap),
    }
    rhs = {
        "log_hardy": C3 * c.hardy("log_hardy", ap, k=2.0),
        "trace": L3 * c.trace(),
    }
    return lhs, rhs, {"lambda": c.lam, "C3": C3, "L3": L3}


def _eval_Lem3_3(c: _Ctx):
    ap = c.params.alpha * c.p
    led = c.ledger
    C4, L4 = led["C4"], led["L4"]
    lhs = {
        "gradient": c.grad("gradient", ap),
        "hardy": -c.lam * c.hardy("hardy", ap),
    }
    rhs = {
        "log_gradient": C4 * c.grad("log_gradient", ap, k=2.0),
        "log_hardy": C4 * c.lam * c.hardy("log_hardy", ap, k=2.0),
        "trace": L4 * c.trace(),
    }
    return lhs, rhs, {"lambda": c.lam, "C4": C4, "L4": L4}


def _eval_Lem3_6a(c: _Ctx):
    ap = c.params.alpha * c.p
    led = c.ledger
    C5, L5 = led["C5"], led["L5"]
    lhs = {
        "gradient": c.grad("gradient", ap),
        "hardy": -c.lam * c.hardy("hardy", ap),
        "trace": L5 * c.trace(),
    }
    rhs = {"log_hardy": C5 * c.hardy("log_hardy", ap, k=2.0)}
    return lhs, rhs, {"lambda": c.lam, "C5": C5, "L5": L5}


def _eval_Lem3_6b(c: _Ctx):
    p = c.p
    led = c.ledger
    C5, L5 = led["C5"], led["L5"]
    lhs = {
        "gradient": c.grad("gradient", p - 1.0),
        "hardy": -c.lam * c.hardy("hardy", p - 1.0, k=p),
        "trace": L5 * c.trace(),
    }
    rhs = {"loglog_hardy": C5 * c.hardy("loglog_hardy", p - 1.0, k=p, m=2.0)}
    return lhs, rhs, {"lambda": c.lam, "C5": C5, "L5": L5}


def _eval_Lem3_7a(c: _Ctx):
    ap = c.params.alpha * c.p
    led = c.ledger
    C6, L6 = led["C6"], led["L6"]
    lhs = {
        "gradient": c.grad("gradient", ap),
        "hardy": -c.lam * c.hardy("hardy", ap),
        "trace": L6 * c.trace(),
    }
    rhs = {"log_gradient": C6 * c.grad("log_gradient", ap, k=2.0)}
    return lhs, rhs, {"lambda": c.lam, "C6": C6, "L6": L6}


def _eval_Lem3_7b(c: _Ctx):
    p = c.p
    led = c.ledger
    C6, L6 = led["C6"], led["L6"]
    lhs = {
        "gradient": c.grad("gradient", p - 1.0),
        "hardy": -c.lam * c.hardy("hardy", p - 1.0, k=p),
        "trace": L6 * c.trace(),
    }
    rhs = {"loglog_gradient": C6 * c.grad("loglog_gradient", p - 1.0, m=2.0)}
    return lhs, rhs, {"lambda": c.lam, "C6": C6, "L6": L6}


def _eval_Eq3_16(c: _Ctx):
    p = c.p
    led = c.ledger
    C7, L7 = led["C7"], led["L7"]
    lhs = {
        "gradient": c.grad("gradient", p - 1.0),
        "hardy": -c.lam * c.hardy("hardy", p - 1.0, k=p),
        "trace": L7 * c.trace(),
    }
    rhs = {
        "loglog_gradient": C7 * c.grad("loglog_gradient", p - 1.0, m=2.0),
        "loglog_hardy": C7 * c.lam * c.hardy("loglog_hardy", p - 1.0, k=p, m=2.0),
    }
    return lhs, rhs, {"lambda": c.lam, "C7": C7, "L7": L7}


def _eval_Lem7_1(c: _Ctx):
    a1_at_1 = math.log(c.params.R)
    lhs = {
        "gradient": c.run("gradient", 0.0, 2.0, c.w(1.0)),
        "trace": 0.5 * c.trace() / a1_at_1,
    }
    rhs = {"log_hardy": 0.25 * c.run("log_hardy", 2.0, 0.0, c.w(-1.0, k=2.0))}
    return lhs, rhs, {"trace_coeff": 0.5 / a1_at_1}


def _eval_Lem7_2(c: _Ctx):
    a2_at_1 = math.log(math.log(c.params.R))
    lhs = {
        "gradient": c.run("gradient", 0.0, 2.0, c.w(1.0, k=-1.0)),
        "trace": 0.5 * c.trace() / a2_at_1,
    }
    rhs = {
        "loglog_hardy": 0.25 * c.run("loglog_hardy", 2.0, 0.0, c.w(-1.0, k=1.0, m=2.0))
    }
    return lhs, rhs, {"trace_coeff": 0.5 / a2_at_1}


def _eval_Lem7_5(c: _Ctx):
    p = c.p
    M, part = c.partition("plain")
    eps_m = M ** (1.0 - p) / math.log(c.params.R)
    lhs = {
        "capped_gradient_b": eps_m * c.run(
            "capped_gradient_b", 2.0 - p, p, c.w(p - 1.0), intervals=part.b_set
        )
    }
    rhs = {
        "cross_b": c.run("cross_b", 1.0, 1.0, c.w(0.0, k=1.0), intervals=part.b_set)
    }
    return lhs, rhs, {"threshold": M, "eps_M": eps_m}


def _eval_Lem7_6(c: _Ctx):
    a1_at_1 = math.log(c.params.R)
    M, part = c.partition("plain")
    lhs = {
        "gradient_a": c.run("gradient_a", 0.0, 2.0, c.w(1.0), intervals=part.a_set),
        "trace": 0.5 * c.trace() / a1_at_1,
        "cross_b": c.run("cross_b", 1.0, 1.0, c.w(0.0, k=1.0), intervals=part.b_set),
    }
    rhs = {
        "log_hardy_a": 0.25 * c.run(
            "log_hardy_a", 2.0, 0.0, c.w(-1.0, k=2.0), intervals=part.a_set
        ),
        "log_hardy_b": 0.5 * c.run(
            "log_hardy_b", 2.0, 0.0, c.w(-1.0, k=2.0), intervals=part.b_set
        ),
    }
    return lhs, rhs, {"threshold": M, "trace_coeff": 0.5 / a1_at_1}


def _eval_Lem7_7(c: _Ctx):
    a2_at_1 = math.log(math.log(c.params.R))
    M, part = c.partition("logweighted")
    lhs = {
        "gradient_a": c.run(
            "gradient_a", 0.0, 2.0, c.w(1.0, k=-1.0), intervals=part.a_set
        ),
        "trace": 0.5 * c.trace() / a2_at_1,
        "cross_b": c.run(
            "cross_b", 1.0, 1.0, c.w(0.0, m=1.0), intervals=part.b_set
        ),
    }
    rhs = {
        "loglog_hardy_a": 0.25 * c.run(
            "loglog_hardy_a", 2.0, 0.0, c.w(-1.0, k=1.0, m=2.0), intervals=part.a_set
        ),
        "loglog_hardy_b": 0.5 * c.run(
            "loglog_hardy_b", 2.0, 0.0, c.w(-1.0, k=1.0, m=2.0), intervals=part.b_set
        ),
    }
    return lhs, rhs, {"threshold": M, "trace_coeff": 0.5 / a2_at_1}


_EVALUATORS = {
    "EqA": _eval_EqA,
    "CorB": _eval_CorB,
    "ThmNC1": _eval_ThmNC1,
    "ThmC1": _eval_ThmC1,
    "ThmC2_10": _eval_ThmC2_10,
    "CorD": _eval_CorD,
    "CorE": _eval_CorE,
    "Lem3_1": _eval_Lem3_1,
    "Lem3_2": _eval_Lem3_2,
    "Lem3_3": _eval_Lem3_3,
    "Lem3_6a": _eval_Lem3_6a,
    "Lem3_6b": _eval_Lem3_6b,
    "Lem3_7a": _eval_Lem3_7a,
    "Lem3_7b": _eval_Lem3_7b,
    "Eq3_16": _eval_Eq3_16,
    "Lem7_1": _eval_Lem7_1,
    "Lem7_2": _eval_Lem7_2,
    "Lem7_5": _eval_Lem7_5,
    "Lem7_6": _eval_Lem7_6,
    "Lem7_7": _eval_Lem7_7,
}


def deficit(spec, fn: PiecewiseFn, *, params: Params | None = None,
            extras=None, gauss_order=8, estimate_error=True,
            strict=False) -> DeficitReport:
    """Evaluate one inequality's deficit (lhs - rhs) on a test function.

    ``spec`` may be an :class:`InequalitySpec` or a bare id string together
    with ``params`` (and optionally ``extras``).  The function's mesh must
    end at 1; its support floor is the discrete stand-in for vanishing near
    the singular endpoint.  With ``strict=True`` the probe-class shape flags
    become errors for the partition/appendix lemmas (left value must vanish
    and the final slope must be zero); otherwise they are attached to the
    report as warnings.
    """
    if isinstance(spec, str):
        if params is None:
            raise ValueError("deficit(id_string, ...) needs params=")
        spec = InequalitySpec(spec, params, extras=extras)
    if fn.t_max != 1.0:
        raise ValueError("test function mesh must end at t = 1")

    flags = validate_shape(fn)
    if strict:
        relevant = flags if spec.ineq_id.startswith("Lem7_") else [
            fl for fl in flags if fl in ("nonzero_left_value", "identically_zero")
        ]
        if relevant:
            raise ValueError(
                f"strict mode: test function fails shape checks {relevant}"
            )

    ctx = _Ctx(spec, fn, gauss_order, estimate_error)
    ctx.warnings.extend(f"shape:{fl}" for fl in flags)
    lhs_terms, rhs_terms, constants = _EVALUATORS[spec.ineq_id](ctx)
    lhs = sum(lhs_terms.values())
    rhs = sum(rhs_terms.values())
    return DeficitReport(
        ineq_id=spec.ineq_id,
        alpha=spec.params.alpha,
        p=spec.params.p,
        R=spec.params.R,
        lhs=lhs,
        rhs=rhs,
        deficit=lhs - rhs,
        lhs_terms=lhs_terms,
        rhs_terms=rhs_terms,
        constants=constants,
        t_min=fn.t_min,
        n=fn.n,
        gauss_order=gauss_order,
        warnings=ctx.warnings,
        error_estimates=ctx.error_estimates,
        meta=ctx.meta,
    )


def lemma31_check(params: Params, f: PiecewiseFn, u: PiecewiseFn,
                  **kwargs) -> DeficitReport:
    """Deficit of the monotone-multiplier inequality: the unweighted
    gradient/Hardy difference dominates its f-weighted version for any
    nondecreasing f with f(1) <= 1."""
    return deficit("Lem3_1", u, params=params, extras={"f": f}, **kwargs)


# ---------------------------------------------------------------------------
# Randomized nonnegativity suites
# ---------------------------------------------------------------------------

# p draws come from fixed grids so the c(p) estimates (the slow part of a
# ledger build) are cached across cases.
_P_GRID = tuple(round(x, 4) for x in np.linspace(1.25, 4.0, 12))
_P_GRID_LT2 = tuple(round(x, 4) for x in np.linspace(1.2, 1.9, 8))


def _case_seed(master_seed: int, id_index: int, case: int) -> int:
    ss = np.random.SeedSequence((int(master_seed), int(id_index), int(case)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _draw_params(ineq_id: str, rng: np.random.Generator):
    """Regime-conforming random parameters (and extras) for one suite case."""
    _, p_rule, r_rule, _ = _INFO[ineq_id]
    if p_rule == "two":
        p = 2.0
    elif p_rule == "lt_two":
        p = float(rng.choice(_P_GRID_LT2))
    else:
        p = float(rng.choice(_P_GRID))

    if r_rule == "ge_ee":
        log_r = float(rng.uniform(_E + 0.05, 9.0))
    elif r_rule == "gt_e":
        log_r = float(rng.uniform(1.1, 4.0))
    else:
        log_r = float(rng.uniform(1.05, 4.0))
    R = math.exp(log_r)

    regimes = _INFO[ineq_id][0]
    critical_line = 1.0 - 1.0 / p
    if ineq_id == "EqA":
        alpha = 0.0
    elif regimes == (Regime.NONCRITICAL,):
        alpha = critical_line - float(rng.uniform(0.05, 1.2))
    elif regimes == (Regime.CRITICAL_INTERIOR,):
        alpha = critical_line + float(rng.uniform(0.05, 1.5))
    elif regimes == (Regime.CRITICAL_BOUNDARY,):
        alpha = critical_line
    else:
        alpha = 0.0  # parameter-light appendix lemmas

    params = Params(alpha, p, R)

    extras = {}
    if ineq_id == "Lem3_1":
        extras["f"] = None  # filled in once the mesh is known
    elif ineq_id in ("Lem7_6", "Lem7_7"):
        extras["M"] = float(rng.uniform(1.1, 6.0))
    return params, extras


def _random_testfn(rng: np.random.Generator, nodes) -> PiecewiseFn:
    n = nodes.size - 1
    values = rng.standard_normal(n + 1)
    values[1:-1] = (values[:-2] + values[1:-1] + values[2:]) / 3.0
    floor = int(rng.integers(1, n // 2 + 1))
    values[:floor] = 0.0
    return PiecewiseFn(nodes, values, support_floor=floor)


def _random_monotone_multiplier(rng: np.random.Generator, nodes) -> PiecewiseFn:
    steps = np.abs(rng.standard_normal(nodes.size - 1))
    values = np.concatenate([[0.0], np.cumsum(steps)])
    top = values[-1] if values[-1] > 0.0 else 1.0
    values = values / top * float(rng.uniform(0.2, 1.0))
    return PiecewiseFn(nodes, values)


@dataclass
class SuiteRow:
    ineq_id: str
    case: int
    seed: int
    n: int
    t_min: float
    lhs: float
    rhs: float
    deficit: float
    violation: bool


@dataclass
class SuiteResult:
    rows: list
    cases: int
    master_seed: int
    tol_factor: float

    @property
    def violations(self) -> int:
        return sum(r.violation for r in self.rows)

    def to_csv(self) -> str:
        lines = ["id,seed,n,t_min,lhs,rhs,deficit"]
        for r in self.rows:
            lines.append(
                f"{r.ineq_id},{r.seed},{r.n},{format(r.t_min, '.17g')},"
                f"{format(r.lhs, '.17g')},{format(r.rhs, '.17g')},"
                f"{format(r.deficit, '.17g')}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "cases": self.cases,
            "master_seed": self.master_seed,
            "tol_factor": self.tol_factor,
            "violations": self.violations,
            "rows": [
                {
                    "id": r.ineq_id, "case": r.case, "seed": r.seed,
                    "n": r.n, "t_min": r.t_min,
                    "lhs": r.lhs, "rhs": r.rhs, "deficit": r.deficit,
                    "violation": r.violation,
                }
                for r in self.rows
            ],
        }
        return json.dumps(doc, indent=2)


def _suite_case(ineq_id, id_index, case, master_seed, nodes, n, t_min,
                gauss_order, tol_factor):
    seed = _case_seed(master_seed, id_index, case)
    rng = np.random.default_rng(seed)
    params, extras = _draw_params(ineq_id, rng)
    if ineq_id == "Lem3_1":
        extras["f"] = _random_monotone_multiplier(rng, nodes)
    fn = _random_testfn(rng, nodes)
    report = deficit(
        ineq_id, fn, params=params, extras=extras,
        gauss_order=gauss_order, estimate_error=False,
    )
    tol = tol_factor * (abs(report.lhs) + abs(report.rhs))
    return SuiteRow(
        ineq_id=ineq_id, case=case, seed=seed, n=n, t_min=t_min,
        lhs=report.lhs, rhs=report.rhs, deficit=report.deficit,
        violation=bool(report.deficit < -tol),
    )


def nonnegativity_suite(ids=None, *, cases=1000, n=1024, t_min=1e-4,
                        gamma=2.0, seed=0, gauss_order=8, workers=None,
                        tol_factor=1e-8) -> SuiteResult:
    """Randomized verification: every registered inequality holds on random
    piecewise-linear functions up to quadrature tolerance.

    Each case draws regime-conforming parameters, a random support floor and
    smoothed random nodal values, then checks
    ``deficit >= -tol_factor * (|lhs| + |rhs|)``.  Rows are emitted in
    (id, case) order whatever the worker pool does; per-case seeds derive
    from (master seed, id index, case index) so any row is reproducible in
    isolation.
    """
    if ids is None:
        ids = INEQUALITY_IDS
    unknown = set(ids) - set(INEQUALITY_IDS)
    if unknown:
        raise ValueError(f"unknown inequality ids: {sorted(unknown)}")
    nodes = graded_mesh(n, t_min, gamma)
    rows = []
    jobs = [
        (ineq_id, list(INEQUALITY_IDS).index(ineq_id), case)
        for ineq_id in ids
        for case in range(cases)
    ]

    def run_one(job):
        ineq_id, id_index, case = job
        return _suite_case(
            ineq_id, id_index, case, seed, nodes, n, t_min,
            gauss_order, tol_factor,
        )

    if workers and workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_one, jobs))
    else:
        rows = [run_one(job) for job in jobs]
    return SuiteResult(rows=rows, cases=cases, master_seed=seed,
                       tol_factor=tol_factor)


# ---------------------------------------------------------------------------
# Sharpness probes
# ---------------------------------------------------------------------------

_PROBE_FAMILY = {"CorB": "PowerProbe", "CorD": "PowerProbe", "CorE": "LogProbe"}


@dataclass
class SharpnessRow:
    eps: float
    deficit: float
    truncation_bound: float


@dataclass
class SharpnessReport:
    ineq_id: str
    family: str
    alpha: float
    p: float
    R: float
    t_min: float
    rows: list
    rate: float

    def to_csv(self) -> str:
        lines = ["eps,deficit,truncation_bound"]
        for r in self.rows:
            lines.append(
                f"{format(r.eps, '.17g')},{format(r.deficit, '.17g')},"
                f"{format(r.truncation_bound, '.17g')}"
            )
        return "\n".join(lines) + "\n"


def _gauss_integrate(fun, nodes, order=12):
    """Gauss quadrature of an analytic integrand on a fixed mesh."""
    gx, gw = gauss_rule(order)
    lo = nodes[:-1]
    hi = nodes[1:]
    half = 0.5 * (hi - lo)
    t = lo[:, None] + half[:, None] * (gx[None, :] + 1.0)
    vals = fun(t)
    return float(((vals * gw[None, :]).sum(axis=1) * half).sum())


def _probe_terms(ineq_id, params, eps, nodes, order):
    """Quadrature values and exact left-tail corrections for one probe.

    The probe families are analytic, so each display term is integrated
    with the exact integrand on [t_min, 1] and corrected by the closed-form
    integral over (0, t_min]; the correction magnitude is the reported
    truncation bound.
    """
    p, alpha, R = params.p, params.alpha, params.R
    lam = lambda_const(params)
    t_min = float(nodes[0])
    if ineq_id in ("CorB", "CorD"):
        beta = params.beta
        expo = beta + eps  # PowerProbe exponent 1 - alpha - 1/p + eps
        if ineq_id == "CorD" and not eps < abs(beta):
            raise ValueError("CorD probe needs eps < |beta|")
        grad_c = abs(expo) ** p
        # both terms reduce to the same integrand t^(eps*p - 1)
        base = _gauss_integrate(lambda t: t ** (eps * p - 1.0), nodes, order)
        tail = t_min ** (eps * p) / (eps * p)
        grad = grad_c * (base + tail)
        hardy = lam * (base + tail)
        trace = lam ** (1.0 - 1.0 / p)  # |u(1)|^p = 1
        # the net below-t_min contribution to the deficit (added exactly)
        truncation = abs(grad_c - lam) * tail
        if ineq_id == "CorB":
            value = grad - hardy - trace
        else:
            value = grad + trace - hardy
        return value, truncation

    # CorE: LogProbe on the critical boundary
    bc = 1.0 - 1.0 / p
    if not 0.0 < eps < bc:
        raise ValueError("CorE probe needs 0 < eps < 1 - 1/p")
    log_r = math.log(R)

    def a1(t):
        return log_r - np.log(t)

    base = _gauss_integrate(lambda t: a1(t) ** (-1.0 - eps * p) / t, nodes, order)
    tail = a1(t_min) ** (-eps * p) / (eps * p)
    grad = (bc - eps) ** p * (base + tail)
    hardy = lam * (base + tail)
    trace = lam ** alpha * log_r ** (1.0 - p) * log_r ** ((bc - eps) * p)
    truncation = abs((bc - eps) ** p - lam) * tail
    return grad + trace - hardy, truncation


def sharpness_probe(spec, family, eps_sequence, *, t_min=1e-6, n=2048,
                    gamma=3.0, gauss_order=12) -> SharpnessReport:
    """Drive a boundary-constant deficit to zero along its probe family.

    Supported pairings: the noncritical boundary constant with PowerProbe,
    the critical-interior one with PowerProbe and the critical-boundary one
    with LogProbe.  Deficits are closed-form-accurate (analytic integrands
    on a graded mesh plus exact left-tail corrections, whose magnitude is
    the per-row truncation bound).  The fitted rate is the log-log slope of
    deficit against eps; a positive rate certifies that no larger boundary
    constant is admissible.
    """
    if isinstance(spec, str):
        raise TypeError("sharpness_probe needs an InequalitySpec (id + params)")
    family_kind = family.kind if isinstance(family, TestFamily) else str(family)
    wanted = _PROBE_FAMILY.get(spec.ineq_id)
    if wanted is None:
        raise ValueError(
            f"no sharpness probe for {spec.ineq_id}; supported: {sorted(_PROBE_FAMILY)}"
        )
    if family_kind != wanted:
        raise ValueError(f"{spec.ineq_id} pairs with {wanted}, got {family_kind}")

    eps_list = [float(e) for e in eps_sequence]
    if any(e <= 0.0 for e in eps_list):
        raise ValueError("eps values must be positive")
    nodes = graded_mesh(n, t_min, gamma)
    rows = []
    for eps in eps_list:
        value, bound = _probe_terms(spec.ineq_id, spec.params, eps, nodes,
                                    gauss_order)
        rows.append(SharpnessRow(eps=eps, deficit=value, truncation_bound=bound))
    if len(rows) >= 2 and all(r.deficit > 0.0 for r in rows):
        slope = np.polyfit(
            np.log([r.eps for r in rows]), np.log([r.deficit for r in rows]), 1
        )[0]
    else:
        slope = float("nan")
    return SharpnessReport(
        ineq_id=spec.ineq_id, family=family_kind,
        alpha=spec.params.alpha, p=spec.params.p, R=spec.params.R,
        t_min=t_min, rows=rows, rate=float(slope),
    )


# ---------------------------------------------------------------------------
# Critical-regime degeneration demos
# ---------------------------------------------------------------------------


@dataclass
class DemoRow:
    eps: float
    energy: float
    energy_quadrature: float | None


@dataclass
class DemoTable:
    kind: str
    alpha: float
    p: float
    R: float
    rows: list
    note: str = ""

    def to_csv(self) -> str:
        lines = ["eps,energy,energy_quadrature"]
        for r in self.rows:
            quad_txt = "" if r.energy_quadrature is None else format(
                r.energy_quadrature, ".17g"
            )
            lines.append(f"{format(r.eps, '.17g')},{format(r.energy, '.17g')},{quad_txt}")
        return "\n".join(lines) + "\n"


def critical_infimum_demo(params: Params, eps_sequence=None, *, t_min=1e-8,
                          n=2048, gamma=3.0, gauss_order=12) -> DemoTable:
    """Energies of the critical-regime minimizing families.

    In the critical interior the Ramp family has gradient energy
    ``eps**(alpha p + 1 - p) / (alpha p + 1)``; on the critical boundary the
    LogRamp family has energy ``(A1(eps) - A1(1/2))**(1-p)``.  Both tend to
    zero, which is exactly why no positive Hardy constant survives without
    the logarithmic corrections.  Each row carries the closed form and an
    independent quadrature value (omitted when eps is too small for the mesh
    to resolve — the boundary family needs astronomically small eps to push
    the energy down, which only the closed form can follow).
    """
    regime = classify(params)
    if regime is Regime.NONCRITICAL:
        raise RegimeMismatchError(
            "critical_infimum_demo needs a critical regime; "
            f"(alpha={params.alpha}, p={params.p}) is noncritical"
        )
    if eps_sequence is None:
        if regime is Regime.CRITICAL_INTERIOR:
            eps_sequence = (0.3, 0.1, 0.03, 0.01)
        else:
            # the boundary family needs exponentially small eps; the last
            # two rows are far below any resolvable mesh on purpose
            eps_sequence = tuple(0.5 * math.exp(-k) for k in (3, 10, 50, 200))
    eps_list = [float(e) for e in eps_sequence]
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_sequence must be strictly decreasing")

    p, alpha, R = params.p, params.alpha, params.R
    ap = alpha * p
    rows = []
    if regime is Regime.CRITICAL_INTERIOR:
        kind = "Ramp"
        for eps in eps_list:
            energy = eps ** (ap + 1.0 - p) / (ap + 1.0)
            check = None
            if eps >= 4.0 * t_min:
                nodes = insert_breakpoints(graded_mesh(n, t_min, gamma), [eps])
                fn = sample_family(TestFamily("Ramp", eps, params), nodes)
                res = integrate_weighted(fn, 0.0, p, WeightSpec.power(ap),
                                         gauss_order=gauss_order,
                                         estimate_error=False)
                # exact closed-form integral of the ramp over (0, t_min]
                tail = eps ** (-p) * t_min ** (ap + 1.0) / (ap + 1.0)
                check = res.value + tail
            rows.append(DemoRow(eps=eps, energy=energy, energy_quadrature=check))
        note = "gradient energy of min(t/eps, 1) against t^(alpha p)"
    else:
        kind = "LogRamp"
        log_r = math.log(R)
        a1_half = log_r - math.log(0.5)
        for eps in eps_list:
            if not eps < 0.5:
                raise ValueError("LogRamp needs eps < 1/2")
            delta = (log_r - math.log(eps)) - a1_half
            energy = delta ** (1.0 - p)
            check = None
            if eps >= 4.0 * t_min:
                sub = graded_mesh(max(n, 256), eps, gamma, t_max=0.5)
                check = _gauss_integrate(
                    lambda t: delta ** (-p) / t, sub, gauss_order
                )
            rows.append(DemoRow(eps=eps, energy=energy, energy_quadrature=check))
        note = "gradient energy of the log-ramp against t^(p-1)"

    energies = [r.energy for r in rows]
    if any(e2 >= e1 for e1, e2 in zip(energies, energies[1:])):
        raise AssertionError("demo energies failed to decrease strictly")
    return DemoTable(kind=kind, alpha=alpha, p=p, R=R, rows=rows, note=note)
