"""Parameters and certified constants for one-sided weighted Hardy
inequalities on (0, 1].

The family is indexed by a weight exponent ``alpha``, an integrability
exponent ``p > 1`` and a logarithmic scale ``R``.  The derived quantity

    beta = 1 - 1/p - alpha

splits the family into three regimes: ``beta > 0`` (noncritical),
``beta = 0`` (critical boundary line ``alpha = 1 - 1/p``) and ``beta < 0``
(critical interior).  Everything downstream — deficit evaluation, sharpness
probes, variational bounds, the tubular-domain reductions — pulls its
constants from :func:`build_ledger`, which assembles them bottom-up from the
two primitives that need actual numerics:

* :func:`estimate_cp` — the best constant in the scalar convexity inequality
  ``|1 + X|^p - 1 - pX >= c |X|^q``, and
* :func:`envelope_bound` — suprema on (0, 1] of the log-weight envelopes
  ``t A1(t)^2`` and ``t A2(t)^2`` with ``A1 = log(R/t)``, ``A2 = log A1``.

Every ledger entry records the formula it was computed from, so a report can
be audited without rerunning anything.
"""

from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Params",
    "Regime",
    "classify",
    "lambda_const",
    "a1",
    "a2",
    "convexity_gap",
    "estimate_cp",
    "envelope_bound",
    "LedgerEntry",
    "ConstantLedger",
    "LedgerError",
    "build_ledger",
    "parse_scale",
]

_CRITICAL_TOL = 1e-14

# Smallest admissible logarithmic scale: A1(t) = log(R/t) must be >= 1 on
# (0, 1], and several displays are stated at R = e itself.
_R_MIN = math.e * (1.0 - 1e-12)


class Regime(enum.Enum):
    """Position of (alpha, p) relative to the critical line alpha = 1 - 1/p."""

    NONCRITICAL = "noncritical"
    CRITICAL_BOUNDARY = "critical_boundary"
    CRITICAL_INTERIOR = "critical_interior"


@dataclass(frozen=True)
class Params:
    """Parameter triple (alpha, p, R) of the weighted Hardy family.

    Parameters
    ----------
    alpha : float
        Weight exponent; the base weight is ``t**(alpha*p)``.
    p : float
        Integrability exponent, strictly greater than 1.
    R : float
        Logarithmic scale in ``A1(t) = log(R/t)``.  Must satisfy ``R >= e``
        so that ``A1 >= 1`` on (0, 1].  Displays involving the iterated
        logarithm ``A2 = log(A1)`` additionally need ``R >= e**e``; that is
        enforced where those displays are evaluated, not here.
    """

    alpha: float
    p: float
    R: float = math.e ** 2

    def __post_init__(self):
        for name in ("alpha", "p", "R"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ValueError(f"{name} must be a finite number, got {v!r}")
        if not self.p > 1.0:
            raise ValueError(f"p must be > 1, got {self.p}")
        if self.R < _R_MIN:
            raise ValueError(f"R must be >= e, got {self.R}")

    @property
    def beta(self) -> float:
        """Distance 1 - 1/p - alpha to the critical line (signed)."""
        return 1.0 - 1.0 / self.p - self.alpha


def classify(params: Params) -> Regime:
    """Regime of ``params``, collapsing near-critical alpha onto the line.

    The critical line is detected by ``|alpha - (1 - 1/p)| <= 1e-14`` so that
    an alpha entered as a rounded decimal (e.g. ``2/3`` for ``p = 3``) is
    treated exactly like the critical value.
    """
    if abs(params.alpha - (1.0 - 1.0 / params.p)) <= _CRITICAL_TOL:
        return Regime.CRITICAL_BOUNDARY
    if params.beta > 0.0:
        return Regime.NONCRITICAL
    return Regime.CRITICAL_INTERIOR


def lambda_const(params: Params) -> float:
    """Optimal Hardy constant ``|beta|**p``, or ``(1 - 1/p)**p`` on the
    critical line (where the sharp constant comes from the log-weighted
    inequality, not from beta itself)."""
    if classify(params) is Regime.CRITICAL_BOUNDARY:
        return (1.0 - 1.0 / params.p) ** params.p
    return abs(params.beta) ** params.p


def a1(t, R):
    """First log weight ``A1(t) = log(R/t)``, elementwise; requires t > 0."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("a1(t, R) requires t > 0")
    out = math.log(R) - np.log(arr)
    if np.ndim(t) == 0:
        return float(out)
    return out


def a2(t, R):
    """Iterated log weight ``A2(t) = log(A1(t))``; requires A1(t) > 0."""
    v = a1(t, R)
    arr = np.asarray(v, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("a2(t, R) requires log(R/t) > 0, i.e. t < R")
    out = np.log(arr)
    if np.ndim(t) == 0:
        return float(out)
    return out


def parse_scale(text):
    """Parse a scale value that may be written symbolically.

    Accepts plain float literals plus the spellings that show up for the
    logarithmic scale R: ``e`` (Euler's number), ``ee`` (e**e), and
    ``e^k`` / ``ek`` for integer powers (``e2`` is e squared).  Numbers are
    passed through unchanged.
    """
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    if s == "e":
        return math.e
    if s == "ee":
        return math.e ** math.e
    if s.startswith("e"):
        tail = s[1:].lstrip("^")
        try:
            return math.e ** int(tail)
        except ValueError:
            pass
    try:
        return float(s)
    except ValueError:
        raise ValueError(
            f"cannot parse scale {text!r}: expected a number or one of "
            "'e', 'ee', 'e^k'"
        ) from None


# ---------------------------------------------------------------------------
# Convexity gap and its best lower constants
# ---------------------------------------------------------------------------


def convexity_gap(p, X):
    """Gap ``|1 + X|**p - 1 - p*X`` in the tangent-line inequality for
    ``y -> |y|**p`` at ``y = 1``.  Nonnegative for p >= 1, zero only at X = 0.

    Evaluated by its binomial series for ``|X| <= 1/2``; the literal
    expression loses every significant digit for ``|X|`` near 1e-8, where the
    gap is ~``X**2`` ~ 1e-16, the same size as the rounding error of
    ``|1+X|**p``.
    """
    arr = np.asarray(X, dtype=float)
    out = np.empty_like(arr)
    small = np.abs(arr) <= 0.5
    xs = arr[small]
    if xs.size:
        acc = np.zeros_like(xs)
        term = (p * (p - 1.0) / 2.0) * xs * xs
        k = 2
        while k < 400:
            acc += term
            if np.max(np.abs(term)) < 1e-60:
                break
            term = term * xs * ((p - k) / (k + 1.0))
            k += 1
        out[small] = acc
    xl = arr[~small]
    if xl.size:
        out[~small] = np.abs(1.0 + xl) ** p - 1.0 - p * xl
    if np.ndim(X) == 0:
        return float(out)
    return out


def _golden_min(fn, a, b, iters=200):
    """Golden-section minimum of fn on [a, b] (scalar, unimodal assumed)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    best = min(fc, fd)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
        best = min(best, fc, fd)
        if b - a < 1e-14:
            break
    return best


def _branch_inf(ratio_of_absx, lo, hi, num=50_000):
    """Infimum of a ratio over |X| in [lo, hi] for one sign branch.

    Dense log-spaced scan plus golden-section refinement around the best
    scan point (in the log coordinate, where the ratio varies slowly).
    """
    ylo, yhi = math.log10(lo), math.log10(hi)
    ys = np.linspace(ylo, yhi, num)
    vals = ratio_of_absx(10.0 ** ys)
    i = int(np.argmin(vals))
    best = float(vals[i])
    ya = ys[max(i - 1, 0)]
    yb = ys[min(i + 1, num - 1)]
    refined = _golden_min(lambda y: float(ratio_of_absx(10.0 ** y)), ya, yb)
    return min(best, refined)


_CP_MARGIN = 4e-10  # relative safety margin subtracted from the sampled infimum


def estimate_cp(p, q=None, mode="global", M=None):
    """Certified lower constant for the convexity gap.

    mode="global"
        Largest c with ``convexity_gap(p, X) >= c * |X|**q`` for all real X.
        Requires ``p >= 2`` and ``2 <= q <= p`` (default ``q = p``).

    mode="capped"
        For ``1 < p <= 2`` and a cap ``M >= 1``: largest c with
        ``gap >= c * M**(p-2) * X**2`` on ``|X| <= M`` and
        ``gap >= c * |X|**p`` on ``|X| >= M``.

    The value returned is the infimum of the sampled ratio (dense log-spaced
    scan over ``1e-8 <= |X| <= 1e6``, both signs, golden-section refinement)
    minus a fixed relative margin, so it is safe to use as a lower bound in
    derived constants.
    """
    if mode == "global":
        if q is None:
            q = p
        if p < 2.0:
            raise ValueError("global mode requires p >= 2")
        if not (2.0 <= q <= p):
            raise ValueError(f"global mode requires 2 <= q <= p, got q={q}")

        def make_ratio(sign):
            def ratio(absx):
                return convexity_gap(p, sign * absx) / absx ** q

            return ratio

        m = min(
            _branch_inf(make_ratio(+1.0), 1e-8, 1e6),
            _branch_inf(make_ratio(-1.0), 1e-8, 1e6),
        )
        return m * (1.0 - _CP_MARGIN)

    if mode == "capped":
        if M is None or M < 1.0:
            raise ValueError("capped mode requires a cap M >= 1")
        if not (1.0 < p <= 2.0):
            raise ValueError("capped mode requires 1 < p <= 2")
        scale = M ** (p - 2.0)

        def make_inner(sign):
            def ratio(absx):
                return convexity_gap(p, sign * absx) / (scale * absx ** 2)

            return ratio

        def make_outer(sign):
            def ratio(absx):
                return convexity_gap(p, sign * absx) / absx ** p

            return ratio

        m = min(
            _branch_inf(make_inner(+1.0), 1e-8, M),
            _branch_inf(make_inner(-1.0), 1e-8, M),
            _branch_inf(make_outer(+1.0), M, 1e6),
            _branch_inf(make_outer(-1.0), M, 1e6),
        )
        return m * (1.0 - _CP_MARGIN)

    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Log-weight envelopes
# ---------------------------------------------------------------------------


def _solve_x_log_x(target):
    """Solve x*log(x) = target for x > 1 by Newton iteration."""
    x = max(2.0, target)
    for _ in range(60):
        f = x * math.log(x) - target
        step = f / (math.log(x) + 1.0)
        x -= step
        if abs(step) < 1e-15 * x:
            break
    return x


@functools.lru_cache(maxsize=512)
def _estimate_cp_cached(p, q, mode, M):
    # Ledger builds call the c(p) search with a handful of distinct
    # arguments; caching makes randomized suites (thousands of ledgers)
    # cheap without touching the public signature.
    return estimate_cp(p, q, mode=mode, M=M)


def envelope_bound(R, kind):
    """Exact supremum over t in (0, 1] of a log-weight envelope.

    kind="A1sq"
        ``sup t * log(R/t)**2``.  The stationary point is ``t = R/e**2``; for
        ``R <= e**2`` the supremum is ``4R/e**2`` (attained inside), otherwise
        the envelope is increasing on (0, 1] and the supremum is ``log(R)**2``
        at ``t = 1``.  In particular the bound is always <= ``4R/e**2``, with
        equality exactly at ``R = e**2``.

    kind="A2sq"
        ``sup t * log(log(R/t))**2`` (requires ``R >= e``).  The stationary
        point solves ``A1 * log(A1) = 2``.
    """
    if R < _R_MIN:
        raise ValueError(f"envelope_bound requires R >= e, got {R}")
    if kind == "A1sq":
        if R <= math.e ** 2:
            return 4.0 * R / math.e ** 2
        return math.log(R) ** 2
    if kind == "A2sq":
        xstar = _solve_x_log_x(2.0)  # A1 value at the interior maximum
        if R <= math.exp(xstar):
            return R * math.exp(-xstar) * math.log(xstar) ** 2
        return math.log(math.log(R)) ** 2
    raise ValueError(f"unknown envelope kind {kind!r}")


# ---------------------------------------------------------------------------
# Constants ledger
# ---------------------------------------------------------------------------


class LedgerError(ValueError):
    """Raised when no positive constants chain exists for the parameters."""


@dataclass(frozen=True)
class LedgerEntry:
    name: str
    value: float
    formula: str
    note: str = ""


@dataclass
class ConstantLedger:
    """Named constants for one parameter triple, each with its formula.

    Access values with ``ledger["C3"]``; the full records (formula and
    derivation note included) live in ``entries``.
    """

    params: Params
    regime: Regime
    entries: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> float:
        return self.entries[name].value

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def get(self, name: str, default=None):
        e = self.entries.get(name)
        return default if e is None else e.value

    def to_json(self) -> str:
        doc = {
            "alpha": self.params.alpha,
            "p": self.params.p,
            "R": self.params.R,
            "regime": self.regime.value,
            "constants": [
                {
                    "name": e.name,
                    "value": float(format(e.value, ".17g")),
                    "formula": e.formula,
                    "note": e.note,
                }
                for e in self.entries.values()
            ],
        }
        return json.dumps(doc, indent=2)


def _partition_cap(p, beta_abs, R, depth_scale):
    """Smallest power-of-two cap M for the p < 2 two-branch argument.

    Three conditions, all recorded in the ledger note:
    (a) (p/2) * (beta_abs*M)**(1-p) / log R <= 1/8   (absorbing the
        cross term produced on the high-ratio set),
    (b) M**(1-p) / log R <= 1e-2                      (validity of the
        high-ratio set estimate),
    (c) (2/p) / (M*beta_abs*depth_scale) <= 1/2       (the retained
        coefficient on the high-ratio set stays >= half its value;
        depth_scale is log R away from the critical line and log log R
        on it).
    """
    logR = math.log(R)
    M = 2.0
    while M < 2.0 ** 60:
        ok_a = (p / 2.0) * (beta_abs * M) ** (1.0 - p) / logR <= 0.125
        ok_b = M ** (1.0 - p) / logR <= 1e-2
        ok_c = (2.0 / p) / (M * beta_abs * depth_scale) <= 0.5
        if ok_a and ok_b and ok_c:
            return M
        M *= 2.0
    raise LedgerError("no admissible cap M found (parameters too extreme)")


def build_ledger(params: Params) -> ConstantLedger:
    """Assemble the full constants chain for ``params``.

    The chain is regime-dependent.  Away from the critical line it produces
    C3 (remainder constant of the basic improved inequality), C4 (combined
    gradient+Hardy remainder), C0 and C1 (the two constants in the
    theorem-level display) and the trace constants L3, L4.  On and below the
    critical line it produces C5, C6, C7 with trace constants L5, L6, L7 and
    the theorem-level C0, C1.  All entries are strictly positive; if the
    parameters admit no positive chain at all (for example a
    critical-boundary triple with R <= e) a :class:`LedgerError` is raised.
    On the critical boundary with e < R < e**e only the first stage (C5, L5)
    is certified and the ledger stops there; the full chain requires
    R >= e**e.
    """
    regime = classify(params)
    p, R = params.p, params.R
    lam = lambda_const(params)
    logR = math.log(R)
    beta_abs = (1.0 - 1.0 / p) if regime is Regime.CRITICAL_BOUNDARY else abs(params.beta)

    entries = {}

    def add(name, value, formula, note=""):
        if not (math.isfinite(value) and value > 0.0):
            raise LedgerError(
                f"constant {name} = {value} is not strictly positive "
                f"(alpha={params.alpha}, p={p}, R={R})"
            )
        entries[name] = LedgerEntry(name, float(value), formula, note)

    add(
        "lambda",
        lam,
        "|beta|^p off the critical line, (1 - 1/p)^p on it",
        "optimal constant of the plain weighted Hardy inequality",
    )
    add("beta_abs", beta_abs, "|1 - 1/p - alpha|")

    if regime is Regime.CRITICAL_BOUNDARY:
        loglogR = math.log(logR) if logR > 0 else float("-inf")
        if not loglogR > 0.0:
            raise LedgerError(
                "the critical-boundary constants chain needs R > e**e "
                f"(log log R > 0), got R = {R}"
            )
    else:
        loglogR = math.log(logR) if logR > 0 else float("-inf")

    # --- c(p): best convexity-gap constant, uniform over the exponents used.
    if p >= 2.0:
        cp2 = _estimate_cp_cached(p, 2.0, "global", None)
        cpp = _estimate_cp_cached(p, p, "global", None)
        cp = min(cp2, cpp)
        add(
            "cp",
            cp,
            "min(estimate_cp(p, 2), estimate_cp(p, p))",
            "valid for every exponent q in [2, p] since |X|^q <= max(X^2, |X|^p)",
        )
        M = None
        kappa = 1.0
    else:
        depth = loglogR if regime is Regime.CRITICAL_BOUNDARY else logR
        M = _partition_cap(p, beta_abs, R, depth)
        cp = _estimate_cp_cached(p, None, "capped", M)
        kappa = 1.0 + M ** p
        add(
            "M",
            M,
            "smallest power of two >= 2 with (p/2)(|beta| M)^(1-p)/log R <= 1/8, "
            "M^(1-p)/log R <= 1e-2 and (2/p)/(M |beta| d) <= 1/2",
            "d = log R away from the critical line, log log R on it",
        )
        add("cp", cp, "estimate_cp(p, mode='capped', M=M)")

    if regime is Regime.NONCRITICAL:
        scale = beta_abs ** (p - 2.0) if p >= 2.0 else (M * beta_abs) ** (p - 2.0)
        C3 = cp * scale / p ** 2
        halvings = 0
        while True:
            L3 = beta_abs ** (p - 1.0) - 2.0 * C3 / logR
            if L3 >= beta_abs ** (p - 1.0) / 2.0 and C3 <= 0.999 * logR ** 2:
                break
            C3 /= 2.0
            halvings += 1
            if halvings > 2000:
                raise LedgerError("C3 reduction loop failed to terminate")
        note3 = (
            f"reduced {halvings}x to keep the trace constant >= |beta|^(p-1)/2 "
            "and C3 <= (log R)^2" if halvings else ""
        )
        add("C3", C3, "c(p) * |beta|^(p-2) / p^2, halved as needed", note3)
        add("L3", L3, "|beta|^(p-1) - 2 C3 / log R")
        C4 = C3 / (1.0 + 2.0 * lam)
        add("C4", C4, "C3 / (1 + 2 lambda)")
        L4 = 2.0 * lam * L3 / (1.0 + 2.0 * lam)
        add(
            "L4",
            L4,
            "2 lambda L3 / (1 + 2 lambda)",
            "trace constant of the combined gradient+Hardy remainder inequality",
        )
        C0 = min(lam * C4 / 3.0, lam * logR ** 2)
        add("C0", C0, "min(lambda C4 / 3, lambda (log R)^2)")
        C1p = C4 / 3.0
        add("C1_prime", C1p, "C4 / 3")
        add(
            "C1",
            C1p * math.e ** 2 / (4.0 * R),
            "C1_prime * e^2 / (4R)",
            "uses the envelope bound t A1^2 <= 4R/e^2 on (0, 1]",
        )
        add("L", L4, "= L4", "trace constant appearing in the theorem-level display")
        ledger = ConstantLedger(params, regime, entries)
        return ledger

    # --- critical regimes (interior beta < 0, boundary beta = 0) -----------
    if regime is Regime.CRITICAL_INTERIOR:
        scale = beta_abs ** (p - 2.0) if p >= 2.0 else (M * beta_abs) ** (p - 2.0)
        C5 = cp * scale / p ** 2
        b0 = beta_abs ** (p - 1.0)
        L5 = b0 + 2.0 * C5 / logR
        add("C5", C5, "c(p) * |beta|^(p-2) / p^2")
        add("b0", b0, "|beta|^(p-1)", "bare trace constant (plain-remainder route)")
        add("L5", L5, "|beta|^(p-1) + 2 C5 / log R")
        depth1 = logR
    else:  # CRITICAL_BOUNDARY
        scale = beta_abs ** (p - 2.0) if p >= 2.0 else (M * beta_abs) ** (p - 2.0)
        C5 = cp * scale / p ** 2
        A11m = logR ** (1.0 - p)
        b0 = beta_abs ** (p - 1.0) * A11m
        L5 = A11m * (beta_abs ** (p - 1.0) + 2.0 * C5 / loglogR)
        add("C5", C5, "c(p) * (1 - 1/p)^(p-2) / p^2")
        add(
            "b0",
            b0,
            "(1 - 1/p)^(p-1) * (log R)^(1-p)",
            "bare trace constant; (log R)^(1-p) converts the substituted "
            "boundary value back to |u(1)|^p",
        )
        add("L5", L5, "(log R)^(1-p) * ((1-1/p)^(p-1) + 2 C5 / log log R)")
        depth1 = loglogR
        if loglogR < 1.0:
            # The C6/C7 links assume A2 >= 1 throughout (0, 1], i.e.
            # R >= e**e.  For e < R < e**e only the C5/L5 stage is
            # certified, so the ledger stops here.
            return ConstantLedger(params, regime, entries)

    if kappa != 1.0:
        add("kappa", kappa, "1 + M^p", "cap-dependent factor for p < 2")
    C6 = 1.0 / (2.0 ** p * (lam * kappa / C5 + 1.0 / cp))
    L6 = C6 * 2.0 ** p * (lam * kappa * L5 / C5 + b0 / cp)
    add(
        "C6",
        C6,
        "1 / (2^p (lambda kappa / C5 + 1/c(p)))",
        "gradient-remainder constant via |1+X|^p <= 2^p (1 + |X|^p)",
    )
    add("L6", L6, "C6 * 2^p (lambda kappa L5 / C5 + b0 / c(p))")

    C7 = min(C5, lam * C6) / 2.0
    theta = C7 * (1.0 / C6 + lam / C5)
    rescaled = ""
    if theta > 0.75:
        C7 *= 0.75 / theta
        theta = C7 * (1.0 / C6 + lam / C5)
        rescaled = "rescaled so that theta = C7 (1/C6 + lambda/C5) <= 3/4"
    add("C7", C7, "min(C5, lambda C6) / 2, rescaled if theta would exceed 3/4", rescaled)
    add("theta", theta, "C7 (1/C6 + lambda/C5)", "fraction of the deficit spent")
    L7 = C7 * (L6 / C6 + lam * L5 / C5) + (1.0 - theta) * L5
    add("L7", L7, "C7 (L6/C6 + lambda L5/C5) + (1 - theta) L5")

    C0 = min(lam * C7 / 3.0, lam * depth1 ** 2)
    add(
        "C0",
        C0,
        "min(lambda C7 / 3, lambda d^2)",
        "d = log R (interior) or log log R (boundary) keeps C0 / d(t)^2 <= lambda",
    )
    C1p = C7 / 3.0
    add("C1_prime", C1p, "C7 / 3")
    if regime is Regime.CRITICAL_INTERIOR:
        add(
            "C1",
            C1p * math.e ** 2 / (4.0 * R),
            "C1_prime * e^2 / (4R)",
            "uses the envelope bound t A1^2 <= 4R/e^2 on (0, 1]",
        )
    else:
        add(
            "C1",
            C1p / envelope_bound(R, "A2sq"),
            "C1_prime / sup(t A2^2)",
            "exact envelope of t A2(t)^2 on (0, 1]",
        )
    add("L", L7, "= L7", "trace constant appearing in the theorem-level display")
    return ConstantLedger(params, regime, entries)
