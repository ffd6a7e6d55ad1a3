"""Numerical toolkit for sharp weighted Hardy inequalities with one-sided
boundary terms, on the interval (0, 1] and on tubular neighbourhoods of
planar domains.

Subpackage map:

* :mod:`hardylab.core`   — parameters, regimes, certified constants ledger
* :mod:`hardylab.meshfn` — graded meshes, piecewise-linear functions, families
* :mod:`hardylab.quad`   — weighted quadrature with closed-form oracles
* :mod:`hardylab.ineq1d` — interval inequalities: deficits, suites, probes
* :mod:`hardylab.varmin` — variational lower bounds by projected descent
* :mod:`hardylab.geomnd` — distance-to-boundary analogues on planar domains
"""

from .core import (
    ConstantLedger,
    LedgerEntry,
    LedgerError,
    Params,
    Regime,
    a1,
    a2,
    build_ledger,
    classify,
    convexity_gap,
    envelope_bound,
    estimate_cp,
    lambda_const,
    parse_scale,
)
from .geomnd import (
    ND_IDS,
    Annulus,
    Disk,
    DomainError,
    Ellipse,
    FieldFn,
    TrigPoly,
    build_nd_ledger,
    default_eta,
    distance,
    nd_critical_demo,
    nd_deficit,
    nd_nonnegativity_suite,
    reduced_multiplier,
    trace_integral,
    tubular_quadrature,
)
from .ineq1d import (
    INEQUALITY_IDS,
    DeficitReport,
    DemoTable,
    RegimeMismatchError,
    SuiteResult,
    critical_infimum_demo,
    deficit,
    nonnegativity_suite,
    sharpness_probe,
)
from .meshfn import FAMILIES, PiecewiseFn, TestFamily, graded_mesh
from .quad import (
    WeightSpec,
    boundary_trace_1d,
    closed_form_oracle,
    integrate_weighted,
)
from .varmin import (
    MinimizeConfig,
    best_constant,
    minimize_energy,
    sweep_best_constant,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantLedger",
    "LedgerEntry",
    "LedgerError",
    "Params",
    "Regime",
    "a1",
    "a2",
    "build_ledger",
    "classify",
    "convexity_gap",
    "envelope_bound",
    "estimate_cp",
    "lambda_const",
    "parse_scale",
    "FAMILIES",
    "PiecewiseFn",
    "TestFamily",
    "graded_mesh",
    "WeightSpec",
    "boundary_trace_1d",
    "closed_form_oracle",
    "integrate_weighted",
    "INEQUALITY_IDS",
    "DeficitReport",
    "DemoTable",
    "RegimeMismatchError",
    "SuiteResult",
    "critical_infimum_demo",
    "deficit",
    "nonnegativity_suite",
    "sharpness_probe",
    "MinimizeConfig",
    "best_constant",
    "minimize_energy",
    "sweep_best_constant",
    "ND_IDS",
    "Annulus",
    "Disk",
    "DomainError",
    "Ellipse",
    "FieldFn",
    "TrigPoly",
    "build_nd_ledger",
    "default_eta",
    "distance",
    "nd_critical_demo",
    "nd_deficit",
    "nd_nonnegativity_suite",
    "reduced_multiplier",
    "trace_integral",
    "tubular_quadrature",
    "__version__",
]
