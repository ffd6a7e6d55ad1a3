import json
import math

import numpy as np
import pytest

from hardylab.core import Params
from hardylab.ineq1d import (
    INEQUALITY_IDS,
    InequalitySpec,
    RegimeMismatchError,
    critical_infimum_demo,
    deficit,
    lemma31_check,
    nonnegativity_suite,
    sharpness_probe,
)
from hardylab.meshfn import PiecewiseFn, graded_mesh

E = math.e


@pytest.fixture
def linear_u():
    nodes = graded_mesh(256, 1e-4, 2.0)
    return PiecewiseFn(nodes, nodes - 1e-4)


def test_id_catalogue():
    assert len(INEQUALITY_IDS) == 20
    assert "EqA" in INEQUALITY_IDS and "Lem7_7" in INEQUALITY_IDS
    with pytest.raises(ValueError):
        InequalitySpec("NoSuchId", Params(0.0, 2.0, E ** 2))


def test_base_inequality_decomposition(linear_u):
    rep = deficit("EqA", linear_u, params=Params(0.0, 2.0, E ** 2))
    # u ~ t: gradient energy ~ length, trace term u(1)^2 / 2
    assert rep.lhs == pytest.approx(1.0, rel=2e-4)
    assert set(rep.lhs_terms) == {"gradient"}
    assert set(rep.rhs_terms) == {"hardy", "trace"}
    assert rep.rhs_terms["trace"] == pytest.approx(0.5, rel=1e-3)
    assert rep.deficit == pytest.approx(rep.lhs - rep.rhs, rel=1e-15)
    assert rep.deficit > 0.0
    # u = t - t_min keeps a slope at the right endpoint; the report says so
    assert rep.warnings == ["shape:nonzero_right_slope"]


def test_deficit_needs_params_with_string_id(linear_u):
    with pytest.raises(ValueError):
        deficit("EqA", linear_u)


def test_spec_object_route_matches_string_route(linear_u):
    params = Params(0.0, 2.0, E ** 2)
    via_id = deficit("EqA", linear_u, params=params)
    via_spec = deficit(InequalitySpec("EqA", params), linear_u)
    assert via_spec.deficit == via_id.deficit


def test_regime_gating(linear_u):
    noncrit = Params(0.0, 2.0, E ** 2)
    boundary = Params(0.5, 2.0, E ** E)
    interior = Params(1.0, 2.0, E)
    with pytest.raises(RegimeMismatchError):
        deficit("ThmC1", linear_u, params=noncrit)
    with pytest.raises(RegimeMismatchError):
        deficit("ThmNC1", linear_u, params=boundary)
    with pytest.raises(RegimeMismatchError):
        deficit("Lem3_6b", linear_u, params=noncrit)
    with pytest.raises(RegimeMismatchError):
        deficit("CorD", linear_u, params=boundary)
    # interior-regime display accepts interior params
    rep = deficit("CorD", linear_u, params=interior)
    assert rep.deficit == rep.lhs - rep.rhs


def test_iterated_log_displays_need_large_R(linear_u):
    for ineq_id in ("ThmC2_10", "Lem7_2"):
        with pytest.raises(ValueError, match="e\\*\\*e"):
            deficit(ineq_id, linear_u,
                    params=Params(0.5, 2.0, E ** 2),
                    extras={"M": 2.0})


def test_multiplier_lemma_extras(linear_u):
    params = Params(0.0, 2.0, E ** 2)
    with pytest.raises(ValueError):
        deficit("Lem3_1", linear_u, params=params)
    nodes = linear_u.nodes
    with pytest.raises(ValueError, match="f\\(1\\) <= 1"):
        deficit("Lem3_1", linear_u, params=params,
                extras={"f": PiecewiseFn(nodes, nodes + 0.5)})
    with pytest.raises(ValueError, match="monotone"):
        deficit("Lem3_1", linear_u, params=params,
                extras={"f": PiecewiseFn(nodes, 0.5 * np.sin(6 * nodes))})
    rep = deficit("Lem3_1", linear_u, params=params,
                  extras={"f": PiecewiseFn(nodes, 0.5 * nodes)})
    assert rep.deficit >= 0.0
    # the convenience wrapper is the same computation
    wrapped = lemma31_check(params, PiecewiseFn(nodes, 0.5 * nodes), linear_u)
    assert wrapped.ineq_id == "Lem3_1"
    assert wrapped.deficit == rep.deficit


def test_partition_displays_validate_threshold(linear_u):
    params = Params(0.0, 2.0, E ** 2)
    with pytest.raises(ValueError, match="must exceed 1"):
        deficit("Lem7_1", linear_u, params=params, extras={"M": 0.5})
    rep = deficit("Lem7_1", linear_u, params=params, extras={"M": 2.0})
    assert rep.deficit >= 0.0


def test_quadratic_displays_reject_other_p(linear_u):
    params = Params(0.0, 1.5, E ** 2)
    for ineq_id in ("Lem7_1", "Lem7_6"):
        with pytest.raises(ValueError, match="p = 2"):
            deficit(ineq_id, linear_u, params=params, extras={"M": 2.0})
    # and the sub-quadratic display rejects p outside (1, 2)
    with pytest.raises(ValueError, match="1 < p < 2"):
        deficit("Lem7_5", linear_u, params=Params(0.0, 3.0, E ** 2),
                extras={"M": 2.0})


@pytest.mark.parametrize(
    "ineq_id,p,degree,extras",
    [
        ("EqA", 1.5, 1.5, None),
        ("EqA", 3.0, 3.0, None),
        ("CorB", 2.0, 2.0, None),
        ("Lem7_1", 2.0, 2.0, {"M": 2.0}),
        # the elementary-inequality display mixes |u'|^(2-p) and |u|^p
        # factors, so both sides scale quadratically even for p != 2
        ("Lem7_5", 1.5, 2.0, {"M": 2.0}),
        ("Lem7_5", 1.25, 2.0, {"M": 2.0}),
    ],
)
def test_scaling_degree(linear_u, ineq_id, p, degree, extras):
    params = Params(0.0, p, E ** 2)
    base = deficit(ineq_id, linear_u, params=params, extras=extras)
    doubled = deficit(ineq_id, linear_u.scaled(2.0), params=params,
                      extras=extras)
    assert doubled.lhs == pytest.approx(2.0 ** degree * base.lhs, rel=1e-10)
    assert doubled.rhs == pytest.approx(2.0 ** degree * base.rhs, rel=1e-10)


def test_strict_mode_accepts_clean_runs(linear_u):
    rep = deficit("EqA", linear_u, params=Params(0.0, 2.0, E ** 2),
                  strict=True)
    assert rep.deficit > 0.0


# ----------------------------------------------------------------- sharpness


def test_power_probe_deficits_close_linearly():
    spec = InequalitySpec("CorB", Params(0.0, 2.0, E ** 2))
    eps = [0.4, 0.2, 0.1, 0.05]
    rep = sharpness_probe(spec, "PowerProbe", eps, t_min=1e-6)
    assert rep.family == "PowerProbe"
    assert [row.eps for row in rep.rows] == eps
    for row in rep.rows:
        # the probe's exact deficit is eps/2; quadrature truncates at t_min
        assert abs(row.deficit - row.eps / 2.0) <= 1e-6 + row.truncation_bound
    assert rep.rate == pytest.approx(1.0, abs=0.05)


def test_interior_regime_probe_also_closes():
    spec = InequalitySpec("CorD", Params(1.0, 2.0, E))
    rep = sharpness_probe(spec, "PowerProbe", [0.3, 0.1, 0.03])
    for row in rep.rows:
        assert abs(row.deficit - row.eps / 2.0) <= 1e-6 + row.truncation_bound
    assert rep.rate == pytest.approx(1.0, abs=0.05)


def test_probe_family_pairing_is_enforced():
    spec = InequalitySpec("CorB", Params(0.0, 2.0, E ** 2))
    with pytest.raises(ValueError, match="pairs with"):
        sharpness_probe(spec, "Ramp", [0.1])
    with pytest.raises(TypeError):
        sharpness_probe("CorB", "PowerProbe", [0.1])


# -------------------------------------------------------------------- suites


def test_randomized_suite_is_deterministic():
    first = nonnegativity_suite(["EqA", "CorB"], cases=5, seed=11)
    second = nonnegativity_suite(["EqA", "CorB"], cases=5, seed=11)
    assert first.to_csv() == second.to_csv()
    assert first.to_csv().splitlines()[0] == "id,seed,n,t_min,lhs,rhs,deficit"
    assert len(first.rows) == 10
    assert first.violations == 0
    other = nonnegativity_suite(["EqA", "CorB"], cases=5, seed=12)
    assert other.to_csv() != first.to_csv()


def test_suite_covers_every_display():
    result = nonnegativity_suite(cases=2, seed=3)
    seen = {row.ineq_id for row in result.rows}
    assert seen == set(INEQUALITY_IDS)
    assert result.violations == 0
    payload = json.loads(result.to_json())
    assert set(payload) == {"cases", "master_seed", "tol_factor",
                            "violations", "rows"}
    assert payload["master_seed"] == 3
    assert payload["violations"] == 0


def test_suite_rows_carry_tolerance_scale():
    result = nonnegativity_suite(["Lem3_2"], cases=4, seed=5)
    for row in result.rows:
        scale = abs(row.lhs) + abs(row.rhs)
        assert row.deficit >= -1e-8 * scale
        assert row.violation is False


# --------------------------------------------------------------------- demos


def test_interior_demo_table():
    table = critical_infimum_demo(Params(1.0, 2.0, E))
    assert table.kind == "Ramp"
    energies = [row.energy for row in table.rows]
    assert energies == pytest.approx([0.1, 1.0 / 30.0, 0.01, 1.0 / 300.0],
                                     rel=1e-12)
    for row in table.rows:
        # energy of min(t/eps, 1) is eps/3 here; quadrature must agree
        assert row.energy == pytest.approx(row.eps / 3.0, rel=1e-12)
        assert row.energy_quadrature == pytest.approx(row.energy, rel=1e-9)
    assert energies == sorted(energies, reverse=True)
    assert min(energies) < 1e-2


def test_boundary_demo_table():
    table = critical_infimum_demo(Params(0.5, 2.0, E))
    assert table.kind == "LogRamp"
    energies = [row.energy for row in table.rows]
    assert energies == pytest.approx([1.0 / 3.0, 0.1, 0.02, 0.005],
                                     rel=1e-12)
    for row in table.rows:
        # energy 1/log(1/(2 eps)) pins the eps schedule
        assert row.energy == pytest.approx(
            1.0 / math.log(1.0 / (2.0 * row.eps)), rel=1e-12
        )
        if row.energy_quadrature is not None:
            assert row.energy_quadrature == pytest.approx(row.energy,
                                                          rel=1e-6)
    # the two smallest eps sit far below any usable mesh floor
    assert table.rows[-1].energy_quadrature is None
    assert min(energies) < 1e-2


def test_demo_custom_schedule_and_gating():
    table = critical_infimum_demo(Params(1.0, 2.0, E), [0.25])
    assert table.rows[0].energy == pytest.approx(0.25 / 3.0, rel=1e-12)
    with pytest.raises(RegimeMismatchError):
        critical_infimum_demo(Params(0.0, 2.0, E ** 2))
