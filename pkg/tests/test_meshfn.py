import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardylab.core import Params
from hardylab.meshfn import (
    PiecewiseFn,
    TestFamily,
    differentiate,
    graded_mesh,
    insert_breakpoints,
    make_mesh,
    partition_sets,
    read_piecewise,
    sample_family,
    validate_shape,
    write_piecewise,
)

# -------------------------------------------------------------------- meshes


def test_uniform_mesh_example():
    nodes = graded_mesh(4, 0.25, 1.0)
    np.testing.assert_allclose(nodes, [0.25, 0.4375, 0.625, 0.8125, 1.0],
                               rtol=0, atol=0)


def test_make_mesh_argument_order():
    np.testing.assert_array_equal(make_mesh(4, 1.0, 0.25),
                                  graded_mesh(4, 0.25, 1.0))


def test_grading_clusters_cells_near_the_floor():
    nodes = graded_mesh(16, 1e-4, 2.0)
    widths = np.diff(nodes)
    assert nodes[0] == 1e-4 and nodes[-1] == 1.0
    assert widths[0] < widths[-1]
    assert np.all(widths > 0.0)


def test_relative_width_bound():
    n, t_min, gamma = 4096, 1e-6, 3.0
    nodes = graded_mesh(n, t_min, gamma)
    rel = np.max(np.diff(nodes) / nodes[1:])
    assert rel <= gamma / (n * t_min ** (1.0 / gamma))


def test_collapse_guard():
    # cells near the floor shrink below the spacing of doubles around t_min
    with pytest.raises(ValueError):
        graded_mesh(4096, 1e-16, 9.0)


def test_power_mode_clips_and_dedups():
    nodes = graded_mesh(64, 1e-4, 3.0, mode="power")
    assert nodes[0] == 1e-4 and nodes[-1] == 1.0
    assert np.all(np.diff(nodes) > 0.0)
    assert nodes.size <= 65


def test_mesh_validation():
    with pytest.raises(ValueError):
        graded_mesh(1, 1e-4)
    with pytest.raises(ValueError):
        graded_mesh(16, 0.0)
    with pytest.raises(ValueError):
        graded_mesh(16, 0.5, t_max=0.25)
    with pytest.raises(ValueError):
        graded_mesh(16, 1e-4, 0.5)  # gamma below 1
    with pytest.raises(ValueError):
        graded_mesh(16, 1e-4, mode="chebyshev")


def test_insert_breakpoints():
    nodes = graded_mesh(8, 0.1, 1.0)
    out = insert_breakpoints(nodes, [0.35, 0.95, 0.35])
    assert np.all(np.diff(out) > 0.0)
    assert 0.35 in out and 0.95 in out
    with pytest.raises(ValueError):
        insert_breakpoints(nodes, [0.05])


# ----------------------------------------------------- piecewise-linear fns


def test_piecewise_validation():
    with pytest.raises(ValueError):
        PiecewiseFn(np.array([0.5, 0.25, 1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        PiecewiseFn(np.array([0.25, 1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        PiecewiseFn(np.array([0.25, 1.0]), np.array([0.0, math.inf]))
    with pytest.raises(ValueError):
        PiecewiseFn(np.array([0.25, 0.5, 1.0]), np.array([0.1, 0.0, 1.0]),
                    support_floor=1)
    fn = PiecewiseFn(np.array([0.25, 0.5, 1.0]), np.array([0.0, 0.5, 1.0]),
                     support_floor=1)
    assert fn.n == 2
    assert fn.t_min == 0.25 and fn.t_max == 1.0


def test_slopes_and_evaluation():
    fn = PiecewiseFn(np.array([0.5, 1.0]), np.array([0.0, 1.0]))
    np.testing.assert_array_equal(fn.slopes(), [2.0])
    assert fn(0.75) == 0.5
    assert fn(np.array([0.5, 1.0])).tolist() == [0.0, 1.0]
    with pytest.raises(ValueError):
        fn(0.25)
    with pytest.raises(ValueError):
        fn(1.25)


def test_scaled_preserves_mesh_and_floor():
    fn = PiecewiseFn(np.array([0.25, 0.5, 1.0]), np.array([0.0, 1.0, 2.0]),
                     support_floor=1)
    g = fn.scaled(-2.0)
    np.testing.assert_array_equal(g.values, [0.0, -2.0, -4.0])
    assert g.support_floor == 1
    np.testing.assert_array_equal(g.nodes, fn.nodes)


@given(
    st.floats(min_value=-5.0, max_value=5.0),
    st.floats(min_value=-5.0, max_value=5.0),
    st.integers(min_value=0, max_value=2 ** 31 - 1),
)
def test_differentiate_is_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    nodes = graded_mesh(32, 1e-3, 2.0)
    f = PiecewiseFn(nodes, rng.standard_normal(nodes.size))
    g = PiecewiseFn(nodes, rng.standard_normal(nodes.size))
    combo = PiecewiseFn(nodes, a * f.values + b * g.values)
    np.testing.assert_allclose(
        differentiate(combo), a * differentiate(f) + b * differentiate(g),
        rtol=1e-12, atol=1e-12,
    )


def test_constant_fn_has_zero_slopes():
    fn = PiecewiseFn(np.array([0.1, 0.4, 1.0]), np.full(3, 2.5))
    np.testing.assert_array_equal(fn.slopes(), [0.0, 0.0])


def test_validate_shape_flags():
    nodes = np.array([0.1, 0.5, 1.0])
    assert validate_shape(PiecewiseFn(nodes, np.zeros(3))) == [
        "identically_zero"
    ]
    assert validate_shape(
        PiecewiseFn(nodes, np.array([0.0, 1.0, 1.0]), support_floor=1)
    ) == []
    flags = validate_shape(PiecewiseFn(nodes, np.array([0.5, 1.0, 2.0])))
    assert "nonzero_left_value" in flags and "nonzero_right_slope" in flags


# ------------------------------------------------------------ probe families


def test_power_probe_example():
    fam = TestFamily("PowerProbe", 0.5, Params(0.0, 2.0))
    fn = sample_family(fam, np.array([0.25, 0.5, 1.0]))
    assert fn(0.25) == 0.25  # exponent 1 - 0 - 1/2 + 1/2 = 1
    assert fn.support_floor == 0


def test_ramp_example():
    fam = TestFamily("Ramp", 0.5, Params(1.0, 2.0))
    fn = sample_family(fam, np.array([0.1, 0.25, 0.5, 1.0]))
    assert fn(0.25) == 0.5
    assert fn(0.75) == 1.0


def test_log_ramp_example():
    fam = TestFamily("LogRamp", 0.25, Params(0.5, 2.0, math.e))
    mesh = insert_breakpoints(graded_mesh(64, 0.01, 1.0), [0.25, 0.5])
    fn = sample_family(fam, mesh)
    assert fn(0.5) == pytest.approx(1.0, abs=1e-15)
    assert fn(0.25) == 0.0
    assert fn(0.75) == 1.0
    assert np.all(fn.values[: fn.support_floor] == 0.0)
    assert fn.values[fn.support_floor] != 0.0 or mesh[fn.support_floor] <= 0.25


def test_family_parameter_validation():
    p = Params(0.0, 2.0)
    mesh = graded_mesh(16, 1e-3, 2.0)
    with pytest.raises(ValueError):
        sample_family(TestFamily("PowerProbe", 0.0, p), mesh)
    with pytest.raises(ValueError):
        sample_family(TestFamily("LogProbe", 0.6, Params(0.5, 2.0)), mesh)
    with pytest.raises(ValueError):
        sample_family(TestFamily("Ramp", 2.0, p), mesh)
    with pytest.raises(ValueError):
        sample_family(TestFamily("LogRamp", 0.7, Params(0.5, 2.0)), mesh)
    with pytest.raises(ValueError):
        TestFamily("Spike", 0.1, p)


def test_interpolation_error_halves_when_n_doubles():
    params = Params(0.0, 2.0)
    t_dense = np.logspace(-3.5, 0.0, 20001)
    errs = []
    for n in (256, 512):
        mesh = graded_mesh(n, 1e-4, 2.0)
        fn = sample_family(TestFamily("PowerProbe", 0.3, params), mesh)
        errs.append(np.max(np.abs(fn(t_dense) - t_dense ** 0.8)))
    assert errs[1] <= 0.5 * errs[0]


def test_log_probe_matches_closed_form_at_nodes():
    params = Params(0.5, 2.0, math.e ** 2)
    mesh = graded_mesh(32, 1e-3, 2.0)
    fn = sample_family(TestFamily("LogProbe", 0.2, params), mesh)
    expected = np.log(params.R / mesh) ** (0.5 - 0.2)
    np.testing.assert_allclose(fn.values, expected, rtol=1e-15)


# -------------------------------------------------------------- text format


def test_piecewise_text_round_trip(tmp_path):
    params = Params(-0.25, 2.5, math.e ** 1.7)
    mesh = graded_mesh(64, 1e-5, 3.0)
    fn = sample_family(TestFamily("PowerProbe", 0.37, params), mesh)
    path = tmp_path / "probe.txt"
    write_piecewise(fn, path, params)
    back, header = read_piecewise(path)
    np.testing.assert_array_equal(back.nodes, fn.nodes)
    np.testing.assert_array_equal(back.values, fn.values)
    assert back.support_floor == fn.support_floor
    assert header["alpha"] == -0.25 and header["p"] == 2.5
    assert header["R"] == params.R


# ---------------------------------------------------------------- partitions


def test_partition_low_ratio_example():
    # t(2-t): ratio 2(1-t)/(2-t) stays below 1, so M=2 leaves B empty
    nodes = graded_mesh(64, 1e-3, 2.0)
    fn = PiecewiseFn(nodes, nodes * (2.0 - nodes))
    part = partition_sets(fn, 2.0)
    assert part.b_set == []
    ma, mb = part.measure()
    assert ma == pytest.approx(1.0 - 1e-3, rel=1e-12)


def test_partition_tie_goes_to_low_ratio():
    # u = c*t has ratio identically 1; ties belong to the low-ratio set
    nodes = graded_mesh(32, 1e-2, 1.0)
    fn = PiecewiseFn(nodes, 3.0 * nodes)
    part = partition_sets(fn, 1.0)
    assert part.b_set == []
    assert part.c_points == []


def test_partition_high_ratio_interior():
    # sampled t^2 keeps the cell-midpoint ratio above 1.5 on graded meshes
    nodes = graded_mesh(64, 1e-3, 2.0)
    fn = PiecewiseFn(nodes, nodes ** 2)
    part = partition_sets(fn, 1.5)
    ma, mb = part.measure()
    assert mb > 0.9 * (1.0 - 1e-3)
    assert ma + mb == pytest.approx(1.0 - 1e-3, rel=1e-12)


def test_partition_split_points_satisfy_threshold_or_sit_on_nodes():
    # Any label change happens either at an in-cell root of the threshold
    # equation (residual ~ 0) or at a mesh node where the ratio jumps.
    nodes = graded_mesh(64, 1e-3, 2.0)
    fn = PiecewiseFn(nodes, nodes ** 2)
    M = 1.95
    part = partition_sets(fn, M)
    assert part.c_points  # this configuration has genuine split points
    slopes = fn.slopes()
    in_cell = 0
    for c in part.c_points:
        if np.min(np.abs(nodes - c)) <= 1e-12:
            continue
        i = int(np.searchsorted(nodes, c)) - 1
        resid = abs(c * abs(slopes[i]) - M * abs(fn(c)))
        scale = c * abs(slopes[i]) + M * abs(fn(c))
        assert resid <= 1e-9 * scale
        in_cell += 1
    assert in_cell > 0


def test_partition_validation():
    nodes = graded_mesh(16, 1e-2, 1.0)
    fn = PiecewiseFn(nodes, nodes)
    with pytest.raises(ValueError):
        partition_sets(fn, 0.0)
    with pytest.raises(ValueError):
        partition_sets(fn, 2.0, weight_kind="sqrt")
    with pytest.raises(ValueError):
        partition_sets(fn, 2.0, weight_kind="logweighted")  # missing R


@given(st.integers(min_value=0, max_value=2 ** 31 - 1),
       st.floats(min_value=1.2, max_value=6.0))
def test_partition_covers_domain_and_labels_are_consistent(seed, M):
    rng = np.random.default_rng(seed)
    nodes = graded_mesh(24, 1e-2, 2.0)
    vals = rng.standard_normal(nodes.size)
    vals[0] = 0.0
    fn = PiecewiseFn(nodes, vals, support_floor=1)
    part = partition_sets(fn, M)
    ma, mb = part.measure()
    assert ma + mb == pytest.approx(nodes[-1] - nodes[0], rel=1e-10)

    # interval interiors are disjoint and correctly labelled at midpoints
    slopes = fn.slopes()

    def ratio(t):
        i = min(int(np.searchsorted(nodes, t, side="right")) - 1,
                len(slopes) - 1)
        u = fn(t)
        if u == 0.0:
            return math.inf if slopes[i] != 0.0 else 0.0
        return t * abs(slopes[i]) / abs(u)

    spans = [(lo, hi, "a") for lo, hi in part.a_set]
    spans += [(lo, hi, "b") for lo, hi in part.b_set]
    spans.sort()
    for (l0, h0, _), (l1, h1, _) in zip(spans[:-1], spans[1:]):
        assert h0 <= l1 + 1e-12
    for lo, hi, label in spans:
        r = ratio(0.5 * (lo + hi))
        if label == "a":
            assert r <= M * (1.0 + 1e-6)
        else:
            assert r > M * (1.0 - 1e-6)


def test_logweighted_partition_runs_and_covers():
    R = math.e ** 2
    nodes = graded_mesh(48, 1e-3, 2.0)
    fn = PiecewiseFn(nodes, np.sqrt(nodes))
    part = partition_sets(fn, 1.2, weight_kind="logweighted", R=R)
    ma, mb = part.measure()
    assert ma + mb == pytest.approx(1.0 - 1e-3, rel=1e-10)
    assert part.weight_kind == "logweighted"
