import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stkde.domain import DensitySurface, EmptyDataError, GridSpec2D, LandUse, LandUseGrid, TimeWindow, ValidationError
from stkde.evaluation import (
    CurvePoint,
    PAICurve,
    area_scales,
    build_prediction_groups,
    compare_methods,
    consolidate_curves,
    hit_rate,
    pai,
    pai_curve,
    select_hotspots,
    target_cells,
)

SPEC = GridSpec2D(0.0, 0.0, 10.0, 10, 10)
FULL = LandUseGrid(SPEC, np.ones(SPEC.shape, dtype=np.int8))
ALL_SIG = np.ones(SPEC.shape, dtype=bool)


def cell_points(cells, spec=SPEC):
    """One point at the centre of each listed (i, j)."""
    return np.array([[spec.x_origin + (i + 0.5) * spec.cell_size, spec.y_origin + (j + 0.5) * spec.cell_size, 0.0]
                     for i, j in cells])


def test_weekly_groups_from_nov_1():
    nov1 = 304.0
    groups = build_prediction_groups(TimeWindow(0.0, 365.0), nov1, 7.0, 31.0, 8)
    assert [g.forecast.start - nov1 for g in groups] == [0, 7, 14, 21, 28, 35, 42, 49]
    assert [g.index for g in groups] == list(range(1, 9))
    for a, b in zip(groups, groups[1:]):
        assert a.forecast.end == b.forecast.start
    for g in groups:
        assert g.training.end == g.forecast.start and g.forecast.length == 7.0


def test_group_errors():
    assert len(build_prediction_groups(TimeWindow(0, 100), 50, 7, 30, 1)) == 1
    with pytest.raises(ValidationError):
        build_prediction_groups(TimeWindow(0, 100), 90, 7, 30, 2)
    with pytest.raises(ValidationError):
        build_prediction_groups(TimeWindow(0, 100), 20, 7, 30, 1)
    with pytest.raises(ValidationError):
        build_prediction_groups(TimeWindow(0, 100), 50, 7, [30, 31], 1)


def test_target_rounding_half_up():
    assert target_cells(2.0, 100) == 2
    assert target_cells(0.5, 100) == 1
    assert target_cells(2.5, 100) == 3
    assert target_cells(0.1, 1000) == 1


def test_select_hotspots_rank_and_ties():
    vals = np.zeros(SPEC.shape)
    vals[3, 3] = 5.0
    vals[7, 1] = 2.0
    vals[2, 1] = 2.0
    sel = select_hotspots(DensitySurface(SPEC, vals), ALL_SIG, FULL, 2.0)
    # (3,3) first, then the tie at row 1 resolves to the lower column
    assert list(sel.cells) == [33, 12]
    assert sel.feasible
    mask = sel.mask(SPEC)
    assert mask[3, 3] and mask[2, 1] and mask.sum() == 2


def test_select_hotspots_infeasible_and_saturated():
    sig = np.zeros(SPEC.shape, dtype=bool)
    sig[0, :3] = True
    surf = DensitySurface(SPEC, np.ones(SPEC.shape))
    assert not select_hotspots(surf, sig, FULL, 5.0).feasible
    full = select_hotspots(surf, ALL_SIG, FULL, 100.0)
    assert full.feasible and len(full.cells) == 100


def test_select_hotspots_ignores_outside_cells():
    classes = np.ones(SPEC.shape, dtype=np.int8)
    classes[:, 5:] = LandUse.OUTSIDE
    lu = LandUseGrid(SPEC, classes)
    vals = np.zeros(SPEC.shape)
    vals[:, 5:] = 10.0
    sel = select_hotspots(DensitySurface(SPEC, vals), ALL_SIG, lu, 10.0)
    assert sel.target == 5
    assert (sel.mask(SPEC)[:, 5:] == 0).all()


def test_select_hotspots_misaligned():
    with pytest.raises(ValidationError):
        select_hotspots(DensitySurface(SPEC, np.zeros(SPEC.shape)), np.ones((3, 3), bool), FULL, 2.0)
    with pytest.raises(ValidationError):
        select_hotspots(DensitySurface(SPEC, np.zeros(SPEC.shape)), ALL_SIG, FULL, 0.0)


@given(st.integers(1, 40), st.sampled_from(["exp", "cube", "affine"]))
def test_selection_invariant_under_monotone_transform(pct, kind):
    rng = np.random.default_rng(pct)
    vals = rng.integers(0, 6, SPEC.shape).astype(float)
    f = {"exp": np.exp, "cube": lambda v: v ** 3, "affine": lambda v: 3 * v + 2}[kind]
    sig = rng.random(SPEC.shape) < 0.7
    a = select_hotspots(DensitySurface(SPEC, vals), sig, FULL, pct)
    b = select_hotspots(DensitySurface(SPEC, f(vals)), sig, FULL, pct)
    np.testing.assert_array_equal(a.cells, b.cells)


def test_hit_rate_cases():
    test = cell_points([(0, 0), (1, 1), (2, 2), (3, 3)])
    assert hit_rate([], test, SPEC) == 0.0
    assert hit_rate(range(100), test, SPEC) == 1.0
    assert hit_rate([SPEC.row_major_index(1, 1)], test, SPEC) == 0.25
    outside = np.array([[-5.0, 5.0, 0.0], [100.0, 5.0, 0.0]])
    assert hit_rate([0], np.vstack([test, outside]), SPEC) == 0.25
    with pytest.raises(EmptyDataError):
        hit_rate([0], outside, SPEC)


def test_boundary_incident_belongs_to_upper_cell():
    test = np.array([[10.0, 5.0, 0.0]])
    assert hit_rate([SPEC.row_major_index(1, 0)], test, SPEC) == 1.0
    assert hit_rate([SPEC.row_major_index(0, 0)], test, SPEC) == 0.0


def test_pai_cases():
    assert pai(14 / 84, 0.02) == pytest.approx(8.3333, abs=1e-4)
    assert pai(0.3, 0.3) == 1.0
    assert pai(0.0, 0.1) == 0.0
    with pytest.raises(ValidationError):
        pai(0.1, 0.0)


def test_area_scales():
    s = area_scales()
    assert len(s) == 250 and s[0] == 0.1 and s[-1] == 25.0 and s[19] == 2.0
    assert np.all(np.diff(s) > 0)


def _random_curve(seed, sig_frac=0.3):
    rng = np.random.default_rng(seed)
    spec = GridSpec2D(0.0, 0.0, 10.0, 30, 30)
    lu = LandUseGrid(spec, np.ones(spec.shape, dtype=np.int8))
    surf = DensitySurface(spec, rng.random(spec.shape))
    sig = rng.random(spec.shape) < sig_frac
    test = np.column_stack([rng.uniform(0, 300, 80), rng.uniform(0, 300, 80), np.zeros(80)])
    return pai_curve(surf, sig, lu, test, spec), lu


@given(st.integers(0, 10_000), st.floats(0.05, 1.0))
def test_curve_invariants(seed, frac):
    curve, lu = _random_curve(seed, frac)
    assert len(curve.points) == 250
    assert np.all(np.diff(curve.scales) > 0)
    feasible = [p for p in curve.points if p.feasible]
    hr = [p.hit_rate for p in feasible]
    assert all(b >= a for a, b in zip(hr, hr[1:]))
    for p in feasible:
        assert p.pai == p.hit_rate / (p.area_pct / 100)
    n_sig = None
    for p in curve.points:
        if not p.feasible:
            assert p.hit_rate is None and p.pai is None
            n_sig = n_sig or p.hotspot_cells
    if n_sig is not None:
        assert all(q.hotspot_cells < n_sig for q in feasible)


def test_all_significant_curve_fully_feasible():
    spec = GridSpec2D(0.0, 0.0, 10.0, 30, 30)
    lu = LandUseGrid(spec, np.ones(spec.shape, dtype=np.int8))
    rng = np.random.default_rng(0)
    curve = pai_curve(DensitySurface(spec, rng.random(spec.shape)), np.ones(spec.shape, bool), lu,
                      cell_points([(1, 1)], spec), spec)
    assert curve.feasible_count() == 250


def test_random_baseline_pai_near_one():
    spec = GridSpec2D(0.0, 0.0, 10.0, 50, 50)
    lu = LandUseGrid(spec, np.ones(spec.shape, dtype=np.int8))
    curves = []
    for seed in range(40):
        rng = np.random.default_rng(seed)
        test = np.column_stack([rng.uniform(0, 500, 400), rng.uniform(0, 500, 400), np.zeros(400)])
        surf = DensitySurface(spec, rng.random(spec.shape))
        curves.append(pai_curve(surf, np.ones(spec.shape, bool), lu, test, spec, 0, 25, 5.0))
    cons = consolidate_curves(curves)
    np.testing.assert_allclose(cons.pai_values(), 1.0, atol=0.1)


def _curve(values):
    return PAICurve(tuple(CurvePoint(float(k + 1), k + 1, None if v is None else v / 10,
                                     v, v is not None) for k, v in enumerate(values)))


def test_consolidate():
    one = _curve([4.0, 2.0])
    assert consolidate_curves([one]) == one
    cons = consolidate_curves([_curve([4.0, 2.0]), _curve([6.0, None])])
    assert cons.points[0].pai == 5.0 and cons.points[0].hit_rate == pytest.approx(0.5)
    assert not cons.points[1].feasible
    with pytest.raises(ValidationError):
        consolidate_curves([_curve([1.0]), _curve([1.0, 2.0])])


def test_conjunction_rule_enumerated():
    rng = np.random.default_rng(2)
    feas = rng.random((8, 30)) < 0.9
    curves = [_curve([float(k) if f else None for k, f in enumerate(row)]) for row in feas]
    cons = consolidate_curves(curves)
    np.testing.assert_array_equal(cons.feasible, feas.all(axis=0))


def test_compare_methods_rows():
    a = [_curve([1.0, 2.0, 3.0, None]), _curve([1.5, 2.5, 3.5, None])]
    b = [_curve([2.0, 3.0, 4.0, 5.0]), _curve([2.2, 3.2, 4.6, 5.0])]
    c = [_curve([0.5, 0.7, None, None]), _curve([0.6, 0.9, 1.0, None])]
    cmp = compare_methods({"stkde": a, "skde": b, "promap": c})
    scale1 = [r for r in cmp.rows if r.scope == "scale" and r.area_pct == 1.0]
    assert [r.test for r in scale1] == ["anova", "welch_t", "welch_t", "welch_t"]
    scale3 = [r for r in cmp.rows if r.scope == "scale" and r.area_pct == 3.0]
    assert [(r.test, r.methods) for r in scale3] == [("welch_t", ("stkde", "skde"))]
    assert not [r for r in cmp.rows if r.area_pct == 4.0]
    means = {r.methods[0]: r.statistic for r in cmp.rows if r.test == "mean_pai"}
    assert means["skde"] == pytest.approx(np.mean([2.1, 3.1, 4.3, 5.0]))
    assert cmp.scores["stkde"][2.0] == [2.0, 2.5]
    with pytest.raises(ValidationError):
        compare_methods({"a": a, "b": b[:1]})
