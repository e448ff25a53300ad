import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stkde.domain import LandUse, TimeWindow, ValidationError
from stkde.synth import (
    Cluster,
    SynthesisError,
    SynthProcessSpec,
    drifting_cluster_scenario,
    generate_incidents,
    generate_landuse,
    uniform_scenario,
)

WINDOW = TimeWindow(0.0, 100.0)


def test_landuse_counts_and_determinism():
    full = generate_landuse(20, 15, 1.0, seed=1)
    assert full.eligible.sum() == 300
    lu = generate_landuse(20, 15, 0.37, seed=1, margin=2)
    assert lu.study_cell_count == 16 * 11
    assert lu.eligible.sum() == round(0.37 * 16 * 11)
    assert (lu.classes[:2] == LandUse.OUTSIDE).all()
    np.testing.assert_array_equal(lu.classes, generate_landuse(20, 15, 0.37, seed=1, margin=2).classes)
    with pytest.raises(ValidationError):
        generate_landuse(20, 15, 0.0, seed=1)
    with pytest.raises(ValidationError):
        generate_landuse(2, 2, 0.1, seed=1)


def test_background_count_poisson():
    lu = generate_landuse(20, 20, 0.5, seed=2)
    for seed in range(5):
        n = len(generate_incidents(SynthProcessSpec(3.0, master_seed=seed), lu, WINDOW))
        assert abs(n - 300) <= 4 * np.sqrt(300)


def test_stationary_cluster_centroid():
    lu = generate_landuse(40, 40, 1.0, seed=3, cell_size=50.0)
    count, spread = 2000, 80.0
    c = Cluster(((0.0, 1000.0, 900.0),), spread, WINDOW, count)
    incs = generate_incidents(SynthProcessSpec(0.0, (c,), master_seed=4), lu, WINDOW)
    xs = np.array([i.x for i in incs])
    ys = np.array([i.y for i in incs])
    se = spread / np.sqrt(count)
    assert len(incs) == count
    assert abs(xs.mean() - 1000.0) < 3 * se and abs(ys.mean() - 900.0) < 3 * se


def test_cluster_follows_waypoints():
    c = Cluster(((0.0, 0.0, 0.0), (10.0, 100.0, 50.0)), 5.0, WINDOW, 1)
    assert c.center(5.0) == (50.0, 25.0)
    assert c.center(20.0) == (100.0, 50.0)
    with pytest.raises(ValidationError):
        Cluster(((5.0, 0, 0), (1.0, 0, 0)), 5.0, WINDOW, 1)


def test_unplaceable_cluster_names_index():
    lu = generate_landuse(10, 10, 0.01, seed=0)
    far = Cluster(((0.0, -1e6, -1e6),), 1.0, WINDOW, 3)
    spec = SynthProcessSpec(0.0, (Cluster(((0.0, 500.0, 500.0),), 1e4, WINDOW, 0), far))
    with pytest.raises(SynthesisError, match="cluster 1"):
        generate_incidents(spec, lu, WINDOW)


@given(st.integers(0, 2**31), st.floats(0.1, 1.0))
def test_events_on_eligible_cells_and_inside_window(seed, frac):
    lu = generate_landuse(15, 12, frac, seed=seed)
    c = Cluster(((0.0, 300.0, 300.0), (100.0, 1200.0, 900.0)), 120.0, TimeWindow(20.0, 80.0), 40)
    incs = generate_incidents(SynthProcessSpec(0.5, (c,), master_seed=seed), lu, WINDOW)
    pts = np.array([(i.x, i.y, i.t) for i in incs]).reshape(-1, 3)
    i, j, inside = lu.spec.cell_of(pts[:, 0], pts[:, 1])
    assert inside.all() and lu.eligible[i, j].all()
    assert ((pts[:, 2] >= 0) & (pts[:, 2] < 100)).all()
    assert len({x.id for x in incs}) == len(incs)
    assert incs == generate_incidents(SynthProcessSpec(0.5, (c,), master_seed=seed), lu, WINDOW)


def test_presets():
    sc = drifting_cluster_scenario(0, n_cols=30, n_rows=30)
    assert sc.window == TimeWindow(0.0, 365.0)
    assert sc.first_forecast_start == 304.0
    assert len(sc.process.clusters) == 3
    assert sc.incidents == drifting_cluster_scenario(0, n_cols=30, n_rows=30).incidents
    u = uniform_scenario(1, n_cols=10, n_rows=10)
    assert u.land_use.eligible.all() and len(u.incidents) > 0
