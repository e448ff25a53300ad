"""Rolling prediction groups, hotspot selection, hit rate / PAI curves and
between-method statistics."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .domain import (
    DensitySurface,
    EmptyDataError,
    GridSpec2D,
    IncidentsLike,
    LandUseGrid,
    TimeWindow,
    ValidationError,
    as_points,
)
from .stats import anova_one_way, welch_t_test

#: Mean Gregorian month, used when no calendar is attached to the time axis.
MEAN_MONTH_DAYS = 30.4375


@dataclass(frozen=True)
class PredictionGroup:
    index: int
    training: TimeWindow
    forecast: TimeWindow


def build_prediction_groups(data_window: TimeWindow, first_forecast_start: float, horizon: float,
                            training_length: Union[float, Sequence[float]], group_count: int) -> List[PredictionGroup]:
    """Consecutive forecast windows of ``horizon`` days, each trained on the
    ``training_length`` days immediately before it.

    ``training_length`` may be one value or one value per group (calendar
    months differ in length).
    """
    if horizon <= 0 or group_count < 1:
        raise ValidationError("horizon and group_count must be positive")
    lengths = ([float(training_length)] * group_count if np.isscalar(training_length)
               else [float(v) for v in training_length])
    if len(lengths) != group_count or min(lengths) <= 0:
        raise ValidationError("need one positive training length per group")
    groups = []
    for g in range(group_count):
        start = first_forecast_start + g * horizon
        forecast = TimeWindow(start, start + horizon)
        training = TimeWindow(start - lengths[g], start)
        if training.start < data_window.start or forecast.end > data_window.end:
            raise ValidationError(f"prediction group {g + 1} does not fit inside the data window")
        groups.append(PredictionGroup(g + 1, training, forecast))
    return groups


@dataclass(frozen=True, eq=False)
class HotspotSelection:
    """Hotspot cells as row-major flat indices, highest density first."""

    cells: np.ndarray
    target: int
    feasible: bool

    def mask(self, spec: GridSpec2D) -> np.ndarray:
        m = np.zeros(spec.n_cells, dtype=bool)
        m[self.cells] = True
        return m.reshape(spec.n_rows, spec.n_cols).T


def _check_aligned(surface: DensitySurface, significant: np.ndarray, land_use: LandUseGrid):
    if surface.spec != land_use.spec or np.shape(significant) != surface.spec.shape:
        raise ValidationError("surface, significance mask and land use are not aligned")


def _ranked_candidates(surface: DensitySurface, significant: np.ndarray, land_use: LandUseGrid) -> np.ndarray:
    """Significant in-study cells by descending density, ties by row-major index."""
    # transposing to (row, col) makes C-order flattening row-major
    flat_vals = surface.values.T.ravel()
    ok = (np.asarray(significant, dtype=bool) & land_use.in_study).T.ravel()
    idx = np.flatnonzero(ok)
    order = np.lexsort((idx, -flat_vals[idx]))
    return idx[order]


def target_cells(area_pct: float, study_cells: int) -> int:
    # half-up rounding; Python's round() would send 0.5 to the even neighbour
    return int(math.floor(area_pct / 100.0 * study_cells + 0.5 + 1e-9))


def select_hotspots(surface: DensitySurface, significant: np.ndarray, land_use: LandUseGrid,
                    area_pct: float) -> HotspotSelection:
    if not 0 < area_pct <= 100:
        raise ValidationError("area_pct must lie in (0, 100]")
    _check_aligned(surface, significant, land_use)
    ranked = _ranked_candidates(surface, significant, land_use)
    target = target_cells(area_pct, land_use.study_cell_count)
    feasible = len(ranked) >= target
    return HotspotSelection(ranked[:target], target, feasible)


def _test_cell_counts(test_incidents: IncidentsLike, spec: GridSpec2D) -> Tuple[np.ndarray, int]:
    pts = as_points(test_incidents)
    i, j, inside = spec.cell_of(pts[:, 0], pts[:, 1])
    flat = spec.row_major_index(i[inside], j[inside])
    return np.bincount(flat, minlength=spec.n_cells), int(inside.sum())


def hit_rate(hotspots: Union[HotspotSelection, Iterable[int]], test_incidents: IncidentsLike,
             spec: GridSpec2D) -> float:
    """Fraction of in-grid test incidents that fall in a hotspot cell."""
    counts, total = _test_cell_counts(test_incidents, spec)
    if total == 0:
        raise EmptyDataError("no test incident falls inside the grid")
    cells = hotspots.cells if isinstance(hotspots, HotspotSelection) else np.fromiter(hotspots, dtype=np.int64)
    cells = np.unique(cells)
    return float(counts[cells].sum()) / total


def pai(hit_rate: float, area_fraction: float) -> float:
    """Predictive accuracy index: hit rate over hotspot area fraction."""
    if not 0 < area_fraction <= 1:
        raise ValidationError("area_fraction must lie in (0, 1]")
    return hit_rate / area_fraction


@dataclass(frozen=True)
class CurvePoint:
    area_pct: float
    hotspot_cells: int
    hit_rate: Optional[float]
    pai: Optional[float]
    feasible: bool


@dataclass(frozen=True)
class PAICurve:
    points: Tuple[CurvePoint, ...]

    @property
    def scales(self) -> np.ndarray:
        return np.array([p.area_pct for p in self.points])

    @property
    def feasible(self) -> np.ndarray:
        return np.array([p.feasible for p in self.points])

    def pai_values(self) -> np.ndarray:
        return np.array([p.pai if p.feasible else np.nan for p in self.points])

    def hit_rates(self) -> np.ndarray:
        return np.array([p.hit_rate if p.feasible else np.nan for p in self.points])

    def at(self, area_pct: float) -> CurvePoint:
        for p in self.points:
            if abs(p.area_pct - area_pct) < 1e-9:
                return p
        raise KeyError(area_pct)

    def feasible_count(self) -> int:
        return int(self.feasible.sum())


def area_scales(scale_min: float = 0.0, scale_max: float = 25.0, step: float = 0.1) -> List[float]:
    """Scales ``scale_min + step, ..., scale_max`` free of accumulated drift."""
    if step <= 0 or scale_max <= scale_min:
        raise ValidationError("need step > 0 and scale_max > scale_min")
    if scale_max > 100 or scale_min < 0:
        raise ValidationError("scales must lie within [0, 100] percent")
    count = int(round((scale_max - scale_min) / step))
    return [round(scale_min + k * step, 10) for k in range(1, count + 1)]


def pai_curve(surface: DensitySurface, significant: np.ndarray, land_use: LandUseGrid,
              test_incidents: IncidentsLike, spec: Optional[GridSpec2D] = None,
              scale_min: float = 0.0, scale_max: float = 25.0, step: float = 0.1) -> PAICurve:
    """Hit rate and PAI at every area scale of the sweep.

    Hotspot sets are prefixes of one density ranking, so hit rates are
    non-decreasing across the feasible scales.
    """
    spec = spec or surface.spec
    _check_aligned(surface, significant, land_use)
    ranked = _ranked_candidates(surface, significant, land_use)
    counts, total = _test_cell_counts(test_incidents, spec)
    if total == 0:
        raise EmptyDataError("no test incident falls inside the grid")
    captured = np.concatenate([[0], np.cumsum(counts[ranked])])
    study = land_use.study_cell_count
    points = []
    for pct in area_scales(scale_min, scale_max, step):
        target = target_cells(pct, study)
        if target > len(ranked):
            points.append(CurvePoint(pct, target, None, None, False))
            continue
        hr = float(captured[target]) / total
        points.append(CurvePoint(pct, target, hr, pai(hr, pct / 100.0), True))
    return PAICurve(tuple(points))


def consolidate_curves(curves: Sequence[PAICurve]) -> PAICurve:
    """Per-scale mean over curves; a scale survives only if feasible in all."""
    if not curves:
        raise ValidationError("nothing to consolidate")
    scales = curves[0].scales
    for c in curves[1:]:
        if len(c.points) != len(scales) or not np.allclose(c.scales, scales, rtol=0, atol=1e-9):
            raise ValidationError("curves do not share a scale lattice")
    points = []
    for idx, pct in enumerate(scales):
        column = [c.points[idx] for c in curves]
        cells = column[0].hotspot_cells
        if all(p.feasible for p in column):
            hr = math.fsum(p.hit_rate for p in column) / len(column)
            pv = math.fsum(p.pai for p in column) / len(column)
            points.append(CurvePoint(float(pct), cells, hr, pv, True))
        else:
            points.append(CurvePoint(float(pct), cells, None, None, False))
    return PAICurve(tuple(points))


@dataclass(frozen=True)
class ComparisonRow:
    scope: str                  # "scale" or "mean"
    area_pct: Optional[float]
    test: str                   # "anova", "welch_t" or "mean_pai"
    methods: Tuple[str, ...]
    statistic: float
    df1: Optional[float]
    df2: Optional[float]
    p_value: Optional[float]


@dataclass
class MethodComparison:
    scores: Dict[str, Dict[float, List[float]]]
    consolidated: Dict[str, PAICurve]
    rows: List[ComparisonRow] = field(default_factory=list)

    def mean_pai(self, method: str) -> float:
        vals = self.consolidated[method].pai_values()
        vals = vals[~np.isnan(vals)]
        return float(vals.mean()) if len(vals) else math.nan


def _compare(methods: Tuple[str, ...], samples: Sequence[Sequence[float]], scope: str,
             area_pct: Optional[float]) -> List[ComparisonRow]:
    rows = []
    if len(methods) >= 3:
        res = anova_one_way(samples)
        rows.append(ComparisonRow(scope, area_pct, "anova", methods, res.statistic,
                                  res.df_between, res.df_within, res.pvalue))
    for (ma, sa), (mb, sb) in itertools.combinations(zip(methods, samples), 2):
        res = welch_t_test(sa, sb)
        rows.append(ComparisonRow(scope, area_pct, "welch_t", (ma, mb), res.statistic, res.df, None, res.pvalue))
    return rows


def compare_methods(curves: Mapping[str, Sequence[PAICurve]]) -> MethodComparison:
    """ANOVA and pairwise Welch t-tests on PAI scores across methods.

    At each scale the test uses the methods feasible in every group there:
    ANOVA plus pairwise t-tests when three or more remain, a single t-test
    when two remain.  The ``mean`` scope repeats this on consolidated PAI
    values pooled over each run of scales sharing the same feasible set.
    """
    methods = tuple(curves)
    if len(methods) < 1:
        raise ValidationError("no methods to compare")
    group_counts = {len(v) for v in curves.values()}
    if len(group_counts) != 1:
        raise ValidationError("every method needs the same number of prediction groups")
    consolidated = {m: consolidate_curves(curves[m]) for m in methods}
    scales = consolidated[methods[0]].scales
    scores: Dict[str, Dict[float, List[float]]] = {m: {} for m in methods}
    rows: List[ComparisonRow] = []
    regions: Dict[Tuple[str, ...], List[int]] = {}
    for idx, pct in enumerate(scales):
        pct = float(pct)
        ok = tuple(m for m in methods if consolidated[m].points[idx].feasible)
        for m in ok:
            scores[m][pct] = [c.points[idx].pai for c in curves[m]]
        if len(ok) >= 2 and min(group_counts) >= 2:
            rows.extend(_compare(ok, [scores[m][pct] for m in ok], "scale", pct))
        if len(ok) >= 2:
            regions.setdefault(ok, []).append(idx)
    for ok, idxs in regions.items():
        if len(idxs) >= 2:
            samples = [[consolidated[m].points[i].pai for i in idxs] for m in ok]
            rows.extend(_compare(ok, samples, "mean", None))
    result = MethodComparison(scores, consolidated, rows)
    for m in methods:
        result.rows.append(ComparisonRow("mean", None, "mean_pai", (m,), result.mean_pai(m), None, None, None))
    return result
