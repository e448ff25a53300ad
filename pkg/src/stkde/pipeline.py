"""Rolling forecast evaluation of STKDE against the SKDE and ProMap baselines."""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bandwidth import BandwidthResult, BandwidthSearchConfig, optimize_bandwidths
from .domain import (
    Bandwidths,
    DensitySurface,
    GridSpec2D,
    GridSpec3D,
    IncidentsLike,
    LandUseGrid,
    ValidationError,
    as_points,
)
from .estimators import PromapParams, promap_surface, skde_surface
from .evaluation import MethodComparison, PAICurve, PredictionGroup, compare_methods, pai_curve
from .kernels import KernelId
from .significance import stkde_raster, classify_significance, simulate_ensemble

log = logging.getLogger(__name__)

METHODS = ("stkde", "skde", "promap")


@dataclass(frozen=True)
class EvaluationSettings:
    methods: Sequence[str] = METHODS
    t_bin: float = 1.0
    kernel: KernelId = KernelId.EPANECHNIKOV
    replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    workers: int = 1
    level: str = "surface"
    promap: PromapParams = PromapParams()
    scale_min: float = 0.0
    scale_max: float = 25.0
    scale_step: float = 0.1

    def __post_init__(self):
        if not self.methods:
            raise ValidationError("select at least one method")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValidationError(f"unknown methods: {sorted(unknown)}")
        if self.scale_max > 100:
            raise ValidationError("sweep maximum cannot exceed 100 percent")
        if self.level not in ("surface", "volume"):
            raise ValidationError("level must be 'surface' or 'volume'")


@dataclass
class GroupOutcome:
    group: PredictionGroup
    method: str
    surface: DensitySurface
    significant: np.ndarray
    p_values: np.ndarray
    curve: PAICurve
    n_train: int
    n_test: int


@dataclass
class EvaluationResult:
    bandwidths: Bandwidths
    search: Optional[BandwidthResult]
    outcomes: Dict[str, List[GroupOutcome]] = field(default_factory=dict)
    comparison: Optional[MethodComparison] = None

    def curves(self, method: str) -> List[PAICurve]:
        return [o.curve for o in self.outcomes[method]]


def _forecast_grid(spatial: GridSpec2D, group: PredictionGroup, t_bin: float) -> GridSpec3D:
    n_bins = max(1, math.ceil(round(group.forecast.length / t_bin, 9)))
    return GridSpec3D.from_spatial(spatial, group.forecast.start, t_bin, n_bins)


# module-level raster estimators so they pickle into worker processes
def _skde_raster(pts, spec2, h_s, kernel):
    return skde_surface(pts, spec2, h_s, kernel).values


def _promap_raster(pts, spec2, params, t_ref):
    return promap_surface(pts, spec2, params, t_ref).values


def _estimator(method: str, spatial: GridSpec2D, group: PredictionGroup, bw: Bandwidths,
               settings: EvaluationSettings):
    if method == "stkde":
        return functools.partial(stkde_raster, spec=_forecast_grid(spatial, group, settings.t_bin), bw=bw,
                                 kernel=settings.kernel, level=settings.level)
    if method == "skde":
        return functools.partial(_skde_raster, spec2=spatial, h_s=bw.spatial_max, kernel=settings.kernel)
    return functools.partial(_promap_raster, spec2=spatial, params=settings.promap, t_ref=group.forecast.start)


def evaluate_group(pts: np.ndarray, land_use: LandUseGrid, group: PredictionGroup, method: str,
                   bw: Bandwidths, settings: EvaluationSettings) -> GroupOutcome:
    spatial = land_use.spec
    train = pts[group.training.contains(pts[:, 2])]
    test = pts[group.forecast.contains(pts[:, 2])]
    if len(train) == 0:
        raise ValidationError(f"prediction group {group.index} has no training incidents")
    estimate = _estimator(method, spatial, group, bw, settings)
    observed = estimate(train)
    # the same null incidents serve every method within a group
    ensemble = simulate_ensemble(estimate, len(train), land_use, group.training, settings.replicates,
                                 (settings.seed, group.index), settings.workers)
    sig = classify_significance(observed, ensemble, settings.alpha)
    if settings.level == "volume" and method == "stkde":
        significant = sig.significant_mask.any(axis=2)
        p_values = sig.p_values.min(axis=2)
        observed = observed.sum(axis=2) * settings.t_bin
    else:
        significant, p_values = sig.significant_mask, sig.p_values
    surface = DensitySurface(spatial, observed)
    curve = pai_curve(surface, significant, land_use, test, spatial,
                      settings.scale_min, settings.scale_max, settings.scale_step)
    log.info("group %d %s: %d train, %d test, %d significant cells", group.index, method,
             len(train), len(test), int(significant.sum()))
    return GroupOutcome(group, method, surface, significant, p_values, curve, len(train), len(test))


def run_evaluation(incidents: IncidentsLike, land_use: LandUseGrid, groups: Sequence[PredictionGroup],
                   settings: EvaluationSettings, bandwidths: Optional[Bandwidths] = None,
                   search: Optional[BandwidthSearchConfig] = None) -> EvaluationResult:
    """Bandwidth selection on data before the first forecast, then per-group
    estimation, significance filtering and PAI curves for every method."""
    pts = as_points(incidents)
    result_search = None
    if bandwidths is None:
        first = min(g.forecast.start for g in groups)
        history = pts[pts[:, 2] < first]
        if search is None:
            search = BandwidthSearchConfig.default_for(history, land_use.spec.cell_size, settings.t_bin)
        result_search = optimize_bandwidths(history, search, settings.kernel)
        bandwidths = result_search.bw
        log.info("selected bandwidths %s (ln L = %.4f)", bandwidths, result_search.log_likelihood)
    result = EvaluationResult(bandwidths, result_search)
    for method in settings.methods:
        result.outcomes[method] = [evaluate_group(pts, land_use, g, method, bandwidths, settings) for g in groups]
    result.comparison = compare_methods({m: result.curves(m) for m in settings.methods})
    return result
