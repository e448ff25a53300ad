"""Spatio-temporal kernel density hotspot estimation and evaluation."""
from .bandwidth import (
    BandwidthResult,
    BandwidthSearchConfig,
    BandwidthSearchError,
    loo_densities,
    loo_density,
    loo_log_likelihood,
    optimize_bandwidths,
)
from .domain import (
    OUT_OF_GRID,
    Bandwidths,
    DensitySurface,
    DensityVolume,
    EmptyDataError,
    GridSpec2D,
    GridSpec3D,
    Incident,
    LandUse,
    LandUseGrid,
    StkdeError,
    TimeWindow,
    ValidationError,
    as_points,
    voxel_centroid,
    world_to_voxel,
)
from .estimators import (
    PromapParams,
    promap_surface,
    skde_at_point,
    skde_surface,
    stkde_at_point,
    stkde_surface,
    stkde_volume,
)
from .evaluation import (
    CurvePoint,
    HotspotSelection,
    MethodComparison,
    PAICurve,
    PredictionGroup,
    area_scales,
    build_prediction_groups,
    compare_methods,
    consolidate_curves,
    hit_rate,
    pai,
    pai_curve,
    select_hotspots,
)
from .kernels import KernelId, epanechnikov, epanechnikov_radial, product_kernel_weight
from .pipeline import EvaluationResult, EvaluationSettings, run_evaluation
from .significance import (
    NullEnsemble,
    SignificanceResult,
    build_null_ensemble,
    classify_significance,
    marginalize_time,
    simulate_null_incidents,
)
from .stats import anova_one_way, welch_t_test
from .synth import (
    Cluster,
    SynthProcessSpec,
    drifting_cluster_scenario,
    generate_incidents,
    generate_landuse,
    uniform_scenario,
)

__version__ = "0.1.0"
