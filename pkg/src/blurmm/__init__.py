"""Blur-aware multi-model tile prediction.

Simulates controlled Gaussian blur over labeled image tiles, scores
sharpness by variance of Laplacian, calibrates sharpness thresholds,
routes each tile to the predictor trained for its blur band, aggregates
tile scores to slide level, and evaluates single-model against routed
multi-model prediction.
"""

from blurmm.blursim import (
    DEFAULT_GROUPS,
    BlurGroup,
    Scenario,
    apply_fixed_blur,
    apply_scenario,
    assign_groups,
    plan_scenario,
    scenario_table,
    sigma_grid,
)
from blurmm.calib import (
    AucCurveSet,
    LvSigmaCurve,
    ThresholdPolicy,
    derive_lv_thresholds,
    find_sigma_cutoffs,
    interpolate_lv,
    load_reference_auc,
    lv_sigma_curve,
)
from blurmm.config import (
    DEFAULT_SEED,
    RunConfig,
    default_roster,
    emit_config,
    load_config,
    parse_config,
)
from blurmm.errors import (
    BlurMMError,
    ConfigError,
    GenerationError,
    PnmFormatError,
    ProtocolError,
)
from blurmm.experiments import EvalReport, EvalRow, run_scenarios, sweep_fixed_blur
from blurmm.external import external_predict
from blurmm.filters import gaussian_blur, gaussian_kernel_1d, laplacian, laplacian_variance
from blurmm.metrics import CvSplit, SlideScore, aggregate_slide, auc, cv_split, percentile_75
from blurmm.predict import (
    AnalyticPredictor,
    AnalyticSpec,
    ExternalPredictor,
    ExternalSpec,
    FeatureModelSpec,
    FeaturePredictor,
    analytic_predict,
    extract_features,
    feature_predict,
    solve_analytic_params,
    train_feature_model,
)
from blurmm.raster import Raster, read_pnm, to_grayscale, write_pnm
from blurmm.records import TileRecord, load_corpus, read_manifest, write_manifest
from blurmm.rng import derive_seed, tile_rng
from blurmm.routing import RoutingPolicy, deepblurmm_predict, route
from blurmm.synth import CorpusSpec, gen_corpus, gen_corpus_arrays
from blurmm.tiling import tile_raster

__version__ = "0.1.0"

__all__ = [
    "AnalyticPredictor",
    "AnalyticSpec",
    "AucCurveSet",
    "BlurGroup",
    "BlurMMError",
    "ConfigError",
    "CorpusSpec",
    "CvSplit",
    "DEFAULT_GROUPS",
    "DEFAULT_SEED",
    "EvalReport",
    "EvalRow",
    "ExternalPredictor",
    "ExternalSpec",
    "FeatureModelSpec",
    "FeaturePredictor",
    "GenerationError",
    "LvSigmaCurve",
    "PnmFormatError",
    "ProtocolError",
    "Raster",
    "RoutingPolicy",
    "RunConfig",
    "Scenario",
    "SlideScore",
    "ThresholdPolicy",
    "TileRecord",
    "aggregate_slide",
    "analytic_predict",
    "apply_fixed_blur",
    "apply_scenario",
    "assign_groups",
    "auc",
    "cv_split",
    "deepblurmm_predict",
    "default_roster",
    "derive_lv_thresholds",
    "derive_seed",
    "emit_config",
    "external_predict",
    "extract_features",
    "feature_predict",
    "find_sigma_cutoffs",
    "gaussian_blur",
    "gaussian_kernel_1d",
    "gen_corpus",
    "gen_corpus_arrays",
    "interpolate_lv",
    "laplacian",
    "laplacian_variance",
    "load_config",
    "load_corpus",
    "load_reference_auc",
    "lv_sigma_curve",
    "parse_config",
    "percentile_75",
    "plan_scenario",
    "read_manifest",
    "read_pnm",
    "route",
    "run_scenarios",
    "scenario_table",
    "sigma_grid",
    "solve_analytic_params",
    "sweep_fixed_blur",
    "tile_raster",
    "tile_rng",
    "to_grayscale",
    "train_feature_model",
    "write_manifest",
    "write_pnm",
]
