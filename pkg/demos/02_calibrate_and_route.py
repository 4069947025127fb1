"""Threshold calibration and sharpness-band routing.

Shows how the two sigma cut-offs (where a blurrier-trained model starts
beating its sharper neighbor) translate into variance-of-Laplacian
thresholds, and how tiles are routed by measured sharpness. Run:

    python demos/02_calibrate_and_route.py
"""

import numpy as np

from blurmm import (
    CorpusSpec,
    RoutingPolicy,
    derive_lv_thresholds,
    find_sigma_cutoffs,
    gaussian_blur,
    gen_corpus_arrays,
    laplacian_variance,
    load_reference_auc,
    lv_sigma_curve,
    plan_scenario,
    route,
    scenario_table,
    sigma_grid,
)

# --- Sigma cut-offs from the published AUC table -----------------------
# The shipped reference table gives slide-level AUC per model over the
# blur grid. A challenger "takes over" at the first grid sigma where it
# beats the incumbent by more than the margin.
curves = load_reference_auc("slide")
cutoffs = find_sigma_cutoffs(curves, margin=0.005)
print(f"sigma cut-offs from the reference AUC table: {cutoffs}")

# --- LV curve on a synthetic corpus ------------------------------------
spec = CorpusSpec(n_slides=10, tiles_per_slide=6, tile_size=96)
records, rasters = gen_corpus_arrays(spec, master_seed=2)
rng = np.random.default_rng(2)
curve = lv_sigma_curve(rasters, [0.0] + sigma_grid(), rng, sample_size=50)
print("\nsigma   median LV")
for row in curve.rows[:8]:
    print(f"{row.sigma:5.1f}   {row.lv_p50:10.1f}")

# --- Cut-offs to thresholds --------------------------------------------
# Log-linear interpolation of the median LV at each cut-off sigma gives
# the two routing floors: above theta_hi tiles are sharp enough for the
# base model, below theta_lo they go to the heavy-blur model.
policy_thresholds = derive_lv_thresholds(curve, (cutoffs[0], cutoffs[1]))
print(f"\ntheta_hi={policy_thresholds.theta_hi:.2f} "
      f"theta_lo={policy_thresholds.theta_lo:.2f}")
policy = RoutingPolicy.from_thresholds(policy_thresholds)

# --- Route a mixed-blur batch ------------------------------------------
# Scenario 5 blurs 25% of tiles lightly, 50% moderately, 25% heavily.
# Each tile's added blur is drawn from its own deterministic stream.
scenario = scenario_table()[4]
planned = plan_scenario(records, scenario, master_seed=2)
counts = {"base": 0, "mid": 0, "high": 0}
for rec, raster in zip(planned, rasters):
    blurred = gaussian_blur(raster, rec.g_i)
    theta = laplacian_variance(blurred)
    counts[route(theta, policy)] += 1
print(f"\nscenario {scenario.id} band counts over {len(planned)} tiles: {counts}")
