"""Command-line front end.

Subcommands: gen-corpus, calibrate, train, sweep, scenarios, route,
report. All read a TOML run configuration (every key optional) and write
their outputs plus an effective-config snapshot and a run-metadata JSON
under the output directory. Exit codes: 0 success, 1 domain or config
error, 2 I/O or protocol error.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click
import numpy as np
import scipy

import blurmm
from blurmm.calib import derive_lv_thresholds, lv_sigma_curve
from blurmm.config import RunConfig, config_hash, emit_config, load_config
from blurmm.errors import BlurMMError, PnmFormatError, ProtocolError
from blurmm.experiments import EvalReport, run_scenarios, sweep_fixed_blur, trace_to_csv
from blurmm.filters import gaussian_blur, laplacian_variance
from blurmm.metrics import auc, cv_split
from blurmm.predict import (
    AnalyticPredictor,
    ExternalPredictor,
    ExternalSpec,
    feature_predict,
    train_feature_model,
)
from blurmm.records import load_corpus
from blurmm.routing import RoutingPolicy, route
from blurmm.synth import gen_corpus


def _config_options(fn):
    @click.option("--config", "config_path", type=click.Path(), default=None,
                  help="TOML run configuration.")
    @click.option("--seed", type=int, default=None, help="Override the master seed.")
    @click.option("--out", type=click.Path(), default=None, help="Override the output directory.")
    @click.option("--threads", type=int, default=None,
                  help="Worker threads; must not change results.")
    @functools.wraps(fn)
    def wrapper(config_path, seed, out, threads, **kwargs):
        from dataclasses import replace

        config = load_config(config_path) if config_path else RunConfig()
        if seed is not None:
            config = replace(config, master_seed=seed)
        if out is not None:
            config = replace(config, out_dir=out)
        if threads is not None:
            config = replace(config, threads=threads)
        return fn(config, **kwargs)

    return wrapper


def _write_run_artifacts(config: RunConfig, command: str) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.toml").write_text(emit_config(config))
    metadata = {
        "command": command,
        "master_seed": config.master_seed,
        "config_sha256": config_hash(config),
        "versions": {
            "blurmm": blurmm.__version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
    }
    (out / "run_metadata.json").write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return out


def _build_predictors(config: RunConfig) -> dict:
    roster = config.roster
    if roster.kind == "analytic":
        return {
            spec.model_id: AnalyticPredictor(spec, config.master_seed)
            for spec in roster.build_specs()
        }
    return {
        mid: ExternalPredictor(ExternalSpec(mid, command))
        for mid, command in zip(roster.model_ids, roster.commands)
    }


def _thresholds(config: RunConfig, rasters):
    """Configured thresholds, or calibrate them from the corpus sample."""
    if config.thresholds is not None:
        return config.thresholds
    cal = config.calibration
    rng = np.random.default_rng(config.master_seed)
    curve = lv_sigma_curve(rasters, list(cal.sigmas), rng, sample_size=cal.sample_size)
    return derive_lv_thresholds(curve, cal.sigma_cutoffs, theta_sharp=cal.theta_sharp)


@click.group()
@click.version_option(version=blurmm.__version__)
def main():
    """Blur-aware multi-model routing pipeline."""


@main.command("gen-corpus")
@_config_options
def cmd_gen_corpus(config):
    """Generate the synthetic tile corpus and its manifest."""
    _write_run_artifacts(config, "gen-corpus")
    records = gen_corpus(config.corpus, config.master_seed, config.corpus_dir)
    n_slides = len({r.slide_id for r in records})
    click.echo(f"wrote {len(records)} tiles across {n_slides} slides to {config.corpus_dir}")


@main.command("calibrate")
@_config_options
def cmd_calibrate(config):
    """Measure the sharpness-vs-blur curve and derive routing thresholds."""
    out = _write_run_artifacts(config, "calibrate")
    _, rasters = load_corpus(Path(config.corpus_dir) / "manifest.csv")
    cal = config.calibration
    rng = np.random.default_rng(config.master_seed)
    curve = lv_sigma_curve(rasters, list(cal.sigmas), rng, sample_size=cal.sample_size)
    with open(out / "lv_curve.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sigma", "lv_p05", "lv_p25", "lv_p50", "lv_p75", "lv_p95", "n_tiles"])
        for row in curve.rows:
            writer.writerow([
                repr(row.sigma), repr(row.lv_p05), repr(row.lv_p25), repr(row.lv_p50),
                repr(row.lv_p75), repr(row.lv_p95), row.n_tiles,
            ])
    policy = derive_lv_thresholds(curve, cal.sigma_cutoffs, theta_sharp=cal.theta_sharp)
    (out / "thresholds.toml").write_text(
        "[thresholds]\n"
        f"theta_sharp = {policy.theta_sharp!r}\n"
        f"theta_hi = {policy.theta_hi!r}\n"
        f"theta_lo = {policy.theta_lo!r}\n"
    )
    click.echo(f"theta_hi={policy.theta_hi!r} theta_lo={policy.theta_lo!r}")


@main.command("train")
@_config_options
def cmd_train(config):
    """Train one feature model per configured blur level and report
    validation AUC on sharp and moderately blurred tiles."""
    out = _write_run_artifacts(config, "train")
    records, rasters = load_corpus(Path(config.corpus_dir) / "manifest.csv")
    slide_ids = sorted({r.slide_id for r in records})
    labels = {r.slide_id: r.label for r in records}
    split = cv_split(slide_ids, [labels[s] for s in slide_ids], 5, config.master_seed)
    fold = split.folds[0]
    train_set = set(fold.train) | set(fold.tuning)
    val_set = set(fold.validation)
    tr = [(r, x) for r, x in zip(records, rasters) if r.slide_id in train_set]
    va = [(r, x) for r, x in zip(records, rasters) if r.slide_id in val_set]
    va_labels = [r.label for r, _ in va]
    payload = []
    for train_sigma in config.train_sigmas:
        spec = train_feature_model([r for r, _ in tr], [x for _, x in tr], train_sigma)
        entry = {
            "model_id": spec.model_id,
            "train_sigma": spec.train_sigma,
            "weights": list(spec.weights),
            "bias": spec.bias,
            "feature_means": list(spec.feature_means),
            "feature_sds": list(spec.feature_sds),
            "validation_auc": {},
        }
        for eval_sigma in (0.0, 3.0):
            scores = [feature_predict(gaussian_blur(x, eval_sigma), spec) for _, x in va]
            entry["validation_auc"][f"sigma={eval_sigma:g}"] = auc(va_labels, scores)
        payload.append(entry)
        aucs = " ".join(f"{k}:{v:.3f}" for k, v in entry["validation_auc"].items())
        click.echo(f"{spec.model_id}: {aucs}")
    (out / "feature_models.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@main.command("sweep")
@_config_options
def cmd_sweep(config):
    """Evaluate every roster model on fixed-blur copies of the corpus."""
    out = _write_run_artifacts(config, "sweep")
    records, rasters = load_corpus(Path(config.corpus_dir) / "manifest.csv")
    predictors = list(_build_predictors(config).values())
    report = sweep_fixed_blur(
        records, rasters, predictors, list(config.sweep_sigmas), threads=config.threads
    )
    (out / "report.csv").write_text(report.to_csv())
    (out / "report.json").write_text(report.to_json())
    click.echo(f"wrote {len(report.rows)} report rows to {out}")


@main.command("scenarios")
@_config_options
def cmd_scenarios(config):
    """Run the mixed-blur scenario suite: routed multi-model prediction
    against the base model on identical tiles."""
    out = _write_run_artifacts(config, "scenarios")
    records, rasters = load_corpus(Path(config.corpus_dir) / "manifest.csv")
    predictors = _build_predictors(config)
    policy = RoutingPolicy.from_thresholds(
        _thresholds(config, rasters), *config.roster.model_ids[:3]
    )
    base_id = config.roster.model_ids[0]
    report, traces = run_scenarios(
        records,
        rasters,
        config.scenarios(),
        policy,
        predictors,
        base_id,
        config.master_seed,
        groups=config.groups,
        threads=config.threads,
    )
    (out / "report.csv").write_text(report.to_csv())
    (out / "report.json").write_text(report.to_json())
    for scenario_id, trace in traces.items():
        (out / f"trace_scenario_{scenario_id}.csv").write_text(trace_to_csv(trace))
    click.echo(f"wrote {len(report.rows)} report rows to {out}")


@main.command("route")
@_config_options
def cmd_route(config):
    """Measure each corpus tile's sharpness and emit its routed model."""
    out = _write_run_artifacts(config, "route")
    records, rasters = load_corpus(Path(config.corpus_dir) / "manifest.csv")
    policy = RoutingPolicy.from_thresholds(
        _thresholds(config, rasters), *config.roster.model_ids[:3]
    )
    with open(out / "route.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tile_id", "theta", "model_id"])
        for record, raster in zip(records, rasters):
            theta = laplacian_variance(raster)
            writer.writerow([record.tile_id, repr(theta), route(theta, policy)])
    click.echo(f"routed {len(records)} tiles")


@main.command("report")
@click.option("--in", "in_path", type=click.Path(), required=True,
              help="Report JSON produced by sweep or scenarios.")
@_config_options
def cmd_report(config, in_path):
    """Re-emit a JSON report as CSV."""
    out = _write_run_artifacts(config, "report")
    try:
        text = Path(in_path).read_text()
        report = EvalReport.from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise BlurMMError(f"malformed report {in_path}: {exc}") from exc
    (out / "report.csv").write_text(report.to_csv())
    click.echo(f"wrote {len(report.rows)} report rows to {out / 'report.csv'}")


def entrypoint():
    try:
        main(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except (ProtocolError, PnmFormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (BlurMMError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entrypoint()
