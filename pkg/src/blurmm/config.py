"""Run configuration: TOML parsing with strict key checking, defaulting,
and effective-config emission so every run is reproducible from the file
it writes back out."""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field, fields

from blurmm.blursim import DEFAULT_GROUPS, BlurGroup, Scenario, scenario_table, sigma_grid
from blurmm.calib import ThresholdPolicy
from blurmm.errors import ConfigError
from blurmm.predict import AnalyticSpec, solve_analytic_params
from blurmm.synth import CorpusSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_SEED = 2
DEFAULT_BASE_C = 3.0
DEFAULT_DECAYS = (1.5, 3.0, 12.0)
DEFAULT_CROSSOVERS = (1.5, 6.0)
DEFAULT_NOISE_SD = 4.0
DEFAULT_MODEL_IDS = ("base", "mid", "high")


def default_roster() -> list[AnalyticSpec]:
    """The shipped three-model analytic roster (base, mid, high)."""
    return solve_analytic_params(
        DEFAULT_BASE_C,
        list(DEFAULT_DECAYS),
        list(DEFAULT_CROSSOVERS),
        noise_sd=DEFAULT_NOISE_SD,
        model_ids=list(DEFAULT_MODEL_IDS),
    )


@dataclass(frozen=True)
class RosterConfig:
    """Analytic-roster parameters, or external commands per model id."""

    kind: str = "analytic"
    base_c: float = DEFAULT_BASE_C
    decays: tuple[float, ...] = DEFAULT_DECAYS
    crossovers: tuple[float, ...] = DEFAULT_CROSSOVERS
    noise_sd: float = DEFAULT_NOISE_SD
    model_ids: tuple[str, ...] = DEFAULT_MODEL_IDS
    commands: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in ("analytic", "external"):
            raise ConfigError(f"roster.kind must be 'analytic' or 'external', got {self.kind!r}")
        if self.kind == "external" and len(self.commands) != len(self.model_ids):
            raise ConfigError("external roster needs one command per model id")

    def build_specs(self) -> list[AnalyticSpec]:
        if self.kind != "analytic":
            raise ConfigError("build_specs applies to analytic rosters only")
        return solve_analytic_params(
            self.base_c,
            list(self.decays),
            list(self.crossovers),
            noise_sd=self.noise_sd,
            model_ids=list(self.model_ids),
        )


@dataclass(frozen=True)
class CalibrationConfig:
    sample_size: int = 400
    sigmas: tuple[float, ...] = (0.0, *sigma_grid())
    sigma_cutoffs: tuple[float, float] = (1.5, 6.0)
    theta_sharp: float = 500.0

    def __post_init__(self):
        if self.sample_size < 1:
            raise ConfigError("calibration.sample_size must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    master_seed: int = DEFAULT_SEED
    out_dir: str = "out"
    threads: int = 1
    corpus_dir: str = "corpus"
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    groups: tuple[BlurGroup, ...] = DEFAULT_GROUPS
    thresholds: ThresholdPolicy | None = None
    roster: RosterConfig = field(default_factory=RosterConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    sweep_sigmas: tuple[float, ...] = tuple(sigma_grid())
    scenario_mixes: tuple[tuple[float, float, float], ...] = tuple(
        (s.p_a, s.p_b, s.p_c) for s in scenario_table()
    )
    train_sigmas: tuple[float, ...] = (0.0, 0.5)

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if len(self.groups) != 3:
            raise ConfigError("exactly three blur groups are supported")

    def scenarios(self) -> list[Scenario]:
        return [Scenario(i + 1, *mix) for i, mix in enumerate(self.scenario_mixes)]


def _check_keys(section: str, data: dict, allowed) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        where = section or "top level"
        raise ConfigError(f"unknown config key(s) in {where}: {', '.join(unknown)}")


def _dataclass_section(cls, data: dict, section: str):
    allowed = [f.name for f in fields(cls)]
    _check_keys(section, data, allowed)
    coerced = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [{section}] section: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse a TOML run configuration, rejecting unknown keys."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    top_allowed = [
        "master_seed",
        "out_dir",
        "threads",
        "corpus_dir",
        "corpus",
        "groups",
        "thresholds",
        "roster",
        "calibration",
        "sweep",
        "scenarios",
        "train",
    ]
    _check_keys("", data, top_allowed)
    kwargs = {}
    for key in ("master_seed", "out_dir", "threads", "corpus_dir"):
        if key in data:
            kwargs[key] = data[key]
    if "corpus" in data:
        spec = _dataclass_section(CorpusSpec, data["corpus"], "corpus")
        kwargs["corpus"] = spec
    if "groups" in data:
        groups = []
        for i, entry in enumerate(data["groups"]):
            _check_keys(f"groups[{i}]", entry, ["name", "sigma_lo", "sigma_hi"])
            try:
                groups.append(BlurGroup(**entry))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid groups[{i}]: {exc}") from exc
        kwargs["groups"] = tuple(groups)
    if "thresholds" in data:
        kwargs["thresholds"] = _dataclass_section(
            ThresholdPolicy, data["thresholds"], "thresholds"
        )
    if "roster" in data:
        section = dict(data["roster"])
        if "commands" in section:
            section["commands"] = tuple(tuple(c) for c in section["commands"])
        kwargs["roster"] = _dataclass_section(RosterConfig, section, "roster")
    if "calibration" in data:
        kwargs["calibration"] = _dataclass_section(
            CalibrationConfig, data["calibration"], "calibration"
        )
    if "sweep" in data:
        _check_keys("sweep", data["sweep"], ["sigmas"])
        if "sigmas" in data["sweep"]:
            kwargs["sweep_sigmas"] = tuple(data["sweep"]["sigmas"])
    if "scenarios" in data:
        _check_keys("scenarios", data["scenarios"], ["mixes"])
        if "mixes" in data["scenarios"]:
            kwargs["scenario_mixes"] = tuple(tuple(m) for m in data["scenarios"]["mixes"])
    if "train" in data:
        _check_keys("train", data["train"], ["sigmas"])
        if "sigmas" in data["train"]:
            kwargs["train_sigmas"] = tuple(data["train"]["sigmas"])
    try:
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def emit_config(config: RunConfig) -> str:
    """Serialize the effective configuration back to TOML.

    parse_config(emit_config(c)) reconstructs c exactly, which makes the
    emitted file a complete record of the run.
    """
    lines = [
        f"master_seed = {_toml_value(config.master_seed)}",
        f"out_dir = {_toml_value(config.out_dir)}",
        f"threads = {_toml_value(config.threads)}",
        f"corpus_dir = {_toml_value(config.corpus_dir)}",
        "",
        "[corpus]",
    ]
    for f in fields(CorpusSpec):
        lines.append(f"{f.name} = {_toml_value(getattr(config.corpus, f.name))}")
    for group in config.groups:
        lines += [
            "",
            "[[groups]]",
            f"name = {_toml_value(group.name)}",
            f"sigma_lo = {_toml_value(group.sigma_lo)}",
            f"sigma_hi = {_toml_value(group.sigma_hi)}",
        ]
    if config.thresholds is not None:
        lines += [
            "",
            "[thresholds]",
            f"theta_sharp = {_toml_value(config.thresholds.theta_sharp)}",
            f"theta_hi = {_toml_value(config.thresholds.theta_hi)}",
            f"theta_lo = {_toml_value(config.thresholds.theta_lo)}",
        ]
    lines += ["", "[roster]"]
    for f in fields(RosterConfig):
        value = getattr(config.roster, f.name)
        if f.name == "commands" and not value:
            continue
        lines.append(f"{f.name} = {_toml_value(value)}")
    lines += ["", "[calibration]"]
    for f in fields(CalibrationConfig):
        lines.append(f"{f.name} = {_toml_value(getattr(config.calibration, f.name))}")
    lines += [
        "",
        "[sweep]",
        f"sigmas = {_toml_value(config.sweep_sigmas)}",
        "",
        "[scenarios]",
        f"mixes = {_toml_value(config.scenario_mixes)}",
        "",
        "[train]",
        f"sigmas = {_toml_value(config.train_sigmas)}",
    ]
    return "\n".join(lines) + "\n"


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(emit_config(config).encode("utf-8")).hexdigest()
