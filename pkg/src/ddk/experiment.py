"""JSON experiment configuration.

A config document has up to four sections, each optional, with unknown keys
rejected everywhere:

    {
      "process": {"kind": "rfag", "N": 10, "sigma": 0.6,
                  "beta0": 0.05, "beta1": 20.0, "mixture_scale": 0.5},
      "sampler": {"algorithm": "auto", "noise_mode": "trajectory-fixed"},
      "train":   {"epochs": 150, "batch_size": 16,
                  "learning_rate": 0.001, "seed": 0},
      "data":    {"count": 200, "W": 32, "H": 32,
                  "prior_blur_time": 8.0, "seed": 0}
    }

The values above are also the defaults for every omitted key; sampler
algorithm "auto" resolves to the per-process default (alg2 for blurring,
alg1 otherwise).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .config import ProcessConfig, ProcessKind
from .sampler import Algorithm, NoiseMode, SamplerConfig, default_algorithm
from .trainer import SyntheticDatasetSpec, TrainConfig


class ConfigError(ValueError):
    """Raised for unreadable or invalid experiment configs."""


_PROCESS_KEYS = {"kind", "N", "sigma", "beta0", "beta1", "mixture_scale"}
_SAMPLER_KEYS = {"algorithm", "noise_mode"}
_TRAIN_KEYS = {"epochs", "batch_size", "learning_rate", "seed"}
_DATA_KEYS = {"count", "W", "H", "prior_blur_time", "seed"}
_SECTIONS = {"process", "sampler", "train", "data"}


@dataclass(frozen=True)
class ExperimentConfig:
    process: ProcessConfig
    sampler_algorithm: str  # "alg1", "alg2", or "auto"
    sampler_noise_mode: NoiseMode
    train: TrainConfig
    data: SyntheticDatasetSpec

    def sampler_config(self, record_trajectory: bool = False) -> SamplerConfig:
        algorithm = (
            default_algorithm(self.process.kind)
            if self.sampler_algorithm == "auto"
            else Algorithm(self.sampler_algorithm)
        )
        return SamplerConfig(
            algorithm=algorithm,
            noise_mode=self.sampler_noise_mode,
            record_trajectory=record_trajectory,
        )


def _check_keys(section: str, mapping: dict, allowed: set[str]) -> None:
    if not isinstance(mapping, dict):
        raise ConfigError(f"config section {section!r} must be an object")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) in {section!r}: {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _number(section: str, mapping: dict, key: str, default, integer: bool = False):
    value = mapping.get(key, default)
    if integer:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    return float(value)


def parse_experiment_config(document: dict) -> ExperimentConfig:
    _check_keys("top level", document, _SECTIONS)
    process_doc = document.get("process", {})
    sampler_doc = document.get("sampler", {})
    train_doc = document.get("train", {})
    data_doc = document.get("data", {})
    _check_keys("process", process_doc, _PROCESS_KEYS)
    _check_keys("sampler", sampler_doc, _SAMPLER_KEYS)
    _check_keys("train", train_doc, _TRAIN_KEYS)
    _check_keys("data", data_doc, _DATA_KEYS)

    kind = process_doc.get("kind", "rfag")
    try:
        process = ProcessConfig(
            kind=ProcessKind(kind),
            n_steps=_number("process", process_doc, "N", 10, integer=True),
            sigma=_number("process", process_doc, "sigma", 0.6),
            beta0=_number("process", process_doc, "beta0", 0.05),
            beta1=_number("process", process_doc, "beta1", 20.0),
            mixture_scale=_number("process", process_doc, "mixture_scale", 0.5),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid process config: {exc}") from exc

    algorithm = sampler_doc.get("algorithm", "auto")
    if algorithm not in ("auto", "alg1", "alg2"):
        raise ConfigError(
            f"sampler.algorithm must be one of 'auto', 'alg1', 'alg2', got {algorithm!r}"
        )
    noise_mode = sampler_doc.get("noise_mode", "trajectory-fixed")
    try:
        noise_mode = NoiseMode(noise_mode)
    except ValueError as exc:
        raise ConfigError(f"invalid sampler.noise_mode {noise_mode!r}") from exc

    try:
        train = TrainConfig(
            epochs=_number("train", train_doc, "epochs", 150, integer=True),
            batch_size=_number("train", train_doc, "batch_size", 16, integer=True),
            learning_rate=_number("train", train_doc, "learning_rate", 1e-3),
            seed=_number("train", train_doc, "seed", 0, integer=True),
        )
        data = SyntheticDatasetSpec(
            count=_number("data", data_doc, "count", 200, integer=True),
            width=_number("data", data_doc, "W", 32, integer=True),
            height=_number("data", data_doc, "H", 32, integer=True),
            prior_blur_time=_number("data", data_doc, "prior_blur_time", 8.0),
            seed=_number("data", data_doc, "seed", 0, integer=True),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid config: {exc}") from exc

    return ExperimentConfig(
        process=process,
        sampler_algorithm=algorithm,
        sampler_noise_mode=noise_mode,
        train=train,
        data=data,
    )


def load_experiment_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            document = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return parse_experiment_config(document)
