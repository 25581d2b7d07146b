"""Iterative inference loops, generic over process and restorer.

Both loops start from the corruption initializer and walk the step index
down from N to 1:

* Algorithm 1 re-noises each clean prediction to the previous step:
  ``X_{n-1} = noising(prediction, u, n-1)``.
* Algorithm 2 applies a first-order correction instead:
  ``X_{n-1} = X_n - noising(prediction, u, n) + noising(prediction, u, n-1)``
  with one shared draw for both calls. Suited to smooth degradations; it is
  the default for the blurring process, algorithm 1 for everything else.

In trajectory-fixed mode every re-noising reuses the one draw produced by the
initializer, so the whole run is a deterministic function of the initial
sample and a perfect restorer walks the exact forward trajectory back to the
clean data. Fresh-per-step mode redraws at every step (ablation).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import ProcessConfig, ProcessKind
from .grids import require_same_shape
from .restorer import Restorer
from .rng import NoiseDraw, RandomSource, draw_noise
from .processes import corrupt, noising


class Algorithm(str, Enum):
    ALG1 = "alg1"
    ALG2 = "alg2"


class NoiseMode(str, Enum):
    TRAJECTORY_FIXED = "trajectory-fixed"
    FRESH_PER_STEP = "fresh-per-step"


@dataclass(frozen=True)
class SamplerConfig:
    algorithm: Algorithm = Algorithm.ALG1
    noise_mode: NoiseMode = NoiseMode.TRAJECTORY_FIXED
    record_trajectory: bool = False

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "noise_mode", NoiseMode(self.noise_mode))


def default_algorithm(kind: ProcessKind) -> Algorithm:
    """Algorithm 2 for the blurring process, algorithm 1 otherwise."""
    return Algorithm.ALG2 if kind is ProcessKind.BLURRING else Algorithm.ALG1


class NonFiniteStateError(RuntimeError):
    """A sampling iterate left the finite range."""


def _check_finite(x: np.ndarray, n: int, what: str) -> None:
    if not np.all(np.isfinite(x)):
        raise NonFiniteStateError(f"non-finite {what} at step n={n}")


def sample_alg1(
    config: ProcessConfig,
    restorer: Restorer,
    u: np.ndarray,
    rng: RandomSource,
    noise_mode: NoiseMode = NoiseMode.TRAJECTORY_FIXED,
    record_trajectory: bool = False,
) -> tuple[np.ndarray, list[tuple[int, np.ndarray]] | None]:
    """Re-noising loop; returns the step-0 state and an optional trajectory.

    The trajectory, when recorded, lists (step, state) pairs from N down
    to 0, including the initial sample.
    """
    state, draw = corrupt(config, u, rng)
    trajectory = [(config.n_steps, state.copy())] if record_trajectory else None
    for n in range(config.n_steps, 0, -1):
        prediction = restorer.predict(state, u)
        require_same_shape(prediction, u, "prediction", "u")
        _check_finite(prediction, n, "prediction")
        if noise_mode is NoiseMode.FRESH_PER_STEP:
            draw = draw_noise(config, u.shape, rng)
        state = noising(config, prediction, u, n - 1, draw)
        _check_finite(state, n - 1, "state")
        if trajectory is not None:
            trajectory.append((n - 1, state.copy()))
    return state, trajectory


def sample_alg2(
    config: ProcessConfig,
    restorer: Restorer,
    u: np.ndarray,
    rng: RandomSource,
    noise_mode: NoiseMode = NoiseMode.TRAJECTORY_FIXED,
    record_trajectory: bool = False,
) -> tuple[np.ndarray, list[tuple[int, np.ndarray]] | None]:
    """First-order correction loop; same contract as :func:`sample_alg1`.

    Within one step both noising calls share one draw, always.
    """
    state, draw = corrupt(config, u, rng)
    trajectory = [(config.n_steps, state.copy())] if record_trajectory else None
    for n in range(config.n_steps, 0, -1):
        prediction = restorer.predict(state, u)
        require_same_shape(prediction, u, "prediction", "u")
        _check_finite(prediction, n, "prediction")
        if noise_mode is NoiseMode.FRESH_PER_STEP:
            draw = draw_noise(config, u.shape, rng)
        state = (
            state
            - noising(config, prediction, u, n, draw)
            + noising(config, prediction, u, n - 1, draw)
        )
        _check_finite(state, n - 1, "state")
        if trajectory is not None:
            trajectory.append((n - 1, state.copy()))
    return state, trajectory


def sample(
    config: ProcessConfig,
    sampler_config: SamplerConfig,
    restorer: Restorer,
    u: np.ndarray,
    rng: RandomSource,
) -> tuple[np.ndarray, list[tuple[int, np.ndarray]] | None]:
    """Run the configured algorithm."""
    fn = sample_alg1 if sampler_config.algorithm is Algorithm.ALG1 else sample_alg2
    return fn(
        config,
        restorer,
        u,
        rng,
        noise_mode=sampler_config.noise_mode,
        record_trajectory=sampler_config.record_trajectory,
    )
