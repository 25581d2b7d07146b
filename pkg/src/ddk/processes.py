"""The five closed-form forward processes and the corruption initializer.

Every process maps clean data x0, a prior grid u, and an integer step
n in {0, ..., N} straight to the corrupted state, with no chain simulation:

* grad_tts_dt:  (1 - e^(-r/2)) u + e^(-r/2) x0 + sqrt(1 - e^(-r)) z
  with r the integral of a linear noise-rate ramp up to n/N. Variance
  preserving: the noise variance saturates at 1.
* rfag:         (1 - n/N) x0 + (n/N)(sigma * eps + u), a straight path.
* rfmg:         (1 - n/N) x0 + (n/N)((1 + sigma * eps) * u), straight path
  with multiplicative, signal-dependent noise on the prior.
* blurring:     (1 - n/N) blur(x0, n) + (n/N) u, fully deterministic.
* mixture:      like blurring but with Gaussian noise of per-frequency
  standard deviation sqrt(scale * -lambda_ij) added around the blurred mean
  in the cosine domain.

Step 0 of every path is the clean data itself and step N carries no trace of
it; both endpoints are returned via short-circuits so the identities hold bit
for bit. The corruption initializer produces exactly the step-N state from
the prior alone, sharing one frozen noise draw with the per-step formulas, so
re-noising during sampling replays the very trajectory that produced the
initial sample. The one exception is grad_tts_dt, whose step-N state retains
an e^(-r(N)/2) x0 term that is unknowable at inference time; the initializer
drops it, and the resulting gap is bounded by e^(-r(N)/2) * max|x0|
(about 6.7e-3 * max|x0| at the default ramp).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ProcessConfig, ProcessKind
from .dctblur import blur, dct2_forward, dct2_inverse, heat_eigenvalues
from .grids import require_same_shape
from .rng import EMPTY_DRAW, NoiseDraw, RandomSource, draw_noise


@dataclass(frozen=True)
class BetaSchedule:
    """Linear noise-rate ramp beta(t) = beta0 + (beta1 - beta0) t on t in [0, 1].

    Discrete step n maps to t = n / n_steps. ``integral(n)`` is the exact
    antiderivative beta0 t + (beta1 - beta0) t^2 / 2 evaluated at t(n); it is
    0 at n = 0 and strictly increasing.
    """

    beta0: float
    beta1: float
    n_steps: int

    def time_of(self, n: float) -> float:
        return n / self.n_steps

    def integral(self, n: float) -> float:
        t = self.time_of(n)
        return self.beta0 * t + (self.beta1 - self.beta0) * t * t / 2.0


def schedule_of(config: ProcessConfig) -> BetaSchedule:
    return BetaSchedule(config.beta0, config.beta1, config.n_steps)


def _check_step(n: int, n_steps: int) -> None:
    if not 0 <= n <= n_steps:
        raise ValueError(f"step index {n} outside [0, {n_steps}]")


def grad_tts_dt(
    x0: np.ndarray,
    u: np.ndarray,
    n: int,
    schedule: BetaSchedule,
    draw: NoiseDraw,
) -> np.ndarray:
    """Variance-preserving additive-Gaussian state at step ``n``."""
    _check_step(n, schedule.n_steps)
    require_same_shape(x0, u, "x0", "u")
    if n == 0:
        return x0.copy()
    z = draw.require("z_signal", x0.shape)
    r = schedule.integral(n)
    keep = math.exp(-r / 2.0)
    std = math.sqrt(1.0 - math.exp(-r))
    return (1.0 - keep) * u + keep * x0 + std * z


def rfag(
    x0: np.ndarray,
    u: np.ndarray,
    n: int,
    sigma: float,
    n_steps: int,
    draw: NoiseDraw,
) -> np.ndarray:
    """Straight additive-Gaussian path state at step ``n``."""
    _check_step(n, n_steps)
    require_same_shape(x0, u, "x0", "u")
    if n == 0:
        return x0.copy()
    eps1 = draw.require("eps1", x0.shape)
    if n == n_steps:
        return _rfag_endpoint(u, sigma, eps1)
    frac = n / n_steps
    return (1.0 - frac) * x0 + frac * (sigma * eps1 + u)


def _rfag_endpoint(u: np.ndarray, sigma: float, eps1: np.ndarray) -> np.ndarray:
    return sigma * eps1 + u


def rfmg(
    x0: np.ndarray,
    u: np.ndarray,
    n: int,
    sigma: float,
    n_steps: int,
    draw: NoiseDraw,
) -> np.ndarray:
    """Straight multiplicative-Gaussian path state at step ``n``."""
    _check_step(n, n_steps)
    require_same_shape(x0, u, "x0", "u")
    if n == 0:
        return x0.copy()
    eps2 = draw.require("eps2", x0.shape)
    if n == n_steps:
        return _rfmg_endpoint(u, sigma, eps2)
    frac = n / n_steps
    return (1.0 - frac) * x0 + frac * _rfmg_endpoint(u, sigma, eps2)


def _rfmg_endpoint(u: np.ndarray, sigma: float, eps2: np.ndarray) -> np.ndarray:
    return (1.0 + sigma * eps2) * u


def blurring_path(x0: np.ndarray, u: np.ndarray, n: int, n_steps: int) -> np.ndarray:
    """Deterministic blur-toward-prior state at step ``n``."""
    _check_step(n, n_steps)
    require_same_shape(x0, u, "x0", "u")
    if n == 0:
        return x0.copy()
    if n == n_steps:
        return u.copy()
    frac = n / n_steps
    return (1.0 - frac) * blur(x0, n) + frac * u


def mixture_noise(
    x0: np.ndarray, n: int, scale: float, draw: NoiseDraw
) -> np.ndarray:
    """Blurred mean of ``x0`` at time ``n`` plus frequency-shaped Gaussian noise.

    The noise is injected in the cosine domain with per-coefficient standard
    deviation sqrt(scale * -lambda_ij); the mean mode has lambda_00 = 0, so
    the spatial mean of the output equals the spatial mean of ``x0`` exactly,
    for every draw. The covariance does not depend on ``n``.
    """
    z = draw.require("z_freq", x0.shape)
    lam = heat_eigenvalues(*x0.shape)
    spectrum = np.exp(lam * n) * dct2_forward(x0) + np.sqrt(scale * -lam) * z
    return dct2_inverse(spectrum)


def mixture_path(
    x0: np.ndarray,
    u: np.ndarray,
    n: int,
    n_steps: int,
    scale: float,
    draw: NoiseDraw,
) -> np.ndarray:
    """Mixture (blur + frequency noise) path state at step ``n``.

    Step 0 is the clean data exactly: the trajectory starts at x0 by
    contract, even though the raw mixture noise has n-independent covariance
    and would remain noisy at n = 0 if evaluated verbatim.
    """
    _check_step(n, n_steps)
    require_same_shape(x0, u, "x0", "u")
    if n == 0:
        return x0.copy()
    if n == n_steps:
        return u.copy()
    frac = n / n_steps
    return (1.0 - frac) * mixture_noise(x0, n, scale, draw) + frac * u


def noising(
    config: ProcessConfig,
    x0: np.ndarray,
    u: np.ndarray,
    n: int,
    draw: NoiseDraw = EMPTY_DRAW,
) -> np.ndarray:
    """State of the selected forward process at step ``n``, given ``draw``.

    Deterministic given the draw; step 0 returns ``x0`` unchanged and step N
    is independent of ``x0``.
    """
    kind = config.kind
    if kind is ProcessKind.GRAD_TTS_DT:
        return grad_tts_dt(x0, u, n, schedule_of(config), draw)
    if kind is ProcessKind.RFAG:
        return rfag(x0, u, n, config.sigma, config.n_steps, draw)
    if kind is ProcessKind.RFMG:
        return rfmg(x0, u, n, config.sigma, config.n_steps, draw)
    if kind is ProcessKind.BLURRING:
        return blurring_path(x0, u, n, config.n_steps)
    if kind is ProcessKind.MIXTURE:
        return mixture_path(x0, u, n, config.n_steps, config.mixture_scale, draw)
    raise ValueError(f"unknown process kind {kind!r}")


def corrupt(
    config: ProcessConfig, u: np.ndarray, rng: RandomSource
) -> tuple[np.ndarray, NoiseDraw]:
    """Fully corrupted step-N state built from the prior alone, plus its draw.

    For every kind except grad_tts_dt the result equals the forward process
    at step N with the returned draw, exactly. For grad_tts_dt the clean-data
    term e^(-r(N)/2) x0 is dropped (x0 is unknown at inference), leaving a
    gap of at most e^(-r(N)/2) * max|x0|.
    """
    draw = draw_noise(config, u.shape, rng)
    kind = config.kind
    if kind is ProcessKind.RFAG:
        return _rfag_endpoint(u, config.sigma, draw.eps1), draw
    if kind is ProcessKind.RFMG:
        return _rfmg_endpoint(u, config.sigma, draw.eps2), draw
    if kind is ProcessKind.BLURRING:
        return u.copy(), draw
    if kind is ProcessKind.MIXTURE:
        # z_freq is in the draw for the later re-noising steps; step N itself
        # is the prior.
        return u.copy(), draw
    if kind is ProcessKind.GRAD_TTS_DT:
        r = schedule_of(config).integral(config.n_steps)
        keep = math.exp(-r / 2.0)
        std = math.sqrt(1.0 - math.exp(-r))
        return (1.0 - keep) * u + std * draw.z_signal, draw
    raise ValueError(f"unknown process kind {kind!r}")
