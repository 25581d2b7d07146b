"""Matrix-level evaluation and Monte-Carlo verification helpers."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dctblur import dct2_forward
from .grids import require_same_shape


def rmse(a: np.ndarray, b: np.ndarray) -> float:
    """Root mean squared elementwise difference."""
    require_same_shape(a, b, "a", "b")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def hf_energy(x: np.ndarray, cutoff: int) -> float:
    """Total squared cosine-coefficient energy at frequency pairs i + j >= cutoff.

    cutoff 0 gives the total energy (equals ||x||^2 by Parseval).
    """
    w, h = x.shape
    if cutoff >= max(w, h):
        raise ValueError(f"cutoff {cutoff} must be < max(W, H) = {max(w, h)}")
    spectrum = dct2_forward(x)
    i = np.arange(w)[:, None]
    j = np.arange(h)[None, :]
    return float(np.sum(spectrum[i + j >= cutoff] ** 2))


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    variance: float
    se_mean: float
    se_variance: float


def mc_moments(draw_scalar: Callable[[], float], trials: int) -> MomentEstimate:
    """Sample mean and unbiased variance of a scalar sampler, with standard errors.

    The variance standard error uses the normal-theory approximation
    s^2 * sqrt(2 / (trials - 1)).
    """
    if trials < 2:
        raise ValueError(f"trials must be >= 2, got {trials}")
    values = np.array([float(draw_scalar()) for _ in range(trials)])
    mean = float(values.mean())
    variance = float(values.var(ddof=1))
    se_mean = float(np.sqrt(variance / trials))
    se_variance = float(variance * np.sqrt(2.0 / (trials - 1)))
    return MomentEstimate(mean, variance, se_mean, se_variance)


@dataclass(frozen=True)
class MetricReport:
    """Reconstruction quality relative to the prior it started from.

    ``improvement_ratio`` is rmse / prior_rmse: below 1 means the prediction
    beats the prior. ``per_frequency_energy[b]`` is the mean squared
    cosine-coefficient energy of the predictions over the diagonal band
    i + j = b.
    """

    rmse: float
    prior_rmse: float
    improvement_ratio: float
    per_frequency_energy: tuple[float, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "rmse": self.rmse,
                "prior_rmse": self.prior_rmse,
                "improvement_ratio": self.improvement_ratio,
                "per_frequency_energy": list(self.per_frequency_energy),
            },
            indent=2,
        )


def _band_energy(x: np.ndarray) -> np.ndarray:
    w, h = x.shape
    spectrum = dct2_forward(x) ** 2
    bands = np.zeros(w + h - 1)
    idx = np.arange(w)[:, None] + np.arange(h)[None, :]
    np.add.at(bands, idx.ravel(), spectrum.ravel())
    return bands


def evaluate_predictions(
    references: list[np.ndarray],
    priors: list[np.ndarray],
    predictions: list[np.ndarray],
) -> MetricReport:
    """Aggregate report over matched (x0, prior, prediction) lists."""
    if not (len(references) == len(priors) == len(predictions)) or not references:
        raise ValueError("need equal, nonempty reference/prior/prediction lists")
    sq_pred, sq_prior, count = 0.0, 0.0, 0
    bands = None
    for x0, u, pred in zip(references, priors, predictions):
        require_same_shape(x0, u, "x0", "prior")
        require_same_shape(x0, pred, "x0", "prediction")
        sq_pred += float(np.sum((pred - x0) ** 2))
        sq_prior += float(np.sum((u - x0) ** 2))
        count += x0.size
        e = _band_energy(pred)
        bands = e if bands is None else bands + e
    pred_rmse = float(np.sqrt(sq_pred / count))
    prior_rmse = float(np.sqrt(sq_prior / count))
    if prior_rmse > 0:
        ratio = pred_rmse / prior_rmse
    else:
        ratio = 0.0 if pred_rmse == 0 else float("inf")
    return MetricReport(
        rmse=pred_rmse,
        prior_rmse=prior_rmse,
        improvement_ratio=ratio,
        per_frequency_energy=tuple(bands / len(references)),
    )
