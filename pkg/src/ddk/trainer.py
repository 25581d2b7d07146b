"""Clean-data MSE training of the conv restorer on synthetic grids.

Each training item is corrupted at a step index drawn uniformly from
{1, ..., N} with fresh noise, and the model is penalized by the mean squared
error between its prediction and the clean grid. The prior grid of every
synthetic sample is a heavily blurred copy of the clean data, standing in for
an encoder that produces an approximate target.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .config import ProcessConfig
from .dctblur import blur
from .processes import noising
from .restorer import ConvRestorer, Workspace, save_model
from .rng import RandomSource, draw_noise, seeded_rng


@dataclass(frozen=True)
class SyntheticDatasetSpec:
    """Size and texture of the synthetic mel-like dataset.

    Samples are amplitude-enveloped sums of smooth 2-D harmonics rescaled to
    [-1, 1]; harmonic frequencies stay low (at most a few cycles per axis) so
    the blurred prior remains informative. The prior is
    blur(clean, prior_blur_time).
    """

    count: int
    width: int = 32
    height: int = 32
    num_harmonics: int = 3
    envelope_smoothness: float = 0.35
    prior_blur_time: float = 8.0
    seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.num_harmonics < 1:
            raise ValueError("num_harmonics must be >= 1")
        if self.envelope_smoothness <= 0:
            raise ValueError("envelope_smoothness must be > 0")
        if self.prior_blur_time < 0:
            raise ValueError("prior_blur_time must be >= 0")


def make_synthetic_dataset(spec: SyntheticDatasetSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic list of (clean, prior) pairs for ``spec``."""
    rng = seeded_rng(spec.seed)
    w = (np.arange(spec.width) + 0.5) / spec.width
    h = (np.arange(spec.height) + 0.5) / spec.height
    samples = []
    for _ in range(spec.count):
        x = np.zeros((spec.width, spec.height))
        for _ in range(spec.num_harmonics):
            amp = rng.uniform(0.4, 1.0)
            fw, fh = rng.uniform(0.5, 3.5, size=2)
            pw, ph = rng.uniform(0.0, 2.0 * np.pi, size=2)
            x += amp * np.outer(
                np.cos(2.0 * np.pi * fw * w + pw), np.cos(2.0 * np.pi * fh * h + ph)
            )
        cw, ch = rng.uniform(0.25, 0.75, size=2)
        sw, sh = spec.envelope_smoothness * rng.uniform(0.8, 1.25, size=2)
        x *= np.exp(
            -((w - cw)[:, None] ** 2 / (2.0 * sw**2))
            - ((h - ch)[None, :] ** 2 / (2.0 * sh**2))
        )
        peak = np.abs(x).max()
        if peak > 0:
            x /= peak
        samples.append((x, blur(x, spec.prior_blur_time)))
    return samples


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings; Adam moment estimation with (0.9, 0.999, 1e-8).

    Step indices are drawn uniformly from {1, ..., N} (never 0, whose target
    is the identity). ``stop_below_loss`` ends training early once an epoch's
    mean loss falls below it; checkpoints are written every
    ``checkpoint_interval`` epochs when a directory is set.
    """

    epochs: int
    batch_size: int = 16
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    checkpoint_interval: int = 0
    checkpoint_dir: str | None = None
    stop_below_loss: float | None = None

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")


class AdamOptimizer:
    """Adam with bias correction, updating parameter arrays in place."""

    def __init__(
        self,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None
        self._t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self._t += 1
        b1, b2 = self.beta1, self.beta2
        correction = self.learning_rate * np.sqrt(1.0 - b2**self._t) / (1.0 - b1**self._t)
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= correction * m / (np.sqrt(v) + self.eps)


def draw_step_index(rng: RandomSource, n_steps: int) -> int:
    """Uniform training step index over {1, ..., n_steps}."""
    return int(rng.integers(1, n_steps + 1))


def _corrupt_batch(
    batch: list[tuple[np.ndarray, np.ndarray]],
    process: ProcessConfig,
    rng: RandomSource,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int]]:
    """Stacked (x0, u, xn) arrays with per-item fresh step index and noise."""
    x0s, us, xns, steps = [], [], [], []
    for x0, u in batch:
        n = draw_step_index(rng, process.n_steps)
        draw = draw_noise(process, x0.shape, rng)
        x0s.append(x0)
        us.append(u)
        xns.append(noising(process, x0, u, n, draw))
        steps.append(n)
    return np.stack(x0s), np.stack(us), np.stack(xns), steps


def _batch_loss_and_grads(model: ConvRestorer, x0, u, xn, steps, workspace=None):
    inputs = np.stack([xn, u], axis=-1)
    acts, cols = model._stack_forward(inputs, workspace)
    pred = acts[-1][..., 0] + u
    residual = pred - x0
    per_item = (residual**2).reshape(len(x0), -1).mean(axis=1)
    if not np.all(np.isfinite(per_item)):
        bad = int(np.argmax(~np.isfinite(per_item)))
        raise RuntimeError(
            f"non-finite training loss for batch item {bad} (step index n={steps[bad]})"
        )
    loss = float(per_item.mean())
    g_out = (2.0 / residual.size) * residual
    grads_w, grads_b, _ = model._stack_backward(
        acts, cols, g_out[..., None], workspace, need_input_grad=False
    )
    grads = []
    for gw, gb in zip(grads_w, grads_b):
        grads.extend((gw, gb))
    return loss, grads


def train_step(
    model: ConvRestorer,
    optimizer: AdamOptimizer,
    batch: list[tuple[np.ndarray, np.ndarray]],
    process: ProcessConfig,
    rng: RandomSource,
    workspace: Workspace | None = None,
) -> tuple[ConvRestorer, float]:
    """One optimizer update on a batch of (clean, prior) pairs.

    Returns the updated model and the mean batch loss (before the update).
    """
    if not batch:
        raise ValueError("train_step needs a nonempty batch")
    x0, u, xn, steps = _corrupt_batch(batch, process, rng)
    loss, grads = _batch_loss_and_grads(model, x0, u, xn, steps, workspace)
    optimizer.step(model.parameters(), grads)
    return model, loss


def evaluate_loss(
    model: ConvRestorer,
    dataset: list[tuple[np.ndarray, np.ndarray]],
    process: ProcessConfig,
    rng: RandomSource,
    batch_size: int = 16,
) -> float:
    """Mean clean-data MSE over one corruption pass of ``dataset``, no updates."""
    if not dataset:
        raise ValueError("evaluate_loss needs a nonempty dataset")
    workspace = Workspace()
    total, count = 0.0, 0
    for start in range(0, len(dataset), batch_size):
        batch = dataset[start : start + batch_size]
        x0, u, xn, steps = _corrupt_batch(batch, process, rng)
        loss, _ = _batch_loss_and_grads(model, x0, u, xn, steps, workspace)
        total += loss * len(batch)
        count += len(batch)
    return total / count


def train_loop(
    model: ConvRestorer,
    dataset: list[tuple[np.ndarray, np.ndarray]],
    process: ProcessConfig,
    config: TrainConfig,
) -> tuple[ConvRestorer, list[float]]:
    """Epochs of shuffled minibatch updates; returns per-epoch mean losses."""
    if not dataset:
        raise ValueError("train_loop needs a nonempty dataset")
    rng = seeded_rng(config.seed)
    optimizer = AdamOptimizer(
        config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps
    )
    workspace = Workspace()
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(dataset))
        total, count = 0.0, 0
        for start in range(0, len(dataset), config.batch_size):
            batch = [dataset[i] for i in order[start : start + config.batch_size]]
            _, loss = train_step(model, optimizer, batch, process, rng, workspace)
            total += loss * len(batch)
            count += len(batch)
        history.append(total / count)
        if (
            config.checkpoint_interval > 0
            and config.checkpoint_dir is not None
            and (epoch + 1) % config.checkpoint_interval == 0
        ):
            os.makedirs(config.checkpoint_dir, exist_ok=True)
            save_model(
                model, os.path.join(config.checkpoint_dir, f"checkpoint_{epoch + 1:04d}.bin")
            )
        if config.stop_below_loss is not None and history[-1] < config.stop_below_loss:
            break
    return model, history


def write_loss_history(path, history: list[float]) -> None:
    """Loss history as CSV with an ``epoch,loss`` header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss"])
        for epoch, loss in enumerate(history, start=1):
            writer.writerow([epoch, repr(loss)])
