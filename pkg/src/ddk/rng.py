"""Seeded randomness and frozen per-trajectory noise draws.

The generator is numpy's PCG64 bit generator with ziggurat standard normals
(``numpy.random.default_rng``). This pairing is frozen: the same 64-bit seed
yields the same normal stream on every run and platform, which is what makes
whole pipelines reproducible bit for bit.

A :class:`NoiseDraw` holds every random tensor one trajectory needs, drawn
exactly once. Reusing the same draw across all steps of a sampling run keeps
the run a deterministic function of the initial sample; drawing fresh per
step is the ablation alternative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ProcessConfig, ProcessKind

RandomSource = np.random.Generator


def seeded_rng(seed: int) -> RandomSource:
    """Deterministic random source for ``seed`` (PCG64 + ziggurat normals)."""
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class NoiseDraw:
    """The frozen random tensors of one trajectory.

    Only the tensor the selected process uses is populated:
    ``eps1`` for rfag, ``eps2`` for rfmg (used as ``1 + sigma * eps2``),
    ``z_signal`` for grad-tts-dt, ``z_freq`` (frequency-indexed) for mixture.
    Blurring is deterministic and carries none.
    """

    eps1: np.ndarray | None = None
    eps2: np.ndarray | None = None
    z_signal: np.ndarray | None = None
    z_freq: np.ndarray | None = None

    def require(self, field: str, shape: tuple[int, int]) -> np.ndarray:
        tensor = getattr(self, field)
        if tensor is None:
            raise ValueError(f"noise draw is missing the {field!r} tensor")
        if tensor.shape != shape:
            raise ValueError(
                f"noise draw tensor {field!r} has shape {tensor.shape}, expected {shape}"
            )
        return tensor


EMPTY_DRAW = NoiseDraw()

_FIELD_FOR_KIND = {
    ProcessKind.GRAD_TTS_DT: "z_signal",
    ProcessKind.RFAG: "eps1",
    ProcessKind.RFMG: "eps2",
    ProcessKind.MIXTURE: "z_freq",
}


def draw_noise(config: ProcessConfig, shape: tuple[int, int], rng: RandomSource) -> NoiseDraw:
    """Draw the noise tensors one trajectory of ``config.kind`` needs.

    Exactly the tensors the process uses are populated; the blurring process
    is deterministic and gets an empty draw.
    """
    w, h = shape
    if w < 1 or h < 1:
        raise ValueError(f"shape must be positive, got {shape}")
    field = _FIELD_FOR_KIND.get(config.kind)
    if field is None:
        return EMPTY_DRAW
    return NoiseDraw(**{field: rng.standard_normal((w, h))})
