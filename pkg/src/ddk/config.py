"""Process selection and parameters.

One config value selects which of the five forward processes is in effect
and carries every knob the closed-form formulas need:

* ``grad-tts-dt``: variance-preserving additive Gaussian path driven by a
  linear noise-rate ramp from ``beta0`` to ``beta1``.
* ``rfag``: straight path toward the prior plus additive Gaussian noise of
  scale ``sigma``.
* ``rfmg``: straight path toward the prior scaled by multiplicative Gaussian
  noise ``1 + sigma * eps``.
* ``blurring``: deterministic heat-kernel smoothing toward the prior.
* ``mixture``: blurring mean plus frequency-shaped Gaussian noise with
  per-coefficient variance ``mixture_scale`` times the (negated) heat
  eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ProcessKind(str, Enum):
    GRAD_TTS_DT = "grad-tts-dt"
    RFAG = "rfag"
    RFMG = "rfmg"
    BLURRING = "blurring"
    MIXTURE = "mixture"


@dataclass(frozen=True)
class ProcessConfig:
    """Which forward process to run, and its parameters.

    ``n_steps`` is the total number of discrete steps N; step indices run
    from 0 (clean) to N (fully corrupted). ``sigma`` is ignored by
    ``grad-tts-dt`` and ``blurring``; ``beta0``/``beta1`` matter only for
    ``grad-tts-dt``; ``mixture_scale`` only for ``mixture``.
    """

    kind: ProcessKind
    n_steps: int = 10
    sigma: float = 0.6
    beta0: float = 0.05
    beta1: float = 20.0
    mixture_scale: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", ProcessKind(self.kind))
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.beta0 <= 0 or self.beta1 <= self.beta0:
            raise ValueError(
                f"need 0 < beta0 < beta1, got beta0={self.beta0}, beta1={self.beta1}"
            )
        if self.mixture_scale <= 0:
            raise ValueError(f"mixture_scale must be > 0, got {self.mixture_scale}")
