"""Orthonormal 2-D cosine transform and the heat-kernel blur operator.

Blurring a grid for time ``n`` multiplies each cosine coefficient (i, j) by
``exp(lambda_ij * n)`` where

    lambda_ij = -pi^2 * (i^2 / W^2 + j^2 / H^2)

is the heat-equation decay rate of that frequency pair. The transform is the
orthonormal type-II DCT, so Parseval's identity holds and lambda_00 = 0 keeps
the spatial mean untouched for any blur time. The operator is linear, forms a
semigroup in the time argument (blurring for a then b equals blurring for
a + b), and contracts everything except the mean.

Coefficients for very high frequencies underflow exp() to exactly 0 at large
blur times; that is the intended limit (fully averaged-out signal).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.fft import dctn, idctn

FrequencySpectrum = np.ndarray


def dct2_forward(x: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT-II coefficients of ``x``, same (W, H) shape."""
    return dctn(x, type=2, norm="ortho")


def dct2_inverse(spectrum: np.ndarray) -> np.ndarray:
    """Signal-domain grid for orthonormal DCT-II coefficients ``spectrum``."""
    return idctn(spectrum, type=2, norm="ortho")


@lru_cache(maxsize=64)
def _cached_eigenvalues(width: int, height: int) -> np.ndarray:
    i = np.arange(width, dtype=np.float64)
    j = np.arange(height, dtype=np.float64)
    lam = -np.pi**2 * (
        (i**2 / width**2)[:, None] + (j**2 / height**2)[None, :]
    )
    lam[0, 0] = 0.0  # exact zero for the mean mode
    lam.setflags(write=False)
    return lam


def heat_eigenvalues(width: int, height: int) -> np.ndarray:
    """Per-frequency heat decay rates, shape (width, height), all <= 0."""
    if width < 1 or height < 1:
        raise ValueError(f"grid dimensions must be >= 1, got ({width}, {height})")
    return _cached_eigenvalues(width, height)


def blur(x: np.ndarray, time: float) -> np.ndarray:
    """Heat-kernel blur of ``x`` for (possibly fractional) ``time`` >= 0."""
    if time < 0:
        raise ValueError(f"blur time must be >= 0, got {time}")
    lam = heat_eigenvalues(*x.shape)
    return dct2_inverse(np.exp(lam * time) * dct2_forward(x))
