"""Grid values shared by every stage of the pipeline.

A grid is a 2-D float64 array of shape (W, H): W time frames by H frequency
bins, row-major. Clean data, corrupted data, priors, and predictions all use
this one shape.
"""

from __future__ import annotations

import numpy as np

MelGrid = np.ndarray


def as_grid(values, name: str = "grid") -> np.ndarray:
    """Validate and return ``values`` as a 2-D float64 grid.

    Rejects empty dimensions and non-finite entries.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {x.shape}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(x)


def require_same_shape(a: np.ndarray, b: np.ndarray, a_name: str = "a", b_name: str = "b") -> None:
    if a.shape != b.shape:
        raise ValueError(
            f"shape mismatch: {a_name} is {a.shape}, {b_name} is {b.shape}"
        )
