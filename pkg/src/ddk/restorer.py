"""Clean-data predictors: (corrupted grid, prior) -> clean estimate.

All predictors implement one step-free interface: ``predict(xn, u)`` sees
only the corrupted grid and the prior, never the step index. Any notion of
"how corrupted is this" has to be inferred from the values themselves.

Three implementations:

* :class:`OracleRestorer` ignores its inputs and returns a known clean grid;
  it exists to verify samplers exactly.
* :class:`LinearRidgeModel` predicts ``a * xn + b * u + c`` elementwise, fit
  in closed form by 3x3 ridge normal equations.
* :class:`ConvRestorer` is a small residual convolutional network:
  four 3x3 same-padded conv layers, channels 2 -> 32 -> 32 -> 32 -> 1, tanh
  on hidden layers, linear output, plus the prior added back to the output.
  Forward and analytic backward are implemented here directly.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .grids import require_same_shape
from .rng import RandomSource


@runtime_checkable
class Restorer(Protocol):
    def predict(self, xn: np.ndarray, u: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class OracleRestorer:
    """Constant predictor returning a known clean grid, for sampler tests."""

    x0: np.ndarray

    def predict(self, xn: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.x0.copy()


# ---------------------------------------------------------------------------
# Closed-form linear baseline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearRidgeModel:
    """Elementwise affine predictor a * xn + b * u + c."""

    a: float
    b: float
    c: float = 0.0

    def predict(self, xn: np.ndarray, u: np.ndarray) -> np.ndarray:
        require_same_shape(xn, u, "xn", "u")
        return self.a * xn + self.b * u + self.c


def ridge_fit(
    triples: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
    regularizer: float = 1e-6,
) -> LinearRidgeModel:
    """Fit the affine baseline by ridge-regularized least squares.

    Minimizes sum ||a*xn + b*u + c - x0||^2 + reg*(a^2 + b^2 + c^2) over all
    pixels of all triples, via the 3x3 normal equations. Needs at least three
    triples; with ``regularizer`` 0 a singular system raises instead of
    returning garbage.
    """
    if len(triples) < 3:
        raise ValueError(f"ridge_fit needs at least 3 triples, got {len(triples)}")
    if regularizer < 0:
        raise ValueError(f"regularizer must be >= 0, got {regularizer}")

    # Accumulate X^T X and X^T y for features (xn, u, 1).
    gram = np.zeros((3, 3))
    rhs = np.zeros(3)
    for xn, u, x0 in triples:
        require_same_shape(xn, u, "xn", "u")
        require_same_shape(xn, x0, "xn", "x0")
        xf, uf, yf = xn.ravel(), u.ravel(), x0.ravel()
        m = xf.size
        gram += np.array(
            [
                [xf @ xf, xf @ uf, xf.sum()],
                [xf @ uf, uf @ uf, uf.sum()],
                [xf.sum(), uf.sum(), float(m)],
            ]
        )
        rhs += np.array([xf @ yf, uf @ yf, yf.sum()])

    system = gram + regularizer * np.eye(3)
    if regularizer == 0.0 and np.linalg.matrix_rank(system) < 3:
        raise ValueError(
            "singular normal equations; pass a regularizer > 0 for degenerate data"
        )
    a, b, c = np.linalg.solve(system, rhs)
    return LinearRidgeModel(float(a), float(b), float(c))


# ---------------------------------------------------------------------------
# Convolutional restorer
# ---------------------------------------------------------------------------

CONV_CHANNELS = (2, 32, 32, 32, 1)
CONV_KERNEL = 3

MODEL_MAGIC = b"DDKM"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    """Raised for malformed model files."""


def _architecture_hash() -> int:
    descriptor = "conv{k}x{k}:{ch};tanh-hidden;residual-prior".format(
        k=CONV_KERNEL, ch="-".join(str(c) for c in CONV_CHANNELS)
    )
    return zlib.crc32(descriptor.encode("ascii")) & 0xFFFFFFFF


class Workspace:
    """Reusable scratch buffers for batched passes.

    Avoids re-faulting tens of megabytes of fresh pages on every training
    step. Single-owner: one workspace must not be shared across concurrent
    passes.
    """

    def __init__(self):
        self._buffers: dict = {}

    def buffer(self, key, shape: tuple[int, ...]) -> np.ndarray:
        full_key = (key, shape)
        buf = self._buffers.get(full_key)
        if buf is None:
            buf = np.empty(shape)
            self._buffers[full_key] = buf
        return buf


def _im2col(x: np.ndarray, k: int, out: np.ndarray | None = None) -> np.ndarray:
    """Patch matrix of a channels-last batch for a stride-1 'same' convolution.

    x: (B, W, H, C) -> (B*W*H, k*k*C), row (b, i, j) holding the zero-padded
    k x k neighborhood of that pixel, ordered (p, q, c). Laid out so the
    convolution is one large matrix product against :func:`_kernel_matrix`.
    The (q, c) run of a patch row is contiguous in the padded source, so the
    gather is k wide strided copies.
    """
    b, w, h, c = x.shape
    pad = k // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    if out is None:
        out = np.empty((b, w, h, k, k * c))
    sb, si, sj, sc = xp.strides
    for p in range(k):
        out[:, :, :, p, :] = np.lib.stride_tricks.as_strided(
            xp[:, p:, :, :], shape=(b, w, h, k * c), strides=(sb, si, sj, sc)
        )
    return out.reshape(b * w * h, k * k * c)


def _kernel_matrix(w: np.ndarray) -> np.ndarray:
    """(C_out, C_in, k, k) kernel as a (k*k*C_in, C_out) matrix for im2col."""
    c_out = w.shape[0]
    return np.ascontiguousarray(w.transpose(2, 3, 1, 0).reshape(-1, c_out))


def _rotated_kernel_matrix(w: np.ndarray) -> np.ndarray:
    """Matrix of the input-gradient kernel: spatial flip, channels swapped."""
    return _kernel_matrix(np.ascontiguousarray(w[:, :, ::-1, ::-1].transpose(1, 0, 2, 3)))


def _weight_grad_from_cols(cols: np.ndarray, g: np.ndarray, c_in: int, k: int) -> np.ndarray:
    """Kernel gradient from the cached patch matrix and the output gradient.

    cols: (B*W*H, k*k*C_in), g: (B, W, H, C_out) -> (C_out, C_in, k, k).
    """
    c_out = g.shape[-1]
    flat = cols.T @ g.reshape(-1, c_out)  # (k*k*C_in, C_out)
    return np.ascontiguousarray(flat.reshape(k, k, c_in, c_out).transpose(3, 2, 0, 1))


class ConvRestorer:
    """Small residual conv net; prediction = conv_stack(stack(xn, u)) + u."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        expected = list(zip(CONV_CHANNELS[1:], CONV_CHANNELS[:-1]))
        if len(weights) != len(expected) or len(biases) != len(expected):
            raise ValueError("wrong number of layers for the fixed architecture")
        for w, b, (c_out, c_in) in zip(weights, biases, expected):
            if w.shape != (c_out, c_in, CONV_KERNEL, CONV_KERNEL) or b.shape != (c_out,):
                raise ValueError(
                    f"layer shape mismatch: got weight {w.shape}, bias {b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError("model parameters must be finite")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]

    @classmethod
    def initialized(cls, rng: RandomSource) -> "ConvRestorer":
        """Fan-in scaled Gaussian init; tiny output layer so the initial
        prediction is close to the prior."""
        weights, biases = [], []
        for li, (c_in, c_out) in enumerate(zip(CONV_CHANNELS[:-1], CONV_CHANNELS[1:])):
            fan_in = c_in * CONV_KERNEL * CONV_KERNEL
            std = 0.01 if li == len(CONV_CHANNELS) - 2 else 1.0 / np.sqrt(fan_in)
            weights.append(std * rng.standard_normal((c_out, c_in, CONV_KERNEL, CONV_KERNEL)))
            biases.append(np.zeros(c_out))
        return cls(weights, biases)

    @classmethod
    def zeroed(cls) -> "ConvRestorer":
        weights = [
            np.zeros((c_out, c_in, CONV_KERNEL, CONV_KERNEL))
            for c_in, c_out in zip(CONV_CHANNELS[:-1], CONV_CHANNELS[1:])
        ]
        biases = [np.zeros(c_out) for c_out in CONV_CHANNELS[1:]]
        return cls(weights, biases)

    def parameters(self) -> list[np.ndarray]:
        """Trainable arrays in serialization order: weight then bias per layer."""
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    # -- forward / backward -------------------------------------------------
    #
    # Activations are kept channels-last, (B, W, H, C), so each layer is one
    # large (B*W*H, k*k*C_in) @ (k*k*C_in, C_out) matrix product; the patch
    # matrices are cached for the weight gradients.

    def _stack_forward(
        self, inputs: np.ndarray, workspace: Workspace | None = None
    ) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Activations and patch matrices of the conv stack; inputs (B, W, H, 2).

        Returns ([input, act_1, act_2, act_3, linear_out], patch matrices).
        With a workspace, returned arrays alias its buffers and are only
        valid until the next pass through the same workspace.
        """
        b, w, h, _ = inputs.shape
        acts = [inputs]
        cols: list[np.ndarray] = []
        x = inputs
        last = len(self.weights) - 1
        for li, (kernel, bias) in enumerate(zip(self.weights, self.biases)):
            cbuf = None
            if workspace is not None:
                c_in = kernel.shape[1]
                cbuf = workspace.buffer(
                    ("cols", li), (b, w, h, CONV_KERNEL, CONV_KERNEL * c_in)
                )
            patch = _im2col(x, CONV_KERNEL, out=cbuf)
            cols.append(patch)
            z = (patch @ _kernel_matrix(kernel)).reshape(b, w, h, -1) + bias
            x = z if li == last else np.tanh(z)
            acts.append(x)
        return acts, cols

    def _stack_backward(
        self,
        acts: list[np.ndarray],
        cols: list[np.ndarray],
        g_out: np.ndarray,
        workspace: Workspace | None = None,
        need_input_grad: bool = True,
    ) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray | None]:
        """Gradients of the conv stack given ``g_out`` at its linear output.

        Returns (weight grads, bias grads, gradient at the stack input or
        None when ``need_input_grad`` is off).
        """
        grads_w: list[np.ndarray] = [None] * len(self.weights)  # type: ignore[list-item]
        grads_b: list[np.ndarray] = [None] * len(self.biases)  # type: ignore[list-item]
        b, w, h, _ = acts[0].shape
        last = len(self.weights) - 1
        g = g_out
        for li in range(last, -1, -1):
            if li != last:
                out = acts[li + 1]
                g = g * (1.0 - out * out)  # tanh'
            c_in = self.weights[li].shape[1]
            grads_w[li] = _weight_grad_from_cols(cols[li], g, c_in, CONV_KERNEL)
            grads_b[li] = g.sum(axis=(0, 1, 2))
            if li == 0 and not need_input_grad:
                return grads_w, grads_b, None
            gbuf = None
            if workspace is not None:
                c_out = g.shape[-1]
                gbuf = workspace.buffer(
                    ("gcols", li), (b, w, h, CONV_KERNEL, CONV_KERNEL * c_out)
                )
            g = (
                _im2col(g, CONV_KERNEL, out=gbuf)
                @ _rotated_kernel_matrix(self.weights[li])
            ).reshape(b, w, h, c_in)
        return grads_w, grads_b, g

    def predict_batch(self, xn: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Predictions for batches xn, u of shape (B, W, H)."""
        inputs = np.stack([xn, u], axis=-1)
        acts, _ = self._stack_forward(inputs)
        return acts[-1][..., 0] + u

    def predict(self, xn: np.ndarray, u: np.ndarray) -> np.ndarray:
        require_same_shape(xn, u, "xn", "u")
        return self.predict_batch(xn[None], u[None])[0]


@dataclass
class ConvGradients:
    """Parameter and input gradients of one ConvRestorer forward pass."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    d_xn: np.ndarray
    d_u: np.ndarray

    def parameters(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


def conv_forward(model: ConvRestorer, xn: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Deterministic forward pass: conv_stack(stack(xn, u)) + u."""
    return model.predict(xn, u)


def conv_backward(
    model: ConvRestorer, xn: np.ndarray, u: np.ndarray, grad_out: np.ndarray
) -> ConvGradients:
    """Exact gradients of the forward pass contracted with ``grad_out``.

    The residual connection contributes ``grad_out`` itself to the prior
    gradient, on top of the path through the stacked input.
    """
    require_same_shape(xn, u, "xn", "u")
    require_same_shape(xn, grad_out, "xn", "grad_out")
    inputs = np.stack([xn, u], axis=-1)[None]
    acts, cols = model._stack_forward(inputs)
    grads_w, grads_b, g_in = model._stack_backward(acts, cols, grad_out[None, ..., None])
    return ConvGradients(
        weights=grads_w,
        biases=grads_b,
        d_xn=g_in[0, ..., 0],
        d_u=g_in[0, ..., 1] + grad_out,
    )


# ---------------------------------------------------------------------------
# Model file format
# ---------------------------------------------------------------------------
#
# Flat binary, little endian:
#   bytes 0..3    magic "DDKM"
#   bytes 4..7    format version (u32)
#   bytes 8..11   architecture hash (u32, CRC-32 of the layer descriptor)
#   bytes 12..    parameters as float64, for each layer in order:
#                 kernel (C-order), then bias.


def save_model(model: ConvRestorer, path) -> None:
    blob = bytearray()
    blob += MODEL_MAGIC
    blob += struct.pack("<II", MODEL_VERSION, _architecture_hash())
    for p in model.parameters():
        blob += np.ascontiguousarray(p, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(blob)


def load_model(path) -> ConvRestorer:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12:
        raise ModelFormatError(
            f"model file truncated: {len(blob)} bytes, header needs 12"
        )
    if blob[0:4] != MODEL_MAGIC:
        raise ModelFormatError(f"bad magic {blob[0:4]!r} at byte offset 0")
    version, arch = struct.unpack("<II", blob[4:12])
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported format version {version} at byte offset 4")
    if arch != _architecture_hash():
        raise ModelFormatError(
            f"architecture hash {arch:#010x} at byte offset 8 does not match "
            f"{_architecture_hash():#010x}"
        )
    counts = []
    for c_in, c_out in zip(CONV_CHANNELS[:-1], CONV_CHANNELS[1:]):
        counts.append(c_out * c_in * CONV_KERNEL * CONV_KERNEL)
        counts.append(c_out)
    expected = 12 + 8 * sum(counts)
    if len(blob) != expected:
        raise ModelFormatError(
            f"model file length {len(blob)} != expected {expected} "
            f"(payload starts at byte offset 12)"
        )
    flat = np.frombuffer(blob, dtype="<f8", offset=12)
    weights, biases = [], []
    pos = 0
    for c_in, c_out in zip(CONV_CHANNELS[:-1], CONV_CHANNELS[1:]):
        k = c_out * c_in * CONV_KERNEL * CONV_KERNEL
        weights.append(
            flat[pos : pos + k].reshape(c_out, c_in, CONV_KERNEL, CONV_KERNEL).copy()
        )
        pos += k
        biases.append(flat[pos : pos + c_out].copy())
        pos += c_out
    return ConvRestorer(weights, biases)
