"""Inference-only numerical kernels for the face-emotion recognizer.

Tensors are numpy arrays laid out height x width x channels.  The network is a
small residual stack: an entry convolution, four blocks of depthwise +
pointwise convolution with batch normalization and a rectifier (identity
shortcut, 1x1 projection when widths change), 2x2 max pooling between blocks,
a pointwise head to the seven emotion logits, global average pooling, and a
softmax.  The winning class is the recognized emotion and its probability is
reported as the intensity.

When no trained weights are available, recognition is simulated instead by a
measured confusion matrix used as a noise channel: given the true emotion,
the predicted one is drawn from that emotion's column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .emotion import EMOTIONS, Emotion, read_labeled_matrix
from .errors import MissingWeightsError, NegativeEntryError, ShapeMismatchError

BN_EPS = 1e-5


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    e = np.exp(shifted)
    return e / e.sum()


def batchnorm_infer(x: np.ndarray, mean, variance, gamma, beta,
                    eps: float = BN_EPS) -> np.ndarray:
    """Channel-wise affine normalization: gamma * (x - mean) / sqrt(var + eps) + beta."""
    x = np.asarray(x, dtype=float)
    mean, variance = np.asarray(mean, dtype=float), np.asarray(variance, dtype=float)
    gamma, beta = np.asarray(gamma, dtype=float), np.asarray(beta, dtype=float)
    if np.any(variance < 0):
        raise ValueError("variance must be non-negative")
    channels = x.shape[-1] if x.ndim > 1 else x.shape[0]
    for name, arr in (("mean", mean), ("variance", variance), ("gamma", gamma), ("beta", beta)):
        if arr.ndim > 1 or (arr.ndim == 1 and arr.shape[0] not in (1, channels)):
            raise ShapeMismatchError(f"{name} does not broadcast over {channels} channels")
    return gamma * (x - mean) / np.sqrt(variance + eps) + beta


def _pad_same(x: np.ndarray, k: int) -> np.ndarray:
    p = k // 2
    return np.pad(x, ((p, p), (p, p), (0, 0)))


def conv2d(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """Full convolution, stride 1, same padding.  kernels: K x K x C_in x C_out."""
    k = kernels.shape[0]
    if kernels.shape[1] != k or x.ndim != 3 or kernels.shape[2] != x.shape[2]:
        raise ShapeMismatchError(f"kernels {kernels.shape} do not fit input {x.shape}")
    windows = sliding_window_view(_pad_same(x, k), (k, k), axis=(0, 1))
    return np.einsum("hwckl,klco->hwo", windows, kernels, optimize=True)


def depthwise_conv(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """Per-channel spatial convolution.  kernels: K x K x C."""
    k = kernels.shape[0]
    if kernels.shape[1] != k or x.ndim != 3 or kernels.shape[2] != x.shape[2]:
        raise ShapeMismatchError(f"depthwise kernels {kernels.shape} do not fit input {x.shape}")
    windows = sliding_window_view(_pad_same(x, k), (k, k), axis=(0, 1))
    return np.einsum("hwckl,klc->hwc", windows, kernels, optimize=True)


def pointwise_conv(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """1x1 cross-channel mix.  kernels: C_in x C_out."""
    if x.ndim != 3 or kernels.ndim != 2 or kernels.shape[0] != x.shape[2]:
        raise ShapeMismatchError(f"pointwise kernels {kernels.shape} do not fit input {x.shape}")
    return x @ kernels


def depthwise_separable_conv(x: np.ndarray, depthwise: np.ndarray,
                             pointwise: np.ndarray) -> np.ndarray:
    """Spatial-then-channel factorized convolution."""
    return pointwise_conv(depthwise_conv(x, depthwise), pointwise)


def separable_parameter_count(k: int, c_in: int, c_out: int) -> int:
    return k * k * c_in + c_in * c_out


def full_parameter_count(k: int, c_in: int, c_out: int) -> int:
    return k * k * c_in * c_out


def residual_apply(x: np.ndarray, inner: Callable[[np.ndarray], np.ndarray],
                   projection: Optional[np.ndarray] = None) -> np.ndarray:
    """Shortcut sum H = F(x) + x, with an optional 1x1 projection when the
    channel counts differ."""
    fx = inner(x)
    shortcut = x
    if fx.shape != x.shape:
        if (projection is not None and fx.shape[:2] == x.shape[:2]
                and projection.shape == (x.shape[2], fx.shape[2])):
            shortcut = pointwise_conv(x, projection)
        else:
            raise ShapeMismatchError(
                f"residual shapes differ ({x.shape} vs {fx.shape}) and no projection fits")
    return fx + shortcut


def max_pool2(x: np.ndarray) -> np.ndarray:
    h, w, c = x.shape
    if h % 2 or w % 2:
        raise ShapeMismatchError(f"2x2 pooling needs even spatial dims, got {x.shape}")
    return x.reshape(h // 2, 2, w // 2, 2, c).max(axis=(1, 3))


def global_average_pool(x: np.ndarray) -> np.ndarray:
    return x.mean(axis=(0, 1))


# --------------------------------------------------------------------- network


@dataclass
class BnParams:
    gamma: np.ndarray
    beta: np.ndarray
    mean: np.ndarray
    variance: np.ndarray

    def __post_init__(self):
        if np.any(self.variance <= 0):
            raise ValueError("batch-norm running variance must be positive")

    def apply(self, x: np.ndarray) -> np.ndarray:
        return batchnorm_infer(x, self.mean, self.variance, self.gamma, self.beta)


@dataclass
class BlockSpec:
    depthwise: np.ndarray        # K x K x C_in
    pointwise: np.ndarray        # C_in x C_out
    bn: BnParams                 # over C_out
    projection: Optional[np.ndarray] = None  # C_in x C_out shortcut when widths change

    def apply(self, x: np.ndarray) -> np.ndarray:
        f = lambda t: relu(self.bn.apply(depthwise_separable_conv(t, self.depthwise, self.pointwise)))
        return max_pool2(residual_apply(x, f, self.projection))


@dataclass
class NetworkSpec:
    """Ordered layer weights for the recognizer forward pass."""

    entry_kernel: np.ndarray     # K x K x 1 x C0
    entry_bn: BnParams
    blocks: list[BlockSpec]
    head_pointwise: np.ndarray   # C_last x 7
    input_hw: tuple[int, int] = (48, 48)

    def __post_init__(self):
        if self.head_pointwise.shape[1] != len(EMOTIONS):
            raise ShapeMismatchError("head must emit one logit per emotion")

    def forward(self, image: np.ndarray) -> np.ndarray:
        x = relu(self.entry_bn.apply(conv2d(image, self.entry_kernel)))
        for block in self.blocks:
            x = block.apply(x)
        logits = global_average_pool(pointwise_conv(x, self.head_pointwise))
        return softmax(logits)

    # ---- weight container: .npz with named blobs plus a JSON shape manifest

    def save(self, path) -> None:
        blobs: dict[str, np.ndarray] = {
            "entry_kernel": self.entry_kernel,
            "entry_gamma": self.entry_bn.gamma, "entry_beta": self.entry_bn.beta,
            "entry_mean": self.entry_bn.mean, "entry_variance": self.entry_bn.variance,
            "head_pointwise": self.head_pointwise,
        }
        for i, b in enumerate(self.blocks):
            blobs[f"block{i}_depthwise"] = b.depthwise
            blobs[f"block{i}_pointwise"] = b.pointwise
            blobs[f"block{i}_gamma"] = b.bn.gamma
            blobs[f"block{i}_beta"] = b.bn.beta
            blobs[f"block{i}_mean"] = b.bn.mean
            blobs[f"block{i}_variance"] = b.bn.variance
            if b.projection is not None:
                blobs[f"block{i}_projection"] = b.projection
        manifest = {"blocks": len(self.blocks), "input_hw": list(self.input_hw),
                    "shapes": {k: list(v.shape) for k, v in blobs.items()}}
        blobs["manifest"] = np.frombuffer(json.dumps(manifest).encode(), dtype=np.uint8)
        np.savez(path, **blobs)

    @classmethod
    def load(cls, path) -> "NetworkSpec":
        with np.load(path) as blobs:
            manifest = json.loads(bytes(blobs["manifest"]).decode())
            entry_bn = BnParams(blobs["entry_gamma"], blobs["entry_beta"],
                                blobs["entry_mean"], blobs["entry_variance"])
            blocks = []
            for i in range(manifest["blocks"]):
                projection = blobs.get(f"block{i}_projection")
                blocks.append(BlockSpec(
                    blobs[f"block{i}_depthwise"], blobs[f"block{i}_pointwise"],
                    BnParams(blobs[f"block{i}_gamma"], blobs[f"block{i}_beta"],
                             blobs[f"block{i}_mean"], blobs[f"block{i}_variance"]),
                    projection))
            return cls(blobs["entry_kernel"], entry_bn, blocks,
                       blobs["head_pointwise"], tuple(manifest["input_hw"]))

    @classmethod
    def random(cls, rng: np.random.Generator,
               widths: tuple[int, ...] = (8, 16, 32, 64),
               kernel_size: int = 3) -> "NetworkSpec":
        """Randomly weighted instance, handy as a fixture; not trained."""
        def bn(c):
            return BnParams(rng.normal(1.0, 0.1, c), rng.normal(0.0, 0.1, c),
                            rng.normal(0.0, 0.1, c), rng.uniform(0.5, 1.5, c))
        k = kernel_size
        entry = rng.normal(0.0, 0.3, (k, k, 1, widths[0]))
        blocks = []
        c_in = widths[0]
        for c_out in widths:
            projection = None if c_in == c_out else rng.normal(0.0, 0.3, (c_in, c_out))
            blocks.append(BlockSpec(
                rng.normal(0.0, 0.3, (k, k, c_in)),
                rng.normal(0.0, 0.3, (c_in, c_out)),
                bn(c_out), projection))
            c_in = c_out
        head = rng.normal(0.0, 0.3, (c_in, len(EMOTIONS)))
        return cls(entry, bn(widths[0]), blocks, head)


def classify(image: np.ndarray, spec: Optional[NetworkSpec]) -> tuple[Emotion, float]:
    """Run the forward pass on a normalized grayscale image and report the
    winning emotion with its probability as the intensity."""
    if spec is None:
        raise MissingWeightsError("no network weights loaded")
    image = np.asarray(image, dtype=float)
    if image.ndim == 2:
        image = image[:, :, None]
    if image.shape != (*spec.input_hw, 1):
        raise ShapeMismatchError(
            f"expected a {spec.input_hw[0]}x{spec.input_hw[1]} grayscale image, got {image.shape}")
    probs = spec.forward(image)
    idx = int(np.argmax(probs))
    return EMOTIONS[idx], float(probs[idx])


# --------------------------------------------------------------------- noise channel


@dataclass(frozen=True)
class ConfusionMatrix:
    """Recognition error model: entry [predicted, true] is the probability of
    reporting ``predicted`` when the real emotion is ``true``.  Columns are
    renormalized to sum to one at load time; the raw sums are kept so drift in
    a published table stays visible."""

    matrix: np.ndarray
    raw_column_sums: tuple[float, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (len(EMOTIONS), len(EMOTIONS)):
            raise ShapeMismatchError(f"need a 7x7 matrix, got {m.shape}")
        if np.any(m < 0):
            raise NegativeEntryError("confusion entries must be non-negative")
        sums = m.sum(axis=0)
        if np.any(sums <= 0):
            raise ValueError("every true-emotion column needs probability mass")
        object.__setattr__(self, "raw_column_sums",
                           tuple(float(s) for s in (self.raw_column_sums or sums)))
        object.__setattr__(self, "matrix", m / sums)

    def column(self, true: Emotion) -> np.ndarray:
        return self.matrix[:, true.index]

    @classmethod
    def identity(cls) -> "ConfusionMatrix":
        return cls(np.eye(len(EMOTIONS)))


def load_confusion_matrix(path) -> ConfusionMatrix:
    matrix, rows, cols = read_labeled_matrix(path)
    canonical = np.empty_like(matrix)
    for i, re_ in enumerate(rows):
        for j, ce in enumerate(cols):
            canonical[re_.index, ce.index] = matrix[i, j]
    return ConfusionMatrix(canonical)


def default_confusion_matrix() -> ConfusionMatrix:
    from importlib.resources import files
    return load_confusion_matrix(files("petsocial.data") / "confusion_matrix.csv")


def noisy_recognize(true: Emotion, matrix: ConfusionMatrix,
                    rng: np.random.Generator) -> Emotion:
    """Sample the predicted emotion from the true emotion's column."""
    idx = int(rng.choice(len(EMOTIONS), p=matrix.column(true)))
    return EMOTIONS[idx]
