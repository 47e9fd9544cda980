"""Metric hashing: loss functions, a trainable hashing head, and code inference.

The head is a single tanh layer mapping D-dimensional feature vectors to B
soft code entries in (-1, +1); binarization turns those into B-bit codes.
Training minimizes a weighted sum of a margin triplet loss, a bit balance
loss, and a quantization loss by full-batch gradient descent.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .codes import HashCode

HEAD_MAGIC = b"HQHD"
HEAD_VERSION = 1

DEFAULT_DIM = 128
DEFAULT_BITS = 128
DEFAULT_LAMBDA_TRIPLET = 1.0
DEFAULT_LAMBDA_BALANCE = 0.5
DEFAULT_LAMBDA_QUANTIZATION = 0.5


def default_margin(bits: int) -> float:
    """Default triplet margin, scaled to code width (2 at 16 bits)."""
    return 2.0 * bits / 16.0


class TrainingDiverged(RuntimeError):
    """Raised when the training loss stops being finite."""

    def __init__(self, step: int, loss: float):
        self.step = step
        self.loss = loss
        super().__init__(f"training diverged at step {step}: loss={loss!r}")


@dataclass(frozen=True)
class HashingHead:
    """Single tanh layer plus the loss weights it was (or will be) trained with."""

    weights: np.ndarray  # (bits, dim)
    bias: np.ndarray  # (bits,)
    lambda_triplet: float = DEFAULT_LAMBDA_TRIPLET
    lambda_balance: float = DEFAULT_LAMBDA_BALANCE
    lambda_quantization: float = DEFAULT_LAMBDA_QUANTIZATION
    margin: float = DEFAULT_BITS / 8.0

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ValueError(f"inconsistent head shapes: W{w.shape}, b{b.shape}")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("head parameters must be finite")
        for name in ("lambda_triplet", "lambda_balance", "lambda_quantization"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.margin <= 0:
            raise ValueError("margin must be > 0")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @property
    def bits(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def random(cls, dim: int = DEFAULT_DIM, bits: int = DEFAULT_BITS, seed: int = 0,
               **kwargs) -> HashingHead:
        """Gaussian init scaled like 1/sqrt(dim); bias zero."""
        rng = np.random.default_rng(seed)
        w = rng.standard_normal((bits, dim)) / np.sqrt(dim)
        kwargs.setdefault("margin", default_margin(bits))
        return cls(weights=w, bias=np.zeros(bits), **kwargs)


@dataclass(frozen=True)
class Triplet:
    """Anchor/positive/negative feature vectors sharing one dimension."""

    anchor: np.ndarray
    positive: np.ndarray
    negative: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.anchor, dtype=np.float64)
        p = np.asarray(self.positive, dtype=np.float64)
        n = np.asarray(self.negative, dtype=np.float64)
        if not (a.shape == p.shape == n.shape) or a.ndim != 1:
            raise ValueError("triplet members must be 1-d vectors of equal dimension")
        object.__setattr__(self, "anchor", a)
        object.__setattr__(self, "positive", p)
        object.__setattr__(self, "negative", n)


def _as_feature(x, dim: int) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != dim:
        raise ValueError(f"expected a feature vector of dimension {dim}, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError("feature vector has non-finite entries")
    return v


def forward(head: HashingHead, x) -> np.ndarray:
    """Soft code tanh(W x + b); every entry strictly inside (-1, +1)."""
    v = _as_feature(x, head.dim)
    return np.tanh(head.weights @ v + head.bias)


def forward_batch(head: HashingHead, xs: np.ndarray) -> np.ndarray:
    """Soft codes for an (N, D) feature matrix, one row per vector."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != head.dim:
        raise ValueError(f"expected (N, {head.dim}) features, got shape {xs.shape}")
    return np.tanh(xs @ head.weights.T + head.bias)


def sign_binarize(soft: np.ndarray) -> HashCode:
    """Bit j is 1 when entry j >= 0; an exact zero maps to 1."""
    s = np.asarray(soft, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("soft code must be a non-empty 1-d vector")
    return HashCode.from_bits((s >= 0).astype(int).tolist())


def binarize_batch(soft: np.ndarray) -> list[int]:
    """Code values (ints) for an (N, B) soft code matrix, bit j from column j."""
    s = np.asarray(soft)
    bits = np.packbits(s >= 0, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in bits]


def infer_code(head: HashingHead, x) -> HashCode:
    """Binary code for one feature vector; deterministic for fixed head and x."""
    return sign_binarize(forward(head, x))


def triplet_loss(anchor, positive, negative, margin: float) -> float:
    """max(0, ||a-p||^2 - ||a-n||^2 + margin) on soft codes."""
    a = np.asarray(anchor, dtype=np.float64)
    p = np.asarray(positive, dtype=np.float64)
    n = np.asarray(negative, dtype=np.float64)
    if not (a.shape == p.shape == n.shape):
        raise ValueError("soft codes must have equal length")
    if margin <= 0:
        raise ValueError("margin must be > 0")
    d_ap = float(np.sum((a - p) ** 2))
    d_an = float(np.sum((a - n) ** 2))
    return max(0.0, d_ap - d_an + margin)


def bit_balance_loss(batch) -> float:
    """Mean squared per-bit batch mean; zero iff every bit balances over the batch."""
    s = np.asarray(batch, dtype=np.float64)
    if s.ndim == 1:
        s = s[None, :]
    if s.ndim != 2 or s.shape[0] == 0 or s.shape[1] == 0:
        raise ValueError("batch must be a non-empty list of equal-length soft codes")
    means = s.mean(axis=0)
    return float(np.mean(means**2))


def quantization_loss(soft) -> float:
    """Mean squared deviation of |entry| from 1; zero iff the code is exactly +-1."""
    s = np.asarray(soft, dtype=np.float64)
    return float(np.mean((np.abs(s) - 1.0) ** 2))


def _stack_triplets(head: HashingHead, triplets: Sequence[Triplet]) -> tuple[np.ndarray, ...]:
    if len(triplets) == 0:
        raise ValueError("triplet list must be non-empty")
    anchors = np.stack([t.anchor for t in triplets])
    positives = np.stack([t.positive for t in triplets])
    negatives = np.stack([t.negative for t in triplets])
    if anchors.shape[1] != head.dim:
        raise ValueError(f"triplet dimension {anchors.shape[1]} != head dimension {head.dim}")
    return anchors, positives, negatives


def total_loss(head: HashingHead, triplets: Sequence[Triplet]) -> float:
    """Weighted sum of mean triplet loss, bit balance over the whole batch of
    forward outputs (3 per triplet), and mean quantization loss."""
    loss, _, _ = loss_gradients(head, triplets)
    return loss


def loss_gradients(head: HashingHead, triplets: Sequence[Triplet]):
    """Total loss and its analytic gradients (dW, db).

    The batch for the balance and quantization terms is every forward output:
    anchors, positives and negatives of all triplets, each occurrence counted.
    """
    anchors, positives, negatives = _stack_triplets(head, triplets)
    t = anchors.shape[0]
    b = head.bits

    xs = np.concatenate([anchors, positives, negatives])  # (3T, D)
    soft = np.tanh(xs @ head.weights.T + head.bias)  # (3T, B)
    s_a, s_p, s_n = soft[:t], soft[t : 2 * t], soft[2 * t :]

    diff_ap = s_a - s_p
    diff_an = s_a - s_n
    per_triplet = np.sum(diff_ap**2, axis=1) - np.sum(diff_an**2, axis=1) + head.margin
    active = per_triplet > 0
    tri = float(np.sum(per_triplet[active])) / t if active.any() else 0.0

    n_all = soft.shape[0]
    means = soft.mean(axis=0)
    balance = float(np.mean(means**2))
    quant = float(np.mean((np.abs(soft) - 1.0) ** 2))

    loss = (
        head.lambda_triplet * tri
        + head.lambda_balance * balance
        + head.lambda_quantization * quant
    )

    # dL/dsoft, assembled term by term.
    grad_soft = np.zeros_like(soft)
    if head.lambda_triplet > 0 and active.any():
        w = head.lambda_triplet / t
        mask = active[:, None]
        grad_soft[:t] += w * 2.0 * (diff_ap - diff_an) * mask
        grad_soft[t : 2 * t] += w * -2.0 * diff_ap * mask
        grad_soft[2 * t :] += w * 2.0 * diff_an * mask
    if head.lambda_balance > 0:
        grad_soft += head.lambda_balance * 2.0 * means / (b * n_all)
    if head.lambda_quantization > 0:
        grad_soft += (
            head.lambda_quantization * 2.0 * (np.abs(soft) - 1.0) * np.sign(soft) / (b * n_all)
        )

    grad_z = grad_soft * (1.0 - soft**2)  # tanh'
    grad_w = grad_z.T @ xs
    grad_b = grad_z.sum(axis=0)
    return loss, grad_w, grad_b


def train(head: HashingHead, triplets: Sequence[Triplet], steps: int,
          learning_rate: float) -> HashingHead:
    """Full-batch gradient descent; returns a new head, the input is untouched."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if learning_rate < 0:
        raise ValueError("learning_rate must be >= 0")
    w = head.weights.copy()
    b = head.bias.copy()
    current = replace(head, weights=w, bias=b)
    for step in range(steps):
        loss, grad_w, grad_b = loss_gradients(current, triplets)
        if not np.isfinite(loss):
            raise TrainingDiverged(step, loss)
        w = w - learning_rate * grad_w
        b = b - learning_rate * grad_b
        current = replace(current, weights=w, bias=b)
    return current


def extract_features(bands: Mapping[str, np.ndarray], dim: int = DEFAULT_DIM) -> np.ndarray:
    """Deterministic baseline extractor for raw pixel grids.

    Concatenates per-band (mean, std) in sorted band-name order with a 4x4
    mean-pooled grid of the first band (sorted order), then zero-pads or
    truncates to `dim`. Not a learned model; it only has to be deterministic
    and shape-compatible with the hashing head.
    """
    if not bands:
        raise ValueError("at least one band grid is required")
    names = sorted(bands)
    stats: list[float] = []
    grids = {}
    for name in names:
        g = np.asarray(bands[name], dtype=np.float64)
        if g.ndim != 2 or g.size == 0:
            raise ValueError(f"band {name!r} must be a non-empty 2-d grid")
        grids[name] = g
        stats.append(float(g.mean()))
        stats.append(float(g.std()))
    pooled = mean_pool_4x4(grids[names[0]]).ravel()
    raw = np.concatenate([np.asarray(stats), pooled])
    if raw.size >= dim:
        return raw[:dim].copy()
    return np.concatenate([raw, np.zeros(dim - raw.size)])


def mean_pool_4x4(grid: np.ndarray) -> np.ndarray:
    """Mean of each block in a 4x4 partition; tiny grids are repeated up to 4."""
    g = np.asarray(grid, dtype=np.float64)
    if g.shape[0] < 4:
        g = np.repeat(g, -(-4 // g.shape[0]), axis=0)
    if g.shape[1] < 4:
        g = np.repeat(g, -(-4 // g.shape[1]), axis=1)
    out = np.empty((4, 4))
    h, w = g.shape
    for i in range(4):
        for j in range(4):
            block = g[i * h // 4 : (i + 1) * h // 4, j * w // 4 : (j + 1) * w // 4]
            out[i, j] = block.mean()
    return out


def save_head(head: HashingHead, path) -> None:
    """Flat binary head file: magic, version, shapes, W, b, loss weights."""
    with open(path, "wb") as fh:
        fh.write(HEAD_MAGIC)
        fh.write(struct.pack("<HII", HEAD_VERSION, head.dim, head.bits))
        fh.write(np.ascontiguousarray(head.weights, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(head.bias, dtype="<f8").tobytes())
        fh.write(
            struct.pack(
                "<dddd",
                head.lambda_triplet,
                head.lambda_balance,
                head.lambda_quantization,
                head.margin,
            )
        )


def load_head(path) -> HashingHead:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != HEAD_MAGIC:
            raise ValueError(f"not a head file: bad magic {magic!r}")
        version, dim, bits = struct.unpack("<HII", fh.read(10))
        if version != HEAD_VERSION:
            raise ValueError(f"unsupported head file version {version}")
        w = np.frombuffer(fh.read(8 * bits * dim), dtype="<f8").reshape(bits, dim)
        b = np.frombuffer(fh.read(8 * bits), dtype="<f8")
        lt, lb, lq, margin = struct.unpack("<dddd", fh.read(32))
    return HashingHead(
        weights=w.copy(),
        bias=b.copy(),
        lambda_triplet=lt,
        lambda_balance=lb,
        lambda_quantization=lq,
        margin=margin,
    )
