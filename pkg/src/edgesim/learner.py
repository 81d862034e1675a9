"""One-vs-rest linear SVM: prediction, importance judgement, incremental
hinge-loss SGD training, and test-set evaluation.

Training follows the 1/(lam * t) step schedule where t is the lifetime
step counter carried on the model, so per-sample incremental retraining
warm-starts instead of re-shrinking the weights to zero on every update.
"""

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernels import hinge_sgd_pass

MODEL_MAGIC = b"EDGM"


class Importance(Enum):
    """Two-level importance of a received sample under the current model."""

    MORE = "more"
    LESS = "less"


@dataclass(frozen=True)
class TrainConfig:
    """Ridge strength and number of epochs per model update."""

    lam: float = 1e-4
    epochs: int = 1

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


@dataclass(frozen=True)
class LinearModel:
    """Per-class weight rows with the bias in the last column; value-like.

    `steps` counts lifetime SGD steps and drives the step-size schedule.
    """

    weights: np.ndarray  # (C, d+1) float64
    steps: int = 0

    def __post_init__(self):
        if self.weights.ndim != 2 or self.weights.shape[1] < 2:
            raise ValueError("weights must be a (C, d+1) matrix with d >= 1")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")

    @classmethod
    def zeros(cls, num_classes, dim):
        return cls(np.zeros((num_classes, dim + 1)))

    @property
    def num_classes(self):
        return self.weights.shape[0]

    @property
    def dim(self):
        return self.weights.shape[1] - 1


def _check_dim(model, dim):
    if dim != model.dim:
        raise ValueError(f"data dimension {dim} does not match model dimension {model.dim}")


def predict(model, data):
    """Predicted class index: argmax of per-class scores, ties to the lowest index."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 1:
        raise ValueError("predict expects a single feature vector")
    _check_dim(model, data.shape[0])
    scores = model.weights[:, :-1] @ data + model.weights[:, -1]
    return int(np.argmax(scores))


def predict_batch(model, features):
    """Predicted class indices for a feature matrix."""
    features = np.asarray(features, dtype=np.float64)
    _check_dim(model, features.shape[1])
    scores = features @ model.weights[:, :-1].T + model.weights[:, -1]
    return np.argmax(scores, axis=1)


def judge(model, data, label):
    """More important iff the current model misclassifies the received data."""
    return Importance.MORE if predict(model, data) != label else Importance.LESS


def update(model, features, labels, cfg, rng):
    """Run cfg.epochs of hinge-loss SGD over the whole buffer, warm-started
    from `model`; returns the new model."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if len(features) == 0:
        raise ValueError("cannot update on an empty buffer")
    if len(features) != len(labels):
        raise ValueError("feature/label counts differ")
    _check_dim(model, features.shape[1])
    if int(labels.max()) >= model.num_classes or int(labels.min()) < 0:
        raise ValueError("labels must lie in [0, num_classes)")
    weights = model.weights.copy()
    t = model.steps
    for _ in range(cfg.epochs):
        order = rng.permutation(len(features)).astype(np.int64)
        t = hinge_sgd_pass(weights, features, labels, order, cfg.lam, t)
    return LinearModel(weights, steps=t)


def evaluate(model, features, labels):
    """Fraction of samples whose prediction matches the label."""
    if len(features) == 0:
        raise ValueError("cannot evaluate on an empty test set")
    return float(np.mean(predict_batch(model, features) == np.asarray(labels)))


def hinge_objective(model, features, labels, lam):
    """Average one-vs-rest hinge loss plus the ridge term (lam/2)*||W||^2."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    scores = features @ model.weights[:, :-1].T + model.weights[:, -1]
    ysign = -np.ones_like(scores)
    ysign[np.arange(len(labels)), labels] = 1.0
    hinge = np.maximum(0.0, 1.0 - ysign * scores).sum(axis=1)
    return float(np.mean(hinge) + 0.5 * lam * np.sum(model.weights ** 2))


def save_model(model, path):
    """Write the EDGM binary format: magic, u32 C, u32 d, float64 rows (LE)."""
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<II", model.num_classes, model.dim))
        f.write(model.weights.astype("<f8").tobytes(order="C"))


def load_model(path):
    """Read a model written by save_model."""
    with open(path, "rb") as f:
        buf = f.read()
    if buf[:4] != MODEL_MAGIC:
        raise ValueError(f"{path}: bad model magic {buf[:4]!r}, expected {MODEL_MAGIC!r}")
    if len(buf) < 12:
        raise ValueError(f"{path}: truncated model header")
    n_classes, dim = struct.unpack_from("<II", buf, 4)
    expected = 12 + n_classes * (dim + 1) * 8
    if len(buf) != expected:
        raise ValueError(f"{path}: model payload is {len(buf) - 12} bytes, "
                         f"expected {expected - 12}")
    weights = np.frombuffer(buf, dtype="<f8", offset=12).reshape(n_classes, dim + 1)
    return LinearModel(weights.astype(np.float64))
