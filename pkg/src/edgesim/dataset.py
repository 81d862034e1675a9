"""Dataset handling: IDX parsing, synthetic blob corpora, payload power
normalization, stratified subsets and device-level splits."""

import math
import struct
from dataclasses import dataclass, replace

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Malformed IDX file; the message names the offending field."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with integer class labels.

    `power_scale` records the factor the raw feature values were divided
    by during power normalization, so raw pixel values can be
    reconstructed exactly. Split products may be empty; the loading and
    synthesis constructors always return at least one sample.
    """

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray    # (n,) int64
    num_classes: int
    power_scale: float = 1.0

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if len(self.features) != len(self.labels):
            raise ValueError("feature/label counts differ")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if len(self.labels) and int(self.labels.max()) >= self.num_classes:
            raise ValueError("labels must lie in [0, num_classes)")
        if len(self.labels) and int(self.labels.min()) < 0:
            raise ValueError("labels must be nonnegative")

    def __len__(self):
        return len(self.features)

    @property
    def dim(self):
        return self.features.shape[1]


def normalize_power(ds):
    """Scale features so the mean squared entry is 1 (the P_SIG convention)."""
    if len(ds) == 0:
        return ds
    mean_sq = float(np.mean(ds.features ** 2))
    if mean_sq <= 0:
        raise ValueError("cannot power-normalize an all-zero feature matrix")
    s = math.sqrt(mean_sq)
    return replace(ds, features=ds.features / s, power_scale=ds.power_scale * s)


def _read_be_u32(buf, offset, path, what):
    if offset + 4 > len(buf):
        raise IdxFormatError(f"{path}: truncated header while reading {what}")
    return struct.unpack_from(">I", buf, offset)[0]


def load_idx(images_path, labels_path):
    """Load an IDX image/label file pair into a power-normalized Dataset.

    Big-endian format: image magic 0x00000803 with dims (n, rows, cols) and
    u8 pixels; label magic 0x00000801 with dim (n) and u8 labels. Pixels
    are scaled to [0, 1] and then power-normalized over the whole set.
    """
    with open(images_path, "rb") as f:
        img_buf = f.read()
    with open(labels_path, "rb") as f:
        lab_buf = f.read()

    magic = _read_be_u32(img_buf, 0, images_path, "image magic")
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(
            f"{images_path}: image magic is 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}"
        )
    n = _read_be_u32(img_buf, 4, images_path, "image count")
    rows = _read_be_u32(img_buf, 8, images_path, "row count")
    cols = _read_be_u32(img_buf, 12, images_path, "column count")
    if n < 1:
        raise IdxFormatError(f"{images_path}: image count must be >= 1, got {n}")
    expected = 16 + n * rows * cols
    if len(img_buf) != expected:
        raise IdxFormatError(
            f"{images_path}: pixel payload is {len(img_buf) - 16} bytes, "
            f"expected {n * rows * cols}"
        )

    magic = _read_be_u32(lab_buf, 0, labels_path, "label magic")
    if magic != LABEL_MAGIC:
        raise IdxFormatError(
            f"{labels_path}: label magic is 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}"
        )
    n_labels = _read_be_u32(lab_buf, 4, labels_path, "label count")
    if len(lab_buf) != 8 + n_labels:
        raise IdxFormatError(
            f"{labels_path}: label payload is {len(lab_buf) - 8} bytes, expected {n_labels}"
        )
    if n_labels != n:
        raise IdxFormatError(
            f"label count {n_labels} in {labels_path} does not match "
            f"image count {n} in {images_path}"
        )

    pixels = np.frombuffer(img_buf, dtype=np.uint8, offset=16).reshape(n, rows * cols)
    labels = np.frombuffer(lab_buf, dtype=np.uint8, offset=8).astype(np.int64)
    features = pixels.astype(np.float64) / 255.0
    ds = Dataset(features, labels, num_classes=int(labels.max()) + 1)
    return normalize_power(ds)


def save_idx(ds, images_path, labels_path, image_shape=None):
    """Write a Dataset back to an IDX pair at u8 pixel precision.

    Raw pixel values are reconstructed as features * power_scale * 255 and
    rounded; `image_shape` defaults to a square when the dimension is a
    perfect square, else (1, dim).
    """
    n, d = ds.features.shape
    if image_shape is None:
        side = int(math.isqrt(d))
        image_shape = (side, side) if side * side == d else (1, d)
    rows, cols = image_shape
    if rows * cols != d:
        raise ValueError(f"image shape {image_shape} does not match dimension {d}")
    raw = np.rint(ds.features * ds.power_scale * 255.0)
    if raw.min() < 0 or raw.max() > 255:
        raise ValueError("reconstructed pixels fall outside u8 range")
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        f.write(raw.astype(np.uint8).tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, n))
        f.write(ds.labels.astype(np.uint8).tobytes())


def synth_blobs(num_classes, dim, n_per_class, separation, rng):
    """Balanced Gaussian blobs: class c centered at separation * e_(c mod dim),
    unit isotropic spread, power-normalized."""
    if num_classes < 1 or dim < 1 or n_per_class < 1:
        raise ValueError("num_classes, dim and n_per_class must all be >= 1")
    if not separation > 0:
        raise ValueError(f"separation must be > 0, got {separation}")
    labels = np.repeat(np.arange(num_classes, dtype=np.int64), n_per_class)
    features = rng.standard_normal((num_classes * n_per_class, dim))
    for c in range(num_classes):
        features[labels == c, c % dim] += separation
    return normalize_power(Dataset(features, labels, num_classes))


@dataclass(frozen=True)
class SplitSpec:
    """Either a K-way random-size disjoint split or a 2-device size-ratio split."""

    num_devices: int
    ratio: float = None  # |D1| / |D2| when set; requires num_devices == 2

    def __post_init__(self):
        if self.num_devices < 1:
            raise ValueError(f"num_devices must be >= 1, got {self.num_devices}")
        if self.ratio is not None:
            if not self.ratio > 0:
                raise ValueError(f"ratio must be > 0, got {self.ratio}")
            if self.num_devices != 2:
                raise ValueError("ratio mode requires exactly 2 devices")

    @classmethod
    def random(cls, num_devices):
        return cls(num_devices=num_devices)

    @classmethod
    def size_ratio(cls, ratio):
        return cls(num_devices=2, ratio=ratio)


def _subset(ds, indices):
    return Dataset(
        ds.features[indices], ds.labels[indices], ds.num_classes, ds.power_scale
    )


def _ratio_split(ds, ratio, rng):
    # class-stratified largest-remainder split hitting round(n * r / (1 + r))
    n = len(ds)
    frac = ratio / (1.0 + ratio)
    target = int(round(n * frac))
    quotas = {}
    remainders = []
    for c in range(ds.num_classes):
        n_c = int(np.sum(ds.labels == c))
        exact = n_c * frac
        quotas[c] = int(math.floor(exact))
        remainders.append((-(exact - quotas[c]), c))
    leftover = target - sum(quotas.values())
    for _, c in sorted(remainders):
        if leftover <= 0:
            break
        if quotas[c] < int(np.sum(ds.labels == c)):
            quotas[c] += 1
            leftover -= 1
    first, second = [], []
    for c in range(ds.num_classes):
        idx_c = np.flatnonzero(ds.labels == c)
        idx_c = idx_c[rng.permutation(len(idx_c))]
        first.append(idx_c[: quotas[c]])
        second.append(idx_c[quotas[c]:])
    return [
        _subset(ds, np.concatenate(first)),
        _subset(ds, np.concatenate(second)),
    ]


def split(ds, spec, rng):
    """Partition `ds` into disjoint per-device sub-datasets.

    Random mode draws K - 1 distinct cut points, so device sizes are a
    uniformly random composition of n (every device gets at least one
    sample). Ratio mode splits each class at the requested size ratio.
    """
    n = len(ds)
    if spec.num_devices > n:
        raise ValueError(f"cannot split {n} samples across {spec.num_devices} devices")
    if spec.ratio is not None:
        return _ratio_split(ds, spec.ratio, rng)
    perm = rng.permutation(n)
    if spec.num_devices == 1:
        return [_subset(ds, perm)]
    cuts = np.sort(rng.choice(np.arange(1, n), size=spec.num_devices - 1, replace=False))
    return [_subset(ds, part) for part in np.split(perm, cuts)]


def stratified_subset(ds, n_total, rng):
    """Class-stratified random subset of `n_total` samples."""
    if n_total < 1 or n_total > len(ds):
        raise ValueError(f"subset size {n_total} not in [1, {len(ds)}]")
    base = n_total // ds.num_classes
    extra = n_total % ds.num_classes
    picks = []
    for c in range(ds.num_classes):
        want = base + (1 if c < extra else 0)
        idx_c = np.flatnonzero(ds.labels == c)
        if want > len(idx_c):
            raise ValueError(f"class {c} has only {len(idx_c)} samples, need {want}")
        chosen = rng.permutation(len(idx_c))[:want]
        picks.append(idx_c[chosen])
    return _subset(ds, np.concatenate(picks))
