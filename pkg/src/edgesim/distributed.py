"""Distributed scheme: one-shot local training per device, block allocation
proportional to dataset size, noisy repeated model upload, and
importance-aware aggregation, plus the equal-allocation and largest-only
baselines.

Each model copy rides one resource block with an independent fading draw;
copies are not MRC-combined, the aggregation sum itself performs the
averaging. Model payloads are power-normalized before transmission with
the scale carried as noiseless side information.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import corrupt_payload, draw_block
from .dataset import split
from .learner import LinearModel, evaluate, update
from .rng import stream

SCHEMES = ("proposed", "equal_allocation", "largest_only")

RUN_HEADER = "scheme,K,ratio,N,tx_snr_db,seed,accuracy"
PLAN_HEADER = "k,D_k,N_k"


class DegenerateAllocationError(ValueError):
    """Every device was allocated zero blocks; nothing can be aggregated."""


@dataclass(frozen=True)
class AllocationPlan:
    """Per-device block counts under a total budget."""

    counts: tuple
    sizes: tuple
    total: int

    def write_csv(self, path):
        with open(path, "w") as f:
            f.write(PLAN_HEADER + "\n")
            for k, (d_k, n_k) in enumerate(zip(self.sizes, self.counts)):
                f.write(f"{k},{d_k},{n_k}\n")


def allocate_blocks(sizes, n_blocks):
    """Proportional allocation: N_k = floor(D_k * N / sum(D)), in exact
    integer arithmetic."""
    sizes = tuple(int(s) for s in sizes)
    if any(s < 0 for s in sizes):
        raise ValueError("dataset sizes must be >= 0")
    total_size = sum(sizes)
    if total_size == 0:
        raise ValueError("total dataset size must be > 0")
    if n_blocks < 1:
        raise ValueError(f"block budget must be >= 1, got {n_blocks}")
    counts = tuple(s * n_blocks // total_size for s in sizes)
    return AllocationPlan(counts, sizes, int(n_blocks))


def local_train(ds, cfg, rng):
    """Full SGD training on the clean local dataset; an empty dataset
    contributes a zero model."""
    model = LinearModel.zeros(ds.num_classes, ds.dim)
    if len(ds) == 0:
        return model
    return update(model, ds.features, ds.labels, cfg, rng)


@dataclass
class ModelCopies:
    """Noisy flattened model payloads, one list per device."""

    per_device: list  # list of lists of (C*(d+1),) arrays
    shape: tuple      # (C, d+1)


def transmit_model(model, n_copies, tx_snr, fading_rng, noise_rng):
    """Transmit `n_copies` independent single-block copies of the model.

    The flattened weights are power-normalized before transmission and
    un-scaled on reception; the scale travels noiselessly like the labels.
    """
    if n_copies < 0:
        raise ValueError(f"copy count must be >= 0, got {n_copies}")
    flat = model.weights.ravel()
    scale = math.sqrt(float(np.mean(flat ** 2)))
    # a zero model has zero side-information scale, so the receiver
    # reconstructs exact zeros; blocks and draws are still consumed
    payload = flat / scale if scale > 0.0 else np.zeros_like(flat)
    copies = []
    for _ in range(n_copies):
        block = draw_block(fading_rng, tx_snr)
        est = corrupt_payload(payload, block.received_snr, noise_rng, blocks_used=1)
        copies.append(est.payload_estimate * scale)
    return copies


def aggregate_equal(models):
    """Coefficientwise mean of the local models."""
    if not models:
        raise ValueError("cannot aggregate an empty model list")
    shape = models[0].weights.shape
    for m in models:
        if m.weights.shape != shape:
            raise ValueError(f"model shape {m.weights.shape} does not match {shape}")
    mean = np.mean([m.weights for m in models], axis=0)
    return LinearModel(mean)


def aggregate_importance(copies, n_blocks):
    """Importance-aware aggregation: the double sum of all received copies
    divided by the total budget N (not by the number of copies sent)."""
    if n_blocks < 1:
        raise ValueError(f"block budget must be >= 1, got {n_blocks}")
    if all(len(dev) == 0 for dev in copies.per_device):
        raise DegenerateAllocationError("every device was allocated zero blocks")
    total = np.zeros(copies.shape)
    for dev in copies.per_device:
        for c in dev:
            total += c.reshape(copies.shape)
    return LinearModel(total / n_blocks)


def plan_for(scheme, sizes, n_blocks):
    """Block allocation for one of the three schemes."""
    k = len(sizes)
    if scheme == "proposed":
        return allocate_blocks(sizes, n_blocks)
    if scheme == "equal_allocation":
        if n_blocks < k:
            raise ValueError(f"equal allocation needs N >= K, got N={n_blocks}, K={k}")
        return AllocationPlan((n_blocks // k,) * k, tuple(int(s) for s in sizes), n_blocks)
    if scheme == "largest_only":
        counts = [0] * k
        counts[int(np.argmax(sizes))] = n_blocks  # ties go to the lowest index
        return AllocationPlan(tuple(counts), tuple(int(s) for s in sizes), n_blocks)
    raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")


@dataclass
class DistributedResult:
    """Outcome of one distributed run."""

    scheme: str
    accuracy: float
    plan: AllocationPlan
    global_model: LinearModel
    local_models: list
    degenerate_devices: tuple
    seed: int
    tx_snr_db: float
    ratio: float = None

    def csv_row(self):
        ratio = "" if self.ratio is None else repr(float(self.ratio))
        return (f"{self.scheme},{len(self.plan.sizes)},{ratio},{self.plan.total},"
                f"{self.tx_snr_db!r},{self.seed},{self.accuracy!r}")


def write_run_csv(results, path):
    with open(path, "w") as f:
        f.write(RUN_HEADER + "\n")
        for r in results:
            f.write(r.csv_row() + "\n")


def run_distributed(dataset, testset, split_spec, n_blocks, tx_snr, scheme, cfg, seed):
    """Split the data, train locals, allocate blocks per scheme, upload and
    aggregate, and evaluate the global model on the test set.

    All local models are trained regardless of scheme so that runs sharing
    a seed differ only in allocation and upload.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    split_rng = stream(seed, "split")
    train_rng = stream(seed, "train")
    fading = stream(seed, "fading")
    noise = stream(seed, "noise")

    parts = split(dataset, split_spec, split_rng)
    sizes = tuple(len(p) for p in parts)
    locals_ = [local_train(p, cfg, train_rng) for p in parts]
    degenerate = tuple(k for k, s in enumerate(sizes) if s == 0)

    plan = plan_for(scheme, sizes, n_blocks)
    per_device = [
        transmit_model(m, n_k, tx_snr, fading, noise)
        for m, n_k in zip(locals_, plan.counts)
    ]
    shape = locals_[0].weights.shape
    global_model = aggregate_importance(ModelCopies(per_device, shape), n_blocks)
    accuracy = evaluate(global_model, testset.features, testset.labels)
    return DistributedResult(
        scheme=scheme,
        accuracy=accuracy,
        plan=plan,
        global_model=global_model,
        local_models=locals_,
        degenerate_devices=degenerate,
        seed=seed,
        tx_snr_db=tx_snr.db,
        ratio=split_spec.ratio,
    )
