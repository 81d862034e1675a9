"""Centralized scheme: per-sample upload with importance-driven ARQ/MRC
retransmission and an incremental model update after every sample, under
a total budget of resource blocks.

A sample's first block is always spent before judgement (the receiver can
only judge a received, hence noisy, estimate). If that single block
already meets the importance threshold the judged estimate is kept as the
final one; otherwise retransmissions accumulate combined SNR and the
payload is corrupted once at the final combined SNR.
"""

from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .channel import corrupt_payload, draw_block, linear_to_db, mrc_combine
from .learner import Importance, LinearModel, evaluate, judge, update
from .rng import stream

TRACE_HEADER = "i,importance,blocks,spent_total,combined_snr_db,accuracy"


class BudgetExhausted(Exception):
    """A transmission was requested with no blocks remaining."""


@dataclass(frozen=True)
class ThresholdPolicy:
    """Importance-dependent required combined SNR (linear ratios)."""

    gamma_high: float
    gamma_low: float

    def __post_init__(self):
        if not (self.gamma_high > 0 and self.gamma_low > 0):
            raise ValueError("SNR thresholds must be > 0")
        if self.gamma_high < self.gamma_low:
            raise ValueError(
                f"gamma_high {self.gamma_high} must be >= gamma_low {self.gamma_low}"
            )

    @classmethod
    def from_db(cls, high_db, low_db):
        return cls(10.0 ** (high_db / 10.0), 10.0 ** (low_db / 10.0))


def threshold_for(importance, policy):
    """Required combined SNR for a sample of the given importance."""
    return policy.gamma_high if importance is Importance.MORE else policy.gamma_low


@dataclass
class BlockBudget:
    """Total block budget and blocks spent so far."""

    total: int
    spent: int = 0

    def __post_init__(self):
        if self.total < 1:
            raise ValueError(f"budget must be >= 1 blocks, got {self.total}")

    @property
    def remaining(self):
        return self.total - self.spent

    def spend(self, n=1):
        if self.spent + n > self.total:
            raise BudgetExhausted(f"cannot spend {n} blocks, {self.remaining} remaining")
        self.spent += n


@dataclass(frozen=True)
class TraceRow:
    index: int
    importance: Importance
    blocks: int
    spent_total: int
    combined_snr: float
    accuracy: float = None  # filled when the update was evaluated


@dataclass
class RunTrace:
    """Per-update records of one centralized run plus the final accuracy."""

    rows: list
    final_accuracy: float
    blocks_spent: int
    converged: bool = False

    def write_csv(self, path):
        with open(path, "w") as f:
            f.write(TRACE_HEADER + "\n")
            for r in self.rows:
                acc = "" if r.accuracy is None else repr(r.accuracy)
                f.write(
                    f"{r.index},{r.importance.value},{r.blocks},{r.spent_total},"
                    f"{linear_to_db(r.combined_snr)!r},{acc}\n"
                )


@dataclass(frozen=True)
class ConvergenceConfig:
    """Sliding-window validation-accuracy stop rule (off unless passed)."""

    window: int = 50
    tol: float = 1e-3
    val_fraction: float = 0.1


def transmit_until_threshold(payload, threshold, budget, tx_snr, fading_rng,
                             noise_rng, initial=()):
    """ARQ with MRC: draw blocks until the combined SNR reaches `threshold`
    or the budget runs out, then corrupt the payload once at the final SNR.

    `initial` carries draws already spent on this sample (the pre-judgement
    transmission); when empty, the first block is drawn and charged here.
    """
    draws = list(initial)
    if not draws:
        if budget.remaining < 1:
            raise BudgetExhausted("no blocks left for the initial transmission")
        budget.spend()
        draws.append(draw_block(fading_rng, tx_snr))
    combined = mrc_combine(draws)
    while combined < threshold and budget.remaining > 0:
        budget.spend()
        d = draw_block(fading_rng, tx_snr)
        draws.append(d)
        combined += d.received_snr
    return corrupt_payload(payload, combined, noise_rng, blocks_used=len(draws))


def run_centralized(train, test, policy, tx_snr, n_blocks, cfg, seed, *,
                    eval_every=1, convergence=None):
    """Run the per-sample transmit/judge/retransmit/update loop.

    Samples are taken in a seeded shuffled order; the loop stops when the
    block budget is exhausted, the sample stream runs out, or the optional
    convergence rule fires. `eval_every` controls how often test accuracy
    is recorded in the trace (0 evaluates only after the final update).
    """
    if len(train) == 0:
        raise ValueError("training dataset is empty")
    fading = stream(seed, "fading")
    noise = stream(seed, "noise")
    shuffle = stream(seed, "shuffle")
    train_rng = stream(seed, "train")

    order = shuffle.permutation(len(train))
    val_feats = val_labels = None
    recent = None
    if convergence is not None:
        n_val = max(1, int(round(convergence.val_fraction * len(train))))
        if n_val >= len(train):
            raise ValueError("validation holdout would consume the whole training set")
        val_idx, order = order[:n_val], order[n_val:]
        val_feats = train.features[val_idx]
        val_labels = train.labels[val_idx]
        recent = deque(maxlen=convergence.window)

    budget = BlockBudget(n_blocks)
    model = LinearModel.zeros(train.num_classes, train.dim)
    capacity = min(len(order), n_blocks)
    buf_feats = np.empty((capacity, train.dim))
    buf_labels = np.empty(capacity, dtype=np.int64)
    rows = []
    converged = False
    count = 0

    for idx in order:
        if budget.remaining == 0:
            break
        payload = train.features[idx]
        label = int(train.labels[idx])

        budget.spend()
        first = draw_block(fading, tx_snr)
        est = corrupt_payload(payload, first.received_snr, noise, blocks_used=1)
        imp = judge(model, est.payload_estimate, label)
        thr = threshold_for(imp, policy)
        if est.combined_snr >= thr or budget.remaining == 0:
            final = est
        else:
            final = transmit_until_threshold(
                payload, thr, budget, tx_snr, fading, noise, initial=(first,)
            )

        buf_feats[count] = final.payload_estimate
        buf_labels[count] = label
        count += 1
        model = update(model, buf_feats[:count], buf_labels[:count], cfg, train_rng)

        acc = None
        if eval_every and count % eval_every == 0:
            acc = evaluate(model, test.features, test.labels)
        rows.append(TraceRow(count, imp, final.blocks_used, budget.spent,
                             final.combined_snr, acc))

        if recent is not None:
            recent.append(evaluate(model, val_feats, val_labels))
            if len(recent) == convergence.window and max(recent) - min(recent) < convergence.tol:
                converged = True
                break

    if rows[-1].accuracy is None:
        final_accuracy = evaluate(model, test.features, test.labels)
        rows[-1] = replace(rows[-1], accuracy=final_accuracy)
    else:
        final_accuracy = rows[-1].accuracy
    return RunTrace(rows, final_accuracy, budget.spent, converged)
