import numpy as np
import pytest

from edgesim.dataset import synth_blobs
from edgesim.rng import stream


@pytest.fixture(scope="session")
def gain_draws():
    """One million gain-power draws shared by the distribution tests."""
    from edgesim.channel import TxSnr, draw_block

    rng = stream(123, "fading")
    tx = TxSnr(1.0)
    return np.array([draw_block(rng, tx).gain_power for _ in range(1_000_000)])


@pytest.fixture(scope="session")
def small_blobs():
    """Separable 3-class blobs in 12 dimensions (train, test)."""
    rng = stream(7, "data")
    train = synth_blobs(3, 12, 60, 10.0, rng)
    test = synth_blobs(3, 12, 30, 10.0, rng)
    return train, test
