"""Monte Carlo simulator of data-importance aware radio resource allocation
for edge machine learning: centralized sample upload with importance-driven
ARQ/MRC retransmission, and distributed model upload with dataset-size
proportional allocation and importance-aware aggregation."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
