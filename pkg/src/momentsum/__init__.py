"""Moment-summability toolkit for linear moment partial differential equations."""

from .errors import MomentSumError
from .sequences import Gevrey, GevreyLog, GammaMoment, PowerOf, Table, SequenceHandle
from .series import TSeries, ZSeries

__version__ = "0.1.0"

__all__ = [
    "MomentSumError",
    "SequenceHandle",
    "Gevrey",
    "GevreyLog",
    "GammaMoment",
    "PowerOf",
    "Table",
    "ZSeries",
    "TSeries",
    "__version__",
]
