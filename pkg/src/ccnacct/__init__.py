"""Push-interest accounting for content-centric networks."""

from .core import (
    AcctFlag,
    ContentObject,
    Interest,
    Nack,
    NackReason,
    Name,
    PInt,
    longest_prefix_match,
)
from .codec import decode, encode, encoded_size

__all__ = [
    "AcctFlag",
    "ContentObject",
    "Interest",
    "Nack",
    "NackReason",
    "Name",
    "PInt",
    "decode",
    "encode",
    "encoded_size",
    "longest_prefix_match",
]

__version__ = "0.1.0"
