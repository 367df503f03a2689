"""Closed-form message counts and per-link byte overhead of pInt reporting.

For ``gamma`` requests along a consumer-to-producer path with the content
cached at router ``Rc``, ``p_l`` counts messages on the consumer-to-cache
segment and ``p_r`` on the cache-to-producer segment.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .codec import encoded_size
from .core import AcctFlag, ContentObject, Name, PInt

DEFAULT_NAME_BYTES = 40


class Scheme(enum.Enum):
    ENCRYPTION = "ENCRYPTION"
    PINT = "PINT"
    CACHELESS = "CACHELESS"


@dataclass(frozen=True)
class SchemeCounts:
    p_l: int
    p_r: int
    gamma: int


def message_counts(scheme: Scheme, gamma: int) -> SchemeCounts:
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    scheme = Scheme(scheme)
    if scheme is Scheme.ENCRYPTION:
        # content interest/object from the cache plus one key exchange with P
        return SchemeCounts(4 * gamma, 2 * gamma, gamma)
    if scheme is Scheme.PINT:
        return SchemeCounts(2 * gamma, gamma, gamma)
    return SchemeCounts(2 * gamma, 2 * gamma, gamma)


def reference_name(name_bytes: int = DEFAULT_NAME_BYTES) -> Name:
    """A single-component name whose component is ``name_bytes`` long."""
    return Name((b"n" * name_bytes,))


def pint_size(name_bytes: int = DEFAULT_NAME_BYTES, origin: bytes = b"") -> int:
    return encoded_size(PInt(reference_name(name_bytes), AcctFlag.AGGREGATE, origin, 1))


def content_size(payload_bytes: int, name_bytes: int = DEFAULT_NAME_BYTES) -> int:
    co = ContentObject(reference_name(name_bytes), bytes(payload_bytes), AcctFlag.AGGREGATE, 1)
    return encoded_size(co)


def overhead_ratio(
    content_payload_bytes: int,
    header_bytes: int = DEFAULT_NAME_BYTES,
    link_index: int = 1,
    cache_link_index: int = 1,
    total_links: int = 2,
    origin: bytes = b"",
) -> float:
    """Extra pInt bytes on one link relative to the content object size.

    Links are numbered from 1 at the consumer; the cache sits at the far
    end of link ``cache_link_index``. Only links beyond the cache carry the
    pInt, so every other link contributes 0.
    """
    if not 1 <= link_index <= total_links:
        raise ValueError(f"link_index must lie in [1, {total_links}]")
    if not 1 <= cache_link_index <= total_links:
        raise ValueError(f"cache_link_index must lie in [1, {total_links}]")
    if content_payload_bytes < 0:
        raise ValueError("payload size must be non-negative")
    if link_index <= cache_link_index:
        return 0.0
    return pint_size(header_bytes, origin) / content_size(content_payload_bytes, header_bytes)


def overhead_series(
    links: Iterable[int], payloads: Iterable[int], header_bytes: int = DEFAULT_NAME_BYTES
) -> list[tuple[int, int, int, float]]:
    """Rows ``(total_links, link_index, payload, ratio)`` for a first-hop cache."""
    payloads = list(payloads)
    rows = []
    for n in links:
        for idx in range(1, n + 1):
            for size in payloads:
                rows.append((n, idx, size, overhead_ratio(size, header_bytes, idx, 1, n)))
    return rows


def total_overhead(total_links: int, payload: int, header_bytes: int = DEFAULT_NAME_BYTES) -> float:
    """Sum of per-link ratios along a path with a first-hop cache."""
    return sum(overhead_ratio(payload, header_bytes, i, 1, total_links) for i in range(1, total_links + 1))
