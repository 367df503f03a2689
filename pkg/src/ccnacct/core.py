"""Names, messages and longest-prefix matching.

All message types are frozen value objects; constructors enforce the
field limits documented in ``docs/formats.md`` so that every instance is
encodable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, TypeVar, Union
from urllib.parse import quote_from_bytes, unquote_to_bytes

from .errors import FieldError, OversizeField

MAX_COMPONENTS = 32
MAX_COMPONENT_LEN = 255
MAX_NAME_ENCODED = 8192
MAX_INTEREST_PAYLOAD = 4096
MAX_CONTENT_PAYLOAD = 16 * 1024 * 1024
MAX_VALIDATION = 4096
MAX_ORIGIN = 1024
MAX_CDATA_BLOB = 4096
MAX_CDATA_ITEMS = 0xFFFF
MAX_COUNT = 0xFFFFFFFF
MAX_EXPIRY = 0xFFFFFFFFFFFFFFFF
MAX_REQUIREMENTS = 1024

URI_SCHEME = "lci:"


class AcctFlag(enum.IntEnum):
    NONE = 0
    AGGREGATE = 1
    DISTINCT = 2
    INDIVIDUAL = 3


class NackReason(enum.IntEnum):
    MISSING_CRSD = 1
    BAD_CRSD = 2


def _check_len(label: str, value: bytes, limit: int) -> None:
    if not isinstance(value, (bytes, bytearray)):
        raise FieldError(f"{label} must be bytes, got {type(value).__name__}")
    if len(value) > limit:
        raise OversizeField(f"{label} is {len(value)} bytes, limit {limit}")


@dataclass(frozen=True, slots=True)
class Name:
    """Hierarchical content name made of raw byte components.

    The empty name (no components) is the root prefix ``/``; it matches
    every name in a FIB but never names content.
    """

    components: tuple[bytes, ...] = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        comps = tuple(bytes(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "_hash", hash(comps))
        if len(comps) > MAX_COMPONENTS:
            raise OversizeField(f"name has {len(comps)} components, limit {MAX_COMPONENTS}")
        size = 2
        for c in comps:
            if not c:
                raise FieldError("name components must be non-empty")
            if len(c) > MAX_COMPONENT_LEN:
                raise OversizeField(f"component is {len(c)} bytes, limit {MAX_COMPONENT_LEN}")
            size += 2 + len(c)
        if size > MAX_NAME_ENCODED:
            raise OversizeField(f"name encodes to {size} bytes, limit {MAX_NAME_ENCODED}")

    @classmethod
    def parse(cls, text: str) -> "Name":
        """Parse ``lci:/a/b`` (or plain ``/a/b``) with percent-escapes."""
        if text.startswith(URI_SCHEME):
            text = text[len(URI_SCHEME):]
        if not text.startswith("/"):
            raise FieldError(f"name must start with '/': {text!r}")
        parts = [p for p in text.split("/")[1:]]
        if parts and parts[-1] == "":
            parts.pop()
        return cls(tuple(unquote_to_bytes(p) for p in parts))

    def __str__(self) -> str:
        return "/" + "/".join(quote_from_bytes(c, safe="") for c in self.components)

    def uri(self) -> str:
        return URI_SCHEME + str(self)

    def __len__(self) -> int:
        return len(self.components)

    def __hash__(self) -> int:
        return self._hash

    def prefix(self, n: int) -> "Name":
        return Name(self.components[:n])

    def append(self, component: Union[bytes, str]) -> "Name":
        if isinstance(component, str):
            component = component.encode()
        return Name(self.components + (component,))

    def is_prefix_of(self, other: "Name") -> bool:
        n = len(self.components)
        return n <= len(other.components) and other.components[:n] == self.components


NamePrefix = Name


@dataclass(frozen=True, slots=True)
class Interest:
    name: Name
    payload: Optional[bytes] = None

    def __post_init__(self) -> None:
        if self.payload is not None:
            _check_len("interest payload", self.payload, MAX_INTEREST_PAYLOAD)
            object.__setattr__(self, "payload", bytes(self.payload))


@dataclass(frozen=True, slots=True)
class ContentObject:
    name: Name
    payload: bytes = b""
    acct: AcctFlag = AcctFlag.NONE
    expiry_time: int = 0
    validation: bytes = b""

    def __post_init__(self) -> None:
        _check_len("content payload", self.payload, MAX_CONTENT_PAYLOAD)
        _check_len("validation", self.validation, MAX_VALIDATION)
        object.__setattr__(self, "acct", AcctFlag(self.acct))
        if not 0 <= self.expiry_time <= MAX_EXPIRY:
            raise OversizeField(f"expiry_time {self.expiry_time} out of range")

    @property
    def cacheable(self) -> bool:
        return self.expiry_time > 0


@dataclass(frozen=True, slots=True)
class PInt:
    """Push interest: a stateless report of cache hits or collapsed interests."""

    name: Name
    ptype: AcctFlag
    origin: bytes
    count: int = 1
    cdata: tuple[bytes, ...] = field(default=())

    def __post_init__(self) -> None:
        ptype = AcctFlag(self.ptype)
        object.__setattr__(self, "ptype", ptype)
        if ptype is AcctFlag.NONE:
            raise FieldError("pInt type cannot be NONE")
        _check_len("origin", self.origin, MAX_ORIGIN)
        if not 1 <= self.count <= MAX_COUNT:
            raise OversizeField(f"pInt count {self.count} out of range [1, {MAX_COUNT}]")
        cdata = tuple(bytes(b) for b in self.cdata)
        object.__setattr__(self, "cdata", cdata)
        if len(cdata) > MAX_CDATA_ITEMS:
            raise OversizeField(f"{len(cdata)} cdata entries, limit {MAX_CDATA_ITEMS}")
        for blob in cdata:
            _check_len("cdata entry", blob, MAX_CDATA_BLOB)
        if ptype is AcctFlag.AGGREGATE:
            if cdata and len(cdata) != self.count:
                raise FieldError("aggregate pInt cdata must be empty or match count")
        elif len(cdata) != self.count:
            raise FieldError(f"{ptype.name} pInt needs one cdata entry per count")

    @classmethod
    def unchecked(
        cls, name: Name, ptype: AcctFlag, origin: bytes, count: int, cdata: tuple[bytes, ...]
    ) -> "PInt":
        """Construct without validation, for callers that build valid pInts by construction."""
        obj = object.__new__(cls)
        setattr_ = object.__setattr__
        setattr_(obj, "name", name)
        setattr_(obj, "ptype", ptype)
        setattr_(obj, "origin", origin)
        setattr_(obj, "count", count)
        setattr_(obj, "cdata", cdata)
        return obj


@dataclass(frozen=True, slots=True)
class Nack:
    name: Name
    reason: NackReason
    requirements: bytes = b""

    def __post_init__(self) -> None:
        object.__setattr__(self, "reason", NackReason(self.reason))
        _check_len("requirements", self.requirements, MAX_REQUIREMENTS)


Message = Union[Interest, ContentObject, PInt, Nack]

V = TypeVar("V")


def longest_prefix_match(
    table: Union[Mapping[Name, V], Iterable[tuple[Name, V]]], name: Name
) -> Optional[V]:
    """Value of the longest prefix of ``name`` present in ``table``, or None."""
    if not isinstance(table, Mapping):
        table = dict(table)
    comps = name.components
    for n in range(len(comps), -1, -1):
        key = Name(comps[:n]) if n != len(comps) else name
        if key in table:
            return table[key]
    return None
