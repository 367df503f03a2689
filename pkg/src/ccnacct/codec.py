"""Bit-exact wire codec.

Layout (all integers big-endian)::

    message      = type:u8 body
    name         = count:u16 { len:u16 bytes }*
    Interest     = 0x01 name payload:(len:u16 bytes | 0xFFFF)
    ContentObject= 0x02 name payload:(len:u32 bytes) acct:u8 expiry:u64 validation:(len:u16 bytes)
    PInt         = 0x03 name ptype:u8 origin:(len:u16 bytes) count:u32 cdata:(n:u16 { len:u16 bytes }*)
    Nack         = 0x04 name reason:u8 requirements:(len:u16 bytes)

Decoding rejects trailing bytes, so ``encode(decode(b)) == b`` whenever
decode succeeds.
"""

from __future__ import annotations

import struct

from .core import (
    AcctFlag,
    ContentObject,
    Interest,
    Message,
    Nack,
    NackReason,
    Name,
    PInt,
)
from .errors import FieldError, MalformedMessage

TYPE_INTEREST = 0x01
TYPE_CONTENT = 0x02
TYPE_PINT = 0x03
TYPE_NACK = 0x04

ABSENT = 0xFFFF

_U16 = struct.Struct(">H")
_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")


def encode_name(name: Name) -> bytes:
    out = [_U16.pack(len(name.components))]
    for c in name.components:
        out.append(_U16.pack(len(c)))
        out.append(c)
    return b"".join(out)


def _blob16(b: bytes) -> bytes:
    return _U16.pack(len(b)) + b


def encode(msg: Message) -> bytes:
    if isinstance(msg, Interest):
        tail = _U16.pack(ABSENT) if msg.payload is None else _blob16(msg.payload)
        return bytes([TYPE_INTEREST]) + encode_name(msg.name) + tail
    if isinstance(msg, ContentObject):
        return b"".join((
            bytes([TYPE_CONTENT]),
            encode_name(msg.name),
            _U32.pack(len(msg.payload)),
            msg.payload,
            bytes([msg.acct]),
            _U64.pack(msg.expiry_time),
            _blob16(msg.validation),
        ))
    if isinstance(msg, PInt):
        parts = [
            bytes([TYPE_PINT]),
            encode_name(msg.name),
            bytes([msg.ptype]),
            _blob16(msg.origin),
            _U32.pack(msg.count),
            _U16.pack(len(msg.cdata)),
        ]
        parts.extend(_blob16(b) for b in msg.cdata)
        return b"".join(parts)
    if isinstance(msg, Nack):
        return (bytes([TYPE_NACK]) + encode_name(msg.name) + bytes([msg.reason])
                + _blob16(msg.requirements))
    raise TypeError(f"not a message: {type(msg).__name__}")


def name_size(name: Name) -> int:
    return 2 + sum(2 + len(c) for c in name.components)


def encoded_size(msg: Message) -> int:
    """``len(encode(msg))`` without materialising the bytes."""
    base = 1 + name_size(msg.name)
    if isinstance(msg, Interest):
        return base + 2 + (len(msg.payload) if msg.payload is not None else 0)
    if isinstance(msg, ContentObject):
        return base + 4 + len(msg.payload) + 1 + 8 + 2 + len(msg.validation)
    if isinstance(msg, PInt):
        return base + 1 + 2 + len(msg.origin) + 4 + 2 + sum(2 + len(b) for b in msg.cdata)
    if isinstance(msg, Nack):
        return base + 1 + 2 + len(msg.requirements)
    raise TypeError(f"not a message: {type(msg).__name__}")


class _Reader:
    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.buf):
            raise MalformedMessage(f"truncated at offset {self.pos}, need {n} bytes")
        chunk = self.buf[self.pos:end]
        self.pos = end
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return _U16.unpack(self.take(2))[0]

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def u64(self) -> int:
        return _U64.unpack(self.take(8))[0]

    def blob16(self) -> bytes:
        return self.take(self.u16())

    def name(self) -> Name:
        n = self.u16()
        return Name(tuple(self.blob16() for _ in range(n)))


def decode_name(data: bytes) -> Name:
    r = _Reader(bytes(data))
    try:
        name = r.name()
    except FieldError as exc:
        raise MalformedMessage(str(exc)) from exc
    if r.pos != len(r.buf):
        raise MalformedMessage("trailing bytes after name")
    return name


def decode(data: bytes) -> Message:
    r = _Reader(bytes(data))
    try:
        tag = r.u8()
        if tag == TYPE_INTEREST:
            name = r.name()
            n = r.u16()
            msg: Message = Interest(name, None if n == ABSENT else r.take(n))
        elif tag == TYPE_CONTENT:
            name = r.name()
            payload = r.take(r.u32())
            acct = r.u8()
            if acct > max(AcctFlag):
                raise MalformedMessage(f"bad acct flag {acct}")
            msg = ContentObject(name, payload, AcctFlag(acct), r.u64(), r.blob16())
        elif tag == TYPE_PINT:
            name = r.name()
            ptype = r.u8()
            if ptype > max(AcctFlag):
                raise MalformedMessage(f"bad pInt type {ptype}")
            origin = r.blob16()
            count = r.u32()
            cdata = tuple(r.blob16() for _ in range(r.u16()))
            msg = PInt(name, AcctFlag(ptype), origin, count, cdata)
        elif tag == TYPE_NACK:
            name = r.name()
            reason = r.u8()
            if reason not in NackReason._value2member_map_:
                raise MalformedMessage(f"bad nack reason {reason}")
            msg = Nack(name, NackReason(reason), r.blob16())
        else:
            raise MalformedMessage(f"unknown type tag 0x{tag:02x}")
    except FieldError as exc:
        raise MalformedMessage(str(exc)) from exc
    if r.pos != len(r.buf):
        raise MalformedMessage(f"{len(r.buf) - r.pos} trailing bytes")
    return msg
