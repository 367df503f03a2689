"""Consumer-specific data (CrSD) and its authenticated/anonymous forms.

Interest payload blobs start with a one-byte kind tag:

====  =============================================================
0xA1  :class:`NonceStamp`   nonce + timestamp (distinct accounting)
0xA2  :class:`SecCrSD`      CrSD, nonce, timestamp and keyed tag
0xA3  :class:`ACrSD`        SecCrSD under the producer's public key
0xA4  :class:`ACrSD`        SecCrSD under a shared symmetric key
====  =============================================================

The keyed tag binds the interest name, so a tag minted for ``/a`` never
verifies for ``/b``.
"""

from __future__ import annotations

import enum
import heapq
import hmac
import math
import random
import struct
from dataclasses import dataclass
from fractions import Fraction
from hashlib import sha256
from typing import Optional, Union

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .codec import encode_name
from .core import Name
from .errors import DecryptFailure, MalformedMessage

KIND_NONCE = 0xA1
KIND_SEC = 0xA2
KIND_ACRSD_PK = 0xA3
KIND_ACRSD_SYM = 0xA4

DEFAULT_NONCE_BITS = 128
DEFAULT_WINDOW = 300

_U16 = struct.Struct(">H")
_U64 = struct.Struct(">Q")
_RAW = serialization.Encoding.Raw


class CrsdForm(enum.IntEnum):
    CONSUMER_KEY_DIGEST = 0
    GROUP_KEY_DIGEST = 1
    PSEUDONYM = 2
    NONCE_ONLY = 3


def random_bytes(rng: random.Random, n: int) -> bytes:
    return rng.getrandbits(8 * n).to_bytes(n, "big") if n else b""


def random_nonce(rng: random.Random, bits: int = DEFAULT_NONCE_BITS) -> bytes:
    """``bits`` random bits, left-padded with zero bits to whole bytes."""
    return rng.getrandbits(bits).to_bytes((bits + 7) // 8, "big")


class _Cursor:
    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes, pos: int = 0):
        self.buf = buf
        self.pos = pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise MalformedMessage("truncated consumer-specific data")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def blob(self) -> bytes:
        return self.take(_U16.unpack(self.take(2))[0])

    def end(self) -> None:
        if self.pos != len(self.buf):
            raise MalformedMessage("trailing bytes in consumer-specific data")


@dataclass(frozen=True, slots=True)
class CrSD:
    form: CrsdForm
    identity: bytes = b""

    def __post_init__(self) -> None:
        object.__setattr__(self, "form", CrsdForm(self.form))
        if self.form is not CrsdForm.NONCE_ONLY and not self.identity:
            raise ValueError(f"{self.form.name} CrSD needs a non-empty identity")
        if len(self.identity) > 0xFFFF:
            raise ValueError("identity too long")

    def to_bytes(self) -> bytes:
        return bytes([self.form]) + _U16.pack(len(self.identity)) + self.identity

    @classmethod
    def _read(cls, cur: _Cursor) -> "CrSD":
        form = cur.take(1)[0]
        if form not in CrsdForm._value2member_map_:
            raise MalformedMessage(f"unknown CrSD form {form}")
        try:
            return cls(CrsdForm(form), cur.blob())
        except ValueError as exc:
            raise MalformedMessage(str(exc)) from exc


def _check_stamp(nonce: bytes, timestamp: int) -> None:
    if not 0 <= timestamp < 1 << 64:
        raise ValueError(f"timestamp {timestamp} outside [0, 2^64)")
    if len(nonce) > 0xFFFF:
        raise ValueError("nonce too long")


@dataclass(frozen=True, slots=True)
class NonceStamp:
    """Unauthenticated nonce and timestamp, enough for distinct accounting."""

    nonce: bytes
    timestamp: int

    def __post_init__(self) -> None:
        _check_stamp(self.nonce, self.timestamp)

    def to_bytes(self) -> bytes:
        return bytes([KIND_NONCE]) + _U16.pack(len(self.nonce)) + self.nonce + _U64.pack(self.timestamp)


@dataclass(frozen=True, slots=True)
class SecCrSD:
    crsd: CrSD
    nonce: bytes
    timestamp: int
    tag: bytes

    def __post_init__(self) -> None:
        _check_stamp(self.nonce, self.timestamp)
        if len(self.tag) > 0xFFFF:
            raise ValueError("tag too long")

    def to_bytes(self) -> bytes:
        return b"".join((
            bytes([KIND_SEC]),
            self.crsd.to_bytes(),
            _U16.pack(len(self.nonce)),
            self.nonce,
            _U64.pack(self.timestamp),
            _U16.pack(len(self.tag)),
            self.tag,
        ))


@dataclass(frozen=True, slots=True)
class ACrSD:
    ciphertext: bytes

    @property
    def symmetric(self) -> bool:
        return self.ciphertext[:1] == bytes([KIND_ACRSD_SYM])

    @property
    def key_tag(self) -> Optional[bytes]:
        """Cleartext key identifier of the symmetric form (links interests)."""
        if not self.symmetric:
            return None
        n = self.ciphertext[1]
        return self.ciphertext[2:2 + n]

    def to_bytes(self) -> bytes:
        return self.ciphertext


Payload = Union[NonceStamp, SecCrSD, ACrSD]


def tagged_bytes(crsd: CrSD, nonce: bytes, timestamp: int, name: Name) -> bytes:
    """Exact input of the keyed tag: CrSD || r || t || name."""
    return (crsd.to_bytes() + _U16.pack(len(nonce)) + nonce + _U64.pack(timestamp)
            + encode_name(name))


def parse_payload(blob: bytes) -> Payload:
    if not blob:
        raise MalformedMessage("empty consumer-specific data")
    kind = blob[0]
    if kind in (KIND_ACRSD_PK, KIND_ACRSD_SYM):
        return ACrSD(bytes(blob))
    cur = _Cursor(bytes(blob), 1)
    if kind == KIND_NONCE:
        out: Payload = NonceStamp(cur.blob(), _U64.unpack(cur.take(8))[0])
    elif kind == KIND_SEC:
        crsd = CrSD._read(cur)
        nonce = cur.blob()
        ts = _U64.unpack(cur.take(8))[0]
        out = SecCrSD(crsd, nonce, ts, cur.blob())
    else:
        raise MalformedMessage(f"unknown payload kind 0x{kind:02x}")
    cur.end()
    return out


# -- keyed tags ----------------------------------------------------------


class MacKey:
    """Shared-secret tag: HMAC-SHA256."""

    style = "mac"

    def __init__(self, secret: bytes):
        self.secret = bytes(secret)

    def tag(self, data: bytes) -> bytes:
        return hmac.new(self.secret, data, sha256).digest()

    def verify(self, data: bytes, tag: bytes) -> bool:
        return hmac.compare_digest(self.tag(data), tag)


class SigningKey:
    """Signature tag: Ed25519 over the tagged bytes."""

    style = "sign"

    def __init__(self, seed: bytes):
        self.seed = bytes(seed)
        self._sk = Ed25519PrivateKey.from_private_bytes(self.seed)

    def tag(self, data: bytes) -> bytes:
        return self._sk.sign(data)

    def public(self) -> "VerifyKey":
        return VerifyKey(self._sk.public_key().public_bytes(_RAW, serialization.PublicFormat.Raw))

    def verify(self, data: bytes, tag: bytes) -> bool:
        return self.public().verify(data, tag)


class VerifyKey:
    style = "sign"

    def __init__(self, public: bytes):
        self.public_bytes = bytes(public)
        self._pk = Ed25519PublicKey.from_public_bytes(self.public_bytes)

    def verify(self, data: bytes, tag: bytes) -> bool:
        try:
            self._pk.verify(tag, data)
        except InvalidSignature:
            return False
        return True


TagKey = Union[MacKey, SigningKey]
VerificationKey = Union[MacKey, SigningKey, VerifyKey]


def make_sec_crsd(
    crsd: CrSD,
    name: Name,
    key: TagKey,
    clock: int,
    rng: random.Random,
    nonce_bits: int = DEFAULT_NONCE_BITS,
) -> SecCrSD:
    nonce = random_nonce(rng, nonce_bits)
    return SecCrSD(crsd, nonce, clock, key.tag(tagged_bytes(crsd, nonce, clock, name)))


class Verdict(enum.Enum):
    ACCEPT = "accept"
    BAD_TAG = "bad_tag"
    STALE_TIMESTAMP = "stale_timestamp"
    REPLAY = "replay"
    MALFORMED = "malformed"
    UNKNOWN_KEY = "unknown_key"
    DECRYPT_FAILURE = "decrypt_failure"

    @property
    def accepted(self) -> bool:
        return self is Verdict.ACCEPT


class ReplayWindow:
    """Accepted nonces whose timestamps are still inside the window.

    A timestamp ``t`` is fresh at ``clock`` iff
    ``clock - width <= t <= clock + skew``; nonces are forgotten once
    their timestamp falls below ``clock - width``.
    """

    def __init__(self, width: int = DEFAULT_WINDOW, skew: Optional[int] = None):
        if width < 1:
            raise ValueError("window width must be positive")
        self.width = width
        self.skew = width if skew is None else skew
        self.clock = 0
        self._seen: dict[bytes, int] = {}
        self._expiry: list[tuple[int, bytes]] = []

    def advance(self, clock: int) -> None:
        self.clock = clock
        floor = clock - self.width
        expiry = self._expiry
        while expiry and expiry[0][0] < floor:
            t, nonce = heapq.heappop(expiry)
            if self._seen.get(nonce) == t:
                del self._seen[nonce]

    def fresh(self, timestamp: int) -> bool:
        return self.clock - self.width <= timestamp <= self.clock + self.skew

    def seen(self, nonce: bytes) -> bool:
        return nonce in self._seen

    def record(self, nonce: bytes, timestamp: int) -> None:
        self._seen[nonce] = timestamp
        heapq.heappush(self._expiry, (timestamp, nonce))

    def __len__(self) -> int:
        return len(self._seen)


def verify_sec_crsd(
    s: SecCrSD, name: Name, key: VerificationKey, window: ReplayWindow
) -> Verdict:
    """Check tag, freshness and nonce uniqueness; record the nonce on accept."""
    if not key.verify(tagged_bytes(s.crsd, s.nonce, s.timestamp, name), s.tag):
        return Verdict.BAD_TAG
    if not window.fresh(s.timestamp):
        return Verdict.STALE_TIMESTAMP
    if window.seen(s.nonce):
        return Verdict.REPLAY
    window.record(s.nonce, s.timestamp)
    return Verdict.ACCEPT


# -- anonymous CrSD --------------------------------------------------------

_GCM_NONCE = 12
_HKDF_INFO = b"ccnacct a-crsd v1"


def _kdf(shared: bytes, eph_pub: bytes, pk_bytes: bytes) -> bytes:
    hkdf = HKDF(algorithm=hashes.SHA256(), length=32, salt=None, info=_HKDF_INFO + eph_pub + pk_bytes)
    return hkdf.derive(shared)


def _pub_bytes(pk: X25519PublicKey) -> bytes:
    return pk.public_bytes(_RAW, serialization.PublicFormat.Raw)


def make_a_crsd(s: SecCrSD, pk: X25519PublicKey, rng: random.Random) -> ACrSD:
    """Encrypt under the producer's X25519 key (ephemeral ECDH + AES-GCM).

    Randomness comes from ``rng`` so simulations stay reproducible; every
    call draws a fresh ephemeral key and nonce.
    """
    eph = X25519PrivateKey.from_private_bytes(random_bytes(rng, 32))
    eph_pub = _pub_bytes(eph.public_key())
    key = _kdf(eph.exchange(pk), eph_pub, _pub_bytes(pk))
    iv = random_bytes(rng, _GCM_NONCE)
    ct = AESGCM(key).encrypt(iv, s.to_bytes(), None)
    return ACrSD(bytes([KIND_ACRSD_PK]) + eph_pub + iv + ct)


def make_a_crsd_symmetric(s: SecCrSD, key: bytes, key_tag: bytes, rng: random.Random) -> ACrSD:
    """Shared-key variant; ``key_tag`` travels in clear so the producer can pick the key."""
    if len(key_tag) > 255:
        raise ValueError("key tag longer than 255 bytes")
    iv = random_bytes(rng, _GCM_NONCE)
    head = bytes([KIND_ACRSD_SYM, len(key_tag)]) + key_tag
    ct = AESGCM(key).encrypt(iv, s.to_bytes(), head)
    return ACrSD(head + iv + ct)


def _as_sec(plain: bytes) -> SecCrSD:
    try:
        out = parse_payload(plain)
    except MalformedMessage as exc:
        raise DecryptFailure(f"plaintext is not a Sec-CrSD: {exc}") from exc
    if not isinstance(out, SecCrSD):
        raise DecryptFailure("plaintext is not a Sec-CrSD")
    return out


def open_a_crsd(a: ACrSD, sk: X25519PrivateKey) -> SecCrSD:
    ct = a.ciphertext
    if len(ct) < 1 + 32 + _GCM_NONCE + 16 or ct[0] != KIND_ACRSD_PK:
        raise DecryptFailure("not a public-key A-CrSD")
    eph_pub = ct[1:33]
    iv = ct[33:33 + _GCM_NONCE]
    try:
        shared = sk.exchange(X25519PublicKey.from_public_bytes(eph_pub))
        key = _kdf(shared, eph_pub, _pub_bytes(sk.public_key()))
        plain = AESGCM(key).decrypt(iv, ct[33 + _GCM_NONCE:], None)
    except (InvalidTag, ValueError) as exc:
        raise DecryptFailure("A-CrSD failed to decrypt") from exc
    return _as_sec(plain)


def open_a_crsd_symmetric(a: ACrSD, key: bytes) -> SecCrSD:
    ct = a.ciphertext
    if len(ct) < 2 or ct[0] != KIND_ACRSD_SYM:
        raise DecryptFailure("not a symmetric A-CrSD")
    head_len = 2 + ct[1]
    if len(ct) < head_len + _GCM_NONCE + 16:
        raise DecryptFailure("truncated symmetric A-CrSD")
    iv = ct[head_len:head_len + _GCM_NONCE]
    try:
        plain = AESGCM(key).decrypt(iv, ct[head_len + _GCM_NONCE:], ct[:head_len])
    except (InvalidTag, ValueError) as exc:
        raise DecryptFailure("A-CrSD failed to decrypt") from exc
    return _as_sec(plain)


# -- nonce collisions --------------------------------------------------------


def collision_probability(bits: int, s: int) -> float:
    """Probability that ``s`` uniform ``bits``-bit nonces contain a repeat.

    Evaluates ``1 - prod_{i<s} (2^N - i) / 2^N`` as a sum of ``log1p``
    terms; returns exactly 1.0 once ``s`` exceeds ``2^N``.
    """
    if bits < 1 or s < 0:
        raise ValueError("need bits >= 1 and s >= 0")
    if s <= 1:
        return 0.0
    if bits < 64 and s > (1 << bits):
        return 1.0
    space = float(2 ** bits)
    if s <= 4096:
        log_p = math.fsum(math.log1p(-i / space) for i in range(1, s))
    elif (s - 1) / space < 1e-4:
        log_p = _log_survival_series(space, s)
    elif s * s / (2 * space) > 800:
        return 1.0
    else:
        log_p = _log_survival_numpy(space, s)
    return min(1.0, max(0.0, -math.expm1(log_p)))


def _log_survival_series(space: float, s: int) -> float:
    # -sum_{i<s} (x + x^2/2 + x^3/3), x = i/space; truncation is O(x^4)
    p1 = s * (s - 1) / 2
    p2 = (s - 1) * s * (2 * s - 1) / 6
    p3 = p1 * p1
    return -(p1 / space + p2 / (2 * space ** 2) + p3 / (3 * space ** 3))


def _log_survival_numpy(space: float, s: int, chunk: int = 1 << 20) -> float:
    import numpy as np

    total = 0.0
    for lo in range(1, s, chunk):
        i = np.arange(lo, min(s, lo + chunk), dtype=np.float64)
        total += float(np.log1p(-i / space).sum())
    return total


def collision_probability_exact(bits: int, s: int) -> Fraction:
    """Same quantity as an exact rational; cost grows linearly in ``s``."""
    if bits < 1 or s < 0:
        raise ValueError("need bits >= 1 and s >= 0")
    space = 1 << bits
    if s > space:
        return Fraction(1)
    num = 1
    for i in range(s):
        num *= space - i
    return 1 - Fraction(num, space ** s)
