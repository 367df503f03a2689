"""Key registry standing in for offline key distribution.

Keys file format, one record per line (``#`` starts a comment)::

    producer      <lci-prefix>             <hex X25519 private key>
    producer-pub  <lci-prefix>             <hex X25519 public key>
    mac           <consumer>@<lci-prefix>  <hex shared secret>
    sign          <consumer>               <hex Ed25519 seed>
    verify        <consumer>               <hex Ed25519 public key>
    sym           <hex key tag>@<lci-prefix> <hex AES-256 key>

Prefixes are resolved by longest-prefix match against the content name.
"""

from __future__ import annotations

import random
from hashlib import sha256
from pathlib import Path
from typing import Iterable, Optional, Union

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)

from .core import Name, longest_prefix_match
from .crsd import MacKey, SigningKey, VerifyKey, random_bytes
from .errors import ConfigError, UnknownKey

_RAW = serialization.Encoding.Raw


def _raw_private(sk: X25519PrivateKey) -> bytes:
    return sk.private_bytes(_RAW, serialization.PrivateFormat.Raw, serialization.NoEncryption())


def _raw_public(pk: X25519PublicKey) -> bytes:
    return pk.public_bytes(_RAW, serialization.PublicFormat.Raw)


class KeyRegistry:
    def __init__(self) -> None:
        self.producer_sk: dict[Name, X25519PrivateKey] = {}
        self.producer_pk: dict[Name, X25519PublicKey] = {}
        self.mac: dict[tuple[str, Name], bytes] = {}
        self.signers: dict[str, SigningKey] = {}
        self.verifiers: dict[str, VerifyKey] = {}
        self.sym: dict[tuple[bytes, Name], bytes] = {}
        self._digests: dict[bytes, str] = {}

    # -- population ---------------------------------------------------------

    def add_producer(self, prefix: Name, sk: Union[bytes, X25519PrivateKey]) -> None:
        if isinstance(sk, bytes):
            sk = X25519PrivateKey.from_private_bytes(sk)
        self.producer_sk[prefix] = sk
        self.producer_pk[prefix] = sk.public_key()

    def add_producer_public(self, prefix: Name, pk: Union[bytes, X25519PublicKey]) -> None:
        if isinstance(pk, bytes):
            pk = X25519PublicKey.from_public_bytes(pk)
        self.producer_pk[prefix] = pk

    def add_mac(self, consumer: str, prefix: Name, secret: bytes) -> None:
        self.mac[(consumer, prefix)] = bytes(secret)

    def add_signer(self, consumer: str, seed: bytes) -> None:
        signer = SigningKey(seed)
        self.signers[consumer] = signer
        self.add_verifier(consumer, signer.public().public_bytes)

    def add_verifier(self, consumer: str, public: bytes) -> None:
        self.verifiers[consumer] = VerifyKey(public)
        self._digests[sha256(public).digest()] = consumer

    def add_symmetric(self, key_tag: bytes, prefix: Name, key: bytes) -> None:
        if len(key) != 32:
            raise ConfigError("symmetric A-CrSD keys are 32 bytes")
        self.sym[(bytes(key_tag), prefix)] = bytes(key)

    @classmethod
    def generate(
        cls,
        prefixes: Iterable[Name],
        consumers: Iterable[str],
        rng: random.Random,
        style: str = "mac",
    ) -> "KeyRegistry":
        """Deterministic registry for simulations: one keypair per producer
        prefix, and a MAC secret or signing key per consumer."""
        if style not in ("mac", "sign"):
            raise ConfigError(f"unknown tag style {style!r}")
        reg = cls()
        prefixes = list(prefixes)
        for p in prefixes:
            reg.add_producer(p, random_bytes(rng, 32))
        for c in consumers:
            if style == "sign":
                reg.add_signer(c, random_bytes(rng, 32))
            else:
                for p in prefixes:
                    reg.add_mac(c, p, random_bytes(rng, 32))
        return reg

    # -- lookup ---------------------------------------------------------------

    def _lpm(self, table: dict, name: Name, what: str):
        found = longest_prefix_match(table, name)
        if found is None:
            raise UnknownKey(f"no {what} for {name}")
        return found

    def public_key(self, name: Name) -> X25519PublicKey:
        return self._lpm(self.producer_pk, name, "producer public key")

    def secret_key(self, name: Name) -> X25519PrivateKey:
        return self._lpm(self.producer_sk, name, "producer secret key")

    def consumer_for(self, identity: bytes) -> str:
        """Map a CrSD identity (consumer id or key digest) to a consumer id."""
        if identity in self._digests:
            return self._digests[identity]
        try:
            return identity.decode()
        except UnicodeDecodeError:
            raise UnknownKey(f"unrecognised identity {identity.hex()}") from None

    def tag_key(self, consumer: str, name: Name) -> Union[MacKey, SigningKey]:
        table = {p: k for (c, p), k in self.mac.items() if c == consumer}
        secret = longest_prefix_match(table, name)
        if secret is not None:
            return MacKey(secret)
        if consumer in self.signers:
            return self.signers[consumer]
        raise UnknownKey(f"no tagging key for consumer {consumer!r} under {name}")

    def verify_key(self, consumer: str, name: Name) -> Union[MacKey, VerifyKey]:
        table = {p: k for (c, p), k in self.mac.items() if c == consumer}
        secret = longest_prefix_match(table, name)
        if secret is not None:
            return MacKey(secret)
        if consumer in self.verifiers:
            return self.verifiers[consumer]
        raise UnknownKey(f"no verification key for consumer {consumer!r} under {name}")

    def symmetric_key(self, key_tag: bytes, name: Name) -> bytes:
        table = {p: k for (t, p), k in self.sym.items() if t == key_tag}
        return self._lpm(table, name, f"symmetric key {key_tag.hex()}")

    def covers(self, name: Name) -> bool:
        return longest_prefix_match(self.producer_sk, name) is not None

    # -- file format ------------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for p, sk in self.producer_sk.items():
            lines.append(f"producer {p.uri()} {_raw_private(sk).hex()}")
        for p, pk in self.producer_pk.items():
            if p not in self.producer_sk:
                lines.append(f"producer-pub {p.uri()} {_raw_public(pk).hex()}")
        for (c, p), k in self.mac.items():
            lines.append(f"mac {c}@{p.uri()} {k.hex()}")
        for c, s in self.signers.items():
            lines.append(f"sign {c} {s.seed.hex()}")
        for c, v in self.verifiers.items():
            if c not in self.signers:
                lines.append(f"verify {c} {v.public_bytes.hex()}")
        for (t, p), k in self.sym.items():
            lines.append(f"sym {t.hex()}@{p.uri()} {k.hex()}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, source: str = "<keys>") -> "KeyRegistry":
        reg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(f"{source}:{lineno}: expected 3 fields, got {len(parts)}")
            role, owner, hexkey = parts
            try:
                key = bytes.fromhex(hexkey)
                if role == "producer":
                    reg.add_producer(Name.parse(owner), key)
                elif role == "producer-pub":
                    reg.add_producer_public(Name.parse(owner), key)
                elif role == "mac":
                    consumer, prefix = _split_at(owner)
                    reg.add_mac(consumer, Name.parse(prefix), key)
                elif role == "sign":
                    reg.add_signer(owner, key)
                elif role == "verify":
                    reg.add_verifier(owner, key)
                elif role == "sym":
                    tag, prefix = _split_at(owner)
                    reg.add_symmetric(bytes.fromhex(tag), Name.parse(prefix), key)
                else:
                    raise ConfigError(f"unknown role {role!r}")
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from exc
        return reg

    @classmethod
    def load(cls, path: Union[str, Path]) -> "KeyRegistry":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"keys file not found: {path}")
        return cls.from_text(path.read_text(), str(path))

    def dump(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text())


def _split_at(owner: str) -> tuple[str, str]:
    head, sep, tail = owner.partition("@")
    if not sep or not head or not tail:
        raise ConfigError(f"expected <id>@<prefix>, got {owner!r}")
    return head, tail


def identity_digest(registry: KeyRegistry, consumer: str) -> Optional[bytes]:
    v = registry.verifiers.get(consumer)
    return sha256(v.public_bytes).digest() if v else None
