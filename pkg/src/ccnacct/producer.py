"""Producer-side accounting.

A :class:`Producer` serves content for one prefix and keeps a
:class:`LedgerSet` fed by direct interests and by pInts:

* AGGREGATE: one counter per name, split into pInt-reported and direct.
* DISTINCT: per-name counter plus the ``(nonce, window)`` keys already
  counted, so multicast echoes are marked as duplicates.
* INDIVIDUAL: per ``(consumer, name)`` counters; every blob must be a
  valid Sec-CrSD (optionally wrapped as A-CrSD) or it is rejected and
  charged to the pInt's origin.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .core import AcctFlag, ContentObject, Interest, Nack, NackReason, Name, PInt, longest_prefix_match
from .crsd import (
    DEFAULT_NONCE_BITS,
    DEFAULT_WINDOW,
    ACrSD,
    NonceStamp,
    ReplayWindow,
    SecCrSD,
    Verdict,
    open_a_crsd,
    open_a_crsd_symmetric,
    parse_payload,
    verify_sec_crsd,
)
from .errors import ConfigError, DecryptFailure, MalformedMessage, UnknownKey
from .keys import KeyRegistry

KEY_COMPONENT = b"KEY"
DEFAULT_PAYLOAD = 1_000_000


@dataclass
class AggregateCounter:
    via_pint: int = 0
    direct: int = 0

    @property
    def total(self) -> int:
        return self.via_pint + self.direct


@dataclass
class DistinctRecord:
    count: int = 0
    duplicates: int = 0
    rejected: int = 0
    seen: set[tuple[bytes, int]] = field(default_factory=set)


@dataclass(frozen=True)
class Rejection:
    name: Name
    origin: bytes
    reason: Verdict
    clock: int


@dataclass
class LedgerSet:
    aggregate: dict[Name, AggregateCounter] = field(default_factory=dict)
    distinct: dict[Name, DistinctRecord] = field(default_factory=dict)
    individual: dict[tuple[str, Name], int] = field(default_factory=dict)
    rejections: list[Rejection] = field(default_factory=list)
    requests_log: Optional[list[tuple[Name, bytes, int]]] = None

    def rejections_by_origin(self) -> Counter:
        return Counter(r.origin for r in self.rejections)


@dataclass
class IngestReport:
    accepted: int = 0
    duplicates: int = 0
    rejected: int = 0
    verdicts: list[Verdict] = field(default_factory=list)


@dataclass
class ProducerConfig:
    prefix: Name
    acct_policy: Mapping[Name, AcctFlag] = field(default_factory=dict)
    keys: Optional[KeyRegistry] = None
    dedup_window: int = DEFAULT_WINDOW
    payload_size: int = DEFAULT_PAYLOAD
    expiry_time: int = 10**9
    zero_cache_individual: bool = True
    log_requests: bool = False
    nonce_bits: int = DEFAULT_NONCE_BITS

    def acct_for(self, name: Name) -> AcctFlag:
        flag = longest_prefix_match(self.acct_policy, name)
        return AcctFlag.NONE if flag is None else AcctFlag(flag)

    def check(self) -> None:
        if self.dedup_window < 1:
            raise ConfigError("dedup_window must be positive")
        if self.payload_size < 0:
            raise ConfigError("payload_size must be non-negative")
        for n, flag in self.acct_policy.items():
            if not self.prefix.is_prefix_of(n):
                raise ConfigError(f"policy name {n} is outside producer prefix {self.prefix}")
            if flag is AcctFlag.INDIVIDUAL and (self.keys is None or not self.keys.covers(n)):
                raise ConfigError(f"INDIVIDUAL content {n} has no producer key in the registry")


class Producer:
    def __init__(self, config: ProducerConfig):
        config.check()
        self.config = config
        self.ledger = LedgerSet(requests_log=[] if config.log_requests else None)
        self.window = ReplayWindow(config.dedup_window)
        self.metrics: Counter[str] = Counter()
        self._payload = bytes(config.payload_size)
        self._objects: dict[Name, ContentObject] = {}
        self._acct: dict[Name, AcctFlag] = {}

    @property
    def prefix(self) -> Name:
        return self.config.prefix

    def acct_for(self, name: Name) -> AcctFlag:
        flag = self._acct.get(name)
        if flag is None:
            flag = self._acct[name] = self.config.acct_for(name)
        return flag

    # -- publishing ------------------------------------------------------------

    def content_for(self, name: Name) -> ContentObject:
        co = self._objects.get(name)
        if co is None:
            acct = self.config.acct_for(name)
            expiry = self.config.expiry_time
            if acct is AcctFlag.INDIVIDUAL and self.config.zero_cache_individual:
                expiry = 0
            co = ContentObject(name, self._payload, acct, expiry)
            self._objects[name] = co
        return co

    def publishes_cacheable_individual(self) -> bool:
        """True if some INDIVIDUAL content would be cached (breaks the zero-cache rule)."""
        return any(
            self.content_for(n).cacheable
            for n, f in self.config.acct_policy.items()
            if f is AcctFlag.INDIVIDUAL
        )

    def _key_object(self, name: Name) -> ContentObject:
        co = self._objects.get(name)
        if co is None:
            co = self._objects[name] = ContentObject(name, bytes(32), AcctFlag.NONE, 0)
        return co

    def requirements(self) -> bytes:
        return (f"form=A-CrSD;nonce_bits={self.config.nonce_bits};"
                f"window={self.config.dedup_window};key={self.prefix.uri()}").encode()

    # -- ingestion ---------------------------------------------------------------

    def _tick(self, clock: int) -> None:
        self.window.advance(clock)

    def ingest_interest(self, interest: Interest, clock: int) -> Union[ContentObject, Nack]:
        name = interest.name
        if not self.prefix.is_prefix_of(name):
            raise ValueError(f"{name} is outside producer prefix {self.prefix}")
        self._tick(clock)
        self.metrics["interests"] += 1
        if name.components and name.components[-1] == KEY_COMPONENT:
            # decryption-key fetch of the encryption-based scheme; this is where it accounts
            target = Name(name.components[:-1])
            self.metrics["key_requests"] += 1
            self._aggregate(target).direct += 1
            return self._key_object(name)

        acct = self.acct_for(name)
        if self.ledger.requests_log is not None and acct is not AcctFlag.NONE:
            self.ledger.requests_log.append((name, interest.payload or b"", clock))
        if acct is not AcctFlag.NONE and acct is not AcctFlag.INDIVIDUAL:
            # every accounted name keeps a running total next to its finer-grained ledger
            self._aggregate(name).direct += 1
        if acct is AcctFlag.DISTINCT:
            if interest.payload:
                self._distinct_blob(name, interest.payload)
            else:
                self.metrics["missing_crsd"] += 1
        elif acct is AcctFlag.INDIVIDUAL:
            if not interest.payload:
                self.metrics["nacks"] += 1
                return Nack(name, NackReason.MISSING_CRSD, self.requirements())
            verdict = self._individual_blob(name, interest.payload, b"", clock)
            if not verdict.accepted:
                self.metrics["nacks"] += 1
                return Nack(name, NackReason.BAD_CRSD, self.requirements())
            self._aggregate(name).direct += 1
        return self.content_for(name)

    def ingest_pint(self, pint: PInt, clock: int) -> IngestReport:
        report = IngestReport()
        name = pint.name
        self.metrics["pints"] += 1
        self.metrics["pint_count"] += pint.count
        acct = self.acct_for(name) if self.prefix.is_prefix_of(name) else AcctFlag.NONE
        if acct is AcctFlag.NONE:
            self.metrics["unknown_name"] += 1
            return report
        self._tick(clock)
        if pint.ptype is AcctFlag.AGGREGATE or acct is AcctFlag.AGGREGATE:
            self._aggregate(name).via_pint += pint.count
            report.accepted = pint.count
            return report
        if acct is AcctFlag.DISTINCT:
            for blob in pint.cdata:
                v = self._distinct_blob(name, blob)
                report.verdicts.append(v)
                if v is Verdict.ACCEPT:
                    report.accepted += 1
                elif v is Verdict.REPLAY:
                    report.duplicates += 1
                else:
                    report.rejected += 1
            self._aggregate(name).via_pint += pint.count
            return report
        for blob in pint.cdata:
            v = self._individual_blob(name, blob, pint.origin, clock)
            report.verdicts.append(v)
            if v.accepted:
                report.accepted += 1
            else:
                report.rejected += 1
        self._aggregate(name).via_pint += report.accepted
        return report

    def ingest_aggregate_pints(self, name: Name, pints: int, count: int, clock: int) -> None:
        """Same ledger effect as ``pints`` AGGREGATE pInts for ``name`` carrying ``count`` in total."""
        self.metrics["pints"] += pints
        self.metrics["pint_count"] += count
        acct = self.acct_for(name) if self.prefix.is_prefix_of(name) else AcctFlag.NONE
        if acct is AcctFlag.NONE:
            self.metrics["unknown_name"] += pints
            return
        self._tick(clock)
        self._aggregate(name).via_pint += count

    def _aggregate(self, name: Name) -> AggregateCounter:
        c = self.ledger.aggregate.get(name)
        if c is None:
            c = self.ledger.aggregate[name] = AggregateCounter()
        return c

    def _open(self, name: Name, a: ACrSD) -> SecCrSD:
        keys = self.config.keys
        if keys is None:
            raise UnknownKey("producer has no key registry")
        if a.symmetric:
            return open_a_crsd_symmetric(a, keys.symmetric_key(a.key_tag or b"", name))
        return open_a_crsd(a, keys.secret_key(name))

    def _distinct_blob(self, name: Name, blob: bytes) -> Verdict:
        rec = self.ledger.distinct.get(name)
        if rec is None:
            rec = self.ledger.distinct[name] = DistinctRecord()
        try:
            payload = parse_payload(blob)
            if isinstance(payload, ACrSD):
                payload = self._open(name, payload)
        except (MalformedMessage, DecryptFailure, UnknownKey):
            rec.rejected += 1
            return Verdict.MALFORMED
        assert isinstance(payload, (NonceStamp, SecCrSD))
        key = (payload.nonce, payload.timestamp // self.config.dedup_window)
        if key in rec.seen:
            rec.duplicates += 1
            return Verdict.REPLAY
        rec.seen.add(key)
        rec.count += 1
        return Verdict.ACCEPT

    def _individual_blob(self, name: Name, blob: bytes, origin: bytes, clock: int) -> Verdict:
        verdict, consumer = self._check_individual(name, blob)
        if verdict.accepted:
            key = (consumer, name)
            self.ledger.individual[key] = self.ledger.individual.get(key, 0) + 1
        else:
            self.ledger.rejections.append(Rejection(name, origin, verdict, clock))
            self.metrics[f"rejected_{verdict.value}"] += 1
        return verdict

    def _check_individual(self, name: Name, blob: bytes) -> tuple[Verdict, str]:
        keys = self.config.keys
        if keys is None:
            return Verdict.UNKNOWN_KEY, ""
        try:
            payload = parse_payload(blob)
        except MalformedMessage:
            return Verdict.MALFORMED, ""
        if isinstance(payload, ACrSD):
            try:
                payload = self._open(name, payload)
            except DecryptFailure:
                return Verdict.DECRYPT_FAILURE, ""
            except UnknownKey:
                return Verdict.UNKNOWN_KEY, ""
        if not isinstance(payload, SecCrSD) or not payload.crsd.identity:
            return Verdict.MALFORMED, ""
        try:
            consumer = keys.consumer_for(payload.crsd.identity)
            key = keys.verify_key(consumer, name)
        except UnknownKey:
            return Verdict.UNKNOWN_KEY, ""
        return verify_sec_crsd(payload, name, key, self.window), consumer

    # -- queries -------------------------------------------------------------------

    def query(self, kind: AcctFlag, name: Optional[Name] = None) -> dict:
        """Immutable snapshot of one ledger, optionally restricted to ``name``."""
        kind = AcctFlag(kind)
        if kind is AcctFlag.AGGREGATE:
            out = {n: c.total for n, c in self.ledger.aggregate.items()}
        elif kind is AcctFlag.DISTINCT:
            out = {n: r.count for n, r in self.ledger.distinct.items()}
        elif kind is AcctFlag.INDIVIDUAL:
            out = dict(self.ledger.individual)
            if name is not None:
                return {k: v for k, v in out.items() if k[1] == name}
            return out
        else:
            return {}
        if name is not None:
            return {name: out[name]} if name in out else {}
        return out

    def count(self, kind: AcctFlag, name: Optional[Name] = None) -> int:
        return sum(self.query(kind, name).values())

    def pint_reported(self, name: Optional[Name] = None) -> int:
        return sum(c.via_pint for n, c in self.ledger.aggregate.items() if name is None or n == name)

    def ledger_rows(self) -> list[tuple[str, str, str, int, int, int]]:
        """(name, type, consumer, count, duplicates, rejections) rows in a stable order."""
        rejected = Counter(r.name for r in self.ledger.rejections)
        rows = []
        for n in sorted(self.ledger.aggregate, key=lambda x: x.components):
            c = self.ledger.aggregate[n]
            rows.append((n.uri(), "AGGREGATE", "", c.total, 0, 0))
        for n in sorted(self.ledger.distinct, key=lambda x: x.components):
            r = self.ledger.distinct[n]
            rows.append((n.uri(), "DISTINCT", "", r.count, r.duplicates, r.rejected))
        for (consumer, n) in sorted(self.ledger.individual, key=lambda k: (k[1].components, k[0])):
            rows.append((n.uri(), "INDIVIDUAL", consumer, self.ledger.individual[(consumer, n)], 0, 0))
        for n in sorted(rejected, key=lambda x: x.components):
            rows.append((n.uri(), "INDIVIDUAL", "", 0, 0, rejected[n]))
        return rows

    def ledger_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "type", "consumer", "count", "duplicates", "rejections"])
        w.writerows(self.ledger_rows())
        return buf.getvalue()
