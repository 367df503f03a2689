"""Per-node forwarding state machine.

A :class:`Node` owns a content store (CS), a pending interest table (PIT)
and a FIB. Each ``on_*`` handler consumes one message arriving on an
interface and returns the ``(interface, message)`` pairs to transmit.
Interfaces are opaque hashables; the simulator uses neighbour node ids.
"""

from __future__ import annotations

from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

from .core import (
    MAX_CDATA_ITEMS,
    MAX_ORIGIN,
    AcctFlag,
    ContentObject,
    Interest,
    Message,
    Nack,
    Name,
    PInt,
)
from .errors import ConfigError, MissingCrSD

Face = Hashable
Output = list[tuple[Face, Message]]


@dataclass(slots=True)
class CsEntry:
    content: ContentObject
    inserted_at: int
    expires_at: int


@dataclass(slots=True)
class Arrival:
    face: Face
    payload: Optional[bytes]
    forwarded: bool


@dataclass(slots=True)
class PitEntry:
    name: Name
    arrivals: list[Arrival] = field(default_factory=list)

    def faces(self) -> list[Face]:
        return [a.face for a in self.arrivals]

    def collapsed(self) -> list[Arrival]:
        return [a for a in self.arrivals if not a.forwarded]


@dataclass(frozen=True, slots=True)
class FibEntry:
    prefix: Name
    next_hops: tuple[Face, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "next_hops", tuple(self.next_hops))
        if not self.next_hops:
            raise ConfigError(f"FIB entry {self.prefix} has no next hops")


def generate_pint(
    co: ContentObject,
    trigger_interest: Optional[Interest],
    pit_entry: Optional[PitEntry],
    router: bytes,
    cache_hit: bool,
    strict: bool = False,
) -> PInt:
    """Build the pInt reporting a cache hit or the collapsed arrivals of a PIT entry.

    AGGREGATE pInts carry no cdata. For DISTINCT and INDIVIDUAL content a
    missing interest payload is replaced by an empty blob unless
    ``strict`` is set, in which case :class:`MissingCrSD` is raised.
    """
    if co.acct is AcctFlag.NONE:
        raise ValueError("content is not accountable")
    if cache_hit:
        if trigger_interest is None:
            raise ValueError("cache-hit pInt needs the triggering interest")
        payloads = [trigger_interest.payload]
    else:
        if pit_entry is None:
            raise ValueError("collapsed-interest pInt needs a PIT entry")
        payloads = [a.payload for a in pit_entry.arrivals if not a.forwarded]
        if not payloads:
            raise ValueError("PIT entry has no collapsed arrivals")
    if co.acct is AcctFlag.AGGREGATE:
        cdata: tuple[bytes, ...] = ()
    else:
        if strict and any(p is None for p in payloads):
            raise MissingCrSD(f"{co.name}: collapsed interest without payload")
        cdata = tuple(b"" if p is None else p for p in payloads)
    # every field is valid by construction: acct is not NONE, blobs come from
    # validated interests, and cdata matches count
    if len(router) > MAX_ORIGIN or len(cdata) > MAX_CDATA_ITEMS:
        return PInt(co.name, co.acct, router, len(payloads), cdata)
    return PInt.unchecked(co.name, co.acct, router, len(payloads), cdata)


class Node:
    """Forwarding state of one CCN router."""

    def __init__(
        self,
        node_id: str,
        fib: Iterable[FibEntry] = (),
        *,
        router_id: Optional[bytes] = None,
        multicast: bool = False,
        collapsing: bool = True,
        cache_capacity: Optional[int] = None,
        batch_window: int = 0,
        strict_crsd: bool = False,
    ):
        if cache_capacity is not None and cache_capacity < 1:
            raise ConfigError("cache_capacity must be a positive integer")
        self.node_id = node_id
        self.router_id = router_id if router_id is not None else node_id.encode()
        self.multicast = multicast
        self.collapsing = collapsing
        self.cache_capacity = cache_capacity
        self.batch_window = batch_window
        self.strict_crsd = strict_crsd
        self.clock = 0
        self.cs: OrderedDict[Name, CsEntry] = OrderedDict()
        self.pit: dict[Name, PitEntry] = {}
        self.fib: dict[Name, FibEntry] = {}
        self.metrics: Counter[str] = Counter()
        # name -> [ptype, count, cdata, deadline]
        self._batches: dict[Name, list] = {}
        self.pending_timers: list[int] = []
        self._routes: dict[Name, Optional[FibEntry]] = {}
        for entry in fib:
            self.add_route(entry)

    # -- FIB -------------------------------------------------------------

    def add_route(self, entry: FibEntry) -> None:
        self.fib[entry.prefix] = entry
        self._routes.clear()

    def route(self, name: Name) -> Optional[FibEntry]:
        try:
            return self._routes[name]
        except KeyError:
            pass
        comps = name.components
        found = None
        for n in range(len(comps), -1, -1):
            found = self.fib.get(name if n == len(comps) else Name(comps[:n]))
            if found is not None:
                break
        self._routes[name] = found
        return found

    # -- CS --------------------------------------------------------------

    def cache_lookup(self, name: Name) -> Optional[CsEntry]:
        entry = self.cs.get(name)
        if entry is None:
            return None
        if entry.expires_at <= self.clock:
            del self.cs[name]
            self.metrics["evicted"] += 1
            return None
        if self.cache_capacity is not None:
            self.cs.move_to_end(name)
        return entry

    def cache_insert(self, co: ContentObject) -> bool:
        if co.expiry_time <= 0:
            return False
        self.cs[co.name] = CsEntry(co, self.clock, self.clock + co.expiry_time)
        self.cs.move_to_end(co.name)
        if self.cache_capacity is not None:
            while len(self.cs) > self.cache_capacity:
                self.cs.popitem(last=False)
                self.metrics["evicted"] += 1
        return True

    def evict_expired(self) -> int:
        dead = [n for n, e in self.cs.items() if e.expires_at <= self.clock]
        for n in dead:
            del self.cs[n]
        self.metrics["evicted"] += len(dead)
        return len(dead)

    # -- handlers --------------------------------------------------------

    def on_interest(self, interest: Interest, face: Face) -> Output:
        m = self.metrics
        m["interests"] += 1
        name = interest.name
        hit = self.cache_lookup(name)
        if hit is not None:
            co = hit.content
            m["cache_hits"] += 1
            out: Output = [(face, co)]
            if co.acct is not AcctFlag.NONE:
                m["accountable_hits"] += 1
                pint = generate_pint(co, interest, None, self.router_id, True, self.strict_crsd)
                m["pints_cache_hit"] += 1
                out.extend(self._emit_pint(pint))
            return out

        entry = self.pit.get(name)
        if entry is not None:
            if any(a.face == face for a in entry.arrivals):
                if self.collapsing:
                    m["duplicate_arrivals"] += 1
                    return []
                return self._forward(interest, face)
            if self.collapsing:
                entry.arrivals.append(Arrival(face, interest.payload, False))
                m["collapsed"] += 1
                return []
            out = self._forward(interest, face)
            if out:
                entry.arrivals.append(Arrival(face, interest.payload, True))
            return out

        out = self._forward(interest, face)
        if out:
            self.pit[name] = PitEntry(name, [Arrival(face, interest.payload, True)])
        return out

    def _forward(self, interest: Interest, face: Face) -> Output:
        fib = self.route(interest.name)
        if fib is None:
            self.metrics["no_route"] += 1
            return []
        if self.multicast:
            hops = [h for h in fib.next_hops if h != face] or [fib.next_hops[0]]
        else:
            hops = [fib.next_hops[0]]
        self.metrics["interests_forwarded"] += len(hops)
        return [(h, interest) for h in hops]

    def on_content(self, co: ContentObject, face: Face) -> Output:
        m = self.metrics
        m["contents"] += 1
        entry = self.pit.pop(co.name, None)
        if entry is None:
            m["unsolicited"] += 1
            return []
        out: Output = [(a.face, co) for a in entry.arrivals]
        if co.acct is not AcctFlag.NONE and any(not a.forwarded for a in entry.arrivals):
            pint = generate_pint(co, None, entry, self.router_id, False, self.strict_crsd)
            m["pints_collapsed"] += 1
            out.extend(self._emit_pint(pint))
        if self.cache_insert(co):
            m["cached"] += 1
        return out

    def on_pint(self, pint: PInt, face: Face) -> Output:
        self.metrics["pints"] += 1
        fib = self.route(pint.name)
        if fib is None:
            self.metrics["no_route"] += 1
            return []
        return [(fib.next_hops[0], pint)]

    def on_nack(self, nack: Nack, face: Face) -> Output:
        self.metrics["nacks"] += 1
        entry = self.pit.pop(nack.name, None)
        if entry is None:
            self.metrics["unsolicited"] += 1
            return []
        return [(a.face, nack) for a in entry.arrivals]

    def receive(self, msg: Message, face: Face) -> Output:
        t = type(msg)
        if t is Interest:
            return self.on_interest(msg, face)
        if t is ContentObject:
            return self.on_content(msg, face)
        if t is PInt:
            return self.on_pint(msg, face)
        if t is Nack:
            return self.on_nack(msg, face)
        raise TypeError(f"not a message: {t.__name__}")

    # -- pInt emission and batching ---------------------------------------

    def _emit_pint(self, pint: PInt) -> Output:
        if self.batch_window > 0:
            batch = self._batches.get(pint.name)
            if batch is None:
                deadline = self.clock + self.batch_window
                self._batches[pint.name] = [pint.ptype, pint.count, list(pint.cdata), deadline]
                self.pending_timers.append(deadline)
            else:
                batch[1] += pint.count
                batch[2].extend(pint.cdata)
            self.metrics["pints_batched"] += 1
            return []
        return self._send_pint(pint)

    def _send_pint(self, pint: PInt) -> Output:
        fib = self.route(pint.name)
        if fib is None:
            self.metrics["pint_no_route"] += 1
            return []
        self.metrics["pints_generated"] += 1
        self.metrics["pint_count_generated"] += pint.count
        return [(fib.next_hops[0], pint)]

    def flush_batches(self, force: bool = False) -> Output:
        """Emit one pInt per name whose batching window has closed."""
        out: Output = []
        due = [n for n, b in self._batches.items() if force or b[3] <= self.clock]
        for name in due:
            ptype, count, cdata, _ = self._batches.pop(name)
            cdata = () if ptype is AcctFlag.AGGREGATE else tuple(cdata)
            out.extend(self._send_pint(PInt(name, ptype, self.router_id, count, cdata)))
        return out

    def take_timers(self) -> Sequence[int]:
        timers, self.pending_timers = self.pending_timers, []
        return timers
