"""Deterministic discrete-event simulator.

Events are ordered by ``(tick, sequence)``; the sequence number is a
global counter, so a run is a pure function of its inputs and seed.

pInts leave no router state, so by default a pInt's transit through
routers is resolved when it is emitted: every hop still runs
:meth:`Node.on_pint` and is charged to the node and link metrics, and the
producer receives it at the summed link delay.
"""

from __future__ import annotations

import gc
import heapq
import itertools
import math
import random
from collections import Counter, deque
from typing import Mapping, Optional

import numpy as np

from ..analytic import Scheme
from ..codec import encoded_size, name_size
from ..core import AcctFlag, ContentObject, Interest, Message, Nack, Name, PInt
from ..crsd import (
    CrSD,
    CrsdForm,
    NonceStamp,
    make_a_crsd,
    make_sec_crsd,
    random_bytes,
    random_nonce,
)
from ..errors import ConfigError
from ..keys import KeyRegistry
from ..node import Node
from ..producer import KEY_COMPONENT, Producer, ProducerConfig
from .metrics import MetricsReport, NodeReport
from .specs import TICKS_PER_SECOND, AdversarySpec, Arrival, Behavior, Prewarm, TrafficSpec
from .topology import Role, Topology, build_fibs, hop_distances, node_key

DELIVER, TIMER, ADVERSARY = 0, 1, 2

_TYPE_NAMES = {Interest: "interest", ContentObject: "content", PInt: "pint", Nack: "nack"}
_PROCESSED = {Interest: "interests", ContentObject: "contents", PInt: "pints", Nack: "nacks"}


def name_pool(prefixes: list[Name], size: int) -> list[Name]:
    """``size`` names spread round-robin over the producer prefixes."""
    return [prefixes[i % len(prefixes)].append(f"{i:04d}") for i in range(size)]


def arrival_times(traffic: TrafficSpec, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Issue ticks and pool indices for one consumer."""
    rng = np.random.default_rng([traffic.seed, index])
    if traffic.arrival is Arrival.POISSON:
        p = traffic.rate / TICKS_PER_SECOND
        expected = int(traffic.duration * p * 1.2) + 64
        times = np.cumsum(rng.geometric(p, size=expected))
        while times[-1] < traffic.duration:
            more = np.cumsum(rng.geometric(p, size=expected)) + times[-1]
            times = np.concatenate([times, more])
        times = times[times < traffic.duration]
    else:
        times = np.arange(1, traffic.duration, traffic.period, dtype=np.int64)
    if traffic.requests is not None:
        times = times[: traffic.requests]
    names = rng.integers(traffic.pool, size=len(times))
    return times.astype(np.int64), names


class _Consumer:
    __slots__ = ("cid", "index", "rng", "times", "names", "pos", "pending", "counts", "routes", "inbox")

    def __init__(self, cid: str, index: int, traffic: TrafficSpec):
        self.cid = cid
        self.index = index
        self.rng = random.Random(f"consumer:{traffic.seed}:{cid}")
        times, names = arrival_times(traffic, index)
        self.times, self.names = times.tolist(), names.tolist()
        self.pos = 0
        self.pending: dict[Name, int] = {}
        self.counts: Counter[str] = Counter()
        self.routes: dict[Name, str] = {}
        # content already on its way here: (tick, seq, sender, message)
        self.inbox: list[tuple] = []


class _Adversary:
    def __init__(self, spec: AdversarySpec, sim: "Simulation"):
        self.spec = spec
        self.node = sim.routers[spec.router]
        self.rng = random.Random(f"adversary:{sim.traffic.seed}:{spec.router}")
        self.interval = max(1, round(TICKS_PER_SECOND / spec.rate))
        self.injected = 0
        self.observed: deque[tuple[int, Name, bytes]] = deque()

    def done(self) -> bool:
        return self.spec.count is not None and self.injected >= self.spec.count


class Simulation:
    def __init__(
        self,
        topology: Topology,
        traffic: TrafficSpec,
        producer_configs: Optional[Mapping[str, list[ProducerConfig]]] = None,
        adversary: Optional[AdversarySpec] = None,
        keys: Optional[KeyRegistry] = None,
    ):
        topology.validate()
        self.topo = topology
        self.traffic = traffic
        self.roles = dict(topology.nodes)
        self.adj = topology.adjacency()
        self.fibs = build_fibs(topology)
        self.distance = hop_distances(topology, topology.producers)

        prefixes = [p for n in topology.producers for p in topology.prefixes[n]]
        self.pool = name_pool(prefixes, traffic.pool)
        consumers = topology.consumers
        content_acct = AcctFlag.NONE if traffic.scheme is Scheme.ENCRYPTION else traffic.acct
        if keys is None and content_acct is AcctFlag.INDIVIDUAL:
            keys = KeyRegistry.generate(
                prefixes, consumers, random.Random(f"keys:{traffic.seed}"), traffic.tag_style
            )
        self.keys = keys
        self.content_acct = content_acct

        if producer_configs is None:
            expiry = 0 if traffic.scheme is Scheme.CACHELESS else traffic.content_expiry
            producer_configs = {
                n: [
                    ProducerConfig(
                        prefix=p,
                        acct_policy={p: content_acct},
                        keys=keys,
                        dedup_window=traffic.window,
                        payload_size=traffic.payload_size,
                        expiry_time=expiry,
                        nonce_bits=traffic.nonce_bits,
                    )
                    for p in topology.prefixes[n]
                ]
                for n in topology.producers
            }
        self.producers: dict[str, list[Producer]] = {
            n: [Producer(cfg) for cfg in producer_configs.get(n, [])] for n in topology.producers
        }

        self.routers: dict[str, Node] = {
            r: Node(
                r,
                self.fibs[r],
                multicast=traffic.multicast,
                collapsing=traffic.collapsing,
                cache_capacity=traffic.cache_capacity,
                batch_window=traffic.batch_window,
            )
            for r in topology.routers
        }
        self.consumers = {c: _Consumer(c, i, traffic) for i, c in enumerate(consumers)}
        self.node_counts: dict[str, Counter] = {n: Counter() for n in topology.nodes}

        self.adversary: Optional[_Adversary] = None
        if adversary is not None:
            if self.roles.get(adversary.router) is not Role.ROUTER:
                raise ConfigError(f"compromised node {adversary.router} is not a router")
            self.adversary = _Adversary(adversary, self)

        self._owners: dict[tuple[str, Name], Optional[Producer]] = {}
        self._heap: list = []
        self._seq = itertools.count()
        # (src, dst, message type) -> [messages, bytes]
        self._links: dict[tuple[str, str, str], list[int]] = {}
        self._name_sizes: dict[Name, int] = {}
        self._content_sizes: dict[int, tuple[ContentObject, int]] = {}
        self._loss = traffic.loss
        self._fast_pints = traffic.pint_fast_forward and not traffic.loss
        # content bound for consumers skips the main heap and is replayed from per-consumer
        # inboxes in (tick, seq) order before the consumer's next event; the encryption scheme
        # answers deliveries with new interests, so it keeps the plain path
        self._consumer_inbox = self._fast_pints and traffic.scheme is not Scheme.ENCRYPTION
        self._offheap_events = 0
        self._pint_paths: dict[tuple, tuple] = {}
        # pInt transit per (sender, first router, name) -> [messages, bytes]
        self._transit: dict[tuple, list[int]] = {}
        self._pint_recs: dict[tuple, list] = {}
        self._agg_pints: dict[tuple, list[int]] = {}
        self._loss_rng = random.Random(f"loss:{traffic.seed}")
        self._ran = False
        self._prewarm()

    # -- setup ---------------------------------------------------------------------

    def _producer_for(self, node: str, name: Name) -> Optional[Producer]:
        key = (node, name)
        try:
            return self._owners[key]
        except KeyError:
            pass
        best = None
        for p in self.producers.get(node, ()):
            if p.prefix.is_prefix_of(name) and (best is None or len(p.prefix) > len(best.prefix)):
                best = p
        self._owners[key] = best
        return best

    def _prewarm(self) -> None:
        mode = self.traffic.prewarm
        if mode is Prewarm.NONE:
            return
        if mode is Prewarm.EDGE:
            targets = sorted({self.fibs[c][0].next_hops[0] for c in self.consumers}, key=node_key)
        else:
            targets = list(self.routers)
        owners = {}
        for n in self.producers:
            for name in self.pool:
                p = self._producer_for(n, name)
                if p is not None:
                    owners[name] = p
        for r in targets:
            if r not in self.routers:
                continue
            for name, p in owners.items():
                self.routers[r].cache_insert(p.content_for(name))

    # -- transport -----------------------------------------------------------------

    def _name_size(self, name: Name) -> int:
        ns = self._name_sizes.get(name)
        if ns is None:
            ns = self._name_sizes[name] = name_size(name)
        return ns

    def _size(self, msg: Message) -> int:
        t = type(msg)
        if t is Interest:
            return 3 + self._name_size(msg.name) + (len(msg.payload) if msg.payload is not None else 0)
        if t is PInt:
            return (10 + self._name_size(msg.name) + len(msg.origin)
                    + sum(2 + len(b) for b in msg.cdata))
        if t is ContentObject:
            # content objects are memoised by the producers, so identity is stable
            hit = self._content_sizes.get(id(msg))
            if hit is None or hit[0] is not msg:
                hit = self._content_sizes[id(msg)] = (msg, encoded_size(msg))
            return hit[1]
        return encoded_size(msg)

    def _account_link(self, src: str, dst: str, tname: str, size: int) -> None:
        slot = self._links.get((src, dst, tname))
        if slot is None:
            slot = self._links[(src, dst, tname)] = [0, 0]
        slot[0] += 1
        slot[1] += size

    def _send(self, src: str, dst: str, msg: Message, tick: int) -> None:
        t = type(msg)
        if t is PInt and self._fast_pints:
            key = (src, dst, msg.name)
            rec = self._pint_recs.get(key)
            if rec is None:
                rec = self._pint_recs[key] = self._pint_record(key)
            if rec:
                self._send_traced_pint(rec, msg, tick)
                return
        tname = _TYPE_NAMES[t]
        size = self._size(msg)
        slot = self._links.get((src, dst, tname))
        if slot is None:
            slot = self._links[(src, dst, tname)] = [0, 0]
        slot[0] += 1
        slot[1] += size
        if self._loss and self._loss_rng.random() < self._loss:
            self.node_counts[src]["lost"] += 1
            return
        tick += self.adj[src][dst]
        if t is ContentObject and self._consumer_inbox:
            c = self.consumers.get(dst)
            if c is not None:
                heapq.heappush(c.inbox, (tick, next(self._seq), src, msg))
                return
        if tname == "pint" and self._fast_pints and dst in self.routers:
            # some router on the way has no route; walk it so the drop is counted there
            prev = src
            while dst in self.routers:
                self._offheap_events += 1
                out = self.routers[dst].on_pint(msg, prev)
                if not out:
                    return
                nxt = out[0][0]
                self._account_link(dst, nxt, tname, size)
                tick += self.adj[dst][nxt]
                prev, dst = dst, nxt
            src = prev
        heapq.heappush(self._heap, (tick, next(self._seq), DELIVER, dst, src, msg))

    def _pint_record(self, key: tuple) -> list:
        """Everything a fast-forwarded pInt entering ``key = (src, dst, name)`` touches.

        Empty when the pInt must take the hop-by-hop path instead.
        """
        src, dst, name = key
        if dst not in self.routers:
            return []
        path = self._pint_paths.get(key)
        if path is None:
            path = self._pint_paths[key] = self._trace_pint(src, dst, name)
        if not path:
            return []
        _, prev, last, delay = path
        link = self._links.setdefault((src, dst, "pint"), [0, 0])
        transit = self._transit.setdefault(key, [0, 0])
        tally = self._agg_pints.setdefault((last, name), [0, 0, 0]) if last in self.producers else None
        return [link, transit, self.adj[src][dst] + delay, last, prev, tally]

    def _send_traced_pint(self, rec: list, msg: PInt, tick: int) -> None:
        if msg.cdata:
            size = self._size(msg)
        else:
            ns = self._name_sizes.get(msg.name)
            if ns is None:
                ns = self._name_size(msg.name)
            size = 10 + ns + len(msg.origin)
        link, transit, delay, last, prev, tally = rec
        link[0] += 1
        link[1] += size
        transit[0] += 1
        transit[1] += size
        tick += delay
        if tally is not None and msg.ptype is AcctFlag.AGGREGATE:
            # plain counters at the producer commute, so these are tallied and settled after the run
            tally[0] += 1
            tally[1] += msg.count
            tally[2] = tick
            return
        heapq.heappush(self._heap, (tick, next(self._seq), DELIVER, last, prev, msg))

    def _trace_pint(self, src: str, dst: str, name: Name) -> tuple:
        """Router hops, last sender, receiver and delay for a pInt entering ``dst``.

        Returns ``()`` when a router on the way has no route.
        """
        hops = []
        delay = 0
        prev = src
        while dst in self.routers:
            fib = self.routers[dst].route(name)
            if fib is None:
                return ()
            nxt = fib.next_hops[0]
            hops.append((dst, nxt))
            delay += self.adj[dst][nxt]
            prev, dst = dst, nxt
        return (tuple(hops), prev, dst, delay)

    def _settle_transit(self) -> None:
        """Charge deferred pInt transit to router and link metrics."""
        for key, (count, size) in self._transit.items():
            if not count:
                continue
            hops = self._pint_paths[key][0]
            # each router arrival would have been one event on the hop-by-hop path
            self._offheap_events += count * len(hops)
            for router, nxt in hops:
                self.routers[router].metrics["pints"] += count
                slot = self._links.setdefault((router, nxt, "pint"), [0, 0])
                slot[0] += count
                slot[1] += size
        self._transit.clear()

    def _settle_aggregate_pints(self) -> int:
        delivered = 0
        for (node, name), (pints, count, tick) in self._agg_pints.items():
            if not pints:
                continue
            delivered += pints
            self.node_counts[node][_PROCESSED[PInt]] += pints
            producer = self._producer_for(node, name)
            if producer is None:
                self.node_counts[node]["no_producer"] += pints
            else:
                producer.ingest_aggregate_pints(name, pints, count, tick)
        self._agg_pints.clear()
        return delivered

    def _schedule(self, tick: int, kind: int, node: str) -> None:
        heapq.heappush(self._heap, (tick, next(self._seq), kind, node, None, None))

    # -- consumers -------------------------------------------------------------------

    def _payload(self, c: _Consumer, name: Name, tick: int) -> Optional[bytes]:
        t = self.traffic
        if self.content_acct is AcctFlag.INDIVIDUAL:
            assert self.keys is not None
            crsd = CrSD(CrsdForm.PSEUDONYM, c.cid.encode())
            sec = make_sec_crsd(crsd, name, self.keys.tag_key(c.cid, name), tick, c.rng, t.nonce_bits)
            if t.anonymous:
                return make_a_crsd(sec, self.keys.public_key(name), c.rng).to_bytes()
            return sec.to_bytes()
        if t.nonces:
            return NonceStamp(random_nonce(c.rng, t.nonce_bits), tick).to_bytes()
        return None

    def _edge(self, c: _Consumer, name: Name) -> Optional[str]:
        hop = c.routes.get(name)
        if hop is None:
            best = None
            for entry in self.fibs[c.cid]:
                if entry.prefix.is_prefix_of(name) and (best is None or len(entry.prefix) > len(best.prefix)):
                    best = entry
            if best is None:
                return None
            hop = c.routes[name] = best.next_hops[0]
        return hop

    def _drain(self, c: _Consumer, tick: int, seq: float) -> None:
        """Deliver inbox content that precedes event ``(tick, seq)``."""
        inbox = c.inbox
        counts = self.node_counts[c.cid]
        while inbox and (inbox[0][0] < tick or (inbox[0][0] == tick and inbox[0][1] < seq)):
            t, _, src, msg = heapq.heappop(inbox)
            self._offheap_events += 1
            counts["contents"] += 1
            self._consumer_receive(c.cid, src, msg, t)

    def _issue(self, cid: str, tick: int) -> None:
        c = self.consumers[cid]
        if c.inbox:
            self._drain(c, tick, math.inf)
        name = self.pool[c.names[c.pos]]
        c.pos += 1
        c.counts["requests"] += 1
        if name in c.pending:
            c.counts["suppressed"] += 1
            return
        hop = self._edge(c, name)
        if hop is None:
            c.counts["no_route"] += 1
            return
        c.pending[name] = tick
        c.counts["interests_issued"] += 1
        self._send(cid, hop, Interest(name, self._payload(c, name, tick)), tick)

    def _consumer_receive(self, cid: str, src: str, msg: Message, tick: int) -> None:
        c = self.consumers[cid]
        if type(msg) is ContentObject:
            comps = msg.name.components
            if comps and comps[-1] == KEY_COMPONENT:
                c.counts["keys_received"] += 1
                return
            if c.pending.pop(msg.name, None) is None:
                c.counts["unsolicited"] += 1
                return
            c.counts["satisfied"] += 1
            if self.traffic.scheme is Scheme.ENCRYPTION:
                c.counts["key_interests_issued"] += 1
                self._send(cid, src, Interest(msg.name.append(KEY_COMPONENT)), tick)
        elif type(msg) is Nack:
            c.pending.pop(msg.name, None)
            c.counts["nacked"] += 1

    # -- producers -----------------------------------------------------------------------

    def _producer_receive(self, node: str, src: str, msg: Message, tick: int) -> None:
        counts = self.node_counts[node]
        producer = self._producer_for(node, msg.name)
        if producer is None:
            counts["no_producer"] += 1
            return
        if type(msg) is Interest:
            reply = producer.ingest_interest(msg, tick)
            self._send(node, src, reply, tick)
        elif type(msg) is PInt:
            producer.ingest_pint(msg, tick)

    # -- adversary --------------------------------------------------------------------------

    def _adversary_step(self, tick: int) -> None:
        adv = self.adversary
        assert adv is not None
        if adv.done() or tick >= self.traffic.duration + adv.spec.replay_delay:
            return
        self._schedule(tick + adv.interval, ADVERSARY, adv.spec.router)
        ptype = self.content_acct if self.content_acct is not AcctFlag.NONE else AcctFlag.INDIVIDUAL
        if adv.spec.behavior is Behavior.FORGE_PINT:
            name = self.pool[adv.rng.randrange(len(self.pool))]
            blob = self._forged_blob(adv, name, tick)
        else:
            if not adv.observed or adv.observed[0][0] + adv.spec.replay_delay > tick:
                return
            _, name, blob = adv.observed.popleft()
        fib = adv.node.route(name)
        if fib is None:
            return
        adv.injected += 1
        pint = PInt(name, ptype, adv.node.router_id, 1, () if ptype is AcctFlag.AGGREGATE else (blob,))
        self._send(adv.spec.router, fib.next_hops[0], pint, tick)

    def _forged_blob(self, adv: _Adversary, name: Name, tick: int) -> bytes:
        # well-formed Sec-CrSD naming a real consumer, with a tag the router cannot compute
        victims = sorted(self.consumers, key=node_key)
        crsd = CrSD(CrsdForm.PSEUDONYM, victims[adv.rng.randrange(len(victims))].encode())
        nonce = random_nonce(adv.rng, self.traffic.nonce_bits)
        from ..crsd import SecCrSD

        sec = SecCrSD(crsd, nonce, tick, random_bytes(adv.rng, 32))
        if self.keys is not None and self.traffic.anonymous:
            return make_a_crsd(sec, self.keys.public_key(name), adv.rng).to_bytes()
        return sec.to_bytes()

    # -- main loop ----------------------------------------------------------------------------

    def run(self) -> MetricsReport:
        if self._ran:
            raise RuntimeError("a Simulation instance runs once; build a new one")
        self._ran = True
        if self.adversary is not None:
            self._schedule(self.adversary.spec.start, ADVERSARY, self.adversary.spec.router)

        # consumer requests are merged with the heap instead of queued in it;
        # at equal ticks queued events go first
        cids = list(self.consumers)
        lists = [self.consumers[c].times for c in cids]
        all_t = np.concatenate([np.asarray(t, dtype=np.int64) for t in lists]) if lists else np.zeros(0, np.int64)
        all_c = np.concatenate([np.full(len(t), i, dtype=np.int64) for i, t in enumerate(lists)]) if lists else all_t
        order = np.lexsort((all_c, all_t))
        issue_t = all_t[order].tolist()
        issue_c = [cids[i] for i in all_c[order].tolist()]
        heap = self._heap
        # the loop allocates many short-lived acyclic objects; cyclic GC passes only cost time
        gc_was_enabled = gc.isenabled()
        gc.disable()
        try:
            events = self._loop(heap, issue_t, issue_c)
        finally:
            if gc_was_enabled:
                gc.enable()
        for c in self.consumers.values():
            self._drain(c, math.inf, math.inf)
        events += self._settle_aggregate_pints()
        self._settle_transit()
        events += self._offheap_events
        return self._report(events)

    def _loop(self, heap: list, issue_t: list, issue_c: list) -> int:
        pop = heapq.heappop
        routers = self.routers
        consumers = self.consumers
        node_counts = self.node_counts
        adv = self.adversary
        issue = self._issue
        send = self._send
        n_issue = len(issue_t)
        ii = 0
        events = 0
        while True:
            if ii < n_issue and (not heap or issue_t[ii] < heap[0][0]):
                issue(issue_c[ii], issue_t[ii])
                ii += 1
                events += 1
                continue
            if not heap:
                break
            tick, seq, kind, dst, src, msg = pop(heap)
            events += 1
            if kind == DELIVER:
                node = routers.get(dst)
                if node is not None:
                    if adv is not None and dst == adv.spec.router and type(msg) is Interest and msg.payload:
                        adv.observed.append((tick, msg.name, msg.payload))
                    node.clock = tick
                    for face, out in node.receive(msg, src):
                        send(dst, face, out, tick)
                    if node.pending_timers:
                        for t in node.take_timers():
                            self._schedule(t, TIMER, dst)
                else:
                    c = consumers.get(dst)
                    if c is not None and c.inbox:
                        self._drain(c, tick, seq)
                    node_counts[dst][_PROCESSED[type(msg)]] += 1
                    if c is not None:
                        self._consumer_receive(dst, src, msg, tick)
                    else:
                        self._producer_receive(dst, src, msg, tick)
            elif kind == TIMER:
                node = routers[dst]
                node.clock = tick
                for face, out in node.flush_batches():
                    send(dst, face, out, tick)
            else:
                self._adversary_step(tick)
        return events

    # -- reporting -------------------------------------------------------------------------------

    def _report(self, events: int) -> MetricsReport:
        report = MetricsReport(seed=self.traffic.seed)
        for n, role in self.roles.items():
            counts = Counter()
            if role is Role.ROUTER:
                counts.update(self.routers[n].metrics)
                counts["cs_entries"] = len(self.routers[n].cs)
                counts["pit_entries"] = len(self.routers[n].pit)
            else:
                counts.update(self.node_counts[n])
                if role is Role.CONSUMER:
                    counts.update(self.consumers[n].counts)
                else:
                    for p in self.producers[n]:
                        counts.update({f"producer_{k}": v for k, v in p.metrics.items()})
            fib = self.fibs[n]
            parent = fib[0].next_hops[0] if fib else ""
            report.nodes[n] = NodeReport(role.value, self.distance.get(n, -1), parent,
                                         {k: int(v) for k, v in counts.items() if v})
        for (a, b, tname), slot in self._links.items():
            report.links.setdefault((a, b), {})[tname] = list(slot)

        detection: Counter = Counter()
        for n in sorted(self.producers, key=node_key):
            for p in self.producers[n]:
                for row in p.ledger_rows():
                    report.ledger.append((n, *row))
                for r in p.ledger.rejections:
                    detection[(r.origin.decode(errors="replace") or "-", r.reason.value)] += 1
        report.detection = dict(detection)

        consumers = [self.consumers[c].counts for c in self.consumers]
        producers = [p for ps in self.producers.values() for p in ps]
        routers = [r.metrics for r in self.routers.values()]
        s = report.summary
        s["events"] = events
        s["consumer_requests"] = sum(c["requests"] for c in consumers)
        s["consumer_interests"] = sum(c["interests_issued"] for c in consumers)
        s["consumer_suppressed"] = sum(c["suppressed"] for c in consumers)
        s["consumer_satisfied"] = sum(c["satisfied"] for c in consumers)
        s["consumer_nacked"] = sum(c["nacked"] for c in consumers)
        s["consumer_key_interests"] = sum(c["key_interests_issued"] for c in consumers)
        key_requests = sum(p.metrics["key_requests"] for p in producers)
        s["producer_interests"] = sum(p.metrics["interests"] for p in producers) - key_requests
        s["producer_key_interests"] = key_requests
        s["producer_pints"] = sum(p.metrics["pints"] for p in producers)
        s["producer_pint_count"] = sum(p.metrics["pint_count"] for p in producers)
        s["producer_pint_reported"] = sum(p.pint_reported() for p in producers)
        s["producer_aggregate"] = sum(p.count(AcctFlag.AGGREGATE) for p in producers)
        s["producer_distinct"] = sum(p.count(AcctFlag.DISTINCT) for p in producers)
        s["producer_individual"] = sum(p.count(AcctFlag.INDIVIDUAL) for p in producers)
        s["producer_rejections"] = sum(len(p.ledger.rejections) for p in producers)
        s["producer_nacks"] = sum(p.metrics["nacks"] for p in producers)
        s["router_cache_hits"] = sum(m["cache_hits"] for m in routers)
        s["router_accountable_hits"] = sum(m["accountable_hits"] for m in routers)
        s["router_pints_generated"] = sum(m["pints_generated"] for m in routers)
        s["router_collapsed"] = sum(m["collapsed"] for m in routers)
        s["router_no_route"] = sum(m["no_route"] + m["pint_no_route"] for m in routers)
        s["router_unsolicited"] = sum(m["unsolicited"] for m in routers)
        s["adversary_injected"] = self.adversary.injected if self.adversary else 0
        s["lost"] = sum(c["lost"] for c in self.node_counts.values())
        return report


def run(
    topology: Topology,
    traffic: TrafficSpec,
    adversary: Optional[AdversarySpec] = None,
    producer_configs: Optional[Mapping[str, list[ProducerConfig]]] = None,
    keys: Optional[KeyRegistry] = None,
) -> MetricsReport:
    return Simulation(topology, traffic, producer_configs, adversary, keys).run()


def _run_one(args: tuple) -> MetricsReport:
    topology, traffic, adversary, keys_text = args
    keys = KeyRegistry.from_text(keys_text) if keys_text is not None else None
    return run(topology, traffic, adversary, keys=keys)


def run_seeds(
    topology: Topology,
    traffic: TrafficSpec,
    seeds: list[int],
    adversary: Optional[AdversarySpec] = None,
    keys: Optional[KeyRegistry] = None,
    workers: int = 1,
) -> list[MetricsReport]:
    """One run per seed, in seed order; ``workers > 1`` uses separate processes."""
    import dataclasses

    keys_text = keys.to_text() if keys is not None else None
    jobs = [(topology, dataclasses.replace(traffic, seed=s), adversary, keys_text) for s in seeds]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_run_one, jobs))
