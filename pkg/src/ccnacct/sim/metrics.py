"""Simulation metrics and their CSV form.

Reports serialise to a long-format CSV with columns
``section,subject,detail,metric,value``; see ``docs/formats.md``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

MSG_TYPES = ("interest", "content", "pint", "nack")
PROCESSED = ("interests", "contents", "pints", "nacks")
CSV_HEADER = ("section", "subject", "detail", "metric", "value")


@dataclass
class NodeReport:
    role: str
    distance: int
    parent: str = ""
    counts: dict[str, int] = field(default_factory=dict)

    def get(self, key: str) -> int:
        return self.counts.get(key, 0)

    @property
    def processed(self) -> int:
        return sum(self.get(k) for k in PROCESSED)


@dataclass
class MetricsReport:
    seed: int
    nodes: dict[str, NodeReport] = field(default_factory=dict)
    # (src, dst) -> message type -> [messages, bytes]
    links: dict[tuple[str, str], dict[str, list[int]]] = field(default_factory=dict)
    # (producer, name, type, consumer, count, duplicates, rejections)
    ledger: list[tuple[str, str, str, str, int, int, int]] = field(default_factory=list)
    detection: dict[tuple[str, str], int] = field(default_factory=dict)
    summary: dict[str, int] = field(default_factory=dict)

    # -- derived views --------------------------------------------------------

    def link_messages(self, a: str, b: str, types: Iterable[str] = MSG_TYPES) -> int:
        """Messages crossing the a-b link in either direction."""
        total = 0
        for key in ((a, b), (b, a)):
            per_type = self.links.get(key, {})
            total += sum(per_type.get(t, (0, 0))[0] for t in types)
        return total

    def link_bytes(self, a: str, b: str, types: Iterable[str] = MSG_TYPES) -> int:
        total = 0
        for key in ((a, b), (b, a)):
            per_type = self.links.get(key, {})
            total += sum(per_type.get(t, (0, 0))[1] for t in types)
        return total

    def conservation_holds(self) -> bool:
        s = self.summary
        return s["producer_interests"] + s["producer_pint_count"] == s["consumer_interests"]

    def router_cache_hits(self) -> int:
        return sum(n.get("accountable_hits") for n in self.nodes.values() if n.role == "router")

    def rejections_from(self, origin: str) -> int:
        return sum(v for (o, _), v in self.detection.items() if o == origin)

    # -- serialisation ----------------------------------------------------------

    def rows(self) -> list[tuple[str, str, str, str, Union[int, str]]]:
        out: list[tuple[str, str, str, str, Union[int, str]]] = []
        for key in sorted(self.summary):
            out.append(("summary", "", "", key, self.summary[key]))
        for nid in sorted(self.nodes, key=_natural):
            n = self.nodes[nid]
            out.append(("node", nid, n.role, "distance", n.distance))
            out.append(("node", nid, n.role, "parent", n.parent))
            for key in sorted(n.counts):
                out.append(("node", nid, n.role, key, n.counts[key]))
        for (a, b) in sorted(self.links, key=lambda k: (_natural(k[0]), _natural(k[1]))):
            for t in MSG_TYPES:
                if t in self.links[(a, b)]:
                    msgs, size = self.links[(a, b)][t]
                    out.append(("link", f"{a}>{b}", t, "messages", msgs))
                    out.append(("link", f"{a}>{b}", t, "bytes", size))
        for producer, name, kind, consumer, count, dups, rej in self.ledger:
            subject = f"{producer}:{name}"
            detail = kind if not consumer else f"{kind}:{consumer}"
            out.append(("ledger", subject, detail, "count", count))
            out.append(("ledger", subject, detail, "duplicates", dups))
            out.append(("ledger", subject, detail, "rejections", rej))
        for (origin, reason) in sorted(self.detection):
            out.append(("detection", origin, reason, "rejected", self.detection[(origin, reason)]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(self.rows())
        return buf.getvalue()


def _natural(node_id: str) -> tuple:
    from .topology import node_key

    return node_key(node_id)


def upstream_pint_fraction(report: MetricsReport, hit_ratio: float = 0.5) -> Optional[float]:
    """Share of pInts among messages processed by routers strictly upstream
    of cache locations.

    A router is a cache location when at least ``hit_ratio`` of the
    interests it received were cache hits. Its upstream routers are found
    by following ``parent`` (first FIB next hop) toward the producer;
    routers that are themselves cache locations are excluded. Returns
    ``None`` when no such router exists.
    """
    routers = {k: n for k, n in report.nodes.items() if n.role == "router"}
    locations = {
        k for k, n in routers.items()
        if n.get("interests") and n.get("cache_hits") >= hit_ratio * n.get("interests")
    }
    upstream: set[str] = set()
    for k in locations:
        cur = routers[k].parent
        while cur in routers:
            if cur not in locations:
                upstream.add(cur)
            cur = routers[cur].parent
    total = sum(routers[k].processed for k in upstream)
    if not total:
        return None
    return sum(routers[k].get("pints") for k in upstream) / total


def segment_counts(report: MetricsReport, consumer: str, producer: str) -> tuple[int, int]:
    """``(p_l, p_r)``: messages on the consumer's access link and on the
    producer's access link along the consumer's path."""
    node = report.nodes[consumer]
    first = node.parent
    p_l = report.link_messages(consumer, first)
    cur = first
    while report.nodes[cur].parent and report.nodes[cur].parent != producer:
        cur = report.nodes[cur].parent
    p_r = report.link_messages(cur, producer)
    return p_l, p_r


def summarize(reports: Iterable[MetricsReport]) -> list[tuple[str, float, int, int]]:
    """Per summary metric: (metric, mean, min, max) across seeds."""
    reports = list(reports)
    keys = sorted({k for r in reports for k in r.summary})
    out = []
    for k in keys:
        vals = [r.summary.get(k, 0) for r in reports]
        out.append((k, sum(vals) / len(vals), min(vals), max(vals)))
    return out
