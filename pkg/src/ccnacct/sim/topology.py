"""Topologies, topology files, and shortest-path FIB construction.

Topology file format (one directive per line, ``#`` comments)::

    node   <id> <consumer|router|producer>
    link   <a> <b> <delay-ticks>
    prefix <producer-id> <lci-name>
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from ..core import Name
from ..errors import ConfigError
from ..node import FibEntry

DEFAULT_PREFIX = Name.parse("/prefix")


class Role(str, enum.Enum):
    CONSUMER = "consumer"
    ROUTER = "router"
    PRODUCER = "producer"


def node_key(node_id: str) -> tuple:
    """Natural sort key: ``R2`` before ``R10``."""
    return tuple((0, int(t), "") if t.isdigit() else (1, 0, t) for t in re.findall(r"\d+|\D+", node_id))


@dataclass
class Topology:
    nodes: dict[str, Role] = field(default_factory=dict)
    links: list[tuple[str, str, int]] = field(default_factory=list)
    prefixes: dict[str, list[Name]] = field(default_factory=dict)
    label: str = ""

    def add_node(self, node_id: str, role: Union[Role, str]) -> None:
        if node_id in self.nodes:
            raise ConfigError(f"duplicate node {node_id}")
        self.nodes[node_id] = Role(role)

    def add_link(self, a: str, b: str, delay: int = 1) -> None:
        self.links.append((a, b, int(delay)))

    def add_prefix(self, node_id: str, prefix: Name) -> None:
        self.prefixes.setdefault(node_id, []).append(prefix)

    def with_role(self, role: Role) -> list[str]:
        return sorted((n for n, r in self.nodes.items() if r is role), key=node_key)

    @property
    def consumers(self) -> list[str]:
        return self.with_role(Role.CONSUMER)

    @property
    def routers(self) -> list[str]:
        return self.with_role(Role.ROUTER)

    @property
    def producers(self) -> list[str]:
        return self.with_role(Role.PRODUCER)

    def adjacency(self) -> dict[str, dict[str, int]]:
        adj: dict[str, dict[str, int]] = {n: {} for n in self.nodes}
        for a, b, d in self.links:
            adj[a][b] = d
            adj[b][a] = d
        return adj

    def validate(self) -> None:
        if not self.producers:
            raise ConfigError("topology has no producer")
        seen = set()
        for a, b, d in self.links:
            for n in (a, b):
                if n not in self.nodes:
                    raise ConfigError(f"link references unknown node {n}")
            if a == b:
                raise ConfigError(f"self-loop on {a}")
            if d < 1:
                raise ConfigError(f"link {a}-{b} has delay {d}; need >= 1 tick")
            key = frozenset((a, b))
            if key in seen:
                raise ConfigError(f"duplicate link {a}-{b}")
            seen.add(key)
        for n, prefixes in self.prefixes.items():
            if self.nodes.get(n) is not Role.PRODUCER:
                raise ConfigError(f"prefix assigned to non-producer {n}")
        for p in self.producers:
            if not self.prefixes.get(p):
                raise ConfigError(f"producer {p} has no prefix")
        adj = self.adjacency()
        for c in self.consumers:
            if not adj[c]:
                raise ConfigError(f"consumer {c} has no link")
        start = next(iter(self.nodes))
        reach = {start}
        todo = [start]
        while todo:
            for nb in adj[todo.pop()]:
                if nb not in reach:
                    reach.add(nb)
                    todo.append(nb)
        if len(reach) != len(self.nodes):
            missing = sorted(set(self.nodes) - reach, key=node_key)
            raise ConfigError(f"topology is not connected; unreachable: {', '.join(missing[:5])}")

    # -- generators ----------------------------------------------------------

    @classmethod
    def path(cls, n: int, delay: int = 1, prefix: Name = DEFAULT_PREFIX) -> "Topology":
        """Consumer ``C1``, routers ``R1..R{n-2}``, producer ``P``."""
        if n < 3:
            raise ConfigError("a path needs at least consumer, router and producer")
        topo = cls(label=f"path{n}")
        ids = ["C1"] + [f"R{i}" for i in range(1, n - 1)] + ["P"]
        topo.add_node("C1", Role.CONSUMER)
        for r in ids[1:-1]:
            topo.add_node(r, Role.ROUTER)
        topo.add_node("P", Role.PRODUCER)
        for a, b in zip(ids, ids[1:]):
            topo.add_link(a, b, delay)
        topo.add_prefix("P", prefix)
        return topo

    @classmethod
    def binary_tree(cls, height: int, delay: int = 1, prefix: Name = DEFAULT_PREFIX) -> "Topology":
        """Producer at the root, routers on levels 1..height-1, 2^height consumer leaves."""
        if height < 2:
            raise ConfigError("tree height must be at least 2")
        topo = cls(label=f"tree{height}")
        topo.add_node("P", Role.PRODUCER)
        topo.add_prefix("P", prefix)
        level = ["P"]
        counter = 0
        for depth in range(1, height + 1):
            nxt = []
            for parent in level:
                for _ in range(2):
                    counter += 1
                    if depth == height:
                        nid = f"C{len(nxt) + 1}"
                        topo.add_node(nid, Role.CONSUMER)
                    else:
                        nid = f"R{counter}"
                        topo.add_node(nid, Role.ROUTER)
                    topo.add_link(parent, nid, delay)
                    nxt.append(nid)
            level = nxt
        return topo

    # -- files ---------------------------------------------------------------

    @classmethod
    def parse(cls, text: str, source: str = "<topology>") -> "Topology":
        topo = cls(label=Path(source).stem)
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                kind = parts[0]
                if kind == "node" and len(parts) == 3:
                    topo.add_node(parts[1], Role(parts[2]))
                elif kind == "link" and len(parts) == 4:
                    topo.add_link(parts[1], parts[2], int(parts[3]))
                elif kind == "prefix" and len(parts) == 3:
                    topo.add_prefix(parts[1], Name.parse(parts[2]))
                else:
                    raise ConfigError(f"cannot parse {line!r}")
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from exc
        topo.validate()
        return topo

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "Topology":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"topology file not found: {path}")
        return cls.parse(path.read_text(), str(path))

    def to_text(self) -> str:
        lines = [f"# {self.label}"] if self.label else []
        for n, role in self.nodes.items():
            lines.append(f"node {n} {role.value}")
        for a, b, d in self.links:
            lines.append(f"link {a} {b} {d}")
        for n, prefixes in self.prefixes.items():
            for p in prefixes:
                lines.append(f"prefix {n} {p.uri()}")
        return "\n".join(lines) + "\n"


def hop_distances(topo: Topology, sources: Iterable[str]) -> dict[str, int]:
    """Multi-source BFS hop counts; nodes that cannot be reached are absent.

    Only routers (and the sources) relay: consumers and other producers
    are reached but never expanded.
    """
    adj = topo.adjacency()
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        u = queue.popleft()
        if dist[u] > 0 and topo.nodes[u] is not Role.ROUTER:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def build_fibs(
    topo: Topology, producer_prefixes: Optional[Mapping[str, Iterable[Name]]] = None
) -> dict[str, list[FibEntry]]:
    """Shortest-path (hop count) FIBs toward every producer prefix.

    Equal-cost next hops are all listed, ascending by node id. Producers
    get no entries for their own prefixes.
    """
    prefixes = topo.prefixes if producer_prefixes is None else producer_prefixes
    adj = topo.adjacency()
    fibs: dict[str, list[FibEntry]] = {n: [] for n in topo.nodes}
    for producer, names in prefixes.items():
        if producer not in topo.nodes:
            raise ConfigError(f"unknown producer {producer}")
        dist = hop_distances(topo, [producer])
        for n in topo.nodes:
            if n == producer:
                continue
            if n not in dist:
                raise ConfigError(f"producer {producer} unreachable from {n}")
            hops = sorted(
                (v for v in adj[n]
                 if dist.get(v) == dist[n] - 1 and (v == producer or topo.nodes[v] is Role.ROUTER)),
                key=node_key,
            )
            for name in names:
                fibs[n].append(FibEntry(name, tuple(hops)))
    return fibs
