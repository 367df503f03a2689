"""Scenario files: ``key = value`` lines, ``#`` comments.

Paths are resolved relative to the scenario file; ``builtin:<name>``
names a topology shipped with the package (``path5``, ``dfn``, ``att``).
See ``docs/formats.md`` for the full key list.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from ..analytic import Scheme
from ..core import AcctFlag
from ..errors import ConfigError
from ..keys import KeyRegistry
from .specs import AdversarySpec, Arrival, Behavior, Prewarm, TrafficSpec
from .topology import Topology

BUILTIN_PREFIX = "builtin:"
BUILTIN_TOPOLOGIES = ("path5", "dfn", "att")

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def _bool(v: str) -> bool:
    try:
        return _BOOL[v.lower()]
    except KeyError:
        raise ConfigError(f"not a boolean: {v!r}") from None


def _opt_int(v: str) -> Optional[int]:
    return None if v.lower() in ("none", "") else int(v)


# scenario key -> (TrafficSpec field, parser)
_TRAFFIC_KEYS = {
    "rate": ("rate", float),
    "pool": ("pool", int),
    "duration": ("duration", int),
    "collapsing": ("collapsing", _bool),
    "acct": ("acct", lambda v: AcctFlag[v.upper()]),
    "scheme": ("scheme", lambda v: Scheme(v.upper())),
    "arrival": ("arrival", lambda v: Arrival(v.lower())),
    "period": ("period", int),
    "requests": ("requests", _opt_int),
    "multicast": ("multicast", _bool),
    "batch_window": ("batch_window", int),
    "cache_capacity": ("cache_capacity", _opt_int),
    "payload_size": ("payload_size", int),
    "expiry": ("expiry", _opt_int),
    "prewarm": ("prewarm", lambda v: Prewarm(v.lower())),
    "nonces": ("nonces", _bool),
    "nonce_bits": ("nonce_bits", int),
    "tag_style": ("tag_style", str),
    "anonymous": ("anonymous", _bool),
    "window": ("window", int),
    "loss": ("loss", float),
}


def builtin_topology(name: str) -> Topology:
    if name not in BUILTIN_TOPOLOGIES:
        raise ConfigError(f"unknown builtin topology {name!r}; have {', '.join(BUILTIN_TOPOLOGIES)}")
    text = resources.files("ccnacct.data").joinpath(f"{name}.topo").read_text()
    return Topology.parse(text, f"{name}.topo")


def load_topology(ref: str, base: Optional[Path] = None) -> Topology:
    if ref.startswith(BUILTIN_PREFIX):
        return builtin_topology(ref[len(BUILTIN_PREFIX):])
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    return Topology.from_file(path)


@dataclass
class Scenario:
    topology: str
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    adversary: Optional[AdversarySpec] = None
    keys: Optional[str] = None
    output: str = "out"
    seeds: list[int] = field(default_factory=lambda: [0])
    base: Optional[Path] = None

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigError("scenario needs at least one repetition")

    def resolve(self, ref: str) -> Path:
        path = Path(ref)
        if self.base is not None and not path.is_absolute():
            path = self.base / path
        return path

    def load_topology(self) -> Topology:
        return load_topology(self.topology, self.base)

    def load_keys(self) -> Optional[KeyRegistry]:
        if self.keys is None:
            return None
        path = self.resolve(self.keys)
        if not path.is_file():
            raise ConfigError(f"key file not found: {path}")
        return KeyRegistry.load(path)

    def output_dir(self) -> Path:
        return self.resolve(self.output)

    def traffic_for(self, seed: int) -> TrafficSpec:
        return dataclasses.replace(self.traffic, seed=seed)

    def check(self) -> None:
        """Load every referenced file once so errors surface before any run."""
        topo = self.load_topology()
        self.load_keys()
        if self.adversary is not None and self.adversary.router not in topo.nodes:
            raise ConfigError(f"compromised node {self.adversary.router} is not in the topology")

    @classmethod
    def parse(cls, text: str, source: str = "<scenario>", base: Optional[Path] = None) -> "Scenario":
        values: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().lower()
            if not sep or not key:
                raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
            if key in values:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            values[key] = value.strip()
        try:
            return cls._from_values(values, base)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{source}: {exc}") from exc

    @classmethod
    def _from_values(cls, values: dict[str, str], base: Optional[Path]) -> "Scenario":
        values = dict(values)
        topology = values.pop("topology", None)
        if topology is None:
            raise ConfigError("scenario has no topology")
        traffic_kwargs = {}
        for key in list(values):
            if key in _TRAFFIC_KEYS:
                name, conv = _TRAFFIC_KEYS[key]
                traffic_kwargs[name] = conv(values.pop(key))
        seeds = _seeds(values.pop("seeds", None), values.pop("seed", None), values.pop("repetitions", None))
        adversary = _adversary(values.pop("adversary", None))
        keys = values.pop("keys", None)
        output = values.pop("output", "out")
        if values:
            raise ConfigError(f"unknown scenario keys: {', '.join(sorted(values))}")
        traffic = TrafficSpec(seed=seeds[0], **traffic_kwargs)
        return cls(topology, traffic, adversary, keys, output, seeds, base)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "Scenario":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"scenario file not found: {path}")
        return cls.parse(path.read_text(), str(path), path.parent)


def _seeds(seeds: Optional[str], seed: Optional[str], repetitions: Optional[str]) -> list[int]:
    if seeds is not None:
        if seed is not None:
            raise ConfigError("give either seeds or seed, not both")
        out = [int(s) for s in seeds.replace(",", " ").split()]
        if repetitions is not None and int(repetitions) != len(out):
            raise ConfigError("repetitions disagrees with the seed list")
        return out
    reps = 1 if repetitions is None else int(repetitions)
    if reps < 1:
        raise ConfigError("repetitions must be at least 1")
    first = 0 if seed is None else int(seed)
    return list(range(first, first + reps))


def _adversary(text: Optional[str]) -> Optional[AdversarySpec]:
    """``<router> <FORGE_PINT|REPLAY_CRSD> [rate] [count]``"""
    if text is None or text.lower() == "none":
        return None
    parts = text.split()
    if len(parts) < 2 or len(parts) > 4:
        raise ConfigError(f"adversary must be '<router> <behavior> [rate] [count]', got {text!r}")
    rate = float(parts[2]) if len(parts) > 2 else 100.0
    count = int(parts[3]) if len(parts) > 3 else None
    return AdversarySpec(parts[0], Behavior(parts[1].upper()), rate, count)
