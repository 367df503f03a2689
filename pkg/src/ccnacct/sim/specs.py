from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from ..analytic import Scheme
from ..core import AcctFlag
from ..errors import ConfigError

TICKS_PER_SECOND = 1000


class Arrival(str, enum.Enum):
    POISSON = "poisson"
    PERIODIC = "periodic"


class Prewarm(str, enum.Enum):
    NONE = "none"
    EDGE = "edge"
    ALL = "all"


@dataclass(frozen=True)
class TrafficSpec:
    """Consumer workload and data-plane knobs for one simulation run.

    ``rate`` is interests per second per consumer; names are drawn
    uniformly from a pool of ``pool`` names. ``expiry`` defaults to the
    run duration so cached content survives the whole run.
    """

    rate: float = 500.0
    pool: int = 10
    duration: int = 10 * TICKS_PER_SECOND
    seed: int = 0
    collapsing: bool = True
    acct: AcctFlag = AcctFlag.AGGREGATE
    scheme: Scheme = Scheme.PINT
    arrival: Arrival = Arrival.POISSON
    period: int = 10
    requests: Optional[int] = None
    multicast: bool = False
    batch_window: int = 0
    cache_capacity: Optional[int] = None
    payload_size: int = 1_000_000
    expiry: Optional[int] = None
    prewarm: Prewarm = Prewarm.NONE
    nonces: bool = True
    nonce_bits: int = 128
    tag_style: str = "mac"
    anonymous: bool = True
    window: int = 300
    loss: float = 0.0
    pint_fast_forward: bool = True

    def __post_init__(self) -> None:
        acct = AcctFlag[self.acct.upper()] if isinstance(self.acct, str) else AcctFlag(self.acct)
        object.__setattr__(self, "acct", acct)
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "arrival", Arrival(self.arrival))
        object.__setattr__(self, "prewarm", Prewarm(self.prewarm))
        self.validate()

    def validate(self) -> None:
        if self.pool < 1:
            raise ConfigError("name pool must hold at least one name")
        if not self.rate > 0:
            raise ConfigError("rate must be positive")
        if self.rate > TICKS_PER_SECOND:
            raise ConfigError(f"rate above {TICKS_PER_SECOND}/s cannot be realised with 1 ms ticks")
        if self.duration < 1:
            raise ConfigError("duration must be at least one tick")
        if self.period < 1:
            raise ConfigError("period must be at least one tick")
        if self.requests is not None and self.requests < 0:
            raise ConfigError("requests must be non-negative")
        if self.batch_window < 0:
            raise ConfigError("batch window must be non-negative")
        if self.cache_capacity is not None and self.cache_capacity < 1:
            raise ConfigError("cache capacity must be positive")
        if self.tag_style not in ("mac", "sign"):
            raise ConfigError(f"unknown tag style {self.tag_style!r}")
        if not 0.0 <= self.loss < 1.0:
            raise ConfigError("loss must lie in [0, 1)")
        if self.nonce_bits < 1:
            raise ConfigError("nonce_bits must be positive")

    @property
    def content_expiry(self) -> int:
        return self.duration + 1 if self.expiry is None else self.expiry


class Behavior(str, enum.Enum):
    FORGE_PINT = "FORGE_PINT"
    REPLAY_CRSD = "REPLAY_CRSD"


@dataclass(frozen=True)
class AdversarySpec:
    """A compromised router injecting pInts at ``rate`` per second.

    REPLAY_CRSD re-sends payloads it saw in passing interests, each held
    back ``replay_delay`` ticks so the original is accounted first.
    """

    router: str
    behavior: Behavior
    rate: float = 100.0
    count: Optional[int] = None
    start: int = 0
    replay_delay: int = 50

    def __post_init__(self) -> None:
        object.__setattr__(self, "behavior", Behavior(self.behavior))
        if not self.rate > 0:
            raise ConfigError("adversary rate must be positive")
        if self.count is not None and self.count < 0:
            raise ConfigError("adversary count must be non-negative")
