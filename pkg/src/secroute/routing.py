"""Multi-hop route construction: secure relay selection and the DBR baseline."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .acoustics import BandProfile
from .errors import ContractError
from .optimizer import (AllocationResult, SolverConfig, Status, allocate_fixed_relay,
                        solve_hop)
from .secrecy import Channel, secrecy_capacity
from .topology import DEFAULT_MAX_RANGE, NetworkTopology, NodeId, NodeKind


class PowerMode(str, enum.Enum):
    OPTIMAL = "Optimal"
    EQUAL = "Equal"


class Scheme(str, enum.Enum):
    SECURE_OPTIMAL = "SecureOptimal"
    SECURE_EQUAL = "SecureEqualPower"
    DBR_OPTIMAL = "DbrOptimal"
    DBR_EQUAL = "DbrEqualPower"

    @property
    def power_mode(self) -> PowerMode:
        return PowerMode.OPTIMAL if self.value.endswith("Optimal") else PowerMode.EQUAL

    @property
    def is_secure(self) -> bool:
        return self.value.startswith("Secure")

    @classmethod
    def of(cls, secure: bool, mode: PowerMode) -> "Scheme":
        mode = PowerMode(mode)
        if secure:
            return cls.SECURE_OPTIMAL if mode is PowerMode.OPTIMAL else cls.SECURE_EQUAL
        return cls.DBR_OPTIMAL if mode is PowerMode.OPTIMAL else cls.DBR_EQUAL


class RouteStatus(str, enum.Enum):
    DELIVERED = "Delivered"
    VOID = "Void"


class DbrRule(str, enum.Enum):
    MIN_DEPTH = "min_depth"  # largest depth advance, the default
    MAX_DEPTH = "max_depth"  # smallest depth advance, for sensitivity runs


@dataclass
class RouteResult:
    hops: list
    hop_sc: list
    scheme: Scheme
    status: RouteStatus
    stranded: NodeId | None = None
    allocations: list = field(default_factory=list, repr=False)

    @property
    def end_to_end_sc(self) -> float:
        return min(self.hop_sc) if self.hop_sc else 0.0

    @property
    def n_hops(self) -> int:
        return len(self.hops) - 1

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "status": self.status.value,
            "hops": [str(h) for h in self.hops],
            "hop_ids": [h.index for h in self.hops],
            "hop_sc": [float(v) for v in self.hop_sc],
            "sc": float(self.end_to_end_sc),
            "stranded": None if self.stranded is None else str(self.stranded),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def equal_power(p_total: float, n: int) -> np.ndarray:
    return np.full(n, p_total / n)


def _equal_power_hop(channel: Channel, sender, cands, p_total) -> AllocationResult:
    n = channel.band.n_subcarriers
    p = equal_power(p_total, n)
    scs = [secrecy_capacity(channel.profile(sender, c), p) for c in cands]
    best = max(scs)
    if best <= 0.0:
        # Mirrors the optimal mode: no secrecy available, progress to the sink.
        sel = min(cands, key=lambda c: (channel.topo.distance(c, channel.topo.sink), c.index))
        return AllocationResult(sel, p, math.nan, 0.0, 0, Status.ZERO_SECRECY)
    i = scs.index(best)
    return AllocationResult(cands[i], p, math.nan, best, 0, Status.CONVERGED)


def hop_allocation(channel: Channel, sender, relay, p_total: float, mode: PowerMode,
                   cfg: SolverConfig = SolverConfig()) -> AllocationResult:
    """Power loading and secrecy for a hop whose relay is already fixed."""
    profile = channel.profile(sender, relay)
    if PowerMode(mode) is PowerMode.EQUAL:
        p = equal_power(p_total, channel.band.n_subcarriers)
        sc = secrecy_capacity(profile, p)
        return AllocationResult(profile.rx, p, math.nan, sc, 0,
                                Status.CONVERGED if sc > 0 else Status.ZERO_SECRECY)
    return allocate_fixed_relay(profile, p_total, cfg)


def _walk(topo: NetworkTopology, scheme: Scheme, max_range: float, choose):
    sender = topo.source_id
    hops, scs, allocs = [sender], [], []
    while True:
        cands = topo.candidates(sender, max_range, visited=hops)
        if not cands:
            return RouteResult(hops, scs, scheme, RouteStatus.VOID, sender, allocs)
        res = choose(sender, cands)
        if res.selected is None:
            return RouteResult(hops, scs, scheme, RouteStatus.VOID, sender, allocs)
        hops.append(res.selected)
        scs.append(res.secrecy)
        allocs.append(res)
        if res.selected.kind is NodeKind.SINK:
            return RouteResult(hops, scs, scheme, RouteStatus.DELIVERED, None, allocs)
        sender = res.selected


def route_secure(topo: NetworkTopology, band: BandProfile, p_total: float,
                 cfg: SolverConfig = SolverConfig(), power_mode: PowerMode = PowerMode.OPTIMAL,
                 max_range: float = DEFAULT_MAX_RANGE, channel: Channel | None = None) -> RouteResult:
    """Hop-by-hop secure routing from sensor 0 until the sink is reached."""
    ch = channel or Channel(topo, band)
    mode = PowerMode(power_mode)
    if mode is PowerMode.OPTIMAL:
        def choose(sender, cands):
            return solve_hop(ch, sender, p_total, cfg, candidates=cands)
    else:
        def choose(sender, cands):
            return _equal_power_hop(ch, sender, cands, p_total)
    return _walk(topo, Scheme.of(True, mode), max_range, choose)


def dbr_next_hop(topo: NetworkTopology, cands, rule: DbrRule = DbrRule.MIN_DEPTH) -> NodeId:
    sign = 1.0 if DbrRule(rule) is DbrRule.MIN_DEPTH else -1.0
    return min(cands, key=lambda c: (sign * topo.depth_of(c), c.index))


def route_dbr(topo: NetworkTopology, band: BandProfile, p_total: float,
              power_mode: PowerMode = PowerMode.OPTIMAL, cfg: SolverConfig = SolverConfig(),
              max_range: float = DEFAULT_MAX_RANGE, rule: DbrRule = DbrRule.MIN_DEPTH,
              channel: Channel | None = None) -> RouteResult:
    """Depth-based routing; Eve plays no part in relay choice, only in the scoring."""
    ch = channel or Channel(topo, band)
    mode = PowerMode(power_mode)

    def choose(sender, cands):
        return hop_allocation(ch, sender, dbr_next_hop(topo, cands, rule), p_total, mode, cfg)

    return _walk(topo, Scheme.of(False, mode), max_range, choose)


def run_scheme(scheme: Scheme, topo: NetworkTopology, band: BandProfile, p_total: float,
               cfg: SolverConfig = SolverConfig(), max_range: float = DEFAULT_MAX_RANGE,
               rule: DbrRule = DbrRule.MIN_DEPTH, channel: Channel | None = None) -> RouteResult:
    scheme = Scheme(scheme)
    if scheme.is_secure:
        return route_secure(topo, band, p_total, cfg, scheme.power_mode, max_range, channel)
    return route_dbr(topo, band, p_total, scheme.power_mode, cfg, max_range, rule, channel)


def rescore(route: RouteResult, channel: Channel, p_total: float, mode: PowerMode,
            cfg: SolverConfig = SolverConfig()) -> list:
    """Per-hop secrecy of an existing relay sequence under another power mode."""
    if len(route.hops) < 2 and route.hop_sc:
        raise ContractError("route has secrecy values but no hops")
    return [hop_allocation(channel, a, b, p_total, mode, cfg).secrecy
            for a, b in zip(route.hops[:-1], route.hops[1:])]
