"""Net noise terms, per-subcarrier SNR and hop secrecy capacity."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acoustics import BandProfile, PropagationParams
from .errors import ContractError, DomainError
from .topology import NetworkTopology, NodeId, NodeKind


@dataclass(frozen=True)
class LinkNoiseProfile:
    """Per-subcarrier net noise power at the receiver and at Eve for one sender."""

    omega_rx: np.ndarray
    omega_eve: np.ndarray
    tx: NodeId | None = None
    rx: NodeId | None = None

    def __post_init__(self):
        rx = np.asarray(self.omega_rx, dtype=float)
        eve = np.asarray(self.omega_eve, dtype=float)
        if rx.ndim != 1 or rx.shape != eve.shape or rx.size == 0:
            raise ContractError("omega vectors must be non-empty and of equal length")
        if not (np.all(np.isfinite(rx)) and np.all(np.isfinite(eve))):
            raise ContractError("omega entries must be finite")
        if np.any(rx <= 0) or np.any(eve <= 0):
            raise ContractError("omega entries must be positive")
        object.__setattr__(self, "omega_rx", rx)
        object.__setattr__(self, "omega_eve", eve)

    @property
    def n(self) -> int:
        return self.omega_rx.size

    @property
    def has_secrecy(self) -> bool:
        """True when some subcarrier sees more net noise at Eve than at the receiver."""
        return bool(np.any(self.omega_eve > self.omega_rx))

    def scaled(self, c: float) -> "LinkNoiseProfile":
        return LinkNoiseProfile(self.omega_rx * c, self.omega_eve * c, self.tx, self.rx)


def link_noise_profile(tx, rx, topo: NetworkTopology, band: BandProfile) -> LinkNoiseProfile:
    tx, rx = topo.node(_idx(tx)), topo.node(_idx(rx))
    if tx == rx:
        raise ContractError("transmitter and receiver must differ")
    if rx.kind is NodeKind.EVE:
        raise ContractError("Eve is not a legitimate receiver")
    d = [topo.propagation_distance(tx, rx), topo.propagation_distance(tx, topo.eve)]
    pl = band.pathloss_integrals(d)
    omega = pl * band.noise_integrals[None, :]
    return LinkNoiseProfile(omega[0], omega[1], tx, rx)


def _idx(node):
    return node.index if isinstance(node, NodeId) else int(node)


class Channel:
    """Caches net-noise vectors for every (sender, node) pair of one topology."""

    def __init__(self, topo: NetworkTopology, band: BandProfile):
        self.topo = topo
        self.band = band
        self._rows: dict[int, np.ndarray] = {}

    @property
    def params(self) -> PropagationParams:
        return self.band.params

    def omega_from(self, tx) -> np.ndarray:
        """Net noise from ``tx`` to every node, shape ``(n_nodes, N)``."""
        i = _idx(tx)
        row = self._rows.get(i)
        if row is None:
            d = np.maximum(self.topo.distances_from(i), 1.0)
            row = self.band.pathloss_integrals(d) * self.band.noise_integrals[None, :]
            row.setflags(write=False)
            self._rows[i] = row
        return row

    def profile(self, tx, rx) -> LinkNoiseProfile:
        i, j = _idx(tx), _idx(rx)
        if i == j:
            raise ContractError("transmitter and receiver must differ")
        if j == self.topo.eve.index:
            raise ContractError("Eve is not a legitimate receiver")
        row = self.omega_from(i)
        return LinkNoiseProfile(row[j], row[self.topo.eve.index],
                                self.topo.node(i), self.topo.node(j))


def snr(p, omega):
    omega = np.asarray(omega, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(~(omega > 0)):
        raise DomainError("net noise must be positive")
    if np.any(p < 0):
        raise DomainError("power must be non-negative")
    out = p / omega
    return out if out.ndim else float(out)


def secrecy_terms(omega_rx, omega_eve, p):
    """Per-subcarrier ``log2(1 + p/omega_rx) - log2(1 + p/omega_eve)`` (signed)."""
    p = np.asarray(p, dtype=float)
    return (np.log1p(p / omega_rx) - np.log1p(p / omega_eve)) / np.log(2.0)


def secrecy_capacity(profile: LinkNoiseProfile, p) -> float:
    """Hop secrecy capacity: positive part of the subcarrier sum."""
    p = np.asarray(p, dtype=float)
    if p.shape != profile.omega_rx.shape:
        raise ContractError(f"power vector shape {p.shape} != {profile.omega_rx.shape}")
    if np.any(p < 0):
        raise DomainError("power must be non-negative")
    return max(float(np.sum(secrecy_terms(profile.omega_rx, profile.omega_eve, p))), 0.0)


def saturation_limit(profile: LinkNoiseProfile) -> float:
    """Secrecy capacity as every subcarrier's power grows without bound."""
    gain = np.log2(profile.omega_eve / profile.omega_rx)
    return float(np.sum(np.maximum(gain, 0.0)))
