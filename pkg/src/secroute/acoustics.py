"""Deterministic underwater acoustic propagation and ambient noise.

Frequencies are in kHz throughout, distances in metres. Quantities named
``*_db`` are in decibels; everything else is linear power (``10**(dB/10)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

NOISE_MODEL_F_MIN = 1.0
NOISE_MODEL_F_MAX = 100.0
DEFAULT_PANELS = 4


@dataclass(frozen=True)
class PropagationParams:
    """Spreading factor and ambient-noise constants."""

    spreading_factor: float = 1.5
    noise_level_db: float = 50.0
    noise_decay_db: float = 18.0

    def __post_init__(self):
        if not self.spreading_factor > 0:
            raise DomainError(f"spreading factor must be positive, got {self.spreading_factor}")


def absorption_db_per_km(f):
    """Thorp-style absorption coefficient in dB/km for ``f`` in kHz."""
    f = np.asarray(f, dtype=float)
    if np.any(~(f > 0)):
        raise DomainError("absorption requires f > 0 kHz")
    f2 = f * f
    out = 0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003
    return out if out.ndim else float(out)


def path_loss_db(d, f, params: PropagationParams = PropagationParams()):
    """Spreading (re 1 m) plus absorption loss, in dB.

    ``d`` is in metres and must be at least the 1 m reference distance; the
    absorption term converts it to km.
    """
    d = np.asarray(d, dtype=float)
    if np.any(~(d >= 1.0)):
        raise DomainError("path loss requires d >= 1 m")
    out = params.spreading_factor * 10.0 * np.log10(d) + (d / 1000.0) * absorption_db_per_km(f)
    return out if np.ndim(out) else float(out)


def noise_psd_db(f, params: PropagationParams = PropagationParams()):
    """Ambient noise PSD ``N1 - tau * 10 log10 f`` in dB, valid on 1..100 kHz."""
    f = np.asarray(f, dtype=float)
    if np.any(~((f >= NOISE_MODEL_F_MIN) & (f <= NOISE_MODEL_F_MAX))):
        raise DomainError("noise model holds for 1 <= f <= 100 kHz only")
    out = params.noise_level_db - params.noise_decay_db * 10.0 * np.log10(f)
    return out if out.ndim else float(out)


def _check_band(f_a, f_b):
    if not (np.isfinite(f_a) and np.isfinite(f_b) and f_a > 0 and f_a < f_b):
        raise DomainError(f"invalid band [{f_a}, {f_b}] kHz")


def _midpoints(f_a, f_b, panels):
    if panels < 1:
        raise DomainError("need at least one quadrature panel")
    h = (f_b - f_a) / panels
    return f_a + h * (np.arange(panels) + 0.5), h


def band_integral_pathloss(d, band, params: PropagationParams = PropagationParams(),
                           panels: int = DEFAULT_PANELS) -> float:
    """Midpoint-rule integral of linear path loss over ``band`` (kHz)."""
    f_a, f_b = band
    _check_band(f_a, f_b)
    f, h = _midpoints(f_a, f_b, panels)
    return float(h * np.sum(10.0 ** (path_loss_db(d, f, params) / 10.0)))


def band_integral_noise(band, params: PropagationParams = PropagationParams(),
                        panels: int = DEFAULT_PANELS) -> float:
    """Midpoint-rule integral of the linear noise PSD over ``band`` (kHz)."""
    f_a, f_b = band
    _check_band(f_a, f_b)
    f, h = _midpoints(f_a, f_b, panels)
    return float(h * np.sum(10.0 ** (noise_psd_db(f, params) / 10.0)))


@dataclass(frozen=True)
class BandProfile:
    """Equal-width OFDM subcarrier grid with precomputed per-band quantities.

    ``edges`` has ``n_subcarriers + 1`` entries. ``quad_freqs`` holds the
    midpoint-rule nodes, shape ``(n_subcarriers, panels)``, and
    ``quad_absorption`` the absorption at those nodes, so path-loss band
    integrals for many distances can be evaluated in one vectorised pass.
    """

    n_subcarriers: int
    f_low: float
    f_high: float
    edges: np.ndarray
    noise_integrals: np.ndarray
    panels: int
    params: PropagationParams
    quad_freqs: np.ndarray = field(repr=False)
    quad_absorption: np.ndarray = field(repr=False)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def pathloss_integrals(self, distances) -> np.ndarray:
        """Band integrals of linear path loss, shape ``(len(distances), N)``."""
        d = np.atleast_1d(np.asarray(distances, dtype=float))
        if np.any(~(d >= 1.0)):
            raise DomainError("path loss requires d >= 1 m")
        nu = self.params.spreading_factor
        # 10**(PL/10) = d**nu * 10**(d_km * alpha / 10)
        spread_db = nu * 10.0 * np.log10(d)[:, None, None]
        absorb_db = (d / 1000.0)[:, None, None] * self.quad_absorption[None, :, :]
        lin = 10.0 ** ((spread_db + absorb_db) / 10.0)
        h = (self.widths / self.panels)[None, :]
        return h * lin.sum(axis=2)


def make_band_profile(n_subcarriers: int = 1024, f_low: float = 9.0, f_high: float = 15.0,
                      params: PropagationParams = PropagationParams(),
                      panels: int = DEFAULT_PANELS) -> BandProfile:
    if int(n_subcarriers) != n_subcarriers or n_subcarriers < 1:
        raise DomainError(f"need a positive integer subcarrier count, got {n_subcarriers}")
    if not (NOISE_MODEL_F_MIN <= f_low < f_high <= NOISE_MODEL_F_MAX):
        raise DomainError(f"band [{f_low}, {f_high}] kHz outside the 1..100 kHz noise model")
    if panels < 1:
        raise DomainError("need at least one quadrature panel")
    n = int(n_subcarriers)
    edges = np.linspace(f_low, f_high, n + 1)
    edges[0], edges[-1] = f_low, f_high
    h = np.diff(edges) / panels
    freqs = edges[:-1, None] + h[:, None] * (np.arange(panels) + 0.5)[None, :]
    noise_lin = 10.0 ** (noise_psd_db(freqs, params) / 10.0)
    noise = h * noise_lin.sum(axis=1)
    if np.any(~(noise > 0)):
        raise DomainError("noise band integral underflowed to zero")
    for a in (edges, noise, freqs):
        a.setflags(write=False)
    alpha = absorption_db_per_km(freqs)
    alpha.setflags(write=False)
    return BandProfile(n, float(f_low), float(f_high), edges, noise, panels, params, freqs, alpha)
