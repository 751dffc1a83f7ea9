import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from secroute.errors import ContractError, DomainError
from secroute.secrecy import (Channel, LinkNoiseProfile, link_noise_profile, saturation_limit,
                              secrecy_capacity, snr)
from secroute.topology import NetworkTopology, generate


def _topo(rx_dist, eve_dist):
    # sender at depth 3000, receiver straight up and Eve level with it
    x = np.array([1000.0, 1000.0, 2500.0, 1000.0 + eve_dist])
    d = np.array([3000.0, 3000.0 - rx_dist, 0.0, 3000.0])
    return NetworkTopology(x, d, (5000.0, 5000.0))


def test_equal_distances_give_equal_omegas(band16):
    p = link_noise_profile(0, 1, _topo(800.0, 800.0), band16)
    assert np.array_equal(p.omega_rx, p.omega_eve)


def test_closer_receiver_has_less_noise(band16):
    rng = np.random.default_rng(0)
    for _ in range(20):
        drx = rng.uniform(1.0, 2000.0)
        dev = drx + rng.uniform(0.5, 500.0)
        p = link_noise_profile(0, 1, _topo(drx, min(dev, 2999.0)), band16)
        assert np.all(p.omega_rx < p.omega_eve)


def test_single_band_profile_shape():
    from secroute.acoustics import make_band_profile
    p = link_noise_profile(0, 1, _topo(100.0, 300.0), make_band_profile(1))
    assert p.omega_rx.shape == p.omega_eve.shape == (1,)


def test_profile_contracts(band16):
    t = _topo(100.0, 300.0)
    with pytest.raises(ContractError):
        link_noise_profile(0, 0, t, band16)
    with pytest.raises(ContractError):
        link_noise_profile(0, t.eve, t, band16)
    with pytest.raises(ContractError):
        LinkNoiseProfile([1.0, 2.0], [1.0])
    with pytest.raises(ContractError):
        LinkNoiseProfile([1.0, -2.0], [1.0, 1.0])
    with pytest.raises(ContractError):
        LinkNoiseProfile([1.0, math.inf], [1.0, 1.0])


def test_channel_matches_direct_profile(band16):
    t = generate(8, seed=3)
    ch = Channel(t, band16)
    a, b = ch.profile(0, t.sink), link_noise_profile(0, t.sink, t, band16)
    np.testing.assert_allclose(a.omega_rx, b.omega_rx, rtol=1e-12)
    np.testing.assert_allclose(a.omega_eve, b.omega_eve, rtol=1e-12)


def test_snr():
    assert snr(0.0, 3.0) == 0.0
    assert snr(2.5, 2.5) == 1.0
    assert snr(10.0, 2.0) == 5.0
    with pytest.raises(DomainError):
        snr(1.0, 0.0)


def test_secrecy_capacity_examples():
    prof = LinkNoiseProfile([1.0], [2.0])
    assert secrecy_capacity(prof, [2.0]) == pytest.approx(math.log2(3) - 1.0, abs=1e-12)
    assert secrecy_capacity(prof, [0.0]) == 0.0
    same = LinkNoiseProfile([1.0, 4.0], [1.0, 4.0])
    assert secrecy_capacity(same, [3.0, 9.0]) == 0.0
    with pytest.raises(ContractError):
        secrecy_capacity(prof, [1.0, 1.0])


def test_positive_part_applies_to_the_sum():
    prof = LinkNoiseProfile([1.0, 2.0], [2.0, 1.0])
    # subcarrier 0 gains log2(3/2), subcarrier 1 loses log2(3) - 1... net negative
    p = np.array([1.0, 4.0])
    terms = np.log2(1 + p / prof.omega_rx) - np.log2(1 + p / prof.omega_eve)
    assert terms[0] > 0 > terms.sum()
    assert secrecy_capacity(prof, p) == 0.0


positive = st.floats(1e-3, 1e3)
vec = arrays(np.float64, 5, elements=positive)


@given(vec, st.lists(st.floats(1.01, 50.0), min_size=5, max_size=5), vec)
def test_increasing_and_saturating_when_eve_noisier(w_rx, ratio, p):
    prof = LinkNoiseProfile(w_rx, w_rx * np.array(ratio))
    base = secrecy_capacity(prof, p)
    assert base >= 0
    assert base <= saturation_limit(prof) + 1e-9
    for j in range(5):
        bumped = p.copy()
        bumped[j] *= 2.0
        assert secrecy_capacity(prof, bumped) >= base


@given(vec, st.lists(st.floats(1.0, 50.0), min_size=5, max_size=5), vec)
def test_zero_when_eve_dominates(w_eve, ratio, p):
    prof = LinkNoiseProfile(w_eve * np.array(ratio), w_eve)
    assert secrecy_capacity(prof, p) == 0.0


@given(vec, vec, vec, st.floats(1e-6, 1e6))
def test_ratio_invariance(w_rx, w_eve, p, c):
    prof = LinkNoiseProfile(w_rx, w_eve)
    assert secrecy_capacity(prof.scaled(c), p * c) == pytest.approx(
        secrecy_capacity(prof, p), rel=1e-9, abs=1e-9)


def test_saturation_limit_is_approached():
    prof = LinkNoiseProfile([1.0, 2.0], [4.0, 3.0])
    assert secrecy_capacity(prof, [1e12, 1e12]) == pytest.approx(saturation_limit(prof), rel=1e-9)
