import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from secroute.acoustics import (PropagationParams, absorption_db_per_km, band_integral_noise,
                                band_integral_pathloss, make_band_profile, noise_psd_db,
                                path_loss_db)
from secroute.errors import DomainError

NU15 = PropagationParams(1.5, 50.0, 18.0)


@pytest.mark.parametrize("f, expected", [
    (10.0, 0.108911 + 1.047619 + 0.0275 + 0.003),  # 1.18703
    (1.0, 0.055 + 0.010729 + 0.000275 + 0.003),     # 0.069004
])
def test_absorption_hand_values(f, expected):
    assert absorption_db_per_km(f) == pytest.approx(expected, abs=1e-5)


def test_absorption_small_f_tends_to_constant():
    assert absorption_db_per_km(1e-8) == pytest.approx(0.003, abs=1e-12)


@pytest.mark.parametrize("f", [0.0, -1.0])
def test_absorption_rejects_non_positive(f):
    with pytest.raises(DomainError):
        absorption_db_per_km(f)


def test_path_loss_values():
    assert path_loss_db(1.0, 12.0, NU15) == pytest.approx(absorption_db_per_km(12.0) / 1000)
    assert path_loss_db(1000.0, 10.0, NU15) == pytest.approx(46.18703, abs=1e-4)
    assert path_loss_db(100.0, 1.0, NU15) == pytest.approx(30.0069, abs=1e-4)


def test_path_loss_rejects_sub_reference_distance():
    with pytest.raises(DomainError):
        path_loss_db(0.5, 10.0)


@pytest.mark.parametrize("f, expected", [(1.0, 50.0), (10.0, -130.0), (100.0, -310.0)])
def test_noise_psd_values(f, expected):
    assert noise_psd_db(f, NU15) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("f", [0.5, 100.5])
def test_noise_psd_validity_range(f):
    with pytest.raises(DomainError):
        noise_psd_db(f)


@given(st.floats(1e-3, 99.0), st.floats(1e-4, 1.0))
def test_absorption_strictly_increasing(f, df):
    assert absorption_db_per_km(f + df) > absorption_db_per_km(f)


@given(st.floats(1.0, 9000.0), st.floats(0.5, 500.0), st.floats(1.0, 100.0))
def test_path_loss_increasing_in_distance(d, dd, f):
    assert path_loss_db(d + dd, f) > path_loss_db(d, f)


@given(st.floats(1.0, 9000.0), st.floats(1.0, 99.0), st.floats(0.01, 1.0))
def test_path_loss_increasing_in_frequency(d, f, df):
    assert path_loss_db(d, f + df) >= path_loss_db(d, f)
    if d > 1.0 + 1e-6:
        assert path_loss_db(d, f + df) > path_loss_db(d, f)


def test_pathloss_band_integral_matches_adaptive_quadrature():
    band = (9.0, 9.00586)
    got = band_integral_pathloss(1000.0, band, NU15)
    ref, _ = integrate.quad(lambda f: 10 ** (path_loss_db(1000.0, f, NU15) / 10), *band,
                            epsabs=0, epsrel=1e-13)
    assert got == pytest.approx(ref, rel=1e-6)


def test_noise_band_integral_matches_adaptive_quadrature():
    band = (9.0, 9.0 + 6 / 1024)
    got = band_integral_noise(band, NU15)
    ref, _ = integrate.quad(lambda f: 10 ** (noise_psd_db(f, NU15) / 10), *band,
                            epsabs=0, epsrel=1e-13)
    assert got == pytest.approx(ref, rel=1e-6)


def test_narrow_band_at_reference_distance():
    band = (10.0, 10.0 + 1e-9)
    expected = 10 ** (absorption_db_per_km(10.0) * 1e-3 / 10) * 1e-9
    assert band_integral_pathloss(1.0, band) == pytest.approx(expected, rel=1e-9)


def test_band_integral_vanishes_with_width():
    widths = [1e-2, 1e-4, 1e-6]
    vals = [band_integral_pathloss(1000.0, (10.0, 10.0 + w)) for w in widths]
    assert vals[0] > vals[1] > vals[2] > 0
    assert vals[2] < 1e-3 * vals[0]


@pytest.mark.parametrize("band", [(10.0, 10.0), (10.0, 9.0), (0.0, 1.0)])
def test_band_integral_rejects_bad_band(band):
    with pytest.raises(DomainError):
        band_integral_pathloss(100.0, band)


def test_band_integrals_additive_at_fixed_panel_width():
    # Splitting [a, c] at its midpoint with K panels per half reuses the nodes
    # of a 2K-panel rule over [a, c].
    a, c = 9.0, 9.0 + 2 * 6 / 1024
    b = 0.5 * (a + c)
    whole = band_integral_noise((a, c), panels=8)
    parts = band_integral_noise((a, b), panels=4) + band_integral_noise((b, c), panels=4)
    assert parts == pytest.approx(whole, rel=1e-9)
    whole = band_integral_pathloss(2500.0, (a, c), panels=8)
    parts = band_integral_pathloss(2500.0, (a, b), panels=4) + band_integral_pathloss(2500.0, (b, c), panels=4)
    assert parts == pytest.approx(whole, rel=1e-9)


def test_doubling_panels_changes_little(band1024):
    fine = make_band_profile(1024, 9.0, 15.0, panels=8)
    assert np.max(np.abs(fine.noise_integrals / band1024.noise_integrals - 1)) < 1e-6
    d = [1.0, 500.0, 3000.0, 7000.0]
    rel = fine.pathloss_integrals(d) / band1024.pathloss_integrals(d) - 1
    assert np.max(np.abs(rel)) < 1e-6


def test_band_profile_single_band():
    bp = make_band_profile(1, 9.0, 15.0)
    assert bp.widths.tolist() == [6.0]
    assert bp.noise_integrals.shape == (1,)


def test_band_profile_1024(band1024):
    assert band1024.edges.size == 1025
    assert np.all(np.diff(band1024.edges) > 0)
    assert band1024.widths == pytest.approx(np.full(1024, 6 / 1024))
    assert band1024.edges[0] == 9.0 and band1024.edges[-1] == 15.0
    assert np.all(band1024.noise_integrals > 0)


def test_band_profile_noise_decreasing_matches_quadrature():
    bp = make_band_profile(4, 9.0, 15.0)
    assert np.all(np.diff(bp.noise_integrals) < 0)
    ref = [integrate.quad(lambda f: 10 ** (noise_psd_db(f) / 10), lo, hi, epsrel=1e-12)[0]
           for lo, hi in zip(bp.edges[:-1], bp.edges[1:])]
    assert np.all(np.diff(ref) < 0)
    # 1.5 kHz bands with 4 panels: midpoint error of a steep power law
    assert bp.noise_integrals == pytest.approx(ref, rel=0.1)


def test_vectorised_pathloss_matches_scalar(band16):
    d = [1.0, 250.0, 4200.0]
    table = band16.pathloss_integrals(d)
    for i, dist in enumerate(d):
        for j in (0, 7, 15):
            lo, hi = band16.edges[j], band16.edges[j + 1]
            assert table[i, j] == pytest.approx(band_integral_pathloss(dist, (lo, hi)), rel=1e-12)


@pytest.mark.parametrize("args", [(0, 9, 15), (4, 0.5, 15), (4, 15, 9), (4, 9, 120)])
def test_band_profile_rejects(args):
    with pytest.raises(DomainError):
        make_band_profile(*args)


def test_band_profile_is_immutable(band16):
    with pytest.raises(ValueError):
        band16.noise_integrals[0] = 1.0
    assert math.isfinite(band16.noise_integrals.sum())


def test_params_validation():
    with pytest.raises(DomainError):
        PropagationParams(spreading_factor=0.0)
