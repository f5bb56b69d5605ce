import numpy as np
import pytest

from gncf import units


def test_attenuation_conversion():
    # 0.2 dB/km of power loss as a field coefficient in Np/m.
    assert units.db_per_km_to_np_per_m(0.2) == pytest.approx(
        0.2 * np.log(10.0) / 20.0 / 1000.0, rel=1e-15)
    assert units.db_per_km_to_np_per_m(0.2) == pytest.approx(
        2.3025850929940466e-05, rel=1e-12)


def test_dispersion_conversions():
    assert units.ps2_per_km_to_s2_per_m(-21.27) == pytest.approx(
        -21.27e-27, rel=1e-15)
    assert units.ps3_per_km_to_s3_per_m(0.14) == pytest.approx(
        0.14e-39, rel=1e-15)
    assert units.ps2_to_s2(100.0) == pytest.approx(1e-22, rel=1e-15)


def test_frequency_and_power():
    assert units.thz_to_hz(193.05) == 193.05e12
    assert units.ghz_to_hz(50.0) == 50e9
    assert units.dbm_to_w(0.0) == pytest.approx(1e-3)
    assert units.w_to_dbm(1e-3) == pytest.approx(0.0, abs=1e-12)
    assert units.w_to_dbm(units.dbm_to_w(-17.3)) == pytest.approx(-17.3)


def test_gamma_and_length():
    assert units.per_w_km_to_per_w_m(1.3) == pytest.approx(1.3e-3)
    assert units.km_to_m(80.0) == 80e3
    assert units.per_km_to_per_m(0.05) == pytest.approx(5e-5)
