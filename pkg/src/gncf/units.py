"""Conversions between the engineering units used in configs and SI."""

from __future__ import annotations

import numpy as np

LN10 = np.log(10.0)


def db_per_km_to_np_per_m(value):
    """Attenuation in dB/km to field attenuation in Np/m.

    dB/km describes power decay; the field coefficient is half the power
    one, hence the factor ln(10)/20 rather than ln(10)/10.
    """
    return np.asarray(value, dtype=float) * LN10 / 20.0 / 1e3


def per_km_to_per_m(value):
    return np.asarray(value, dtype=float) / 1e3


def ps2_per_km_to_s2_per_m(value):
    return np.asarray(value, dtype=float) * 1e-27


def ps3_per_km_to_s3_per_m(value):
    return np.asarray(value, dtype=float) * 1e-39


def ps2_to_s2(value):
    return np.asarray(value, dtype=float) * 1e-24


def per_w_km_to_per_w_m(value):
    return np.asarray(value, dtype=float) / 1e3


def km_to_m(value):
    return np.asarray(value, dtype=float) * 1e3


def thz_to_hz(value):
    return np.asarray(value, dtype=float) * 1e12


def ghz_to_hz(value):
    return np.asarray(value, dtype=float) * 1e9


def dbm_to_w(value):
    return 10.0 ** (np.asarray(value, dtype=float) / 10.0) * 1e-3


def w_to_dbm(value):
    return 10.0 * np.log10(np.asarray(value, dtype=float) / 1e-3)
