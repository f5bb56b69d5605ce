import numpy as np
import pytest

from gncf.spectrum import Channel, Spectrum, uniform_comb


def test_channel_edges():
    ch = Channel(center=193.05e12, width=100e9, psd=1e-17)
    assert ch.f_start == pytest.approx(193.0e12)
    assert ch.f_end == pytest.approx(193.1e12)
    assert ch.power == pytest.approx(1e-17 * 100e9)


def test_channel_validation():
    with pytest.raises(ValueError):
        Channel(center=193e12, width=-1.0, psd=1e-17)
    with pytest.raises(ValueError):
        Channel(center=193e12, width=10e9, psd=-1e-17)


def test_overlap_rejected():
    a = Channel(center=193.00e12, width=100e9, psd=1e-17)
    b = Channel(center=193.05e12, width=100e9, psd=1e-17)
    with pytest.raises(ValueError):
        Spectrum((a, b))


def test_psd_at():
    comb = uniform_comb(3, 193.05e12, 100e9, 50e9, 2e-17)
    assert comb.psd_at(193.05e12) == pytest.approx(2e-17)
    # Guard band between channels.
    assert comb.psd_at(193.05e12 + 50e9) == 0.0
    assert comb.psd_at(180e12) == 0.0


def test_uniform_comb_layout():
    comb = uniform_comb(5, 193.05e12, 100e9, 100e9, 1e-17)
    centers = [ch.center for ch in comb.channels]
    assert centers == pytest.approx(
        [193.05e12 + k * 100e9 for k in range(-2, 3)])
    assert comb.center_channel_index() == 2


def test_channels_sorted():
    chans = tuple(Channel(center=c, width=10e9, psd=1e-17)
                  for c in (193.2e12, 193.0e12, 193.1e12))
    comb = Spectrum(chans)
    assert [ch.center for ch in comb.channels] == sorted(
        ch.center for ch in chans)
