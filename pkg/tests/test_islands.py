import numpy as np
import pytest

from gncf.islands import (EMPTY_ISLAND, Island, island_geometry,
                          island_polygon_oracle)
from gncf.spectrum import Channel, uniform_comb


def ch(center, width=100e9, psd=1e-17):
    return Channel(center=center, width=width, psd=psd)


def test_self_channel_island():
    # All three channels equal, evaluated at center: the band cut removes
    # two corner triangles of W^2/8 each, leaving 3/4 of the square.
    c = ch(193.05e12)
    isl = island_geometry(c, c, c, 193.05e12)
    assert isl.area == pytest.approx(0.75 * (100e9) ** 2, rel=1e-12)
    assert isl.f1_star == pytest.approx(193.05e12, abs=1e-3)
    assert isl.f2_star == pytest.approx(193.05e12, abs=1e-3)
    assert isl.L1 == pytest.approx(np.sqrt(isl.area))


def test_far_k_island_empty():
    comb = uniform_comb(5, 193.05e12, 100e9, 100e9, 1e-17)
    chans = comb.channels
    # m and n at opposite extremes, k at an unreachable band.
    isl = island_geometry(chans[4], chans[4], chans[0], chans[0].center)
    assert isl.empty
    assert isl.area == 0.0


def test_full_rectangle_island():
    # k wide enough that the band never cuts the rectangle.
    m = ch(193.2e12, 50e9)
    n = ch(192.9e12, 50e9)
    k = ch(193.05e12, 400e9)
    f = 193.05e12
    isl = island_geometry(m, n, k, f)
    assert isl.area == pytest.approx(50e9 * 50e9, rel=1e-12)
    assert isl.f1_star == pytest.approx(193.2e12, abs=1.0)
    assert isl.f2_star == pytest.approx(192.9e12, abs=1.0)


def test_matches_polygon_oracle_random():
    rng = np.random.default_rng(7)
    f0 = 193.05e12
    for _ in range(400):
        widths = rng.uniform(10e9, 200e9, 3)
        centers = f0 + rng.uniform(-500e9, 500e9, 3)
        m, n, k = (ch(c, w) for c, w in zip(centers, widths))
        f = f0 + rng.uniform(-500e9, 500e9)
        isl = island_geometry(m, n, k, f)
        verts, area, cx, cy = island_polygon_oracle(m, n, k, f)
        scale = widths[0] * widths[1]
        assert isl.area == pytest.approx(area, abs=1e-9 * scale)
        if area > 1e-12 * scale:
            assert isl.f1_star == pytest.approx(cx, abs=1e-6 * 1e12)
            assert isl.f2_star == pytest.approx(cy, abs=1e-6 * 1e12)


def test_band_slice_through_middle():
    # Narrow k: the island is a thin diagonal strip.
    m = ch(193.1e12, 100e9)
    n = ch(193.0e12, 100e9)
    k = ch(193.05e12, 10e9)
    f = 193.05e12
    isl = island_geometry(m, n, k, f)
    verts, area, cx, cy = island_polygon_oracle(m, n, k, f)
    assert not isl.empty
    assert isl.area == pytest.approx(area, rel=1e-9)


def test_island_is_frozen_value_object():
    assert EMPTY_ISLAND.empty
    isl = Island(area=1e20, f1_star=193e12, f2_star=194e12)
    assert isl.L1 == pytest.approx(1e10)
    assert isl.L2 == pytest.approx(1e10)
