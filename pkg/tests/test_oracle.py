import numpy as np
import pytest
from scipy import integrate

from gncf import oracle as orc
from gncf.link import FreqProfile, Link, Span, ZERO_PROFILE
from gncf.spectrum import uniform_comb

A0 = 2.3025850929940466e-05  # 0.2 dB/km as field Np/m
FC = 193.05e12


def make_span(**kw):
    base = dict(length=80e3, gamma=1.3e-3,
                alpha0=FreqProfile.constant(A0), alpha1=ZERO_PROFILE,
                sigma=FreqProfile.constant(5e-5),
                beta2=-21.27e-27, beta3=0.0, fc=FC,
                beta_dcu=0.0, gain=None, phase=ZERO_PROFILE)
    base.update(kw)
    return Span(**base)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        orc.QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        orc.QuadratureSpec(z_steps=32)


def test_single_span_lorentzian_form():
    # One span, flat loss, no amplifier phase: the link function reduces
    # to gamma * (exp(CL) - 1) / C up to a pure phase, with
    # C = -2*alpha0 - j*delta_beta.
    span = make_span()
    link = Link((span,))
    f1, f2, f3 = 193.10e12, 193.00e12, 193.04e12
    f4 = f1 + f2 - f3
    db = float(span.beta(f1) + span.beta(f2) - span.beta(f3) - span.beta(f4))
    c = -2.0 * A0 - 1j * db
    expect = abs(span.gamma * (np.exp(c * span.length) - 1.0) / c)
    got = abs(complex(orc.lk_numeric(link, f1, f2, f3)))
    assert got == pytest.approx(expect, rel=1e-12)


def test_reduced_path_matches_full_link_function():
    spans = tuple(make_span(length=(80e3 + 5e3 * i),
                            beta_dcu=(3e-24 if i == 1 else 0.0),
                            alpha1=FreqProfile.constant(0.2 * A0 * (i % 2)))
                  for i in range(3))
    link = Link(spans)
    assert orc._product_reducible(link)
    f = FC
    lk_sq = orc._reduced_lk_sq(link, f, z_steps=96)
    rng = np.random.default_rng(7)
    u = rng.uniform(-150e9, 150e9, size=40)
    v = rng.uniform(-150e9, 150e9, size=40)
    full = np.abs(orc.lk_numeric(link, f + u, f + v, f)) ** 2
    red = lk_sq(u * v)
    # Roundoff on the absolute frequencies enters through ~1e3 rad of
    # accumulated phase, so agreement bottoms out around 1e-9 relative.
    assert np.allclose(red, full, rtol=1e-7, atol=0.0)


def test_product_density_matches_nested_quadrature():
    # rho(w) defined so that integral g(u v) du dv over the clipped
    # rectangle equals integral g(w) rho(w) dw; check against a direct
    # 2-D quadrature of a smooth g.
    a1, a2, b1, b2 = -2.0, 1.5, 0.4, 3.0
    s1, s2 = -0.5, 3.2

    def g(w):
        return np.exp(-0.3 * w ** 2) * np.cos(0.7 * w)

    def inner(u):
        lo = max(b1, s1 - u)
        hi = min(b2, s2 - u)
        if hi <= lo:
            return 0.0
        val, _ = integrate.quad(lambda v: g(u * v), lo, hi, limit=200)
        return val

    direct, _ = integrate.quad(inner, a1, a2, limit=200)

    corners = [a1 * b1, a1 * b2, a2 * b1, a2 * b2]
    w = np.linspace(min(corners), max(corners), 4001)
    rho = orc._product_density(w, a1, a2, b1, b2, s1, s2)
    via_density = np.trapezoid(g(w) * rho, w)
    assert via_density == pytest.approx(direct, rel=2e-3)


def test_gnli_product_vs_2d_paths():
    comb = uniform_comb(2, FC, 100e9, 86.6e9, 4.6e-17)
    spans = tuple(make_span() for _ in range(2))
    reducible = Link(spans)
    # A vanishing but nonzero beta3 forces the general 2-D path while
    # leaving the physics untouched.
    forced_2d = Link(tuple(make_span(beta3=1e-60) for _ in range(2)))
    assert orc._product_reducible(reducible)
    assert not orc._product_reducible(forced_2d)
    quad = orc.QuadratureSpec(rel_tol=1e-4)
    val_a, err_a = orc.gnli_numeric(comb, reducible, FC, quad)
    val_b, err_b = orc.gnli_numeric(comb, forced_2d, FC, quad)
    assert val_a > 0.0 and val_b > 0.0
    assert err_a >= 0.0 and err_b >= 0.0
    assert val_b == pytest.approx(val_a, rel=5e-4)


def test_gnli_cubic_psd_scaling():
    comb = uniform_comb(2, FC, 100e9, 86.6e9, 4.6e-17)
    comb3 = uniform_comb(2, FC, 100e9, 86.6e9, 3.0 * 4.6e-17)
    link = Link((make_span(),))
    quad = orc.QuadratureSpec(rel_tol=1e-5)
    base, _ = orc.gnli_numeric(comb, link, FC, quad)
    tripled, _ = orc.gnli_numeric(comb3, link, FC, quad)
    assert tripled == pytest.approx(27.0 * base, rel=1e-10)


def test_island_integral_square_approximation():
    comb = uniform_comb(3, FC, 100e9, 86.6e9, 4.6e-17)
    link = Link((make_span(),))
    m, n, k = comb.channels[0], comb.channels[2], comb.channels[1]
    exact, square = orc.island_integral_numeric(m, n, k, FC, link)
    assert exact > 0.0 and square > 0.0
    # Equal-width channels always get band-clipped, so the equivalent
    # square is an approximation; for this geometry it stays well within
    # a dB of the exact island value.
    assert 0.7 < square / exact < 1.3
