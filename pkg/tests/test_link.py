import numpy as np
import pytest

from gncf.link import FreqProfile, Link, Span, ZERO_PROFILE


def make_span(**kw):
    base = dict(length=80e3, gamma=1.3e-3,
                alpha0=FreqProfile.constant(2.3025850929940466e-05),
                alpha1=ZERO_PROFILE,
                sigma=FreqProfile.constant(5e-5),
                beta2=-21.27e-27, beta3=0.0, fc=193.05e12,
                beta_dcu=0.0, gain=None, phase=ZERO_PROFILE)
    base.update(kw)
    return Span(**base)


def test_profile_constant_and_interp():
    p = FreqProfile.constant(3.0)
    assert p.is_constant
    assert p(191e12) == 3.0
    q = FreqProfile.from_pairs([(190e12, 1.0), (200e12, 2.0)])
    assert q(195e12) == pytest.approx(1.5)
    # Clamped outside the breakpoints.
    assert q(180e12) == 1.0
    assert q(210e12) == 2.0


def test_loss_exponent_flat():
    span = make_span()
    a0 = 2.3025850929940466e-05
    assert span.loss_exponent(193e12) == pytest.approx(a0 * 80e3, rel=1e-14)


def test_loss_exponent_with_decay_term():
    a0 = 2.3025850929940466e-05
    a1 = 0.2 * a0
    sig = 1.0 / 20e3
    span = make_span(alpha1=FreqProfile.constant(a1),
                     sigma=FreqProfile.constant(sig))
    expect = a0 * 80e3 + a1 / sig * (1.0 - np.exp(-sig * 80e3))
    assert span.loss_exponent(193e12) == pytest.approx(expect, rel=1e-13)


def test_loss_exponent_sigma_zero_limit():
    a0 = 2.3025850929940466e-05
    a1 = 0.1 * a0
    span = make_span(alpha1=FreqProfile.constant(a1),
                     sigma=FreqProfile.constant(0.0))
    # alpha1 term becomes a flat extra attenuation.
    assert span.loss_exponent(193e12) == pytest.approx(
        (a0 + a1) * 80e3, rel=1e-12)


def test_transparent_gain():
    span = make_span()
    # Amplifier exactly undoes the span loss.
    assert span.power_gain(193e12) == pytest.approx(
        np.exp(2.0 * span.loss_exponent(193e12)), rel=1e-14)


def test_beta_expansion():
    span = make_span(beta3=0.14e-39)
    f = 193.05e12 + 250e9
    u = 250e9
    expect = (2.0 * np.pi ** 2 * span.beta2 * u ** 2
              + 4.0 * np.pi ** 3 / 3.0 * span.beta3 * u ** 3)
    assert span.beta(f) == pytest.approx(expect, rel=1e-14)
    assert span.beta(span.fc) == 0.0


def test_beta_dcu_phase():
    span = make_span(beta_dcu=5e-24)
    u = 100e9
    assert span.beta_dcu_phase(span.fc + u) == pytest.approx(
        2.0 * np.pi ** 2 * 5e-24 * u ** 2, rel=1e-14)


def test_link_container():
    s = make_span()
    link = Link((s, s))
    assert len(link) == 2
    assert link[0] is s
