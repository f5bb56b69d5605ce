import numpy as np
import pytest

from gncf import engine as eng
from gncf import oracle as orc
from gncf.islands import island_geometry
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


COMB = uniform_comb(3, FC, 100e9, 86.6e9, 4.6e-17)


def test_single_span_has_no_coherent_part():
    link = Link((make_span(),))
    rep = eng.gnli_at(COMB, link, FC)
    assert rep.g_nli_coherent == 0.0
    assert rep.g_nli_total == rep.g_nli_incoherent
    assert rep.g_nli_total > 0.0
    assert not rep.negative_total_flag


def test_report_total_is_sum_of_parts():
    link = Link(tuple(make_span() for _ in range(3)))
    rep = eng.gnli_at(COMB, link, FC)
    assert rep.g_nli_total == pytest.approx(
        rep.g_nli_incoherent + rep.g_nli_coherent, rel=1e-14)
    assert rep.g_nli_coherent != 0.0


def test_cubic_psd_scaling():
    link = Link(tuple(make_span() for _ in range(2)))
    c = 2.7
    scaled = uniform_comb(3, FC, 100e9, 86.6e9, c * 4.6e-17)
    base = eng.gnli_at(COMB, link, FC)
    up = eng.gnli_at(scaled, link, FC)
    assert up.g_nli_total == pytest.approx(
        c ** 3 * base.g_nli_total, rel=1e-12)


def test_triplet_symmetry_under_first_two_indices():
    # The contribution of (m, n, k) equals that of (n, m, k): the island
    # geometry and every coefficient are symmetric in the first two slots.
    link = Link(tuple(make_span() for _ in range(2)))
    chans = COMB.channels
    cache = {}
    for m, n in ((0, 2), (1, 2), (0, 1)):
        isl_a = island_geometry(chans[m], chans[n], chans[1], FC)
        isl_b = island_geometry(chans[n], chans[m], chans[1], FC)
        val_a = eng._triplet_value(link, cache, isl_a, FC, False, 33, None)
        val_b = eng._triplet_value(link, cache, isl_b, FC, False, 33, None)
        assert val_b == pytest.approx(val_a, rel=1e-12)


def test_empty_island_contributes_exact_zero():
    link = Link((make_span(),))
    narrow = uniform_comb(3, FC, 400e9, 20e9, 4.6e-17)
    chans = narrow.channels
    # f1 in the top channel plus f2 in the top channel can never fold back
    # into the bottom channel at this spacing.
    isl = island_geometry(chans[2], chans[2], chans[0], FC)
    assert isl.empty
    assert eng._triplet_value(link, {}, isl, FC, False, 33, None) == (0.0, 0.0)


def test_thread_count_does_not_change_bits():
    link = Link(tuple(make_span() for _ in range(3)))
    one = eng.gnli_at(COMB, link, FC, threads=1)
    two = eng.gnli_at(COMB, link, FC, threads=2)
    assert one.g_nli_total == two.g_nli_total
    assert one.g_nli_incoherent == two.g_nli_incoherent
    assert one.g_nli_coherent == two.g_nli_coherent


def test_incoherent_only_drops_cross_span_terms():
    link = Link(tuple(make_span() for _ in range(3)))
    full = eng.gnli_at(COMB, link, FC)
    inc = eng.gnli_at(COMB, link, FC, incoherent_only=True)
    assert inc.g_nli_coherent == 0.0
    assert inc.g_nli_incoherent == pytest.approx(
        full.g_nli_incoherent, rel=1e-14)


def test_trace_collects_all_stages():
    link = Link(tuple(make_span() for _ in range(2)))
    trace = eng.Trace()
    eng.gnli_at(COMB, link, FC, trace=trace)
    lines = trace.lines()
    assert len(lines) == len(eng.Trace.STAGES)
    for stage in eng.Trace.STAGES:
        assert any(stage in ln for ln in lines)


def test_per_channel_sweep_shape():
    link = Link((make_span(),))
    rows = eng.gnli_per_channel(COMB, link)
    assert len(rows) == len(COMB.channels)
    for ch, rep, power in rows:
        assert rep.f_eval == ch.center
        assert power == pytest.approx(rep.g_nli_total * ch.width)


def test_closed_form_integrand_tracks_exact_link_function():
    # Pointwise spot check of the factored integrand against the direct
    # numerical link function at the island centroid.
    link = Link(tuple(make_span() for _ in range(2)))
    chans = COMB.channels
    isl = island_geometry(chans[0], chans[2], chans[1], FC)
    closed = eng.lk_sq_closed(link, isl, FC, isl.f1_star, isl.f2_star)
    exact = float(np.abs(orc.lk_numeric(
        link, isl.f1_star, isl.f2_star, FC)) ** 2)
    assert closed == pytest.approx(exact, rel=0.05)
