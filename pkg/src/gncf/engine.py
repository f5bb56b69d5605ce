"""Closed-form evaluation of the nonlinear-interference PSD.

Assembles the per-triplet island geometry, the per-span and per-span-pair
coefficient sets, and the analytically integrated exponential-kernel
terms into the full double-sum, including the coherent cross-span part.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import coeffs as cf
from . import specialfn as sf
from .islands import island_geometry
from .link import Link
from .spectrum import Spectrum

GN_PREFACTOR = 16.0 / 27.0
DEFAULT_FALLBACK_GRID = 33


@dataclass(frozen=True)
class NliReport:
    """Result of one PSD evaluation.

    g_nli_total is always incoherent + coherent; the coherent part is
    signed and a negative total is reported through the flag rather than
    clamped away.
    """

    f_eval: float
    g_nli_total: float
    g_nli_incoherent: float
    g_nli_coherent: float
    triplet_count_nonzero: int
    negative_total_flag: bool


class Trace:
    """Per-stage call counts and cumulative wall time."""

    STAGES = ("island", "alpha_fit", "g0", "theta", "beta2eff", "dbar",
              "kbar", "j_inc", "j_coh", "constants", "kernels",
              "accumulate")

    def __init__(self):
        self.counts = {s: 0 for s in self.STAGES}
        self.seconds = {s: 0.0 for s in self.STAGES}

    def add(self, stage: str, dt: float):
        self.counts[stage] += 1
        self.seconds[stage] += dt

    def lines(self):
        out = []
        for s in self.STAGES:
            out.append(f"{s}: calls={self.counts[s]} "
                       f"time={self.seconds[s] * 1e3:.3f}ms")
        return out


def _kernel_quadrature(kind: int, b, k1, k2, k3, k4,
                       x1: float, x2: float, y1: float, y2: float,
                       grid: int):
    """Direct tensor quadrature of the kernel integrals.

    Used when the analytic antiderivative is degenerate for some
    coefficient combination. Integrates exp(-B|xy|) cos(...) (kind 1) or
    xy exp(-B|xy|) sin(...) (kind 2) over the rectangle.
    """
    nodes, weights = np.polynomial.legendre.leggauss(grid)
    x = (x1 + x2) / 2.0 + nodes * (x2 - x1) / 2.0
    y = (y1 + y2) / 2.0 + nodes * (y2 - y1) / 2.0
    xx = x[:, None]
    yy = y[None, :]
    xy = xx * yy
    b = np.asarray(b, dtype=float)
    shape = b.shape
    flat = [np.ravel(np.broadcast_to(np.asarray(a, dtype=float), shape))
            for a in (b, k1, k2, k3, k4)]
    out = np.empty(flat[0].shape)
    ww = np.outer(weights, weights) * (x2 - x1) * (y2 - y1) / 4.0
    for i in range(out.size):
        bb, c1, c2, c3, c4 = (a[i] for a in flat)
        phase = c1 * xy + c2 * xx + c3 * yy + c4
        env = np.exp(-bb * np.abs(xy))
        if kind == 1:
            vals = env * np.cos(phase)
        else:
            vals = env * xy * np.sin(phase)
        out[i] = np.sum(vals * ww)
    return out.reshape(shape)


def _kernel_rect(kind: int, b, k1, k2, k3, k4, x1, x2, y1, y2,
                 grid: int, trace: Trace | None):
    """Kernel integral over a rectangle with quadrature fallback."""
    t0 = time.perf_counter() if trace else 0.0
    try:
        out = sf.rect_integral(kind, b, k1, k2, k3, k4, x1, x2, y1, y2)
    except (sf.DegenerateKernelError, sf.SingularityError):
        out = _kernel_quadrature(kind, b, k1, k2, k3, k4, x1, x2, y1, y2,
                                 grid)
    if trace:
        trace.add("kernels", time.perf_counter() - t0)
    return out


_H = sf.H_COEFFS
_TAU = sf.TAU_RATES


def _triplet_value(link: Link, span_cache: dict, island, f: float,
                   incoherent_only: bool, grid: int,
                   trace: Trace | None) -> tuple[float, float]:
    """(incoherent, coherent) kernel sums for one nonempty island.

    The channel PSD product is applied by the caller.
    """
    if island.empty:
        return 0.0, 0.0
    if island.f1_star > island.f2_star:
        # Every coefficient is symmetric under exchanging the two pump
        # frequencies, so orient the island canonically; this keeps the
        # result bit-identical across equivalent channel orderings.
        island = type(island)(island.area, island.f2_star, island.f1_star)
    n_spans = len(link)
    x1 = island.f1_star - f - island.L1 / 2.0
    x2 = island.f1_star - f + island.L1 / 2.0
    y1 = island.f2_star - f - island.L2 / 2.0
    y2 = island.f2_star - f + island.L2 / 2.0

    per_span = []
    for ns in range(n_spans):
        key = (ns, island.f1_star, island.f2_star)
        got = span_cache.get(key)
        if got is None:
            t0 = time.perf_counter() if trace else 0.0
            got = cf.span_coeffs(link, ns + 1, island, f, trace=trace)
            if trace:
                trace.add("constants", time.perf_counter() - t0)
            span_cache[key] = got
        per_span.append(got)

    b_inc = np.empty((n_spans, 2, 3))
    w_inc = np.empty((n_spans, 2))
    for ns, sc in enumerate(per_span):
        for p, dbar in enumerate((sc.d1_bar, sc.d2_bar)):
            b_inc[ns, p, :] = _TAU * abs(dbar)
        amp = link[ns].gamma ** 2 * sc.g0 ** 2
        w_inc[ns, 0] = amp * sc.j1
        w_inc[ns, 1] = amp * sc.j2
    vals = _kernel_rect(1, b_inc, 0.0, 0.0, 0.0, 0.0, x1, x2, y1, y2,
                        grid, trace)
    inc = float(np.einsum('np,i,npi->', w_inc, _H, vals))

    if incoherent_only or n_spans == 1:
        return inc, 0.0

    pairs = [(ns, ns2) for ns in range(n_spans)
             for ns2 in range(ns + 1, n_spans)]
    n_pairs = len(pairs)
    b_coh = np.empty((n_pairs, 4, 3))
    kb = np.empty((4, n_pairs, 1, 1))
    jp_w = np.empty((n_pairs, 4))
    jpp_w = np.empty((n_pairs, 4))
    for ip, (ns, ns2) in enumerate(pairs):
        t0 = time.perf_counter() if trace else 0.0
        pc = cf.pair_coeffs(link, ns + 1, ns2 + 1, island, f,
                            per_span[ns], per_span[ns2], trace=trace)
        if trace:
            trace.add("j_coh", time.perf_counter() - t0)
        for p in range(4):
            b_coh[ip, p, :] = _TAU * abs(pc.d_bar[p])
        kb[:, ip, 0, 0] = pc.k_bar
        amp = link[ns].gamma * link[ns2].gamma \
            * per_span[ns].g0 * per_span[ns2].g0
        jp_w[ip, :] = amp * np.asarray(pc.jp)
        jpp_w[ip, :] = amp * np.asarray(pc.jpp)
    vals1 = _kernel_rect(1, b_coh, kb[0], kb[1], kb[2], kb[3],
                         x1, x2, y1, y2, grid, trace)
    vals2 = _kernel_rect(2, b_coh, kb[0], kb[1], kb[2], kb[3],
                         x1, x2, y1, y2, grid, trace)
    coh = float(np.einsum('qp,i,qpi->', jp_w, _H, vals1)
                + np.einsum('qp,i,qpi->', jpp_w, _H, vals2))
    return inc, coh


def _triplet_list(comb: Spectrum, f: float):
    """Nonempty (m, n, k, psd_product, island) tuples in fixed order."""
    out = []
    for im, ch_m in enumerate(comb.channels):
        for jn, ch_n in enumerate(comb.channels):
            for kk, ch_k in enumerate(comb.channels):
                g3 = ch_m.psd * ch_n.psd * ch_k.psd
                if g3 == 0.0:
                    continue
                isl = island_geometry(ch_m, ch_n, ch_k, f)
                if isl.empty:
                    continue
                out.append((im, jn, kk, g3, isl))
    return out


def _eval_chunk(args):
    link, f, incoherent_only, grid, chunk = args
    cache: dict = {}
    out = []
    for (g3, isl) in chunk:
        inc, coh = _triplet_value(link, cache, isl, f, incoherent_only,
                                  grid, None)
        out.append((g3 * inc, g3 * coh))
    return out


def gnli_at(comb: Spectrum, link: Link, f: float, *,
            incoherent_only: bool = False, threads: int = 1,
            grid: int = DEFAULT_FALLBACK_GRID,
            trace: Trace | None = None) -> NliReport:
    """Closed-form NLI PSD at a single frequency.

    Worker count only changes how per-triplet work is distributed; the
    final reduction always runs in triplet order, so results are
    bit-identical for any thread setting.
    """
    t0 = time.perf_counter() if trace else 0.0
    triplets = _triplet_list(comb, f)
    if trace:
        trace.add("island", time.perf_counter() - t0)

    if threads > 1 and len(triplets) > 1:
        from concurrent.futures import ProcessPoolExecutor

        work = [(g3, isl) for (_, _, _, g3, isl) in triplets]
        n_chunks = min(threads * 4, len(work))
        chunks = [work[i::n_chunks] for i in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                _eval_chunk,
                [(link, f, incoherent_only, grid, c) for c in chunks]))
        # Undo the strided split so the fold order matches threads=1.
        values = [None] * len(work)
        for ci, part in enumerate(parts):
            for wi, v in enumerate(part):
                values[ci + wi * n_chunks] = v
    else:
        cache: dict = {}
        values = []
        for (_, _, _, g3, isl) in triplets:
            inc, coh = _triplet_value(link, cache, isl, f,
                                      incoherent_only, grid, trace)
            values.append((g3 * inc, g3 * coh))

    t0 = time.perf_counter() if trace else 0.0
    inc_total = 0.0
    coh_total = 0.0
    for vi, vc in values:
        inc_total += vi
        coh_total += vc
    inc_total *= GN_PREFACTOR
    coh_total *= GN_PREFACTOR
    if trace:
        trace.add("accumulate", time.perf_counter() - t0)
    total = inc_total + coh_total
    return NliReport(f_eval=f, g_nli_total=total,
                     g_nli_incoherent=inc_total, g_nli_coherent=coh_total,
                     triplet_count_nonzero=len(triplets),
                     negative_total_flag=total < 0.0)


def gnli_per_channel(comb: Spectrum, link: Link, *,
                     incoherent_only: bool = False, threads: int = 1,
                     grid: int = DEFAULT_FALLBACK_GRID):
    """NLI at every channel center.

    Returns a list of (channel, report, nli_power_w) with the power taken
    as PSD at center times channel bandwidth.
    """
    out = []
    for ch in comb.channels:
        rep = gnli_at(comb, link, ch.center,
                      incoherent_only=incoherent_only, threads=threads,
                      grid=grid)
        out.append((ch, rep, rep.g_nli_total * ch.width))
    return out


def lk_sq_closed(link: Link, island, f: float, f1, f2) -> np.ndarray:
    """Pointwise closed-form |LK|^2 before the exponential-kernel fit.

    Diagnostic companion to the numerical link function: Lorentzian
    incoherent terms plus phase-modulated coherent cross terms, evaluated
    with this island's averaged coefficients at the given (f1, f2).
    """
    u = np.asarray(f1, dtype=float) - f
    v = np.asarray(f2, dtype=float) - f
    w = u * v
    n_spans = len(link)
    per_span = [cf.span_coeffs(link, ns + 1, island, f)
                for ns in range(n_spans)]
    total = np.zeros(np.broadcast(u, v).shape)
    for ns, sc in enumerate(per_span):
        amp = link[ns].gamma ** 2 * sc.g0 ** 2
        total = total + amp * (sc.j1 / (1.0 + w ** 2 * sc.d1_bar ** 2)
                               + sc.j2 / (1.0 + w ** 2 * sc.d2_bar ** 2))
    for ns in range(n_spans):
        for ns2 in range(ns + 1, n_spans):
            pc = cf.pair_coeffs(link, ns + 1, ns2 + 1, island, f,
                                per_span[ns], per_span[ns2])
            amp = link[ns].gamma * link[ns2].gamma \
                * per_span[ns].g0 * per_span[ns2].g0
            k1, k2, k3, k4 = pc.k_bar
            phase = k1 * w + k2 * u + k3 * v + k4
            for p in range(4):
                lor = 1.0 + w ** 2 * pc.d_bar[p] ** 2
                total = total + amp * (pc.jp[p] * np.cos(phase)
                                       + pc.jpp[p] * w * np.sin(phase)) / lor
    return total
