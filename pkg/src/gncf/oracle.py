"""Brute-force numerical reference for the closed form.

Everything here integrates the exact link function: no island-rectangle
replacement, no effective-attenuation averaging, no dropped loss terms, no
exponential-kernel fit. It is slow on purpose; its role is to bound the
total approximation error of the analytic path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .link import Link
from .spectrum import Spectrum

GN_PREFACTOR = 16.0 / 27.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy controls for the reference integrator.

    rel_tol: target relative accuracy of the aggregate result.
    max_cells: refinement budget per integration task.
    z_steps: panels for the per-span z integral when alpha1 is nonzero.
    gl_order: Gauss-Legendre points per axis and cell.
    """

    rel_tol: float = 1e-5
    max_cells: int = 200_000
    z_steps: int = 96
    gl_order: int = 12

    def __post_init__(self):
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be positive")
        if self.z_steps < 64:
            raise ValueError("z_steps must be at least 64")


DEFAULT_QUAD = QuadratureSpec()


def _z_integral(span, delta_beta, a0_sum, alpha1_terms, z_steps: int):
    """Inner z' integral of one span, vectorized over the detuning phase.

    The exponent's phase is exactly linear in z, so each panel uses the
    exponential-of-linear rule, which integrates the oscillation without
    resolving individual cycles; only the smooth alpha1 depletion term is
    interpolated.

    delta_beta broadcasts; alpha1_terms is a list of (weight, a1, sigma).
    """
    L = span.length
    c_lin = -a0_sum - 1j * delta_beta
    if not alpha1_terms:
        cl = c_lin * L
        small = np.abs(cl) < 1e-8
        safe = np.where(small, 1.0, cl)
        out = np.where(small, L * (1.0 + cl / 2.0 + cl * cl / 6.0),
                       L * (np.exp(safe) - 1.0) / safe)
        return out

    z = np.linspace(0.0, L, z_steps + 1)
    shape = (z_steps + 1,) + (1,) * np.ndim(c_lin)
    zc = z.reshape(shape)
    expo = c_lin * zc
    for w, a1, sig in alpha1_terms:
        if sig == 0.0:
            expo = expo - w * a1 * zc
        else:
            expo = expo - w * (a1 / sig) * (1.0 - np.exp(-sig * zc))
    ea = expo[:-1]
    eb = expo[1:]
    de = eb - ea
    small = np.abs(de) < 1e-8
    safe = np.where(small, 1.0, de)
    panel = np.where(small,
                     np.exp(ea) * (1.0 + de / 2.0 + de * de / 6.0),
                     (np.exp(eb) - np.exp(ea)) / safe)
    return np.sum(panel, axis=0) * (L / z_steps)


def lk_numeric(link: Link, f1, f2, f3, z_steps: int = 96):
    """Exact link function, vectorized over broadcast (f1, f2, f3) arrays."""
    f1, f2, f3 = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (f1, f2, f3)))
    f4 = f1 + f2 - f3
    n_spans = len(link)

    # Per-span transfer factors of the generated product (applied after the
    # generating span) and of the three tones (before it).
    after = np.ones(f1.shape + (n_spans + 1,), dtype=complex)
    before = np.ones(f1.shape + (n_spans + 1,), dtype=complex)
    for idx, span in enumerate(link.spans):
        gain = span.power_gain(f4)
        fac_after = np.sqrt(gain) \
            * np.exp(-span.loss_exponent(f4)
                     - 1j * span.beta(f4) * span.length
                     - 1j * span.beta_dcu_phase(f4)) \
            * np.exp(1j * span.amp_phase(f4))
        g3 = span.power_gain(f1) * span.power_gain(f2) * span.power_gain(f3)
        fac_before = np.sqrt(g3) \
            * np.exp(1j * (span.amp_phase(f1) + span.amp_phase(f2)
                           - span.amp_phase(f3) - span.amp_phase(f4))) \
            * np.exp(-(span.loss_exponent(f1) + span.loss_exponent(f2)
                       + span.loss_exponent(f3))) \
            * np.exp(-1j * (span.beta(f1) + span.beta(f2)
                            - span.beta(f3)) * span.length) \
            * np.exp(-1j * (span.beta_dcu_phase(f1) + span.beta_dcu_phase(f2)
                            - span.beta_dcu_phase(f3)))
        after[..., idx] = fac_after
        before[..., idx + 1] = fac_before
    # Suffix product of "after" factors and prefix product of "before" ones.
    after_tail = np.flip(np.cumprod(np.flip(after, axis=-1), axis=-1),
                         axis=-1)
    before_head = np.cumprod(before, axis=-1)

    total = np.zeros(f1.shape, dtype=complex)
    for idx, span in enumerate(link.spans):
        a0_sum = (span.alpha0(f1) + span.alpha0(f2) + span.alpha0(f3)
                  - span.alpha0(f4))
        delta_beta = (span.beta(f1) + span.beta(f2) - span.beta(f3)
                      - span.beta(f4))
        terms = []
        for freq, w in ((f1, 1.0), (f2, 1.0), (f3, 1.0), (f4, -1.0)):
            a1 = span.alpha1(freq)
            if np.any(a1 != 0.0):
                terms.append((w, a1, span.sigma(freq)))
        if terms:
            # Frequency-dependent a1/sigma arrays: fall back to the panel
            # rule with array coefficients folded into the exponent.
            zint = _z_integral_arrays(span, delta_beta, a0_sum, terms, z_steps)
        else:
            zint = _z_integral(span, delta_beta, a0_sum, [], z_steps)
        total = total + span.gamma * zint * after_tail[..., idx] \
            * before_head[..., idx]
    return -1j * total


def _z_integral_arrays(span, delta_beta, a0_sum, terms, z_steps: int):
    """Panel-rule z integral with array-valued alpha1/sigma coefficients."""
    L = span.length
    z = np.linspace(0.0, L, z_steps + 1)
    shape = (z_steps + 1,) + (1,) * np.ndim(delta_beta)
    zc = z.reshape(shape)
    expo = (-a0_sum - 1j * delta_beta) * zc
    for w, a1, sig in terms:
        sig = np.asarray(sig, dtype=float)
        small = sig == 0.0
        safe = np.where(small, 1.0, sig)
        dep = np.where(small, a1 * zc, (a1 / safe) * (1.0 - np.exp(-safe * zc)))
        expo = expo - w * dep
    ea, eb = expo[:-1], expo[1:]
    de = eb - ea
    small = np.abs(de) < 1e-8
    safe = np.where(small, 1.0, de)
    panel = np.where(small,
                     np.exp(ea) * (1.0 + de / 2.0 + de * de / 6.0),
                     (np.exp(eb) - np.exp(ea)) / safe)
    return np.sum(panel, axis=0) * (L / z_steps)


def _product_reducible(link: Link) -> bool:
    """True when |LK|^2 depends on (f1-f)(f2-f) only.

    Requires flat attenuation, gain and amplifier-phase profiles and no
    third-order dispersion; then every frequency combination in the link
    function collapses to the detuning product.
    """
    for span in link.spans:
        if span.beta3 != 0.0:
            return False
        for prof in (span.alpha0, span.alpha1, span.sigma, span.phase):
            if not prof.is_constant:
                return False
        if span.gain is not None and not span.gain.is_constant:
            return False
    return True


def _reduced_lk_sq(link: Link, f: float, z_steps: int):
    """Factory for |LK|^2 as a function of the detuning product w.

    Only valid for product-reducible links (see _product_reducible).
    """
    n_spans = len(link)
    gains = np.array([float(span.power_gain(f)) for span in link.spans])
    losses = np.array([float(span.loss_exponent(f))
                       for span in link.spans])
    # After span ns: one tone at f; before: three tones, each with the flat
    # loss/gain, FWM phases cancelling except the product terms.
    after_amp = np.ones(n_spans)
    before_amp = np.ones(n_spans)
    beta_acc = np.zeros(n_spans)
    for ns in range(n_spans):
        amp = 1.0
        for p in range(ns, n_spans):
            amp *= np.sqrt(gains[p]) * np.exp(-losses[p])
        after_amp[ns] = amp
        amp = 1.0
        acc = 0.0
        for p in range(ns):
            amp *= gains[p] ** 1.5 * np.exp(-3.0 * losses[p])
            acc += link[p].beta2 * link[p].length + link[p].beta_dcu
        before_amp[ns] = amp
        beta_acc[ns] = acc
    gammas = np.array([span.gamma for span in link.spans])
    a0s = np.array([2.0 * float(span.alpha0(f)) for span in link.spans])
    a1s = np.array([float(span.alpha1(f)) for span in link.spans])
    sigs = np.array([float(span.sigma(f)) for span in link.spans])
    b2s = np.array([span.beta2 for span in link.spans])
    lengths = np.array([span.length for span in link.spans])

    def lk_sq(w):
        w = np.asarray(w, dtype=float)
        total = np.zeros(w.shape, dtype=complex)
        for ns in range(n_spans):
            phase_inner = -4.0 * np.pi ** 2 * w * b2s[ns]
            terms = []
            if a1s[ns] != 0.0:
                terms = [(2.0, a1s[ns], sigs[ns])]
            span = link[ns]
            zint = _z_integral(span, phase_inner, a0s[ns], terms, z_steps)
            total = total + gammas[ns] * zint * after_amp[ns] \
                * before_amp[ns] \
                * np.exp(1j * 4.0 * np.pi ** 2 * w * beta_acc[ns])
        return np.abs(total) ** 2

    return lk_sq


def _product_density(w, a1: float, a2: float, b1: float, b2: float,
                     s1: float, s2: float):
    """Density of the detuning product over a band-clipped rectangle.

    For the region a1 <= u <= a2, b1 <= v <= b2, s1 <= u+v <= s2 this is
    rho(w) = integral du/|u| over {u : (u, w/u) in region}, so that
    any integral of g(u*v) over the region equals integral g(w) rho(w) dw.
    Vectorized over w; evaluated by collecting the boundary breakpoints in
    u and testing subinterval midpoints.
    """
    w = np.asarray(w, dtype=float)
    cands = [np.full_like(w, a1), np.full_like(w, a2),
             np.zeros_like(w)]
    with np.errstate(divide='ignore', invalid='ignore'):
        for b in (b1, b2):
            cands.append(np.where(b != 0.0, w / np.where(b == 0.0, 1.0, b),
                                  np.nan))
        for s in (s1, s2):
            disc = s * s - 4.0 * w
            root = np.sqrt(np.where(disc >= 0.0, disc, np.nan))
            cands.append((s - root) / 2.0)
            cands.append((s + root) / 2.0)
    grid = np.stack(cands, axis=-1)
    grid = np.clip(grid, a1, a2)
    grid = np.where(np.isnan(grid), a1, grid)
    grid = np.sort(grid, axis=-1)
    lo = grid[..., :-1]
    hi = grid[..., 1:]
    mid = (lo + hi) / 2.0
    wexp = w[..., None]
    with np.errstate(divide='ignore', invalid='ignore'):
        v = wexp / mid
    inside = (np.abs(mid) > 0.0) & (v >= b1) & (v <= b2) \
        & (mid + v >= s1) & (mid + v <= s2) & (hi > lo)
    # Exclude subintervals containing u = 0 (v diverges there; the region
    # boundary never does, so such midpoints only arise for w ~ 0 slivers).
    straddle = (lo < 0.0) & (hi > 0.0)
    with np.errstate(divide='ignore', invalid='ignore'):
        contrib = np.where(inside & ~straddle,
                           np.abs(np.log(np.abs(hi) / np.abs(lo))), 0.0)
    return np.sum(np.where(np.isfinite(contrib), contrib, 0.0), axis=-1)


def _adaptive_1d(fn, lo: float, hi: float, rel_tol: float, abs_tol: float,
                 max_cells: int, order: int = 24):
    """Deterministic adaptive Gauss-Legendre on [lo, hi].

    Splits the worst cell (parent-vs-children disagreement) first; the
    heap is ordered by (-error, lo) so results do not depend on float
    tie-breaking across runs.
    """
    import heapq

    nodes, weights = np.polynomial.legendre.leggauss(order)

    def cell(a, b):
        x = (a + b) / 2.0 + nodes * (b - a) / 2.0
        return float(np.sum(fn(x) * weights)) * (b - a) / 2.0

    def refined(a, b):
        m = (a + b) / 2.0
        return cell(a, m) + cell(m, b)

    heap = []
    total_cells = 3
    fine = refined(lo, hi)
    heapq.heappush(heap, (-abs(fine - cell(lo, hi)), lo, hi, fine))
    while heap and total_cells < max_cells:
        total = sum(item[3] for item in heap)
        est_err = sum(-item[0] for item in heap)
        if est_err <= rel_tol * abs(total) + abs_tol:
            break
        _, a, b, _ = heapq.heappop(heap)
        m = (a + b) / 2.0
        for aa, bb in ((a, m), (m, b)):
            fv = refined(aa, bb)
            heapq.heappush(heap, (-abs(fv - cell(aa, bb)), aa, bb, fv))
            total_cells += 3
    total = sum(item[3] for item in sorted(heap, key=lambda t: t[1]))
    err_bound = sum(-item[0] for item in heap)
    return total, err_bound, total_cells


def _island_bounds(ch_m, ch_n, ch_k, f: float):
    """Centered rectangle and band parameters of one island; None if empty."""
    a1, a2 = ch_m.f_start - f, ch_m.f_end - f
    b1, b2 = ch_n.f_start - f, ch_n.f_end - f
    s1 = ch_k.f_start - f  # u + v >= fs_k + f - 2f  ... see below
    s2 = ch_k.f_end - f
    # Band: fs_k + f <= f1 + f2 <= fe_k + f, i.e. s1 <= u + v <= s2 with
    # u = f1 - f, v = f2 - f and s = fs/e_k - f.
    if s1 > a2 + b2 or s2 < a1 + b1:
        return None
    return a1, a2, b1, b2, s1, s2


def _triplet_integral_product(lk_sq, bounds, rel_tol, abs_tol, max_cells):
    """Integral of |LK|^2 over one island via the product substitution."""
    a1, a2, b1, b2, s1, s2 = bounds
    corners = [a1 * b1, a1 * b2, a2 * b1, a2 * b2]
    w_lo, w_hi = min(corners), max(corners)
    if (a1 < 0.0 < a2) or (b1 < 0.0 < b2):
        w_lo = min(w_lo, 0.0)
        w_hi = max(w_hi, 0.0)
    if w_hi <= w_lo:
        return 0.0, 0.0, 0

    def integrand(w):
        return lk_sq(w) * _product_density(w, a1, a2, b1, b2, s1, s2)

    # The density has a logarithmic singularity at w = 0 when the island
    # touches the axes; split there and let refinement handle the rest.
    splits = [w_lo, w_hi]
    if w_lo < 0.0 < w_hi:
        splits = [w_lo, 0.0, w_hi]
    total = 0.0
    err = 0.0
    cells = 0
    for aa, bb in zip(splits[:-1], splits[1:]):
        if bb <= aa:
            continue
        t, e, c = _adaptive_1d(integrand, aa, bb, rel_tol, abs_tol,
                               max_cells)
        total += t
        err += e
        cells += c
    return total, err, cells


def _adaptive_2d(fn, region, rel_tol, abs_tol, max_cells, order):
    """Deterministic adaptive tensor Gauss-Legendre over a y-panel list.

    region is a list of (ylo, yhi, xlo(y) linear coeffs, xhi(y) coeffs);
    each panel maps to the unit square so the clipped island edges never
    cross a cell.
    """
    import heapq

    nodes, weights = np.polynomial.legendre.leggauss(order)

    def cell(panel, u0, u1, v0, v1):
        ylo, yhi, (xa, xb), (xc, xd) = panel
        uu = (u0 + u1) / 2.0 + nodes * (u1 - u0) / 2.0
        vv = (v0 + v1) / 2.0 + nodes * (v1 - v0) / 2.0
        y = ylo + vv * (yhi - ylo)
        xlo = xa + xb * y
        xhi = xc + xd * y
        x = xlo[None, :] + uu[:, None] * (xhi - xlo)[None, :]
        jac = (xhi - xlo)[None, :] * (yhi - ylo)
        vals = fn(x, np.broadcast_to(y, x.shape)) * jac
        return float(weights @ vals @ weights) * (u1 - u0) * (v1 - v0) / 4.0

    heap = []
    total_cells = 0
    counter = 0
    for pi, panel in enumerate(region):
        c = cell(panel, 0.0, 1.0, 0.0, 1.0)
        f4 = sum(cell(panel, *q) for q in
                 ((0.0, 0.5, 0.0, 0.5), (0.5, 1.0, 0.0, 0.5),
                  (0.0, 0.5, 0.5, 1.0), (0.5, 1.0, 0.5, 1.0)))
        heapq.heappush(heap, (-abs(f4 - c), pi, counter,
                              (0.0, 1.0, 0.0, 1.0), f4))
        counter += 1
        total_cells += 5
    while heap and total_cells < max_cells:
        err, pi, _, (u0, u1, v0, v1), val = heap[0]
        err = -err
        total = sum(item[4] for item in heap)
        est = sum(-item[0] for item in heap)
        if est <= rel_tol * abs(total) + abs_tol:
            break
        heapq.heappop(heap)
        um, vm = (u0 + u1) / 2.0, (v0 + v1) / 2.0
        for q in ((u0, um, v0, vm), (um, u1, v0, vm),
                  (u0, um, vm, v1), (um, u1, vm, v1)):
            c = cell(region[pi], *q)
            qm = ((q[0] + q[1]) / 2.0, (q[2] + q[3]) / 2.0)
            f4 = sum(cell(region[pi], *qq) for qq in
                     ((q[0], qm[0], q[2], qm[1]), (qm[0], q[1], q[2], qm[1]),
                      (q[0], qm[0], qm[1], q[3]), (qm[0], q[1], qm[1], q[3])))
            heapq.heappush(heap, (-abs(f4 - c), pi, counter, q, f4))
            counter += 1
            total_cells += 5
    total = sum(item[4] for item in sorted(heap, key=lambda t: (t[1], t[2])))
    err_bound = sum(-item[0] for item in heap)
    return total, err_bound, total_cells


def _clipped_panels(ch_m, ch_n, ch_k, f: float):
    """y-panels with linear x-limits covering the clipped island exactly."""
    bounds = _island_bounds(ch_m, ch_n, ch_k, f)
    if bounds is None:
        return []
    a1, a2, b1, b2, s1, s2 = bounds
    breaks = {b1, b2}
    for s in (s1, s2):
        for a in (a1, a2):
            y = s - a
            if b1 < y < b2:
                breaks.add(y)
    ys = sorted(breaks)
    panels = []
    for ylo, yhi in zip(ys[:-1], ys[1:]):
        ym = (ylo + yhi) / 2.0
        xlo = max(a1, s1 - ym)
        xhi = min(a2, s2 - ym)
        if xhi <= xlo:
            continue
        # Linear-in-y limit coefficients for this panel.
        lo_c = (a1, 0.0) if a1 >= s1 - ym else (s1, -1.0)
        hi_c = (a2, 0.0) if a2 <= s2 - ym else (s2, -1.0)
        panels.append((ylo, yhi, lo_c, hi_c))
    return panels


def gnli_numeric(comb: Spectrum, link: Link, f: float,
                 quad: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
    """Reference NLI PSD at f by direct integration of the GN double sum.

    Returns (value in W/Hz, estimated error bound). Product-reducible
    links use an exact change of variables to the detuning product, which
    turns each island into a one-dimensional integral; everything else
    runs the two-dimensional clipped-domain adaptive quadrature.
    """
    reducible = _product_reducible(link)
    lk_sq_w = _reduced_lk_sq(link, f, quad.z_steps) if reducible else None

    tasks = []
    for im, ch_m in enumerate(comb.channels):
        for jn, ch_n in enumerate(comb.channels):
            for kk, ch_k in enumerate(comb.channels):
                g3 = ch_m.psd * ch_n.psd * ch_k.psd
                if g3 == 0.0:
                    continue
                bounds = _island_bounds(ch_m, ch_n, ch_k, f)
                if bounds is None:
                    continue
                tasks.append((im, jn, kk, ch_m, ch_n, ch_k, g3, bounds))

    # Coarse pass fixes a per-island absolute budget for the final pass.
    coarse_vals = []
    for (_, _, _, ch_m, ch_n, ch_k, g3, bounds) in tasks:
        if reducible:
            val, _, _ = _triplet_integral_product(
                lk_sq_w, bounds, 1e-2, 0.0, 2000)
        else:
            panels = _clipped_panels(ch_m, ch_n, ch_k, f)
            fn = _lk_sq_xy(link, f, quad.z_steps)
            val, _, _ = _adaptive_2d(fn, panels, 1e-2, 0.0, 400,
                                     quad.gl_order)
        coarse_vals.append(abs(val) * g3)
    coarse_total = sum(coarse_vals) * GN_PREFACTOR
    n = max(len(tasks), 1)
    abs_budget = quad.rel_tol * coarse_total / (GN_PREFACTOR * n + (n == 0))

    total = 0.0
    err_total = 0.0
    for (_, _, _, ch_m, ch_n, ch_k, g3, bounds) in tasks:
        tol_abs = abs_budget / max(g3, 1e-300)
        if reducible:
            val, err, _ = _triplet_integral_product(
                lk_sq_w, bounds, quad.rel_tol, tol_abs, quad.max_cells)
        else:
            panels = _clipped_panels(ch_m, ch_n, ch_k, f)
            fn = _lk_sq_xy(link, f, quad.z_steps)
            val, err, _ = _adaptive_2d(fn, panels, quad.rel_tol, tol_abs,
                                       quad.max_cells, quad.gl_order)
        total += g3 * val
        err_total += g3 * err
    return GN_PREFACTOR * total, GN_PREFACTOR * err_total


def _lk_sq_xy(link: Link, f: float, z_steps: int):
    """|LK|^2 as a function of centered island coordinates (u, v)."""

    def fn(u, v):
        f1 = u + f
        f2 = v + f
        f3 = f1 + f2 - f
        return np.abs(lk_numeric(link, f1, f2, f3, z_steps)) ** 2

    return fn


def island_integral_numeric(ch_m, ch_n, ch_k, f: float, link: Link,
                            quad: QuadratureSpec = DEFAULT_QUAD):
    """|LK|^2 integrated over the exact island and its equivalent square.

    Returns (exact_island_value, square_value); the pair quantifies the
    rectangle-replacement approximation for this triplet.
    """
    from .islands import island_geometry

    fn = _lk_sq_xy(link, f, quad.z_steps)
    panels = _clipped_panels(ch_m, ch_n, ch_k, f)
    if not panels:
        return 0.0, 0.0
    exact, _, _ = _adaptive_2d(fn, panels, quad.rel_tol, 0.0,
                               quad.max_cells, quad.gl_order)
    isl = island_geometry(ch_m, ch_n, ch_k, f)
    if isl.empty:
        return exact, 0.0
    x0 = isl.f1_star - f
    y0 = isl.f2_star - f
    sq_panels = [(y0 - isl.L2 / 2.0, y0 + isl.L2 / 2.0,
                  (x0 - isl.L1 / 2.0, 0.0), (x0 + isl.L1 / 2.0, 0.0))]
    square, _, _ = _adaptive_2d(fn, sq_panels, quad.rel_tol, 0.0,
                                quad.max_cells, quad.gl_order)
    return exact, square
