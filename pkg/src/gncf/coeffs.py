"""Island-dependent scalars consumed by the closed-form NLI formula.

For each channel triplet's island and each span (or ordered span pair) the
formula needs: effective attenuations of the four-wave product, the g0
gain bookkeeping, accumulated-dispersion sums, the effective beta2, the
Lorentzian widths, the least-squares phase coefficients K, and the
partial-fraction coefficients J / J' / J''.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .islands import Island
from .link import Link, Span

log = logging.getLogger(__name__)

TWO_PI2 = 2.0 * np.pi ** 2
FOUR_PI2 = 4.0 * np.pi ** 2

BETA2_EFF_FLOOR = 1e-33  # s^2/m, well below any physical fiber dispersion

ALPHA_FIT_GRID = 101


class ConfigurationError(ValueError):
    """A physical parameter combination the model cannot represent."""


def _sgn(x: float) -> float:
    """Sign with sgn(0) = +1 (dispersion-sum and beta2_eff convention)."""
    return 1.0 if x >= 0.0 else -1.0


def alpha0_bar(span: Span, island: Island, f: float) -> float:
    """Effective flat attenuation of the four-wave product on one span."""
    f3s = island.f1_star + island.f2_star - f
    if f3s <= 0.0:
        raise ConfigurationError(
            "four-wave product frequency f1* + f2* - f must be positive")
    val = float(span.alpha0(island.f1_star) + span.alpha0(island.f2_star)
                + span.alpha0(f3s) - span.alpha0(f)) / 2.0
    if val <= 0.0:
        raise ConfigurationError(
            "effective attenuation is not positive; the model assumes lossy "
            "spans")
    return val


def _alpha1_target(span: Span, island: Island, f: float, z):
    """Right-hand side R(z) that alpha1_bar*exp(-sigma_bar z) must match."""
    f1s, f2s = island.f1_star, island.f2_star
    f3s = f1s + f2s - f
    total = np.zeros_like(z)
    for freq, w in ((f1s, 0.5), (f2s, 0.5), (f, -0.5), (f3s, 0.5)):
        total = total + w * float(span.alpha1(freq)) \
            * np.exp(-float(span.sigma(freq)) * z)
    return total


def fit_alpha1_sigma(span: Span, island: Island, f: float,
                     a0_bar: float | None = None) -> tuple[float, float]:
    """Single-exponential least-squares fit of the residual attenuation.

    Samples the target R(z) on a uniform grid over the span, seeds with a
    log-domain linear fit on same-sign samples, then applies one
    Gauss-Newton refinement in the linear domain. Falls back to matching
    R(0) and the integral of R when the seed is unusable.
    """
    if a0_bar is None:
        a0_bar = alpha0_bar(span, island, f)
    L = span.length
    z = np.linspace(0.0, L, ALPHA_FIT_GRID)
    R = _alpha1_target(span, island, f, z)
    peak = np.max(np.abs(R))
    if peak < 1e-12 * a0_bar:
        return 0.0, float(span.sigma(f))

    sign = 1.0 if R[int(np.argmax(np.abs(R)))] >= 0.0 else -1.0
    mask = sign * R > 0.0
    a1 = sig = None
    if np.count_nonzero(mask) >= 3:
        slope, intercept = np.polyfit(z[mask], np.log(sign * R[mask]), 1)
        a1 = sign * np.exp(intercept)
        sig = -slope

    def sse(a, s):
        return float(np.sum((a * np.exp(-s * z) - R) ** 2))

    if a1 is None or not np.isfinite(a1) or not np.isfinite(sig) or sig < 0.0:
        a1, sig = _alpha1_moment_match(R, z, L)
        log.warning("alpha1/sigma log-fit unusable; using moment matching")
    else:
        # One Gauss-Newton step on (a1, sigma) in the linear domain.
        e = np.exp(-sig * z)
        model = a1 * e
        r = model - R
        jac = np.stack([e, -a1 * z * e], axis=1)
        jtj = jac.T @ jac
        try:
            step = np.linalg.solve(jtj, jac.T @ r)
            a1_new, sig_new = a1 - step[0], sig - step[1]
            if sig_new > 0.0 and sse(a1_new, sig_new) <= sse(a1, sig):
                a1, sig = a1_new, sig_new
        except np.linalg.LinAlgError:
            pass
    return float(a1), float(sig)


def _alpha1_moment_match(R, z, L: float) -> tuple[float, float]:
    """Match R(0) and the integral of R with a single exponential."""
    a = float(R[0])
    integral = float(np.trapezoid(R, z))
    if a == 0.0 or not (0.0 < integral / (a * L) < 1.0):
        # No decaying exponential matches; keep the amplitude and a mild
        # decay so downstream ratios stay finite.
        return a, 1.0 / L

    def gap(s):
        return a * (1.0 - np.exp(-s * L)) / s - integral

    lo, hi = 1e-9 / L, 1e6 / L
    if gap(lo) * gap(hi) > 0.0:
        return a, 1.0 / L
    return a, float(brentq(gap, lo, hi, xtol=1e-18, rtol=1e-14))


def g0(link: Link, n_s: int, island: Island, f: float) -> float:
    """Gain/loss bookkeeping factor for the span-n_s contribution.

    Spans at and after n_s attenuate and amplify the generated product at
    f; spans before n_s act on the three generating tones. Transparent
    amplifiers make every factor unity.
    """
    f1s, f2s = island.f1_star, island.f2_star
    f3s = f1s + f2s - f
    val = 1.0
    for p, span in enumerate(link.spans, start=1):
        if p >= n_s:
            val *= float(np.sqrt(span.power_gain(f))
                         * np.exp(-span.loss_exponent(f)))
        else:
            for fi in (f1s, f2s, f3s):
                val *= float(np.sqrt(span.power_gain(fi))
                             * np.exp(-span.loss_exponent(fi)))
    return val


def theta0(link: Link, n_s: int, island: Island, f: float) -> float:
    """Accumulated amplifier phase of the FWM combination before span n_s."""
    f1s, f2s = island.f1_star, island.f2_star
    f3s = f1s + f2s - f
    total = 0.0
    for span in link.spans[: n_s - 1]:
        total += float(span.amp_phase(f1s) + span.amp_phase(f2s)
                       - span.amp_phase(f3s) - span.amp_phase(f))
    return total


def phase_offsets(link: Link, island: Island, f: float):
    """theta0 per span and the antisymmetric pair table of differences."""
    th = np.array([theta0(link, ns, island, f)
                   for ns in range(1, len(link) + 1)])
    return th, th[:, None] - th[None, :]


def dispersion_accumulators(link: Link, n_s: int, n_s2: int):
    """Signed dispersion sums over the spans between n_s and n_s2.

    Returns (beta2_acc, beta3_acc, beta3c_acc); beta2_acc includes the
    lumped elements, beta3c_acc carries the per-span reference-frequency
    weighting of the cubic term.
    """
    if n_s == n_s2:
        raise ValueError("accumulators are defined for distinct spans")
    s = _sgn(n_s - n_s2)
    lo, hi = min(n_s, n_s2), max(n_s, n_s2)
    b2 = b3 = b3c = 0.0
    for span in link.spans[lo - 1: hi - 1]:
        b2 += span.beta2 * span.length + span.beta_dcu
        b3 += span.beta3 * span.length
        b3c += span.beta3 * span.fc * span.length
    return s * b2, s * b3, s * b3c


def beta2_eff(span: Span, island: Island, f: float) -> float:
    """Island-averaged effective beta2 (RMS over the equivalent square).

    Sign follows the island-center value; the magnitude is floored to keep
    it usable in denominators.
    """
    center = span.beta2 + np.pi * span.beta3 * (
        island.f1_star + island.f2_star - 2.0 * span.fc)
    l1, l2 = island.L1, island.L2
    mag = np.sqrt(center ** 2
                  + (l1 ** 2 + l2 ** 2) * np.pi ** 2 * span.beta3 ** 2 / 12.0)
    return _sgn(center) * max(mag, BETA2_EFF_FLOOR)


def kbar(b2_acc: float, b3_acc: float, b3c_acc: float, island: Island,
         f: float, delta_theta: float):
    """Closed-form least-squares phase coefficients over the island square."""
    x0 = island.f1_star - f
    y0 = island.f2_star - f
    k1 = FOUR_PI2 * (b2_acc + 2.0 * np.pi * b3_acc * (x0 + y0 + f)
                     - 2.0 * np.pi * b3c_acc)
    k2 = np.pi ** 3 / 3.0 * b3_acc * (island.L2 ** 2 - 12.0 * y0 ** 2)
    k3 = np.pi ** 3 / 3.0 * b3_acc * (island.L1 ** 2 - 12.0 * x0 ** 2)
    return k1, k2, k3, delta_theta


def kbar_numeric_oracle(b2_acc: float, b3_acc: float, b3c_acc: float,
                        island: Island, f: float, delta_theta: float):
    """Phase coefficients by direct solution of the 4x4 normal equations.

    Minimizes the squared distance between the exact phase
    K(u, v)*u*v + delta_theta and the separable model
    k1*u*v + k2*u + k3*v + k4 over the island square. Both the target and
    the basis are expanded as polynomials in island-centered coordinates,
    so the normal equations assemble from exact rectangle moments (odd
    moments vanish identically) and stay well conditioned at optical
    frequency offsets.
    """
    x0 = island.f1_star - f
    y0 = island.f2_star - f
    l1, l2 = island.L1, island.L2
    if l1 <= 0.0 or l2 <= 0.0:
        raise ValueError("degenerate island")

    def mom1(half: float, a: int) -> float:
        if a % 2 == 1:
            return 0.0
        return 2.0 * half ** (a + 1) / (a + 1)

    moms = np.array([[mom1(l1 / 2.0, a) * mom1(l2 / 2.0, b)
                      for b in range(7)] for a in range(7)])

    # Target phase as a coefficient grid over s^i t^j (centered coords).
    k0 = FOUR_PI2 * (b2_acc + np.pi * b3_acc * (x0 + y0 + 2.0 * f)
                     - 2.0 * np.pi * b3c_acc)
    slope = FOUR_PI2 * np.pi * b3_acc
    uv = np.zeros((3, 3))
    uv[0, 0] = x0 * y0
    uv[0, 1] = x0
    uv[1, 0] = y0
    uv[1, 1] = 1.0
    target = np.zeros((3, 3))
    target += k0 * uv
    target[1:, :] += slope * uv[:2, :]   # multiply by s
    target[:, 1:] += slope * uv[:, :2]   # multiply by t
    tgt = np.zeros((4, 4))
    tgt[:3, :3] = target
    tgt[0, 0] += delta_theta

    basis = [((1, 1),), ((1, 0),), ((0, 1),), ((0, 0),)]
    gram = np.zeros((4, 4))
    rhs = np.zeros(4)
    for i, ((ai, bi),) in enumerate(basis):
        for j, ((aj, bj),) in enumerate(basis):
            gram[i, j] = moms[ai + aj, bi + bj]
        acc = 0.0
        for (a, b), coeff in np.ndenumerate(tgt):
            if coeff != 0.0:
                acc += coeff * moms[a + ai, b + bi]
        rhs[i] = acc
    try:
        c1, c2, c3, c4 = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate island") from exc
    k1 = c1
    k2 = c2 - c1 * y0
    k3 = c3 - c1 * x0
    k4 = c4 - c2 * x0 - c3 * y0 + c1 * x0 * y0
    return float(k1), float(k2), float(k3), float(k4)


def kbar_deviation(k_a, k_b, island: Island, f: float) -> float:
    """Relative RMS phase difference of two K coefficient sets.

    The K sets mix units (Hz^-2, Hz^-1, rad), so componentwise comparison
    is meaningless; what matters is the phase k1*uv + k2*u + k3*v + k4
    they produce over the island. Returns the RMS of the difference
    normalized by 1 + the RMS of the first set's phase.
    """
    x0 = island.f1_star - f
    y0 = island.f2_star - f
    m2u = island.L1 ** 2 / 12.0
    m2v = island.L2 ** 2 / 12.0

    def phase_ms(k1, k2, k3, k4):
        # Centered-basis expansion: {st, s, t, 1} are orthogonal over the
        # island square, so the mean square is a plain sum of squares.
        c1 = k1
        c2 = k2 + k1 * y0
        c3 = k3 + k1 * x0
        c4 = k4 + k2 * x0 + k3 * y0 + k1 * x0 * y0
        return (c1 ** 2 * m2u * m2v + c2 ** 2 * m2u + c3 ** 2 * m2v
                + c4 ** 2)

    diff = tuple(a - b for a, b in zip(k_a, k_b))
    return float(np.sqrt(phase_ms(*diff)) / (1.0 + np.sqrt(phase_ms(*k_a))))


def xi_direct(a0_bar: float, a1_bar: float, sigma_bar: float, x: float):
    """Per-span link-function factor, evaluated directly (complex)."""
    den1 = 2.0 * a0_bar - 1j * x
    den2 = 2.0 * a0_bar + sigma_bar - 1j * x
    return 1.0 / den1 - 2.0 * a1_bar / (den1 * den2)


def j_incoherent(a0_bar: float, a1_bar: float, sigma_bar: float):
    """Partial-fraction weights of |xi|^2 over its two Lorentzians."""
    if a1_bar == 0.0:
        return 0.0, 1.0 / (4.0 * a0_bar ** 2)
    if sigma_bar <= 0.0:
        raise ConfigurationError(
            "nonzero alpha1_bar requires a positive sigma_bar")
    s = sigma_bar
    j1 = 4.0 * a1_bar * (2.0 * a0_bar - a1_bar + s) \
        / (s * (2.0 * a0_bar + s) ** 2 * (4.0 * a0_bar + s))
    j2 = (s - 2.0 * a1_bar) * (4.0 * a0_bar - 2.0 * a1_bar + s) \
        / (4.0 * a0_bar ** 2 * s * (4.0 * a0_bar + s))
    return j1, j2


def j_coherent(a0n: float, a1n: float, sn: float, bn: float,
               a0p: float, a1p: float, sp: float, bp: float):
    """Partial-fraction weights of the cross-span interference term.

    Arguments are the effective attenuations and B = 4 pi^2 beta2_eff of
    the two spans of the pair. Returns (jp[4], jpp[4]) for the cosine and
    u*v*sine Lorentzian components respectively.
    """
    base = 2.0 * bn * a0p + 2.0 * bp * a0n
    half = bn * a0p + bp * a0n
    jp1_n = 4.0 * bn * a1n * (base - 2.0 * bn * a1p + bn * sp + bp * sn)
    jp1_d = sn * (2.0 * a0n + sn) * (base + bp * sn) \
        * (base + bn * sp + bp * sn)
    jp2_n = 4.0 * bp * a1p * (base - 2.0 * bp * a1n + bn * sp + bp * sn)
    jp2_d = sp * (2.0 * a0p + sp) * (base + bn * sp) \
        * (base + bn * sp + bp * sn)
    jp3_n = -bn * (2.0 * a1n - sn) * (base - 2.0 * bn * a1p + bn * sp)
    jp3_d = 2.0 * a0n * sn * half * (base + bn * sp)
    jp4_n = -bp * (2.0 * a1p - sp) * (base - 2.0 * bp * a1n + bp * sn)
    jp4_d = 2.0 * a0p * sp * half * (base + bp * sn)

    jpp1_n = -4.0 * bn ** 2 * a1n * (base - 2.0 * bn * a1p + bn * sp
                                     + bp * sn)
    jpp1_d = sn * (2.0 * a0n + sn) ** 2 * (base + bp * sn) \
        * (base + bn * sp + bp * sn)
    jpp2_n = 4.0 * bp ** 2 * a1p * (base - 2.0 * bp * a1n + bn * sp
                                    + bp * sn)
    jpp2_d = sp * (2.0 * a0p + sp) ** 2 * (base + bn * sp) \
        * (base + bn * sp + bp * sn)
    jpp3_n = bn ** 2 * (2.0 * a1n - sn) * (base - 2.0 * bn * a1p + bn * sp)
    jpp3_d = 4.0 * a0n ** 2 * sn * half * (base + bn * sp)
    jpp4_n = -bp ** 2 * (2.0 * a1p - sp) * (base - 2.0 * bp * a1n + bp * sn)
    jpp4_d = 4.0 * a0p ** 2 * sp * half * (base + bp * sn)

    nums = (jp1_n, jp2_n, jp3_n, jp4_n, jpp1_n, jpp2_n, jpp3_n, jpp4_n)
    dens = (jp1_d, jp2_d, jp3_d, jp4_d, jpp1_d, jpp2_d, jpp3_d, jpp4_d)
    if any(d == 0.0 for d in dens):
        raise ConfigurationError("degenerate span pair in J coefficients")
    vals = [n / d for n, d in zip(nums, dens)]
    return tuple(vals[:4]), tuple(vals[4:])


@dataclass(frozen=True)
class SpanCoeffs:
    """Everything the incoherent sum needs for one span on one island."""

    alpha0_bar: float
    alpha1_bar: float
    sigma_bar: float
    g0: float
    theta0: float
    beta2_eff: float
    d1_bar: float
    d2_bar: float
    j1: float
    j2: float

    @property
    def sigma_eff(self) -> float:
        return self.sigma_bar


def span_coeffs(link: Link, n_s: int, island: Island, f: float,
                trace=None) -> SpanCoeffs:
    """Assemble the per-span coefficient record for one island."""
    import time as _time

    def timed(stage, fn, *args):
        if trace is None:
            return fn(*args)
        t0 = _time.perf_counter()
        out = fn(*args)
        trace.add(stage, _time.perf_counter() - t0)
        return out

    span = link[n_s - 1]
    a0b = alpha0_bar(span, island, f)
    a1b, sb = timed("alpha_fit", fit_alpha1_sigma, span, island, f, a0b)
    if a1b == 0.0 and sb <= 0.0:
        # With no residual-attenuation term every sigma_bar dependence
        # cancels algebraically; any positive value serves as placeholder.
        sb = 1.0 / span.length
    b2e = timed("beta2eff", beta2_eff, span, island, f)

    def dbars():
        return (FOUR_PI2 * b2e / (2.0 * a0b + sb),
                FOUR_PI2 * b2e / (2.0 * a0b))

    d1, d2 = timed("dbar", dbars)
    j1, j2 = timed("j_inc", j_incoherent, a0b, a1b, sb)
    return SpanCoeffs(a0b, a1b, sb,
                      timed("g0", g0, link, n_s, island, f),
                      timed("theta", theta0, link, n_s, island, f),
                      b2e, d1, d2, j1, j2)


@dataclass(frozen=True)
class PairCoeffs:
    """Cross-term coefficients for an ordered span pair (n_s < n'_s)."""

    d_bar: tuple[float, float, float, float]
    k_bar: tuple[float, float, float, float]
    jp: tuple[float, float, float, float]
    jpp: tuple[float, float, float, float]
    delta_theta: float
    k_printed_dev: float


KBAR_FAST_PATH_RTOL = 1e-9


def pair_coeffs(link: Link, n_s: int, n_s2: int, island: Island, f: float,
                cn: SpanCoeffs, cp: SpanCoeffs, trace=None) -> PairCoeffs:
    """Assemble the coefficients of the (n_s, n'_s) interference term.

    The phase coefficients come from the numeric least-squares solution;
    the closed-form expressions are evaluated alongside and used verbatim
    when they agree, with the relative deviation recorded either way.
    """
    import time as _time

    t0 = _time.perf_counter() if trace is not None else 0.0
    b2a, b3a, b3ca = dispersion_accumulators(link, n_s, n_s2)
    dth = cn.theta0 - cp.theta0
    k_num = kbar_numeric_oracle(b2a, b3a, b3ca, island, f, dth)
    k_cf = kbar(b2a, b3a, b3ca, island, f, dth)
    dev = kbar_deviation(k_num, k_cf, island, f)
    k_use = k_cf if dev <= KBAR_FAST_PATH_RTOL else k_num
    if trace is not None:
        trace.add("kbar", _time.perf_counter() - t0)
    bn = FOUR_PI2 * cn.beta2_eff
    bp = FOUR_PI2 * cp.beta2_eff
    d_bar = (bn / (2.0 * cn.alpha0_bar + cn.sigma_bar),
             bp / (2.0 * cp.alpha0_bar + cp.sigma_bar),
             bn / (2.0 * cn.alpha0_bar),
             bp / (2.0 * cp.alpha0_bar))
    jp, jpp = j_coherent(cn.alpha0_bar, cn.alpha1_bar, cn.sigma_bar, bn,
                         cp.alpha0_bar, cp.alpha1_bar, cp.sigma_bar, bp)
    return PairCoeffs(d_bar, tuple(k_use), jp, jpp, dth, dev)
