"""Complex exponential integral and the analytic rectangle kernels.

This module provides the numerical core of the closed form: a complex
exponential integral Ei, the singularity-guarded helper terms used by the
antiderivatives, the four indefinite 2-D antiderivatives of the
exp-times-cos / exp-times-sin kernels, and the definite integrals of those
kernels over axis-aligned rectangles.

All entry points broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EULER_GAMMA = np.euler_gamma

# Three-term exponential fit of the Lorentzian kernel 1/(1+x^2); amplitudes
# and decay rates come as a matched set and must not be edited independently.
H_COEFFS = np.array([-76.70258992199933, 0.22567834335697, 77.47441920490010])
TAU_RATES = np.array([2.01946250412823, 0.322968123744975, 1.996636590604707])


class SingularityError(ValueError):
    """Raised when Ei is evaluated at its z = 0 singularity."""


class DegenerateKernelError(ValueError):
    """Raised when the kernel has no oscillation and no decay (B = K1 = 0)."""


@dataclass(frozen=True)
class GuardParams:
    """Numerical guards for the near-singular Ei - log - gamma combination.

    threshold: below this |z| the truncated power series replaces the
        Ei-based expression.
    series_terms: number of terms kept in the truncated series.
    """

    threshold: float = 1e-3
    series_terms: int = 4


DEFAULT_GUARD = GuardParams()

# Region boundaries for the E1 evaluation strategy.
_SERIES_RADIUS = 3.0
_CUT_ANGLE = 3.0  # |arg w| above this counts as "near the negative real axis"
_NEAR_CUT_SERIES_RADIUS = 40.0
_MAX_CF_ITER = 600
_MAX_SERIES_ITER = 300

# Diagnostic counter: evaluations landing exactly on the logarithm branch cut
# (arg z == pi), where the series form of Ei needs its extra -j*pi correction.
_branch_cut_hits = 0


def branch_cut_hits() -> int:
    return _branch_cut_hits


def reset_branch_cut_hits() -> None:
    global _branch_cut_hits
    _branch_cut_hits = 0


# Count of guarded-series evaluations (|z| below the guard threshold in
# the Ei - ln - gamma combination); lets callers tell which accuracy
# regime a result came from.
_series_hits = 0


def series_hits() -> int:
    return _series_hits


def reset_series_hits() -> None:
    global _series_hits
    _series_hits = 0


def _e1_series(w):
    """Power series for E1; accurate while eps*exp(|w|) stays small."""
    total = np.zeros_like(w)
    term = np.ones_like(w)
    for k in range(1, _MAX_SERIES_ITER + 1):
        term = term * (-w) / k
        contrib = term / k
        total = total - contrib
        if np.all(np.abs(contrib) <= 1e-17 * (1.0 + np.abs(total))):
            break
    return -EULER_GAMMA - np.log(w) + total


def _e1_contfrac_scaled(w):
    """Modified Lentz continued fraction for exp(w)*E1(w)."""
    tiny = 1e-300
    b = w + 1.0
    c = np.full_like(w, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(w.shape, dtype=bool)
    for i in range(1, _MAX_CF_ITER + 1):
        a = -float(i) * float(i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < 1e-16
        if np.all(done):
            break
    return h


def _e1_contfrac(w):
    """Modified Lentz continued fraction; converges away from the cut."""
    return np.exp(-w) * _e1_contfrac_scaled(w)


def _e1_asymptotic_scaled(w):
    """Divergent asymptotic expansion of exp(w)*E1(w), optimally truncated."""
    total = np.ones_like(w)
    term = np.ones_like(w)
    best = np.abs(term)
    frozen = np.zeros(w.shape, dtype=bool)
    for k in range(1, 60):
        term = term * (-float(k)) / w
        grow = np.abs(term) > best
        frozen |= grow
        total = np.where(frozen, total, total + term)
        best = np.where(frozen, best, np.abs(term))
        if np.all(frozen):
            break
    return total / w


def _e1_asymptotic(w):
    """Divergent asymptotic expansion, truncated at its smallest term."""
    return np.exp(-w) * _e1_asymptotic_scaled(w)


def exp1(w):
    """E1(w) for complex w != 0, branch cut on the negative real axis."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise SingularityError("E1 is singular at 0")
    out = np.empty_like(w)
    r = np.abs(w)
    near_cut = np.abs(np.angle(w)) > _CUT_ANGLE

    m_series = (r <= _SERIES_RADIUS) | (near_cut & (r <= _NEAR_CUT_SERIES_RADIUS))
    m_asym = near_cut & (r > _NEAR_CUT_SERIES_RADIUS)
    m_cf = ~(m_series | m_asym)

    if np.any(m_series):
        out[m_series] = _e1_series(w[m_series])
    if np.any(m_cf):
        out[m_cf] = _e1_contfrac(w[m_cf])
    if np.any(m_asym):
        out[m_asym] = _e1_asymptotic(w[m_asym])
    return out


def _exp1_scaled(w):
    """exp(w) * E1(w) without the overflow of the separate factors."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise SingularityError("E1 is singular at 0")
    out = np.empty_like(w)
    r = np.abs(w)
    near_cut = np.abs(np.angle(w)) > _CUT_ANGLE

    m_series = (r <= _SERIES_RADIUS) | (near_cut & (r <= _NEAR_CUT_SERIES_RADIUS))
    m_asym = near_cut & (r > _NEAR_CUT_SERIES_RADIUS)
    m_cf = ~(m_series | m_asym)

    if np.any(m_series):
        out[m_series] = np.exp(w[m_series]) * _e1_series(w[m_series])
    if np.any(m_cf):
        out[m_cf] = _e1_contfrac_scaled(w[m_cf])
    if np.any(m_asym):
        out[m_asym] = _e1_asymptotic_scaled(w[m_asym])
    return out


def ei(z):
    """Complex exponential integral.

    Defined through E1 of the reflected argument plus the branch correction
    -sgn(arg(-z))*j*pi, with sgn(0) = 0, which keeps Ei real on the positive
    real axis.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SingularityError("Ei is singular at 0")
    w = -z
    correction = -1j * np.pi * np.sign(np.angle(w))
    result = -exp1(w) + correction
    global _branch_cut_hits
    on_cut = np.angle(z) == np.pi
    if np.any(on_cut):
        _branch_cut_hits += int(np.count_nonzero(on_cut))
    return result


def kernel_fit(x):
    """Three-exponential approximation of 1/(1+x^2), valid for all real x."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)[..., None]
    return np.sum(H_COEFFS * np.exp(-TAU_RATES * ax), axis=-1)


def _h_guarded(z, guard: GuardParams):
    """Ei(z) - ln(z) - gamma with a truncated-series patch near z = 0.

    The combination is finite at z = 0 but both Ei and ln blow up there, so
    below guard.threshold the truncated power series is used instead.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < guard.threshold
    if np.any(small):
        global _series_hits
        _series_hits += int(np.count_nonzero(small))
        zs = z[small]
        acc = np.zeros_like(zs)
        term = np.ones_like(zs)
        for k in range(1, guard.series_terms + 1):
            term = term * zs / k
            acc = acc + term / k
        out[small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = ei(zb) - np.log(zb) - EULER_GAMMA
    return out


def _corner_terms(plus: bool, B, K1, K2, K3, x, y, guard: GuardParams):
    """Scaled bracket sum exp(-z4) * [h(z1) - h(z2) - h(z3) + h(z4)].

    Returns (scaled_bracket, a, d) where a and d are the branch-dependent
    complex constants reused by the antiderivatives. z4 carries the full
    exp(-+K2*K3/d) prefactor of the antiderivative, so the return value is
    bracket times that prefactor. Where Re(z4) is very negative the
    prefactor amplifies the analytic cancellation among the four h terms
    beyond double precision; there the bracket is reassembled from scaled
    E1 values and the exactly-cancelling logarithm combination is dropped
    (z1*z4 = z2*z3 identically).
    """
    if plus:
        a = K1 + 1j * B
        d = B - 1j * K1
        s = 1.0
    else:
        a = K1 - 1j * B
        d = B + 1j * K1
        s = -1.0
    if np.any(d == 0):
        raise DegenerateKernelError("kernel has B = K1 = 0")
    z1 = s * (K3 + a * x) * (K2 + a * y) / d
    z2 = s * K3 * (K2 + a * y) / d
    z3 = s * K2 * (K3 + a * x) / d
    z4 = s * K2 * K3 / d
    z1, z2, z3, z4 = np.broadcast_arrays(z1, z2, z3, z4)

    amp = np.real(z4) < -2.0
    out = np.empty_like(z1)
    if np.any(~amp):
        i = ~amp
        bracket = (
            _h_guarded(z1[i], guard)
            - _h_guarded(z2[i], guard)
            - _h_guarded(z3[i], guard)
            + _h_guarded(z4[i], guard)
        )
        out[i] = np.exp(-z4[i]) * bracket
    if np.any(amp):
        i = amp
        za, zb, zc, zd = z1[i], z2[i], z3[i], z4[i]
        # Branch bookkeeping: the principal-log combination equals
        # -j*pi*(sum of Ei cut corrections + 2*winding); nonzero values
        # would reintroduce the amplified magnitude, which the four-corner
        # rule cannot cancel in double precision.
        winding = np.round((np.angle(za) - np.angle(zb) - np.angle(zc)
                            + np.angle(zd)) / (2.0 * np.pi))
        cuts = (np.sign(np.angle(-za)) - np.sign(np.angle(-zb))
                - np.sign(np.angle(-zc)) + np.sign(np.angle(-zd)))
        if np.any(np.abs(cuts + 2.0 * winding) > 0.5):
            raise SingularityError(
                "branch mismatch in amplified kernel corner")
        out[i] = -(np.exp(za - zd) * _exp1_scaled(-za)
                   - np.exp(zb - zd) * _exp1_scaled(-zb)
                   - np.exp(zc - zd) * _exp1_scaled(-zc)
                   + _exp1_scaled(-zd))
    return out, a, d


def corner_i1(plus: bool, B, K1, K2, K3, K4, x, y, guard: GuardParams = DEFAULT_GUARD):
    """Antiderivative of exp(-+B*u*v)*cos(K1*u*v + K2*u + K3*v + K4) at (x, y).

    Normalized to vanish whenever x*y -> 0. ``plus`` selects the decaying
    (exp(-Buv)) branch used where u*v >= 0; the other branch carries
    exp(+Buv).
    """
    B, K1, K2, K3, K4, x, y = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (B, K1, K2, K3, K4, x, y))
    )
    bracket, a, d = _corner_terms(plus, B, K1, K2, K3, x, y, guard)
    if plus:
        val = -np.real(np.exp(1j * K4) / d * bracket)
    else:
        val = np.real(np.exp(1j * K4) / d * bracket)
    return np.where((x == 0) | (y == 0), 0.0, val)


def corner_i2(plus: bool, B, K1, K2, K3, K4, x, y, guard: GuardParams = DEFAULT_GUARD):
    """Antiderivative of exp(-+B*u*v)*u*v*sin(K1*u*v + ...) at (x, y)."""
    B, K1, K2, K3, K4, x, y = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (B, K1, K2, K3, K4, x, y))
    )
    bracket, a, d = _corner_terms(plus, B, K1, K2, K3, x, y, guard)
    # Divisions by px/py can produce NaN exactly where the x==0 / y==0
    # mask discards the value anyway.
    with np.errstate(divide="ignore", invalid="ignore"):
        phase_xy = np.exp(1j * (y * (a * x + K3) + K2 * x + K4))
        px = K3 + a * x
        py = K2 + a * y
        t1 = 1j * (K2 * K3 + x * y * d * d) * phase_xy / (d * d * px * py)
        t2 = -1j * K2 * np.exp(1j * (y * K3 + K4)) / (d * d * py)
        t3 = -1j * K3 * np.exp(1j * (x * K2 + K4)) / (d * d * px)
        t4 = 1j * np.exp(1j * K4) / (d * d)
        if plus:
            t5 = (d - K2 * K3) / (a ** 3) * np.exp(1j * K4) * bracket
        else:
            t5 = 1j * (d + K2 * K3) / (d ** 3) * np.exp(1j * K4) * bracket
        val = np.real(t1 + t2 + t3 + t4 + t5)
    return np.where((x == 0) | (y == 0), 0.0, val)


def _split_at_zero(lo: float, hi: float):
    if lo < 0.0 < hi:
        return [(lo, 0.0), (0.0, hi)]
    return [(lo, hi)]


def rect_integral(kind: int, B, K1, K2, K3, K4, x1, x2, y1, y2,
                  guard: GuardParams = DEFAULT_GUARD):
    """Definite rectangle integral of the exponential-Lorentzian kernels.

    kind=1 integrates exp(-B*|u*v|)*cos(K1*u*v + K2*u + K3*v + K4); kind=2
    integrates the u*v*sin(...) companion. The kernel's |u*v| makes the
    integrand branch on the sign of u*v, so rectangles straddling an axis
    are split at u=0 / v=0 and each quadrant-confined piece is evaluated
    with the matching antiderivative branch via the four-corner rule.

    B, K1..K4 broadcast together; the rectangle (x1, x2, y1, y2) is scalar.
    Returns an array shaped like the broadcast coefficients.
    """
    if not (x1 <= x2 and y1 <= y2):
        raise ValueError("rectangle bounds must be ordered")
    corner = corner_i1 if kind == 1 else corner_i2

    plus_corners = []   # (sign, x, y)
    minus_corners = []
    for (xa, xb) in _split_at_zero(float(x1), float(x2)):
        for (ya, yb) in _split_at_zero(float(y1), float(y2)):
            quadrant_plus = (xa + xb) * (ya + yb) >= 0.0
            bucket = plus_corners if quadrant_plus else minus_corners
            bucket.append((+1.0, xb, yb))
            bucket.append((+1.0, xa, ya))
            bucket.append((-1.0, xa, yb))
            bucket.append((-1.0, xb, ya))

    coeffs = [np.asarray(v, dtype=float) for v in (B, K1, K2, K3, K4)]
    coeff_shape = np.broadcast_shapes(*(c.shape for c in coeffs))
    coeffs = [np.broadcast_to(c, coeff_shape) for c in coeffs]
    tail = (1,) * len(coeff_shape)
    total = np.zeros(coeff_shape)
    for plus, corners in ((True, plus_corners), (False, minus_corners)):
        if not corners:
            continue
        sgn = np.array([c[0] for c in corners]).reshape((-1,) + tail)
        cx = np.array([c[1] for c in corners]).reshape((-1,) + tail)
        cy = np.array([c[2] for c in corners]).reshape((-1,) + tail)
        vals = corner(plus, coeffs[0][None], coeffs[1][None], coeffs[2][None],
                      coeffs[3][None], coeffs[4][None], cx, cy, guard)
        total = total + np.sum(sgn * vals, axis=0)
    return total
