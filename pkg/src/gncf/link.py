"""Physical description of a multi-span link.

Each span carries a frequency-resolved attenuation model

    alpha(z, f) = alpha0(f) + alpha1(f) * exp(-sigma(f) * z)

(field attenuation, Np/m; signal power decays as exp(-2 alpha z)), a
third-order dispersion expansion around a reference frequency, an optional
lumped dispersion element, and an amplifier with a power gain and phase
profile. All quantities are SI.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FreqProfile:
    """A scalar or piecewise-linear function of frequency.

    Built from a constant or from sorted (frequency_hz, value) breakpoints;
    outside the breakpoint range the boundary value is held.
    """

    points: tuple[tuple[float, float], ...]

    @classmethod
    def constant(cls, value: float) -> "FreqProfile":
        return cls(((0.0, float(value)),))

    @classmethod
    def from_pairs(cls, pairs) -> "FreqProfile":
        pts = tuple(sorted((float(f), float(v)) for f, v in pairs))
        if not pts:
            raise ValueError("profile needs at least one point")
        freqs = [p[0] for p in pts]
        if len(set(freqs)) != len(freqs):
            raise ValueError("duplicate profile frequencies")
        return cls(pts)

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        if len(self.points) == 1:
            return np.full_like(f, self.points[0][1])
        xs = np.array([p[0] for p in self.points])
        ys = np.array([p[1] for p in self.points])
        return np.interp(f, xs, ys)

    @property
    def is_constant(self) -> bool:
        return len(self.points) == 1


def _as_profile(value) -> FreqProfile:
    if isinstance(value, FreqProfile):
        return value
    return FreqProfile.constant(float(value))


ZERO_PROFILE = FreqProfile.constant(0.0)


@dataclass(frozen=True)
class Span:
    """One fiber span plus its trailing lumped elements.

    length: span length in m.
    gamma: nonlinearity coefficient in 1/W/m.
    alpha0, alpha1: field attenuation profiles in Np/m.
    sigma: decay rate of the alpha1 term in 1/m.
    beta2, beta3: dispersion coefficients in s^2/m and s^3/m.
    fc: dispersion reference frequency in Hz.
    beta_dcu: lumped dispersion in s^2 (quadratic-phase element).
    gain: amplifier power gain profile (linear), or None for a gain that
        exactly undoes the span loss at every frequency.
    phase: amplifier phase profile in rad.
    """

    length: float
    gamma: float
    alpha0: FreqProfile
    alpha1: FreqProfile = ZERO_PROFILE
    sigma: FreqProfile = ZERO_PROFILE
    beta2: float = 0.0
    beta3: float = 0.0
    fc: float = 0.0
    beta_dcu: float = 0.0
    gain: FreqProfile | None = None
    phase: FreqProfile = ZERO_PROFILE

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("span length must be positive")
        object.__setattr__(self, "alpha0", _as_profile(self.alpha0))
        object.__setattr__(self, "alpha1", _as_profile(self.alpha1))
        object.__setattr__(self, "sigma", _as_profile(self.sigma))
        object.__setattr__(self, "phase", _as_profile(self.phase))
        if self.gain is not None:
            object.__setattr__(self, "gain", _as_profile(self.gain))

    def beta(self, f):
        """Propagation constant relative to fc, quadratic plus cubic term."""
        u = np.asarray(f, dtype=float) - self.fc
        return TWO_PI ** 2 * self.beta2 * u ** 2 / 2.0 \
            + TWO_PI ** 3 * self.beta3 * u ** 3 / 6.0

    def beta_dcu_phase(self, f):
        """Phase of the lumped dispersion element."""
        u = np.asarray(f, dtype=float) - self.fc
        return 2.0 * np.pi ** 2 * self.beta_dcu * u ** 2

    def loss_exponent(self, f, z=None):
        """Integral of alpha(z', f) from 0 to z (field Nepers).

        Defaults to the full span length. Uses the sigma -> 0 limit where
        the decay rate vanishes.
        """
        if z is None:
            z = self.length
        a0 = self.alpha0(f)
        a1 = self.alpha1(f)
        s = self.sigma(f)
        z = np.asarray(z, dtype=float)
        small = np.abs(s * z) < 1e-12
        safe_s = np.where(small, 1.0, s)
        tail = np.where(small, a1 * z, a1 / safe_s * (1.0 - np.exp(-safe_s * z)))
        return a0 * z + tail

    def power_gain(self, f):
        """Amplifier power gain (linear) at frequency f."""
        if self.gain is None:
            return np.exp(2.0 * self.loss_exponent(f))
        return self.gain(f)

    def amp_phase(self, f):
        return self.phase(f)


@dataclass(frozen=True)
class Link:
    """An ordered sequence of spans."""

    spans: tuple[Span, ...]

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple(self.spans))
        if not self.spans:
            raise ValueError("link needs at least one span")

    def __len__(self) -> int:
        return len(self.spans)

    def __iter__(self):
        return iter(self.spans)

    def __getitem__(self, i) -> Span:
        return self.spans[i]
