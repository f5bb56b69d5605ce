"""WDM transmit spectrum: a comb of rectangular power spectral densities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Channel:
    """One rectangular channel.

    center: center frequency in Hz.
    width: full bandwidth in Hz (strictly positive).
    psd: flat two-sided power spectral density in W/Hz.
    """

    center: float
    width: float
    psd: float

    def __post_init__(self):
        if self.width <= 0.0:
            raise ValueError("channel width must be positive")
        if self.psd < 0.0:
            raise ValueError("channel PSD must be nonnegative")

    @property
    def f_start(self) -> float:
        return self.center - self.width / 2.0

    @property
    def f_end(self) -> float:
        return self.center + self.width / 2.0

    @property
    def power(self) -> float:
        """Total channel power in W."""
        return self.psd * self.width


@dataclass(frozen=True)
class Spectrum:
    """An ordered collection of non-overlapping channels."""

    channels: tuple[Channel, ...] = field(default_factory=tuple)

    def __post_init__(self):
        chans = tuple(sorted(self.channels, key=lambda c: c.center))
        object.__setattr__(self, "channels", chans)
        for lo, hi in zip(chans, chans[1:]):
            if hi.f_start < lo.f_end - 1e-6:
                raise ValueError(
                    f"channels at {lo.center} and {hi.center} Hz overlap"
                )

    def __len__(self) -> int:
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)

    def psd_at(self, f):
        """Aggregate PSD of the comb at frequency f (vectorized)."""
        f = np.asarray(f, dtype=float)
        out = np.zeros_like(f)
        for ch in self.channels:
            inside = (f >= ch.f_start) & (f <= ch.f_end)
            out = np.where(inside, ch.psd, out)
        return out

    def center_channel_index(self) -> int:
        """Index of the channel closest to the comb's mean center."""
        centers = np.array([c.center for c in self.channels])
        return int(np.argmin(np.abs(centers - centers.mean())))


def uniform_comb(n_channels: int, center: float, spacing: float,
                 width: float, psd: float) -> Spectrum:
    """Evenly spaced identical channels centered on ``center``."""
    if n_channels < 1:
        raise ValueError("need at least one channel")
    offset = (n_channels - 1) / 2.0
    chans = tuple(
        Channel(center + (i - offset) * spacing, width, psd)
        for i in range(n_channels)
    )
    return Spectrum(chans)
