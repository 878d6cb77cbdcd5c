"""Periodic heat equation ``Y_z = Y_ss / 2`` on the unit circle.

Evolution is exact in ``z``: the field is moved to Fourier space, mode ``k``
is damped by ``exp(-2 pi^2 k^2 dz)`` and transformed back. The Green function
is the Gaussian summed over its integer images.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dde import fmt
from .errors import DegenerateTime, InvalidInput, NegativeTime

DELTA_DZ0 = 1e-4


def mode_decay_rate(k: int) -> float:
    """Decay rate ``kappa = -Lambda^2 / 2`` of mode ``exp(2 pi i k s)``."""
    return -2.0 * math.pi ** 2 * k * k


@dataclass(frozen=True)
class FourierMode:
    k: int
    amplitude: complex

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi * self.k

    @property
    def decay_rate(self) -> float:
        return mode_decay_rate(self.k)


@dataclass(frozen=True, eq=False)
class PeriodicField:
    """Samples of ``Y(s, z)`` at ``s_j = j / N``, ``j = 0 .. N-1``."""

    samples: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        a = np.array(self.samples, dtype=float)
        n = a.size
        if a.ndim != 1 or n < 32 or n & (n - 1):
            raise InvalidInput(f"field size must be a power of two >= 32, got {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    @property
    def N(self) -> int:
        return self.samples.size

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    @classmethod
    def from_function(cls, func, N: int = 512, z: float = 0.0) -> "PeriodicField":
        s = np.arange(N) / N
        return cls(np.asarray(func(s), dtype=float) * np.ones(N), z)

    @classmethod
    def delta(cls, s0: float = 0.0, N: int = 512, dz0: float = DELTA_DZ0) -> "PeriodicField":
        """A unit point mass at ``s0``, smoothed to the kernel at ``dz0``.

        The field's ``z`` is set to ``dz0`` so that ``z`` measures the time
        elapsed since the idealised delta.
        """
        s = np.arange(N) / N
        return cls(wrapped_heat_kernel(s, s0, dz0), dz0)

    def mean(self) -> float:
        return float(self.samples.mean())

    def modes(self) -> list[FourierMode]:
        coeffs = np.fft.fft(self.samples) / self.N
        ks = np.fft.fftfreq(self.N, d=1.0 / self.N).astype(int)
        return [FourierMode(int(k), complex(c)) for k, c in zip(ks, coeffs)]


def evolve(field: PeriodicField, dz: float) -> PeriodicField:
    """Advance ``field`` by ``dz`` under ``Y_z = Y_ss / 2``.

    Raises :class:`NegativeTime` for ``dz < 0``; backward diffusion is refused.
    """
    if not dz >= 0:
        raise NegativeTime(f"dz must be >= 0, got {dz}")
    N = field.N
    c = np.fft.rfft(field.samples)
    k = np.arange(c.size)
    c *= np.exp(-2.0 * math.pi ** 2 * k * k * dz)
    return PeriodicField(np.fft.irfft(c, n=N), field.z + dz)


def wrapped_heat_kernel(s, s0: float, dz: float):
    """Periodic Green function

        sum_m exp(-(s - s0 + m)^2 / (2 dz)) / sqrt(2 pi dz)

    with ``|m| <= ceil(1 + 8 sqrt(dz))``, which keeps the omitted tail below
    1e-14 relative. ``s`` may be an array.
    """
    if dz == 0:
        raise DegenerateTime("dz = 0 is the delta limit; handle it at the call site")
    if dz < 0:
        raise NegativeTime(f"dz must be positive, got {dz}")
    M = math.ceil(1.0 + 8.0 * math.sqrt(dz))
    d = np.asarray(s, dtype=float) - s0
    d = d - np.floor(d + 0.5)
    m = np.arange(-M, M + 1)
    x = d[..., None] + m
    out = np.exp(-x * x / (2.0 * dz)).sum(axis=-1) / math.sqrt(2.0 * math.pi * dz)
    return float(out) if np.ndim(s) == 0 else out


def circular_convolve(field: PeriodicField, dz: float) -> np.ndarray:
    """Direct-sum convolution of ``field`` with the kernel; O(N^2) reference."""
    s = field.s
    K = wrapped_heat_kernel(s[:, None] - s[None, :], 0.0, dz)
    return K @ field.samples / field.N


def write_field_csv(field: PeriodicField, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "Y"])
        for s, v in zip(field.s, field.samples):
            w.writerow([fmt(s), fmt(v)])
    return path
