"""Twisted Fourier coefficients on a circle of circumference L.

A coefficient is a finite trigonometric sum

    c(s) = sum_f  a_f * exp(i * (2*pi*f + theta) * s / L),

stored as a dense complex array over a contiguous integer frequency window
together with the twist angle ``theta``.  Such functions satisfy the exact
quasi-periodicity c(s + L) = exp(i*theta) * c(s); theta = 0 is the plain
periodic case.  The twist angle is canonicalized to [0, 2*pi) — integer
multiples of 2*pi are absorbed into the frequency index — so products,
derivatives, primitives and circle means are all exact mode-by-mode
operations.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, Iterable, Mapping

import numpy as np

from ._kernel_select import convolve_complex

TWO_PI = 2.0 * math.pi

#: amplitudes with modulus below this floor are dropped deterministically
AMP_FLOOR = 1e-14

#: tolerance for deciding that two twist angles agree / that a twist is zero
TWIST_ATOL = 1e-9


def _canonical_twist(theta: float) -> tuple[int, float]:
    """Split theta into (integer winding, angle in [0, 2*pi))."""
    wind = math.floor(theta / TWO_PI)
    angle = theta - TWO_PI * wind
    if angle >= TWO_PI - TWIST_ATOL:  # snap values that round up to 2*pi
        wind += 1
        angle -= TWO_PI
    if abs(angle) < TWIST_ATOL:
        angle = 0.0
    return wind, angle


class PeriodicCoefficient:
    """Immutable twisted trigonometric polynomial on [0, L]."""

    __slots__ = ("offset", "amps", "period", "twist_angle")

    def __init__(self, offset: int, amps: np.ndarray, period: float, twist_angle: float = 0.0):
        if period <= 0:
            raise ValueError("period must be positive")
        wind, angle = _canonical_twist(float(twist_angle))
        amps = np.asarray(amps, dtype=complex)
        # deterministic floor + trim to the support window
        keep = np.abs(amps) > AMP_FLOOR
        if keep.any():
            lo = int(np.argmax(keep))
            hi = len(keep) - int(np.argmax(keep[::-1]))
            amps = amps[lo:hi].copy()
            offset = int(offset) + lo + wind
        else:
            amps = np.zeros(0, dtype=complex)
            offset = 0
        self.offset = int(offset)
        self.amps = amps
        self.amps.setflags(write=False)
        self.period = float(period)
        self.twist_angle = angle

    # ------------------------------------------------------------------ #
    # constructors

    @classmethod
    def zero(cls, period: float, twist_angle: float = 0.0) -> "PeriodicCoefficient":
        return cls(0, np.zeros(0), period, twist_angle)

    @classmethod
    def constant(cls, value: complex, period: float) -> "PeriodicCoefficient":
        return cls(0, np.array([value], dtype=complex), period, 0.0)

    @classmethod
    def from_dict(cls, modes: Mapping[int, complex], period: float,
                  twist_angle: float = 0.0) -> "PeriodicCoefficient":
        if not modes:
            return cls.zero(period, twist_angle)
        lo = min(modes)
        hi = max(modes)
        amps = np.zeros(hi - lo + 1, dtype=complex)
        for f, a in modes.items():
            amps[f - lo] = a
        return cls(lo, amps, period, twist_angle)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], period: float,
                      bandwidth: int, twist_angle: float = 0.0) -> "PeriodicCoefficient":
        """Project samples of fn (which must carry the stated twist) onto the band."""
        n = max(4 * bandwidth, 32)
        s = np.arange(n) * (period / n)
        vals = np.asarray(fn(s), dtype=complex)
        vals = vals * np.exp(-1j * twist_angle * s / period)  # remove twist factor
        spec = np.fft.fft(vals) / n
        modes: Dict[int, complex] = {}
        for f in range(-bandwidth, bandwidth + 1):
            modes[f] = spec[f % n]
        return cls.from_dict(modes, period, twist_angle)

    # ------------------------------------------------------------------ #
    # views

    @property
    def fourier(self) -> Dict[int, complex]:
        """Mapping frequency -> amplitude (spec-facing view)."""
        return {self.offset + k: a for k, a in enumerate(self.amps) if abs(a) > 0.0}

    @property
    def twist(self) -> complex:
        """Quasi-periodicity factor rho with c(s+L) = rho * c(s)."""
        return complex(np.exp(1j * self.twist_angle))

    @property
    def is_zero(self) -> bool:
        return self.amps.size == 0

    def frequencies(self) -> np.ndarray:
        return self.offset + np.arange(self.amps.size)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.amps))) if self.amps.size else 0.0

    def bandwidth(self) -> int:
        if self.is_zero:
            return 0
        return int(max(abs(self.offset), abs(self.offset + self.amps.size - 1)))

    # ------------------------------------------------------------------ #
    # evaluation

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.is_zero:
            return np.zeros(s.shape, dtype=complex)
        phases = (TWO_PI * self.frequencies()[:, None] + self.twist_angle) / self.period
        return np.tensordot(self.amps, np.exp(1j * phases * s[None, :]), axes=(0, 0)) \
            if s.ndim else complex(np.sum(self.amps * np.exp(1j * phases[:, 0] * s)))

    # ------------------------------------------------------------------ #
    # algebra

    def _check_compatible(self, other: "PeriodicCoefficient") -> None:
        if abs(self.period - other.period) > 1e-12 * self.period:
            raise ValueError("period mismatch")
        if not (self.is_zero or other.is_zero):
            if abs(self.twist_angle - other.twist_angle) > TWIST_ATOL:
                raise ValueError(
                    f"twist mismatch: {self.twist_angle} vs {other.twist_angle}")

    def __add__(self, other: "PeriodicCoefficient") -> "PeriodicCoefficient":
        self._check_compatible(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.offset, other.offset)
        hi = max(self.offset + self.amps.size, other.offset + other.amps.size)
        amps = np.zeros(hi - lo, dtype=complex)
        amps[self.offset - lo:self.offset - lo + self.amps.size] += self.amps
        amps[other.offset - lo:other.offset - lo + other.amps.size] += other.amps
        return PeriodicCoefficient(lo, amps, self.period, self.twist_angle)

    def __neg__(self) -> "PeriodicCoefficient":
        return PeriodicCoefficient(self.offset, -self.amps, self.period, self.twist_angle)

    def __sub__(self, other: "PeriodicCoefficient") -> "PeriodicCoefficient":
        return self + (-other)

    def scale(self, c: complex) -> "PeriodicCoefficient":
        return PeriodicCoefficient(self.offset, self.amps * c, self.period, self.twist_angle)

    def __mul__(self, other):
        if isinstance(other, PeriodicCoefficient):
            if abs(self.period - other.period) > 1e-12 * self.period:
                raise ValueError("period mismatch")
            if self.is_zero or other.is_zero:
                return PeriodicCoefficient.zero(
                    self.period, self.twist_angle + other.twist_angle)
            amps = convolve_complex(self.amps, other.amps)
            return PeriodicCoefficient(self.offset + other.offset, amps, self.period,
                                       self.twist_angle + other.twist_angle)
        return self.scale(other)

    __rmul__ = __mul__

    def conjugate(self) -> "PeriodicCoefficient":
        return PeriodicCoefficient(-(self.offset + self.amps.size - 1) if self.amps.size else 0,
                                   np.conj(self.amps[::-1]), self.period, -self.twist_angle)

    # ------------------------------------------------------------------ #
    # calculus

    def _mode_rates(self) -> np.ndarray:
        """i * (2*pi*f + theta) / L per retained mode."""
        return 1j * (TWO_PI * self.frequencies() + self.twist_angle) / self.period

    def derivative(self) -> "PeriodicCoefficient":
        if self.is_zero:
            return self
        return PeriodicCoefficient(self.offset, self.amps * self._mode_rates(),
                                   self.period, self.twist_angle)

    def mean(self) -> complex:
        """(1/L) * integral over one period [0, L]."""
        if self.is_zero:
            return 0.0 + 0.0j
        if self.twist_angle == 0.0:
            k0 = -self.offset
            return complex(self.amps[k0]) if 0 <= k0 < self.amps.size else 0.0 + 0.0j
        rates = self._mode_rates() * self.period  # i*(2*pi*f + theta)
        return complex(np.sum(self.amps * (np.exp(1j * self.twist_angle) - 1.0) / rates))

    def antiderivative_twisted(self, resonance_tol: float) -> "PeriodicCoefficient":
        """The unique twisted solution q of q' = c.

        For twisted c (theta != 0) the solution exists and is unique provided no
        mode rate 2*pi*f + theta vanishes; for untwisted c the mean must vanish
        and the free constant (zero mode of q) is set to 0.
        """
        if self.is_zero:
            return self
        if self.twist_angle == 0.0:
            amps = np.array(self.amps)
            k0 = -self.offset
            if 0 <= k0 < amps.size:
                if abs(amps[k0]) > 1e-10 * max(1.0, self.max_abs()):
                    raise ValueError("untwisted coefficient has nonzero mean; not integrable")
                amps[k0] = 0.0
            rates = self._mode_rates()
            out = np.zeros_like(amps)
            nz = np.abs(rates) > 0
            out[nz] = amps[nz] / rates[nz]
            return PeriodicCoefficient(self.offset, out, self.period, 0.0)
        divisor = np.abs(1.0 - np.exp(1j * self.twist_angle))
        if divisor <= resonance_tol:
            raise ResonanceError(self.twist_angle, divisor)
        return PeriodicCoefficient(self.offset, self.amps / self._mode_rates(),
                                   self.period, self.twist_angle)

    # ------------------------------------------------------------------ #
    # predicates

    def is_real_function(self, tol: float = 1e-10) -> bool:
        if self.is_zero:
            return True
        if self.twist_angle != 0.0:
            return False
        diff = self - self.conjugate()
        return diff.max_abs() <= tol * max(1.0, self.max_abs())

    def quasi_periodicity_defect(self, samples: int = 7) -> float:
        """max |c(s+L) - rho*c(s)| over a few sample points (diagnostic)."""
        s = np.linspace(0.0, self.period, samples)
        return float(np.max(np.abs(self(s + self.period) - self.twist * self(s))))

    def __repr__(self) -> str:
        return (f"PeriodicCoefficient(modes={len(self.amps)}, twist={self.twist_angle:.6g}, "
                f"L={self.period:.6g})")


class ResonanceError(ValueError):
    """Raised when a homological divisor |1 - exp(i*theta)| falls below tolerance."""

    def __init__(self, twist_angle: float, divisor: float, detail: str = ""):
        self.twist_angle = twist_angle
        self.divisor = divisor
        self.detail = detail
        super().__init__(
            f"resonant twist angle {twist_angle:.12g} (divisor {divisor:.3e}){detail}")


def real_band_limited(rng: np.random.Generator, period: float, base: float,
                      amplitude: float, max_freq: int) -> PeriodicCoefficient:
    """Random real trigonometric polynomial base + sum of low modes (test germs)."""
    modes: Dict[int, complex] = {0: complex(base)}
    for f in range(1, max_freq + 1):
        a = amplitude * (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2)
        modes[f] = a
        modes[-f] = np.conj(a)
    return PeriodicCoefficient.from_dict(modes, period)
