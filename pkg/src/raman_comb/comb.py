"""Normalized optical combs: phase modulation, doubling, filtering, MZ paths.

A comb is a finite, symmetric list of complex line amplitudes c_n for
n = -N..N, with lines spaced by ``spacing`` (rad/s). Amplitudes are
dimensionless and normalized so that an unmodulated carrier has c_0 = 1.
"""
import csv
import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import kernels

MAX_ORDER = 64
DEFAULT_TOLERANCE = 1e-14
SPEED_OF_LIGHT = 299_792_458.0
HYPERFINE_SPLITTING = 2 * math.pi * 14.53e9
RAMAN_DETUNING = 2 * math.pi * 14e12
WAVELENGTH = 458e-9

# extra orders tabulated past MAX_ORDER so the tail sum at the cap is meaningful
_TAIL_GUARD = 24


@dataclass(frozen=True, eq=False)
class CombSpectrum:
    """Complex line amplitudes for orders -N..N.

    `truncated` is set when the order cap was reached before the requested
    power tolerance.
    """

    amplitudes: np.ndarray
    spacing: float = HYPERFINE_SPLITTING / 2
    truncated: bool = False

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size % 2 != 1:
            raise ValueError(f"comb needs an odd number of lines, got {amps.size}")
        if amps.size < 3:
            raise ValueError("comb needs N >= 1 (at least three lines)")
        if not np.all(np.isfinite(amps)):
            raise ValueError("comb amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def order(self):
        """Half-width N of the index range."""
        return (self.amplitudes.size - 1) // 2

    @property
    def center_order_offset(self):
        """Array index of the n = 0 line."""
        return self.order

    @property
    def orders(self):
        return np.arange(-self.order, self.order + 1)

    def line(self, n):
        """Amplitude of order `n` (zero outside the stored range)."""
        if abs(n) > self.order:
            return 0j
        return complex(self.amplitudes[n + self.order])

    def padded(self, order):
        """Same comb zero-padded to half-width `order` (>= current)."""
        if order < self.order:
            raise ValueError("cannot pad to a smaller order")
        extra = order - self.order
        return CombSpectrum(np.pad(self.amplitudes, extra), self.spacing, self.truncated)

    def powers(self):
        return np.abs(self.amplitudes) ** 2

    def to_rows(self):
        return [
            (int(n), float(a.real), float(a.imag), float(abs(a) ** 2))
            for n, a in zip(self.orders, self.amplitudes)
        ]

    def to_csv(self, precision=12):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "re", "im", "power"])
        for n, re, im, pw in self.to_rows():
            writer.writerow([n, fmt(re, precision), fmt(im, precision), fmt(pw, precision)])
        return buf.getvalue()

    def to_dict(self, precision=12):
        return {
            "spacing_rad_s": round_sig(self.spacing, precision),
            "lines": [
                {"n": n, "re": round_sig(re, precision), "im": round_sig(im, precision)}
                for n, re, im, _ in self.to_rows()
            ],
        }

    def to_json(self, precision=12):
        return json.dumps(self.to_dict(precision), indent=2)

    @classmethod
    def from_dict(cls, doc):
        lines = doc["lines"]
        order = max(abs(int(line["n"])) for line in lines)
        amps = np.zeros(2 * max(order, 1) + 1, dtype=complex)
        half = (amps.size - 1) // 2
        for line in lines:
            amps[int(line["n"]) + half] = complex(line["re"], line.get("im", 0.0))
        return cls(amps, float(doc.get("spacing_rad_s", HYPERFINE_SPLITTING / 2)))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def fmt(value, precision=12):
    """Fixed significant-digit text for a float; JSON and CSV share it."""
    text = f"{value:.{precision}g}"
    return "0" if text in ("0", "-0") else text


def round_sig(value, precision=12):
    return float(fmt(value, precision))


@dataclass(frozen=True)
class PhysicalContext:
    """Laboratory constants; Ω₀ (``base_rabi``) only rescales results."""

    hyperfine_splitting: float = HYPERFINE_SPLITTING
    raman_detuning: float = RAMAN_DETUNING
    speed_of_light: float = SPEED_OF_LIGHT
    base_rabi: float = 1.0

    def __post_init__(self):
        for name in ("hyperfine_splitting", "raman_detuning", "speed_of_light", "base_rabi"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def dk(self):
        """Wavevector step between adjacent comb lines, ω_HF / 2c (rad/m)."""
        return self.hyperfine_splitting / (2 * self.speed_of_light)


@dataclass(frozen=True)
class MzGeometry:
    path_difference: float
    k: float = 2 * math.pi / WAVELENGTH
    relative_shift: float = 0.0
    beam_position: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.path_difference):
            raise ValueError("path_difference must be finite")
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValueError("k must be positive")
        if not (math.isfinite(self.relative_shift) and self.relative_shift >= 0):
            raise ValueError("relative_shift must be >= 0")
        if not math.isfinite(self.beam_position):
            raise ValueError("beam_position must be finite")

    def slow_phase(self, ctx):
        """δk·Δx, the per-line phase step across the comb."""
        return ctx.dk * self.path_difference

    def fast_phase(self):
        """2k·Δx reduced mod 2π (carrier phase of the doubled field)."""
        return math.fmod(2 * self.k * self.path_difference, 2 * math.pi)

    def carrier_phase(self):
        """k·Δx reduced mod 2π."""
        return math.fmod(self.k * self.path_difference, 2 * math.pi)

    def position_phase(self, ctx):
        return ctx.dk * self.beam_position


def _check_phi(phi):
    if not (math.isfinite(phi) and phi >= 0):
        raise ValueError(f"modulation index must be finite and >= 0, got {phi!r}")


@lru_cache(maxsize=4096)
def bessel_comb(phi, tolerance=DEFAULT_TOLERANCE, extra_orders=0):
    """(J_0..J_N at `phi`, N, cap_hit) with N chosen from the power tail.

    `extra_orders` widens N past the tolerance-selected value (convergence
    checks); the result may then exceed the cap.
    """
    _check_phi(phi)
    if not 0 < tolerance < 1:
        raise ValueError("tolerance must lie in (0, 1)")
    table = kernels.bessel_table(np.array([phi]), MAX_ORDER + _TAIL_GUARD)[0]
    # tail[k] = sum_{|n| > k} J_n^2
    sq = table**2
    tail = 2 * (np.cumsum(sq[::-1])[::-1] - sq)
    below = np.nonzero(tail[1 : MAX_ORDER + 1] < tolerance)[0]
    if below.size:
        order, cap_hit = int(below[0]) + 1, False
    else:
        order, cap_hit = MAX_ORDER, True
    if extra_orders:
        order += int(extra_orders)
        table = kernels.bessel_table(np.array([phi]), order)[0]
    jpos = table[: order + 1].copy()
    jpos.setflags(write=False)
    return jpos, order, cap_hit


def signed_orders(jpos):
    """Expand J_0..J_N to J_{-N}..J_N."""
    n = np.arange(1, jpos.size)
    neg = jpos[1:][::-1] * np.where(n[::-1] % 2, -1.0, 1.0)
    return np.concatenate([neg, jpos])


def phase_modulated_comb(phi, tolerance=DEFAULT_TOLERANCE, spacing=HYPERFINE_SPLITTING / 2):
    """Comb c_n = J_n(phi) left by a sinusoidal phase modulator.

    The half-width N is the smallest order whose discarded power
    sum_{|n|>N} J_n(phi)^2 falls below `tolerance`, capped at 64.
    """
    jpos, _, cap_hit = bessel_comb(float(phi), tolerance)
    return CombSpectrum(signed_orders(jpos), spacing, cap_hit)


def self_convolve(comb):
    """Doubled comb d_n = sum_m c_m c_{n-m}, orders -2N..2N."""
    amps = np.convolve(comb.amplitudes, comb.amplitudes)
    return CombSpectrum(amps, comb.spacing, comb.truncated)


def apply_cavity_filter(comb, delta):
    """Scale line n by 1 / (1 - 2i n delta).

    `delta` is the detuning of the first sideband from a cavity resonance in
    cavity linewidths; meaningful only for the comb before doubling.
    """
    delta = float(delta)
    if not (math.isfinite(delta) and abs(delta) < 1):
        raise ValueError(f"cavity detuning must satisfy |delta| < 1, got {delta!r}")
    n = comb.orders
    return CombSpectrum(comb.amplitudes / (1 - 2j * n * delta), comb.spacing, comb.truncated)


def _parity(parity):
    if parity in ("even", 0):
        return 0
    if parity in ("odd", 1):
        return 1
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def select_sidebands(comb, parity):
    """Zero every line whose order does not have the given parity."""
    p = _parity(parity)
    keep = (comb.orders % 2) == p
    return CombSpectrum(np.where(keep, comb.amplitudes, 0), comb.spacing, comb.truncated)


def reindex_even_lines(comb):
    """Comb of the even-order lines only, renumbered n -> n/2.

    Used for the doubled output of a parity-selected comb, whose support is
    on even orders only; the returned spacing is twice the input spacing.
    """
    odd = comb.amplitudes[(comb.orders % 2) == 1]
    if np.any(odd != 0):
        raise ValueError("comb has non-zero odd-order lines")
    half = comb.order // 2
    even = comb.amplitudes[comb.order - 2 * half :: 2]
    if half < 1:
        even = np.pad(even, 1)
    return CombSpectrum(even, 2 * comb.spacing, comb.truncated)


def total_power(comb):
    """Σ_n |c_n|²."""
    return math.fsum((np.abs(comb.amplitudes) ** 2).tolist())


class MzArms(NamedTuple):
    """The two arms of a frequency-shifted Mach-Zehnder, kept separate.

    Lines of different arms sit at frequencies offset by the shift, so only
    the shifted arm's line n and the direct arm's line n+2 form a resonant
    Raman pair.
    """

    direct: CombSpectrum
    shifted: CombSpectrum


def mz_combine(comb, slow_phase, fast_phase=0.0, position_phase=0.0):
    """Equal-amplitude sum of the direct path and a path delayed by Δx.

    Line n of the delayed path picks up exp(i(fast_phase + n slow_phase)),
    with fast_phase = 2kΔx and slow_phase = δkΔx; every line also carries
    the spatial factor exp(i n position_phase).
    """
    n = comb.orders
    delayed = np.exp(1j * (fast_phase + n * slow_phase))
    amps = 0.5 * comb.amplitudes * (1 + delayed) * np.exp(1j * n * position_phase)
    return CombSpectrum(amps, comb.spacing, comb.truncated)


def mz_shifted_arms(comb, slow_phase, carrier_phase=0.0):
    """Arms of the shifted interferometer, each at half amplitude.

    The shifted arm carries exp(-i carrier_phase) exp(i n slow_phase), with
    carrier_phase = kΔx.
    """
    n = comb.orders
    direct = CombSpectrum(0.5 * comb.amplitudes, comb.spacing, comb.truncated)
    phases = np.exp(-1j * carrier_phase) * np.exp(1j * n * slow_phase)
    shifted = CombSpectrum(0.5 * comb.amplitudes * phases, comb.spacing, comb.truncated)
    return MzArms(direct, shifted)


def superpose_mz(comb, geom, ctx=PhysicalContext()):
    """Pass a doubled comb through the Mach-Zehnder described by `geom`.

    A static interferometer (relative_shift == 0) returns the recombined
    comb. With a frequency shift the two arms cannot be summed line by line,
    so an :class:`MzArms` pair is returned instead.
    """
    if geom.relative_shift == 0:
        return mz_combine(comb, geom.slow_phase(ctx), geom.fast_phase(), geom.position_phase(ctx))
    return mz_shifted_arms(comb, geom.slow_phase(ctx), geom.carrier_phase())


def spatial_period(ctx=PhysicalContext()):
    """Path difference 2π/δk over which the slow MZ phases repeat (m)."""
    return 2 * math.pi / ctx.dk
