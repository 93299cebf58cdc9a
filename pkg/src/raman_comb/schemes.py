"""Normalized Raman Rabi frequency Ω/Ω₀ for each sideband-shaping scheme.

Every scheme has two independent evaluators:

* a closed form (``rabi``) that sums the Bessel series directly, and
* a comb pipeline (``pipeline_rabi``) that builds the comb, doubles it by
  self-convolution, shapes it and pairs lines separated by ω_HF.

The closed forms carry these prefactors relative to the plain pairing sum
``rabi_from_comb``:

==========  ==============================================  ======
scheme      pipeline                                        factor
==========  ==============================================  ======
mz-static   pairing of the recombined comb, separation -2   2
mz-shifted  shifted arm paired with direct arm, sep. +2     2
cavity      pairing of filtered+doubled comb, sep. +2       2
even/odd    pairing of the reindexed doubled comb, sep. 1   1
==========  ==============================================  ======

The mz-shifted closed form includes a factor 1/2 relative to the bare
series so that the frequency-shifted interferometer reaches 0.244, half of
the static one; see the README for the normalization discussion.
"""
import json
import math
import warnings
from dataclasses import asdict, dataclass
from functools import singledispatch

import numpy as np

from . import kernels
from .comb import (
    DEFAULT_TOLERANCE,
    PhysicalContext,
    apply_cavity_filter,
    bessel_comb,
    mz_combine,
    mz_shifted_arms,
    phase_modulated_comb,
    reindex_even_lines,
    round_sig,
    select_sidebands,
    self_convolve,
    signed_orders,
    spatial_period,
)

__all__ = [
    "MzStatic",
    "MzShifted",
    "CavityDetuned",
    "EvenSelect",
    "OddSelect",
    "RabiResult",
    "rabi",
    "pipeline_rabi",
    "rabi_from_comb",
    "mz_static_rabi",
    "mz_shifted_rabi",
    "cavity_detuned_rabi",
    "even_sideband_rabi",
    "odd_sideband_rabi",
    "spatial_period",
    "SCHEMES",
]


def _finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


def _check_phi(phi):
    if not (math.isfinite(phi) and phi >= 0):
        raise ValueError(f"phi must be finite and >= 0, got {phi!r}")


@dataclass(frozen=True)
class MzStatic:
    """Static Mach-Zehnder after the doubler.

    Phases are dimensionless: ``slow_phase`` = δk·Δx, ``fast_phase`` =
    2k·Δx (mod 2π), ``position_phase`` = δk·x.
    """

    phi: float
    slow_phase: float
    fast_phase: float = 0.0
    position_phase: float = 0.0
    scheme = "mz-static"

    def __post_init__(self):
        _check_phi(self.phi)
        for name in ("slow_phase", "fast_phase", "position_phase"):
            _finite(name, getattr(self, name))

    @classmethod
    def from_geometry(cls, phi, geom, ctx=PhysicalContext()):
        return cls(phi, geom.slow_phase(ctx), geom.fast_phase(), geom.position_phase(ctx))


@dataclass(frozen=True)
class MzShifted:
    """Mach-Zehnder with a relative frequency shift between the arms.

    ``carrier_phase`` = k·Δx enters as a global phase only.
    """

    phi: float
    slow_phase: float
    carrier_phase: float = 0.0
    scheme = "mz-shifted"

    def __post_init__(self):
        _check_phi(self.phi)
        _finite("slow_phase", self.slow_phase)
        _finite("carrier_phase", self.carrier_phase)

    @classmethod
    def from_geometry(cls, phi, geom, ctx=PhysicalContext()):
        return cls(phi, geom.slow_phase(ctx), geom.carrier_phase())


@dataclass(frozen=True)
class CavityDetuned:
    phi: float
    delta: float
    scheme = "cavity"

    def __post_init__(self):
        _check_phi(self.phi)
        if not (math.isfinite(self.delta) and abs(self.delta) < 1):
            raise ValueError(f"delta must satisfy |delta| < 1, got {self.delta!r}")


@dataclass(frozen=True)
class EvenSelect:
    phi: float
    scheme = "even"

    def __post_init__(self):
        _check_phi(self.phi)


@dataclass(frozen=True)
class OddSelect:
    phi: float
    scheme = "odd"

    def __post_init__(self):
        _check_phi(self.phi)


SCHEMES = {
    cls.scheme: cls for cls in (MzStatic, MzShifted, CavityDetuned, EvenSelect, OddSelect)
}


@dataclass(frozen=True)
class RabiResult:
    omega_over_omega0: complex
    truncation_order: int
    scheme: object
    warnings: tuple = ()

    @property
    def abs(self):
        return abs(self.omega_over_omega0)

    def to_dict(self, precision=12):
        value = self.omega_over_omega0
        return {
            "scheme": self.scheme.scheme,
            "params": {k: round_sig(v, precision) for k, v in asdict(self.scheme).items()},
            "re": round_sig(value.real, precision),
            "im": round_sig(value.imag, precision),
            "abs": round_sig(abs(value), precision),
            "truncation_order": self.truncation_order,
            "warnings": list(self.warnings),
        }

    def to_json(self, precision=12):
        return json.dumps(self.to_dict(precision), indent=2)


def rabi_from_comb(comb, pair_separation=2, partner=None):
    """Pairing sum  Σ_n d_n conj(p_{n+s})  over lines s orders apart.

    `partner` defaults to the comb itself. A separation of -s gives the
    complex conjugate of +s for a self-pairing.
    """
    s = int(pair_separation)
    if s == 0:
        raise ValueError("pair_separation must be non-zero")
    other = comb if partner is None else partner
    if other.order != comb.order:
        order = max(comb.order, other.order)
        comb, other = comb.padded(order), other.padded(order)
    d, p = comb.amplitudes, other.amplitudes
    if abs(s) >= d.size:
        warnings.warn(
            f"pair separation {s} exceeds comb span of {d.size} lines", RuntimeWarning, stacklevel=2
        )
        return 0j
    if s > 0:
        return complex(np.sum(d[:-s] * np.conj(p[s:])))
    return complex(np.sum(d[-s:] * np.conj(p[:s])))


def doubling_tolerance(tolerance):
    """Power tolerance for a comb that is about to be doubled.

    Doubling, and any pairing of lines, is bilinear in the amplitudes, so
    the discarded amplitude (about sqrt(tolerance)) enters the result
    linearly and spoils cancellations such as the null of the plain doubled
    comb (residues up to ~2e-9 at small phi for tolerance 1e-14). Every
    bilinear series (MZ, cavity, even, odd and every pipeline) therefore
    truncates at the squared tolerance.
    """
    return max(tolerance * tolerance, 1e-30)


def _warnings_for(*cap_hits):
    if any(cap_hits):
        return ("truncation cap reached before tolerance",)
    return ()


def _mz_series(phi, tolerance, extra_orders=0):
    """(n, J_n(2phi) J_{n-2}(2phi), order, cap_hit) for the MZ closed forms."""
    jpos, order, cap = bessel_comb(2.0 * phi, doubling_tolerance(tolerance), extra_orders)
    j = signed_orders(jpos)
    n = np.arange(-order + 2, order + 1)
    prod = j[n + order] * j[n - 2 + order]
    return n, prod, order, cap


def mz_static_rabi(p, tolerance=DEFAULT_TOLERANCE, extra_orders=0):
    """e^{i(2 position + slow)} Σ_n J_n(2φ) J_{n-2}(2φ) cos(fast + (n-1) slow)."""
    n, prod, order, cap = _mz_series(p.phi, tolerance, extra_orders)
    series = np.sum(prod * np.cos(p.fast_phase + (n - 1) * p.slow_phase))
    value = np.exp(1j * (2 * p.position_phase + p.slow_phase)) * series
    return RabiResult(complex(value), order, p, _warnings_for(cap))


def mz_shifted_rabi(p, tolerance=DEFAULT_TOLERANCE, extra_orders=0):
    """½ e^{-i carrier} e^{-2i slow} Σ_n J_n(2φ) J_{n-2}(2φ) e^{i n slow}."""
    n, prod, order, cap = _mz_series(p.phi, tolerance, extra_orders)
    series = np.sum(prod * np.exp(1j * n * p.slow_phase))
    value = 0.5 * np.exp(-1j * p.carrier_phase) * np.exp(-2j * p.slow_phase) * series
    return RabiResult(complex(value), order, p, _warnings_for(cap))


def mz_shifted_curve(phi, slow_phases, tolerance=DEFAULT_TOLERANCE):
    """|Ω/Ω₀| of the shifted MZ for many slow phases at one φ."""
    n, prod, _, _ = _mz_series(float(phi), tolerance)
    slow = np.asarray(slow_phases, dtype=float)
    return 0.5 * np.abs(np.exp(1j * np.outer(slow, n)) @ prod)


def cavity_detuned_rabi(phi, delta=None, tolerance=DEFAULT_TOLERANCE, extra_orders=0):
    """2 Σ_{n,m,l} of the four cavity-filtered Bessel factors.

    Accepts either a :class:`CavityDetuned` or bare ``(phi, delta)``.
    """
    p = phi if isinstance(phi, CavityDetuned) else CavityDetuned(float(phi), float(delta))
    jpos, order, cap = bessel_comb(p.phi, doubling_tolerance(tolerance), extra_orders)
    value = 2.0 * kernels.cavity_triple_sum(jpos, p.delta)
    return RabiResult(complex(value), order, p, _warnings_for(cap))


def _parity_rabi(p, parity, tolerance, extra_orders):
    jpos, order, cap = bessel_comb(p.phi, doubling_tolerance(tolerance), extra_orders)
    value = kernels.parity_triple_sum(jpos, parity)
    return RabiResult(complex(value), order, p, _warnings_for(cap))


def even_sideband_rabi(phi, tolerance=DEFAULT_TOLERANCE, extra_orders=0):
    """Σ_{n,m,l} J_{2(n-m)} J_{2m} J_{2(n+1-l)} J_{2l}, all at φ."""
    p = phi if isinstance(phi, EvenSelect) else EvenSelect(float(phi))
    return _parity_rabi(p, 0, tolerance, extra_orders)


def odd_sideband_rabi(phi, tolerance=DEFAULT_TOLERANCE, extra_orders=0):
    """Odd-order analogue of :func:`even_sideband_rabi`."""
    p = phi if isinstance(phi, OddSelect) else OddSelect(float(phi))
    return _parity_rabi(p, 1, tolerance, extra_orders)


@singledispatch
def rabi(p, tolerance=DEFAULT_TOLERANCE, extra_orders=0):
    """Closed-form Ω/Ω₀ for any scheme parameter object."""
    raise TypeError(f"unknown scheme parameters {p!r}")


rabi.register(MzStatic)(mz_static_rabi)
rabi.register(MzShifted)(mz_shifted_rabi)
rabi.register(CavityDetuned)(cavity_detuned_rabi)
rabi.register(EvenSelect)(even_sideband_rabi)
rabi.register(OddSelect)(odd_sideband_rabi)


@singledispatch
def pipeline_rabi(p, tolerance=DEFAULT_TOLERANCE):
    """Ω/Ω₀ from the comb pipeline, scaled to the closed-form convention."""
    raise TypeError(f"unknown scheme parameters {p!r}")


@pipeline_rabi.register
def _(p: MzStatic, tolerance=DEFAULT_TOLERANCE):
    doubled = self_convolve(phase_modulated_comb(p.phi, doubling_tolerance(tolerance)))
    out = mz_combine(doubled, p.slow_phase, p.fast_phase, p.position_phase)
    return 2 * rabi_from_comb(out, -2)


@pipeline_rabi.register
def _(p: MzShifted, tolerance=DEFAULT_TOLERANCE):
    doubled = self_convolve(phase_modulated_comb(p.phi, doubling_tolerance(tolerance)))
    arms = mz_shifted_arms(doubled, p.slow_phase, p.carrier_phase)
    return 2 * rabi_from_comb(arms.shifted, 2, partner=arms.direct)


@pipeline_rabi.register
def _(p: CavityDetuned, tolerance=DEFAULT_TOLERANCE):
    filtered = apply_cavity_filter(phase_modulated_comb(p.phi, doubling_tolerance(tolerance)), p.delta)
    return 2 * rabi_from_comb(self_convolve(filtered), 2)


def _parity_pipeline(phi, parity, tolerance):
    selected = select_sidebands(phase_modulated_comb(phi, doubling_tolerance(tolerance)), parity)
    return rabi_from_comb(reindex_even_lines(self_convolve(selected)), 1)


@pipeline_rabi.register
def _(p: EvenSelect, tolerance=DEFAULT_TOLERANCE):
    return _parity_pipeline(p.phi, "even", tolerance)


@pipeline_rabi.register
def _(p: OddSelect, tolerance=DEFAULT_TOLERANCE):
    return _parity_pipeline(p.phi, "odd", tolerance)


def make_params(scheme, **values):
    """Build scheme parameters from a scheme name and keyword values."""
    try:
        cls = SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {sorted(SCHEMES)}") from None
    return cls(**values)
