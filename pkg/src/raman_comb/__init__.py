"""Rabi frequencies of stimulated Raman transitions driven by an EOM comb.

A phase-modulated laser is frequency doubled into a comb of lines spaced by
half the hyperfine splitting. The modules here build that comb, shape it
(Mach-Zehnder delay, detuned doubling cavity, parity selection), evaluate
the normalized Raman Rabi frequency, optimize and fit it, and simulate the
resulting Rabi-flopping experiment.
"""
from .comb import (
    CombSpectrum,
    MzGeometry,
    PhysicalContext,
    apply_cavity_filter,
    phase_modulated_comb,
    select_sidebands,
    self_convolve,
    spatial_period,
    superpose_mz,
    total_power,
)
from .ionsim import FlopConfig, FlopCurve, estimate_p_bright, flop_probability, simulate_curve
from .kernels import BACKEND
from .optimize import FitReport, SweepSpec, fit_model, maximize, sweep
from .schemes import (
    CavityDetuned,
    EvenSelect,
    MzShifted,
    MzStatic,
    OddSelect,
    RabiResult,
    cavity_detuned_rabi,
    even_sideband_rabi,
    mz_shifted_rabi,
    mz_static_rabi,
    odd_sideband_rabi,
    pipeline_rabi,
    rabi,
    rabi_from_comb,
)

__version__ = "0.1.0"
