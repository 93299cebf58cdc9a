"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.special import jv

from raman_comb.comb import phase_modulated_comb, self_convolve, spatial_period
from raman_comb.ionsim import FlopConfig, dephased_probability, flop_probability, simulate_curve
from raman_comb.optimize import fit_recovery_rate, fit_model, maximize, synthetic_data
from raman_comb.schemes import (
    CavityDetuned,
    EvenSelect,
    MzShifted,
    MzStatic,
    OddSelect,
    doubling_tolerance,
    pipeline_rabi,
    rabi,
    rabi_from_comb,
)
from raman_comb.comb import PhysicalContext


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {title} ({detail})")
        assert ok, detail
    return emit


# 1 -------------------------------------------------------------------------------------

OPTIMA = [
    ("mz-static", MzStatic(0.5, math.pi), {"phi": (0, 3), "fast_phase": (0, 2 * math.pi)}, 0.764, 0.487),
    ("mz-shifted", MzShifted(0.5, math.pi), {"phi": (0, 3)}, 0.764, 0.244),
    ("even", EvenSelect(0.5), {"phi": (0, 3)}, 1.173, 0.230),
    ("odd", OddSelect(0.5), {"phi": (0, 3)}, 1.603, 0.279),
]


@pytest.mark.parametrize("name, template, bounds, phi, value", OPTIMA, ids=[o[0] for o in OPTIMA])
def test_1_optima(report, name, template, bounds, phi, value):
    t0 = time.perf_counter()
    opt = maximize(template, bounds)
    elapsed = time.perf_counter() - t0
    ok = (abs(opt.argmax["phi"] - phi) <= 0.002 and abs(opt.value - value) <= 0.002 and elapsed < 5)
    report(1, f"optimum {name}", ok,
           f"phi={opt.argmax['phi']:.5f} vs {phi}, |Ω/Ω₀|={opt.value:.5f} vs {value}, {elapsed:.2f} s")


# 2 -------------------------------------------------------------------------------------

def test_2_spatial_period(report):
    period_cm = 100 * spatial_period(PhysicalContext(hyperfine_splitting=2 * math.pi * 14.53e9))
    report(2, "spatial period", abs(period_cm - 4.13) <= 0.01, f"{period_cm:.5f} cm vs 4.13 cm")


# 3 -------------------------------------------------------------------------------------

def test_3_destructive_null(report):
    # combs that are doubled are truncated at the squared power tolerance
    tol = doubling_tolerance(1e-14)
    phis = np.random.default_rng(2024).uniform(0, 3, 100)
    worst = max(abs(rabi_from_comb(self_convolve(phase_modulated_comb(p, tol)), 2)) for p in phis)
    report(3, "destructive-interference null", worst < 1e-11, f"max |pair sum| = {worst:.2e} over 100 φ")


# 4 -------------------------------------------------------------------------------------

def test_4_doubling_identity(report):
    tol = doubling_tolerance(1e-14)
    worst = 0.0
    for phi in (0.1, 0.5, 1.0, 1.5, 2.0):
        d = self_convolve(phase_modulated_comb(phi, tol))
        worst = max(worst, float(np.max(np.abs(d.amplitudes - jv(d.orders, 2 * phi)))))
    report(4, "doubling identity", worst < 1e-10, f"max deviation {worst:.2e}")


# 5 -------------------------------------------------------------------------------------

def _grid(scheme):
    phis = np.linspace(0.0, 3.0, 20)
    others = np.linspace(-math.pi, math.pi, 20)
    if scheme == "mz-static":
        return [MzStatic(p, a, fast_phase=0.5 * a + 1.0, position_phase=0.2) for p in phis for a in others]
    if scheme == "mz-shifted":
        return [MzShifted(p, a, carrier_phase=0.4) for p in phis for a in others]
    if scheme == "cavity":
        return [CavityDetuned(p, d) for p in phis for d in np.linspace(-0.95, 0.95, 20)]
    # one free parameter: 400 values of φ
    cls = EvenSelect if scheme == "even" else OddSelect
    return [cls(p) for p in np.linspace(0.0, 3.0, 400)]


@pytest.mark.parametrize("scheme", ["mz-static", "mz-shifted", "cavity", "even", "odd"])
def test_5_oracle_equivalence(report, scheme):
    worst = max(abs(rabi(p).omega_over_omega0 - pipeline_rabi(p)) for p in _grid(scheme))
    report(5, f"closed form vs comb pipeline, {scheme}", worst < 1e-10, f"max difference {worst:.2e} on 400 points")


# 6 -------------------------------------------------------------------------------------

@pytest.mark.slow
def test_6_fit_recovery(report):
    rate = fit_recovery_rate(phi=0.764, trials=500, points=50, noise_frac=0.03, tolerance=0.02, seed=0)
    ctx = PhysicalContext()
    x = np.linspace(0, 2 * math.pi, 50, endpoint=False) / ctx.dk
    worst = 0.0
    for phi in (0.3, 0.764, 1.5, 2.4):
        worst = max(worst, fit_model(synthetic_data("mz-shifted", 1.0, phi, x), "mz-shifted").residual_rms)
    report(6, "fit recovery", rate >= 0.95 and worst < 1e-10,
           f"{100 * rate:.1f}% of 500 trials within 2%, noiseless residual_rms {worst:.1e}")


# 7 -------------------------------------------------------------------------------------

OMEGA = 2 * math.pi * 2e3
PERIOD = 2 * math.pi / OMEGA


def _per_period(curve, periods, reducer):
    out = []
    for k in range(periods):
        sel = (curve.tau >= k * PERIOD) & (curve.tau < (k + 1) * PERIOD)
        out.append(reducer(curve.mean_photons[sel]))
    return np.array(out)


def test_7_flopping_curve(report):
    base = dict(rabi_frequency=OMEGA, shots_per_point=100_000, bright_mean=1.0, dark_mean=0.0)
    clean = simulate_curve(FlopConfig(max_pulse_time=2e-3, points=100, rng_seed=1, **base))
    err = float(np.max(np.abs(clean.mean_photons - flop_probability(OMEGA, clean.tau))))

    periods = 8
    grid = dict(max_pulse_time=periods * PERIOD, points=periods * 24 + 1, **base)
    noisy = simulate_curve(FlopConfig(amplitude_noise_frac=0.05, rng_seed=2, **grid))
    contrast = _per_period(noisy, periods, np.ptp)
    # the dephasing oracle holds within 5 sd of the shot mean; Bernoulli plus
    # Poisson(1) counts have variance p + p(1 - p)
    expected = dephased_probability(OMEGA, noisy.tau, 0.05)
    sd = np.sqrt(np.maximum(2 * expected - expected**2, 1.0 / base["shots_per_point"]) / base["shots_per_point"])
    envelope_err = float(np.max(np.abs(noisy.mean_photons - expected) / sd))
    decays = bool(np.all(np.diff(contrast) < 0))

    leaky = simulate_curve(FlopConfig(leakage_rate=100.0, rng_seed=3, **grid))
    floor = _per_period(leaky, periods, np.min)
    rises = bool(np.all(np.diff(floor) > 0))

    ok = err < 0.01 and decays and rises and envelope_err < 5
    report(7, "flopping curve", ok,
           f"noiseless max error {err:.4f}; contrast per period {np.round(contrast, 3).tolist()}; "
           f"dephasing-oracle error {envelope_err:.2f} sd; baseline per period {np.round(floor, 3).tolist()}")


# 8 -------------------------------------------------------------------------------------

def test_8_determinism(report, tmp_path):
    ctx = PhysicalContext()
    x = np.linspace(0, 2 * math.pi, 50, endpoint=False) / ctx.dk
    data = synthetic_data("mz-shifted", 1.0, 0.764, x, 0.03, np.random.default_rng(8))
    path = tmp_path / "synthetic.csv"
    path.write_text(data.to_csv(precision=17))
    commands = [
        ["simulate", "--omega-hz", "2000", "--tmax", "2e-3", "--points", "100", "--shots", "100", "--seed", "7"],
        ["simulate", "--points", "50", "--seed", "7", "--noise", "0.05", "--leakage", "50", "--format", "json"],
        ["fit", "--model", "mz-shifted", "--data", str(path)],
        ["fit", "--model", "mz-shifted", "--data", str(path), "--format", "csv"],
    ]
    same = []
    for argv in commands:
        runs = [subprocess.run([sys.executable, "-m", "raman_comb", *argv], capture_output=True, check=True).stdout
                for _ in range(2)]
        same.append(runs[0] == runs[1] and len(runs[0]) > 0)
    report(8, "determinism", all(same), f"{sum(same)}/{len(same)} commands byte-identical")
