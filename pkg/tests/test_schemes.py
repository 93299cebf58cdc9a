import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raman_comb.comb import (
    CombSpectrum,
    MzGeometry,
    PhysicalContext,
    apply_cavity_filter,
    phase_modulated_comb,
    self_convolve,
)
from raman_comb.schemes import (
    CavityDetuned,
    EvenSelect,
    MzShifted,
    MzStatic,
    OddSelect,
    cavity_detuned_rabi,
    doubling_tolerance,
    even_sideband_rabi,
    make_params,
    mz_shifted_curve,
    mz_shifted_rabi,
    mz_static_rabi,
    odd_sideband_rabi,
    pipeline_rabi,
    rabi,
    rabi_from_comb,
)

phis = st.floats(min_value=0.0, max_value=3.0, allow_nan=False)
angles = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def _golden(golden, key):
    g = golden[key]
    return complex(g["re"], g["im"])


# --- pairing ------------------------------------------------------------------

@given(phis)
@settings(max_examples=50, deadline=None)
def test_plain_doubled_comb_cancels(phi):
    comb = phase_modulated_comb(phi, doubling_tolerance(1e-14))
    assert abs(rabi_from_comb(self_convolve(comb), 2)) < 1e-12


def test_default_tolerance_leaves_residue_at_small_phi():
    # a comb truncated at power 1e-14 keeps ~1e-7 amplitude errors, which pairing sees
    residue = abs(rabi_from_comb(self_convolve(phase_modulated_comb(0.015)), 2))
    assert 1e-11 < residue < 1e-8


def test_single_pair():
    d = CombSpectrum([0, 0, 1, 0, 0.5])
    assert rabi_from_comb(d, 2) == pytest.approx(0.5)


def test_pipeline_matches_half_the_cavity_closed_form():
    filtered = apply_cavity_filter(phase_modulated_comb(1.0, 1e-28), 0.25)
    pair = rabi_from_comb(self_convolve(filtered), 2)
    assert abs(pair - cavity_detuned_rabi(1.0, 0.25).omega_over_omega0 / 2) < 1e-10


def test_separation_beyond_span_warns():
    d = CombSpectrum([1, 1, 1])
    with pytest.warns(RuntimeWarning):
        assert rabi_from_comb(d, 5) == 0


def test_zero_separation_rejected():
    with pytest.raises(ValueError):
        rabi_from_comb(CombSpectrum([1, 1, 1]), 0)


@given(phis, st.floats(min_value=-0.9, max_value=0.9))
@settings(max_examples=30, deadline=None)
def test_conjugation_symmetry(phi, delta):
    d = self_convolve(apply_cavity_filter(phase_modulated_comb(phi), delta))
    plus, minus = rabi_from_comb(d, 2), rabi_from_comb(d, -2)
    assert minus == pytest.approx(plus.conjugate(), abs=1e-15)


def test_partner_pairing_pads_orders():
    a = CombSpectrum([1, 2, 3])
    b = CombSpectrum([0, 0, 1, 0, 0])
    assert rabi_from_comb(a, 1, partner=b) == pytest.approx(1.0)


# --- static MZ --------------------------------------------------------------------

@given(phis, angles)
@settings(max_examples=30, deadline=None)
def test_static_mz_vanishes_without_path_difference(phi, fast):
    assert rabi(MzStatic(phi, 0.0, fast)).abs < 1e-12


def test_static_mz_published_maximum():
    r = mz_static_rabi(MzStatic(0.764, math.pi, 0.0))
    assert r.abs == pytest.approx(0.487, abs=0.002)


def test_static_mz_golden(golden):
    r = rabi(MzStatic(0.3, math.pi, 0.0))
    assert abs(r.omega_over_omega0 - _golden(golden, "mz_static_phi0.3_dkdx_pi_fast0")) < 1e-10


def test_static_mz_from_geometry():
    ctx = PhysicalContext()
    geom = MzGeometry(math.pi / ctx.dk)
    p = MzStatic.from_geometry(0.764, geom, ctx)
    assert p.slow_phase == pytest.approx(math.pi)
    assert 0 <= abs(p.fast_phase) < 2 * math.pi


# --- shifted MZ ------------------------------------------------------------------

def test_shifted_mz_published_maximum():
    assert mz_shifted_rabi(MzShifted(0.764, math.pi)).abs == pytest.approx(0.244, abs=0.002)


@given(phis)
@settings(max_examples=30, deadline=None)
def test_shifted_mz_vanishes_at_zero_slow_phase(phi):
    assert rabi(MzShifted(phi, 0.0)).abs < 1e-12


def test_shifted_mz_golden(golden):
    r = rabi(MzShifted(0.5, math.pi / 2))
    assert abs(r.omega_over_omega0 - _golden(golden, "mz_shifted_phi0.5_dkdx_halfpi")) < 1e-10


@given(phis, angles, angles, angles)
@settings(max_examples=40, deadline=None)
def test_shifted_mz_magnitude_ignores_carrier_phase(phi, slow, c1, c2):
    a = rabi(MzShifted(phi, slow, c1)).abs
    b = rabi(MzShifted(phi, slow, c2)).abs
    assert a == pytest.approx(b, abs=1e-15)


@given(phis, angles)
@settings(max_examples=40, deadline=None)
def test_shifted_mz_periodic_in_slow_phase(phi, slow):
    a = rabi(MzShifted(phi, slow)).abs
    b = rabi(MzShifted(phi, slow + 2 * math.pi)).abs
    assert a == pytest.approx(b, abs=1e-13)


def test_shifted_geometry_k_invariance():
    ctx = PhysicalContext()
    base = MzGeometry(0.02, relative_shift=2 * math.pi * 4e6)
    ref = rabi(MzShifted.from_geometry(0.764, base, ctx)).abs
    for k in (1e6, 2 * math.pi / 458e-9, 3.3e7):
        geom = MzGeometry(0.02, k=k, relative_shift=base.relative_shift, beam_position=0.37)
        assert rabi(MzShifted.from_geometry(0.764, geom, ctx)).abs == pytest.approx(ref, abs=1e-15)


def test_shifted_curve_matches_pointwise():
    slow = np.linspace(-4, 4, 17)
    curve = mz_shifted_curve(0.9, slow)
    assert np.allclose(curve, [rabi(MzShifted(0.9, s)).abs for s in slow], atol=1e-15)


# --- cavity ------------------------------------------------------------------------

@given(phis)
@settings(max_examples=30, deadline=None)
def test_cavity_zero_detuning_vanishes(phi):
    assert cavity_detuned_rabi(phi, 0.0).abs < 1e-12


@given(st.floats(min_value=-0.99, max_value=0.99))
@settings(max_examples=30, deadline=None)
def test_cavity_without_modulation_vanishes(delta):
    assert cavity_detuned_rabi(0.0, delta).abs == 0


def test_cavity_golden_and_pipeline(golden):
    z = _golden(golden, "cavity_phi1.2_delta0.3")
    r = cavity_detuned_rabi(1.2, 0.3)
    assert abs(r.omega_over_omega0 - z) < 1e-10
    assert abs(pipeline_rabi(CavityDetuned(1.2, 0.3)) - r.omega_over_omega0) < 1e-10


@pytest.mark.parametrize("delta", [1.0, -1.2])
def test_cavity_rejects_detuning(delta):
    with pytest.raises(ValueError):
        cavity_detuned_rabi(1.0, delta)


# --- parity selection ----------------------------------------------------------------

def test_even_published_maximum():
    assert even_sideband_rabi(1.173).abs == pytest.approx(0.230, abs=0.002)


def test_odd_published_maximum():
    assert odd_sideband_rabi(1.603).abs == pytest.approx(0.279, abs=0.002)


def test_parity_schemes_vanish_without_modulation():
    assert even_sideband_rabi(0.0).abs == 0
    assert odd_sideband_rabi(0.0).abs == 0


# --- cross-checks over the parameter space ---------------------------------------------

def _grid_params():
    for phi in np.linspace(0.0, 3.0, 20):
        for a in np.linspace(-3.0, 3.0, 20):
            yield MzStatic(phi, a, fast_phase=0.7 * a, position_phase=0.3)
            yield MzShifted(phi, a, carrier_phase=1.1)
            yield CavityDetuned(phi, a / 3.1)
            yield EvenSelect(phi)
            yield OddSelect(phi)


def test_all_schemes_sub_unity():
    assert max(rabi(p).abs for p in _grid_params()) <= 1


@given(st.sampled_from(["mz-static", "mz-shifted", "cavity", "even", "odd"]), phis, angles)
@settings(max_examples=60, deadline=None)
def test_closed_form_equals_pipeline(scheme, phi, a):
    p = {
        "mz-static": lambda: MzStatic(phi, a, fast_phase=-a),
        "mz-shifted": lambda: MzShifted(phi, a, carrier_phase=a / 2),
        "cavity": lambda: CavityDetuned(phi, math.tanh(a)),
        "even": lambda: EvenSelect(phi),
        "odd": lambda: OddSelect(phi),
    }[scheme]()
    assert abs(rabi(p).omega_over_omega0 - pipeline_rabi(p)) < 1e-10


@given(st.sampled_from(["mz-static", "mz-shifted", "cavity", "even", "odd"]), phis, angles)
@settings(max_examples=60, deadline=None)
def test_truncation_convergence(scheme, phi, a):
    p = {
        "mz-static": lambda: MzStatic(phi, a, fast_phase=a / 3),
        "mz-shifted": lambda: MzShifted(phi, a),
        "cavity": lambda: CavityDetuned(phi, math.tanh(a)),
        "even": lambda: EvenSelect(phi),
        "odd": lambda: OddSelect(phi),
    }[scheme]()
    base = rabi(p)
    wider = rabi(p, extra_orders=8)
    assert wider.truncation_order == base.truncation_order + 8
    assert abs(wider.abs - base.abs) < 1e-10


# --- plumbing --------------------------------------------------------------------------

def test_make_params():
    assert make_params("even", phi=1.0) == EvenSelect(1.0)
    with pytest.raises(ValueError):
        make_params("triangle", phi=1.0)


@pytest.mark.parametrize("bad", [
    lambda: MzStatic(-1.0, 0.0),
    lambda: MzShifted(1.0, math.nan),
    lambda: CavityDetuned(1.0, 1.0),
    lambda: EvenSelect(math.inf),
])
def test_validation(bad):
    with pytest.raises(ValueError):
        bad()


def test_rabi_rejects_unknown_type():
    with pytest.raises(TypeError):
        rabi(object())


def test_result_json():
    r = rabi(MzShifted(0.764, math.pi))
    doc = json.loads(r.to_json())
    assert set(doc) == {"scheme", "params", "re", "im", "abs", "truncation_order", "warnings"}
    assert doc["scheme"] == "mz-shifted"
    assert doc["params"]["phi"] == 0.764
    assert doc["abs"] == pytest.approx(0.2432491, abs=1e-7)
    assert doc["warnings"] == []


def test_cap_warning_surfaces():
    r = even_sideband_rabi(70.0)
    assert r.warnings
