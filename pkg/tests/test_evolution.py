import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geopump.drive import DriveProtocol
from geopump.errors import ValidationError
from geopump.evolution import (
    IntegratorConfig,
    curvature_pump_reference,
    evolve_batch,
    evolve_pump,
    pump_power,
    pump_power_h0,
    transitionless_error,
)
from geopump.geometry import wilson_line
from geopump.tripod import EXCITED, GROUND, InitialStateSpec, TripodModel

MODEL = TripodModel(delta=1.0, m=0.5)
PROTO = DriveProtocol((0.7, 2.1), 0.4, 3, 2)
CFG = IntegratorConfig(dt=0.01, stride=10)


@pytest.fixture(scope="module")
def short_run():
    return evolve_pump(MODEL, PROTO, InitialStateSpec(), 50.0, CFG)


def test_integrator_grid():
    assert IntegratorConfig(dt=0.01).grid(1.0) == (100, pytest.approx(0.01))
    n, h = IntegratorConfig(dt=0.3).grid(1.0)
    assert n == 4 and h == 0.25
    assert IntegratorConfig().grid(0.0)[0] == 0
    with pytest.raises(ValidationError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ValidationError):
        IntegratorConfig(stride=0)
    with pytest.raises(ValidationError):
        IntegratorConfig().grid(-1.0)


def test_conservation_on_short_run(short_run):
    tr = short_run
    assert tr.t[0] == 0 and tr.t[-1] == pytest.approx(50.0)
    assert np.all(tr.energy[0] == 0)
    assert np.max(tr.norm_err) < 1e-8
    assert np.max(np.abs(tr.E1 + tr.E2)) < 1e-6
    assert np.max(np.abs(tr.energy_h0)) < 1e-6
    assert np.max(tr.transitionless_err) < 1e-5
    assert np.max(np.abs(tr.E2)) > 1.0


def test_sample_grid_includes_endpoint():
    tr = evolve_pump(MODEL, PROTO, InitialStateSpec(), 1.05, IntegratorConfig(dt=0.01, stride=10))
    assert tr.t[-1] == pytest.approx(1.05)
    assert len(tr.t) == 12


def test_zero_duration():
    tr = evolve_pump(MODEL, PROTO, InitialStateSpec(), 0.0, CFG)
    assert tr.t.tolist() == [0.0]
    assert np.all(tr.energy == 0) and np.all(tr.energy_h0 == 0)


def test_pure_frame_state_pumps_nothing():
    tr = evolve_pump(MODEL, PROTO, InitialStateSpec(c=1.0), 50.0, CFG)
    assert np.max(np.abs(tr.E2)) < 1e-6


def test_phase_flip_reverses_pumping(short_run):
    flipped = evolve_pump(MODEL, PROTO, InitialStateSpec(dphi=-np.pi / 2), 50.0, CFG)
    assert np.max(np.abs(flipped.E2 + short_run.E2)) < 1e-6


@pytest.mark.parametrize("dphi", [np.pi / 6, 2.0, -1.0])
def test_energy_scales_with_sine_of_phase(short_run, dphi):
    tr = evolve_pump(MODEL, PROTO, InitialStateSpec(dphi=dphi), 50.0, CFG)
    np.testing.assert_allclose(tr.E2 / np.sin(dphi), short_run.E2, atol=1e-6)


def test_matches_curvature_reference(short_run):
    t, e = curvature_pump_reference(MODEL, PROTO, InitialStateSpec(), 50.0, steps=5000)
    assert np.max(np.abs(e[::10, 1] - short_run.E2)) < 1e-4 * np.max(np.abs(short_run.E2))
    assert np.max(np.abs(e.sum(axis=1))) < 1e-12


def test_curvature_reference_trivial_cases():
    t, e = curvature_pump_reference(MODEL, PROTO, InitialStateSpec(c=0.0), 10.0)
    assert np.all(e == 0)
    t, e = curvature_pump_reference(MODEL, PROTO, InitialStateSpec(), 0.0)
    assert t.tolist() == [0.0] and e.shape == (1, 2) and np.all(e == 0)
    with pytest.raises(ValidationError):
        curvature_pump_reference(MODEL, PROTO, InitialStateSpec(), -1.0)


def test_state_follows_wilson_line():
    init = InitialStateSpec(c=0.6, dphi=1.0)
    tr = evolve_pump(MODEL, PROTO, init, 10.0, IntegratorConfig(dt=0.005, stride=2000))
    w = wilson_line(MODEL, np.asarray(PROTO.phi0), PROTO.frequencies, 10.0, steps=20000).matrix
    psi0 = init.state(MODEL, np.asarray(PROTO.phi0))
    np.testing.assert_allclose(tr.psi[-1, GROUND], w @ psi0[GROUND], atol=1e-7)


def test_leakage_converges_fourth_order():
    init = InitialStateSpec()
    coarse = evolve_pump(MODEL, PROTO, init, 50.0, IntegratorConfig(dt=0.02, stride=5))
    fine = evolve_pump(MODEL, PROTO, init, 50.0, IntegratorConfig(dt=0.01, stride=10))
    ratio = np.max(coarse.transitionless_err) / np.max(fine.transitionless_err)
    assert 12.0 < ratio < 20.0


def test_batch_matches_single_runs():
    phis = np.array([[0.7, 2.1], [3.0, 0.1], [5.5, 4.4]])
    init = InitialStateSpec()
    batch = evolve_batch(MODEL, phis, PROTO.frequencies, init.state(MODEL, phis), 20.0, CFG)
    for i, phi in enumerate(phis):
        single = evolve_pump(MODEL, DriveProtocol(tuple(phi), 0.4, 3, 2), init, 20.0, CFG)
        np.testing.assert_allclose(batch.energy[i], single.energy, atol=1e-12)


def test_step_too_large_rejected():
    with pytest.raises(ValidationError, match="step too large"):
        evolve_pump(MODEL, PROTO, InitialStateSpec(), 10.0, IntegratorConfig(dt=0.5))


def test_transitionless_error_examples():
    phi = np.array([0.3, 1.2])
    f = MODEL.dark_frame(phi)
    u1 = np.zeros(4, complex)
    u1[GROUND] = f.u1
    assert transitionless_error(u1, MODEL, phi) < 1e-12
    e = np.zeros(4, complex)
    e[EXCITED] = 1.0
    assert transitionless_error(e, MODEL, phi) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(-1, 1), st.floats(-1, 1))
def test_h0_power_channels(a, b, v1, v2):
    phi = np.array([a, b])
    if MODEL.omega_jet(phi).norm < 0.1:
        return
    v = np.array([v1, v2])
    psi = InitialStateSpec(c=0.3, dphi=0.8).state(MODEL, phi)
    for mu in range(2):
        assert abs(pump_power_h0(psi, MODEL, phi, v, mu)) < 1e-10
        assert pump_power_h0(psi, MODEL, phi, np.zeros(2), mu) == 0.0
        assert pump_power(psi, MODEL, phi, np.zeros(2), mu) == 0.0
    # lower bright band: Hellmann-Feynman gives d eps_-
    evals, evecs = np.linalg.eigh(MODEL.hamiltonian(phi))
    lower = evecs[:, 0]
    jet = MODEL.omega_jet(phi)
    root = np.sqrt(MODEL.delta**2 + 4 * jet.norm**2)
    for mu in range(2):
        d_eps = -2 * np.dot(jet.omega, jet.d_omega[mu]) / root
        assert pump_power_h0(lower, MODEL, phi, v, mu) == pytest.approx(v[mu] * d_eps, abs=1e-8)
