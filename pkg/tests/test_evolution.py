"""Тесты спектральной правой части, шага RK4 и эволюции."""

import numpy as np
import pytest

from gfbbm.evolution import EvolutionTrace, evolve, rhs, rk4_step
from gfbbm.exceptions import DivergenceError, ParameterError
from gfbbm.models import ModelParams, TimeGrid
from gfbbm.spectral import Spectrum, WaveProfile, forward_transform, inverse_transform, make_grid, translate


def gaussian(grid, amplitude=0.1, width=1.0):
    return WaveProfile(grid, amplitude * np.exp(-(grid.nodes / width) ** 2))


@pytest.fixture
def small_grid():
    return make_grid(64, 10.0)


@pytest.fixture
def kdv():
    return ModelParams(alpha=1.0, nonlinearity=1, speed=1.1)


# ===== RHS AND STEP =====

def test_rhs_traveling_wave(kdv_wave, kdv_params):
    # Для бегущей волны U_t = -c U_x, т.е. rhs(Q^) = -i kappa c Q^
    spectrum = forward_transform(kdv_wave.profile)
    grid = spectrum.grid

    defect = rhs(spectrum, kdv_params).coeffs + kdv_params.speed * grid.derivative_multiplier() * spectrum.coeffs

    assert np.max(np.abs(defect)) <= kdv_wave.final.residual_error + 1e-15


def test_rhs_conserves_mean(small_grid, kdv):
    spectrum = forward_transform(gaussian(small_grid, amplitude=0.5))

    assert rhs(spectrum, kdv).coefficient(0) == 0


def test_rk4_zero_step_is_identity(small_grid, kdv):
    spectrum = forward_transform(gaussian(small_grid))

    assert rk4_step(spectrum, kdv, 0.0) is spectrum


@pytest.mark.parametrize("dt", [float("nan"), float("inf")])
def test_rk4_rejects_non_finite_step(small_grid, kdv, dt):
    with pytest.raises(ParameterError):
        rk4_step(forward_transform(gaussian(small_grid)), kdv, dt)


def test_rk4_local_order_on_linear_mode():
    # Малая амплитуда: гармоника k = 1 эволюционирует линейно как exp(-i omega t)
    grid = make_grid(16, 1.0)
    params = ModelParams(alpha=0.8, nonlinearity=1, speed=1.1)
    epsilon = 1e-8
    kappa = np.pi
    omega = kappa * (1 + 0.75 * kappa ** 0.8) / (1 + 1.25 * kappa ** 0.8)
    spectrum = forward_transform(WaveProfile(grid, epsilon * np.cos(kappa * grid.nodes)))

    errors = []
    for dt in (0.1, 0.05):
        stepped = rk4_step(spectrum, params, dt)
        exact = 0.5 * epsilon * np.exp(-1j * omega * dt)
        errors.append(abs(stepped.coefficient(1) - exact))

    order = np.log2(errors[0] / errors[1])
    assert 4.5 < order < 5.5


def test_rk4_time_reversal(small_grid, kdv):
    spectrum = forward_transform(gaussian(small_grid))

    forward = spectrum
    for _ in range(50):
        forward = rk4_step(forward, kdv, 1e-3)
    backward = forward
    for _ in range(50):
        backward = rk4_step(backward, kdv, -1e-3)

    assert np.max(np.abs(inverse_transform(backward).values - gaussian(small_grid).values)) < 1e-10


# ===== EVOLVE =====

def test_evolve_translates_solitary_wave(kdv_wave, kdv_params):
    time = TimeGrid.from_step(1.0, 0.01)

    trace = evolve(kdv_wave.profile, kdv_params, time)

    shifted = translate(kdv_wave.profile, kdv_params.speed * 1.0)
    assert trace.completed
    assert trace.steps_taken == 100
    assert list(trace.times) == pytest.approx([0.0, 1.0])
    assert np.max(np.abs(trace.final.values - shifted.values)) < 1e-6
    drift = trace.max_drift()
    assert drift["i0"] < 1e-12
    assert drift["i1"] < 1e-8
    assert drift["hamiltonian"] < 1e-8


def test_fractional_wave_travels_without_change_of_shape(solved_wave):
    params = ModelParams(alpha=0.6, nonlinearity=1, speed=1.1)
    initial = solved_wave(0.6, 1).profile
    time = TimeGrid.from_step(20.0, 0.01)

    trace = evolve(initial, params, time, output_times=[0.0, 10.0, 20.0], drift_stride=100)

    assert trace.completed
    for t, snapshot in zip(trace.times, trace.snapshots):
        shifted = translate(initial, params.speed * float(t))
        assert np.max(np.abs(snapshot.values - shifted.values)) <= 1e-3 * initial.amplitude
    drift = trace.max_drift()
    assert drift["i0"] < 1e-12
    assert drift["i1"] < 1e-6


def test_evolve_snapshots_and_drift_stride(small_grid, kdv):
    time = TimeGrid(t_final=0.1, n_steps=10)
    steps = []

    trace = evolve(
        gaussian(small_grid), kdv, time,
        output_times=[0.05, 0.0, 0.1],
        drift_stride=3,
        on_step=lambda m, total: steps.append((m, total)),
    )

    assert trace.requested_times == [0.0, 0.05, 0.1]
    assert list(trace.times) == pytest.approx([0.0, 0.05, 0.1])
    assert len(trace.snapshots) == 3
    assert list(trace.drift_times) == pytest.approx([0.03, 0.06, 0.09, 0.1])
    assert trace.i0_drift.shape == trace.i1_drift.shape == trace.hamiltonian_drift.shape == (4,)
    assert steps[-1] == (10, 10)
    assert len(steps) == 10


def test_evolve_snaps_output_time_to_step(small_grid, kdv):
    trace = evolve(gaussian(small_grid), kdv, TimeGrid(t_final=0.1, n_steps=10), output_times=[0.034])

    assert trace.requested_times == [0.034]
    assert trace.times[0] == pytest.approx(0.03)


def test_evolve_zero_horizon(small_grid, kdv):
    initial = gaussian(small_grid)

    trace = evolve(initial, kdv, TimeGrid(t_final=0.0, n_steps=0))

    assert trace.steps_taken == 0
    assert trace.snapshots[0] is initial
    assert trace.drift_times.size == 0
    assert trace.max_drift() == {"i0": 0.0, "i1": 0.0, "hamiltonian": 0.0}


def test_evolve_rejects_output_time_outside_horizon(small_grid, kdv):
    with pytest.raises(ParameterError):
        evolve(gaussian(small_grid), kdv, TimeGrid(t_final=1.0, n_steps=10), output_times=[2.0])


def test_evolve_rejects_bad_drift_stride(small_grid, kdv):
    with pytest.raises(ParameterError):
        evolve(gaussian(small_grid), kdv, TimeGrid(t_final=1.0, n_steps=10), drift_stride=0)


def test_evolve_divergence_keeps_partial_trace(small_grid, kdv):
    time = TimeGrid.from_step(500.0, 10.0)

    with pytest.raises(DivergenceError) as exc_info:
        evolve(gaussian(small_grid), kdv, time)

    partial = exc_info.value.partial
    assert isinstance(partial, EvolutionTrace)
    assert not partial.completed
    assert partial.steps_taken < 50
    assert partial.times[0] == 0.0
    assert exc_info.value.details["step"] == partial.steps_taken + 1


def test_time_grid_from_step():
    grid = TimeGrid.from_step(20.0, 0.005)

    assert grid.n_steps == 4000
    assert grid.dt == pytest.approx(0.005)
    with pytest.raises(ValueError):
        TimeGrid.from_step(1.0, 0.3)


def test_spectrum_is_conjugate_symmetric_after_steps(small_grid, kdv):
    spectrum = forward_transform(gaussian(small_grid, amplitude=0.3))
    for _ in range(20):
        spectrum = rk4_step(spectrum, kdv, 0.01)

    assert isinstance(spectrum, Spectrum)
    assert spectrum.is_conjugate_symmetric(1e-12)
