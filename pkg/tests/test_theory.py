"""Тесты аналитических проверок: допустимость, точное решение, тождества."""

import numpy as np
import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError

from gfbbm.exceptions import ParameterError
from gfbbm.models import AdmissibilityReport, AdmissibilityTag as Tag, ModelParams
from gfbbm.petviashvili import default_seed, solve
from gfbbm.spectral import WaveProfile, make_grid, resample
from gfbbm.theory import (
    critical_exponent,
    energy_identity_check,
    exact_soliton,
    exact_soliton_profile,
    ground_state_scaling,
    inverse_ground_state_scaling,
    is_supercritical,
    pohozaev_check,
    pohozaev_ratio,
    validate_params,
    weinstein_functional,
)


def params(alpha, p, c):
    return ModelParams(alpha=alpha, nonlinearity=p, speed=c)


# ===== ADMISSIBILITY =====

def test_critical_exponent():
    assert critical_exponent(0.5) == pytest.approx(2.0)
    assert critical_exponent(0.8) == pytest.approx(8.0)
    assert critical_exponent(1.0) == float("inf")
    assert critical_exponent(1.5) == float("inf")


@pytest.mark.parametrize(
    "alpha, p, c, reasons, primary",
    [
        (1.0, 1, 1.1, [Tag.OK], Tag.OK),
        (1.0, 1, 0.8, [Tag.NONEXIST_CASE_I], Tag.NONEXIST_CASE_I),
        (1.0, 1, 1.0, [Tag.NONEXIST_CASE_III], Tag.NONEXIST_CASE_III),
        (1.0, 1, 0.6, [Tag.NONEXIST_CASE_III], Tag.NONEXIST_CASE_III),
        (1.0, 1, 0.5, [Tag.NO_POSITIVE_WAVE], Tag.NO_POSITIVE_WAVE),
        (0.5, 2, 1.1, [Tag.NONEXIST_CASE_II, Tag.SUPERCRITICAL_P], Tag.SUPERCRITICAL_P),
        (0.2, 1, 0.5, [Tag.NONEXIST_CASE_II, Tag.SUPERCRITICAL_P, Tag.HAMILTONIAN_ILL_DEFINED], Tag.NONEXIST_CASE_II),
        (0.2, 1, 1.1, [Tag.NONEXIST_CASE_II, Tag.SUPERCRITICAL_P, Tag.HAMILTONIAN_ILL_DEFINED], Tag.SUPERCRITICAL_P),
        (0.6, 3, 2.0, [Tag.NONEXIST_CASE_II, Tag.SUPERCRITICAL_P], Tag.SUPERCRITICAL_P),
        (0.5, 1, 0.8, [Tag.NONEXIST_CASE_I], Tag.NONEXIST_CASE_I),
        (0.8, 1, 1.1, [Tag.OK], Tag.OK),
        (0.8, 8, 1.1, [Tag.NONEXIST_CASE_II, Tag.SUPERCRITICAL_P], Tag.SUPERCRITICAL_P),
        (0.8, 8, 0.8, [Tag.NONEXIST_CASE_I, Tag.SUPERCRITICAL_P], Tag.NONEXIST_CASE_I),
    ],
)
def test_validate_params_examples(alpha, p, c, reasons, primary):
    report = validate_params(params(alpha, p, c))

    assert report.reasons == reasons
    assert report.primary == primary
    assert report.admissible == (reasons == [Tag.OK])


@pytest.mark.parametrize("alpha, p", [(0.5, 2), (0.6, 3), (0.75, 6), (0.8, 8), (0.9, 18)])
def test_supercritical_boundary_is_exact(alpha, p):
    assert critical_exponent(alpha) == pytest.approx(p)
    assert is_supercritical(alpha, p)
    assert not is_supercritical(alpha + 1e-12, p)

    report = validate_params(params(alpha, p, 1.1))

    assert Tag.SUPERCRITICAL_P in report.reasons
    assert report.primary == Tag.SUPERCRITICAL_P
    assert Tag.HAMILTONIAN_ILL_DEFINED not in report.reasons


def test_validate_params_lattice():
    for alpha in np.linspace(0.07, 1.97, 10):
        for p in range(1, 6):
            for c in np.linspace(0.05, 2.95, 20):
                alpha, c = float(alpha), float(c)
                threshold = p / (p + 2)
                report = validate_params(params(alpha, p, c))

                assert report.admissible == (c > 1.0 and alpha > threshold)
                assert (Tag.NONEXIST_CASE_I in report.reasons) == (0.6 < c < 1.0 and alpha >= threshold)
                assert (Tag.NONEXIST_CASE_II in report.reasons) == ((c < 0.6 or c > 1.0) and alpha <= threshold)
                assert (Tag.SUPERCRITICAL_P in report.reasons) == (alpha <= threshold)
                assert report.primary in report.reasons


@given(
    alpha=st.floats(min_value=0.01, max_value=1.99),
    p=st.integers(min_value=1, max_value=8),
    c=st.floats(min_value=-3.0, max_value=5.0),
)
def test_validate_params_properties(alpha, p, c):
    report = validate_params(params(alpha, p, c))

    assert report.primary in report.reasons
    assert report.admissible == (report.reasons == [Tag.OK])
    if report.admissible:
        assert c > 1.0
        assert not is_supercritical(alpha, p)
        assert alpha > p / (p + 2)


def test_model_params_admissible_shortcut():
    assert params(1.0, 1, 1.1).admissible()
    assert not params(1.0, 1, 0.9).admissible()


def test_report_consistency_enforced():
    with pytest.raises(ValidationError):
        AdmissibilityReport(
            params=params(1.0, 1, 1.1),
            admissible=True,
            reasons=[Tag.NONEXIST_CASE_I],
            primary=Tag.NONEXIST_CASE_I,
        )
    with pytest.raises(ValidationError):
        AdmissibilityReport(params=params(1.0, 1, 1.1), admissible=True, reasons=[Tag.OK], primary=Tag.SUPERCRITICAL_P)


# ===== EXACT SOLITON =====

def test_exact_soliton_peak_and_symmetry():
    c = 1.1
    assert exact_soliton(c * 2.0, 2.0, c) == pytest.approx(4 * (c - 1))
    assert isinstance(exact_soliton(0.0, 0.0, c), float)

    x = np.linspace(-30.0, 30.0, 61)
    values = exact_soliton(x, 0.0, c)
    assert np.allclose(values, values[::-1])
    assert np.all(values > 0)


def test_exact_soliton_half_width():
    c = 1.5
    beta = 4 * (c - 1) / (5 * c - 3)

    assert exact_soliton(1.0 / beta, 0.0, c) == pytest.approx(2 * (c - 1))


@pytest.mark.parametrize("c", [0.6, 0.5, -1.0])
def test_exact_soliton_rejects_slow_speed(c):
    with pytest.raises(ParameterError):
        exact_soliton(0.0, 0.0, c)


# ===== IDENTITIES =====

@pytest.fixture(scope="module")
def wide_grid():
    return make_grid(2 ** 14, 1024.0)


def test_pohozaev_ratio_value():
    assert pohozaev_ratio(params(1.0, 1, 1.1)) == pytest.approx(4 * 0.1 / (2.5 * 2.0))


@pytest.mark.parametrize("alpha, p, c", [(0.5, 2, 1.1), (1.0, 1, 0.6)])
def test_pohozaev_ratio_singular(alpha, p, c):
    with pytest.raises(ParameterError):
        pohozaev_ratio(params(alpha, p, c))


def test_identities_hold_for_exact_soliton(wide_grid):
    kdv = params(1.0, 1, 1.1)
    q = exact_soliton_profile(wide_grid, 1.1)

    assert pohozaev_check(q, kdv) < 1e-3
    assert energy_identity_check(q, kdv) < 1e-3


def test_identities_hold_for_computed_wave(kdv_wave, kdv_params):
    assert pohozaev_check(kdv_wave.profile, kdv_params) < 1e-3
    assert energy_identity_check(kdv_wave.profile, kdv_params) < 1e-6


def test_pohozaev_detects_dilation(wide_grid):
    # Растяжение q(1.1x) меняет отношение int|D^{1/2}q|^2 / int q^2 в 1.1 раза
    kdv = params(1.0, 1, 1.1)
    dilated = WaveProfile(wide_grid, exact_soliton(1.1 * wide_grid.nodes, 0.0, 1.1))

    assert pohozaev_check(dilated, kdv) == pytest.approx(0.1 / 2.1, abs=5e-3)


def test_energy_identity_detects_amplitude_change(kdv_wave, kdv_params):
    scaled = WaveProfile(kdv_wave.profile.grid, 1.2 * kdv_wave.profile.values)

    assert energy_identity_check(scaled, kdv_params) == pytest.approx(0.288 / 3.168, rel=1e-3)
    assert pohozaev_check(scaled, kdv_params) < 1e-3


def test_pohozaev_rejects_zero_profile():
    grid = make_grid(16, 4.0)

    with pytest.raises(ParameterError):
        pohozaev_check(WaveProfile(grid, np.zeros(16)), params(1.0, 1, 1.1))
    assert energy_identity_check(WaveProfile(grid, np.zeros(16)), params(1.0, 1, 1.1)) == 0.0


def test_pohozaev_negative_ratio_is_full_defect(kdv_wave):
    # При c < 1 и alpha(p+2) > p отношение отрицательно: тождество невыполнимо
    assert pohozaev_check(kdv_wave.profile, params(1.0, 1, 0.8)) == pytest.approx(1.0)


# ===== IDENTITY SUITE =====

IDENTITY_PAIRS = [(0.6, 1), (0.6, 2), (0.8, 1), (0.8, 2), (1.0, 1), (1.0, 2)]

# Остаток тождества Похожаева определяется обрезанием хвоста |x|^{-(1+alpha)}
# на [-L, L), а не сходимостью итерации
POHOZAEV_FLOOR_REDUCED = {
    (0.6, 1): 3e-2, (0.6, 2): 1e-1,
    (0.8, 1): 1e-2, (0.8, 2): 2e-2,
    (1.0, 1): 1e-3, (1.0, 2): 2e-2,
}
POHOZAEV_FLOOR_DESK = {
    (0.6, 1): 3e-3, (0.6, 2): 1.5e-2,
    (0.8, 1): 1e-3, (0.8, 2): 1e-3,
    (1.0, 1): 1e-3, (1.0, 2): 1e-3,
}


def modulated(profile):
    grid = profile.grid
    return WaveProfile(grid, profile.values * (1.0 + 0.1 * np.cos(np.pi * grid.nodes / grid.half_length)))


@pytest.mark.parametrize("alpha, p", IDENTITY_PAIRS)
def test_identity_suite_on_reduced_grid(solved_wave, alpha, p):
    wave_params = params(alpha, p, 1.1)
    profile = solved_wave(alpha, p).profile

    assert pohozaev_check(profile, wave_params) < POHOZAEV_FLOOR_REDUCED[(alpha, p)]
    assert energy_identity_check(profile, wave_params) < 1e-6
    assert energy_identity_check(modulated(profile), wave_params) >= 1e-2

    scaled = WaveProfile(profile.grid, 1.2 * profile.values)
    expected = abs(1.0 - 1.2 ** p) / (1.0 + 1.2 ** p)
    assert energy_identity_check(scaled, wave_params) == pytest.approx(expected, rel=1e-3)


@pytest.mark.parametrize("alpha, p", [(0.8, 1), (0.8, 2), (1.0, 1), (1.0, 2)])
def test_pohozaev_detects_dilation_of_solved_wave(solved_wave, alpha, p):
    profile = solved_wave(alpha, p).profile
    dilated = resample(profile, 1.1 * profile.grid.nodes)

    assert pohozaev_check(dilated, params(alpha, p, 1.1)) >= 1e-2


def test_pohozaev_floor_shrinks_with_domain(solved_wave):
    wave_params = params(0.6, 1, 1.1)
    half_grid = make_grid(2 ** 12, 256.0)
    narrow = solve(default_seed(half_grid, wave_params), wave_params)
    assert narrow.converged

    wide_defect = pohozaev_check(solved_wave(0.6, 1).profile, wave_params)

    assert wide_defect < 0.6 * pohozaev_check(narrow.profile, wave_params)


@pytest.mark.slow
@pytest.mark.parametrize("alpha, p", IDENTITY_PAIRS)
def test_identity_suite_at_desk_scale(alpha, p):
    grid = make_grid(2 ** 16, 2048.0)
    wave_params = params(alpha, p, 1.1)
    result = solve(default_seed(grid, wave_params), wave_params)
    profile = result.profile

    assert result.converged
    assert pohozaev_check(profile, wave_params) < POHOZAEV_FLOOR_DESK[(alpha, p)]
    assert energy_identity_check(profile, wave_params) < 1e-6
    assert energy_identity_check(modulated(profile), wave_params) >= 1e-2

    dilated = WaveProfile(grid, np.interp(1.1 * grid.nodes, grid.nodes, profile.values, left=0.0, right=0.0))
    assert pohozaev_check(dilated, wave_params) >= 1e-2


# ===== WEINSTEIN =====

@given(scale=st.floats(min_value=0.1, max_value=10.0))
def test_weinstein_amplitude_invariant(kdv_wave, scale):
    profile = kdv_wave.profile
    scaled = WaveProfile(profile.grid, scale * profile.values)

    assert weinstein_functional(scaled, 1.0, 1) == pytest.approx(weinstein_functional(profile, 1.0, 1), rel=1e-9)


def test_weinstein_dilation_invariant(wide_grid):
    base = WaveProfile(wide_grid, np.exp(-(wide_grid.nodes / 4.0) ** 2))
    dilated = WaveProfile(wide_grid, np.exp(-(wide_grid.nodes / 6.0) ** 2))

    assert weinstein_functional(dilated, 0.8, 2) == pytest.approx(weinstein_functional(base, 0.8, 2), rel=1e-2)


def test_weinstein_zero_profile():
    grid = make_grid(16, 4.0)

    with pytest.raises(ParameterError):
        weinstein_functional(WaveProfile(grid, np.zeros(16)), 1.0, 1)


# ===== GROUND STATE SCALING =====

@pytest.fixture(scope="module")
def scaling_grid():
    return make_grid(2 ** 11, 256.0)


def test_ground_state_scaling_gives_exact_soliton(scaling_grid):
    kdv = params(1.0, 1, 1.1)
    ground = WaveProfile(scaling_grid, 2.0 / (1.0 + scaling_grid.nodes ** 2))

    wave = ground_state_scaling(ground, kdv)

    assert np.allclose(wave.values, exact_soliton(scaling_grid.nodes, 0.0, 1.1), atol=1e-4)


def test_inverse_ground_state_scaling(scaling_grid):
    kdv = params(1.0, 1, 1.1)

    ground = inverse_ground_state_scaling(exact_soliton_profile(scaling_grid, 1.1), kdv)

    core = np.abs(scaling_grid.nodes) < 30.0
    expected = 2.0 / (1.0 + scaling_grid.nodes[core] ** 2)
    assert np.allclose(ground.values[core], expected, atol=1e-4)


@pytest.mark.parametrize("c", [1.0, 0.6, 0.8])
def test_ground_state_scaling_requires_fast_wave(scaling_grid, c):
    ground = WaveProfile(scaling_grid, 2.0 / (1.0 + scaling_grid.nodes ** 2))

    with pytest.raises(ParameterError):
        ground_state_scaling(ground, params(1.0, 1, c))


@given(
    alpha=st.floats(min_value=0.8, max_value=1.5),
    p=st.integers(min_value=1, max_value=4),
    c=st.floats(min_value=1.2, max_value=2.0),
)
def test_ground_state_scaling_roundtrip(scaling_grid, alpha, p, c):
    ground = WaveProfile(scaling_grid, np.exp(-scaling_grid.nodes ** 2 / 2.0))
    wave_params = params(alpha, p, c)

    restored = inverse_ground_state_scaling(ground_state_scaling(ground, wave_params), wave_params)

    core = np.abs(scaling_grid.nodes) <= 8.0
    assert np.max(np.abs(restored.values[core] - ground.values[core])) < 1e-10
