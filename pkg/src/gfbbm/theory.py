"""
Аналитические факты об уединённых волнах gfBBM в виде исполнимых проверок:
допустимость параметров, точное решение при alpha = 1, p = 1, тождества
энергии и Похожаева, масштабирование к основному состоянию и функционал
Вайнштейна.
"""

import logging
from typing import Optional, Union

import numpy as np

from gfbbm.exceptions import ParameterError
from gfbbm.models import ModelParams, AdmissibilityTag, AdmissibilityReport
from gfbbm.model import quadratures
from gfbbm.spectral import SpectralGrid, WaveProfile, resample

logger = logging.getLogger(__name__)

LOWER_SPEED = 3.0 / 5.0

ArrayLike = Union[float, np.ndarray]


# ===== ADMISSIBILITY =====

def critical_exponent(alpha: float) -> float:
    """p_max(alpha) = 2 alpha / (1 - alpha) при alpha < 1, иначе бесконечность."""
    if alpha < 1.0:
        return 2.0 * alpha / (1.0 - alpha)
    return float("inf")


def is_supercritical(alpha: float, p: int) -> bool:
    """p >= p_max(alpha) в форме alpha <= p/(p+2); на границе p = p_max сравнение точное."""
    return alpha <= p / (p + 2)


def _primary(findings: list, speed: float) -> AdmissibilityTag:
    # Для c > 1 пункт ii теоремы совпадает с закритической степенью
    if AdmissibilityTag.NONEXIST_CASE_III in findings:
        return AdmissibilityTag.NONEXIST_CASE_III
    if AdmissibilityTag.NONEXIST_CASE_I in findings:
        return AdmissibilityTag.NONEXIST_CASE_I
    if speed > 1.0 and AdmissibilityTag.SUPERCRITICAL_P in findings:
        return AdmissibilityTag.SUPERCRITICAL_P
    for tag in (
        AdmissibilityTag.NONEXIST_CASE_II,
        AdmissibilityTag.SUPERCRITICAL_P,
        AdmissibilityTag.NO_POSITIVE_WAVE,
        AdmissibilityTag.HAMILTONIAN_ILL_DEFINED,
    ):
        if tag in findings:
            return tag
    return AdmissibilityTag.OK


def validate_params(params: ModelParams) -> AdmissibilityReport:
    """
    Проверить параметры по теореме о несуществовании, условию положительности
    и критическому показателю.

    Сравнения на границах (c = 3/5, c = 1, alpha = p/(p+2), p = p_max) точные.

    Args:
        params: Параметры модели (alpha в (0, 2), p >= 1 гарантирует модель)

    Returns:
        AdmissibilityReport со всеми применимыми выводами
    """
    alpha, p, c = params.alpha, params.nonlinearity, params.speed
    threshold = p / (p + 2)
    findings = []

    case_iii = c == LOWER_SPEED or c == 1.0
    case_i = LOWER_SPEED < c < 1.0 and alpha >= threshold
    case_ii = (c < LOWER_SPEED or c > 1.0) and alpha <= threshold
    if case_iii:
        findings.append(AdmissibilityTag.NONEXIST_CASE_III)
    if case_i:
        findings.append(AdmissibilityTag.NONEXIST_CASE_I)
    if case_ii:
        findings.append(AdmissibilityTag.NONEXIST_CASE_II)
    if c <= 1.0 and not (case_i or case_ii or case_iii):
        findings.append(AdmissibilityTag.NO_POSITIVE_WAVE)
    if is_supercritical(alpha, p):
        findings.append(AdmissibilityTag.SUPERCRITICAL_P)
    if alpha < threshold:
        findings.append(AdmissibilityTag.HAMILTONIAN_ILL_DEFINED)
    if not findings:
        findings.append(AdmissibilityTag.OK)

    report = AdmissibilityReport(
        params=params,
        admissible=findings == [AdmissibilityTag.OK],
        reasons=findings,
        primary=_primary(findings, c),
    )
    logger.debug(f"Admissibility of ({params.label()}): {[tag.value for tag in findings]}")
    return report


# ===== CLOSED FORM =====

def exact_soliton(x: ArrayLike, t: float, c: float) -> ArrayLike:
    """
    Точная уединённая волна при alpha = 1, p = 1:

        Q(x, t) = 4(c-1) / (1 + [4(c-1)/(5c-3)]^2 (x - ct)^2)

    Raises:
        ParameterError: c <= 3/5
    """
    if c <= LOWER_SPEED:
        raise ParameterError(f"Exact soliton requires c > 3/5, got {c}", {"speed": c})
    beta = 4.0 * (c - 1.0) / (5.0 * c - 3.0)
    xi = np.asarray(x, dtype=float) - c * t
    value = 4.0 * (c - 1.0) / (1.0 + (beta * xi) ** 2)
    return float(value) if np.ndim(value) == 0 else value


def exact_soliton_profile(grid: SpectralGrid, c: float, t: float = 0.0) -> WaveProfile:
    """Точное решение в узлах сетки."""
    return WaveProfile(grid, exact_soliton(grid.nodes, t, c))


# ===== IDENTITIES =====

def pohozaev_ratio(params: ModelParams) -> float:
    """
    4p(c-1) / ((5c-3)(alpha(p+2) - p)).

    Raises:
        ParameterError: alpha(p+2) = p или c = 3/5 (отношение не определено)
    """
    alpha, p, c = params.alpha, params.nonlinearity, params.speed
    denominator = (5.0 * c - 3.0) * (alpha * (p + 2) - p)
    if denominator == 0:
        raise ParameterError(
            "Pohozaev ratio is singular for alpha(p+2) = p or c = 3/5",
            {"alpha": alpha, "p": p, "c": c}
        )
    return 4.0 * p * (c - 1.0) / denominator


def pohozaev_check(q: WaveProfile, params: ModelParams) -> float:
    """
    Относительный дефект тождества Похожаева

        int |D^{alpha/2} Q|^2 dx = ratio * int Q^2 dx.

    Returns:
        |lhs - ratio*rhs| / (lhs + ratio*rhs)

    Raises:
        ParameterError: Нулевой профиль или сингулярное отношение
    """
    ratio = pohozaev_ratio(params)
    if q.sup_norm() == 0:
        raise ParameterError("Pohozaev check requires a non-zero profile")
    mass, kinetic, _ = quadratures(q, params.alpha, params.nonlinearity)
    lhs, rhs = kinetic, ratio * mass
    scale = abs(lhs) + abs(rhs)
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def energy_identity_check(q: WaveProfile, params: ModelParams) -> float:
    """
    Относительный дефект тождества

        (5c/4 - 3/4) int |D^{alpha/2} Q|^2 + (c-1) int Q^2 = 1/2 int Q^{p+2}.

    Для нулевого профиля тождество вырождается в 0 = 0, дефект 0.
    """
    pohozaev_ratio(params)
    c = params.speed
    mass, kinetic, potential = quadratures(q, params.alpha, params.nonlinearity)
    lhs = (1.25 * c - 0.75) * kinetic + (c - 1.0) * mass
    rhs = 0.5 * potential
    scale = abs(lhs) + abs(rhs)
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def weinstein_functional(u: WaveProfile, alpha: float, p: int) -> float:
    """
    Функционал Вайнштейна

        J(u) = (int |u|^{p+2})^{-1} * (int |D^{alpha/2} u|^2)^{p/(2 alpha)}
               * (int u^2)^{p(alpha-1)/(2 alpha) + 1}.

    Только диагностика, не минимизируется.
    """
    mass, kinetic, potential = quadratures(u, alpha, p, absolute=True)
    if potential == 0:
        raise ParameterError("Weinstein functional is undefined for the zero profile")
    return kinetic ** (p / (2.0 * alpha)) * mass ** (p * (alpha - 1.0) / (2.0 * alpha) + 1.0) / potential


# ===== GROUND STATE SCALING =====

def _scaling_factors(params: ModelParams):
    c = params.speed
    if c == LOWER_SPEED or c == 1.0:
        raise ParameterError(f"Ground-state scaling is undefined at c = {c}", {"speed": c})
    amplitude = 2.0 * (c - 1.0)
    beta = 4.0 * (c - 1.0) / (5.0 * c - 3.0)
    if amplitude <= 0 or beta <= 0:
        raise ParameterError(f"Ground-state scaling requires c > 1, got {c}", {"speed": c})
    return amplitude ** (1.0 / params.nonlinearity), beta ** (1.0 / params.alpha)


def ground_state_scaling(
    q_normalized: WaveProfile,
    params: ModelParams,
    grid: Optional[SpectralGrid] = None
) -> WaveProfile:
    """
    Перевести основное состояние D^alpha Q + Q - Q^{p+1} = 0 в уединённую волну:

        Q_c(xi) = (2(c-1))^{1/p} Q((4(c-1)/(5c-3))^{1/alpha} xi).

    Args:
        q_normalized: Основное состояние на достаточно широкой сетке
        params: Параметры (c > 1)
        grid: Целевая сетка (по умолчанию сетка входа)

    Returns:
        Профиль Q_c, полученный спектральной интерполяцией
    """
    amplitude, stretch = _scaling_factors(params)
    target = grid or q_normalized.grid
    resampled = resample(q_normalized, stretch * target.nodes, target)
    return WaveProfile(target, amplitude * resampled.values)


def inverse_ground_state_scaling(
    q_wave: WaveProfile,
    params: ModelParams,
    grid: Optional[SpectralGrid] = None
) -> WaveProfile:
    """Обратное к ground_state_scaling преобразование."""
    amplitude, stretch = _scaling_factors(params)
    target = grid or q_wave.grid
    resampled = resample(q_wave, target.nodes / stretch, target)
    return WaveProfile(target, resampled.values / amplitude)
