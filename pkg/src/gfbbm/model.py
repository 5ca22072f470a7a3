"""
Операторы уравнения gfBBM

    u_t + u_x + 1/2 (u^{p+1})_x + 3/4 D^alpha u_x + 5/4 D^alpha u_t = 0:

невязка уравнения бегущей волны и сохраняющиеся величины I_0, I_1, H.
"""

import logging
from typing import Tuple

import numpy as np

from gfbbm.exceptions import DivergenceError, ParameterError
from gfbbm.models import ModelParams, ConservedSnapshot
from gfbbm.spectral import SpectralGrid, WaveProfile, apply_fractional

logger = logging.getLogger(__name__)


def linear_symbol(grid: SpectralGrid, params: ModelParams) -> np.ndarray:
    """
    Символ линейной части уравнения бегущей волны.

    l(kappa) = (5c/4 - 3/4)|kappa|^alpha + c - 1; при c > 1 строго положителен.
    """
    c = params.speed
    return (1.25 * c - 0.75) * grid.multiplier(params.alpha) + (c - 1.0)


def power_values(grid: SpectralGrid, values: np.ndarray, p: int) -> np.ndarray:
    """Поточечная степень u^{p+1} над массивом (с усечением 2/3, если оно включено)."""
    with np.errstate(over="ignore", invalid="ignore"):
        result = values ** (p + 1)
    if not np.all(np.isfinite(result)):
        raise DivergenceError(
            f"Nonlinear term u^{p + 1} overflowed",
            {"sup_norm": float(np.max(np.abs(values))), "p": p}
        )
    if grid.dealias:
        result = grid.inverse(grid.transform(result) * grid.dealias_mask)
    return result


def nonlinear_power(u: WaveProfile, p: int) -> WaveProfile:
    """
    Поточечная степень u^{p+1}.

    Raises:
        ParameterError: p < 1
        DivergenceError: Переполнение до нефинитных значений
    """
    if p < 1:
        raise ParameterError(f"Nonlinearity must be >= 1, got {p}")
    return WaveProfile(u.grid, power_values(u.grid, u.values, p))


def residual_values(
    grid: SpectralGrid,
    params: ModelParams,
    values: np.ndarray,
    fractional: np.ndarray,
    power: np.ndarray
) -> np.ndarray:
    """
    SQ = (3/4 - 5c/4) D^alpha Q - (c - 1) Q + 1/2 Q^{p+1}.

    Общая точка вычисления для residual_operator и монитора RES(n)
    решателя: оба дают побитово одинаковый результат.
    """
    c = params.speed
    return (0.75 - 1.25 * c) * fractional - (c - 1.0) * values + 0.5 * power


def residual_operator(q: WaveProfile, params: ModelParams) -> WaveProfile:
    """
    Невязка уравнения уединённой волны; ноль на точном решении.

    Args:
        q: Профиль Q
        params: Параметры модели

    Returns:
        Профиль SQ в узлах сетки
    """
    grid = q.grid
    fractional = apply_fractional(q, params.alpha).values
    power = power_values(grid, q.values, params.nonlinearity)
    return WaveProfile(grid, residual_values(grid, params, q.values, fractional, power))


def quadratures(u: WaveProfile, alpha: float, p: int, absolute: bool = False) -> Tuple[float, float, float]:
    """
    Квадратуры (int u^2, int |D^{alpha/2} u|^2, int u^{p+2}) на периодической сетке.

    При absolute=True последний интеграл берётся от |u|^{p+2}.

    Raises:
        DivergenceError: Переполнение u^{p+2}
    """
    grid = u.grid
    half = apply_fractional(u, alpha / 2.0).values
    base = np.abs(u.values) if absolute else u.values
    with np.errstate(over="ignore", invalid="ignore"):
        potential = base ** (p + 2)
    if not np.all(np.isfinite(potential)):
        raise DivergenceError("Hamiltonian density overflowed", {"p": p})
    return grid.integrate(u.values ** 2), grid.integrate(half ** 2), grid.integrate(potential)


def conserved_quantities(u: WaveProfile, params: ModelParams) -> ConservedSnapshot:
    """
    Сохраняющиеся величины

        I_0 = int u dx,
        I_1 = int (u^2 + 5/4 |D^{alpha/2} u|^2) dx,
        H   = 1/2 int (u^2 + u^{p+2}/(p+2) + 3/4 |D^{alpha/2} u|^2) dx,

    квадратурой прямоугольников на периодической сетке.
    """
    p = params.nonlinearity
    mass, kinetic, potential = quadratures(u, params.alpha, p)
    return ConservedSnapshot(
        i0=u.grid.integrate(u.values),
        i1=mass + 1.25 * kinetic,
        hamiltonian=0.5 * (mass + potential / (p + 2) + 0.75 * kinetic),
    )
