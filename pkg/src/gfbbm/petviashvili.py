"""
Итерация Петвиашвили для уединённых волн gfBBM.

Неподвижная точка l(kappa) Q^(kappa) = 1/2 (Q^{p+1})^(kappa) ищется итерацией

    Q^_{n+1} = M_n^nu / (2 l(kappa)) * (Q_n^{p+1})^,

где стабилизирующий множитель M_n не даёт итерациям уйти в ноль или разойтись.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from gfbbm.exceptions import (
    DegenerateIterateError,
    DivergenceError,
    InadmissibleParametersError,
    ParameterError,
    SpectralSymmetryError,
)
from gfbbm.model import linear_symbol, power_values, residual_values
from gfbbm.models import ModelParams, SolverConfig, IterationRecord
from gfbbm.spectral import SpectralGrid, WaveProfile
from gfbbm.theory import validate_params

logger = logging.getLogger(__name__)

DEGENERATE_DENOMINATOR = 1e-300


@dataclass
class SolverResult:
    """Результат решателя: профиль, полная история мониторов, флаг сходимости."""
    profile: WaveProfile
    history: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0

    @property
    def final(self) -> Optional[IterationRecord]:
        return self.history[-1] if self.history else None


# ===== STABILIZING FACTOR =====

def _factor(symbol: np.ndarray, q_hat: np.ndarray, power_hat: np.ndarray) -> float:
    numerator = np.sum(symbol * (q_hat.real ** 2 + q_hat.imag ** 2))
    denominator = 0.5 * np.sum(power_hat * np.conj(q_hat))
    if abs(denominator) < DEGENERATE_DENOMINATOR:
        raise DegenerateIterateError(
            "Stabilizing factor denominator vanished",
            {"denominator": abs(denominator)}
        )
    if abs(denominator.imag) > 1e-10 * abs(denominator):
        raise SpectralSymmetryError(
            "Stabilizing factor denominator is not real",
            {"real": denominator.real, "imag": denominator.imag}
        )
    return float(numerator / denominator.real)


def stabilizing_factor(q: WaveProfile, params: ModelParams) -> float:
    """
    Стабилизирующий множитель

        M = sum_k l(kappa_k) |Q^(k)|^2 / sum_k 1/2 (Q^{p+1})^(k) conj(Q^(k)).

    Мера интегралов одинакова в числителе и знаменателе и сокращается.

    Raises:
        DegenerateIterateError: Знаменатель меньше 1e-300 по модулю
    """
    grid = q.grid
    q_hat = grid.transform(q.values)
    power_hat = grid.transform(power_values(grid, q.values, params.nonlinearity))
    return _factor(linear_symbol(grid, params), q_hat, power_hat)


def _next_values(
    grid: SpectralGrid,
    symbol: np.ndarray,
    factor: float,
    nu: float,
    power_hat: np.ndarray
) -> np.ndarray:
    if factor <= 0:
        raise DivergenceError(
            "Stabilizing factor is not positive",
            {"factor": factor}
        )
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        coeffs = factor ** nu * power_hat / (2.0 * symbol)
    if not np.all(np.isfinite(coeffs)):
        raise DivergenceError(
            "Iterate became non-finite (resonant symbol or overflow)",
            {"factor": factor}
        )
    return grid.inverse(coeffs)


def iterate_once(q: WaveProfile, params: ModelParams, nu: float) -> WaveProfile:
    """
    Один шаг итерации Петвиашвили.

    Args:
        q: Текущее приближение
        params: Параметры модели
        nu: Показатель стабилизирующего множителя

    Returns:
        Следующее приближение

    Raises:
        DegenerateIterateError: Нулевой профиль
        DivergenceError: Нефинитные значения
    """
    grid = q.grid
    symbol = linear_symbol(grid, params)
    q_hat = grid.transform(q.values)
    power_hat = grid.transform(power_values(grid, q.values, params.nonlinearity))
    factor = _factor(symbol, q_hat, power_hat)
    return WaveProfile(grid, _next_values(grid, symbol, factor, nu, power_hat))


# ===== SOLVER =====

def default_seed(grid: SpectralGrid, params: ModelParams) -> WaveProfile:
    """
    Начальное приближение A exp(-x^2/w^2) с масштабами волны alpha = 1:

        A = 4(c-1),  w = (5c-3) / (4(c-1)).
    """
    c = params.speed
    if c == 1.0 or c == 0.6:
        raise ParameterError(f"Default seed is undefined at c = {c}", {"speed": c})
    amplitude = 4.0 * abs(c - 1.0)
    width = abs(5.0 * c - 3.0) / (4.0 * abs(c - 1.0))
    return WaveProfile(grid, amplitude * np.exp(-(grid.nodes / width) ** 2))


def solve(
    initial: WaveProfile,
    params: ModelParams,
    config: Optional[SolverConfig] = None,
    force: bool = False
) -> SolverResult:
    """
    Итерировать до Error(n) <= tol_increment и RES(n) <= tol_residual.

    Args:
        initial: Ненулевое начальное приближение
        params: Параметры модели
        config: Пороги и показатель nu (по умолчанию SolverConfig())
        force: Запускать и для недопустимых параметров

    Returns:
        SolverResult с полной историей в любом случае

    Raises:
        InadmissibleParametersError: Параметры недопустимы и force не задан
        DivergenceError: Нефинитная итерация; partial содержит историю
    """
    config = config or SolverConfig()
    report = validate_params(params)
    if not report.admissible:
        if not force:
            raise InadmissibleParametersError(
                f"No positive solitary wave for {params.label()}: {report.primary.value}",
                report,
                {"reasons": [tag.value for tag in report.reasons]}
            )
        logger.warning(f"Solving inadmissible parameters ({params.label()}) on request")

    grid = initial.grid
    p = params.nonlinearity
    nu = config.resolve_nu(p)
    symbol = linear_symbol(grid, params)
    fractional_symbol = grid.multiplier(params.alpha)

    q = initial.values
    q_hat = grid.transform(q)
    power_hat = grid.transform(power_values(grid, q, p))
    history: List[IterationRecord] = []
    converged = False

    logger.info(f"Petviashvili solve: {params.label()}, N={grid.n_points}, L={grid.half_length:g}, nu={nu:g}")

    for n in range(1, config.max_iterations + 1):
        try:
            factor = _factor(symbol, q_hat, power_hat)
            new_q = _next_values(grid, symbol, factor, nu, power_hat)
            new_hat = grid.transform(new_q)
            new_power = power_values(grid, new_q, p)
            fractional = grid.inverse(fractional_symbol * new_hat)
        except DivergenceError as exc:
            exc.details.setdefault("iteration", n)
            exc.partial = SolverResult(WaveProfile(grid, q), history, False, n - 1)
            logger.error(f"Petviashvili diverged at iteration {n}: {exc.message}")
            raise

        residual = residual_values(grid, params, new_q, fractional, new_power)
        record = IterationRecord(
            iteration=n,
            increment_error=float(np.max(np.abs(new_q - q))),
            factor_error=abs(1.0 - factor),
            residual_error=float(np.max(np.abs(residual))),
        )
        history.append(record)
        logger.debug(
            f"n={n}: Error={record.increment_error:.3e} "
            f"|1-M|={record.factor_error:.3e} RES={record.residual_error:.3e}"
        )

        q, q_hat = new_q, new_hat
        power_hat = grid.transform(new_power)

        if record.increment_error <= config.tol_increment and record.residual_error <= config.tol_residual:
            converged = True
            break

    result = SolverResult(WaveProfile(grid, q), history, converged, len(history))
    if converged:
        logger.info(f"Converged in {result.iterations_used} iterations, RES={result.final.residual_error:.3e}")
    else:
        logger.warning(f"No convergence after {result.iterations_used} iterations")
    return result
