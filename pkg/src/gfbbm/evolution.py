"""
Эволюция во времени: ОДУ для коэффициентов Фурье

    (U_k)_t = [-i kappa U_k - (i kappa / 2) (U^{p+1})_k - 3/4 i kappa |kappa|^alpha U_k]
              / (1 + 5/4 |kappa|^alpha)

и классический метод Рунге-Кутты 4-го порядка в спектральном пространстве.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from gfbbm.exceptions import DivergenceError, ParameterError
from gfbbm.model import conserved_quantities, power_values
from gfbbm.models import ModelParams, ConservedSnapshot, TimeGrid
from gfbbm.spectral import SpectralGrid, Spectrum, WaveProfile

logger = logging.getLogger(__name__)

# Порог расхождения: sup-норма выше DIVERGENCE_FACTOR * начальной
DIVERGENCE_FACTOR = 1e6

# Ниже этого |I(0)| дрейф считается абсолютным
_DRIFT_FLOOR = 1e-12

StepCallback = Callable[[int, int], None]


@dataclass
class EvolutionTrace:
    """
    Результат эволюции.

    Attributes:
        times: Фактические моменты снимков (ближайшие узлы сетки по времени)
        snapshots: Профили в эти моменты, все на одной сетке
        drift_times: Моменты, в которые вычислялся дрейф
        i0_drift, i1_drift, hamiltonian_drift: Относительный дрейф (I(t) - I(0))/|I(0)|
        initial: Значения сохраняющихся величин при t = 0
        steps_taken: Сколько шагов выполнено
        completed: False, если эволюция прервана расхождением
    """
    times: np.ndarray
    snapshots: List[WaveProfile]
    drift_times: np.ndarray
    i0_drift: np.ndarray
    i1_drift: np.ndarray
    hamiltonian_drift: np.ndarray
    initial: ConservedSnapshot
    steps_taken: int = 0
    completed: bool = True
    requested_times: List[float] = field(default_factory=list)

    @property
    def final(self) -> WaveProfile:
        return self.snapshots[-1]

    def max_drift(self) -> Dict[str, float]:
        """Максимальный модуль дрейфа по каждой величине (0 при пустом ряде)."""
        def peak(series: np.ndarray) -> float:
            return float(np.max(np.abs(series))) if series.size else 0.0

        return {
            "i0": peak(self.i0_drift),
            "i1": peak(self.i1_drift),
            "hamiltonian": peak(self.hamiltonian_drift),
        }


# ===== RIGHT-HAND SIDE =====

@lru_cache(maxsize=16)
def _linear_operators(grid: SpectralGrid, alpha: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    derivative = grid.derivative_multiplier()
    fractional = grid.multiplier(alpha)
    dispersive = -derivative * (1.0 + 0.75 * fractional)
    inverse_mass = 1.0 / (1.0 + 1.25 * fractional)
    for array in (derivative, dispersive, inverse_mass):
        array.setflags(write=False)
    return derivative, dispersive, inverse_mass


def _rhs_coeffs(grid: SpectralGrid, params: ModelParams, coeffs: np.ndarray) -> np.ndarray:
    derivative, dispersive, inverse_mass = _linear_operators(grid, params.alpha)
    values = grid.inverse(coeffs)
    power_hat = grid.transform(power_values(grid, values, params.nonlinearity))
    result = (dispersive * coeffs - 0.5 * derivative * power_hat) * inverse_mass
    if not np.all(np.isfinite(result)):
        raise DivergenceError("Right-hand side became non-finite", {"params": params.label()})
    return result


def rhs(spectrum: Spectrum, params: ModelParams) -> Spectrum:
    """
    Правая часть спектральной ОДУ.

    Нелинейный член вычисляется псевдоспектрально: обратное преобразование,
    поточечная степень, прямое преобразование. Гармоника Найквиста
    производной обнулена.

    Raises:
        DivergenceError: Нефинитное промежуточное значение
    """
    return Spectrum(spectrum.grid, _rhs_coeffs(spectrum.grid, params, spectrum.coeffs))


def _rk4(grid: SpectralGrid, params: ModelParams, coeffs: np.ndarray, dt: float) -> np.ndarray:
    k1 = _rhs_coeffs(grid, params, coeffs)
    k2 = _rhs_coeffs(grid, params, coeffs + 0.5 * dt * k1)
    k3 = _rhs_coeffs(grid, params, coeffs + 0.5 * dt * k2)
    k4 = _rhs_coeffs(grid, params, coeffs + dt * k3)
    return coeffs + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(spectrum: Spectrum, params: ModelParams, dt: float) -> Spectrum:
    """
    Один шаг классического RK4.

    Допускается любой конечный dt: dt = 0 даёт тождество, dt < 0 шаг назад.

    Raises:
        ParameterError: Нефинитный dt
        DivergenceError: Расхождение в правой части
    """
    if not np.isfinite(dt):
        raise ParameterError(f"Time step must be finite, got {dt}")
    if dt == 0:
        return spectrum
    return Spectrum(spectrum.grid, _rk4(spectrum.grid, params, spectrum.coeffs, dt))


# ===== EVOLVE =====

def _drift(value: float, reference: float) -> float:
    if abs(reference) > _DRIFT_FLOOR:
        return (value - reference) / abs(reference)
    return value - reference


def _snapshot_steps(time: TimeGrid, output_times: Sequence[float]) -> List[Tuple[float, int]]:
    requested = sorted(set(float(t) for t in output_times))
    steps = []
    for t in requested:
        if t < 0 or t > time.t_final * (1 + 1e-12):
            raise ParameterError(
                f"Output time {t} is outside [0, {time.t_final}]",
                {"output_time": t, "t_final": time.t_final}
            )
        step = int(round(t / time.dt)) if time.n_steps else 0
        steps.append((t, min(max(step, 0), time.n_steps)))
    return steps


def evolve(
    initial: WaveProfile,
    params: ModelParams,
    time: TimeGrid,
    output_times: Optional[Sequence[float]] = None,
    drift_stride: int = 1,
    on_step: Optional[StepCallback] = None
) -> EvolutionTrace:
    """
    Проинтегрировать уравнение gfBBM на [0, T].

    Args:
        initial: Начальный профиль
        params: Параметры модели
        time: Сетка по времени (T = 0 допустимо)
        output_times: Моменты снимков из [0, T]; по умолчанию {0, T}
        drift_stride: Дрейф считается на каждом drift_stride-м шаге и на последнем
        on_step: Вызывается после каждого шага как on_step(m, M)

    Returns:
        EvolutionTrace

    Raises:
        ParameterError: Моменты вне [0, T] или неположительный шаг дрейфа
        DivergenceError: sup-норма выросла в 1e6 раз или стала нефинитной;
            exc.partial содержит трассу до момента сбоя
    """
    if drift_stride < 1:
        raise ParameterError(f"drift_stride must be >= 1, got {drift_stride}")
    grid = initial.grid
    if output_times is None or len(output_times) == 0:
        output_times = [0.0, time.t_final]
    plan = _snapshot_steps(time, output_times)
    wanted: Dict[int, List[float]] = {}
    for t, step in plan:
        wanted.setdefault(step, []).append(t)

    reference = conserved_quantities(initial, params)
    limit = DIVERGENCE_FACTOR * max(initial.sup_norm(), 1e-300)
    captured: Dict[float, Tuple[float, WaveProfile]] = {}
    drift_times: List[float] = []
    drifts: Dict[str, List[float]] = {"i0": [], "i1": [], "hamiltonian": []}

    def build_trace(steps_taken: int, completed: bool) -> EvolutionTrace:
        ordered = [captured[t] for t, _ in plan if t in captured]
        return EvolutionTrace(
            times=np.array([actual for actual, _ in ordered]),
            snapshots=[profile for _, profile in ordered],
            drift_times=np.array(drift_times),
            i0_drift=np.array(drifts["i0"]),
            i1_drift=np.array(drifts["i1"]),
            hamiltonian_drift=np.array(drifts["hamiltonian"]),
            initial=reference,
            steps_taken=steps_taken,
            completed=completed,
            requested_times=[t for t, _ in plan if t in captured],
        )

    for t in wanted.get(0, []):
        captured[t] = (0.0, initial)

    logger.info(
        f"Evolve {params.label()}: N={grid.n_points}, L={grid.half_length:g}, "
        f"T={time.t_final:g}, M={time.n_steps}, dt={time.dt:g}"
    )

    coeffs = grid.transform(initial.values)
    dt = time.dt
    report_every = max(1, time.n_steps // 10)
    for m in range(1, time.n_steps + 1):
        try:
            coeffs = _rk4(grid, params, coeffs, dt)
            values = grid.inverse(coeffs)
            sup = float(np.max(np.abs(values)))
            if not np.isfinite(sup) or sup > limit:
                raise DivergenceError(
                    "Solution blew up during time stepping",
                    {"sup_norm": sup, "limit": limit}
                )
        except DivergenceError as exc:
            exc.details.setdefault("step", m)
            exc.details.setdefault("time", m * dt)
            exc.partial = build_trace(m - 1, completed=False)
            logger.error(f"Evolution diverged at step {m} (t={m * dt:g}): {exc.message}")
            raise

        profile = None
        if m in wanted:
            profile = WaveProfile(grid, values)
            for t in wanted[m]:
                captured[t] = (m * dt, profile)
        if m % drift_stride == 0 or m == time.n_steps:
            current = conserved_quantities(profile or WaveProfile(grid, values), params)
            drift_times.append(m * dt)
            drifts["i0"].append(_drift(current.i0, reference.i0))
            drifts["i1"].append(_drift(current.i1, reference.i1))
            drifts["hamiltonian"].append(_drift(current.hamiltonian, reference.hamiltonian))

        if m % report_every == 0:
            logger.debug(f"step {m}/{time.n_steps}, t={m * dt:g}, sup={sup:.6g}")
        if on_step is not None:
            on_step(m, time.n_steps)

    trace = build_trace(time.n_steps, completed=True)
    peaks = trace.max_drift()
    logger.info(f"Evolution done: max |dI0|={peaks['i0']:.3e}, max |dI1|={peaks['i1']:.3e}")
    return trace
