"""
Периодическая сетка, дискретное преобразование Фурье и мультипликаторы.

Коэффициенты хранятся в порядке numpy.fft (k = 0, 1, ..., N/2-1, -N/2, ..., -1),
волновые числа физические: kappa_k = k*pi/L. Нормировка 1/N стоит на прямом
преобразовании:

    c_k = (1/N) * sum_j u_j * exp(-i*kappa_k*x_j),   u_j = sum_k c_k * exp(i*kappa_k*x_j)
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from gfbbm.exceptions import ParameterError, SpectralSymmetryError

logger = logging.getLogger(__name__)

# Относительный порог мнимого остатка при обратном преобразовании
IMAG_TOLERANCE = 1e-10

# Ограничение на размер блока при прямом суммировании ряда Фурье
_RESAMPLE_BLOCK = 1 << 22


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SpectralGrid:
    """
    Равномерная периодическая сетка на [-L, L) и её набор волновых чисел.

    Attributes:
        n_points: Число узлов N (чётное, не меньше 4)
        half_length: Полудлина области L
        dealias: Усекать спектр нелинейных членов по правилу 2/3
    """

    n_points: int
    half_length: float
    dealias: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points:
            raise ParameterError(f"n_points must be an integer, got {self.n_points!r}")
        if self.n_points < 4 or self.n_points % 2:
            raise ParameterError(
                f"n_points must be even and >= 4, got {self.n_points}",
                {"n_points": self.n_points}
            )
        if not np.isfinite(self.half_length) or self.half_length <= 0:
            raise ParameterError(
                f"half_length must be positive, got {self.half_length}",
                {"half_length": self.half_length}
            )
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def spacing(self) -> float:
        """Шаг сетки 2L/N."""
        return 2.0 * self.half_length / self.n_points

    @property
    def length(self) -> float:
        """Период 2L."""
        return 2.0 * self.half_length

    @cached_property
    def nodes(self) -> np.ndarray:
        return _readonly(-self.half_length + self.spacing * np.arange(self.n_points))

    @cached_property
    def modes(self) -> np.ndarray:
        """Целые номера гармоник k в порядке numpy.fft."""
        return _readonly(np.rint(np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)).astype(np.int64))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return _readonly(self.modes * (np.pi / self.half_length))

    @property
    def nyquist_index(self) -> int:
        """Позиция непарной гармоники k = -N/2."""
        return self.n_points // 2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Маска гармоник, сохраняемых правилом 2/3."""
        return _readonly(np.abs(self.modes) < self.n_points / 3.0)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i*kappa_k*L) = (-1)^k: сдвиг начала отсчёта из 0 в -L
        return _readonly(np.where(self.modes % 2 == 0, 1.0, -1.0))

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Прямое ДПФ массива значений в узлах."""
        return self._phase * np.fft.fft(values) / self.n_points

    def inverse(self, coeffs: np.ndarray, check: bool = True) -> np.ndarray:
        """
        Обратное ДПФ с отбрасыванием мнимого остатка.

        Args:
            coeffs: Коэффициенты в порядке numpy.fft
            check: Проверять, что мнимый остаток пренебрежимо мал

        Returns:
            Вещественные значения в узлах

        Raises:
            SpectralSymmetryError: Если мнимая часть не пренебрежима
        """
        values = np.fft.ifft(self._phase * coeffs) * self.n_points
        if check:
            residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
            scale = float(np.max(np.abs(values))) if values.size else 0.0
            if residue > IMAG_TOLERANCE * max(scale, 1e-300):
                raise SpectralSymmetryError(
                    "Inverse transform produced a non-negligible imaginary part",
                    {"imag_residue": residue, "scale": scale}
                )
        return values.real.copy()

    def integrate(self, values: np.ndarray) -> float:
        """Квадратура прямоугольников с весом 2L/N."""
        return float(np.sum(values) * self.spacing)

    def multiplier(self, order: float) -> np.ndarray:
        """Символ |kappa|^order; при order = 0 это единица (D^0 = I)."""
        if order < 0:
            raise ParameterError(f"Fractional order must be >= 0, got {order}", {"order": order})
        return np.abs(self.wavenumbers) ** order

    def derivative_multiplier(self) -> np.ndarray:
        """Символ i*kappa с обнулённой гармоникой Найквиста."""
        symbol = 1j * self.wavenumbers
        symbol[self.nyquist_index] = 0.0
        return symbol


@dataclass(frozen=True, eq=False)
class WaveProfile:
    """Вещественное поле, заданное значениями в узлах сетки."""

    grid: SpectralGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise ParameterError(
                f"Profile has shape {values.shape}, grid expects ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("Profile contains non-finite values")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def amplitude(self) -> float:
        """Максимум профиля (амплитуда уединённой волны)."""
        return float(np.max(self.values))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def boundary_value(self) -> float:
        """|u(-L)|: мера усечения медленно убывающего хвоста."""
        return float(abs(self.values[0]))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Коэффициенты Фурье профиля в порядке numpy.fft."""

    grid: SpectralGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != (self.grid.n_points,):
            raise ParameterError(
                f"Spectrum has shape {coeffs.shape}, grid expects ({self.grid.n_points},)"
            )
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    def coefficient(self, k: int) -> complex:
        """Коэффициент гармоники с номером k (-N/2 <= k < N/2)."""
        n = self.grid.n_points
        if not -n // 2 <= k < n // 2:
            raise ParameterError(f"Mode {k} is outside [-{n // 2}, {n // 2})")
        return complex(self.coeffs[k % n])

    def is_conjugate_symmetric(self, tolerance: float = 1e-12) -> bool:
        """Проверить c(-k) = conj(c(k)) с относительным допуском."""
        mirrored = np.conj(self.coeffs[(-self.grid.modes) % self.grid.n_points])
        scale = max(float(np.max(np.abs(self.coeffs))), 1e-300)
        return bool(np.max(np.abs(self.coeffs - mirrored)) <= tolerance * scale)


# ===== OPERATIONS =====

def make_grid(n_points: int, half_length: float, dealias: bool = False) -> SpectralGrid:
    """
    Построить сетку на [-L, L).

    Args:
        n_points: Чётное число узлов, не меньше 4
        half_length: Полудлина L > 0
        dealias: Включить усечение 2/3 для нелинейных членов

    Returns:
        SpectralGrid

    Raises:
        ParameterError: Нечётное или слишком малое N, неположительное L
    """
    return SpectralGrid(n_points=n_points, half_length=half_length, dealias=dealias)


def forward_transform(profile: WaveProfile) -> Spectrum:
    return Spectrum(profile.grid, profile.grid.transform(profile.values))


def inverse_transform(spectrum: Spectrum) -> WaveProfile:
    """
    Обратное преобразование; мнимый остаток выше 1e-10 (относительно) считается ошибкой.

    Raises:
        SpectralSymmetryError: Спектр не соответствует вещественному профилю
    """
    return WaveProfile(spectrum.grid, spectrum.grid.inverse(spectrum.coeffs))


def apply_fractional(profile: WaveProfile, order: float) -> WaveProfile:
    """
    Дробная производная Рисса D^order (символ |kappa|^order).

    Raises:
        ParameterError: Отрицательный порядок
    """
    grid = profile.grid
    symbol = grid.multiplier(order)
    if order == 0:
        return profile
    return WaveProfile(grid, grid.inverse(symbol * grid.transform(profile.values)))


def apply_x_derivative(profile: WaveProfile) -> WaveProfile:
    grid = profile.grid
    return WaveProfile(grid, grid.inverse(grid.derivative_multiplier() * grid.transform(profile.values)))


def resample(profile: WaveProfile, points: np.ndarray, grid: Optional[SpectralGrid] = None) -> WaveProfile:
    """
    Тригонометрическая интерполяция профиля в произвольных точках.

    Точки вне [-L, L) исходной сетки получают значение 0: профиль считается
    локализованным. Стоимость O(N*M), блоками по _RESAMPLE_BLOCK элементов.

    Args:
        profile: Исходный профиль
        points: Точки, в которых вычисляется интерполянт (по одной на узел целевой сетки)
        grid: Целевая сетка (по умолчанию сетка профиля)

    Returns:
        Профиль на целевой сетке
    """
    source = profile.grid
    target = grid or source
    points = np.asarray(points, dtype=float)
    if points.shape != (target.n_points,):
        raise ParameterError(f"Expected {target.n_points} points, got shape {points.shape}")

    coeffs = source.transform(profile.values)
    nyq = source.nyquist_index
    nyquist_coeff = coeffs[nyq].real
    kappa = source.wavenumbers.copy()
    coeffs = coeffs.copy()
    coeffs[nyq] = 0.0

    inside = (points >= -source.half_length) & (points < source.half_length)
    result = np.zeros(target.n_points)
    idx = np.flatnonzero(inside)
    block = max(1, _RESAMPLE_BLOCK // source.n_points)
    for start in range(0, idx.size, block):
        chunk = idx[start:start + block]
        y = points[chunk]
        series = np.exp(1j * np.outer(y, kappa)) @ coeffs
        result[chunk] = series.real + nyquist_coeff * np.cos(kappa[nyq] * y)

    logger.debug(f"Resampled {idx.size}/{target.n_points} points from N={source.n_points}")
    return WaveProfile(target, result)


def translate(profile: WaveProfile, shift: float) -> WaveProfile:
    """
    Периодический сдвиг u(x) -> u(x - shift) умножением на exp(-i*kappa*shift).

    Гармоника Найквиста сдвигается как косинус, чтобы результат остался вещественным.
    """
    grid = profile.grid
    coeffs = grid.transform(profile.values) * np.exp(-1j * grid.wavenumbers * shift)
    nyq = grid.nyquist_index
    coeffs[nyq] = coeffs[nyq].real
    return WaveProfile(grid, grid.inverse(coeffs))


def change_resolution(profile: WaveProfile, grid: SpectralGrid) -> WaveProfile:
    """
    Тот же тригонометрический интерполянт на сетке с той же L и другим N.

    При сгущении спектр дополняется нулями, гармоника Найквиста делится
    поровну между +N/2 и -N/2; при разрежении старшие гармоники отбрасываются.

    Raises:
        ParameterError: Полудлины сеток различаются
    """
    source = profile.grid
    if not np.isclose(source.half_length, grid.half_length, rtol=1e-12, atol=0.0):
        raise ParameterError(
            f"Grids differ in half_length: {source.half_length} vs {grid.half_length}",
            {"source": source.half_length, "target": grid.half_length}
        )
    n_src, n_dst = source.n_points, grid.n_points
    if n_src == n_dst:
        return WaveProfile(grid, profile.values.copy())

    coeffs = source.transform(profile.values)
    half = min(n_src, n_dst) // 2
    result = np.zeros(n_dst, dtype=complex)
    result[:half] = coeffs[:half]
    result[n_dst - half + 1:] = coeffs[n_src - half + 1:]
    if n_src > n_dst:
        # Гармоники +half и -half совпадают в узлах новой сетки
        result[half] = (coeffs[half] + coeffs[n_src - half]).real
    else:
        result[half] = result[n_dst - half] = coeffs[half].real / 2.0
    logger.debug(f"Changed resolution N={n_src} -> N={n_dst}")
    return WaveProfile(grid, grid.inverse(result))
