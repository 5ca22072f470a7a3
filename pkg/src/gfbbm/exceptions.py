"""
Исключения для gfBBM solver.
"""

from typing import Optional, Dict, Any


class GfbbmError(Exception):
    """Базовое исключение для gfBBM solver."""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(message)


class ConfigurationError(GfbbmError):
    """Ошибка файла конфигурации или параметров командной строки."""

    exit_code = 2


class ParameterError(GfbbmError):
    """Недопустимые входные данные (сетка, порядок оператора, параметры модели)."""

    exit_code = 2


class InadmissibleParametersError(ParameterError):
    """Параметры (alpha, p, c) не допускают положительной уединённой волны."""

    def __init__(self, message: str, report: Any, details: Optional[Dict[str, Any]] = None):
        self.report = report
        super().__init__(message, details)


class NumericalError(GfbbmError):
    """Численный сбой: расходимость, вырождение, нарушение симметрии спектра."""

    exit_code = 1


class DivergenceError(NumericalError):
    """Итерация или интегрирование по времени разошлись.

    Атрибут ``partial`` хранит частичный результат (история итераций
    или EvolutionTrace) для разбора после сбоя.
    """

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        partial: Any = None
    ):
        self.partial = partial
        super().__init__(message, details)


class DegenerateIterateError(DivergenceError):
    """Знаменатель стабилизирующего множителя равен нулю."""

    pass


class SpectralSymmetryError(NumericalError):
    """Спектр нарушает сопряжённую симметрию: обратное преобразование не вещественно."""

    pass
