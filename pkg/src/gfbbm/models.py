"""
Pydantic модели: параметры модели, настройки решателей, конфигурация запуска
и записи результатов.

Конфигурация читается строго: неизвестные ключи считаются ошибкой (extra="forbid").
"""

import math
from enum import Enum
from itertools import product
from typing import Optional, List, Dict, Any, Literal, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)


class StrictModel(BaseModel):
    """База для всех моделей конфигурации."""
    model_config = ConfigDict(extra="forbid")


# ===== MODEL PARAMETERS =====

class ModelParams(StrictModel):
    """Параметры уравнения gfBBM: порядок alpha, степень p, скорость c."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(gt=0.0, lt=2.0, description="Дробный порядок alpha в (0, 2)")
    nonlinearity: int = Field(ge=1, description="Степень нелинейности p >= 1")
    speed: float = Field(description="Скорость волны c")

    @property
    def p(self) -> int:
        return self.nonlinearity

    @property
    def c(self) -> float:
        return self.speed

    def admissible(self) -> bool:
        """Существует ли положительная уединённая волна (c > 1, alpha > p/(p+2))."""
        from gfbbm.theory import validate_params
        return validate_params(self).admissible

    def label(self) -> str:
        return f"alpha={self.alpha:g}, p={self.nonlinearity}, c={self.speed:g}"


class ConservedSnapshot(BaseModel):
    """Значения I_0, I_1 и гамильтониана H на одном профиле."""
    model_config = ConfigDict(frozen=True)

    i0: float
    i1: float
    hamiltonian: float


# ===== THEORY =====

class AdmissibilityTag(str, Enum):
    """Выводы теоремы о несуществовании и условий положительности."""
    NONEXIST_CASE_I = "NONEXIST_CASE_I"
    NONEXIST_CASE_II = "NONEXIST_CASE_II"
    NONEXIST_CASE_III = "NONEXIST_CASE_III"
    NO_POSITIVE_WAVE = "NO_POSITIVE_WAVE"
    SUPERCRITICAL_P = "SUPERCRITICAL_P"
    HAMILTONIAN_ILL_DEFINED = "HAMILTONIAN_ILL_DEFINED"
    OK = "OK"


class AdmissibilityReport(BaseModel):
    """
    Отчёт о допустимости параметров.

    reasons содержит все применимые выводы, primary содержит единственный
    определяющий вывод для данной точки.
    """
    params: ModelParams
    admissible: bool
    reasons: List[AdmissibilityTag]
    primary: AdmissibilityTag

    @model_validator(mode="after")
    def _consistent(self) -> "AdmissibilityReport":
        if self.admissible != (self.reasons == [AdmissibilityTag.OK]):
            raise ValueError("admissible must hold iff reasons == [OK]")
        if self.primary not in self.reasons:
            raise ValueError("primary finding must be one of the reasons")
        return self


# ===== PETVIASHVILI =====

class SolverConfig(StrictModel):
    """Настройки итерации Петвиашвили."""
    tol_increment: PositiveFloat = Field(default=1e-12, description="Порог Error(n)")
    tol_residual: PositiveFloat = Field(default=1e-6, description="Порог RES(n)")
    tol_factor: PositiveFloat = Field(default=1e-10, description="Порог |1-M_n| (не останавливает)")
    max_iterations: PositiveInt = 500
    nu: Optional[float] = Field(default=None, description="Показатель nu; None = (p+1)/p")

    def resolve_nu(self, nonlinearity: int) -> float:
        if self.nu is not None:
            return self.nu
        return (nonlinearity + 1) / nonlinearity


class IterationRecord(BaseModel):
    """Мониторы одной итерации."""
    model_config = ConfigDict(frozen=True)

    iteration: int
    increment_error: NonNegativeFloat
    factor_error: NonNegativeFloat
    residual_error: NonNegativeFloat


# ===== EVOLUTION =====

class TimeGrid(StrictModel):
    """Равномерная сетка по времени на [0, T] из M шагов."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    t_final: NonNegativeFloat
    n_steps: int = Field(ge=0)

    @model_validator(mode="after")
    def _steps_match(self) -> "TimeGrid":
        if self.t_final > 0 and self.n_steps < 1:
            raise ValueError("n_steps must be >= 1 when t_final > 0")
        if self.t_final == 0 and self.n_steps != 0:
            raise ValueError("n_steps must be 0 when t_final = 0")
        return self

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps if self.n_steps else 0.0

    @classmethod
    def from_step(cls, t_final: float, dt: float) -> "TimeGrid":
        """Построить сетку по шагу dt; T должно быть кратно dt."""
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        n_steps = int(round(t_final / dt))
        if not math.isclose(n_steps * dt, t_final, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"t_final={t_final} is not a multiple of dt={dt}")
        return cls(t_final=t_final, n_steps=n_steps)


# ===== RUN CONFIGURATION =====

class GridSection(StrictModel):
    n_points: int = Field(default=2 ** 16, ge=4)
    half_length: PositiveFloat = 2048.0
    dealias: bool = False


class TimeSection(StrictModel):
    """Секция time: задаётся либо n_steps, либо dt."""
    t_final: NonNegativeFloat
    n_steps: Optional[int] = Field(default=None, ge=0)
    dt: Optional[PositiveFloat] = None
    output_times: List[NonNegativeFloat] = Field(default_factory=list)
    drift_stride: PositiveInt = 1

    @model_validator(mode="after")
    def _one_of_steps(self) -> "TimeSection":
        if (self.n_steps is None) == (self.dt is None) and self.t_final > 0:
            raise ValueError("exactly one of n_steps or dt must be given")
        bad = [t for t in self.output_times if t > self.t_final]
        if bad:
            raise ValueError(f"output_times outside [0, t_final]: {bad}")
        return self

    def to_time_grid(self) -> TimeGrid:
        if self.t_final == 0:
            return TimeGrid(t_final=0.0, n_steps=0)
        if self.dt is not None:
            return TimeGrid.from_step(self.t_final, self.dt)
        return TimeGrid(t_final=self.t_final, n_steps=self.n_steps)


class SweepSection(StrictModel):
    alpha: List[float] = Field(min_length=1)
    nonlinearity: List[int] = Field(min_length=1)
    speed: List[float] = Field(min_length=1)

    def triples(self) -> List[Tuple[float, int, float]]:
        """Декартово произведение, отсортированное по (alpha, p, c)."""
        return sorted(set(product(self.alpha, self.nonlinearity, self.speed)))


RunMode = Literal["solve", "evolve", "sweep", "validate", "reproduce"]
FigureId = Literal["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"]


class RunConfig(StrictModel):
    """Полная конфигурация запуска."""
    mode: RunMode
    params: Optional[ModelParams] = None
    grid: GridSection = Field(default_factory=GridSection)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    time: Optional[TimeSection] = None
    sweep: Optional[SweepSection] = None
    points: Optional[List[Tuple[float, int, float]]] = None
    figure: Optional[FigureId] = None
    output_dir: Optional[str] = None
    seed: str = Field(default="gaussian-default", description="gaussian-default | exact-soliton | file:<path>")

    @field_validator("seed")
    @classmethod
    def _seed_source(cls, value: str) -> str:
        if value in ("gaussian-default", "exact-soliton"):
            return value
        if value.startswith("file:") and len(value) > len("file:"):
            return value
        raise ValueError(f"seed must be gaussian-default, exact-soliton or file:<path>, got {value!r}")

    @model_validator(mode="after")
    def _mode_sections(self) -> "RunConfig":
        missing = []
        if self.mode in ("solve", "evolve") and self.params is None:
            missing.append("params")
        if self.mode == "evolve" and self.time is None:
            missing.append("time")
        if self.mode == "sweep" and self.sweep is None:
            missing.append("sweep")
        if self.mode == "validate" and not (self.params or self.points or self.sweep):
            missing.append("params | points | sweep")
        if self.mode == "reproduce" and self.figure is None:
            missing.append("figure")
        if missing:
            raise ValueError(f"mode '{self.mode}' requires sections: {', '.join(missing)}")
        return self

    def validate_triples(self) -> List[ModelParams]:
        """Точки для режима validate: params, points и sweep вместе."""
        triples: List[ModelParams] = []
        if self.params is not None:
            triples.append(self.params)
        for alpha, p, c in self.points or []:
            triples.append(ModelParams(alpha=alpha, nonlinearity=p, speed=c))
        if self.sweep is not None:
            for alpha, p, c in self.sweep.triples():
                triples.append(ModelParams(alpha=alpha, nonlinearity=p, speed=c))
        return triples


# ===== RESULTS =====

class SweepRow(BaseModel):
    """Строка таблицы скорость-амплитуда."""
    alpha: float
    p: int
    c: float
    amplitude: Optional[float] = None
    iterations: Optional[int] = None
    final_res: Optional[float] = None
    status: str = "ok"


class ArtifactEntry(BaseModel):
    path: str
    role: str


class ResultManifest(BaseModel):
    """Манифест запуска: конфигурация, файлы, версии, время."""
    mode: str
    status: Literal["ok", "not_converged", "diverged"] = "ok"
    config_echo: Dict[str, Any]
    artifacts: List[ArtifactEntry] = Field(default_factory=list)
    versions: Dict[str, str] = Field(default_factory=dict)
    wallclock: Dict[str, float] = Field(default_factory=dict)
    summary: Dict[str, Any] = Field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 0 if self.status == "ok" else 1
