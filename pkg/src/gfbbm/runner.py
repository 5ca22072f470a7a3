"""
Высокоуровневый API запусков: solve, evolve, sweep, validate и reproduce.

Каждый запуск пишет CSV-файлы и манифест в каталог результатов и
возвращает ResultManifest.
"""

import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from itertools import repeat
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pydantic
from pydantic import ValidationError

from gfbbm.evolution import EvolutionTrace, evolve
from gfbbm.exceptions import ConfigurationError, DivergenceError, GfbbmError, NumericalError, ParameterError
from gfbbm.models import (
    AdmissibilityReport,
    GridSection,
    ModelParams,
    ResultManifest,
    RunConfig,
    SolverConfig,
    SweepRow,
    TimeGrid,
)
from gfbbm.petviashvili import SolverResult, default_seed, solve
from gfbbm.spectral import SpectralGrid, WaveProfile, make_grid, translate
from gfbbm.storage import ArtifactWriter, read_profile
from gfbbm.theory import (
    energy_identity_check,
    exact_soliton,
    exact_soliton_profile,
    pohozaev_check,
    validate_params,
    weinstein_functional,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"

# Масштаб по умолчанию и полный масштаб для reproduce
DESK_POINTS = 2 ** 16
FULL_POINTS = 2 ** 18
FIGURE_HALF_LENGTH = 2048.0
FIGURE_SPEED = 1.1
FIGURE_T_FINAL = 20.0
FIGURE_DT = 0.005
FIGURE5_SPEEDS = [round(1.05 + 0.05 * i, 2) for i in range(20)]

# (stage, done, total)
ProgressCallback = Callable[[str, int, int], None]

_STATUS_ORDER = {"ok": 0, "not_converged": 1, "diverged": 2}


def versions() -> Dict[str, str]:
    from gfbbm import __version__

    return {
        "gfbbm": __version__,
        "format": FORMAT_VERSION,
        "numpy": np.__version__,
        "pydantic": pydantic.VERSION,
        "python": platform.python_version(),
    }


def grid_from(section: GridSection) -> SpectralGrid:
    return make_grid(section.n_points, section.half_length, section.dealias)


def initial_guess(seed: str, grid: SpectralGrid, params: ModelParams) -> WaveProfile:
    """
    Начальный профиль по строке seed.

    gaussian-default: гауссиана default_seed; exact-soliton: точное решение
    при alpha = 1, p = 1; file:<path>: CSV x,value.
    """
    if seed == "gaussian-default":
        return default_seed(grid, params)
    if seed == "exact-soliton":
        if params.alpha != 1.0 or params.nonlinearity != 1:
            logger.warning(f"exact-soliton seed is the alpha=1, p=1 wave; used as data for {params.label()}")
        return exact_soliton_profile(grid, params.speed)
    return read_profile(seed[len("file:"):], grid)


def _json_safe(details: Dict[str, Any]) -> Dict[str, Any]:
    return {key: value if isinstance(value, (int, float, str, bool)) or value is None else str(value)
            for key, value in details.items()}


def _worst(statuses: Sequence[str]) -> str:
    return max(statuses, key=lambda status: _STATUS_ORDER[status], default="ok")


@contextmanager
def _timed(wallclock: Dict[str, float], stage: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        wallclock[stage] = wallclock.get(stage, 0.0) + time.perf_counter() - start


# ===== SWEEP =====

def solve_point(
    alpha: float,
    nonlinearity: int,
    speed: float,
    grid_section: GridSection,
    solver: SolverConfig
) -> SweepRow:
    """
    Решить одну точку sweep. Недопустимые точки не решаются, а помечаются
    как skipped:<primary>; сбои попадают в status строки.
    """
    row = {"alpha": alpha, "p": nonlinearity, "c": speed}
    try:
        params = ModelParams(alpha=alpha, nonlinearity=nonlinearity, speed=speed)
    except ValidationError:
        return SweepRow(**row, status="invalid")

    report = validate_params(params)
    if not report.admissible:
        return SweepRow(**row, status=f"skipped:{report.primary.value}")

    grid = grid_from(grid_section)
    try:
        result = solve(default_seed(grid, params), params, solver)
    except DivergenceError:
        return SweepRow(**row, status="diverged")
    except GfbbmError as e:
        logger.error(f"Sweep point ({params.label()}) failed: {e.message}")
        return SweepRow(**row, status="failed")

    return SweepRow(
        **row,
        amplitude=result.profile.amplitude,
        iterations=result.iterations_used,
        final_res=result.final.residual_error,
        status="ok" if result.converged else "not_converged",
    )


def find_crossing_speeds(rows: Sequence[SweepRow]) -> List[Dict[str, Any]]:
    """
    Найти скорости, где меняется порядок амплитуд двух соседних степеней p
    при фиксированном alpha (критическая скорость c_s).

    Между соседними скоростями с разными знаками разности амплитуд
    скорость пересечения находится линейной интерполяцией.
    """
    table: Dict[float, Dict[int, Dict[float, float]]] = {}
    for row in rows:
        if row.status == "ok" and row.amplitude is not None:
            table.setdefault(row.alpha, {}).setdefault(row.p, {})[row.c] = row.amplitude

    crossings = []
    for alpha in sorted(table):
        powers = sorted(table[alpha])
        for low, high in zip(powers, powers[1:]):
            speeds = sorted(set(table[alpha][low]) & set(table[alpha][high]))
            diffs = [table[alpha][high][c] - table[alpha][low][c] for c in speeds]
            for i in range(len(speeds) - 1):
                d0, d1 = diffs[i], diffs[i + 1]
                if d0 == 0.0 or d0 * d1 >= 0:
                    continue
                c0, c1 = speeds[i], speeds[i + 1]
                crossings.append({
                    "alpha": alpha,
                    "p_low": low,
                    "p_high": high,
                    "speed": c0 - d0 * (c1 - c0) / (d1 - d0),
                    "bracket": [c0, c1],
                    "amplitude_increases_with_p_below": d0 > 0,
                })
    return crossings


# ===== RUNNER =====

class ExperimentRunner:
    """
    Запуск экспериментов и запись результатов.

    Пример использования:

    ```python
    runner = ExperimentRunner(output_dir="out", workers=4)
    config = ConfigManager("solve.json").load()
    manifest = runner.run(config)
    print(manifest.status, manifest.summary["amplitude"])
    ```
    """

    def __init__(
        self,
        output_dir: Union[str, Path],
        workers: int = 1,
        force: bool = False,
        full: bool = False,
        progress: Optional[ProgressCallback] = None
    ):
        """
        Args:
            output_dir: Каталог результатов
            workers: Число процессов для sweep
            force: Решать и недопустимые параметры
            full: reproduce на полном масштабе N = 2^18
            progress: Обратный вызов хода выполнения
        """
        if workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {workers}")
        self.output_dir = Path(output_dir)
        self.workers = workers
        self.force = force
        self.full = full
        self._progress = progress

    def run(self, config: RunConfig) -> ResultManifest:
        """Выполнить запуск в режиме config.mode."""
        handlers = {
            "solve": self.run_solve,
            "evolve": self.run_evolve,
            "sweep": self.run_sweep,
            "validate": self.run_validate,
        }
        if config.mode == "reproduce":
            return self.run_reproduce(config.figure)
        return handlers[config.mode](config)

    def _report(self, stage: str, done: int, total: int) -> None:
        if self._progress is not None:
            self._progress(stage, done, total)

    def _echo(self, config: RunConfig) -> Dict[str, Any]:
        echo = config.model_dump(mode="json")
        if config.params is not None:
            echo["solver"]["nu"] = config.solver.resolve_nu(config.params.nonlinearity)
        echo["output_dir"] = str(self.output_dir)
        echo["workers"] = self.workers
        echo["force"] = self.force
        return echo

    def _finish(
        self,
        writer: ArtifactWriter,
        mode: str,
        status: str,
        echo: Dict[str, Any],
        wallclock: Dict[str, float],
        summary: Dict[str, Any],
        started: float
    ) -> ResultManifest:
        wallclock["total"] = time.perf_counter() - started
        manifest = ResultManifest(
            mode=mode,
            status=status,
            config_echo=echo,
            versions=versions(),
            wallclock=wallclock,
            summary=summary,
        )
        writer.write_manifest(manifest)
        return manifest

    # ===== SOLVE =====

    def _solve_summary(self, result: SolverResult, params: ModelParams, report: AdmissibilityReport) -> Dict[str, Any]:
        profile = result.profile
        final = result.final

        def guarded(check: Callable[[], float]) -> Optional[float]:
            try:
                return check()
            except ParameterError as e:
                logger.warning(f"Diagnostic skipped: {e.message}")
                return None

        return {
            "params": params.model_dump(),
            "admissibility": {
                "admissible": report.admissible,
                "primary": report.primary.value,
                "reasons": [tag.value for tag in report.reasons],
            },
            "converged": result.converged,
            "iterations": result.iterations_used,
            "final_error": final.increment_error if final else None,
            "final_factor_error": final.factor_error if final else None,
            "final_res": final.residual_error if final else None,
            "amplitude": profile.amplitude,
            "boundary_value": profile.boundary_value(),
            "pohozaev_defect": guarded(lambda: pohozaev_check(profile, params)),
            "energy_defect": guarded(lambda: energy_identity_check(profile, params)),
            "weinstein": guarded(lambda: weinstein_functional(profile, params.alpha, params.nonlinearity)),
        }

    def _solve_stage(
        self,
        writer: ArtifactWriter,
        params: ModelParams,
        grid: SpectralGrid,
        solver: SolverConfig,
        seed: str = "gaussian-default",
        prefix: str = ""
    ) -> Tuple[Optional[SolverResult], str, Dict[str, Any]]:
        report = validate_params(params)
        initial = initial_guess(seed, grid, params)
        try:
            result = solve(initial, params, solver, force=self.force)
        except NumericalError as e:
            partial = getattr(e, "partial", None)
            if partial is not None:
                writer.write_profile(f"{prefix}profile.csv", partial.profile, role="partial_profile")
                writer.write_history(f"{prefix}history.csv", partial.history)
            summary = {"error": e.message, "details": _json_safe(e.details)}
            return partial, "diverged", summary

        writer.write_profile(f"{prefix}profile.csv", result.profile)
        writer.write_history(f"{prefix}history.csv", result.history)
        summary = self._solve_summary(result, params, report)

        if params.alpha == 1.0 and params.nonlinearity == 1:
            difference = result.profile.values - exact_soliton(grid.nodes, 0.0, params.speed)
            writer.write_columns(f"{prefix}difference.csv", ("x", "value"), [grid.nodes, difference], "difference")
            summary["exact_difference"] = float(np.max(np.abs(difference)))

        status = "ok" if result.converged else "not_converged"
        logger.info(f"Solve {params.label()}: {status}, amplitude={result.profile.amplitude:.10g}")
        return result, status, summary

    def run_solve(self, config: RunConfig) -> ResultManifest:
        """
        Проверить параметры и решить итерацией Петвиашвили.

        Пишет profile.csv, history.csv, difference.csv (при alpha = 1, p = 1)
        и manifest.json.

        Raises:
            InadmissibleParametersError: Параметры недопустимы, force не задан
        """
        started = time.perf_counter()
        wallclock: Dict[str, float] = {}
        grid = grid_from(config.grid)
        writer = ArtifactWriter(self.output_dir)
        with _timed(wallclock, "solve"):
            _, status, summary = self._solve_stage(writer, config.params, grid, config.solver, config.seed)
        return self._finish(writer, "solve", status, self._echo(config), wallclock, summary, started)

    # ===== EVOLVE =====

    def _evolve_stage(
        self,
        writer: ArtifactWriter,
        initial: WaveProfile,
        params: ModelParams,
        time_grid: TimeGrid,
        output_times: Sequence[float],
        drift_stride: int = 1,
        prefix: str = ""
    ) -> Tuple[str, Dict[str, Any]]:
        total = time_grid.n_steps

        def on_step(step: int, steps: int) -> None:
            if step % max(1, steps // 200) == 0 or step == steps:
                self._report("evolve", step, steps)

        status = "ok"
        try:
            trace = evolve(initial, params, time_grid, output_times, drift_stride, on_step=on_step)
            summary: Dict[str, Any] = {}
        except DivergenceError as e:
            trace = e.partial
            status = "diverged"
            summary = {"error": e.message, "details": _json_safe(e.details)}

        self._write_trace(writer, trace, prefix)
        summary.update(self._trace_summary(trace, initial, params, time_grid))
        summary["steps"] = total
        return status, summary

    def _write_trace(self, writer: ArtifactWriter, trace: EvolutionTrace, prefix: str) -> None:
        for requested, snapshot in zip(trace.requested_times, trace.snapshots):
            writer.write_profile(f"{prefix}snapshot_t{requested:g}.csv", snapshot, role="snapshot")
        writer.write_drift(f"{prefix}drift.csv", trace.drift_times, trace.i0_drift, trace.i1_drift)

    def _trace_summary(
        self,
        trace: EvolutionTrace,
        initial: WaveProfile,
        params: ModelParams,
        time_grid: TimeGrid
    ) -> Dict[str, Any]:
        peak = initial.amplitude
        snapshots = []
        for actual, snapshot in zip(trace.times, trace.snapshots):
            shifted = translate(initial, params.speed * float(actual))
            error = float(np.max(np.abs(snapshot.values - shifted.values)))
            entry = {
                "t": float(actual),
                "amplitude": snapshot.amplitude,
                "translation_error": error,
                "translation_error_relative": error / peak if peak > 0 else None,
            }
            if params.alpha == 1.0 and params.nonlinearity == 1 and params.speed > 0.6:
                exact = exact_soliton(snapshot.grid.nodes, float(actual), params.speed)
                entry["exact_error"] = float(np.max(np.abs(snapshot.values - exact)))
            snapshots.append(entry)

        drift = trace.max_drift()
        return {
            "params": params.model_dump(),
            "t_final": time_grid.t_final,
            "dt": time_grid.dt,
            "steps_taken": trace.steps_taken,
            "completed": trace.completed,
            "initial": trace.initial.model_dump(),
            "max_i0_drift": drift["i0"],
            "max_i1_drift": drift["i1"],
            "max_hamiltonian_drift": drift["hamiltonian"],
            "snapshots": snapshots,
        }

    def run_evolve(self, config: RunConfig) -> ResultManifest:
        """
        Эволюция начального профиля.

        Начальный профиль: файл (seed file:<path>), точное решение
        (seed exact-soliton) или встроенный этап solve (gaussian-default),
        результаты которого пишутся с префиксом initial_.
        """
        started = time.perf_counter()
        wallclock: Dict[str, float] = {}
        params = config.params
        grid = grid_from(config.grid)
        try:
            time_grid = config.time.to_time_grid()
        except ValueError as e:
            raise ConfigurationError(f"time: {e}")
        writer = ArtifactWriter(self.output_dir)
        echo = self._echo(config)
        summary: Dict[str, Any] = {}

        if config.seed == "gaussian-default":
            with _timed(wallclock, "solve"):
                result, status, solve_summary = self._solve_stage(
                    writer, params, grid, config.solver, prefix="initial_"
                )
            summary["initial_solve"] = solve_summary
            if status != "ok":
                logger.error(f"Initial solve ended with status {status}; evolution skipped")
                return self._finish(writer, "evolve", status, echo, wallclock, summary, started)
            initial = result.profile
        else:
            initial = initial_guess(config.seed, grid, params)

        with _timed(wallclock, "evolve"):
            status, evolve_summary = self._evolve_stage(
                writer, initial, params, time_grid,
                config.time.output_times, config.time.drift_stride
            )
        summary.update(evolve_summary)
        return self._finish(writer, "evolve", status, echo, wallclock, summary, started)

    # ===== SWEEP =====

    def _sweep_rows(
        self,
        triples: Sequence[Tuple[float, int, float]],
        grid_section: GridSection,
        solver: SolverConfig,
        stage: str = "sweep"
    ) -> List[SweepRow]:
        alphas = [t[0] for t in triples]
        powers = [t[1] for t in triples]
        speeds = [t[2] for t in triples]
        rows: List[SweepRow] = []
        if self.workers > 1 and len(triples) > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                results = pool.map(solve_point, alphas, powers, speeds, repeat(grid_section), repeat(solver))
                for row in results:
                    rows.append(row)
                    self._report(stage, len(rows), len(triples))
        else:
            for alpha, p, c in triples:
                rows.append(solve_point(alpha, p, c, grid_section, solver))
                self._report(stage, len(rows), len(triples))
        return rows

    @staticmethod
    def _sweep_summary(rows: Sequence[SweepRow]) -> Dict[str, Any]:
        skipped = [row for row in rows if row.status.startswith("skipped") or row.status == "invalid"]
        solved = [row for row in rows if row not in skipped]
        return {
            "points": len(rows),
            "admissible": len(solved),
            "skipped": len(skipped),
            "failed": sum(1 for row in solved if row.status != "ok"),
            "crossings": find_crossing_speeds(rows),
        }

    def run_sweep(self, config: RunConfig) -> ResultManifest:
        """
        Таблица скорость-амплитуда по декартову произведению alpha x p x c.

        Строки отсортированы по (alpha, p, c) при любом числе процессов;
        сбой одной точки не прерывает sweep.
        """
        started = time.perf_counter()
        wallclock: Dict[str, float] = {}
        writer = ArtifactWriter(self.output_dir)
        triples = config.sweep.triples()
        logger.info(f"Sweep over {len(triples)} points with {self.workers} worker(s)")

        with _timed(wallclock, "sweep"):
            rows = self._sweep_rows(triples, config.grid, config.solver)
        summary = self._sweep_summary(rows)
        if summary["admissible"] == 0:
            logger.warning("Sweep has no admissible points; table is empty of solutions")

        writer.write_sweep("sweep.csv", rows)
        return self._finish(writer, "sweep", "ok", self._echo(config), wallclock, summary, started)

    # ===== VALIDATE =====

    def run_validate(self, config: RunConfig) -> ResultManifest:
        """
        Отчёты о допустимости для всех точек конфигурации.

        Файлов не пишет; отчёты лежат в summary["reports"].
        """
        started = time.perf_counter()
        reports = [validate_params(params) for params in config.validate_triples()]
        return ResultManifest(
            mode="validate",
            config_echo=self._echo(config),
            versions=versions(),
            wallclock={"total": time.perf_counter() - started},
            summary={
                "reports": [report.model_dump(mode="json") for report in reports],
                "admissible": sum(1 for report in reports if report.admissible),
            },
        )

    # ===== REPRODUCE =====

    def _figure_grid(self) -> GridSection:
        return GridSection(n_points=FULL_POINTS if self.full else DESK_POINTS, half_length=FIGURE_HALF_LENGTH)

    def _figure_profiles(
        self,
        writer: ArtifactWriter,
        figure_id: str,
        points: Sequence[Tuple[float, int]],
        label: Callable[[float, int], str]
    ) -> Tuple[str, Dict[str, Any]]:
        grid = grid_from(self._figure_grid())
        statuses, summaries = [], {}
        for i, (alpha, p) in enumerate(points):
            params = ModelParams(alpha=alpha, nonlinearity=p, speed=FIGURE_SPEED)
            _, status, summary = self._solve_stage(
                writer, params, grid, SolverConfig(), prefix=f"{figure_id}_{label(alpha, p)}_"
            )
            statuses.append(status)
            summaries[label(alpha, p)] = summary
            self._report(figure_id, i + 1, len(points))
        return _worst(statuses), summaries

    def _figure_sweep(self, writer: ArtifactWriter, name: str, triples: List[Tuple[float, int, float]]) -> Dict[str, Any]:
        rows = self._sweep_rows(triples, self._figure_grid(), SolverConfig(), stage=name)
        writer.write_sweep(f"{name}.csv", rows)
        return self._sweep_summary(rows)

    def _figure_evolution(
        self,
        writer: ArtifactWriter,
        figure_id: str,
        params: ModelParams,
        output_times: Sequence[float]
    ) -> Tuple[str, Dict[str, Any]]:
        grid = grid_from(self._figure_grid())
        time_grid = TimeGrid.from_step(FIGURE_T_FINAL, FIGURE_DT)
        summary: Dict[str, Any] = {}
        if params.alpha == 1.0 and params.nonlinearity == 1:
            initial = exact_soliton_profile(grid, params.speed)
        else:
            result, status, summary["initial_solve"] = self._solve_stage(
                writer, params, grid, SolverConfig(), prefix=f"{figure_id}_initial_"
            )
            if status != "ok":
                return status, summary
            initial = result.profile
        status, evolve_summary = self._evolve_stage(
            writer, initial, params, time_grid, output_times, prefix=f"{figure_id}_"
        )
        summary.update(evolve_summary)
        return status, summary

    def run_reproduce(self, figure_id: str) -> ResultManifest:
        """
        Готовые конфигурации для каждой из семи серий расчётов.

        fig1: решение alpha = 1, p = 1 и разность с точным; fig2: профили
        для alpha из {0.6, 0.8, 1.0}; fig3: история мониторов для alpha
        из {0.6, 0.8}; fig4: профили для p = 1..4 при alpha = 0.8; fig5: две
        таблицы скорость-амплитуда; fig6: дрейф I_1 для точного решения;
        fig7: эволюция alpha = 0.6 со снимками t = 0, 10, 20.

        Raises:
            ConfigurationError: Неизвестный идентификатор
        """
        handlers = {
            "fig1": lambda w: self._figure_profiles(w, "fig1", [(1.0, 1)], lambda a, p: "alpha1"),
            "fig2": lambda w: self._figure_profiles(
                w, "fig2", [(0.6, 1), (0.8, 1), (1.0, 1)], lambda a, p: f"alpha{a:g}"
            ),
            "fig3": lambda w: self._figure_profiles(w, "fig3", [(0.6, 1), (0.8, 1)], lambda a, p: f"alpha{a:g}"),
            "fig4": lambda w: self._figure_profiles(
                w, "fig4", [(0.8, p) for p in (1, 2, 3, 4)], lambda a, p: f"p{p}"
            ),
            "fig5": self._reproduce_speed_amplitude,
            "fig6": lambda w: self._figure_evolution(
                w, "fig6", ModelParams(alpha=1.0, nonlinearity=1, speed=FIGURE_SPEED), [0.0, FIGURE_T_FINAL]
            ),
            "fig7": lambda w: self._figure_evolution(
                w, "fig7", ModelParams(alpha=0.6, nonlinearity=1, speed=FIGURE_SPEED), [0.0, 10.0, FIGURE_T_FINAL]
            ),
        }
        if figure_id not in handlers:
            raise ConfigurationError(
                f"Unknown figure id {figure_id!r}; expected one of {', '.join(handlers)}",
                {"figure": figure_id}
            )

        started = time.perf_counter()
        wallclock: Dict[str, float] = {}
        writer = ArtifactWriter(self.output_dir)
        logger.info(f"Reproducing {figure_id} at N={self._figure_grid().n_points}")
        with _timed(wallclock, figure_id):
            status, summary = handlers[figure_id](writer)
        echo = {
            "mode": "reproduce",
            "figure": figure_id,
            "full": self.full,
            "grid": self._figure_grid().model_dump(),
            "output_dir": str(self.output_dir),
            "workers": self.workers,
        }
        return self._finish(writer, "reproduce", status, echo, wallclock, summary, started)

    def _reproduce_speed_amplitude(self, writer: ArtifactWriter) -> Tuple[str, Dict[str, Any]]:
        by_power = [(0.8, p, c) for p in (1, 2, 3) for c in FIGURE5_SPEEDS]
        by_alpha = [(a, 1, c) for a in (0.6, 0.8, 1.0) for c in FIGURE5_SPEEDS]
        summary = {
            "nonlinearity": self._figure_sweep(writer, "fig5_p", sorted(by_power)),
            "alpha": self._figure_sweep(writer, "fig5_alpha", sorted(by_alpha)),
        }
        return "ok", summary
