"""
CLI интерфейс для gfBBM solver.

Использование:
    gfbbm solve --config solve.json --out results/
    gfbbm evolve --config evolve.json
    gfbbm sweep --config sweep.json --workers 4
    gfbbm validate --point 1.0 1 1.1 --point 0.5 1 0.8 --json
    gfbbm reproduce fig2 --full
"""

import json
import logging
import sys
from contextlib import contextmanager
from typing import Iterator, Optional, Sequence, Tuple

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, Progress, TaskProgressColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

from gfbbm import __version__
from gfbbm.config import ENV_LOG_LEVEL, ENV_WORKERS, ConfigManager, default_output_dir, load_environment
from gfbbm.exceptions import ConfigurationError, GfbbmError, InadmissibleParametersError
from gfbbm.models import AdmissibilityReport, ResultManifest
from gfbbm.runner import ExperimentRunner, ProgressCallback

console = Console()

load_environment()

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]
FIGURES = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"]


def error(message: str) -> None:
    """Вывести ошибку."""
    console.print(f"[red]✗[/red] {message}")


def success(message: str) -> None:
    """Вывести успех."""
    console.print(f"[green]✓[/green] {message}")


def info(message: str) -> None:
    """Вывести информацию."""
    console.print(f"[blue]ℹ[/blue] {message}")


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=False)],
        force=True,
    )


@contextmanager
def progress_bar() -> Iterator[ProgressCallback]:
    """Прогресс-бар rich; задача на каждую стадию запуска."""
    tasks = {}
    with Progress(
        TextColumn("[cyan]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        def update(stage: str, done: int, total: int) -> None:
            if stage not in tasks:
                tasks[stage] = progress.add_task(stage, total=total)
            progress.update(tasks[stage], completed=done, total=total)

        yield update


def render_reports(reports: Sequence[AdmissibilityReport]) -> None:
    table = Table(title="Допустимость параметров")
    table.add_column("alpha", justify="right")
    table.add_column("p", justify="right")
    table.add_column("c", justify="right")
    table.add_column("Допустимы")
    table.add_column("Основной вывод", style="cyan")
    table.add_column("Все выводы")

    for report in reports:
        params = report.params
        table.add_row(
            f"{params.alpha:g}",
            str(params.nonlinearity),
            f"{params.speed:g}",
            "[green]да[/green]" if report.admissible else "[red]нет[/red]",
            report.primary.value,
            ", ".join(tag.value for tag in report.reasons),
        )
    console.print(table)


def render_manifest(manifest: ResultManifest, output_dir: str) -> None:
    table = Table(title=f"Результат: {manifest.mode}", show_header=False)
    table.add_column("Параметр", style="cyan")
    table.add_column("Значение")

    table.add_row("Статус", manifest.status)
    table.add_row("Каталог", output_dir)
    table.add_row("Файлов", str(len(manifest.artifacts)))
    for key, value in manifest.summary.items():
        if isinstance(value, float):
            table.add_row(key, f"{value:.6g}")
        elif isinstance(value, (int, str, bool)):
            table.add_row(key, str(value))
    table.add_row("Время, с", f"{manifest.wallclock.get('total', 0.0):.2f}")
    console.print(table)


def execute(
    mode: str,
    config_path: Optional[str],
    out: Optional[str],
    force: bool = False,
    workers: int = 1,
    full: bool = False,
    figure: Optional[str] = None
) -> None:
    """Выполнить запуск и завершить процесс с кодом по статусу манифеста."""
    try:
        if figure is not None:
            output_dir = out or default_output_dir()
            with progress_bar() as update:
                runner = ExperimentRunner(output_dir, workers=workers, force=force, full=full, progress=update)
                manifest = runner.run_reproduce(figure)
        else:
            manager = ConfigManager(config_path)
            config = manager.load()
            if config.mode != mode:
                raise ConfigurationError(
                    f"Config mode is '{config.mode}', but the '{mode}' command was called"
                )
            output_dir = str(manager.output_dir(out))
            with progress_bar() as update:
                runner = ExperimentRunner(output_dir, workers=workers, force=force, full=full, progress=update)
                manifest = runner.run(config)

    except InadmissibleParametersError as e:
        render_reports([e.report])
        error(f"Недопустимые параметры: {e.message}")
        info("Запуск без проверки: --force")
        sys.exit(e.exit_code)
    except GfbbmError as e:
        error(e.message)
        sys.exit(e.exit_code)
    except Exception as e:
        error(f"Ошибка: {e}")
        sys.exit(1)

    render_manifest(manifest, output_dir)
    if manifest.exit_code == 0:
        success(f"Готово: {output_dir}")
    else:
        error(f"Запуск завершился со статусом {manifest.status}")
    sys.exit(manifest.exit_code)


config_option = click.option(
    "--config", "-c", "config_path",
    required=True,
    type=click.Path(dir_okay=False),
    help="JSON-файл конфигурации"
)
out_option = click.option("--out", "-o", help="Каталог результатов (по умолчанию из конфигурации или GFBBM_OUTPUT_DIR)")
force_option = click.option("--force", is_flag=True, help="Решать и при недопустимых параметрах")
workers_option = click.option(
    "--workers", "-w",
    envvar=ENV_WORKERS,
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Число процессов для sweep"
)


@click.group()
@click.option(
    "--log-level",
    envvar=ENV_LOG_LEVEL,
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="WARNING",
    help="Уровень логирования"
)
@click.version_option(version=__version__, prog_name="gfbbm")
def main(log_level: str):
    """gfBBM CLI - уединённые волны и эволюция обобщённого дробного уравнения BBM."""
    setup_logging(log_level.upper())


# ===== RUN COMMANDS =====

@main.command()
@config_option
@out_option
@force_option
def solve(config_path: str, out: Optional[str], force: bool):
    """Построить уединённую волну итерацией Петвиашвили."""
    execute("solve", config_path, out, force=force)


@main.command()
@config_option
@out_option
@force_option
def evolve(config_path: str, out: Optional[str], force: bool):
    """Проинтегрировать по времени методом Фурье и RK4."""
    execute("evolve", config_path, out, force=force)


@main.command()
@config_option
@out_option
@workers_option
def sweep(config_path: str, out: Optional[str], workers: int):
    """Таблица скорость-амплитуда по сетке параметров."""
    execute("sweep", config_path, out, workers=workers)


@main.command()
@click.argument("figure", type=click.Choice(FIGURES))
@out_option
@workers_option
@click.option("--full", is_flag=True, help="Полный масштаб N = 2^18 вместо 2^16")
def reproduce(figure: str, out: Optional[str], workers: int, full: bool):
    """Повторить серию расчётов FIGURE готовой конфигурацией."""
    execute("reproduce", None, out, workers=workers, full=full, figure=figure)


# ===== VALIDATE =====

@main.command()
@click.option("--config", "-c", "config_path", type=click.Path(dir_okay=False), help="JSON-файл конфигурации")
@click.option(
    "--point", "-p", "points",
    multiple=True,
    type=(float, int, float),
    metavar="ALPHA P C",
    help="Точка (alpha, p, c); можно повторять"
)
@click.option("--json", "as_json", is_flag=True, help="Вывести отчёты в JSON")
def validate(config_path: Optional[str], points: Tuple[Tuple[float, int, float], ...], as_json: bool):
    """Проверить допустимость параметров (alpha, p, c)."""
    if not config_path and not points:
        raise click.UsageError("Укажите --config или хотя бы одну --point")

    try:
        if config_path:
            config = ConfigManager(config_path).load()
            data = config.model_dump()
            data["mode"] = "validate"
            data["points"] = (config.points or []) + [list(point) for point in points]
            config = ConfigManager.parse(data, source=config_path)
        else:
            config = ConfigManager.parse({"mode": "validate", "points": [list(point) for point in points]}, "--point")
        manifest = ExperimentRunner(".").run_validate(config)
    except GfbbmError as e:
        error(e.message)
        sys.exit(e.exit_code)

    reports = [AdmissibilityReport.model_validate(item) for item in manifest.summary["reports"]]
    if as_json:
        click.echo(json.dumps(manifest.summary["reports"], indent=2, ensure_ascii=False))
    else:
        render_reports(reports)
        info(f"Допустимых точек: {manifest.summary['admissible']} из {len(reports)}")


if __name__ == "__main__":
    main()
