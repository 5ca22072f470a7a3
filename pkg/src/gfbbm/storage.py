"""
Запись результатов: CSV с одной строкой заголовка и полной двойной точностью,
манифест запуска в JSON.

Все файлы пишет координирующий процесс; каждый записанный файл попадает
в манифест вместе со своей ролью.
"""

import csv
import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from gfbbm.exceptions import ConfigurationError, ParameterError
from gfbbm.models import ArtifactEntry, IterationRecord, ResultManifest, SweepRow
from gfbbm.spectral import SpectralGrid, WaveProfile, change_resolution

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
MANIFEST_NAME = "manifest.json"

PROFILE_HEADER = ("x", "value")
HISTORY_HEADER = ("n", "error", "factor_error", "res")
DRIFT_HEADER = ("t", "di0", "di1")
SWEEP_HEADER = ("alpha", "p", "c", "amplitude", "iterations", "final_res", "status")


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


class ArtifactWriter:
    """Пишет артефакты одного запуска в каталог и ведёт их список."""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.artifacts: List[ArtifactEntry] = []
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigurationError(f"Cannot create output directory {self.output_dir}: {e}")

    def _register(self, name: str, role: str) -> Path:
        path = self.output_dir / name
        self.artifacts = [entry for entry in self.artifacts if entry.path != name]
        self.artifacts.append(ArtifactEntry(path=name, role=role))
        return path

    def write_columns(
        self,
        name: str,
        header: Sequence[str],
        columns: Sequence[np.ndarray],
        role: str
    ) -> Path:
        """Записать числовые столбцы одинаковой длины."""
        path = self._register(name, role)
        data = np.column_stack([np.asarray(column, dtype=float) for column in columns])
        np.savetxt(path, data, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(header), comments="")
        logger.debug(f"Wrote {path} ({data.shape[0]} rows)")
        return path

    def write_profile(self, name: str, profile: WaveProfile, role: str = "profile") -> Path:
        return self.write_columns(name, PROFILE_HEADER, [profile.grid.nodes, profile.values], role)

    def write_history(self, name: str, history: Sequence[IterationRecord]) -> Path:
        """CSV истории итераций: n, Error(n), |1-M_n|, RES(n)."""
        columns = [
            [record.iteration for record in history],
            [record.increment_error for record in history],
            [record.factor_error for record in history],
            [record.residual_error for record in history],
        ]
        return self.write_columns(name, HISTORY_HEADER, columns, "history")

    def write_drift(self, name: str, times: np.ndarray, i0_drift: np.ndarray, i1_drift: np.ndarray) -> Path:
        return self.write_columns(name, DRIFT_HEADER, [times, i0_drift, i1_drift], "drift")

    def write_sweep(self, name: str, rows: Sequence[SweepRow]) -> Path:
        """Таблица скорость-амплитуда; пустые ячейки у пропущенных точек."""
        path = self._register(name, "sweep")
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SWEEP_HEADER)
            for row in rows:
                writer.writerow([_cell(getattr(row, column)) for column in SWEEP_HEADER])
        logger.debug(f"Wrote {path} ({len(rows)} rows)")
        return path

    def write_manifest(self, manifest: ResultManifest) -> Path:
        """Записать манифест; он сам тоже перечислен в artifacts."""
        self._register(MANIFEST_NAME, "manifest")
        manifest.artifacts = list(self.artifacts)
        path = self.output_dir / MANIFEST_NAME
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest.model_dump(mode="json"), f, indent=2, ensure_ascii=False)
        logger.info(f"Manifest written: {path}")
        return path


# ===== READING =====

def _periodic_grid(x: np.ndarray) -> Optional[SpectralGrid]:
    # Узлы вида -L + j*h с чётным числом точек
    n_points = x.size
    if n_points % 2:
        return None
    spacing = (x[-1] - x[0]) / (n_points - 1)
    try:
        grid = SpectralGrid(n_points=n_points, half_length=n_points * spacing / 2.0)
    except ParameterError:
        return None
    if not np.allclose(x, grid.nodes, rtol=0.0, atol=1e-9 * grid.half_length):
        return None
    return grid


def read_profile(path: Union[str, Path], grid: Optional[SpectralGrid] = None) -> WaveProfile:
    """
    Прочитать профиль из CSV x,value.

    Если задана сетка, а узлы файла с ней не совпадают:
      - файл на периодической сетке с той же L переносится спектрально
        (change_resolution, без потери точности);
      - иначе профиль линейно интерполируется на узлы сетки (нулём вне
        исходного интервала). Тригонометрический ряд вне исходного периода
        повторял бы волну, а не продолжал её нулём.

    Raises:
        ConfigurationError: Файл отсутствует или повреждён
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Profile file not found: {path}", {"path": str(path)})
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise ConfigurationError(f"Profile file {path} is malformed: {e}")
    if data.shape[1] != 2 or data.shape[0] < 4:
        raise ConfigurationError(f"Profile file {path} must have two columns x,value and at least 4 rows")

    x, values = data[:, 0], data[:, 1]
    if grid is None:
        n_points = x.size
        spacing = x[1] - x[0]
        try:
            grid = SpectralGrid(n_points=n_points, half_length=n_points * spacing / 2.0)
        except ParameterError as e:
            raise ConfigurationError(f"Profile file {path} does not describe a grid: {e.message}")

    if x.size == grid.n_points and np.allclose(x, grid.nodes, rtol=0.0, atol=1e-9 * grid.half_length):
        return WaveProfile(grid, values)

    source = _periodic_grid(x)
    if source is not None and np.isclose(source.half_length, grid.half_length, rtol=1e-12, atol=0.0):
        logger.warning(f"Profile {path} has N={source.n_points}; resampling spectrally onto N={grid.n_points}")
        return change_resolution(WaveProfile(source, values), grid)
    logger.warning(f"Profile {path} is on a different grid; interpolating onto N={grid.n_points}")
    return WaveProfile(grid, np.interp(grid.nodes, x, values, left=0.0, right=0.0))
