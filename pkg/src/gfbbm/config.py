"""
Загрузка конфигурации запуска.

Конфигурация хранится в JSON-файле и разбирается строго: неизвестные ключи,
пропущенные обязательные секции и неверные значения дают ConfigurationError.
Значения по умолчанию для каталога результатов и числа процессов берутся из
окружения (и файла .env).
"""

import json
import logging
import os
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv
from pydantic import ValidationError

from gfbbm.exceptions import ConfigurationError
from gfbbm.models import RunConfig

logger = logging.getLogger(__name__)

ENV_OUTPUT_DIR = "GFBBM_OUTPUT_DIR"
ENV_WORKERS = "GFBBM_WORKERS"
ENV_LOG_LEVEL = "GFBBM_LOG_LEVEL"

DEFAULT_OUTPUT_DIR = "gfbbm-output"


def load_environment(dotenv_path: Optional[Path] = None) -> None:
    """Подгрузить .env, не перезаписывая уже заданные переменные."""
    load_dotenv(dotenv_path=dotenv_path, override=False)


def default_output_dir() -> str:
    return os.getenv(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR


def _format_validation(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


class ConfigManager:
    """Менеджер конфигурации запуска."""

    def __init__(self, config_path: Union[str, Path]):
        """
        Args:
            config_path: Путь к JSON-файлу конфигурации
        """
        self.config_path = Path(config_path)
        self._config: Optional[RunConfig] = None

    def load(self) -> RunConfig:
        """
        Загрузить и проверить конфигурацию.

        Returns:
            RunConfig

        Raises:
            ConfigurationError: Файл отсутствует, не JSON или не проходит проверку
        """
        if self._config is not None:
            return self._config

        if not self.config_path.is_file():
            raise ConfigurationError(
                f"Config file not found: {self.config_path}",
                {"path": str(self.config_path)}
            )

        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigurationError(f"Cannot read config {self.config_path}: {e}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"Config {self.config_path} is not valid JSON: {e.msg} (line {e.lineno})",
                {"path": str(self.config_path), "line": e.lineno}
            )

        self._config = self.parse(data, source=str(self.config_path))
        logger.debug(f"Loaded {self._config.mode} config from {self.config_path}")
        return self._config

    @staticmethod
    def parse(data: object, source: str = "<config>") -> RunConfig:
        """
        Разобрать уже прочитанный документ.

        Raises:
            ConfigurationError: Документ не соответствует схеме RunConfig
        """
        if not isinstance(data, dict):
            raise ConfigurationError(f"{source}: top level must be an object")
        try:
            return RunConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(
                f"{source}: {_format_validation(e)}",
                {"errors": e.error_count()}
            )

    def output_dir(self, override: Optional[str] = None) -> Path:
        """
        Каталог результатов: явный аргумент, затем output_dir из файла,
        затем GFBBM_OUTPUT_DIR.
        """
        config = self.load()
        return Path(override or config.output_dir or default_output_dir())
