"""
Настройки запуска из config/system_config.yaml
Путь можно переопределить переменной окружения CHIPLET_COST_CONFIG.
"""

import os
import logging
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.errors import SpecError
from src.utils import load_yaml_config

load_dotenv()
logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "CHIPLET_COST_CONFIG"
PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG = PROJECT_ROOT / "config" / "system_config.yaml"


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class LoggingSettings(_Section):
    level: str = "INFO"
    log_file: str = "logs/chiplet_cost.log"
    max_log_size: int = Field(default=10 * 1024 * 1024, gt=0)
    backup_count: int = Field(default=5, ge=0)


class ModelSettings(_Section):
    bond_yield_from_first_die: bool = False


class PartitionSettings(_Section):
    max_die_area: float = Field(default=150.0, gt=0)
    min_dies: int = Field(default=2, ge=1)


class SwitchPointSettings(_Section):
    lower_area: int = Field(default=20, gt=0)
    upper_area: int = Field(default=1200, gt=0)
    resolution: int = Field(default=1, gt=0)
    nodes: List[str] = ["7nm", "10nm", "12nm", "16nm", "20nm", "28nm"]
    integrations: List[str] = ["organic_2.5D", "mcm"]


class ExplorerSettings(_Section):
    max_points: int = Field(default=1_000_000, gt=0)
    workers: int = Field(default=1, ge=1)
    partition: PartitionSettings = PartitionSettings()
    switchpoint: SwitchPointSettings = SwitchPointSettings()


class OutputSettings(_Section):
    default_format: str = "table"
    specs_dir: str = "config/specs"


class Settings(_Section):
    """Полная конфигурация запуска"""
    logging: LoggingSettings = LoggingSettings()
    model: ModelSettings = ModelSettings()
    explorer: ExplorerSettings = ExplorerSettings()
    output: OutputSettings = OutputSettings()

    def specs_path(self, name: str) -> Path:
        """Путь к файлу спецификации из поставки (относительно корня проекта)"""
        base = Path(self.output.specs_dir)
        if not base.is_absolute():
            base = PROJECT_ROOT / base
        return base / name


def default_config_path() -> Path:
    override = os.getenv(CONFIG_ENV_VAR)
    return Path(override) if override else DEFAULT_CONFIG


def load_settings(path: Optional[str] = None) -> Settings:
    """
    Загружает настройки; отсутствующий файл даёт значения по умолчанию

    Raises:
        SpecError: файл есть, но не соответствует схеме
    """
    config_path = Path(path) if path else default_config_path()
    if not config_path.exists():
        logger.warning(f"⚠️ Файл настроек {config_path} не найден, используются значения по умолчанию")
        return Settings()
    raw = load_yaml_config(config_path)
    try:
        settings = Settings.model_validate(raw or {})
    except ValidationError as e:
        err = e.errors()[0]
        where = ".".join(str(p) for p in err["loc"])
        raise SpecError(f"❌ {config_path.name}: {where}: {err['msg']}")
    logger.debug(f"📋 Настройки загружены из {config_path}")
    return settings
