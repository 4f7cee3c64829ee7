#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
ГЛАВНЫЙ СКРИПТ ПРОЕКТА CHIPLET COST
==========================================
Модель стоимости чиплетных систем в корпусе (SiP)
- Стоимость одной системы (cost)
- Развёртки по сетке параметров (sweep)
- Точки перехода монолит/чиплеты (switchpoint)
- Сценарии HBM и гибридных систем (casestudy)
- Проверка набора данных (dataset validate)
"""

import sys
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

# Добавляем корневую папку в путь
sys.path.append(str(Path(__file__).parent))

from src import cli
from src.errors import ChipletCostError
from src.settings import Settings
from src.utils import ensure_dir

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(settings: Settings, verbose: bool = False) -> None:
    """
    Настройка логирования: stderr + файл с ротацией

    Данные идут в stdout, поэтому все сообщения пишутся в stderr.
    """
    level = logging.DEBUG if verbose else getattr(logging, settings.logging.level.upper(), logging.INFO)
    handlers = [logging.StreamHandler(sys.stderr)]
    log_file = Path(settings.logging.log_file)
    try:
        ensure_dir(log_file.parent)
        handlers.append(RotatingFileHandler(
            log_file,
            maxBytes=settings.logging.max_log_size,
            backupCount=settings.logging.backup_count,
            encoding='utf-8',
        ))
    except OSError as e:
        print(f"⚠️ Лог-файл {log_file} недоступен: {e}", file=sys.stderr)
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def main(argv=None) -> int:
    """Разбор аргументов, настройка логирования и запуск подкоманды"""
    try:
        config, settings = cli.prepare_run(argv)
    except ChipletCostError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code

    configure_logging(settings, verbose=config.verbose)
    return cli.run(config, settings)


if __name__ == "__main__":
    sys.exit(main())
