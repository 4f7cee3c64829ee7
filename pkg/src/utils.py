#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Вспомогательные функции для chiplet_cost: файлы, YAML, JSON, CSV, таблицы
"""

import io
import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence

import yaml

from src.errors import DatasetParseError, OutputError

# ============================================================================
# ФУНКЦИИ ДЛЯ РАБОТЫ С ФАЙЛАМИ И ДИРЕКТОРИЯМИ
# ============================================================================

def ensure_dir(path: Path) -> Path:
    """Создаёт директорию, если её нет (возвращает путь)"""
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_text(path: Path, text: str) -> Path:
    """Записывает текст в файл, создавая директории (ошибка -> OutputError)"""
    path = Path(path)
    try:
        ensure_dir(path.parent)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"❌ Ошибка записи {path}: {e}")
    return path

# ============================================================================
# ФУНКЦИИ ДЛЯ РАБОТЫ С YAML
# ============================================================================

def load_yaml_config(filepath) -> Any:
    """Загрузка YAML конфигурации"""
    try:
        with open(filepath, "r", encoding="utf-8") as file:
            return yaml.safe_load(file)
    except FileNotFoundError:
        raise OutputError(f"❌ Файл {filepath} не найден")
    except OSError as e:
        raise OutputError(f"❌ Ошибка чтения {filepath}: {e}")
    except yaml.YAMLError as e:
        raise DatasetParseError(f"❌ Ошибка разбора YAML файла {filepath}: {e}")

# ============================================================================
# ФУНКЦИИ ДЛЯ РАБОТЫ С JSON
# ============================================================================

def to_json_text(data: Any) -> str:
    """Детерминированный JSON: фиксированный порядок ключей, без временных меток"""
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=False) + "\n"


def save_json(filepath: Path, data: Any) -> Path:
    """Сохранение данных в JSON файл"""
    return write_text(Path(filepath), to_json_text(data))

# ============================================================================
# CSV И ТЕКСТОВЫЕ ТАБЛИЦЫ
# ============================================================================

def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return value


def to_csv_text(columns: Sequence[str], rows: Iterable[Mapping[str, Any]],
                provenance: Optional[str] = None) -> str:
    """
    CSV со стабильным порядком колонок

    Первая строка-комментарий '# config: ...' хранит разрешённую конфигурацию.
    """
    buffer = io.StringIO()
    if provenance is not None:
        buffer.write(f"# config: {provenance}\n")
    writer = csv.DictWriter(buffer, fieldnames=list(columns), extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _cell(row.get(c)) for c in columns})
    return buffer.getvalue()


def save_csv(filepath: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]],
             provenance: Optional[str] = None) -> Path:
    """Сохранение строк в CSV файл"""
    return write_text(Path(filepath), to_csv_text(columns, rows, provenance))


def format_table(columns: Sequence[str], rows: List[Mapping[str, Any]],
                 precision: int = 4) -> str:
    """Выровненная текстовая таблица (для терминала)"""
    def fmt(value: Any) -> str:
        if value is None:
            return "-"
        if isinstance(value, float):
            return f"{value:.{precision}f}"
        return str(value)

    cells = [[fmt(row.get(c)) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    header = "  ".join(c.rjust(w) for c, w in zip(columns, widths))
    lines = [header, "  ".join("-" * w for w in widths)]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)
