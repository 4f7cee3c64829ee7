"""
Технологическая база данных
Загружает YAML-набор данных, валидирует записи и выдаёт их по имени.
Все остальные модули читают параметры только через TechDatabase.
"""

import os
import re
import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.errors import (
    DatasetParseError,
    DatasetValidationError,
    NotFoundError,
    OutputError,
)
from src.utils import load_yaml_config
from src.yieldcore import YieldParams

load_dotenv()
logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DATASET_ENV_VAR = "CHIPLET_COST_DATASET"
PROJECT_ROOT = Path(__file__).resolve().parent.parent
BUNDLED_DATASET = PROJECT_ROOT / "config" / "tech_dataset.yaml"

INTEGRATION_KINDS = ("silicon_2.5D", "organic_2.5D", "mcm")


class _Record(BaseModel):
    """Общая конфигурация записей: неизменяемые, без лишних полей"""
    model_config = ConfigDict(frozen=True, extra="forbid")


class TechNode(_Record):
    """Параметры производства одного техпроцесса"""
    name: str
    wafer_cost: float = Field(gt=0)
    wafer_diameter: float = Field(gt=0)
    defect_density: float = Field(ge=0)
    clustering_alpha: float = Field(gt=0)
    transistor_density: float = Field(gt=0)  # млн транзисторов / мм²
    wafer_base_yield: float = Field(gt=0, le=1)
    io_density_factor: float = Field(default=1.0, gt=0, le=1)
    wafer_cost_by_layers: Dict[int, float] = Field(default_factory=dict)
    provenance: str = ""

    @property
    def yield_params(self) -> YieldParams:
        return YieldParams(self.wafer_base_yield, self.defect_density, self.clustering_alpha)

    @property
    def feature_size(self) -> float:
        """Числовая часть имени ("7nm" -> 7.0) для упорядочивания по зрелости"""
        match = re.match(r"^\s*(\d+(?:\.\d+)?)", self.name)
        return float(match.group(1)) if match else float("inf")

    def wafer_cost_for_layers(self, layers: int) -> float:
        """Стоимость пластины для ближайшего числа слоёв, покрывающего требование"""
        if not self.wafer_cost_by_layers:
            return self.wafer_cost
        covering = [n for n in sorted(self.wafer_cost_by_layers) if n >= layers]
        key = covering[0] if covering else max(self.wafer_cost_by_layers)
        return self.wafer_cost_by_layers[key]


class PanelSpec(_Record):
    """Панель органического интерпозера"""
    name: str
    layers: int = Field(default=1, ge=1)
    panel_cost: float = Field(gt=0)
    panel_width: float = Field(gt=0)
    panel_height: float = Field(gt=0)
    panel_base_yield: float = Field(gt=0, le=1)
    defect_density: float = Field(ge=0)
    clustering_alpha: float = Field(gt=0)
    provenance: str = ""

    @property
    def panel_area(self) -> float:
        return self.panel_width * self.panel_height

    @property
    def yield_params(self) -> YieldParams:
        return YieldParams(self.panel_base_yield, self.defect_density, self.clustering_alpha)


class BumpTech(_Record):
    """Технология бампов: шаг, стоимость и выход годных бондинга"""
    name: str
    pitch: float = Field(gt=0)  # мкм
    bond_cost_per_die: float = Field(ge=0)
    bond_yield: float = Field(gt=0, le=1)
    provenance: str = ""


class PackageClass(_Record):
    """Класс корпуса (число core/build-up слоёв) с таблицей образцов стоимости"""
    name: str
    core_layers: int = Field(ge=0)
    buildup_layers: int = Field(ge=0)
    sample_points: Tuple[Tuple[float, float, float], ...]
    provenance: str = ""

    @model_validator(mode="after")
    def _check_samples(self) -> "PackageClass":
        if len(self.sample_points) < 3:
            raise ValueError("нужно не меньше 3 точек sample_points")
        design = np.array([[a, n, 1.0] for a, n, _ in self.sample_points])
        scale = np.abs(design).max(axis=0)
        if np.linalg.matrix_rank(design / scale, tol=1e-10) < 3:
            raise ValueError("точки sample_points коллинеарны в плоскости (площадь, выводы)")
        return self


class IntegrationDefaults(_Record):
    """Записи по умолчанию для одного вида интеграции"""
    bump_tech: str
    package_class: str
    interposer_node: Optional[str] = None
    panel: Optional[str] = None


class SystemDefaults(_Record):
    """Параметры системной модели (планировка, корпус, HBM)"""
    floorplan_spacing_mm: float = Field(default=0.0, ge=0)
    floorplan_overhead_fraction: float = Field(default=0.10, ge=0)
    package_fan_out: float = Field(default=3.0, gt=0)
    power_ground_ratio: float = Field(default=1.0, ge=0)
    signals_per_die: int = Field(default=500, ge=0)
    hbm_footprint_mm2: float = Field(default=39.95, gt=0)
    hbm_signal_width: int = Field(default=1024, gt=0)
    die_to_die_signals: int = Field(default=512, ge=0)
    interposer_signals_per_mm_per_layer: float = Field(default=250.0, gt=0)


@dataclass(frozen=True)
class TechDatabase:
    """Неизменяемая база технологических параметров"""
    schema_version: int
    dataset_version: str
    provenance: str
    nodes: Mapping[str, TechNode]
    interposer_nodes: Mapping[str, TechNode]
    panels: Mapping[str, PanelSpec]
    bump_techs: Mapping[str, BumpTech]
    package_classes: Mapping[str, PackageClass]
    integration_defaults: Mapping[str, IntegrationDefaults]
    system_defaults: SystemDefaults
    source: Optional[str] = None
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    @staticmethod
    def _lookup(table: Mapping, name: str, what: str):
        record = table.get(name)
        if record is None:
            raise NotFoundError(
                f"❌ {what} '{name}' не найден; доступны: {', '.join(table)}"
            )
        return record

    def lookup_node(self, name: str) -> TechNode:
        return self._lookup(self.nodes, name, "Техпроцесс")

    def lookup_interposer_node(self, name: str) -> TechNode:
        return self._lookup(self.interposer_nodes, name, "Техпроцесс интерпозера")

    def lookup_panel(self, name: str) -> PanelSpec:
        return self._lookup(self.panels, name, "Панель")

    def lookup_bump(self, name: str) -> BumpTech:
        return self._lookup(self.bump_techs, name, "Технология бампов")

    def lookup_package_class(self, name: str) -> PackageClass:
        return self._lookup(self.package_classes, name, "Класс корпуса")

    def defaults_for(self, integration: str) -> IntegrationDefaults:
        return self._lookup(self.integration_defaults, integration, "Вид интеграции")

    def select_panel(self, base_panel: str, layers: int) -> PanelSpec:
        """
        Панель с тем же размером, чьё число слоёв покрывает требование

        Если ни одна панель не покрывает требование, остаётся базовая
        """
        base = self.lookup_panel(base_panel)
        candidates = sorted(
            (p for p in self.panels.values()
             if p.layers >= max(layers, base.layers) and p.panel_area == base.panel_area),
            key=lambda p: (p.layers, p.panel_cost, p.name),
        )
        return candidates[0] if candidates else base

    def node_names(self) -> List[str]:
        return list(self.nodes)


def lookup_node(db: TechDatabase, name: str) -> TechNode:
    """Возвращает техпроцесс по имени (или NotFoundError со списком имён)"""
    return db.lookup_node(name)


def default_dataset_path() -> Path:
    """Путь к набору данных: переменная окружения или встроенный файл"""
    override = os.getenv(DATASET_ENV_VAR)
    return Path(override) if override else BUNDLED_DATASET


def _read_yaml(path: Path) -> dict:
    raw = load_yaml_config(path)
    if not isinstance(raw, dict):
        raise DatasetParseError(f"❌ Корень {path} должен быть словарём")
    return raw


def _validate_record(model, raw, section: str, index: int):
    """Валидирует одну запись, превращая ошибку pydantic в DatasetValidationError"""
    name = raw.get("name", f"#{index}") if isinstance(raw, dict) else f"#{index}"
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        err = e.errors()[0]
        field_name = ".".join(str(part) for part in err["loc"]) or "<record>"
        raise DatasetValidationError(
            f"❌ {section}[{name}].{field_name}: {err['msg']}"
        )


def _build_table(raw: dict, section: str, model, required: bool = True) -> Mapping:
    entries = raw.get(section)
    if entries is None:
        if required:
            raise DatasetValidationError(f"❌ Отсутствует раздел '{section}'")
        entries = []
    if not isinstance(entries, list):
        raise DatasetValidationError(f"❌ Раздел '{section}' должен быть списком")
    table: Dict[str, BaseModel] = {}
    for index, item in enumerate(entries):
        record = _validate_record(model, item, section, index)
        if record.name in table:
            raise DatasetValidationError(f"❌ {section}[{record.name}]: повторяющееся имя")
        table[record.name] = record
    return MappingProxyType(table)


def _mapping_section(raw: dict, section: str) -> dict:
    """Раздел-словарь (integration_defaults, system_defaults); отсутствие -> {}"""
    entries = raw.get(section)
    if entries is None:
        return {}
    if not isinstance(entries, dict):
        raise DatasetValidationError(f"❌ Раздел '{section}' должен быть словарём")
    return entries


def _density_warnings(nodes: Mapping[str, TechNode]) -> List[str]:
    """Плотность транзисторов должна строго убывать по мере зрелости техпроцесса"""
    ordered = sorted(nodes.values(), key=lambda n: n.feature_size)
    warnings = []
    for finer, coarser in zip(ordered, ordered[1:]):
        if coarser.transistor_density >= finer.transistor_density:
            warnings.append(
                f"плотность {coarser.name} ({coarser.transistor_density}) "
                f"не меньше, чем у {finer.name} ({finer.transistor_density})"
            )
    return warnings


def _check_references(db: TechDatabase) -> None:
    for kind, defaults in db.integration_defaults.items():
        if kind not in INTEGRATION_KINDS:
            raise DatasetValidationError(
                f"❌ integration_defaults[{kind}]: неизвестный вид интеграции; "
                f"допустимы: {', '.join(INTEGRATION_KINDS)}"
            )
        try:
            db.lookup_bump(defaults.bump_tech)
            db.lookup_package_class(defaults.package_class)
            if kind == "silicon_2.5D":
                db.lookup_interposer_node(defaults.interposer_node or "")
            if kind == "organic_2.5D":
                db.lookup_panel(defaults.panel or "")
        except NotFoundError as e:
            raise DatasetValidationError(f"❌ integration_defaults[{kind}]: {e.message}")


def parse_dataset(raw: dict, source: Optional[str] = None) -> TechDatabase:
    """Строит TechDatabase из уже разобранного словаря"""
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DatasetValidationError(
            f"❌ schema_version={version!r}, поддерживается {SCHEMA_VERSION}"
        )
    defaults_raw = _mapping_section(raw, "integration_defaults")
    integration_defaults = {}
    for kind, item in defaults_raw.items():
        integration_defaults[kind] = _validate_record(
            IntegrationDefaults, item, "integration_defaults", kind
        )
    system_defaults = _validate_record(
        SystemDefaults, _mapping_section(raw, "system_defaults"), "system_defaults", 0
    )
    nodes = _build_table(raw, "nodes", TechNode)
    db = TechDatabase(
        schema_version=version,
        dataset_version=str(raw.get("dataset_version", "unversioned")),
        provenance=str(raw.get("provenance", "")),
        nodes=nodes,
        interposer_nodes=_build_table(raw, "interposer_nodes", TechNode, required=False),
        panels=_build_table(raw, "panels", PanelSpec, required=False),
        bump_techs=_build_table(raw, "bump_techs", BumpTech),
        package_classes=_build_table(raw, "package_classes", PackageClass),
        integration_defaults=MappingProxyType(integration_defaults),
        system_defaults=system_defaults,
        source=source,
        warnings=tuple(_density_warnings(nodes)),
    )
    _check_references(db)
    return db


def load_dataset(path: Optional[str] = None) -> TechDatabase:
    """
    Загружает и валидирует набор данных

    Args:
        path: Путь к YAML (по умолчанию — переменная окружения или встроенный файл)

    Returns:
        TechDatabase: неизменяемая база
    """
    dataset_path = Path(path) if path else default_dataset_path()
    raw = _read_yaml(dataset_path)
    db = parse_dataset(raw, source=str(dataset_path))
    for warning in db.warnings:
        logger.warning(f"⚠️ {warning}")
    logger.info(f"✅ Загружен набор данных {db.dataset_version} из {dataset_path}")
    logger.debug(f"📋 Техпроцессы: {db.node_names()}")
    return db


def dataset_to_dict(db: TechDatabase) -> dict:
    """Сериализует базу обратно в структуру файла набора данных"""
    def dump(table: Mapping) -> list:
        return [record.model_dump(mode="json") for record in table.values()]

    return {
        "schema_version": db.schema_version,
        "dataset_version": db.dataset_version,
        "provenance": db.provenance,
        "nodes": dump(db.nodes),
        "interposer_nodes": dump(db.interposer_nodes),
        "panels": dump(db.panels),
        "bump_techs": dump(db.bump_techs),
        "package_classes": dump(db.package_classes),
        "integration_defaults": {
            kind: d.model_dump(mode="json", exclude_none=True)
            for kind, d in db.integration_defaults.items()
        },
        "system_defaults": db.system_defaults.model_dump(mode="json"),
    }


def dump_dataset(db: TechDatabase, path: str) -> Path:
    """Записывает базу в YAML (для круговой проверки загрузка-запись-загрузка)"""
    out = Path(path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as f:
            yaml.safe_dump(dataset_to_dict(db), f, allow_unicode=True, sort_keys=False)
    except OSError as e:
        raise OutputError(f"❌ Ошибка записи набора данных {out}: {e}")
    logger.info(f"💾 Набор данных сохранён в {out}")
    return out
