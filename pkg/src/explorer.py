"""
Исследование пространства решений
Развёртки по сетке параметров, точки перехода монолит/чиплеты
и два сценария: накладные расходы HBM и гибридные системы 7nm/12nm.
"""

import math
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Literal, Optional, Sequence, Tuple, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.diecost import DieSpec, area_from_transistors
from src.errors import ChipletCostError, ModelDomainError, SpecError, SweepCapExceededError
from src.package import fit_package_regression
from src.sysmodel import (
    BREAKDOWN_KEYS,
    CostReport,
    FeasibilityVerdict,
    HbmSpec,
    Integration,
    SystemSpec,
    check_integration_feasibility,
    evaluate_system,
    format_validation_error,
)
from src.techdb import TechDatabase, TechNode
from src.utils import load_yaml_config

logger = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 1_000_000

ModelT = TypeVar("ModelT", bound=BaseModel)


class _Spec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# ============================================================================
# РАЗБИЕНИЕ СИСТЕМЫ
# ============================================================================

class PartitionRule(_Spec):
    """Равные кристаллы площадью не больше max_die_area, не меньше min_dies штук"""
    max_die_area: float = Field(default=150.0, gt=0)
    min_dies: int = Field(default=2, ge=1)

    def die_count(self, area: float) -> int:
        return max(self.min_dies, math.ceil(area / self.max_die_area))


def _split_signals(signals: int, count: int) -> List[int]:
    """Делит внешние сигналы между кристаллами без потерь"""
    share, rest = divmod(signals, count)
    return [share + 1 if i < rest else share for i in range(count)]


def partition_system(db: TechDatabase, *, integration: str, core_node: str, die_count: int,
                     area: Optional[float] = None, transistor_count: Optional[float] = None,
                     io_fraction: float = 0.0, io_node: Optional[str] = None,
                     signals: Optional[int] = None, hbm: Optional[HbmSpec] = None,
                     package_class: Optional[str] = None, name: Optional[str] = None) -> SystemSpec:
    """
    Строит систему для одной точки пространства решений

    Args:
        db: База технологий (нужна для площади I/O-кристалла)
        integration: Вид интеграции
        core_node: Техпроцесс логических кристаллов
        die_count: Число логических кристаллов
        area: Площадь монолитного эквивалента (мм²)
        transistor_count: Или число транзисторов (млрд)
        io_fraction: Доля I/O-транзисторов
        io_node: Техпроцесс отдельного I/O-кристалла (гибрид, если отличается от core_node)
        signals: Внешние сигналы системы (по умолчанию из набора данных)

    Returns:
        SystemSpec: равные логические кристаллы и, для гибрида, один I/O-кристалл
    """
    if (area is None) == (transistor_count is None):
        raise SpecError("❌ Нужно задать ровно одно из: area, transistor_count")
    if die_count < 1:
        raise SpecError(f"❌ Число кристаллов должно быть >= 1: {die_count}")
    if signals is None:
        signals = db.system_defaults.signals_per_die
    hybrid = io_node is not None and io_node != core_node and io_fraction > 0
    label = name or f"{core_node}_{integration}_k{die_count}"

    dies: List[DieSpec] = []
    if hybrid:
        if transistor_count is None:
            raise SpecError("❌ Гибридная система задаётся числом транзисторов")
        core_tx = transistor_count * (1.0 - io_fraction) / die_count
        io_area = area_from_transistors(transistor_count * io_fraction, 1.0, db.lookup_node(io_node))
        dies += [
            DieSpec(name=f"core{i}", node=core_node, transistor_count=core_tx, signals=0)
            for i in range(die_count)
        ]
        dies.append(DieSpec(name="io", node=io_node, area=io_area, signals=signals))
    else:
        names = ["mono"] if die_count == 1 else [f"chiplet{i}" for i in range(die_count)]
        for die_name, die_signals in zip(names, _split_signals(signals, die_count)):
            if area is not None:
                dies.append(DieSpec(name=die_name, node=core_node, area=area / die_count,
                                    signals=die_signals))
            else:
                dies.append(DieSpec(name=die_name, node=core_node,
                                    transistor_count=transistor_count / die_count,
                                    io_fraction=io_fraction, signals=die_signals))
    return SystemSpec(
        name=label,
        dies=tuple(dies),
        hbm=hbm or HbmSpec(),
        integration=integration,
        package_class=package_class,
    )

# ============================================================================
# РАЗВЁРТКА
# ============================================================================

class NodePair(_Spec):
    core: str
    io: Optional[str] = None


class SweepSpec(_Spec):
    """Оси развёртки и фиксированные параметры"""
    name: str = "sweep"
    scale_unit: Literal["transistors", "area"] = "transistors"
    scales: Tuple[float, ...] = Field(min_length=1)
    io_fractions: Tuple[float, ...] = Field(default=(0.0,), min_length=1)
    node_pairs: Tuple[NodePair, ...] = Field(default=(NodePair(core="7nm"),), min_length=1)
    integrations: Tuple[Integration, ...] = Field(default=("mcm",), min_length=1)
    die_counts: Tuple[int, ...] = Field(default=(1,), min_length=1)
    hbm_stacks: int = Field(default=0, ge=0)
    signals: Optional[int] = Field(default=None, ge=0)
    package_class: Optional[str] = None
    max_points: Optional[int] = Field(default=None, gt=0)
    columns: Optional[Tuple[str, ...]] = None

    @field_validator("scales")
    @classmethod
    def _positive_scales(cls, v):
        if any(s <= 0 for s in v):
            raise ValueError("масштабы системы должны быть > 0")
        return tuple(sorted(v))

    @field_validator("io_fractions")
    @classmethod
    def _fractions(cls, v):
        if any(not 0 <= f < 1 for f in v):
            raise ValueError("io_fraction должна лежать в [0, 1)")
        return tuple(sorted(v))

    @field_validator("die_counts")
    @classmethod
    def _counts(cls, v):
        if any(k < 1 for k in v):
            raise ValueError("число кристаллов должно быть >= 1")
        return tuple(sorted(v))

    @field_validator("columns")
    @classmethod
    def _known_columns(cls, v):
        if v is not None:
            unknown = [c for c in v if c not in SWEEP_COLUMNS]
            if unknown:
                raise ValueError(f"неизвестные колонки: {unknown}")
        return v

    def point_count(self) -> int:
        return (len(self.scales) * len(self.io_fractions) * len(self.node_pairs)
                * len(self.integrations) * len(self.die_counts))

    def points(self) -> Iterator["SweepPoint"]:
        """Точки в лексикографическом порядке осей.

        Числовые оси (масштаб, доля I/O, число кристаллов) упорядочены по возрастанию
        при разборе; пары узлов и интеграции идут в порядке спецификации.
        """
        axes = itertools.product(
            self.scales, self.io_fractions, self.node_pairs, self.integrations, self.die_counts
        )
        for index, (scale, f, pair, integration, k) in enumerate(axes):
            yield SweepPoint(index, scale, f, pair.core, pair.io, integration, k)


@dataclass(frozen=True)
class SweepPoint:
    index: int
    scale: float
    io_fraction: float
    core_node: str
    io_node: Optional[str]
    integration: str
    die_count: int

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "scale": self.scale,
            "io_fraction": self.io_fraction,
            "core_node": self.core_node,
            "io_node": self.io_node,
            "integration": self.integration,
            "die_count": self.die_count,
        }


REPORT_COLUMNS = (
    "core_die_cost", "interposer_cost", "bonding_total", "bond_yield_loss",
    "assembly_total", "package_cost", "package_extrapolated", "grand_total",
) + tuple(f"rel_{k}" for k in BREAKDOWN_KEYS)

SWEEP_COLUMNS = (
    "index", "scale", "scale_unit", "io_fraction", "core_node", "io_node",
    "integration", "die_count", "hbm_count", "status", "error",
) + REPORT_COLUMNS + ("dataset_version",)


@dataclass(frozen=True)
class SweepRow:
    point: SweepPoint
    report: Optional[CostReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.report is not None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    dataset_version: str
    rows: Tuple[SweepRow, ...]
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def columns(self) -> Tuple[str, ...]:
        return self.spec.columns or SWEEP_COLUMNS

    def to_rows(self) -> List[dict]:
        table = []
        for row in self.rows:
            flat = row.point.as_dict()
            flat["scale_unit"] = self.spec.scale_unit
            flat["dataset_version"] = self.dataset_version
            if row.ok:
                summary = row.report.summary_row()
                flat.update({k: summary[k] for k in REPORT_COLUMNS})
                flat.update(hbm_count=row.report.hbm_count, status="ok", error=None)
            else:
                flat.update(hbm_count=self.spec.hbm_stacks, status="failed", error=row.error)
            table.append(flat)
        return table


def system_for_point(spec: SweepSpec, point: SweepPoint, db: TechDatabase) -> SystemSpec:
    """Система для одной точки развёртки"""
    size = {"area": point.scale} if spec.scale_unit == "area" else {"transistor_count": point.scale}
    return partition_system(
        db,
        integration=point.integration,
        core_node=point.core_node,
        io_node=point.io_node,
        die_count=point.die_count,
        io_fraction=point.io_fraction,
        signals=spec.signals,
        hbm=HbmSpec(count=spec.hbm_stacks),
        package_class=spec.package_class,
        name=f"{spec.name}[{point.index}]",
        **size,
    )


def _map_ordered(fn: Callable, items: Sequence, workers: int) -> List:
    """map с сохранением порядка входа, при workers > 1 — в пуле потоков"""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_sweep(spec: SweepSpec, db: TechDatabase, *, max_points: Optional[int] = None,
              workers: int = 1, bond_yield_from_first_die: bool = False) -> SweepResult:
    """
    Оценивает каждую точку декартова произведения осей

    Ошибка в точке записывается в строку и не прерывает развёртку.

    Raises:
        SweepCapExceededError: число точек больше лимита
    """
    cap = max_points or spec.max_points or DEFAULT_MAX_POINTS
    total = spec.point_count()
    if total > cap:
        raise SweepCapExceededError(f"❌ Развёртка '{spec.name}': {total} точек больше лимита {cap}")
    logger.info(f"🔄 Развёртка '{spec.name}': {total} точек, потоков: {workers}")

    def evaluate(point: SweepPoint) -> SweepRow:
        try:
            system = system_for_point(spec, point, db)
            return SweepRow(point, evaluate_system(system, db, bond_yield_from_first_die))
        except ChipletCostError as e:
            logger.debug(f"⚠️ Точка {point.index}: {e}")
            return SweepRow(point, error=f"{type(e).__name__}: {e}")

    rows = tuple(_map_ordered(evaluate, list(spec.points()), workers))
    failed = sum(not r.ok for r in rows)
    if failed:
        logger.warning(f"⚠️ Развёртка '{spec.name}': {failed} из {total} точек с ошибкой")
    logger.info(f"✅ Развёртка '{spec.name}' завершена")
    return SweepResult(
        spec=spec,
        dataset_version=db.dataset_version,
        rows=rows,
        config={
            "spec": spec.model_dump(mode="json"),
            "max_points": cap,
            "bond_yield_from_first_die": bond_yield_from_first_die,
        },
    )

# ============================================================================
# ТОЧКА ПЕРЕХОДА МОНОЛИТ -> ЧИПЛЕТЫ
# ============================================================================

@dataclass(frozen=True)
class SwitchingPoint:
    """
    Наименьшая площадь монолита, при которой чиплетная система дешевле

    verdict: "crossing" — найдено пересечение; "lower_bound" — чиплеты
    дешевле уже на нижней границе; "open" — пересечения нет в интервале.
    sign_changes считает смены знака (чиплеты - монолит) на сетке площадей;
    больше одной смены -> curves_monotone=False.
    """
    node: str
    integration: str
    area: Optional[int]
    transistor_count: Optional[float]
    verdict: str
    dominant: Optional[str]
    die_count: Optional[int]
    chiplet_cost: Optional[float]
    monolithic_cost: Optional[float]
    lower_area: int
    upper_area: int
    resolution: int
    curves_monotone: bool
    bracket_verified: bool
    sign_changes: int = 0

    @property
    def flagged(self) -> bool:
        return self.verdict != "crossing"

    def to_row(self) -> dict:
        return {
            "node": self.node,
            "integration": self.integration,
            "area": self.area,
            "transistor_count": self.transistor_count,
            "verdict": self.verdict,
            "dominant": self.dominant,
            "die_count": self.die_count,
            "chiplet_cost": self.chiplet_cost,
            "monolithic_cost": self.monolithic_cost,
            "lower_area": self.lower_area,
            "upper_area": self.upper_area,
            "resolution": self.resolution,
            "curves_monotone": self.curves_monotone,
            "sign_changes": self.sign_changes,
            "bracket_verified": self.bracket_verified,
        }


SWITCHPOINT_COLUMNS = (
    "node", "integration", "area", "transistor_count", "verdict", "dominant",
    "die_count", "chiplet_cost", "monolithic_cost", "lower_area", "upper_area",
    "resolution", "curves_monotone", "sign_changes", "bracket_verified", "dataset_version",
)


class SwitchPointSpec(_Spec):
    """Параметры поиска точек перехода"""
    nodes: Tuple[str, ...] = Field(default=("7nm", "10nm", "12nm", "16nm", "20nm", "28nm"), min_length=1)
    integrations: Tuple[Integration, ...] = Field(default=("organic_2.5D", "mcm"), min_length=1)
    partition: PartitionRule = PartitionRule()
    lower_area: int = Field(default=20, gt=0)
    upper_area: int = Field(default=1200, gt=0)
    resolution: int = Field(default=1, gt=0)


class _CostCurves:
    """Стоимость монолита и чиплетной системы как функции площади (с кэшем по площади)"""

    def __init__(self, node: TechNode, integration: str, partition: PartitionRule,
                 db: TechDatabase, bond_yield_from_first_die: bool):
        self.node = node
        self.integration = integration
        self.partition = partition
        self.db = db
        self.flag = bond_yield_from_first_die
        self._cache: Dict[float, Tuple[float, float]] = {}

    def costs(self, area: float) -> Tuple[float, float]:
        """(чиплеты, монолит) при площади монолита area"""
        if area not in self._cache:
            mono = partition_system(self.db, integration="mcm", core_node=self.node.name,
                                    die_count=1, area=area, name=f"mono_{self.node.name}")
            chip = partition_system(self.db, integration=self.integration, core_node=self.node.name,
                                    die_count=self.partition.die_count(area), area=area,
                                    name=f"chiplet_{self.node.name}_{self.integration}")
            self._cache[area] = (
                evaluate_system(chip, self.db, self.flag).grand_total,
                evaluate_system(mono, self.db, self.flag).grand_total,
            )
        return self._cache[area]

    def monolithic(self, area: float) -> float:
        return self.costs(area)[1]

    def chiplet(self, area: float) -> float:
        return self.costs(area)[0]

    def chiplet_cheaper(self, area: float) -> bool:
        chip, mono = self.costs(area)
        return chip <= mono


def find_switching_point(node: TechNode, integration: str, partition: PartitionRule,
                         db: TechDatabase, *, lower_area: int = 20, upper_area: int = 1200,
                         resolution: int = 1,
                         bond_yield_from_first_die: bool = False) -> SwitchingPoint:
    """
    Первая точка сетки площадей (шаг resolution), где чиплеты не дороже монолита

    Знак разности проверяется во всех точках сетки: ступени числа изделий
    на панели, выбор панели по слоям и скачки числа кристаллов дают
    несколько смен знака, поэтому поиск идёт по всей сетке, а не бисекцией.
    Больше одной смены знака даёт предупреждение и флаг curves_monotone=False.
    """
    if lower_area >= upper_area:
        raise ModelDomainError(f"❌ Пустой интервал поиска: [{lower_area}, {upper_area}]")
    curves = _CostCurves(node, integration, partition, db, bond_yield_from_first_die)
    areas = np.arange(lower_area, upper_area + 1, resolution)
    cheaper = np.array([curves.chiplet_cheaper(float(a)) for a in areas])
    sign_changes = int(np.count_nonzero(np.diff(cheaper)))
    monotone = sign_changes <= 1
    if not monotone:
        logger.warning(
            f"⚠️ {node.name}/{integration}: знак разности стоимостей меняется "
            f"{sign_changes} раз, берётся первая точка перехода"
        )

    common = dict(node=node.name, integration=integration, lower_area=lower_area,
                  upper_area=upper_area, resolution=resolution, curves_monotone=monotone,
                  sign_changes=sign_changes)

    def point_at(area: int, verdict: str, dominant: Optional[str], verified: bool) -> SwitchingPoint:
        chip, mono = curves.costs(float(area))
        return SwitchingPoint(
            area=area,
            transistor_count=area * node.transistor_density / 1000.0,
            verdict=verdict,
            dominant=dominant,
            die_count=partition.die_count(area),
            chiplet_cost=chip,
            monolithic_cost=mono,
            bracket_verified=verified,
            **common,
        )

    if not cheaper.any():
        logger.warning(f"⚠️ {node.name}/{integration}: монолит дешевле во всём интервале")
        return SwitchingPoint(area=None, transistor_count=None, verdict="open",
                              dominant="monolithic", die_count=None, chiplet_cost=None,
                              monolithic_cost=None, bracket_verified=True, **common)
    index = int(np.argmax(cheaper))
    area = int(areas[index])
    if index == 0:
        logger.warning(f"⚠️ {node.name}/{integration}: чиплеты дешевле уже при {area} мм²")
        return point_at(area, "lower_bound", "chiplet", True)

    verified = curves.chiplet_cheaper(float(area)) and not curves.chiplet_cheaper(float(areas[index - 1]))
    result = point_at(area, "crossing", None, verified)
    logger.info(
        f"📊 {node.name}/{integration}: точка перехода {area} мм² "
        f"({result.transistor_count:.2f} млрд транзисторов)"
    )
    return result


@dataclass(frozen=True)
class SwitchPointResult:
    spec: SwitchPointSpec
    dataset_version: str
    points: Tuple[SwitchingPoint, ...]
    config: Dict[str, Any] = field(default_factory=dict)

    def to_rows(self) -> List[dict]:
        return [dict(p.to_row(), dataset_version=self.dataset_version) for p in self.points]


def find_switching_points(spec: SwitchPointSpec, db: TechDatabase, *, workers: int = 1,
                          bond_yield_from_first_die: bool = False) -> SwitchPointResult:
    """Точки перехода для всех пар (техпроцесс, интеграция) в порядке спецификации"""
    pairs = [(db.lookup_node(n), i) for n in spec.nodes for i in spec.integrations]

    def search(pair) -> SwitchingPoint:
        node, integration = pair
        return find_switching_point(
            node, integration, spec.partition, db,
            lower_area=spec.lower_area, upper_area=spec.upper_area,
            resolution=spec.resolution,
            bond_yield_from_first_die=bond_yield_from_first_die,
        )

    points = tuple(_map_ordered(search, pairs, workers))
    return SwitchPointResult(
        spec=spec,
        dataset_version=db.dataset_version,
        points=points,
        config={"spec": spec.model_dump(mode="json"),
                "bond_yield_from_first_die": bond_yield_from_first_die},
    )

# ============================================================================
# СЦЕНАРИЙ: НАКЛАДНЫЕ РАСХОДЫ HBM
# ============================================================================

class HbmStudySpec(_Spec):
    node: str = "7nm"
    scales: Tuple[float, ...] = Field(default=(200.0, 400.0, 800.0), min_length=1)
    hbm_stacks: int = Field(default=2, ge=1)
    integrations: Tuple[Integration, ...] = ("silicon_2.5D", "organic_2.5D")
    partition: PartitionRule = PartitionRule(max_die_area=150.0, min_dies=1)


@dataclass(frozen=True)
class HbmOverheadRow:
    scale: float
    integration: str
    report: CostReport

    @property
    def overhead(self) -> float:
        return self.report.relative_breakdown["overhead"]

    @property
    def loss_share(self) -> float:
        """Доля потерь выхода бондинга в накладных расходах"""
        rb = self.report.relative_breakdown
        return rb["bond_yield_loss"] / rb["overhead"] if rb["overhead"] else 0.0

    def to_row(self) -> dict:
        rb = self.report.relative_breakdown
        return {
            "scale": self.scale,
            "integration": self.integration,
            "die_count": len(self.report.die_costs),
            "hbm_stacks": self.report.hbm_count,
            "core_die_cost": self.report.core_die_cost,
            "interposer_cost": self.report.interposer_cost.yielded_cost,
            "bonding_total": self.report.bonding_total,
            "bond_yield_loss": self.report.assembly.bond_yield_loss,
            "rel_interposer": rb["interposer"],
            "rel_bonding": rb["bonding"],
            "rel_bond_yield_loss": rb["bond_yield_loss"],
            "rel_overhead": rb["overhead"],
            "loss_share": self.loss_share,
            "grand_total": self.report.grand_total,
        }


HBM_COLUMNS = (
    "scale", "integration", "die_count", "hbm_stacks", "core_die_cost",
    "interposer_cost", "bonding_total", "bond_yield_loss", "rel_interposer",
    "rel_bonding", "rel_bond_yield_loss", "rel_overhead", "loss_share",
    "grand_total", "dataset_version",
)


@dataclass(frozen=True)
class HbmStudyResult:
    dataset_version: str
    rows: Tuple[HbmOverheadRow, ...]
    excluded: Tuple[Tuple[float, FeasibilityVerdict], ...]
    config: Dict[str, Any] = field(default_factory=dict)

    def to_rows(self) -> List[dict]:
        return [dict(r.to_row(), dataset_version=self.dataset_version) for r in self.rows]

    def excluded_rows(self) -> List[dict]:
        return [dict(v.to_dict(), scale=scale) for scale, v in self.excluded]


def case_study_hbm(scales: Sequence[float], db: TechDatabase, *, node: str = "7nm",
                   hbm_stacks: int = 2,
                   integrations: Sequence[str] = ("silicon_2.5D", "organic_2.5D"),
                   partition: Optional[PartitionRule] = None,
                   bond_yield_from_first_die: bool = False) -> HbmStudyResult:
    """
    Относительные накладные расходы интеграции стеков HBM

    Логика делится на кристаллы по правилу разбиения; MCM исключается
    с вердиктом о размещении интерфейса.
    """
    partition = partition or PartitionRule(max_die_area=150.0, min_dies=1)
    db.lookup_node(node)
    rows: List[HbmOverheadRow] = []
    excluded: List[Tuple[float, FeasibilityVerdict]] = []
    for scale in scales:
        k = partition.die_count(scale)

        def system(integration: str) -> SystemSpec:
            return partition_system(db, integration=integration, core_node=node, die_count=k,
                                    area=scale, hbm=HbmSpec(count=hbm_stacks),
                                    name=f"hbm_{scale:g}mm2_{integration}")

        for integration in integrations:
            report = evaluate_system(system(integration), db, bond_yield_from_first_die)
            rows.append(HbmOverheadRow(scale, integration, report))
            logger.info(
                f"📊 HBM {scale:g} мм² {integration}: накладные {report.overhead:.1%}"
            )
        verdict = check_integration_feasibility(system("mcm"), db)
        excluded.append((scale, verdict))
        if not verdict.feasible:
            logger.info(f"📋 MCM исключён при {scale:g} мм²: {verdict.reason}")
    return HbmStudyResult(
        dataset_version=db.dataset_version,
        rows=tuple(rows),
        excluded=tuple(excluded),
        config={
            "node": node,
            "scales": list(scales),
            "hbm_stacks": hbm_stacks,
            "integrations": list(integrations),
            "partition": partition.model_dump(mode="json"),
            "bond_yield_from_first_die": bond_yield_from_first_die,
        },
    )

# ============================================================================
# СЦЕНАРИЙ: ГИБРИДНЫЕ СИСТЕМЫ
# ============================================================================

class HybridStudySpec(_Spec):
    core_transistors: Tuple[float, ...] = Field(default=(5.0, 10.0, 50.0), min_length=1)
    io_fractions: Tuple[float, ...] = Field(default=(0.3, 0.4, 0.5), min_length=1)
    core_die_counts: Tuple[int, ...] = Field(default=(2, 4, 8), min_length=1)
    core_node: str = "7nm"
    io_node: str = "12nm"
    integration: Integration = "mcm"
    signals: int = Field(default=1000, gt=0)


@dataclass(frozen=True)
class HybridRow:
    scale: float
    io_fraction: float
    monolithic_core: float
    monolithic_io: float
    hybrid_costs: Tuple[Tuple[int, float], ...]
    best_die_count: int
    best_cost: float

    @property
    def improvement(self) -> float:
        """1 - лучший гибрид / монолит на техпроцессе логики"""
        return 1.0 - self.best_cost / self.monolithic_core

    @property
    def beats_both(self) -> bool:
        return self.best_cost < min(self.monolithic_core, self.monolithic_io)

    def to_row(self) -> dict:
        row = {
            "scale": self.scale,
            "io_fraction": self.io_fraction,
            "monolithic_core": self.monolithic_core,
            "monolithic_io": self.monolithic_io,
        }
        row.update({f"hybrid_k{k}": cost for k, cost in self.hybrid_costs})
        row.update(best_die_count=self.best_die_count, best_cost=self.best_cost,
                   improvement=self.improvement, beats_both=self.beats_both)
        return row


@dataclass(frozen=True)
class HybridStudyResult:
    spec: HybridStudySpec
    dataset_version: str
    rows: Tuple[HybridRow, ...]
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def columns(self) -> Tuple[str, ...]:
        return (
            ("scale", "io_fraction", "monolithic_core", "monolithic_io")
            + tuple(f"hybrid_k{k}" for k in self.spec.core_die_counts)
            + ("best_die_count", "best_cost", "improvement", "beats_both", "dataset_version")
        )

    def to_rows(self) -> List[dict]:
        return [dict(r.to_row(), dataset_version=self.dataset_version) for r in self.rows]


def case_study_hybrid(core_tx: Sequence[float], io_fractions: Sequence[float],
                      core_die_counts: Sequence[int], db: TechDatabase, *,
                      core_node: str = "7nm", io_node: str = "12nm", integration: str = "mcm",
                      signals: int = 1000,
                      bond_yield_from_first_die: bool = False) -> HybridStudyResult:
    """
    Монолиты на двух техпроцессах против гибридов: k логических кристаллов
    на core_node и один I/O-кристалл на io_node
    """
    db.lookup_node(core_node)
    db.lookup_node(io_node)
    spec = HybridStudySpec(core_transistors=tuple(core_tx), io_fractions=tuple(io_fractions),
                           core_die_counts=tuple(core_die_counts), core_node=core_node,
                           io_node=io_node, integration=integration, signals=signals)
    rows: List[HybridRow] = []
    for scale in core_tx:
        for f in io_fractions:
            def cost(node: str, k: int, io: Optional[str], kind: str) -> float:
                system = partition_system(db, integration=kind, core_node=node, die_count=k,
                                          transistor_count=scale, io_fraction=f, io_node=io,
                                          signals=signals,
                                          name=f"{scale:g}B_f{f:g}_{node}_k{k}")
                return evaluate_system(system, db, bond_yield_from_first_die).grand_total

            mono_core = cost(core_node, 1, None, "mcm")
            mono_io = cost(io_node, 1, None, "mcm")
            hybrids = tuple((k, cost(core_node, k, io_node, integration)) for k in core_die_counts)
            best_k, best = min(hybrids, key=lambda kc: (kc[1], kc[0]))
            row = HybridRow(scale, f, mono_core, mono_io, hybrids, best_k, best)
            rows.append(row)
            logger.info(
                f"📊 Гибрид {scale:g} млрд, I/O {f:.0%}: лучший k={best_k}, "
                f"выигрыш {row.improvement:.1%}"
            )
    return HybridStudyResult(
        spec=spec,
        dataset_version=db.dataset_version,
        rows=tuple(rows),
        config={"spec": spec.model_dump(mode="json"),
                "bond_yield_from_first_die": bond_yield_from_first_die},
    )

# ============================================================================
# ДАННЫЕ ДЛЯ ГРАФИКОВ (длинный формат)
# ============================================================================

PACKAGE_PLOT_COLUMNS = ("package_class", "series", "substrate_area", "pin_count", "cost", "dataset_version")
HBM_PLOT_COLUMNS = ("scale", "integration", "component", "value", "dataset_version")
HYBRID_PLOT_COLUMNS = ("scale", "io_fraction", "system", "cost", "dataset_version")
SWITCH_PLOT_COLUMNS = ("node", "integration", "area", "transistor_count", "verdict", "dataset_version")


def package_plot_rows(db: TechDatabase) -> List[dict]:
    """Образцы стоимости корпусов и значения подобранной плоскости в тех же точках"""
    rows = []
    for pc in db.package_classes.values():
        reg = fit_package_regression(pc)
        for area, pins, cost in pc.sample_points:
            base = dict(package_class=pc.name, substrate_area=area, pin_count=pins,
                        dataset_version=db.dataset_version)
            rows.append(dict(base, series="sample", cost=cost))
            rows.append(dict(base, series="fit", cost=reg.mu0 * area + reg.mu1 * pins + reg.mu2))
    return rows


def hbm_plot_rows(result: HbmStudyResult) -> List[dict]:
    components = ("interposer", "bonding", "bond_yield_loss", "overhead")
    return [
        dict(scale=r.scale, integration=r.integration, component=c,
             value=r.report.relative_breakdown[c], dataset_version=result.dataset_version)
        for r in result.rows for c in components
    ]


def hybrid_plot_rows(result: HybridStudyResult) -> List[dict]:
    rows = []
    spec = result.spec
    for r in result.rows:
        series = [(f"mono_{spec.core_node}", r.monolithic_core), (f"mono_{spec.io_node}", r.monolithic_io)]
        series += [(f"hybrid_k{k}", c) for k, c in r.hybrid_costs]
        rows += [dict(scale=r.scale, io_fraction=r.io_fraction, system=name, cost=c,
                      dataset_version=result.dataset_version) for name, c in series]
    return rows


def switching_plot_rows(result: SwitchPointResult) -> List[dict]:
    return [
        dict(node=p.node, integration=p.integration, area=p.area,
             transistor_count=p.transistor_count, verdict=p.verdict,
             dataset_version=result.dataset_version)
        for p in result.points
    ]

# ============================================================================
# ЗАГРУЗКА СПЕЦИФИКАЦИЙ
# ============================================================================

def load_spec(path, model: Type[ModelT], section: Optional[str] = None,
              defaults: Optional[dict] = None) -> ModelT:
    """
    Читает YAML-спецификацию и валидирует её моделью

    Args:
        path: Путь к YAML
        model: pydantic-модель спецификации
        section: Необязательный раздел корня (например, 'sweep')
        defaults: Значения по умолчанию из настроек (перекрываются файлом)
    """
    raw = load_yaml_config(path) if path else {}
    raw = raw or {}
    if section and isinstance(raw, dict) and section in raw:
        raw = raw[section]
    if not isinstance(raw, dict):
        raise SpecError(f"❌ {path}: ожидался словарь")
    try:
        return model.model_validate({**(defaults or {}), **raw})
    except ValidationError as e:
        raise SpecError(f"❌ {Path(path).name if path else model.__name__}: {format_validation_error(e)}")
