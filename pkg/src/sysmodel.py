"""
Системная модель
SystemSpec -> CostReport: кристаллы, интерпозер с учётом стеков HBM,
сборка, корпус и относительная разбивка стоимости.
"""

import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.assembly import AssemblyCostResult, AssemblySpec, assemble
from src.diecost import DieCostResult, DieSpec, die_cost
from src.errors import (
    ChipletCostError,
    InfeasibleIntegrationError,
    ModelDomainError,
    SpecError,
)
from src.interposer import (
    INTEGRATION_TO_KIND,
    InterposerCostResult,
    InterposerKind,
    InterposerSpec,
    estimate_wiring_layers,
    interposer_area_from_floorplan,
    interposer_cost,
)
from src.package import (
    PackageCostResult,
    fit_package_regression,
    package_cost,
    substrate_requirements,
)
from src.techdb import BumpTech, TechDatabase
from src.utils import load_yaml_config

logger = logging.getLogger(__name__)

UM_PER_MM = 1000.0
Integration = Literal["silicon_2.5D", "organic_2.5D", "mcm"]

BREAKDOWN_KEYS = (
    "core_dies", "hbm_stacks", "interposer", "bonding",
    "bond_yield_loss", "package", "overhead",
)


class HbmSpec(BaseModel):
    """Стеки HBM: количество, след, ширина интерфейса, цена покупки"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    count: int = Field(default=0, ge=0)
    footprint_mm2: Optional[float] = Field(default=None, gt=0)
    signal_width: Optional[int] = Field(default=None, gt=0)
    unit_price: float = Field(default=0.0, ge=0)


class SystemSpec(BaseModel):
    """Полное описание SiP"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "system"
    dies: Tuple[DieSpec, ...]
    hbm: HbmSpec = HbmSpec()
    integration: Integration
    bump_tech: Optional[str] = None
    package_class: Optional[str] = None
    interposer_node: Optional[str] = None
    panel: Optional[str] = None
    interposer_area: Optional[float] = Field(default=None, gt=0)

    def hbm_footprint(self, db: TechDatabase) -> float:
        return self.hbm.footprint_mm2 or db.system_defaults.hbm_footprint_mm2

    def hbm_signal_width(self, db: TechDatabase) -> int:
        return self.hbm.signal_width or db.system_defaults.hbm_signal_width


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Вердикт размещения интерфейсов HBM при шаге бампов интеграции"""
    feasible: bool
    integration: str
    bump_tech: str = ""
    pitch_um: float = 0.0
    interface_area: float = 0.0
    footprint: float = 0.0
    violating_interface: Optional[str] = None

    @property
    def reason(self) -> str:
        if self.feasible:
            return "ok"
        return (
            f"{self.violating_interface}: интерфейс {self.interface_area:.2f} мм² при шаге "
            f"{self.pitch_um:g} мкм больше следа стека {self.footprint:.2f} мм²"
        )

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "integration": self.integration,
            "bump_tech": self.bump_tech,
            "pitch_um": self.pitch_um,
            "interface_area": self.interface_area,
            "footprint": self.footprint,
            "violating_interface": self.violating_interface,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class CostReport:
    """
    Полная разбивка стоимости системы

    relative_breakdown нормирована на приведённую стоимость логических
    кристаллов (core_dies = 1); overhead = interposer + bonding + bond_yield_loss.
    """
    system: str
    integration: str
    dataset_version: str
    die_costs: Tuple[DieCostResult, ...]
    hbm_count: int
    interposer_cost: InterposerCostResult
    assembly: AssemblyCostResult
    bonding_total: float
    package_cost: PackageCostResult
    grand_total: float
    relative_breakdown: Dict[str, float]
    feasibility: FeasibilityVerdict
    bond_yield_from_first_die: bool = False
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def core_die_cost(self) -> float:
        return math.fsum(d.yielded_cost for d in self.die_costs)

    @property
    def overhead(self) -> float:
        return self.relative_breakdown["overhead"]

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "integration": self.integration,
            "dataset_version": self.dataset_version,
            "bond_yield_from_first_die": self.bond_yield_from_first_die,
            "dies": [d.to_dict() for d in self.die_costs],
            "hbm_count": self.hbm_count,
            "interposer": self.interposer_cost.to_dict(),
            "assembly": self.assembly.to_dict(),
            "bonding_total": self.bonding_total,
            "package": self.package_cost.to_dict(),
            "grand_total": self.grand_total,
            "relative_breakdown": dict(self.relative_breakdown),
            "feasibility": self.feasibility.to_dict(),
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def summary_row(self) -> dict:
        """Плоская строка для CSV и таблиц"""
        row = {
            "system": self.system,
            "integration": self.integration,
            "die_count": len(self.die_costs),
            "hbm_count": self.hbm_count,
            "core_die_cost": self.core_die_cost,
            "interposer_cost": self.interposer_cost.yielded_cost,
            "bonding_total": self.bonding_total,
            "bond_yield_loss": self.assembly.bond_yield_loss,
            "assembly_total": self.assembly.total,
            "package_cost": self.package_cost.cost,
            "package_extrapolated": self.package_cost.extrapolated,
            "grand_total": self.grand_total,
        }
        row.update({f"rel_{k}": self.relative_breakdown[k] for k in BREAKDOWN_KEYS})
        return row

    def to_table(self) -> str:
        """Выровненная текстовая таблица для терминала"""
        lines = [
            f"Система: {self.system} ({self.integration}), набор данных {self.dataset_version}",
            "",
            f"{'Компонент':<28}{'Площадь, мм²':>14}{'Стоимость':>14}{'Выход':>10}{'Привед.':>14}",
        ]
        for d in self.die_costs:
            lines.append(
                f"{d.name + ' @' + d.node:<28}{d.area:>14.2f}{d.unit_cost:>14.4f}"
                f"{d.yield_:>10.4f}{d.yielded_cost:>14.4f}"
            )
        ip = self.interposer_cost
        if ip.kind is not InterposerKind.NONE:
            lines.append(
                f"{'interposer ' + ip.carrier:<28}{ip.area:>14.2f}{ip.unit_cost:>14.4f}"
                f"{ip.yield_:>10.4f}{ip.yielded_cost:>14.4f}"
            )
        lines += [
            "",
            f"{'Бондинг':<28}{self.bonding_total:>14.4f}",
            f"{'Потери выхода бондинга':<28}{self.assembly.bond_yield_loss:>14.4f}",
            f"{'Сборка итого':<28}{self.assembly.total:>14.4f}",
            f"{'Корпус ' + self.package_cost.source_class:<28}{self.package_cost.cost:>14.4f}"
            + ("  (экстраполяция)" if self.package_cost.extrapolated else ""),
            f"{'ИТОГО':<28}{self.grand_total:>14.4f}",
            "",
            "Относительно логических кристаллов:",
        ]
        lines += [f"  {k:<24}{self.relative_breakdown[k]:>10.2%}" for k in BREAKDOWN_KEYS]
        return "\n".join(lines)


def interface_area(signal_count: int, pitch: float) -> float:
    """
    Площадь интерфейса бампов (мм²) при квадратной сетке

    (ceil(sqrt(signal_count)) * pitch)², шаг в мкм
    """
    if signal_count <= 0 or pitch <= 0:
        raise ModelDomainError(f"❌ Неположительные параметры интерфейса: {signal_count}, {pitch}")
    side = math.isqrt(signal_count - 1) + 1
    return (side * pitch / UM_PER_MM) ** 2


def _bump_for(system: SystemSpec, db: TechDatabase) -> BumpTech:
    return db.lookup_bump(system.bump_tech or db.defaults_for(system.integration).bump_tech)


def check_integration_feasibility(system: SystemSpec, db: TechDatabase) -> FeasibilityVerdict:
    """Помещается ли интерфейс каждого стека HBM под его след при шаге бампов"""
    bump = _bump_for(system, db)
    if system.hbm.count == 0:
        return FeasibilityVerdict(True, system.integration, bump.name, bump.pitch)
    footprint = system.hbm_footprint(db)
    area = interface_area(system.hbm_signal_width(db), bump.pitch)
    feasible = area <= footprint
    return FeasibilityVerdict(
        feasible=feasible,
        integration=system.integration,
        bump_tech=bump.name,
        pitch_um=bump.pitch,
        interface_area=area,
        footprint=footprint,
        violating_interface=None if feasible else "hbm[0]",
    )


def _attributed(component: str, fn, *args):
    """Выполняет fn, привязывая ошибку модели к компоненту"""
    try:
        return fn(*args)
    except ChipletCostError as e:
        raise e.with_component(component) from e


def _interposer_for(system: SystemSpec, db: TechDatabase, unit_areas: List[float]) -> InterposerCostResult:
    kind = INTEGRATION_TO_KIND[system.integration]
    if kind is InterposerKind.NONE:
        return InterposerCostResult.none()
    defaults = db.defaults_for(system.integration)
    sd = db.system_defaults
    area = system.interposer_area or interposer_area_from_floorplan(
        unit_areas, sd.floorplan_spacing_mm, sd.floorplan_overhead_fraction
    )
    signals = (
        system.hbm.count * system.hbm_signal_width(db)
        + (len(system.dies) - 1) * sd.die_to_die_signals
    )
    shoreline = math.fsum(math.sqrt(a) for a in unit_areas)
    layers = estimate_wiring_layers(signals, shoreline, sd.interposer_signals_per_mm_per_layer)
    if kind is InterposerKind.SILICON:
        carrier = db.lookup_interposer_node(system.interposer_node or defaults.interposer_node or "")
    else:
        carrier = db.select_panel(system.panel or defaults.panel or "", layers)
    return interposer_cost(InterposerSpec(kind, area, carrier, layers))


def _relative_breakdown(core: float, hbm: float, ip: float, assembly: AssemblyCostResult,
                        package: float) -> Dict[str, float]:
    if core <= 0:
        raise ModelDomainError("❌ Нулевая стоимость логических кристаллов: разбивка не определена")
    parts = {
        "core_dies": 1.0,
        "hbm_stacks": hbm / core,
        "interposer": ip / core,
        "bonding": assembly.bonding_total / core,
        "bond_yield_loss": assembly.bond_yield_loss / core,
        "package": package / core,
    }
    parts["overhead"] = parts["interposer"] + parts["bonding"] + parts["bond_yield_loss"]
    return parts


def evaluate_system(system: SystemSpec, db: TechDatabase,
                    bond_yield_from_first_die: bool = False) -> CostReport:
    """
    Полная оценка системы

    Кристаллы, затем интерпозер (площадь включает следы HBM), сборка,
    где стеки HBM идут после логических кристаллов с нулевой стоимостью
    изготовления, и корпус по регрессии.

    Raises:
        InfeasibleIntegrationError: интерфейс HBM не помещается при шаге бампов
        ChipletCostError: ошибки модулей с указанием компонента
    """
    if not system.dies:
        raise ModelDomainError("❌ В системе нет ни одного кристалла", component=system.name)
    bump = _attributed("bump_tech", _bump_for, system, db)
    verdict = check_integration_feasibility(system, db)
    if not verdict.feasible:
        raise InfeasibleIntegrationError(f"❌ {verdict.reason}", component=verdict.violating_interface)

    dies: List[DieCostResult] = []
    bumps: List[BumpTech] = []
    for i, spec in enumerate(system.dies):
        component = f"die[{i}] {spec.name}"
        node = _attributed(component, db.lookup_node, spec.node)
        dies.append(_attributed(component, die_cost, spec, node))
        bumps.append(_attributed(component, db.lookup_bump, spec.bump_tech) if spec.bump_tech else bump)

    hbm_area = system.hbm_footprint(db)
    hbm_units = [
        DieCostResult(
            area=hbm_area,
            unit_cost=system.hbm.unit_price,
            yield_=1.0,
            yielded_cost=system.hbm.unit_price,
            name=f"hbm[{j}]",
            node="hbm",
        )
        for j in range(system.hbm.count)
    ]
    unit_areas = [d.area for d in dies] + [hbm_area] * system.hbm.count
    ip = _attributed("interposer", _interposer_for, system, db, unit_areas)

    spec = AssemblySpec(
        dies=tuple(zip(dies, bumps)) + tuple((h, bump) for h in hbm_units),
        interposer=ip,
    )
    asm = _attributed("assembly", assemble, spec, bond_yield_from_first_die)

    class_name = system.package_class or db.defaults_for(system.integration).package_class
    package_class = _attributed("package", db.lookup_package_class, class_name)
    regression = _attributed("package", fit_package_regression, package_class)
    substrate_area, pins = _attributed("package", substrate_requirements, system, db)
    pkg = _attributed("package", package_cost, regression, substrate_area, pins)

    warnings = []
    if pkg.extrapolated:
        warnings.append(
            f"корпус {pkg.source_class}: ({substrate_area:.1f} мм², {pins} выводов) "
            f"вне области образцов регрессии"
        )
    core = math.fsum(d.yielded_cost for d in dies)
    hbm_total = system.hbm.unit_price * system.hbm.count
    report = CostReport(
        system=system.name,
        integration=system.integration,
        dataset_version=db.dataset_version,
        die_costs=tuple(dies),
        hbm_count=system.hbm.count,
        interposer_cost=ip,
        assembly=asm,
        bonding_total=asm.bonding_total,
        package_cost=pkg,
        grand_total=asm.total + pkg.cost,
        relative_breakdown=_relative_breakdown(core, hbm_total, ip.yielded_cost, asm, pkg.cost),
        feasibility=verdict,
        bond_yield_from_first_die=bond_yield_from_first_die,
        warnings=tuple(warnings),
    )
    logger.debug(f"📊 {system.name} ({system.integration}): итого {report.grand_total:.4f}")
    return report


def load_system_spec(path: str) -> SystemSpec:
    """Читает YAML-спецификацию системы (корень или раздел 'system')"""
    raw = load_yaml_config(path)
    if isinstance(raw, dict) and "system" in raw:
        raw = raw["system"]
    if not isinstance(raw, dict):
        raise SpecError(f"❌ {path}: ожидался словарь с описанием системы")
    try:
        system = SystemSpec.model_validate(raw)
    except ValidationError as e:
        raise SpecError(f"❌ {Path(path).name}: {format_validation_error(e)}")
    logger.info(f"📋 Спецификация {system.name}: {len(system.dies)} кристаллов, {system.integration}")
    return system


def format_validation_error(error: ValidationError) -> str:
    """Первая ошибка pydantic в виде 'поле: причина'"""
    err = error.errors()[0]
    where = ".".join(str(part) for part in err["loc"]) or "<root>"
    return f"{where}: {err['msg']}"
