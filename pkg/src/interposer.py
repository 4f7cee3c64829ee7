"""
Стоимость подложки интеграции
Кремниевый интерпозер (пластина), органический интерпозер (панель)
или его отсутствие (MCM).
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Union

from src.errors import DieTooLargeError, ModelDomainError
from src.techdb import PanelSpec, TechNode
from src.yieldcore import dies_per_round_wafer, negbin_yield, units_per_panel

logger = logging.getLogger(__name__)


class InterposerKind(str, Enum):
    SILICON = "silicon"
    ORGANIC = "organic"
    NONE = "none"


# Вид интеграции системы -> вид интерпозера
INTEGRATION_TO_KIND = {
    "silicon_2.5D": InterposerKind.SILICON,
    "organic_2.5D": InterposerKind.ORGANIC,
    "mcm": InterposerKind.NONE,
}


@dataclass(frozen=True)
class InterposerSpec:
    """Описание интерпозера: вид, площадь, техпроцесс или панель"""
    kind: InterposerKind
    area: Optional[float] = None
    node_or_panel: Optional[Union[TechNode, PanelSpec]] = None
    wiring_layers: int = 1

    def __post_init__(self):
        if self.kind is not InterposerKind.NONE:
            if self.area is None or self.area <= 0:
                raise ModelDomainError(f"❌ Площадь интерпозера должна быть > 0: {self.area}")
            if self.node_or_panel is None:
                raise ModelDomainError(f"❌ Для интерпозера '{self.kind.value}' не задан техпроцесс/панель")


@dataclass(frozen=True)
class InterposerCostResult:
    """Стоимость и выход годных интерпозера (для MCM — нулевой вклад)"""
    kind: InterposerKind
    unit_cost: float
    yield_: float
    yielded_cost: float
    area: float = 0.0
    units_per_carrier: int = 0
    carrier: str = ""
    wiring_layers: int = 0

    @classmethod
    def none(cls) -> "InterposerCostResult":
        return cls(kind=InterposerKind.NONE, unit_cost=0.0, yield_=1.0, yielded_cost=0.0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "carrier": self.carrier,
            "area": self.area,
            "wiring_layers": self.wiring_layers,
            "units_per_carrier": self.units_per_carrier,
            "unit_cost": self.unit_cost,
            "yield": self.yield_,
            "yielded_cost": self.yielded_cost,
        }


def organic_interposer_cost(area: float, panel: PanelSpec) -> InterposerCostResult:
    """
    Органический интерпозер, изготавливаемый на панели

    C = C_panel / floor(A_panel / A), Y = Y_panel * (1 + A*D0/alpha)^(-alpha)
    """
    if area <= 0:
        raise ModelDomainError(f"❌ Неположительная площадь интерпозера: {area} мм²")
    if area > panel.panel_area:
        raise ModelDomainError(
            f"❌ Интерпозер {area:.1f} мм² больше панели '{panel.name}' ({panel.panel_area:.0f} мм²)"
        )
    count = units_per_panel(area, panel)
    unit_cost = panel.panel_cost / count
    panel_yield = negbin_yield(area, panel.yield_params)
    return InterposerCostResult(
        kind=InterposerKind.ORGANIC,
        unit_cost=unit_cost,
        yield_=panel_yield,
        yielded_cost=unit_cost / panel_yield,
        area=area,
        units_per_carrier=count,
        carrier=panel.name,
        wiring_layers=panel.layers,
    )


def silicon_interposer_cost(area: float, node: TechNode,
                            wiring_layers: Optional[int] = None) -> InterposerCostResult:
    """
    Пассивный кремниевый интерпозер: та же схема, что и для кристалла

    Если у техпроцесса есть стоимость пластины по числу слоёв, выбирается
    запись, покрывающая wiring_layers.
    """
    if area <= 0:
        raise ModelDomainError(f"❌ Неположительная площадь интерпозера: {area} мм²")
    count = dies_per_round_wafer(area, node.wafer_diameter)
    if count < 1:
        raise DieTooLargeError(
            f"❌ Интерпозер {area:.1f} мм² не помещается на пластину {node.wafer_diameter} мм"
        )
    layers = wiring_layers or 0
    wafer_cost = node.wafer_cost_for_layers(layers) if layers else node.wafer_cost
    unit_cost = wafer_cost / count
    si_yield = negbin_yield(area, node.yield_params)
    return InterposerCostResult(
        kind=InterposerKind.SILICON,
        unit_cost=unit_cost,
        yield_=si_yield,
        yielded_cost=unit_cost / si_yield,
        area=area,
        units_per_carrier=count,
        carrier=node.name,
        wiring_layers=layers,
    )


def interposer_cost(spec: InterposerSpec) -> InterposerCostResult:
    """Выбор модели по виду интерпозера"""
    if spec.kind is InterposerKind.NONE:
        return InterposerCostResult.none()
    if spec.kind is InterposerKind.ORGANIC:
        return organic_interposer_cost(spec.area, spec.node_or_panel)
    return silicon_interposer_cost(spec.area, spec.node_or_panel, spec.wiring_layers)


def interposer_area_from_floorplan(die_areas: Iterable[float], spacing: float = 0.0,
                                   overhead_fraction: float = 0.0) -> float:
    """
    Площадь интерпозера по списку площадей кристаллов

    Каждый кристалл считается квадратом, расширенным на spacing по стороне;
    сумма умножается на (1 + overhead_fraction).

    Args:
        die_areas: Площади кристаллов и стеков HBM (мм²)
        spacing: Зазор между кристаллами (мм)
        overhead_fraction: Доля на разводку и края интерпозера

    Returns:
        float: Площадь интерпозера (мм²), не меньше суммы площадей
    """
    areas = list(die_areas)
    if not areas:
        raise ModelDomainError("❌ Пустой список кристаллов для планировки интерпозера")
    if any(a <= 0 for a in areas):
        raise ModelDomainError(f"❌ Неположительная площадь в планировке: {areas}")
    if spacing < 0 or overhead_fraction < 0:
        raise ModelDomainError(
            f"❌ Отрицательные параметры планировки: spacing={spacing}, overhead={overhead_fraction}"
        )
    # сортировка делает сумму независимой от порядка кристаллов
    padded = math.fsum(sorted(
        (math.sqrt(a) + spacing) ** 2 if spacing else a for a in areas
    ))
    return padded * (1.0 + overhead_fraction)


def estimate_wiring_layers(signals: int, shoreline_mm: float,
                           signals_per_mm_per_layer: float) -> int:
    """
    Оценка числа слоёв разводки интерпозера

    ceil(сигналы / (периметр * сигналов на мм на слой)), не меньше 1.
    Значение информационное: оно только выбирает запись стоимости.
    """
    if shoreline_mm <= 0 or signals_per_mm_per_layer <= 0:
        raise ModelDomainError(
            f"❌ Неположительные параметры разводки: {shoreline_mm} мм, {signals_per_mm_per_layer}"
        )
    if signals < 0:
        raise ModelDomainError(f"❌ Отрицательное число сигналов: {signals}")
    return max(1, math.ceil(signals / (shoreline_mm * signals_per_mm_per_layer)))
