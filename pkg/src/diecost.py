"""
Модель стоимости одного кристалла
Переводит описание кристалла (транзисторы или площадь) в площадь,
стоимость изготовления и выход годных на выбранном техпроцессе.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import DieTooLargeError, SpecError
from src.techdb import TechNode
from src.yieldcore import dies_per_round_wafer, negbin_yield

logger = logging.getLogger(__name__)

# Допуск согласованности явной площади и площади из числа транзисторов
AREA_CONSISTENCY_TOLERANCE = 0.01
MTX_PER_BTX = 1000.0


class DieSpec(BaseModel):
    """Функциональный кристалл: размер задаётся числом транзисторов или площадью"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "die"
    node: str
    transistor_count: Optional[float] = Field(default=None, gt=0)  # млрд
    area: Optional[float] = Field(default=None, gt=0)  # мм²
    io_fraction: float = Field(default=0.0, ge=0, lt=1)
    signals: Optional[int] = Field(default=None, ge=0)
    bump_tech: Optional[str] = None

    @model_validator(mode="after")
    def _check_size(self) -> "DieSpec":
        if self.transistor_count is None and self.area is None:
            raise ValueError("нужно задать transistor_count или area")
        return self


@dataclass(frozen=True)
class DieCostResult:
    """Стоимость, выход годных и приведённая стоимость кристалла"""
    area: float
    unit_cost: float
    yield_: float
    yielded_cost: float
    name: str = "die"
    node: str = ""
    dies_per_wafer: int = 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "node": self.node,
            "area": self.area,
            "dies_per_wafer": self.dies_per_wafer,
            "unit_cost": self.unit_cost,
            "yield": self.yield_,
            "yielded_cost": self.yielded_cost,
        }


def area_from_transistors(transistor_count: float, io_fraction: float, node: TechNode) -> float:
    """
    Площадь логики и периферии по числу транзисторов

    I/O-транзисторы занимают площадь с понижающим коэффициентом плотности
    io_density_factor техпроцесса.
    """
    mtx = transistor_count * MTX_PER_BTX
    logic = (1.0 - io_fraction) / node.transistor_density
    io = io_fraction / (node.transistor_density * node.io_density_factor)
    return mtx * (logic + io)


def die_area(spec: DieSpec, node: TechNode) -> float:
    """
    Площадь кристалла на техпроцессе (мм²)

    Явная площадь передаётся как есть; если заданы оба размера,
    они должны совпадать в пределах 1%.
    """
    if spec.transistor_count is None:
        return spec.area
    derived = area_from_transistors(spec.transistor_count, spec.io_fraction, node)
    if spec.area is None:
        return derived
    if abs(derived - spec.area) > AREA_CONSISTENCY_TOLERANCE * spec.area:
        raise SpecError(
            f"❌ Кристалл '{spec.name}': area={spec.area} мм² не согласуется с "
            f"{spec.transistor_count} млрд транзисторов на {node.name} ({derived:.2f} мм²)"
        )
    return spec.area


def die_cost(spec: DieSpec, node: TechNode) -> DieCostResult:
    """
    Стоимость кристалла: стоимость пластины делится на число кристаллов,
    приведённая стоимость делится ещё и на выход годных

    Raises:
        DieTooLargeError: на пластине не помещается ни одного кристалла
    """
    area = die_area(spec, node)
    count = dies_per_round_wafer(area, node.wafer_diameter)
    if count < 1:
        raise DieTooLargeError(
            f"❌ Кристалл '{spec.name}' ({area:.1f} мм²) не помещается на "
            f"пластину {node.wafer_diameter} мм"
        )
    unit_cost = node.wafer_cost / count
    die_yield = negbin_yield(area, node.yield_params)
    logger.debug(
        f"📊 {spec.name}@{node.name}: {area:.2f} мм², {count} шт/пластину, Y={die_yield:.4f}"
    )
    return DieCostResult(
        area=area,
        unit_cost=unit_cost,
        yield_=die_yield,
        yielded_cost=unit_cost / die_yield,
        name=spec.name,
        node=node.name,
        dies_per_wafer=count,
    )
