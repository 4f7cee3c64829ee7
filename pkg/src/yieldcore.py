"""
Ядра выхода годных и раскроя пластин/панелей
Общие для моделей кристаллов и интерпозеров
"""

import math
from dataclasses import dataclass

from src.errors import ModelDomainError

# Плотность дефектов задаётся на см², площади в мм²
MM2_PER_CM2 = 100.0


@dataclass(frozen=True)
class YieldParams:
    """Параметры отрицательно-биномиальной модели выхода годных"""
    base_yield: float
    defect_density: float
    clustering_alpha: float

    def __post_init__(self):
        if not 0 < self.base_yield <= 1:
            raise ModelDomainError(f"❌ base_yield={self.base_yield} вне (0, 1]")
        if self.defect_density < 0:
            raise ModelDomainError(f"❌ defect_density={self.defect_density} < 0")
        if self.clustering_alpha <= 0:
            raise ModelDomainError(f"❌ clustering_alpha={self.clustering_alpha} <= 0")


def negbin_yield(area: float, p: YieldParams) -> float:
    """
    Выход годных по отрицательно-биномиальной модели

    Y = Y0 * (1 + A*D0/alpha)^(-alpha), A переводится из мм² в см²

    Args:
        area: Площадь кристалла/интерпозера (мм²)
        p: Параметры выхода годных

    Returns:
        float: Доля годных в (0, base_yield]
    """
    if area < 0:
        raise ModelDomainError(f"❌ Отрицательная площадь: {area} мм²")
    if area == 0 or p.defect_density == 0:
        return p.base_yield
    defects = area / MM2_PER_CM2 * p.defect_density
    return p.base_yield * (1.0 + defects / p.clustering_alpha) ** (-p.clustering_alpha)


def poisson_yield(area: float, p: YieldParams) -> float:
    """Пуассоновский предел (alpha -> бесконечность): Y0 * exp(-A*D0)"""
    if area < 0:
        raise ModelDomainError(f"❌ Отрицательная площадь: {area} мм²")
    return p.base_yield * math.exp(-area / MM2_PER_CM2 * p.defect_density)


def dies_per_round_wafer(die_area: float, wafer_diameter: float) -> int:
    """
    Число кристаллов на круглой пластине (двучленная аппроксимация)

    N = floor(pi*(d/2)^2/A - pi*d/sqrt(2A)), не меньше нуля
    """
    if die_area <= 0 or wafer_diameter <= 0:
        raise ModelDomainError(
            f"❌ Неположительные аргументы раскроя: A={die_area}, d={wafer_diameter}"
        )
    gross = math.pi * (wafer_diameter / 2) ** 2 / die_area
    edge_loss = math.pi * wafer_diameter / math.sqrt(2 * die_area)
    return max(0, math.floor(gross - edge_loss))


def units_per_panel(unit_area: float, panel) -> int:
    """
    Число изделий с прямоугольной панели: floor(A_panel / A_unit)

    Чистое отношение площадей, без двумерной укладки (завышает оценку)
    """
    if unit_area <= 0:
        raise ModelDomainError(f"❌ Неположительная площадь изделия: {unit_area} мм²")
    return math.floor(panel.panel_area / unit_area)
