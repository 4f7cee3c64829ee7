"""
Регрессионная модель стоимости корпуса
C_P = mu0 * A_sub + mu1 * N_pin + mu2, коэффициенты подбираются МНК
по таблице образцов для каждого класса корпуса.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Tuple

import numpy as np
from scipy import linalg
from scipy.spatial import ConvexHull, QhullError

from src.diecost import die_area
from src.errors import ModelDomainError, RankDeficientError
from src.interposer import interposer_area_from_floorplan
from src.techdb import PackageClass, TechDatabase

if TYPE_CHECKING:
    from src.sysmodel import SystemSpec

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10
HULL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PackageRegression:
    """Подобранные коэффициенты для одного класса корпуса"""
    mu0: float  # за мм² подложки
    mu1: float  # за вывод
    mu2: float  # постоянная часть
    r_squared: float
    source_class: str
    sample_count: int
    # Грани выпуклой оболочки образцов: a*A + b*N + c <= 0 внутри
    hull_equations: Tuple[Tuple[float, float, float], ...] = ()

    def contains(self, substrate_area: float, pin_count: float) -> bool:
        """Лежит ли точка внутри оболочки образцов (иначе — экстраполяция)"""
        if not self.hull_equations:
            return False
        point = np.array([substrate_area, pin_count, 1.0])
        tolerance = HULL_TOLERANCE * max(abs(substrate_area), abs(pin_count), 1.0)
        return bool(np.all(np.array(self.hull_equations) @ point <= tolerance))

    def to_dict(self) -> dict:
        return {
            "package_class": self.source_class,
            "mu0": self.mu0,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "r_squared": self.r_squared,
            "sample_count": self.sample_count,
        }


@dataclass(frozen=True)
class PackageCostResult:
    cost: float
    extrapolated: bool
    source_class: str
    substrate_area: float
    pin_count: int

    def to_dict(self) -> dict:
        return {
            "package_class": self.source_class,
            "substrate_area": self.substrate_area,
            "pin_count": self.pin_count,
            "cost": self.cost,
            "extrapolated": self.extrapolated,
        }


def _hull_equations(points: np.ndarray) -> Tuple[Tuple[float, float, float], ...]:
    unique = np.unique(points, axis=0)
    try:
        hull = ConvexHull(unique)
    except QhullError:
        return ()
    return tuple(tuple(float(v) for v in row) for row in hull.equations)


@lru_cache(maxsize=None)
def fit_package_regression(package_class: PackageClass) -> PackageRegression:
    """
    МНК-плоскость через образцы класса корпуса

    Решение через pivoted QR (gelsy); столбцы нормируются перед проверкой ранга.

    Raises:
        RankDeficientError: образцы коллинеарны в плоскости (площадь, выводы)
    """
    samples = np.asarray(package_class.sample_points, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 3:
        raise RankDeficientError(
            f"❌ Класс '{package_class.name}': нужно не меньше 3 образцов"
        )
    design = np.column_stack([samples[:, 0], samples[:, 1], np.ones(len(samples))])
    costs = samples[:, 2]
    scale = np.abs(design).max(axis=0)
    scale[scale == 0] = 1.0

    coef_scaled, _, rank, _ = linalg.lstsq(
        design / scale, costs, cond=RANK_TOLERANCE, lapack_driver="gelsy"
    )
    if rank < 3:
        raise RankDeficientError(
            f"❌ Класс '{package_class.name}': ранг матрицы регрессии {rank} < 3"
        )
    mu0, mu1, mu2 = (coef_scaled / scale).tolist()

    residuals = costs - design @ np.array([mu0, mu1, mu2])
    ss_res = float(residuals @ residuals)
    centered = costs - costs.mean()
    ss_tot = float(centered @ centered)
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    r_squared = min(1.0, max(0.0, r_squared))

    logger.info(
        f"📊 Корпус {package_class.name}: mu0={mu0:.6g}, mu1={mu1:.6g}, "
        f"mu2={mu2:.6g}, R²={r_squared:.4f}"
    )
    return PackageRegression(
        mu0=mu0,
        mu1=mu1,
        mu2=mu2,
        r_squared=r_squared,
        source_class=package_class.name,
        sample_count=len(samples),
        hull_equations=_hull_equations(samples[:, :2]),
    )


def package_cost(reg: PackageRegression, substrate_area: float, pin_count: int) -> PackageCostResult:
    """
    Стоимость корпуса по подобранной регрессии

    Точка вне оболочки образцов считается, но помечается как экстраполяция.
    """
    if substrate_area <= 0 or pin_count <= 0:
        raise ModelDomainError(
            f"❌ Неположительные параметры корпуса: A={substrate_area}, N={pin_count}"
        )
    cost = reg.mu0 * substrate_area + reg.mu1 * pin_count + reg.mu2
    extrapolated = not reg.contains(substrate_area, pin_count)
    if extrapolated:
        logger.debug(
            f"⚠️ Корпус {reg.source_class}: ({substrate_area:.1f} мм², {pin_count}) "
            f"вне области образцов"
        )
    return PackageCostResult(
        cost=cost,
        extrapolated=extrapolated,
        source_class=reg.source_class,
        substrate_area=substrate_area,
        pin_count=pin_count,
    )


def substrate_requirements(system: "SystemSpec", db: TechDatabase) -> Tuple[float, int]:
    """
    Площадь подложки корпуса и число выводов системы

    Площадь — след интерпозера (или разнесённых кристаллов MCM), умноженный
    на коэффициент разводки корпуса; выводы — внешние сигналы кристаллов
    плюс питание/земля.
    """
    if not system.dies:
        raise ModelDomainError("❌ В системе нет ни одного кристалла")
    defaults = db.system_defaults
    areas = [die_area(d, db.lookup_node(d.node)) for d in system.dies]
    areas += [system.hbm_footprint(db)] * system.hbm.count
    if system.interposer_area is not None:
        footprint = system.interposer_area
    else:
        footprint = interposer_area_from_floorplan(
            areas, defaults.floorplan_spacing_mm, defaults.floorplan_overhead_fraction
        )
    signals = sum(
        d.signals if d.signals is not None else defaults.signals_per_die
        for d in system.dies
    )
    pins = round(signals * (1.0 + defaults.power_ground_ratio))
    return footprint * defaults.package_fan_out, pins
