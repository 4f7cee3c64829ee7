"""Тесты регрессии стоимости корпуса"""
import numpy as np
import pytest

from src.diecost import DieSpec
from src.errors import ModelDomainError, RankDeficientError
from src.package import (
    PackageRegression,
    fit_package_regression,
    package_cost,
    substrate_requirements,
)
from src.sysmodel import HbmSpec, SystemSpec
from src.techdb import PackageClass


def _noisy_class(seed: int = 7) -> PackageClass:
    rng = np.random.default_rng(seed)
    points = tuple(
        (float(a), float(n), 0.004 * a + 0.0015 * n + 1.2 + float(rng.normal(0, 0.3)))
        for a in np.linspace(300, 5000, 6)
        for n in np.linspace(500, 6000, 5)
    )
    return PackageClass(name=f"noisy{seed}", core_layers=2, buildup_layers=5, sample_points=points)


class TestFitPackageRegression:
    """Тесты подбора плоскости МНК"""

    def test_exact_plane_recovered(self, plane_class):
        """Тест: образцы на плоскости -> коэффициенты с точностью 1e-9, R² = 1"""
        reg = fit_package_regression(plane_class)
        assert reg.mu0 == pytest.approx(0.02, abs=1e-9)
        assert reg.mu1 == pytest.approx(0.001, abs=1e-9)
        assert reg.mu2 == pytest.approx(1.5, abs=1e-9)
        assert reg.r_squared == pytest.approx(1.0, abs=1e-12)
        assert reg.sample_count == 12

    @pytest.mark.parametrize("seed", [1, 7, 42])
    def test_residuals_orthogonal(self, seed):
        """Тест: остатки МНК ортогональны столбцам матрицы регрессии"""
        package_class = _noisy_class(seed)
        reg = fit_package_regression(package_class)
        samples = np.asarray(package_class.sample_points)
        design = np.column_stack([samples[:, 0], samples[:, 1], np.ones(len(samples))])
        residuals = samples[:, 2] - design @ np.array([reg.mu0, reg.mu1, reg.mu2])
        scaled = design / np.abs(design).max(axis=0)
        assert np.all(np.abs(scaled.T @ residuals) < 1e-8)
        assert 0.0 <= reg.r_squared < 1.0

    def test_duplicated_samples(self, plane_class):
        """Тест: повтор образцов не меняет плоскость"""
        doubled = PackageClass(name="doubled", core_layers=2, buildup_layers=5,
                               sample_points=plane_class.sample_points * 2)
        reg = fit_package_regression(doubled)
        assert reg.mu0 == pytest.approx(0.02, abs=1e-9)
        assert reg.sample_count == 24

    def test_rank_deficient(self):
        """Тест: коллинеарные образцы -> RankDeficientError"""
        collinear = PackageClass.model_construct(
            name="collinear", core_layers=2, buildup_layers=5, provenance="",
            sample_points=((100.0, 500.0, 1.0), (200.0, 1000.0, 2.0), (300.0, 1500.0, 3.0)),
        )
        with pytest.raises(RankDeficientError):
            fit_package_regression(collinear)

    def test_bundled_classes_fit_well(self, db):
        """Тест: классы корпусов встроенного набора хорошо описываются плоскостью"""
        for package_class in db.package_classes.values():
            reg = fit_package_regression(package_class)
            assert reg.r_squared > 0.99
            assert reg.mu0 > 0 and reg.mu1 > 0


class TestPackageCost:
    """Тесты оценки стоимости корпуса"""

    def test_reference_value(self):
        """Тест: mu=(0.02, 0.001, 1.5), A=1000, N=2000 -> 23.5"""
        reg = PackageRegression(0.02, 0.001, 1.5, 1.0, "ref", 3)
        assert package_cost(reg, 1000.0, 2000).cost == pytest.approx(23.5)

    @pytest.mark.parametrize("area, pins", [(1.0, 1), (500.0, 9000), (1e5, 3)])
    def test_constant_plane(self, area, pins):
        """Тест: mu=(0, 0, c) -> c при любых входах"""
        reg = PackageRegression(0.0, 0.0, 4.25, 1.0, "const", 3)
        assert package_cost(reg, area, pins).cost == 4.25

    def test_linear_in_pins(self, plane_class):
        """Тест: разность стоимостей по выводам равна mu1 * dN"""
        reg = fit_package_regression(plane_class)
        delta = package_cost(reg, 1500.0, 3000).cost - package_cost(reg, 1500.0, 1000).cost
        assert delta == pytest.approx(reg.mu1 * 2000)

    @pytest.mark.parametrize("area, pins", [(0.0, 100), (100.0, 0), (-1.0, 100)])
    def test_non_positive(self, area, pins):
        """Тест неположительных входов"""
        reg = PackageRegression(0.02, 0.001, 1.5, 1.0, "ref", 3)
        with pytest.raises(ModelDomainError):
            package_cost(reg, area, pins)

    def test_extrapolation_flag(self, plane_class):
        """Тест: точка вне оболочки образцов помечается как экстраполяция"""
        reg = fit_package_regression(plane_class)
        assert package_cost(reg, 1000.0, 2000).extrapolated is False
        assert package_cost(reg, 300.0, 500).extrapolated is False
        assert package_cost(reg, 10000.0, 2000).extrapolated is True
        assert package_cost(reg, 1000.0, 20000).extrapolated is True

    def test_more_layers_cost_more(self, db):
        """Тест: корпус с 9 слоями наращивания не дешевле корпуса с 5"""
        thin = fit_package_regression(db.lookup_package_class("fc_2c5b"))
        thick = fit_package_regression(db.lookup_package_class("fc_2c9b"))
        for area in (500.0, 1500.0, 3000.0, 5000.0):
            for pins in (800, 2500, 6000):
                assert package_cost(thick, area, pins).cost >= package_cost(thin, area, pins).cost


class TestSubstrateRequirements:
    """Тесты площади подложки и числа выводов"""

    def test_single_die(self, make_db):
        """Тест: один кристалл 100 мм², 500 сигналов -> (100 мм², 1000 выводов)"""
        db = make_db(floorplan_overhead_fraction=0.0, package_fan_out=1.0)
        system = SystemSpec(dies=(DieSpec(node="7nm", area=100.0),), integration="mcm")
        assert substrate_requirements(system, db) == (pytest.approx(100.0), 1000)

    def test_hbm_footprint_included(self, db):
        """Тест: стеки HBM увеличивают площадь подложки"""
        dies = (DieSpec(node="7nm", area=200.0, signals=800),)
        bare = SystemSpec(dies=dies, integration="organic_2.5D")
        with_hbm = SystemSpec(dies=dies, integration="organic_2.5D", hbm=HbmSpec(count=2))
        area_bare, pins_bare = substrate_requirements(bare, db)
        area_hbm, pins_hbm = substrate_requirements(with_hbm, db)
        expected = (200.0 + 2 * 39.95) * 1.1 * 3.0
        assert area_hbm == pytest.approx(expected)
        assert area_hbm > area_bare
        assert pins_hbm == pins_bare == 1600

    def test_explicit_interposer_area(self, db):
        """Тест: явная площадь интерпозера задаёт след"""
        system = SystemSpec(dies=(DieSpec(node="7nm", area=100.0),), integration="silicon_2.5D",
                            interposer_area=400.0)
        area, _ = substrate_requirements(system, db)
        assert area == pytest.approx(400.0 * db.system_defaults.package_fan_out)

    def test_no_dies(self, db):
        """Тест: система без кристаллов -> ошибка"""
        with pytest.raises(ModelDomainError):
            substrate_requirements(SystemSpec(dies=(), integration="mcm"), db)
