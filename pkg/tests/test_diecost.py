"""Тесты модели стоимости кристалла"""
import pytest
from pydantic import ValidationError

from src.diecost import DieSpec, area_from_transistors, die_area, die_cost
from src.errors import DieTooLargeError, SpecError


class TestDieSpec:
    """Тесты описания кристалла"""

    def test_requires_size(self):
        """Тест: нужен transistor_count или area"""
        with pytest.raises(ValidationError):
            DieSpec(name="d", node="7nm")

    @pytest.mark.parametrize("io_fraction", [-0.1, 1.0, 1.5])
    def test_io_fraction_range(self, io_fraction):
        """Тест: io_fraction в [0, 1)"""
        with pytest.raises(ValidationError):
            DieSpec(name="d", node="7nm", area=100.0, io_fraction=io_fraction)


class TestDieArea:
    """Тесты площади кристалла"""

    def test_from_transistors(self, ideal_node):
        """Тест: 5 млрд транзисторов при 50 MTx/мм² -> 100 мм²"""
        spec = DieSpec(node="ideal", transistor_count=5.0)
        assert die_area(spec, ideal_node) == pytest.approx(100.0)

    def test_explicit_pass_through(self, ideal_node):
        """Тест: явная площадь передаётся без изменений"""
        assert die_area(DieSpec(node="ideal", area=121.0), ideal_node) == 121.0

    def test_denser_node_smaller(self, db):
        """Тест: на более плотном техпроцессе площадь строго меньше"""
        spec = DieSpec(node="x", transistor_count=10.0)
        areas = [die_area(spec, db.lookup_node(n)) for n in ("28nm", "16nm", "7nm", "5nm")]
        assert all(a > b for a, b in zip(areas, areas[1:]))

    def test_io_derating(self, db):
        """Тест: I/O-транзисторы занимают больше площади"""
        node = db.lookup_node("7nm")
        logic = die_area(DieSpec(node="7nm", transistor_count=10.0), node)
        mixed = die_area(DieSpec(node="7nm", transistor_count=10.0, io_fraction=0.4), node)
        assert mixed > logic
        expected = 10000 * (0.6 / node.transistor_density
                            + 0.4 / (node.transistor_density * node.io_density_factor))
        assert mixed == pytest.approx(expected)

    def test_consistent_both_sizes(self, ideal_node):
        """Тест: оба размера согласованы в пределах 1%"""
        spec = DieSpec(node="ideal", transistor_count=5.0, area=100.5)
        assert die_area(spec, ideal_node) == 100.5

    def test_inconsistent_both_sizes(self, ideal_node):
        """Тест: рассогласование больше 1% -> ошибка"""
        with pytest.raises(SpecError):
            die_area(DieSpec(node="ideal", transistor_count=5.0, area=110.0), ideal_node)

    def test_pure_io_area(self, ideal_node):
        """Тест площади чистого I/O-кристалла"""
        assert area_from_transistors(1.0, 1.0, ideal_node) == pytest.approx(
            1000 / (ideal_node.transistor_density * ideal_node.io_density_factor)
        )


class TestDieCost:
    """Тесты стоимости кристалла"""

    def test_reference_unit_cost(self, ideal_node):
        """Тест: 100 мм², 640 шт/пластину, 9344 -> 14.60"""
        result = die_cost(DieSpec(node="ideal", area=100.0), ideal_node)
        assert result.dies_per_wafer == 640
        assert result.unit_cost == pytest.approx(14.60)

    def test_zero_defects(self, ideal_node):
        """Тест: D0=0 -> приведённая стоимость равна стоимости изготовления"""
        result = die_cost(DieSpec(node="ideal", area=100.0), ideal_node)
        assert result.yield_ == 1.0
        assert result.yielded_cost == result.unit_cost

    def test_invariants(self, defect_node):
        """Тест: yielded_cost >= unit_cost, выход в (0, 1]"""
        result = die_cost(DieSpec(node="defective", area=300.0), defect_node)
        assert 0 < result.yield_ <= 1
        assert result.yielded_cost >= result.unit_cost

    @pytest.mark.parametrize("area", [50.0, 100.0, 200.0, 400.0])
    def test_doubling_more_than_doubles(self, defect_node, area):
        """Тест: удвоение площади больше чем удваивает приведённую стоимость"""
        small = die_cost(DieSpec(node="defective", area=area), defect_node).yielded_cost
        big = die_cost(DieSpec(node="defective", area=2 * area), defect_node).yielded_cost
        assert big > 2 * small

    def test_too_large(self, ideal_node):
        """Тест: кристалл не помещается на пластину"""
        with pytest.raises(DieTooLargeError):
            die_cost(DieSpec(node="ideal", area=80000.0), ideal_node)

    @pytest.mark.parametrize("k", [2, 4, 8])
    @pytest.mark.parametrize("area", [100.0, 200.0, 400.0, 600.0, 800.0])
    def test_partition_reduces_yielded_cost(self, db, area, k):
        """Тест: разбиение на k равных кристаллов снижает суммарную приведённую стоимость"""
        for name in ("7nm", "28nm"):
            node = db.lookup_node(name)
            whole = die_cost(DieSpec(node=name, area=area), node).yielded_cost
            parts = k * die_cost(DieSpec(node=name, area=area / k), node).yielded_cost
            assert parts < whole
