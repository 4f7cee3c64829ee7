"""Общие фикстуры для всех тестов"""
import dataclasses
import pytest

from src.techdb import (
    BUNDLED_DATASET,
    BumpTech,
    PackageClass,
    PanelSpec,
    TechNode,
    load_dataset,
)


@pytest.fixture(scope="session")
def db():
    """Встроенный набор данных (неизменяемый, общий для всех тестов)"""
    return load_dataset(str(BUNDLED_DATASET))


@pytest.fixture
def make_db(db):
    """Копия набора данных с заменёнными системными параметрами"""
    def _make(**system_updates):
        defaults = db.system_defaults.model_copy(update=system_updates)
        return dataclasses.replace(db, system_defaults=defaults)
    return _make


@pytest.fixture
def ideal_node():
    """Техпроцесс без дефектов: выход годных = 1"""
    return TechNode(
        name="ideal",
        wafer_cost=9344.0,
        wafer_diameter=300.0,
        defect_density=0.0,
        clustering_alpha=3.0,
        transistor_density=50.0,
        wafer_base_yield=1.0,
    )


@pytest.fixture
def defect_node():
    """Техпроцесс с дефектами (D0 = 0.1 / см²)"""
    return TechNode(
        name="defective",
        wafer_cost=9344.0,
        wafer_diameter=300.0,
        defect_density=0.1,
        clustering_alpha=3.0,
        transistor_density=50.0,
        wafer_base_yield=1.0,
    )


@pytest.fixture
def panel():
    """Панель 500x500 мм без дефектов"""
    return PanelSpec(
        name="test_panel",
        layers=4,
        panel_cost=1000.0,
        panel_width=500.0,
        panel_height=500.0,
        panel_base_yield=1.0,
        defect_density=0.0,
        clustering_alpha=3.0,
    )


@pytest.fixture
def bump():
    """Бампы с C_bond = 2, Y_bond = 0.99"""
    return BumpTech(name="test_bump", pitch=45.0, bond_cost_per_die=2.0, bond_yield=0.99)


@pytest.fixture
def plane_class():
    """Класс корпуса с образцами точно на плоскости mu = (0.02, 0.001, 1.5)"""
    points = tuple(
        (a, n, 0.02 * a + 0.001 * n + 1.5)
        for a in (300.0, 1000.0, 2500.0, 4000.0)
        for n in (500.0, 2000.0, 5000.0)
    )
    return PackageClass(name="plane", core_layers=2, buildup_layers=5, sample_points=points)
