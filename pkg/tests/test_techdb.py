"""Тесты технологической базы данных"""
import copy
import os
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest
import yaml

from src.errors import DatasetParseError, DatasetValidationError, NotFoundError, OutputError
from src.techdb import (
    DATASET_ENV_VAR,
    BUNDLED_DATASET,
    PackageClass,
    default_dataset_path,
    dump_dataset,
    load_dataset,
    lookup_node,
    parse_dataset,
)

with open(BUNDLED_DATASET, "r", encoding="utf-8") as _f:
    RAW_DATASET = yaml.safe_load(_f)


def _raw():
    return copy.deepcopy(RAW_DATASET)


def _write(tmpdir, data) -> str:
    path = Path(tmpdir) / "dataset.yaml"
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, allow_unicode=True)
    return str(path)


class TestLoadDataset:
    """Тесты загрузки и валидации набора данных"""

    def test_bundled_nodes(self, db):
        """Тест: встроенный набор содержит техпроцессы от 28nm до 5nm"""
        assert set(db.nodes) == {"28nm", "20nm", "16nm", "12nm", "10nm", "7nm", "5nm"}

    def test_bundled_lookups(self, db):
        """Тест доступа к бампам, корпусам и интерпозерам"""
        assert db.lookup_bump("ubump45").pitch == 45
        assert db.lookup_package_class("fc_2c9b").buildup_layers == 9
        assert db.lookup_interposer_node("65nm-passive").wafer_cost_by_layers[4] == 2400
        assert db.lookup_panel("org_panel_4L").panel_area == 250000

    def test_bundled_density_ordering_has_no_warnings(self, db):
        """Тест: плотность строго убывает с ростом нормы"""
        assert db.warnings == ()

    def test_zero_defect_density_accepted(self):
        """Тест: D0 = 0 допустим (предел идеального выхода)"""
        raw = _raw()
        raw["nodes"][0]["defect_density"] = 0
        db = parse_dataset(raw)
        assert db.lookup_node(raw["nodes"][0]["name"]).defect_density == 0

    def test_negative_alpha_rejected(self):
        """Тест: clustering_alpha = -1 -> ошибка с именем поля и записи"""
        raw = _raw()
        raw["nodes"][1]["clustering_alpha"] = -1
        with pytest.raises(DatasetValidationError) as exc:
            parse_dataset(raw)
        assert "clustering_alpha" in str(exc.value)
        assert raw["nodes"][1]["name"] in str(exc.value)

    @pytest.mark.parametrize("field, value", [
        ("wafer_cost", 0),
        ("wafer_base_yield", 1.5),
        ("transistor_density", -3),
    ])
    def test_node_invariants(self, field, value):
        """Тест нарушений инвариантов техпроцесса"""
        raw = _raw()
        raw["nodes"][0][field] = value
        with pytest.raises(DatasetValidationError, match=field):
            parse_dataset(raw)

    def test_bump_yield_invariant(self):
        """Тест: bond_yield > 1 отклоняется"""
        raw = _raw()
        raw["bump_techs"][0]["bond_yield"] = 1.01
        with pytest.raises(DatasetValidationError, match="bond_yield"):
            parse_dataset(raw)

    def test_unknown_field_rejected(self):
        """Тест: лишнее поле в записи отклоняется"""
        raw = _raw()
        raw["panels"][0]["colour"] = "green"
        with pytest.raises(DatasetValidationError, match="colour"):
            parse_dataset(raw)

    def test_duplicate_name_rejected(self):
        """Тест повторяющегося имени техпроцесса"""
        raw = _raw()
        raw["nodes"].append(copy.deepcopy(raw["nodes"][0]))
        with pytest.raises(DatasetValidationError, match="повторяющееся"):
            parse_dataset(raw)

    def test_wrong_schema_version(self):
        """Тест неподдерживаемой версии схемы"""
        raw = _raw()
        raw["schema_version"] = 99
        with pytest.raises(DatasetValidationError, match="schema_version"):
            parse_dataset(raw)

    def test_dangling_default_reference(self):
        """Тест ссылки integration_defaults на несуществующий класс корпуса"""
        raw = _raw()
        raw["integration_defaults"]["mcm"]["package_class"] = "missing"
        with pytest.raises(DatasetValidationError, match="mcm"):
            parse_dataset(raw)

    @pytest.mark.parametrize("section", ["integration_defaults", "system_defaults"])
    @pytest.mark.parametrize("value", [[1, 2], "text", 3])
    def test_mapping_section_wrong_type(self, section, value):
        """Тест: раздел-словарь другого типа -> ошибка валидации с именем раздела"""
        raw = _raw()
        raw[section] = value
        with pytest.raises(DatasetValidationError, match=section):
            parse_dataset(raw)

    def test_density_order_warning(self):
        """Тест: нарушение порядка плотности — предупреждение, не ошибка"""
        raw = _raw()
        for node in raw["nodes"]:
            if node["name"] == "28nm":
                node["transistor_density"] = 500.0
        db = parse_dataset(raw)
        assert any("28nm" in w for w in db.warnings)

    def test_malformed_yaml(self):
        """Тест невалидного YAML"""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "broken.yaml"
            path.write_text("nodes: [unclosed\n  - : :", encoding="utf-8")
            with pytest.raises(DatasetParseError):
                load_dataset(str(path))

    def test_missing_file(self):
        """Тест отсутствующего файла"""
        with pytest.raises(OutputError):
            load_dataset("/nonexistent/dataset.yaml")

    def test_env_override(self):
        """Тест переопределения пути переменной окружения"""
        with patch.dict(os.environ, {DATASET_ENV_VAR: "/tmp/custom.yaml"}):
            assert default_dataset_path() == Path("/tmp/custom.yaml")
        with patch.dict(os.environ, {}, clear=True):
            assert default_dataset_path() == BUNDLED_DATASET


class TestLookupNode:
    """Тесты поиска техпроцесса"""

    def test_found(self, db):
        """Тест найденного техпроцесса"""
        assert lookup_node(db, "7nm").name == "7nm"

    def test_not_found_lists_names(self, db):
        """Тест: отсутствующий техпроцесс -> ошибка со списком имён"""
        with pytest.raises(NotFoundError) as exc:
            lookup_node(db, "3nm")
        assert "3nm" in str(exc.value)
        assert "7nm" in str(exc.value)

    def test_not_found_is_key_error(self, db):
        """Тест: NotFoundError совместима с KeyError"""
        with pytest.raises(KeyError):
            lookup_node(db, "3nm")

    def test_pure(self, db):
        """Тест: повторный поиск возвращает идентичную запись"""
        assert lookup_node(db, "7nm") == lookup_node(db, "7nm")

    def test_immutable(self, db):
        """Тест: база неизменяема"""
        with pytest.raises(TypeError):
            db.nodes["3nm"] = db.nodes["7nm"]


class TestSelection:
    """Тесты выбора записей по числу слоёв"""

    @pytest.mark.parametrize("layers, expected", [(1, 1900), (2, 1900), (3, 2400), (4, 2400), (9, 2400)])
    def test_wafer_cost_for_layers(self, db, layers, expected):
        """Тест выбора стоимости пластины интерпозера"""
        assert db.lookup_interposer_node("65nm-passive").wafer_cost_for_layers(layers) == expected

    @pytest.mark.parametrize("layers, expected", [(1, "org_panel_4L"), (4, "org_panel_4L"),
                                                  (5, "org_panel_8L"), (12, "org_panel_4L")])
    def test_select_panel(self, db, layers, expected):
        """Тест выбора панели, покрывающей число слоёв"""
        assert db.select_panel("org_panel_4L", layers).name == expected


class TestPackageClassValidation:
    """Тесты инвариантов класса корпуса"""

    def test_too_few_samples(self):
        """Тест: меньше 3 образцов"""
        with pytest.raises(ValueError):
            PackageClass(name="p", core_layers=2, buildup_layers=5,
                         sample_points=((100, 500, 1.0), (200, 700, 2.0)))

    def test_collinear_samples(self):
        """Тест: коллинеарные образцы"""
        with pytest.raises(ValueError):
            PackageClass(name="p", core_layers=2, buildup_layers=5,
                         sample_points=((100, 500, 1.0), (200, 1000, 2.0), (300, 1500, 3.0)))


class TestRoundTrip:
    """Тесты круговой проверки загрузка-запись-загрузка"""

    def test_round_trip_identical(self, db):
        """Тест: записи идентичны после записи и повторной загрузки"""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = dump_dataset(db, str(Path(tmpdir) / "out" / "dataset.yaml"))
            again = load_dataset(str(path))
        assert again.dataset_version == db.dataset_version
        for section in ("nodes", "interposer_nodes", "panels", "bump_techs", "package_classes",
                        "integration_defaults"):
            assert dict(getattr(again, section)) == dict(getattr(db, section))
        assert again.system_defaults == db.system_defaults

    def test_load_from_written_file(self):
        """Тест загрузки изменённого набора с диска"""
        raw = _raw()
        raw["dataset_version"] = "test-1"
        with tempfile.TemporaryDirectory() as tmpdir:
            db = load_dataset(_write(tmpdir, raw))
        assert db.dataset_version == "test-1"
