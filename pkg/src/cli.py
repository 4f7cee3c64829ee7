"""
Командная строка chiplet_cost
Подкоманды: cost, sweep, switchpoint, casestudy {hbm, hybrid}, dataset validate.

Коды выхода: 0 — успех, 2 — ошибка аргументов, 3 — ввод-вывод,
4 — разбор YAML, 5 — валидация / не найдено, 6 — модель, 7 — лимит развёртки.
"""

import sys
import json
import argparse
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.errors import ChipletCostError, SpecError
from src.explorer import (
    HBM_COLUMNS,
    HBM_PLOT_COLUMNS,
    HYBRID_PLOT_COLUMNS,
    PACKAGE_PLOT_COLUMNS,
    REPORT_COLUMNS,
    SWITCH_PLOT_COLUMNS,
    SWITCHPOINT_COLUMNS,
    HbmStudySpec,
    HybridStudySpec,
    SweepSpec,
    SwitchPointSpec,
    case_study_hbm,
    case_study_hybrid,
    find_switching_points,
    hbm_plot_rows,
    hybrid_plot_rows,
    load_spec,
    package_plot_rows,
    run_sweep,
    switching_plot_rows,
)
from src.package import fit_package_regression
from src.settings import Settings, load_settings
from src.sysmodel import evaluate_system, load_system_spec
from src.techdb import TechDatabase, load_dataset
from src.utils import format_table, save_csv, to_csv_text, to_json_text, write_text

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "table")
COST_COLUMNS = ("system", "integration", "die_count", "hbm_count") + REPORT_COLUMNS + ("dataset_version",)
EXIT_OK = 0


@dataclass(frozen=True)
class RunConfig:
    """Разобранные аргументы одного запуска"""
    command: str
    case: Optional[str] = None
    spec_path: Optional[str] = None
    dataset_path: Optional[str] = None
    output_format: str = "table"
    output_path: Optional[str] = None
    plot_data_dir: Optional[str] = None
    bond_yield_from_first_die: bool = False
    max_points: Optional[int] = None
    workers: Optional[int] = None
    verbose: bool = False
    config_path: Optional[str] = None

    def resolved(self, db: TechDatabase, settings: Settings) -> Dict[str, Any]:
        """Полная конфигурация запуска для записи в выходные файлы"""
        return {
            "command": self.command,
            "case": self.case,
            "spec": self.spec_path,
            "dataset": db.source,
            "dataset_version": db.dataset_version,
            "bond_yield_from_first_die": self.bond_yield_from_first_die,
            "max_points": self.max_points or settings.explorer.max_points,
        }


# ============================================================================
# РАЗБОР АРГУМЕНТОВ
# ============================================================================

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="YAML-спецификация подкоманды")
    common.add_argument("--dataset", help="Набор технологических данных (YAML)")
    common.add_argument("--config", help="Файл настроек (по умолчанию config/system_config.yaml)")
    common.add_argument("--format", choices=FORMATS, default=None, help="Формат вывода")
    common.add_argument("--output", help="Файл результата (по умолчанию stdout)")
    common.add_argument("--plot-data", dest="plot_data", metavar="DIR",
                        help="Каталог для CSV-данных графиков (длинный формат)")
    common.add_argument("--bond-yield-from-first-die", action="store_true", default=None,
                        help="Включать выход годных бондинга первого кристалла")
    common.add_argument("--max-points", type=int, help="Лимит точек развёртки")
    common.add_argument("--workers", type=int, help="Число потоков оценки")
    common.add_argument("-v", "--verbose", action="store_true", help="Подробный лог (DEBUG)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="chiplet-cost",
        description="Модель стоимости чиплетных SiP и исследование пространства решений",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cost", parents=[common], help="Стоимость одной системы")
    sub.add_parser("sweep", parents=[common], help="Развёртка по сетке параметров")
    sub.add_parser("switchpoint", parents=[common], help="Точки перехода монолит/чиплеты")
    case = sub.add_parser("casestudy", parents=[common], help="Сценарии HBM и гибридных систем")
    case.add_argument("case", choices=("hbm", "hybrid"))
    dataset = sub.add_parser("dataset", parents=[common], help="Операции с набором данных")
    dataset.add_argument("action", choices=("validate",))
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        case=getattr(args, "case", None),
        spec_path=args.spec,
        dataset_path=args.dataset,
        output_format=args.format or "",
        output_path=args.output,
        plot_data_dir=args.plot_data,
        bond_yield_from_first_die=bool(args.bond_yield_from_first_die),
        max_points=args.max_points,
        workers=args.workers,
        verbose=args.verbose,
        config_path=args.config,
    )

# ============================================================================
# ВЫВОД
# ============================================================================

def _provenance(config: Dict[str, Any]) -> str:
    return json.dumps(config, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _render(fmt: str, columns: Sequence[str], rows: List[dict], payload: Dict[str, Any],
            config: Dict[str, Any], table_text: Optional[str] = None) -> str:
    if fmt == "json":
        return to_json_text(payload)
    if fmt == "csv":
        return to_csv_text(columns, rows, _provenance(config))
    header = f"# набор данных: {config['dataset_version']}\n# config: {_provenance(config)}\n"
    return header + (table_text if table_text is not None else format_table(columns, rows)) + "\n"


def _emit(run: RunConfig, text: str) -> None:
    if run.output_path:
        write_text(Path(run.output_path), text)
        logger.info(f"💾 Результат сохранён в {run.output_path}")
    else:
        sys.stdout.write(text)


def _write_plot(run: RunConfig, name: str, columns, rows, config) -> None:
    path = Path(run.plot_data_dir) / name
    save_csv(path, columns, rows, _provenance(config))
    logger.info(f"📊 Данные графика: {path}")


def _default_spec(run: RunConfig, settings: Settings, filename: str) -> Optional[str]:
    if run.spec_path:
        return run.spec_path
    path = settings.specs_path(filename)
    return str(path) if path.exists() else None

# ============================================================================
# ПОДКОМАНДЫ
# ============================================================================

def cmd_cost(run: RunConfig, db: TechDatabase, settings: Settings) -> int:
    """Стоимость одной системы из YAML-спецификации"""
    if not run.spec_path:
        raise SpecError("❌ Для подкоманды cost нужен --spec")
    system = load_system_spec(run.spec_path)
    report = evaluate_system(system, db, run.bond_yield_from_first_die)
    for warning in report.warnings:
        logger.warning(f"⚠️ {warning}")
    config = dict(run.resolved(db, settings), system=system.model_dump(mode="json"))
    row = dict(report.summary_row(), dataset_version=db.dataset_version)
    payload = {"dataset_version": db.dataset_version, "config": config, "report": report.to_dict()}
    _emit(run, _render(run.output_format, COST_COLUMNS, [row], payload, config, report.to_table()))
    if run.plot_data_dir:
        _write_plot(run, "package_cost.csv", PACKAGE_PLOT_COLUMNS, package_plot_rows(db), config)
    return EXIT_OK


def cmd_sweep(run: RunConfig, db: TechDatabase, settings: Settings) -> int:
    """Развёртка по сетке параметров"""
    if not run.spec_path:
        raise SpecError("❌ Для подкоманды sweep нужен --spec")
    spec = load_spec(run.spec_path, SweepSpec, section="sweep")
    result = run_sweep(
        spec, db,
        max_points=run.max_points or spec.max_points or settings.explorer.max_points,
        workers=run.workers or settings.explorer.workers,
        bond_yield_from_first_die=run.bond_yield_from_first_die,
    )
    config = dict(run.resolved(db, settings), **result.config)
    rows = result.to_rows()
    payload = {"dataset_version": db.dataset_version, "config": config, "rows": rows}
    _emit(run, _render(run.output_format, result.columns, rows, payload, config))
    if run.plot_data_dir:
        _write_plot(run, "package_cost.csv", PACKAGE_PLOT_COLUMNS, package_plot_rows(db), config)
    return EXIT_OK


def cmd_switchpoint(run: RunConfig, db: TechDatabase, settings: Settings) -> int:
    """Точки перехода для всех пар (техпроцесс, интеграция)"""
    sp = settings.explorer.switchpoint
    defaults = dict(sp.model_dump(), partition=settings.explorer.partition.model_dump())
    spec = load_spec(_default_spec(run, settings, "switchpoint.yaml"), SwitchPointSpec,
                     section="switchpoint", defaults=defaults)
    result = find_switching_points(spec, db, workers=run.workers or settings.explorer.workers,
                                   bond_yield_from_first_die=run.bond_yield_from_first_die)
    config = dict(run.resolved(db, settings), **result.config)
    rows = result.to_rows()
    payload = {"dataset_version": db.dataset_version, "config": config, "rows": rows}
    _emit(run, _render(run.output_format, SWITCHPOINT_COLUMNS, rows, payload, config))
    if run.plot_data_dir:
        _write_plot(run, "switching_points.csv", SWITCH_PLOT_COLUMNS, switching_plot_rows(result), config)
    return EXIT_OK


def _casestudy_hbm(run: RunConfig, db: TechDatabase, settings: Settings) -> int:
    spec = load_spec(_default_spec(run, settings, "casestudy_hbm.yaml"), HbmStudySpec, section="hbm")
    result = case_study_hbm(spec.scales, db, node=spec.node, hbm_stacks=spec.hbm_stacks,
                            integrations=spec.integrations, partition=spec.partition,
                            bond_yield_from_first_die=run.bond_yield_from_first_die)
    for scale, verdict in result.excluded:
        if not verdict.feasible:
            logger.warning(f"⚠️ MCM исключён ({scale:g} мм²): {verdict.reason}")
    config = dict(run.resolved(db, settings), **result.config)
    rows = result.to_rows()
    payload = {"dataset_version": db.dataset_version, "config": config, "rows": rows,
               "excluded": result.excluded_rows()}
    _emit(run, _render(run.output_format, HBM_COLUMNS, rows, payload, config))
    if run.plot_data_dir:
        _write_plot(run, "package_cost.csv", PACKAGE_PLOT_COLUMNS, package_plot_rows(db), config)
        _write_plot(run, "hbm_overhead.csv", HBM_PLOT_COLUMNS, hbm_plot_rows(result), config)
    return EXIT_OK


def _casestudy_hybrid(run: RunConfig, db: TechDatabase, settings: Settings) -> int:
    spec = load_spec(_default_spec(run, settings, "casestudy_hybrid.yaml"), HybridStudySpec,
                     section="hybrid")
    result = case_study_hybrid(spec.core_transistors, spec.io_fractions, spec.core_die_counts, db,
                               core_node=spec.core_node, io_node=spec.io_node,
                               integration=spec.integration, signals=spec.signals,
                               bond_yield_from_first_die=run.bond_yield_from_first_die)
    config = dict(run.resolved(db, settings), **result.config)
    rows = result.to_rows()
    payload = {"dataset_version": db.dataset_version, "config": config, "rows": rows}
    _emit(run, _render(run.output_format, result.columns, rows, payload, config))
    if run.plot_data_dir:
        _write_plot(run, "package_cost.csv", PACKAGE_PLOT_COLUMNS, package_plot_rows(db), config)
        _write_plot(run, "hybrid_comparison.csv", HYBRID_PLOT_COLUMNS, hybrid_plot_rows(result), config)
    return EXIT_OK


def cmd_casestudy(run: RunConfig, db: TechDatabase, settings: Settings) -> int:
    """Сценарии: накладные расходы HBM или гибридные системы"""
    if run.case == "hbm":
        return _casestudy_hbm(run, db, settings)
    return _casestudy_hybrid(run, db, settings)


def cmd_dataset_validate(run: RunConfig, db: TechDatabase, settings: Settings) -> int:
    """Проверка набора данных и вывод подобранных регрессий корпусов"""
    rows = [
        dict(fit_package_regression(pc).to_dict(), dataset_version=db.dataset_version)
        for pc in db.package_classes.values()
    ]
    columns = ("package_class", "mu0", "mu1", "mu2", "r_squared", "sample_count", "dataset_version")
    config = run.resolved(db, settings)
    payload = {"dataset_version": db.dataset_version, "config": config,
               "nodes": list(db.nodes), "warnings": list(db.warnings), "package_regressions": rows}
    _emit(run, _render(run.output_format, columns, rows, payload, config))
    logger.info(f"✅ Набор данных {db.dataset_version} корректен ({len(db.nodes)} техпроцессов)")
    return EXIT_OK


COMMANDS = {
    "cost": cmd_cost,
    "sweep": cmd_sweep,
    "switchpoint": cmd_switchpoint,
    "casestudy": cmd_casestudy,
    "dataset": cmd_dataset_validate,
}


def run(config: RunConfig, settings: Settings) -> int:
    """Выполняет подкоманду; ошибки модели превращаются в коды выхода"""
    if not config.output_format:
        config = replace(config, output_format=settings.output.default_format)
    if config.output_format not in FORMATS:
        logger.error(f"❌ Неизвестный формат вывода: {config.output_format}")
        return 2
    try:
        db = load_dataset(config.dataset_path)
        return COMMANDS[config.command](config, db, settings)
    except ChipletCostError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code


def prepare_run(argv: Optional[Sequence[str]] = None) -> Tuple[RunConfig, Settings]:
    """
    Разбор аргументов и загрузка настроек запуска

    Флаг модели из настроек включает отсчёт выхода сборки с первого кристалла,
    если он не задан в командной строке.
    """
    args = build_parser().parse_args(argv)
    config = run_config_from_args(args)
    settings = load_settings(config.config_path)
    if settings.model.bond_yield_from_first_die and not config.bond_yield_from_first_die:
        config = replace(config, bond_yield_from_first_die=True)
    return config, settings


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Точка входа без настройки обработчиков логирования (для тестов и встраивания)"""
    try:
        config, settings = prepare_run(argv)
    except ChipletCostError as e:
        logger.error(f"❌ {e}")
        return e.exit_code
    return run(config, settings)
