"""
Иерархия исключений модели стоимости чиплетных систем
Каждое исключение несёт стабильный код выхода для CLI
"""

from typing import Optional


class ChipletCostError(Exception):
    """Базовая ошибка модели (необязательно с указанием компонента)"""

    exit_code = 1

    def __init__(self, message: str, component: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.component = component

    def __str__(self) -> str:
        if self.component:
            return f"[{self.component}] {self.message}"
        return self.message

    def with_component(self, component: str) -> "ChipletCostError":
        """Возвращает копию ошибки с привязкой к компоненту системы"""
        if self.component:
            component = f"{component} / {self.component}"
        return type(self)(self.message, component=component)


class OutputError(ChipletCostError):
    """Ошибка ввода-вывода (файл не найден, нет прав на запись)"""
    exit_code = 3


class DatasetParseError(ChipletCostError):
    """Файл набора данных или спецификации не разбирается как YAML"""
    exit_code = 4


class DatasetValidationError(ChipletCostError):
    """Нарушен инвариант записи набора данных"""
    exit_code = 5


class SpecError(ChipletCostError):
    """Некорректный файл спецификации системы / развёртки"""
    exit_code = 5


class NotFoundError(ChipletCostError, KeyError):
    """Запись не найдена (сообщение перечисляет доступные имена)"""
    exit_code = 5

    def __str__(self) -> str:
        return ChipletCostError.__str__(self)


class ModelDomainError(ChipletCostError, ValueError):
    """Аргумент вне области определения формулы"""
    exit_code = 6


class DieTooLargeError(ModelDomainError):
    """На пластине не помещается ни одного кристалла"""


class InfeasibleIntegrationError(ModelDomainError):
    """Интерфейс HBM не помещается под стек при выбранном шаге бампов"""


class RankDeficientError(ModelDomainError):
    """Точки регрессии корпуса коллинеарны"""


class SweepCapExceededError(ChipletCostError):
    """Декартово произведение осей развёртки превышает лимит"""
    exit_code = 7
