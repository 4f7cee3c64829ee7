"""
Сборка системы до корпусирования
Складывает приведённые стоимости кристаллов, интерпозера и бондинга
и делит на произведение выходов годных бондинга.
"""

import math
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

from src.diecost import DieCostResult
from src.errors import ModelDomainError
from src.interposer import InterposerCostResult, InterposerKind
from src.techdb import BumpTech

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssemblySpec:
    """Упорядоченный список кристаллов с бампами и интерпозер"""
    dies: Tuple[Tuple[DieCostResult, BumpTech], ...]
    interposer: InterposerCostResult

    def __post_init__(self):
        if not self.dies:
            raise ModelDomainError("❌ В сборке должен быть хотя бы один кристалл")
        object.__setattr__(self, "dies", tuple(tuple(pair) for pair in self.dies))

    @property
    def n(self) -> int:
        return len(self.dies)


@dataclass(frozen=True)
class AssemblyCostResult:
    """Итог сборки и его составляющие"""
    total: float
    interposer_term: float
    per_die_terms: Tuple[float, ...]
    bond_yield_divisor: float
    bonding_total: float

    @property
    def undivided(self) -> float:
        """Сумма до деления на выход годных бондинга"""
        return self.interposer_term + math.fsum(self.per_die_terms)

    @property
    def bond_yield_loss(self) -> float:
        return self.total - self.undivided

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "interposer_term": self.interposer_term,
            "per_die_terms": list(self.per_die_terms),
            "bonding_total": self.bonding_total,
            "bond_yield_divisor": self.bond_yield_divisor,
            "bond_yield_loss": self.bond_yield_loss,
        }


def bond_yield_divisor(bumps: Sequence[BumpTech], from_first_die: bool = False) -> float:
    """
    Произведение выходов годных бондинга

    По умолчанию индекс идёт с i=2 (первый кристалл не входит),
    from_first_die=True включает и первый кристалл.
    """
    start = 0 if from_first_die else 1
    return math.prod(b.bond_yield for b in bumps[start:])


def _compose(spec: AssemblySpec, interposer_term: float, from_first_die: bool) -> AssemblyCostResult:
    per_die = tuple(die.yielded_cost + bump.bond_cost_per_die for die, bump in spec.dies)
    divisor = bond_yield_divisor([bump for _, bump in spec.dies], from_first_die)
    total = (interposer_term + math.fsum(per_die)) / divisor
    return AssemblyCostResult(
        total=total,
        interposer_term=interposer_term,
        per_die_terms=per_die,
        bond_yield_divisor=divisor,
        bonding_total=math.fsum(bump.bond_cost_per_die for _, bump in spec.dies),
    )


def assemble_interposer_system(spec: AssemblySpec,
                               bond_yield_from_first_die: bool = False) -> AssemblyCostResult:
    """
    Система на интерпозере (кремниевом или органическом)

    total = (C_int/Y_int + sum(C_die/Y_die + C_bond)) / prod(Y_bond)
    """
    if spec.interposer.kind is InterposerKind.NONE:
        raise ModelDomainError("❌ Для сборки на интерпозере не задан интерпозер")
    return _compose(spec, spec.interposer.yielded_cost, bond_yield_from_first_die)


def assemble_mcm_system(spec: AssemblySpec,
                        bond_yield_from_first_die: bool = False) -> AssemblyCostResult:
    """MCM: то же без слагаемого интерпозера"""
    if spec.interposer.kind is not InterposerKind.NONE:
        raise ModelDomainError(
            f"❌ Сборка MCM получила интерпозер '{spec.interposer.kind.value}'; "
            f"используйте assemble_interposer_system"
        )
    return _compose(spec, 0.0, bond_yield_from_first_die)


def assemble(spec: AssemblySpec, bond_yield_from_first_die: bool = False) -> AssemblyCostResult:
    """Выбирает формулу сборки по виду интерпозера"""
    if spec.interposer.kind is InterposerKind.NONE:
        return assemble_mcm_system(spec, bond_yield_from_first_die)
    return assemble_interposer_system(spec, bond_yield_from_first_die)
