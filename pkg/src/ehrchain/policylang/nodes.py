"""AST for policy documents.

All nodes are frozen dataclasses; structural equality is plain ``==`` and is
what the round-trip guarantee (parse/serialize/parse) is stated over. Source
positions are not stored on nodes — parse-time diagnostics carry them instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

# literal values the language can express
LitValue = Union[str, int, bool]


class Effect(Enum):
    PERMIT = "permit"
    DENY = "deny"


class CombiningAlgorithm(Enum):
    DENY_OVERRIDES = "deny-overrides"
    PERMIT_OVERRIDES = "permit-overrides"
    FIRST_APPLICABLE = "first-applicable"


# -- condition expressions ----------------------------------------------------

@dataclass(frozen=True)
class AttrRef:
    category: str
    name: str


@dataclass(frozen=True)
class Literal:
    value: LitValue


@dataclass(frozen=True)
class Comparison:
    op: str  # "==" or "!="
    left: "CondExpr"
    right: "CondExpr"


@dataclass(frozen=True)
class And:
    left: "CondExpr"
    right: "CondExpr"


@dataclass(frozen=True)
class Or:
    left: "CondExpr"
    right: "CondExpr"


@dataclass(frozen=True)
class Not:
    operand: "CondExpr"


@dataclass(frozen=True)
class IfExpr:
    condition: "CondExpr"
    then_branch: "CondExpr"
    else_branch: "CondExpr"


CondExpr = Union[AttrRef, Literal, Comparison, And, Or, Not, IfExpr]


# -- document structure --------------------------------------------------------

@dataclass(frozen=True)
class MatchClause:
    """One ``category.name == value`` conjunct of a target."""

    category: str
    name: str
    value: LitValue


@dataclass(frozen=True)
class TargetExpr:
    clauses: tuple[MatchClause, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.clauses


@dataclass(frozen=True)
class Obligation:
    id: str
    fulfill_on: Effect
    parameters: tuple[tuple[str, LitValue], ...] = ()


@dataclass(frozen=True)
class RuleDef:
    id: str
    effect: Effect
    target: TargetExpr = TargetExpr()
    condition: CondExpr | None = None


@dataclass(frozen=True)
class PolicyDocument:
    id: str
    combining: CombiningAlgorithm = CombiningAlgorithm.DENY_OVERRIDES
    target: TargetExpr = TargetExpr()
    rules: tuple[RuleDef, ...] = ()
    obligations: tuple[Obligation, ...] = field(default=())
