"""Policy decision engine (evaluation pipeline over parsed documents)."""

from .engine import ConditionError, combine, eval_condition, evaluate, evaluate_rule
from .model import (
    CATEGORIES,
    NULL_RESOLVER,
    AccessRequest,
    AttributeBag,
    AttributeResolver,
    Decision,
    DecisionValue,
    PolicyStore,
    StaticResolver,
)

__all__ = [
    "CATEGORIES",
    "NULL_RESOLVER",
    "AccessRequest",
    "AttributeBag",
    "AttributeResolver",
    "ConditionError",
    "Decision",
    "DecisionValue",
    "PolicyStore",
    "StaticResolver",
    "combine",
    "eval_condition",
    "evaluate",
    "evaluate_rule",
]
