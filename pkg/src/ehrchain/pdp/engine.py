"""Decision engine: rule evaluation, combining algorithms, conditions.

Evaluation never raises. Anything that goes wrong inside a rule — an
attribute nobody can resolve, a comparison between incompatible kinds, a
condition that does not come out boolean — folds into an Indeterminate
decision carrying a diagnostic reason. Enforcement points treat everything
except Permit as a denial.

Conditions use left-to-right short-circuit semantics: ``false && error``
is false, ``error && x`` is an error. Operand order is therefore
significant and is preserved by the parser and serializer.
"""

from __future__ import annotations

from typing import Optional

from ..policylang.nodes import (
    And,
    AttrRef,
    CombiningAlgorithm,
    Comparison,
    CondExpr,
    Effect,
    IfExpr,
    Literal,
    LitValue,
    Not,
    Or,
    PolicyDocument,
    RuleDef,
    TargetExpr,
)
from .model import (
    NULL_RESOLVER,
    AccessRequest,
    AttributeResolver,
    Decision,
    DecisionValue,
)

_EFFECT_DECISION = {
    Effect.PERMIT: DecisionValue.PERMIT,
    Effect.DENY: DecisionValue.DENY,
}


class ConditionError(Exception):
    """Internal: condition could not be evaluated; folded to Indeterminate."""


def _resolve(ref: AttrRef, request: AccessRequest, pip: AttributeResolver) -> LitValue:
    # request-supplied attributes win over the external resolver: they are
    # the authenticated ones
    if ref.category not in ("subject", "resource", "action", "environment"):
        raise ConditionError(f"unknown attribute category {ref.category!r}")
    value = request.bag(ref.category).get(ref.name)
    if value is None:
        value = pip.lookup(ref.category, ref.name)
    if value is None:
        raise ConditionError(f"unresolved attribute {ref.category}.{ref.name}")
    return value


def _compatible(a: LitValue, b: LitValue) -> bool:
    # bool is not int here, whatever Python thinks
    return type(a) is type(b)


def eval_condition(expr: CondExpr, request: AccessRequest,
                   pip: AttributeResolver = NULL_RESOLVER) -> bool:
    """Evaluate a condition to a boolean; raises ConditionError on failure."""
    value = _eval(expr, request, pip)
    if not isinstance(value, bool):
        raise ConditionError(f"condition evaluated to non-boolean {value!r}")
    return value


def _eval(expr: CondExpr, request: AccessRequest, pip: AttributeResolver) -> LitValue:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, AttrRef):
        return _resolve(expr, request, pip)
    if isinstance(expr, Comparison):
        left = _eval(expr.left, request, pip)
        right = _eval(expr.right, request, pip)
        if not _compatible(left, right):
            raise ConditionError(
                f"cannot compare {type(left).__name__} with {type(right).__name__}")
        return (left == right) if expr.op == "==" else (left != right)
    if isinstance(expr, And):
        left = _eval(expr.left, request, pip)
        if not isinstance(left, bool):
            raise ConditionError(f"&& operand is not boolean: {left!r}")
        if not left:
            return False
        right = _eval(expr.right, request, pip)
        if not isinstance(right, bool):
            raise ConditionError(f"&& operand is not boolean: {right!r}")
        return right
    if isinstance(expr, Or):
        left = _eval(expr.left, request, pip)
        if not isinstance(left, bool):
            raise ConditionError(f"|| operand is not boolean: {left!r}")
        if left:
            return True
        right = _eval(expr.right, request, pip)
        if not isinstance(right, bool):
            raise ConditionError(f"|| operand is not boolean: {right!r}")
        return right
    if isinstance(expr, Not):
        operand = _eval(expr.operand, request, pip)
        if not isinstance(operand, bool):
            raise ConditionError(f"! operand is not boolean: {operand!r}")
        return not operand
    if isinstance(expr, IfExpr):
        branch = expr.then_branch if eval_condition(expr.condition, request, pip) \
            else expr.else_branch
        return _eval(branch, request, pip)
    raise ConditionError(f"unknown expression node {expr!r}")


def _match_target(target: TargetExpr, request: AccessRequest,
                  pip: AttributeResolver) -> Optional[bool]:
    """True = matches, False = no match, None = unresolvable/type error.

    A definite mismatch on any clause beats an unresolvable clause, so the
    verdict does not depend on clause order.
    """
    unresolved = False
    for clause in target.clauses:
        try:
            value = _resolve(AttrRef(clause.category, clause.name), request, pip)
        except ConditionError:
            unresolved = True
            continue
        if not _compatible(value, clause.value):
            unresolved = True
        elif value != clause.value:
            return False
    return None if unresolved else True


def evaluate_rule(rule: RuleDef, request: AccessRequest,
                  pip: AttributeResolver = NULL_RESOLVER) -> Decision:
    matched = _match_target(rule.target, request, pip)
    if matched is None:
        return Decision(DecisionValue.INDETERMINATE,
                        reason=f"rule {rule.id}: target attribute unresolved")
    if not matched:
        return Decision(DecisionValue.NOT_APPLICABLE)
    if rule.condition is None:
        return Decision(_EFFECT_DECISION[rule.effect])
    try:
        holds = eval_condition(rule.condition, request, pip)
    except ConditionError as exc:
        return Decision(DecisionValue.INDETERMINATE, reason=f"rule {rule.id}: {exc}")
    if holds:
        return Decision(_EFFECT_DECISION[rule.effect])
    return Decision(DecisionValue.NOT_APPLICABLE)


def combine(decisions: list[Decision], algorithm: CombiningAlgorithm) -> Decision:
    if algorithm is CombiningAlgorithm.FIRST_APPLICABLE:
        for decision in decisions:
            if decision.value is not DecisionValue.NOT_APPLICABLE:
                return Decision(decision.value, reason=decision.reason)
        return Decision(DecisionValue.NOT_APPLICABLE)

    if algorithm is CombiningAlgorithm.DENY_OVERRIDES:
        order = (DecisionValue.DENY, DecisionValue.INDETERMINATE, DecisionValue.PERMIT)
    else:  # permit-overrides
        order = (DecisionValue.PERMIT, DecisionValue.INDETERMINATE, DecisionValue.DENY)
    for wanted in order:
        for decision in decisions:
            if decision.value is wanted:
                return Decision(wanted, reason=decision.reason)
    return Decision(DecisionValue.NOT_APPLICABLE)


def evaluate(request: AccessRequest, doc: PolicyDocument,
             pip: AttributeResolver = NULL_RESOLVER) -> Decision:
    """Decide ``request`` against one policy document."""
    matched = _match_target(doc.target, request, pip)
    if matched is None:
        return Decision(DecisionValue.INDETERMINATE,
                        reason=f"policy {doc.id}: target attribute unresolved")
    if not matched:
        return Decision(DecisionValue.NOT_APPLICABLE)

    verdict = combine([evaluate_rule(rule, request, pip) for rule in doc.rules],
                      doc.combining)
    if verdict.value in (DecisionValue.PERMIT, DecisionValue.DENY):
        wanted = Effect.PERMIT if verdict.value is DecisionValue.PERMIT else Effect.DENY
        obligations = tuple(ob for ob in doc.obligations if ob.fulfill_on is wanted)
        return Decision(verdict.value, obligations=obligations, reason=verdict.reason)
    return verdict
