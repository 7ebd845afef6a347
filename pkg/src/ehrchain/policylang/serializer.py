"""Canonical text rendering of policy documents.

The output is the parser's native ``policy`` form: 2-space indentation,
newline-terminated, combining algorithm always explicit, string literals
always quoted. ``parse(serialize(doc))`` is structurally equal to ``doc``
for every well-formed document.
"""

from __future__ import annotations

from .nodes import (
    And,
    AttrRef,
    Comparison,
    CondExpr,
    Effect,
    IfExpr,
    Literal,
    LitValue,
    Not,
    Obligation,
    Or,
    PolicyDocument,
    RuleDef,
    TargetExpr,
)

_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t"}

# precedence levels, loosest first; used to decide parenthesization
_PREC_OR = 1
_PREC_AND = 2
_PREC_CMP = 3
_PREC_NOT = 4
_PREC_ATOM = 5


def _literal(value: LitValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    body = "".join(_ESCAPES.get(ch, ch) for ch in value)
    return f'"{body}"'


def serialize_condition(expr: CondExpr) -> str:
    return _expr(expr, 0)


def _expr(node: CondExpr, context_prec: int) -> str:
    if isinstance(node, AttrRef):
        return f"{node.category}.{node.name}"
    if isinstance(node, Literal):
        return _literal(node.value)
    if isinstance(node, Not):
        return _wrap(f"!{_expr(node.operand, _PREC_NOT)}", _PREC_NOT, context_prec)
    if isinstance(node, Comparison):
        text = f"{_expr(node.left, _PREC_CMP + 1)} {node.op} {_expr(node.right, _PREC_CMP + 1)}"
        return _wrap(text, _PREC_CMP, context_prec)
    if isinstance(node, And):
        text = f"{_expr(node.left, _PREC_AND)} && {_expr(node.right, _PREC_AND + 1)}"
        return _wrap(text, _PREC_AND, context_prec)
    if isinstance(node, Or):
        text = f"{_expr(node.left, _PREC_OR)} || {_expr(node.right, _PREC_OR + 1)}"
        return _wrap(text, _PREC_OR, context_prec)
    if isinstance(node, IfExpr):
        text = (f"if ({_expr(node.condition, 0)}) "
                f"then {_expr(node.then_branch, _PREC_ATOM)} "
                f"else {_expr(node.else_branch, _PREC_ATOM)}")
        # the if-form swallows everything to its right, so parenthesize in
        # any operator context and keep the branches atomic
        return f"({text})" if context_prec > 0 else text
    raise TypeError(f"not a condition node: {node!r}")


def _wrap(text: str, prec: int, context_prec: int) -> str:
    return f"({text})" if prec < context_prec else text


def _target_line(target: TargetExpr, indent: str) -> list[str]:
    if target.empty:
        return []
    clauses = " && ".join(
        f"{c.category}.{c.name} == {_literal(c.value)}" for c in target.clauses)
    return [f"{indent}target {clauses}"]


def _rule_lines(rule: RuleDef, indent: str) -> list[str]:
    inner = indent + "  "
    lines = [f"{indent}rule {rule.id} {{", f"{inner}{rule.effect.value}"]
    lines += _target_line(rule.target, inner)
    if rule.condition is not None:
        lines.append(f"{inner}condition {serialize_condition(rule.condition)}")
    lines.append(f"{indent}}}")
    return lines


def _obligation_lines(ob: Obligation, indent: str) -> list[str]:
    inner = indent + "  "
    lines = [f"{indent}obligation {ob.id} on {ob.fulfill_on.value} {{"]
    lines += [f"{inner}{name} = {_literal(value)}" for name, value in ob.parameters]
    lines.append(f"{indent}}}")
    return lines


def serialize(doc: PolicyDocument) -> str:
    lines = [f"policy {doc.id} {{", f"  {doc.combining.value}"]
    lines += _target_line(doc.target, "  ")
    for rule in doc.rules:
        lines += _rule_lines(rule, "  ")
    for ob in doc.obligations:
        lines += _obligation_lines(ob, "  ")
    lines.append("}")
    return "\n".join(lines) + "\n"
