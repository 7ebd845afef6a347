"""Ledger-side access rules: who may run which operation on which asset.

A rule has five components — subject selector, operation, object selector,
optional condition, action — and rules are scanned in declaration order.
The first rule whose selectors all match decides, except that a conditional
rule whose condition is false (or fails to evaluate) is treated as a
non-match and the scan continues. No match means DENY.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, runtime_checkable

from .pdp.engine import ConditionError, eval_condition
from .pdp.model import AccessRequest
from .policylang.nodes import CondExpr, Effect, LitValue
from .policylang.parser import (
    ACL_OPERATIONS,
    AclRuleBlock,
    object_selector_union,
    parse_acl_rule_blocks,
    split_object_selector,
    split_subject_selector,
)


class Action(Enum):
    ALLOW = "ALLOW"
    DENY = "DENY"


class RuleKind(Enum):
    NON_CONDITIONAL = "non-conditional"
    CONDITIONAL = "conditional"


@runtime_checkable
class Subject(Protocol):
    """What the checker needs to know about a participant."""

    id: str
    role: str
    organization: str


@dataclass(frozen=True)
class ObjectRecord:
    """The asset side of a check, with attributes visible to conditions."""

    patient_id: str
    organization: str | None = None
    attributes: dict[str, LitValue] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return f"patient#{self.patient_id}.data"


@dataclass(frozen=True)
class AclRule:
    id: str
    description: str
    subject_selector: str
    operation: str
    object_selector: str
    condition: CondExpr | None
    action: Action

    @property
    def kind(self) -> RuleKind:
        return RuleKind.CONDITIONAL if self.condition is not None \
            else RuleKind.NON_CONDITIONAL

    @classmethod
    def from_block(cls, block: AclRuleBlock) -> "AclRule":
        return cls(
            id=block.id,
            description=block.description,
            subject_selector=block.subject_selector,
            operation=block.operation,
            object_selector=block.object_selector,
            condition=block.condition,
            action=Action.ALLOW if block.action is Effect.PERMIT else Action.DENY,
        )


def parse_acl_rules(source: str) -> list[AclRule]:
    """Parse a rule file (``rule <id> { ... }`` blocks) into AclRules."""
    return [AclRule.from_block(b) for b in parse_acl_rule_blocks(source)]


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    code: str  # duplicate-id | unknown-verb | unreachable
    message: str


def _subject_matches(selector: str, participant: Subject) -> bool:
    try:
        org, role = split_subject_selector(selector)
    except ValueError:
        return False
    if org is not None and getattr(participant, "organization", None) != org:
        return False
    if role is not None:
        kind = getattr(participant, "kind", None)
        kind_name = getattr(kind, "value", kind)
        if participant.role != role and kind_name != role:
            return False
    return True


def _object_matches(selector: str, obj: ObjectRecord) -> bool:
    for component in object_selector_union(selector):
        try:
            org, patient_id = split_object_selector(component)
        except ValueError:
            if component == obj.name:
                return True
            continue
        if patient_id is not None and patient_id != obj.patient_id:
            continue
        if org is not None and org != obj.organization:
            continue
        return True
    return False


def _condition_request(participant: Subject, operation: str,
                       obj: ObjectRecord) -> AccessRequest:
    kind = getattr(participant, "kind", None)
    subject: dict[str, LitValue] = {
        "id": participant.id,
        "role": participant.role,
        "organization": participant.organization,
    }
    if kind is not None:
        subject["kind"] = getattr(kind, "value", str(kind))
    resource: dict[str, LitValue] = {"id": obj.name, "patientId": obj.patient_id}
    if obj.organization is not None:
        resource["organization"] = obj.organization
    resource.update(obj.attributes)
    return AccessRequest.of(subject=subject, resource=resource,
                            action={"operation": operation})


def check(participant: Subject, operation: str, obj: ObjectRecord,
          rules: list[AclRule]) -> Action:
    """First-applicable scan with terminal default deny."""
    if operation not in ACL_OPERATIONS:
        return Action.DENY
    request: AccessRequest | None = None
    for rule in rules:
        if rule.operation != operation:
            continue
        if not _subject_matches(rule.subject_selector, participant):
            continue
        if not _object_matches(rule.object_selector, obj):
            continue
        if rule.condition is None:
            return rule.action
        if request is None:
            request = _condition_request(participant, operation, obj)
        try:
            if eval_condition(rule.condition, request):
                return rule.action
        except ConditionError:
            pass  # fail closed: unevaluable condition is a non-match
    return Action.DENY


def validate_rules(rules: list[AclRule]) -> list[Diagnostic]:
    """Static lint of a rule list; returns diagnostics, never raises."""
    diagnostics: list[Diagnostic] = []
    seen_ids: set[str] = set()
    for index, rule in enumerate(rules, start=1):
        if rule.id in seen_ids:
            diagnostics.append(Diagnostic(
                rule.id, "duplicate-id", f"rule {index}: id {rule.id!r} reused"))
        seen_ids.add(rule.id)
        if rule.operation not in ACL_OPERATIONS:
            diagnostics.append(Diagnostic(
                rule.id, "unknown-verb",
                f"rule {index}: unknown verb {rule.operation!r} "
                f"(supported: {', '.join(ACL_OPERATIONS)})"))
        for j, earlier in enumerate(rules[:index - 1], start=1):
            same_selectors = (
                earlier.subject_selector == rule.subject_selector
                and earlier.operation == rule.operation
                and earlier.object_selector == rule.object_selector)
            if same_selectors and (earlier.condition is None
                                   or earlier.condition == rule.condition):
                diagnostics.append(Diagnostic(
                    rule.id, "unreachable",
                    f"rule {index} unreachable: shadowed by rule {j} ({earlier.id!r})"))
                break
    return diagnostics
