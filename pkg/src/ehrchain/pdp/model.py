"""Request/decision model for the decision engine.

The four attribute categories are fixed. Attribute values are the language's
literal kinds (str, int, bool); a bag holds at most one value per name.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Optional, Protocol, runtime_checkable

from ..errors import DuplicateId
from ..policylang.nodes import LitValue, Obligation, PolicyDocument

CATEGORIES = ("subject", "resource", "action", "environment")


class DecisionValue(Enum):
    PERMIT = "Permit"
    DENY = "Deny"
    NOT_APPLICABLE = "NotApplicable"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class Decision:
    value: DecisionValue
    obligations: tuple[Obligation, ...] = ()
    reason: str | None = None

    def __post_init__(self):
        if self.obligations and self.value not in (DecisionValue.PERMIT, DecisionValue.DENY):
            raise ValueError("obligations only attach to Permit or Deny decisions")


@dataclass(frozen=True)
class AttributeBag:
    category: str
    entries: Mapping[str, LitValue] = field(default_factory=dict)

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown attribute category {self.category!r}")

    def get(self, name: str) -> Optional[LitValue]:
        return self.entries.get(name)


@dataclass(frozen=True)
class AccessRequest:
    subject: AttributeBag
    resource: AttributeBag
    action: AttributeBag
    environment: AttributeBag

    @classmethod
    def of(cls, subject: Mapping[str, LitValue] | None = None,
           resource: Mapping[str, LitValue] | None = None,
           action: Mapping[str, LitValue] | None = None,
           environment: Mapping[str, LitValue] | None = None) -> "AccessRequest":
        return cls(
            subject=AttributeBag("subject", dict(subject or {})),
            resource=AttributeBag("resource", dict(resource or {})),
            action=AttributeBag("action", dict(action or {})),
            environment=AttributeBag("environment", dict(environment or {})),
        )

    def bag(self, category: str) -> AttributeBag:
        return getattr(self, category)


@runtime_checkable
class AttributeResolver(Protocol):
    """External attribute source consulted when a request bag has no value."""

    def lookup(self, category: str, name: str) -> Optional[LitValue]: ...


class StaticResolver:
    """Resolver over a fixed {(category, name): value} table."""

    def __init__(self, table: Mapping[tuple[str, str], LitValue] | None = None):
        self._table = dict(table or {})

    def lookup(self, category: str, name: str) -> Optional[LitValue]:
        return self._table.get((category, name))


NULL_RESOLVER = StaticResolver()


class PolicyStore:
    """Installed policies, keyed by document id.

    Mutations take a lock and swap whole documents, so concurrent
    evaluations see either the old or the new document, never a hybrid.
    """

    def __init__(self):
        self._docs: dict[str, PolicyDocument] = {}
        self._lock = threading.Lock()

    def install(self, doc: PolicyDocument) -> None:
        with self._lock:
            if doc.id in self._docs:
                raise DuplicateId(f"policy {doc.id!r} already installed")
            self._docs[doc.id] = doc

    def replace(self, doc: PolicyDocument) -> None:
        with self._lock:
            self._docs[doc.id] = doc

    def remove(self, doc_id: str) -> None:
        with self._lock:
            self._docs.pop(doc_id, None)

    def get(self, doc_id: str) -> Optional[PolicyDocument]:
        with self._lock:
            return self._docs.get(doc_id)

    def __contains__(self, doc_id: str) -> bool:
        return self.get(doc_id) is not None

    def __iter__(self) -> Iterator[str]:
        with self._lock:
            return iter(list(self._docs))
