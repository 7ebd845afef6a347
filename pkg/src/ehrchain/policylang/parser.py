"""Recursive-descent parser for the authorization language.

Two top-level forms share one grammar:

  policy <id> {                       rule <id> {
    deny-overrides                      description: "..."
    target <clause> && <clause>         subject(v): "Org.Role"
    rule <id> {                         operation: READ
      permit | deny                     object(t): "Org.patient#N.data"
      target ...                        condition: "<condition expression>"
      condition <expression>            action: ALLOW | DENY
    }                                 }
    obligation <id> on permit { k = v }
  }

The left form is the native policy syntax. The right form mirrors the
ledger-side rule listings; ``parse`` desugars it into a PolicyDocument
(selectors become target clauses, binding variables map onto the standard
``subject``/``resource`` categories), while ``parse_acl_rule_blocks``
returns the five-component structure unchanged for the chain-side checker.

Conditions are expressions over attribute references, string/integer/boolean
literals, ``== != && || !`` and ``if (c) then a else b``. A bare identifier
in expression position is a string literal (``v.role == Doctor`` compares
against the string "Doctor"). Precedence, loosest first: ``||``, ``&&``,
comparisons, ``!``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import (
    And,
    AttrRef,
    CombiningAlgorithm,
    Comparison,
    CondExpr,
    Effect,
    IfExpr,
    Literal,
    LitValue,
    MatchClause,
    Not,
    Obligation,
    Or,
    PolicyDocument,
    RuleDef,
    TargetExpr,
)
from .tokens import KEYWORDS, LexError, Token, TokenKind, tokenize

ACL_OPERATIONS = ("READ", "WRITE", "UPDATE")

# categories an evaluation request actually carries
STANDARD_CATEGORIES = ("subject", "resource", "action", "environment")


class ParseError(Exception):
    """Syntax or semantic rejection, with a 1-based source position."""

    def __init__(self, message: str, line: int, column: int, expected: list[str] | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.expected = expected or []
        suffix = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{suffix}")


@dataclass(frozen=True)
class AclRuleBlock:
    """Syntax-level form of a ledger rule block, before domain validation."""

    id: str
    description: str
    subject_selector: str
    subject_binding: str | None
    operation: str
    object_selector: str
    object_binding: str | None
    condition: CondExpr | None
    action: Effect


_EFFECT_KINDS = (TokenKind.KW_PERMIT, TokenKind.KW_DENY)
_COMBINING = {
    TokenKind.KW_DENY_OVERRIDES: CombiningAlgorithm.DENY_OVERRIDES,
    TokenKind.KW_PERMIT_OVERRIDES: CombiningAlgorithm.PERMIT_OVERRIDES,
    TokenKind.KW_FIRST_APPLICABLE: CombiningAlgorithm.FIRST_APPLICABLE,
}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing -----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def at(self, *kinds: TokenKind) -> bool:
        return self.peek().kind in kinds

    def expect(self, kind: TokenKind, context: str) -> Token:
        tok = self.peek()
        if tok.kind is not kind:
            raise self.error(f"unexpected {_describe(tok)} in {context}", [kind.value])
        return self.advance()

    def error(self, message: str, expected: list[str] | None = None) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column, expected)

    # -- documents ----------------------------------------------------------

    def document(self) -> PolicyDocument:
        if self.at(TokenKind.KW_POLICY):
            doc = self.policy()
            self.expect(TokenKind.EOF, "document")
            return doc
        if self.at(TokenKind.KW_RULE):
            blocks = self.acl_rule_blocks()
            return _desugar(blocks)
        raise self.error(f"unexpected {_describe(self.peek())} at top level",
                         [TokenKind.KW_POLICY.value, TokenKind.KW_RULE.value])

    def policy(self) -> PolicyDocument:
        self.expect(TokenKind.KW_POLICY, "document")
        ident = self.expect(TokenKind.IDENT, "policy header")
        self.expect(TokenKind.LBRACE, "policy header")

        combining: CombiningAlgorithm | None = None
        target = TargetExpr()
        rules: list[RuleDef] = []
        obligations: list[Obligation] = []
        seen_rule_ids: set[str] = set()

        while not self.at(TokenKind.RBRACE):
            tok = self.peek()
            if tok.kind in _COMBINING:
                if combining is not None:
                    raise self.error("combining algorithm given twice")
                combining = _COMBINING[tok.kind]
                self.advance()
            elif tok.kind is TokenKind.KW_TARGET:
                if not target.empty:
                    raise self.error("target given twice")
                target = self.target()
            elif tok.kind is TokenKind.KW_RULE:
                rule, id_tok = self.rule()
                if rule.id in seen_rule_ids:
                    raise ParseError(f"duplicate rule id {rule.id!r}", id_tok.line, id_tok.column)
                seen_rule_ids.add(rule.id)
                rules.append(rule)
            elif tok.kind is TokenKind.KW_OBLIGATION:
                obligations.append(self.obligation())
            else:
                raise self.error(
                    f"unexpected {_describe(tok)} in policy body",
                    [TokenKind.KW_RULE.value, TokenKind.KW_TARGET.value,
                     TokenKind.KW_OBLIGATION.value, TokenKind.RBRACE.value])
        self.expect(TokenKind.RBRACE, "policy body")
        return PolicyDocument(
            id=ident.text,
            combining=combining or CombiningAlgorithm.DENY_OVERRIDES,
            target=target,
            rules=tuple(rules),
            obligations=tuple(obligations),
        )

    def target(self) -> TargetExpr:
        self.expect(TokenKind.KW_TARGET, "target")
        clauses = [self.match_clause()]
        while self.at(TokenKind.AND_AND):
            self.advance()
            clauses.append(self.match_clause())
        return TargetExpr(tuple(clauses))

    def match_clause(self) -> MatchClause:
        ref = self.expect(TokenKind.ATTR_REF, "target clause")
        category, name = ref.value  # type: ignore[misc]
        self.expect(TokenKind.EQ_EQ, "target clause")
        value = self.literal("target clause")
        return MatchClause(category, name, value)

    def rule(self) -> tuple[RuleDef, Token]:
        self.expect(TokenKind.KW_RULE, "rule")
        ident = self.expect(TokenKind.IDENT, "rule header")
        self.expect(TokenKind.LBRACE, "rule header")

        effect: Effect | None = None
        target = TargetExpr()
        condition: CondExpr | None = None
        while not self.at(TokenKind.RBRACE):
            tok = self.peek()
            if tok.kind in _EFFECT_KINDS:
                if effect is not None:
                    raise self.error("rule effect given twice")
                effect = Effect.PERMIT if tok.kind is TokenKind.KW_PERMIT else Effect.DENY
                self.advance()
            elif tok.kind is TokenKind.KW_TARGET:
                if not target.empty:
                    raise self.error("target given twice")
                target = self.target()
            elif tok.kind is TokenKind.KW_CONDITION:
                if condition is not None:
                    raise self.error("condition given twice")
                self.advance()
                condition = self.cond_expr()
            else:
                raise self.error(
                    f"unexpected {_describe(tok)} in rule body",
                    [TokenKind.KW_PERMIT.value, TokenKind.KW_DENY.value,
                     TokenKind.KW_TARGET.value, TokenKind.KW_CONDITION.value,
                     TokenKind.RBRACE.value])
        if effect is None:
            raise self.error(f"rule {ident.text!r} has no permit/deny effect",
                             [TokenKind.KW_PERMIT.value, TokenKind.KW_DENY.value])
        self.expect(TokenKind.RBRACE, "rule body")
        return RuleDef(ident.text, effect, target, condition), ident

    def obligation(self) -> Obligation:
        self.expect(TokenKind.KW_OBLIGATION, "obligation")
        ident = self.expect(TokenKind.IDENT, "obligation header")
        self.expect(TokenKind.KW_ON, "obligation header")
        tok = self.peek()
        if tok.kind not in _EFFECT_KINDS:
            raise self.error("obligation must fulfil on permit or deny",
                             [TokenKind.KW_PERMIT.value, TokenKind.KW_DENY.value])
        fulfill_on = Effect.PERMIT if tok.kind is TokenKind.KW_PERMIT else Effect.DENY
        self.advance()
        self.expect(TokenKind.LBRACE, "obligation body")
        params: list[tuple[str, LitValue]] = []
        seen: set[str] = set()
        while not self.at(TokenKind.RBRACE):
            name = self.expect(TokenKind.IDENT, "obligation parameter")
            if name.text in seen:
                raise ParseError(f"duplicate obligation parameter {name.text!r}",
                                 name.line, name.column)
            seen.add(name.text)
            self.expect(TokenKind.ASSIGN, "obligation parameter")
            params.append((name.text, self.literal("obligation parameter")))
        self.expect(TokenKind.RBRACE, "obligation body")
        return Obligation(ident.text, fulfill_on, tuple(params))

    # -- ledger rule blocks ---------------------------------------------------

    def acl_rule_blocks(self) -> list[AclRuleBlock]:
        blocks: list[AclRuleBlock] = []
        seen: dict[str, Token] = {}
        while True:
            block, ident = self.acl_rule_block()
            if block.id in seen:
                raise ParseError(f"duplicate rule id {block.id!r}", ident.line, ident.column)
            seen[block.id] = ident
            blocks.append(block)
            if not self.at(TokenKind.KW_RULE):
                break
        self.expect(TokenKind.EOF, "rule file")
        return blocks

    def acl_rule_block(self) -> tuple[AclRuleBlock, Token]:
        self.expect(TokenKind.KW_RULE, "rule")
        ident = self.expect(TokenKind.IDENT, "rule header")
        self.expect(TokenKind.LBRACE, "rule header")

        fields: dict[str, object] = {}
        bindings: dict[str, str | None] = {"subject": None, "object": None}
        while not self.at(TokenKind.RBRACE):
            tok = self.peek()
            if tok.kind is TokenKind.KW_CONDITION:
                field = "condition"
                self.advance()
            elif tok.kind is TokenKind.IDENT and tok.text in (
                    "description", "subject", "operation", "object", "action"):
                field = tok.text
                self.advance()
            else:
                raise self.error(
                    f"unexpected {_describe(tok)} in rule block",
                    ["description", "subject", "operation", "object",
                     "condition", "action", TokenKind.RBRACE.value])
            if field in fields:
                raise ParseError(f"field {field!r} given twice", tok.line, tok.column)

            if field in ("subject", "object") and self.at(TokenKind.LPAREN):
                self.advance()
                binder = self.expect(TokenKind.IDENT, f"{field} binding variable")
                self.expect(TokenKind.RPAREN, f"{field} binding variable")
                bindings[field] = binder.text
            self.expect(TokenKind.COLON, f"{field} field")

            if field in ("description", "subject", "object"):
                value_tok = self.expect(TokenKind.STRING, f"{field} field")
                fields[field] = value_tok.value
                if field == "subject":
                    try:
                        split_subject_selector(str(value_tok.value))
                    except ValueError as exc:
                        raise ParseError(str(exc), value_tok.line, value_tok.column) from exc
            elif field == "operation":
                fields[field] = self.expect(TokenKind.IDENT, "operation field").text
            elif field == "condition":
                fields[field] = self._embedded_condition()
            else:  # action
                act = self.peek()
                if act.kind not in _EFFECT_KINDS:
                    raise self.error("action must be ALLOW or DENY",
                                     [TokenKind.KW_PERMIT.value, TokenKind.KW_DENY.value])
                fields[field] = Effect.PERMIT if act.kind is TokenKind.KW_PERMIT else Effect.DENY
                self.advance()

        close = self.peek()
        for required in ("subject", "operation", "object", "action"):
            if required not in fields:
                raise ParseError(f"rule {ident.text!r} is missing the {required!r} field",
                                 close.line, close.column, [required])
        self.expect(TokenKind.RBRACE, "rule block")

        condition = fields.get("condition")
        condition = _rebind_categories(
            condition, bindings["subject"], bindings["object"]) if condition is not None else None
        return AclRuleBlock(
            id=ident.text,
            description=str(fields.get("description", "")),
            subject_selector=str(fields["subject"]),
            subject_binding=bindings["subject"],
            operation=str(fields["operation"]),
            object_selector=str(fields["object"]),
            object_binding=bindings["object"],
            condition=condition,
            action=fields["action"],  # type: ignore[arg-type]
        ), ident

    def _embedded_condition(self) -> CondExpr:
        """Parse a condition quoted as a string, or written inline."""
        tok = self.peek()
        if tok.kind is not TokenKind.STRING:
            return self.cond_expr()
        self.advance()
        inner = tok.text[1:-1]
        try:
            sub_tokens = [_shift(t, tok) for t in tokenize(inner)]
        except LexError as exc:
            line, col = _shift_pos(exc.line, exc.column, tok)
            raise ParseError(exc.message, line, col) from exc
        sub = _Parser(sub_tokens)
        expr = sub.cond_expr()
        sub.expect(TokenKind.EOF, "condition")
        return expr

    # -- conditions -----------------------------------------------------------

    def cond_expr(self) -> CondExpr:
        return self.or_expr()

    def or_expr(self) -> CondExpr:
        expr = self.and_expr()
        while self.at(TokenKind.OR_OR):
            self.advance()
            expr = Or(expr, self.and_expr())
        return expr

    def and_expr(self) -> CondExpr:
        expr = self.cmp_expr()
        while self.at(TokenKind.AND_AND):
            self.advance()
            expr = And(expr, self.cmp_expr())
        return expr

    def cmp_expr(self) -> CondExpr:
        expr = self.unary()
        if self.at(TokenKind.EQ_EQ, TokenKind.BANG_EQ):
            op = "==" if self.advance().kind is TokenKind.EQ_EQ else "!="
            return Comparison(op, expr, self.unary())
        return expr

    def unary(self) -> CondExpr:
        if self.at(TokenKind.BANG):
            self.advance()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> CondExpr:
        tok = self.peek()
        if tok.kind is TokenKind.LPAREN:
            self.advance()
            expr = self.cond_expr()
            self.expect(TokenKind.RPAREN, "parenthesized expression")
            return expr
        if tok.kind is TokenKind.KW_IF:
            self.advance()
            self.expect(TokenKind.LPAREN, "if condition")
            condition = self.cond_expr()
            self.expect(TokenKind.RPAREN, "if condition")
            self.expect(TokenKind.KW_THEN, "if expression")
            then_branch = self.cond_expr()
            self.expect(TokenKind.KW_ELSE, "if expression")
            else_branch = self.cond_expr()
            return IfExpr(condition, then_branch, else_branch)
        if tok.kind is TokenKind.ATTR_REF:
            self.advance()
            category, name = tok.value  # type: ignore[misc]
            return AttrRef(category, name)
        if tok.kind in (TokenKind.STRING, TokenKind.INTEGER):
            self.advance()
            return Literal(tok.value)  # type: ignore[arg-type]
        if tok.kind is TokenKind.KW_TRUE:
            self.advance()
            return Literal(True)
        if tok.kind is TokenKind.KW_FALSE:
            self.advance()
            return Literal(False)
        if tok.kind is TokenKind.IDENT:
            # bare word in expression position is a string literal
            self.advance()
            return Literal(tok.text)
        raise self.error(
            f"unexpected {_describe(tok)} in expression",
            [TokenKind.ATTR_REF.value, TokenKind.STRING.value, TokenKind.INTEGER.value,
             TokenKind.KW_TRUE.value, TokenKind.KW_FALSE.value, TokenKind.KW_IF.value,
             TokenKind.BANG.value, TokenKind.LPAREN.value])

    def literal(self, context: str) -> LitValue:
        tok = self.peek()
        if tok.kind in (TokenKind.STRING, TokenKind.INTEGER):
            self.advance()
            return tok.value  # type: ignore[return-value]
        if tok.kind is TokenKind.KW_TRUE:
            self.advance()
            return True
        if tok.kind is TokenKind.KW_FALSE:
            self.advance()
            return False
        if tok.kind is TokenKind.IDENT:
            self.advance()
            return tok.text
        raise self.error(f"unexpected {_describe(tok)} in {context}",
                         [TokenKind.STRING.value, TokenKind.INTEGER.value,
                          TokenKind.KW_TRUE.value, TokenKind.KW_FALSE.value])


# -- helpers -------------------------------------------------------------------

def _describe(tok: Token) -> str:
    if tok.kind is TokenKind.EOF:
        return "end of input"
    return f"{tok.kind.value} {tok.text!r}" if tok.text else tok.kind.value


def _shift_pos(line: int, column: int, outer: Token) -> tuple[int, int]:
    # content starts one character after the opening quote of `outer`
    if line == 1:
        return outer.line, outer.column + column
    return outer.line + line - 1, column


def _shift(tok: Token, outer: Token) -> Token:
    line, column = _shift_pos(tok.line, tok.column, outer)
    return Token(tok.kind, tok.text, line, column, tok.value)


def _rebind_categories(expr: CondExpr, subject_binder: str | None,
                       object_binder: str | None) -> CondExpr:
    """Map binding-variable attribute refs onto standard request categories."""
    mapping = {}
    if subject_binder:
        mapping[subject_binder] = "subject"
    if object_binder:
        mapping[object_binder] = "resource"

    def walk(node: CondExpr) -> CondExpr:
        if isinstance(node, AttrRef):
            return AttrRef(mapping.get(node.category, node.category), node.name)
        if isinstance(node, Comparison):
            return Comparison(node.op, walk(node.left), walk(node.right))
        if isinstance(node, And):
            return And(walk(node.left), walk(node.right))
        if isinstance(node, Or):
            return Or(walk(node.left), walk(node.right))
        if isinstance(node, Not):
            return Not(walk(node.operand))
        if isinstance(node, IfExpr):
            return IfExpr(walk(node.condition), walk(node.then_branch), walk(node.else_branch))
        return node

    return walk(expr)


def split_subject_selector(selector: str) -> tuple[str | None, str | None]:
    """Selector -> (organization, role); wildcards yield (None, None)."""
    if selector in ("*", "ANY"):
        return None, None
    parts = selector.split(".")
    if len(parts) == 1:
        return None, parts[0]
    if len(parts) == 2:
        return parts[0], parts[1]
    raise ValueError(f"unsupported subject selector {selector!r}")


def split_object_selector(selector: str) -> tuple[str | None, str | None]:
    """Selector -> (organization, patient id); class selectors yield (None, None).

    Recognized shapes: ``*``, ``ANY``, ``EHR``, ``patient#<id>``,
    ``patient#<id>.data`` and any of those with a leading organization
    segment. Anything else raises ValueError (callers fall back to matching
    the selector verbatim against the asset name).
    """
    if selector in ("*", "ANY", "EHR"):
        return None, None
    parts = selector.split(".")
    idx = next((i for i, p in enumerate(parts) if p.startswith("patient#")), None)
    if idx is None or idx > 1:
        raise ValueError(f"unsupported object selector {selector!r}")
    tail = parts[idx + 1:]
    if tail not in ([], ["data"]):
        raise ValueError(f"unsupported object selector {selector!r}")
    org = parts[0] if idx == 1 else None
    patient_id = parts[idx][len("patient#"):]
    if not patient_id:
        raise ValueError(f"unsupported object selector {selector!r}")
    return org, patient_id


def object_selector_union(selector: str) -> list[str]:
    """Split an object selector into its union components (``|``-separated)."""
    return [part.strip() for part in selector.split("|") if part.strip()]


def _object_component_clauses(component: str) -> list[MatchClause]:
    try:
        obj_org, patient_id = split_object_selector(component)
    except ValueError:
        return [MatchClause("resource", "id", component)]
    clauses = []
    if obj_org is not None:
        clauses.append(MatchClause("resource", "organization", obj_org))
    if patient_id is not None:
        clauses.append(MatchClause("resource", "id", f"patient#{patient_id}.data"))
    return clauses


def _desugar(blocks: list[AclRuleBlock]) -> PolicyDocument:
    """Rewrite ledger rule blocks as an equivalent native policy.

    Selectors become target clauses. A union object selector cannot live in
    the conjunctive target, so it folds into the rule condition as an
    ``||``-chain over the resource id.
    """
    rules = []
    for block in blocks:
        clauses: list[MatchClause] = []
        org, role = split_subject_selector(block.subject_selector)
        if org is not None:
            clauses.append(MatchClause("subject", "organization", org))
        if role is not None:
            clauses.append(MatchClause("subject", "role", role))
        clauses.append(MatchClause("action", "operation", block.operation))

        condition = block.condition
        components = object_selector_union(block.object_selector)
        if len(components) == 1:
            clauses.extend(_object_component_clauses(components[0]))
        elif components:
            alternatives: CondExpr | None = None
            for component in components:
                comparisons: CondExpr | None = None
                for clause in _object_component_clauses(component):
                    cmp = Comparison("==", AttrRef(clause.category, clause.name),
                                     Literal(clause.value))
                    comparisons = cmp if comparisons is None else And(comparisons, cmp)
                if comparisons is None:
                    comparisons = Literal(True)  # class component matches everything
                alternatives = comparisons if alternatives is None else Or(alternatives, comparisons)
            if alternatives is not None:
                condition = alternatives if condition is None else And(alternatives, condition)

        rules.append(RuleDef(
            id=block.id,
            effect=block.action,
            target=TargetExpr(tuple(clauses)),
            condition=condition,
        ))
    doc_id = blocks[0].id if len(blocks) == 1 else "acl"
    return PolicyDocument(id=doc_id, rules=tuple(rules))


# -- public entry points ---------------------------------------------------------

def parse(source: str) -> PolicyDocument:
    """Parse policy source (either top-level form) into a PolicyDocument."""
    try:
        tokens = tokenize(source)
    except LexError as exc:
        raise ParseError(exc.message, exc.line, exc.column) from exc
    return _Parser(tokens).document()


def parse_condition(source: str) -> CondExpr:
    """Parse a bare condition expression (used by tests and tooling)."""
    try:
        tokens = tokenize(source)
    except LexError as exc:
        raise ParseError(exc.message, exc.line, exc.column) from exc
    parser = _Parser(tokens)
    expr = parser.cond_expr()
    parser.expect(TokenKind.EOF, "condition")
    return expr


def parse_acl_rule_blocks(source: str) -> list[AclRuleBlock]:
    """Parse a ledger rule file into its five-component rule blocks."""
    try:
        tokens = tokenize(source)
    except LexError as exc:
        raise ParseError(exc.message, exc.line, exc.column) from exc
    return _Parser(tokens).acl_rule_blocks()
