"""Authorization-language front end: lexer, parser, AST, serializer."""

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
from .parser import (
    ACL_OPERATIONS,
    AclRuleBlock,
    ParseError,
    parse,
    parse_acl_rule_blocks,
    parse_condition,
)
from .serializer import serialize, serialize_condition
from .tokens import LexError, Token, TokenKind, tokenize

__all__ = [
    "ACL_OPERATIONS",
    "AclRuleBlock",
    "And",
    "AttrRef",
    "CombiningAlgorithm",
    "Comparison",
    "CondExpr",
    "Effect",
    "IfExpr",
    "LexError",
    "Literal",
    "LitValue",
    "MatchClause",
    "Not",
    "Obligation",
    "Or",
    "ParseError",
    "PolicyDocument",
    "RuleDef",
    "TargetExpr",
    "Token",
    "TokenKind",
    "parse",
    "parse_acl_rule_blocks",
    "parse_condition",
    "serialize",
    "serialize_condition",
    "tokenize",
]
