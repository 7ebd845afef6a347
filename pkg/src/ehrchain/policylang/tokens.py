"""Lexer for the authorization language.

Produces a flat token stream with 1-based line/column positions. Attribute
references (``subject.role``, ``v.organization``) are single tokens so the
parser never has to reassemble dotted names. ``//`` comments run to end of
line. Identifiers may contain ``-`` (the language has no minus operator),
which lets the combining-algorithm words lex as ordinary keywords.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class TokenKind(Enum):
    KW_POLICY = "policy"
    KW_RULE = "rule"
    KW_TARGET = "target"
    KW_CONDITION = "condition"
    KW_OBLIGATION = "obligation"
    KW_ON = "on"
    KW_PERMIT = "permit"
    KW_DENY = "deny"
    KW_IF = "if"
    KW_THEN = "then"
    KW_ELSE = "else"
    KW_TRUE = "true"
    KW_FALSE = "false"
    KW_DENY_OVERRIDES = "deny-overrides"
    KW_PERMIT_OVERRIDES = "permit-overrides"
    KW_FIRST_APPLICABLE = "first-applicable"
    IDENT = "identifier"
    ATTR_REF = "attribute reference"
    STRING = "string"
    INTEGER = "integer"
    EQ_EQ = "=="
    BANG_EQ = "!="
    AND_AND = "&&"
    OR_OR = "||"
    BANG = "!"
    ASSIGN = "="
    COLON = ":"
    LBRACE = "{"
    RBRACE = "}"
    LPAREN = "("
    RPAREN = ")"
    EOF = "end of input"


# permit/allow/ALLOW are one effect, deny/DENY the other; both vocabularies
# appear in the wild and the grammar treats them as spellings, not cases.
KEYWORDS = {
    "policy": TokenKind.KW_POLICY,
    "rule": TokenKind.KW_RULE,
    "target": TokenKind.KW_TARGET,
    "condition": TokenKind.KW_CONDITION,
    "obligation": TokenKind.KW_OBLIGATION,
    "on": TokenKind.KW_ON,
    "permit": TokenKind.KW_PERMIT,
    "allow": TokenKind.KW_PERMIT,
    "ALLOW": TokenKind.KW_PERMIT,
    "deny": TokenKind.KW_DENY,
    "DENY": TokenKind.KW_DENY,
    "if": TokenKind.KW_IF,
    "then": TokenKind.KW_THEN,
    "else": TokenKind.KW_ELSE,
    "true": TokenKind.KW_TRUE,
    "false": TokenKind.KW_FALSE,
    "deny-overrides": TokenKind.KW_DENY_OVERRIDES,
    "permit-overrides": TokenKind.KW_PERMIT_OVERRIDES,
    "first-applicable": TokenKind.KW_FIRST_APPLICABLE,
}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int
    value: object = None  # decoded payload for STRING/INTEGER/ATTR_REF


class LexError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")
_INT = re.compile(r"-?[0-9]+")
_PUNCT = [
    ("==", TokenKind.EQ_EQ),
    ("!=", TokenKind.BANG_EQ),
    ("&&", TokenKind.AND_AND),
    ("||", TokenKind.OR_OR),
    ("!", TokenKind.BANG),
    ("=", TokenKind.ASSIGN),
    (":", TokenKind.COLON),
    ("{", TokenKind.LBRACE),
    ("}", TokenKind.RBRACE),
    ("(", TokenKind.LPAREN),
    (")", TokenKind.RPAREN),
]

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def tokenize(source: str) -> list[Token]:
    """Lex ``source`` into tokens (EOF token included).

    Raises LexError for characters outside the language alphabet and for
    unterminated strings.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)

    def column(at: int) -> int:
        return at - line_start + 1

    while pos < n:
        ch = source[pos]

        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch in " \t\r":
            pos += 1
            continue
        if source.startswith("//", pos):
            while pos < n and source[pos] != "\n":
                pos += 1
            continue

        if ch == '"':
            # strings may span physical lines: the reference rule listings
            # wrap long selectors and conditions mid-literal
            start, start_line, start_col = pos, line, column(pos)
            pos += 1
            chunks: list[str] = []
            while True:
                if pos >= n:
                    raise LexError("unterminated string literal", start_line, start_col)
                c = source[pos]
                if c == "\n":
                    chunks.append(c)
                    pos += 1
                    line += 1
                    line_start = pos
                    continue
                if c == "\\":
                    if pos + 1 >= n or source[pos + 1] not in _ESCAPES:
                        raise LexError("invalid escape sequence", line, column(pos))
                    chunks.append(_ESCAPES[source[pos + 1]])
                    pos += 2
                    continue
                if c == '"':
                    pos += 1
                    break
                chunks.append(c)
                pos += 1
            text = source[start:pos]
            tokens.append(Token(TokenKind.STRING, text, start_line, start_col, "".join(chunks)))
            continue

        m = _INT.match(source, pos)
        if m and (ch.isdigit() or (ch == "-" and m.end() > pos + 1)):
            tokens.append(Token(TokenKind.INTEGER, m.group(), line, column(pos), int(m.group())))
            pos = m.end()
            continue

        m = _WORD.match(source, pos)
        if m:
            word = m.group()
            start_col = column(pos)
            pos = m.end()
            # one dot immediately followed by a word makes an attribute ref
            if pos < n and source[pos] == "." and _WORD.match(source, pos + 1):
                m2 = _WORD.match(source, pos + 1)
                name = m2.group()
                pos = m2.end()
                tokens.append(Token(TokenKind.ATTR_REF, f"{word}.{name}", line, start_col, (word, name)))
                continue
            kind = KEYWORDS.get(word, TokenKind.IDENT)
            tokens.append(Token(kind, word, line, start_col))
            continue

        for text, kind in _PUNCT:
            if source.startswith(text, pos):
                tokens.append(Token(kind, text, line, column(pos)))
                pos += len(text)
                break
        else:
            raise LexError(f"illegal character {ch!r}", line, column(pos))

    tokens.append(Token(TokenKind.EOF, "", line, column(pos)))
    return tokens
