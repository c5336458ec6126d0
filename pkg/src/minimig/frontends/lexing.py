"""Small shared tokenizer for the three mini dialects."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError

NAME = "NAME"
NUMBER = "NUMBER"
STRING = "STRING"
OP = "OP"
NEWLINE = "NEWLINE"
EOF = "EOF"

_MULTI_OPS = ("==",)
_SINGLE_OPS = set("(){};:,.&+-*/=<>")


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    line: int
    col: int


def tokenize(
    text: str,
    *,
    newlines: bool = False,
    comment: str = "//",
    double_quote_escape: bool = False,
) -> list[Token]:
    """Token stream; MiniProc wants significant newlines and '' escapes."""
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            if newlines and tokens and tokens[-1].type != NEWLINE:
                tokens.append(Token(NEWLINE, "\n", line, col))
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith(comment, i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            out = []
            while True:
                if i >= n or text[i] == "\n":
                    raise ParseError("unterminated string literal", start_line, start_col)
                c = text[i]
                if c == '"':
                    if double_quote_escape and i + 1 < n and text[i + 1] == '"':
                        out.append('"')
                        i += 2
                        col += 2
                        continue
                    i += 1
                    col += 1
                    break
                if not double_quote_escape and c == "\\":
                    if i + 1 >= n:
                        raise ParseError("dangling escape", line, col)
                    esc = text[i + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    i += 2
                    col += 2
                    continue
                out.append(c)
                i += 1
                col += 1
            tokens.append(Token(STRING, "".join(out), start_line, start_col))
            continue
        if ch.isdigit():
            start_col = col
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            tokens.append(Token(NUMBER, text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token(NAME, text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        matched = None
        for op in _MULTI_OPS:
            if text.startswith(op, i):
                matched = op
                break
        if matched is None and ch in _SINGLE_OPS:
            matched = ch
        if matched is None:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        tokens.append(Token(OP, matched, line, col))
        i += len(matched)
        col += len(matched)
    tokens.append(Token(EOF, "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        token = self.peek()
        if token.type != EOF:
            self.pos += 1
        return token

    def at(self, type_: str, value: str | None = None, *, ci: bool = False) -> bool:
        token = self.peek()
        if token.type != type_:
            return False
        if value is None:
            return True
        return token.value.lower() == value.lower() if ci else token.value == value

    def expect(self, type_: str, value: str | None = None, *, ci: bool = False) -> Token:
        if not self.at(type_, value, ci=ci):
            token = self.peek()
            want = value or type_
            raise ParseError(f"expected {want!r}, found {token.value!r}", token.line, token.col)
        return self.next()

    def skip_newlines(self) -> None:
        while self.at(NEWLINE):
            self.next()
