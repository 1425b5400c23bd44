"""Bracketed call-string grammar: parsing and canonical rendering.

A call string is a bracketed list of function invocations, for example::

    [get_weather_data(coordinates=[45.4215, -75.6972]), calc_binomial_probability(n=10, k=5.0, p=0.5)]

The grammar is deliberately close to Python literal syntax:

- API names may contain letters, digits, underscores, dots, and spaces
  ("Get Live Events Count by Sport" is a valid name).
- Argument values are double- or single-quoted strings, signed integers and
  floats, ``true``/``false`` (``True``/``False`` accepted), bracketed lists,
  and braced maps with quoted string keys.
- Whitespace between tokens is ignored.

Rendering is canonical: strings are double-quoted with JSON escaping, list
items and arguments are joined with ", ", map keys are followed by ": ",
booleans render lowercase, and numbers use their shortest round-trip
representation (an int never gains a decimal point). ``parse_call_string``
composed with ``render_call_string`` is the identity on well-formed input.

The parser is total: for any input string (tested up to 1 MiB) it either
returns a value or raises :class:`CallSyntaxError`. Nesting is capped at
``MAX_DEPTH`` so adversarial input cannot overflow the interpreter stack.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Union

Value = Union[str, int, float, bool, list, dict]

MAX_DEPTH = 64

_NAME_CHARS = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_. "
)
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_WORD_RE = re.compile(r"[A-Za-z_]+")
_HEX4_RE = re.compile(r"[0-9a-fA-F]{4}")

_ESCAPES = {
    '"': '"',
    "'": "'",
    "\\": "\\",
    "/": "/",
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "b": "\b",
    "f": "\f",
}


class CallSyntaxError(SyntaxError):
    """Malformed call string. Carries the offset and the expected token."""

    def __init__(self, message: str, position: int, expected: str | None = None):
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)
        self.position = position
        self.expected = expected


@dataclass
class FunctionCall:
    """One parsed invocation: the API name and its named arguments in order."""

    api_name: str
    arguments: dict[str, Value] = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        # Argument order is significant, so compare the items sequence rather
        # than relying on dict equality.
        if not isinstance(other, FunctionCall):
            return NotImplemented
        return self.api_name == other.api_name and list(self.arguments.items()) == list(
            other.arguments.items()
        )

    __hash__ = None  # type: ignore[assignment]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.length = len(text)

    def fail(self, message: str, expected: str | None = None) -> None:
        raise CallSyntaxError(message, self.pos, expected)

    def skip_ws(self) -> None:
        while self.pos < self.length and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        if self.pos < self.length:
            return self.text[self.pos]
        return ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            self.fail(f"unexpected {self.peek()!r}" if self.peek() else "unexpected end of input", repr(ch))
        self.pos += 1

    def parse_call_list(self) -> list[FunctionCall]:
        self.skip_ws()
        self.expect("[")
        calls: list[FunctionCall] = []
        self.skip_ws()
        if self.peek() == "]":
            self.pos += 1
        else:
            while True:
                calls.append(self.parse_call())
                self.skip_ws()
                ch = self.peek()
                if ch == ",":
                    self.pos += 1
                    self.skip_ws()
                    continue
                if ch == "]":
                    self.pos += 1
                    break
                self.fail(
                    f"unexpected {ch!r}" if ch else "unexpected end of input",
                    "',' or ']'",
                )
        self.skip_ws()
        if self.pos != self.length:
            self.fail(f"trailing input {self.text[self.pos]!r}", "end of input")
        return calls

    def parse_call(self) -> FunctionCall:
        name = self.parse_api_name()
        self.expect("(")
        arguments: dict[str, Value] = {}
        self.skip_ws()
        if self.peek() == ")":
            self.pos += 1
            return FunctionCall(name, arguments)
        while True:
            key_pos = self.pos
            key = self.parse_ident()
            if key in arguments:
                self.pos = key_pos
                self.fail(f"duplicate argument {key!r}")
            self.skip_ws()
            self.expect("=")
            self.skip_ws()
            arguments[key] = self.parse_value(0)
            self.skip_ws()
            ch = self.peek()
            if ch == ",":
                self.pos += 1
                self.skip_ws()
                continue
            if ch == ")":
                self.pos += 1
                break
            self.fail(
                f"unexpected {ch!r}" if ch else "unexpected end of input",
                "',' or ')'",
            )
        return FunctionCall(name, arguments)

    def parse_api_name(self) -> str:
        start = self.pos
        while self.pos < self.length and self.text[self.pos] in _NAME_CHARS:
            self.pos += 1
        name = self.text[start : self.pos].strip()
        if not name:
            self.fail("missing function name", "API name")
        return name

    def parse_ident(self) -> str:
        match = _IDENT_RE.match(self.text, self.pos)
        if not match:
            self.fail(
                f"unexpected {self.peek()!r}" if self.peek() else "unexpected end of input",
                "argument name",
            )
        self.pos = match.end()
        return match.group()

    def parse_value(self, depth: int) -> Value:
        if depth > MAX_DEPTH:
            self.fail(f"nesting deeper than {MAX_DEPTH} levels")
        ch = self.peek()
        if ch in "\"'":
            return self.parse_string()
        if ch == "[":
            return self.parse_list(depth)
        if ch == "{":
            return self.parse_map(depth)
        if ch and (ch.isdigit() or ch in "+-."):
            return self.parse_number()
        word = _WORD_RE.match(self.text, self.pos)
        if word:
            token = word.group()
            if token in ("true", "True"):
                self.pos = word.end()
                return True
            if token in ("false", "False"):
                self.pos = word.end()
                return False
        self.fail(
            f"unexpected {ch!r}" if ch else "unexpected end of input",
            "value",
        )
        raise AssertionError("unreachable")

    def parse_string(self) -> str:
        quote = self.text[self.pos]
        self.pos += 1
        pieces: list[str] = []
        while True:
            if self.pos >= self.length:
                self.fail("unterminated string", repr(quote))
            ch = self.text[self.pos]
            if ch == quote:
                self.pos += 1
                return "".join(pieces)
            if ch == "\\":
                self.pos += 1
                if self.pos >= self.length:
                    self.fail("unterminated escape")
                esc = self.text[self.pos]
                if esc in _ESCAPES:
                    pieces.append(_ESCAPES[esc])
                    self.pos += 1
                elif esc == "u":
                    hex_part = self.text[self.pos + 1 : self.pos + 5]
                    if not _HEX4_RE.fullmatch(hex_part):
                        self.fail("bad unicode escape", "4 hex digits")
                    pieces.append(chr(int(hex_part, 16)))
                    self.pos += 5
                else:
                    self.fail(f"unknown escape {esc!r}")
            else:
                pieces.append(ch)
                self.pos += 1

    def parse_number(self) -> Value:
        match = _NUMBER_RE.match(self.text, self.pos)
        if not match:
            self.fail(f"unexpected {self.peek()!r}", "number")
        token = match.group()
        self.pos = match.end()
        if "." in token or "e" in token or "E" in token:
            return float(token)
        try:
            return int(token)
        except ValueError:
            # Oversized literals trip the interpreter's int-parsing guard;
            # report them as syntax trouble instead of letting that escape.
            self.pos = match.start()
            self.fail("integer literal too long")
        raise AssertionError("unreachable")

    def parse_list(self, depth: int) -> list:
        self.expect("[")
        items: list[Value] = []
        self.skip_ws()
        if self.peek() == "]":
            self.pos += 1
            return items
        while True:
            items.append(self.parse_value(depth + 1))
            self.skip_ws()
            ch = self.peek()
            if ch == ",":
                self.pos += 1
                self.skip_ws()
                continue
            if ch == "]":
                self.pos += 1
                return items
            self.fail(
                f"unexpected {ch!r}" if ch else "unexpected end of input",
                "',' or ']'",
            )

    def parse_map(self, depth: int) -> dict:
        self.expect("{")
        mapping: dict[str, Value] = {}
        self.skip_ws()
        if self.peek() == "}":
            self.pos += 1
            return mapping
        while True:
            if self.peek() not in "\"'":
                self.fail(
                    f"unexpected {self.peek()!r}" if self.peek() else "unexpected end of input",
                    "quoted map key",
                )
            key = self.parse_string()
            self.skip_ws()
            self.expect(":")
            self.skip_ws()
            mapping[key] = self.parse_value(depth + 1)
            self.skip_ws()
            ch = self.peek()
            if ch == ",":
                self.pos += 1
                self.skip_ws()
                continue
            if ch == "}":
                self.pos += 1
                return mapping
            self.fail(
                f"unexpected {ch!r}" if ch else "unexpected end of input",
                "',' or '}'",
            )


def parse_call_string(text: str) -> list[FunctionCall]:
    """Parse a bracketed call string into a list of :class:`FunctionCall`.

    Raises :class:`CallSyntaxError` (a ``SyntaxError`` subclass carrying
    ``position`` and ``expected``) on malformed input. Never raises anything
    else, regardless of input bytes.
    """
    return _Parser(text).parse_call_list()


def render_value(value: Value) -> str:
    """Render one argument value in canonical form."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list):
        return "[" + ", ".join(render_value(item) for item in value) + "]"
    if isinstance(value, dict):
        parts = []
        for key, item in value.items():
            parts.append(f"{json.dumps(str(key), ensure_ascii=False)}: {render_value(item)}")
        return "{" + ", ".join(parts) + "}"
    raise TypeError(f"cannot render value of type {type(value).__name__}")


def render_call_string(calls: list[FunctionCall]) -> str:
    """Render calls canonically; the exact inverse of :func:`parse_call_string`."""
    rendered = []
    for call in calls:
        args = ", ".join(f"{name}={render_value(value)}" for name, value in call.arguments.items())
        rendered.append(f"{call.api_name}({args})")
    return "[" + ", ".join(rendered) + "]"
