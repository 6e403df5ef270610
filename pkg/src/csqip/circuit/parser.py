"""Parser, validator and canonical formatter for the circuit language.

Grammar (one instruction per line, ``#`` starts a comment)::

    modes <n>
    param <name> <value>
    input <mode> coherent <re> [<im>]
    input <mode> cat <alpha> <plus|minus>       # normalized N(|-alpha> +/- |alpha>)
    bs <mode_a> <mode_b> <r>                     # amplitude reflectivity, mix angle asin(r)
    pm <mode> <theta>
    loss <mode> <eta> [input|output]
    detect <mode> <id> [exact|ideal]
    homodyne <mode> <id>
    onclick <id> <plus|minus|click|vac> pm <mode> <theta>
    fail_when <id> click and <id> click

A value is a product of factors joined by ``*``; a factor is a number, the
constant ``pi`` or a declared parameter name, optionally negated with ``-``.
Modes without an ``input`` line start in the vacuum.  Detectors written on
consecutive lines measure simultaneously.  ``exact`` on/off detectors use the
vacuum projector; ``ideal`` ones and ``homodyne`` read the coherent label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

from .lexer import ParseError, Token, tokenize

VALUE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Value:
    """coef * prod(params[name] for name in names); ``pi`` is folded into coef."""

    coef: float
    names: tuple[str, ...] = ()

    def __eq__(self, other):
        if not isinstance(other, Value):
            return NotImplemented
        return self.names == other.names and math.isclose(
            self.coef, other.coef, rel_tol=VALUE_TOL, abs_tol=VALUE_TOL
        )

    def __hash__(self):
        return hash(self.names)

    @property
    def is_constant(self) -> bool:
        return not self.names

    def resolve(self, params: Mapping[str, float]) -> float:
        out = self.coef
        for name in self.names:
            out *= params[name]
        return out


def const(x: float) -> Value:
    return Value(float(x))


@dataclass(frozen=True)
class Input:
    mode: int
    kind: str  # coherent | cat
    values: tuple[Value, ...]
    parity: str | None = None


@dataclass(frozen=True)
class BS:
    mode_a: int
    mode_b: int
    r: Value


@dataclass(frozen=True)
class PM:
    mode: int
    theta: Value


@dataclass(frozen=True)
class Loss:
    mode: int
    eta: Value
    placement: str | None = None


@dataclass(frozen=True)
class Detect:
    mode: int
    detector: str
    model: str = "exact"


@dataclass(frozen=True)
class Homodyne:
    mode: int
    detector: str


@dataclass(frozen=True)
class OnClick:
    detector: str
    symbol: str
    mode: int
    theta: Value


@dataclass(frozen=True)
class FailWhen:
    detector_a: str
    detector_b: str


Element = Union[BS, PM, Loss, Detect, Homodyne, OnClick, FailWhen]


@dataclass(frozen=True)
class Circuit:
    mode_count: int
    params: tuple[tuple[str, Value], ...] = ()
    inputs: tuple[Input, ...] = ()
    elements: tuple[Element, ...] = field(default_factory=tuple)

    @property
    def param_defaults(self) -> dict[str, float]:
        return {name: v.coef for name, v in self.params}

    @property
    def detectors(self) -> dict[str, Detect | Homodyne]:
        return {e.detector: e for e in self.elements if isinstance(e, (Detect, Homodyne))}

    @property
    def n_losses(self) -> int:
        return sum(isinstance(e, Loss) for e in self.elements)


# --- parsing -----------------------------------------------------------------

ONOFF_SYMBOLS = ("vac", "click")
HOMODYNE_SYMBOLS = ("plus", "minus")


class _Line:
    """Cursor over the tokens of one line."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 1  # token 0 is the keyword

    @property
    def keyword(self) -> Token:
        return self.tokens[0]

    def _end_col(self) -> int:
        last = self.tokens[-1]
        return last.col + len(last.text)

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        if tok is None:
            tok = self.tokens[self.pos] if self.pos < len(self.tokens) else None
        if tok is None:
            return ParseError(message, self.keyword.line, self._end_col())
        return ParseError(message, tok.line, tok.col)

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, what: str) -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}")
        self.pos += 1
        return tok

    def word(self, what: str, choices: tuple[str, ...] | None = None) -> str:
        tok = self.next(what)
        if tok.kind != "NAME" or (choices and tok.text not in choices):
            expect = " or ".join(choices) if choices else what
            raise self.error(f"expected {expect}, got {tok.text!r}", tok)
        return tok.text

    def integer(self, what: str) -> tuple[int, Token]:
        tok = self.next(what)
        try:
            if tok.kind != "NUMBER":
                raise ValueError
            return int(tok.text), tok
        except ValueError:
            raise self.error(f"expected integer {what}, got {tok.text!r}", tok) from None

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected trailing token {tok.text!r}", tok)


class _Parser:
    def __init__(self):
        self.mode_count: int | None = None
        self.params: list[tuple[str, Value]] = []
        self.inputs: list[Input] = []
        self.elements: list[Element] = []
        self.detectors: dict[str, Detect | Homodyne] = {}
        self.measured: dict[int, int] = {}  # mode -> line of measurement
        self.input_modes: set[int] = set()

    # values

    def value(self, ln: _Line, what: str) -> tuple[Value, Token]:
        first = ln.peek()
        if first is None:
            raise ln.error(f"expected {what}")
        coef, names = 1.0, []
        while True:
            neg = False
            tok = ln.next(what)
            if tok.kind == "MINUS":
                neg = True
                tok = ln.next(what)
            if tok.kind == "NUMBER":
                x = float(tok.text)
            elif tok.kind == "NAME":
                if tok.text == "pi":
                    x = math.pi
                elif tok.text in dict(self.params):
                    x = 1.0
                    names.append(tok.text)
                else:
                    raise ln.error(f"undefined parameter {tok.text!r}", tok)
            else:
                raise ln.error(f"expected number or name in {what}, got {tok.text!r}", tok)
            coef *= -x if neg else x
            nxt = ln.peek()
            if nxt is None or nxt.kind != "STAR":
                break
            ln.pos += 1
        return Value(coef, tuple(names)), first

    def bounded(self, ln: _Line, what: str) -> Value:
        v, tok = self.value(ln, what)
        if v.is_constant and not 0.0 <= v.coef <= 1.0:
            raise ln.error(f"{what} {v.coef:g} outside [0, 1]", tok)
        return v

    # modes

    def mode(self, ln: _Line, what: str = "mode", allow_measured: bool = False) -> int:
        if self.mode_count is None:
            raise ln.error("'modes' must be declared before any mode is referenced", ln.keyword)
        m, tok = ln.integer(what)
        if not 0 <= m < self.mode_count:
            raise ln.error(f"mode {m} out of range (circuit has {self.mode_count} modes)", tok)
        if not allow_measured and m in self.measured:
            raise ln.error(f"mode {m} was already measured on line {self.measured[m]}", tok)
        return m

    def detector_ref(self, ln: _Line) -> tuple[str, Detect | Homodyne]:
        tok = ln.next("detector id")
        if tok.text not in self.detectors:
            raise ln.error(f"undefined detector {tok.text!r}", tok)
        return tok.text, self.detectors[tok.text]

    def new_detector(self, ln: _Line) -> str:
        tok = ln.next("detector id")
        if tok.kind != "NAME":
            raise ln.error(f"detector id must be a name, got {tok.text!r}", tok)
        if tok.text in self.detectors:
            raise ln.error(f"duplicate detector id {tok.text!r}", tok)
        return tok.text

    # statements

    def statement(self, tokens: list[Token]) -> None:
        ln = _Line(tokens)
        kw = ln.keyword
        if kw.kind != "NAME":
            raise ln.error(f"expected a keyword, got {kw.text!r}", kw)
        handler = getattr(self, f"_kw_{kw.text}", None)
        if handler is None:
            raise ln.error(f"unknown keyword {kw.text!r}", kw)
        if kw.text != "modes" and self.mode_count is None and kw.text != "param":
            raise ln.error("the first instruction must be 'modes <n>'", kw)
        handler(ln)
        ln.done()

    def _kw_modes(self, ln: _Line) -> None:
        if self.mode_count is not None:
            raise ln.error("'modes' declared twice", ln.keyword)
        n, tok = ln.integer("mode count")
        if n < 1:
            raise ln.error("mode count must be positive", tok)
        self.mode_count = n

    def _kw_param(self, ln: _Line) -> None:
        name = ln.word("parameter name")
        if name == "pi" or name in dict(self.params):
            raise ln.error(f"parameter {name!r} already defined", ln.tokens[1])
        v, tok = self.value(ln, "parameter value")
        if not v.is_constant:
            raise ln.error("parameter defaults must be numeric", tok)
        self.params.append((name, v))

    def _kw_input(self, ln: _Line) -> None:
        m = self.mode(ln)
        if m in self.input_modes:
            raise ln.error(f"mode {m} already has an input", ln.tokens[1])
        if self.elements:
            raise ln.error("inputs must precede circuit elements", ln.keyword)
        kind = ln.word("input kind", ("coherent", "cat"))
        if kind == "coherent":
            re_, _ = self.value(ln, "amplitude")
            im = self.value(ln, "imaginary part")[0] if ln.peek() is not None else const(0.0)
            self.inputs.append(Input(m, kind, (re_, im)))
        else:
            a, _ = self.value(ln, "cat amplitude")
            parity = ln.word("cat parity", ("plus", "minus"))
            self.inputs.append(Input(m, kind, (a,), parity))
        self.input_modes.add(m)

    def _kw_bs(self, ln: _Line) -> None:
        a = self.mode(ln, "first mode")
        b_tok = ln.peek()
        b = self.mode(ln, "second mode")
        if a == b:
            raise ln.error(f"beam splitter needs two distinct modes, got identical modes {a}", b_tok)
        self.elements.append(BS(a, b, self.bounded(ln, "amplitude reflectivity")))

    def _kw_pm(self, ln: _Line) -> None:
        m = self.mode(ln)
        self.elements.append(PM(m, self.value(ln, "phase")[0]))

    def _kw_loss(self, ln: _Line) -> None:
        m = self.mode(ln)
        eta = self.bounded(ln, "eta")
        placement = ln.word("placement", ("input", "output")) if ln.peek() is not None else None
        self.elements.append(Loss(m, eta, placement))

    def _measure(self, ln: _Line, m: int) -> None:
        self.measured[m] = ln.keyword.line

    def _kw_detect(self, ln: _Line) -> None:
        m = self.mode(ln)
        name = self.new_detector(ln)
        model = ln.word("detector model", ("exact", "ideal")) if ln.peek() is not None else "exact"
        el = Detect(m, name, model)
        self.detectors[name] = el
        self.elements.append(el)
        self._measure(ln, m)

    def _kw_homodyne(self, ln: _Line) -> None:
        m = self.mode(ln)
        name = self.new_detector(ln)
        el = Homodyne(m, name)
        self.detectors[name] = el
        self.elements.append(el)
        self._measure(ln, m)

    def _kw_onclick(self, ln: _Line) -> None:
        name, det = self.detector_ref(ln)
        allowed = HOMODYNE_SYMBOLS if isinstance(det, Homodyne) else ONOFF_SYMBOLS
        sym_tok = ln.peek()
        symbol = ln.word("outcome symbol", HOMODYNE_SYMBOLS + ONOFF_SYMBOLS)
        if symbol not in allowed:
            raise ln.error(f"detector {name!r} has outcomes {allowed}, not {symbol!r}", sym_tok)
        ln.word("'pm'", ("pm",))
        m = self.mode(ln)
        self.elements.append(OnClick(name, symbol, m, self.value(ln, "phase")[0]))

    def _kw_fail_when(self, ln: _Line) -> None:
        names = []
        for i in range(2):
            tok = ln.peek()
            name, det = self.detector_ref(ln)
            if not isinstance(det, Detect):
                raise ln.error(f"fail_when needs on/off detectors; {name!r} is a homodyne", tok)
            ln.word("'click'", ("click",))
            if i == 0:
                ln.word("'and'", ("and",))
            names.append(name)
        if names[0] == names[1]:
            raise ln.error("fail_when needs two different detectors")
        self.elements.append(FailWhen(*names))

    def result(self) -> Circuit:
        if self.mode_count is None:
            raise ParseError("empty circuit: missing 'modes <n>'", 1, 1)
        return Circuit(self.mode_count, tuple(self.params), tuple(self.inputs), tuple(self.elements))


def parse_circuit(text: str) -> Circuit:
    p = _Parser()
    for tokens in tokenize(text):
        p.statement(tokens)
    return p.result()


# --- formatting --------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def _reflectivity(x: float) -> str:
    s = f"{x:.7f}"
    return s if float(s) == x else _num(x)


def _phase(x: float) -> str:
    if abs(x - math.pi) <= VALUE_TOL:
        return "pi"
    if abs(x + math.pi) <= VALUE_TOL:
        return "-pi"
    return _num(x)


def format_value(v: Value, style=_num) -> str:
    if not v.names:
        return style(v.coef)
    names = "*".join(v.names)
    if v.coef == 1.0:
        return names
    if v.coef == -1.0:
        return "-" + names
    return f"{_num(v.coef)}*{names}"


def _format_element(e: Element) -> str:
    if isinstance(e, BS):
        return f"bs {e.mode_a} {e.mode_b} {format_value(e.r, _reflectivity)}"
    if isinstance(e, PM):
        return f"pm {e.mode} {format_value(e.theta, _phase)}"
    if isinstance(e, Loss):
        tail = f" {e.placement}" if e.placement else ""
        return f"loss {e.mode} {format_value(e.eta)}{tail}"
    if isinstance(e, Detect):
        tail = f" {e.model}" if e.model != "exact" else ""
        return f"detect {e.mode} {e.detector}{tail}"
    if isinstance(e, Homodyne):
        return f"homodyne {e.mode} {e.detector}"
    if isinstance(e, OnClick):
        return f"onclick {e.detector} {e.symbol} pm {e.mode} {format_value(e.theta, _phase)}"
    if isinstance(e, FailWhen):
        return f"fail_when {e.detector_a} click and {e.detector_b} click"
    raise TypeError(f"unknown element {e!r}")


def format_circuit(c: Circuit) -> str:
    lines = [f"modes {c.mode_count}"]
    lines += [f"param {name} {format_value(v)}" for name, v in c.params]
    for inp in c.inputs:
        if inp.kind == "coherent":
            re_, im = inp.values
            extra = "" if im == const(0.0) else f" {format_value(im)}"
            lines.append(f"input {inp.mode} coherent {format_value(re_)}{extra}")
        else:
            lines.append(f"input {inp.mode} cat {format_value(inp.values[0])} {inp.parity}")
    lines += [_format_element(e) for e in c.elements]
    return "\n".join(lines) + "\n"
