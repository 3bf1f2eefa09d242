"""Generator expressions for eigenvalue sequences.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := number | '-' base | 'n' | 'k(n)' | 'm(n)' | '(' expr ')' | 'exp2(' expr ')'
            | 'if' pred 'then' expr 'else' expr
    pred   := 'n<=' int | 'even(n)' | 'odd(n)' | 'n in {' int-list '}'

A leading minus on a number makes a negative literal; on anything else it
means ``0 - base``. Evaluation is vectorised over numpy index arrays; scalar evaluation goes
through the same path so both agree bit for bit.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Union

import numpy as np


class GeneratorError(ValueError):
    """Base class for generator grammar and evaluation failures."""


class GeneratorSyntaxError(GeneratorError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class GeneratorSemanticError(GeneratorError):
    def __init__(self, message: str, position: int | None = None):
        suffix = "" if position is None else f" at position {position}"
        super().__init__(f"{message}{suffix}")
        self.position = position


class GeneratorEvalError(GeneratorError):
    """Raised when a generator yields a non-finite value at some index."""


# --- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Index:
    """The running index n."""


@dataclass(frozen=True)
class PairK:
    """First component k of n = 2^(k-1)(2m-1)."""


@dataclass(frozen=True)
class PairM:
    """Second component m of n = 2^(k-1)(2m-1)."""


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Exp2:
    arg: "Expr"


@dataclass(frozen=True)
class AtMost:
    bound: int


@dataclass(frozen=True)
class Even:
    pass


@dataclass(frozen=True)
class Odd:
    pass


@dataclass(frozen=True)
class InSet:
    members: tuple[int, ...]


Pred = Union[AtMost, Even, Odd, InSet]


@dataclass(frozen=True)
class Cond:
    pred: Pred
    then: "Expr"
    orelse: "Expr"


Expr = Union[Num, Index, PairK, PairM, BinOp, Exp2, Cond]


# --- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<sym><=|[-+*/^(){},]))"
)
_KEYWORDS = {"n", "k", "m", "exp2", "if", "then", "else", "even", "odd", "in"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise GeneratorSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = match.lastgroup
        start = match.start(kind)
        word = match.group(kind)
        if kind == "ident" and word not in _KEYWORDS:
            raise GeneratorSemanticError(f"unknown symbol {word!r}", start)
        toks.append(_Tok(kind, word, start))
        pos = match.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


# --- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.cur
        if tok.text != text or tok.kind == "eof":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise GeneratorSyntaxError(f"expected {text!r}, found {found}", tok.pos)
        return self.take()

    def integer(self) -> int:
        tok = self.cur
        if tok.kind != "num" or not tok.text.isdigit():
            raise GeneratorSyntaxError("expected integer", tok.pos)
        self.take()
        return int(tok.text)

    def parse(self) -> Expr:
        node = self.expr()
        if self.cur.kind != "eof":
            raise GeneratorSyntaxError(f"unexpected {self.cur.text!r}", self.cur.pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.cur.text in ("+", "-") and self.cur.kind == "sym":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.cur.text in ("*", "/") and self.cur.kind == "sym":
            op = self.take().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.base()
        if self.cur.text == "^" and self.cur.kind == "sym":
            self.take()
            node = BinOp("^", node, self.factor())
        return node

    def base(self) -> Expr:
        tok = self.cur
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text))
        if tok.kind == "sym" and tok.text == "-":
            self.take()
            inner = self.base()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return BinOp("-", Num(0.0), inner)
        if tok.kind == "sym" and tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            if tok.text == "n":
                self.take()
                return Index()
            if tok.text in ("k", "m"):
                self.take()
                self.expect("(")
                self.expect("n")
                self.expect(")")
                return PairK() if tok.text == "k" else PairM()
            if tok.text == "exp2":
                self.take()
                self.expect("(")
                node = self.expr()
                self.expect(")")
                return Exp2(node)
            if tok.text == "if":
                self.take()
                pred = self.pred()
                self.expect("then")
                then = self.expr()
                self.expect("else")
                return Cond(pred, then, self.expr())
            raise GeneratorSyntaxError(f"keyword {tok.text!r} not allowed here", tok.pos)
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise GeneratorSyntaxError(f"expected a value, found {found}", tok.pos)

    def pred(self) -> Pred:
        tok = self.cur
        if tok.text in ("even", "odd"):
            self.take()
            self.expect("(")
            self.expect("n")
            self.expect(")")
            return Even() if tok.text == "even" else Odd()
        if tok.text == "n":
            self.take()
            if self.cur.text == "<=":
                self.take()
                return AtMost(self.integer())
            if self.cur.text == "in":
                self.take()
                self.expect("{")
                members = [self.integer()]
                while self.cur.text == ",":
                    self.take()
                    members.append(self.integer())
                self.expect("}")
                return InSet(tuple(sorted(set(members))))
            raise GeneratorSyntaxError("expected '<=' or 'in' after 'n'", self.cur.pos)
        raise GeneratorSyntaxError("expected a predicate", tok.pos)


def parse_generator(text: str) -> Expr:
    """Parse a generator expression into its AST."""
    return _Parser(text).parse()


# --- printer -----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _fmt_num(value: float) -> str:
    out = format(Decimal(repr(value)), "f")
    if "." in out:
        out = out.rstrip("0").rstrip(".")
    return out


def _fmt_pred(pred: Pred) -> str:
    if isinstance(pred, AtMost):
        return f"n<={pred.bound}"
    if isinstance(pred, Even):
        return "even(n)"
    if isinstance(pred, Odd):
        return "odd(n)"
    return "n in {" + ",".join(str(v) for v in pred.members) + "}"


def to_text(node: Expr) -> str:
    """Pretty-print an AST; parsing the result gives back the same AST."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Index):
        return "n"
    if isinstance(node, PairK):
        return "k(n)"
    if isinstance(node, PairM):
        return "m(n)"
    if isinstance(node, Exp2):
        return f"exp2({to_text(node.arg)})"
    if isinstance(node, Cond):
        then = to_text(node.then)
        if isinstance(node.then, Cond):
            then = f"({then})"
        return f"if {_fmt_pred(node.pred)} then {then} else {to_text(node.orelse)}"
    prec = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if _needs_parens(node.left, prec, right_side=False, op=node.op):
        left = f"({left})"
    if _needs_parens(node.right, prec, right_side=True, op=node.op):
        right = f"({right})"
    sep = "^" if node.op == "^" else f" {node.op} "
    return f"{left}{sep}{right}"


def _needs_parens(child: Expr, prec: int, right_side: bool, op: str) -> bool:
    if isinstance(child, Cond):
        return True
    if isinstance(child, Num):
        return math.copysign(1.0, child.value) < 0
    if not isinstance(child, BinOp):
        return False
    child_prec = _PREC[child.op]
    if child_prec < prec:
        return True
    if child_prec > prec:
        return False
    # equal precedence: ^ is right-assoc, the rest left-assoc
    return not right_side if op == "^" else right_side


# --- analysis ----------------------------------------------------------------

def depends_on_index(node: Expr) -> bool:
    if isinstance(node, (Index, PairK, PairM)):
        return True
    if isinstance(node, Num):
        return False
    if isinstance(node, Exp2):
        return depends_on_index(node.arg)
    if isinstance(node, BinOp):
        return depends_on_index(node.left) or depends_on_index(node.right)
    return True


def specialize_tail(node: Expr, parity: int) -> Expr:
    """Resolve every conditional for large n of the given parity (0 even, 1 odd).

    Beyond all thresholds and finite sets only the parity predicates remain
    live, so the result is conditional-free. For odd n the pair index k(n) is 1.
    """
    if isinstance(node, Cond):
        pred = node.pred
        if isinstance(pred, Even):
            taken = parity == 0
        elif isinstance(pred, Odd):
            taken = parity == 1
        else:
            taken = False
        return specialize_tail(node.then if taken else node.orelse, parity)
    if isinstance(node, PairK) and parity == 1:
        return Num(1.0)
    if isinstance(node, BinOp):
        return BinOp(node.op, specialize_tail(node.left, parity), specialize_tail(node.right, parity))
    if isinstance(node, Exp2):
        return Exp2(specialize_tail(node.arg, parity))
    return node


def tail_constants(node: Expr) -> list[float]:
    """Constant values the generator takes on infinitely many indices."""
    found = []
    for parity in (0, 1):
        spec = specialize_tail(node, parity)
        if not depends_on_index(spec):
            value = float(evaluate_many(spec, np.array([1]))[0])
            if value not in found:
                found.append(value)
    return sorted(found)


# --- evaluation --------------------------------------------------------------

def pair_components(ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ns = np.asarray(ns, dtype=np.int64)
    low = ns & -ns
    k = np.zeros_like(ns)
    probe = low.copy()
    while np.any(probe > 1):
        step = probe > 1
        k[step] += 1
        probe[step] >>= 1
    m = (ns // low + 1) // 2
    return k + 1, m


def _pred_mask(pred: Pred, ns: np.ndarray) -> np.ndarray:
    if isinstance(pred, AtMost):
        return ns <= pred.bound
    if isinstance(pred, Even):
        return ns % 2 == 0
    if isinstance(pred, Odd):
        return ns % 2 == 1
    return np.isin(ns, np.array(pred.members, dtype=np.int64))


def _eval(node: Expr, ns: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(ns.shape, node.value, dtype=np.float64)
    if isinstance(node, Index):
        return ns.astype(np.float64)
    if isinstance(node, PairK):
        return pair_components(ns)[0].astype(np.float64)
    if isinstance(node, PairM):
        return pair_components(ns)[1].astype(np.float64)
    if isinstance(node, Exp2):
        return np.power(2.0, _eval(node.arg, ns))
    if isinstance(node, Cond):
        out = np.empty(ns.shape, dtype=np.float64)
        mask = _pred_mask(node.pred, ns)
        if mask.any():
            out[mask] = _eval(node.then, ns[mask])
        if (~mask).any():
            out[~mask] = _eval(node.orelse, ns[~mask])
        return out
    left, right = _eval(node.left, ns), _eval(node.right, ns)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(right == 0):
            bad = int(ns[np.argmax(right == 0)])
            raise GeneratorEvalError(f"division by zero at n={bad}")
        return left / right
    return np.power(left, right)


def evaluate_many(node: Expr, ns) -> np.ndarray:
    """Evaluate at every index in ``ns``; raises on any non-finite value."""
    ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    if ns.size and ns.min() < 1:
        raise GeneratorEvalError("indices start at 1")
    with np.errstate(all="ignore"):
        out = _eval(node, ns)
    bad = ~np.isfinite(out)
    if bad.any():
        raise GeneratorEvalError(f"non-finite value at n={int(ns[np.argmax(bad)])}")
    return out


def evaluate(node: Expr, n: int) -> float:
    return float(evaluate_many(node, np.array([n]))[0])
