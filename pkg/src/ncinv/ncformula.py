"""Non-commutative rational formulas: parsing, printing, evaluation and RIT.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := ['-'] factor ('*' factor)*
    factor := atom ('^-1')*
    atom   := integer | 't' positive-integer | '(' expr ')'

``a - b`` parses to ``Add(a, Neg(b))`` and a leading minus to ``Neg``.  For
:func:`size`, binary subtraction counts as a single gate: a ``Neg`` that is
the right operand of an ``Add`` is not counted on its own.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

from .exactalg import ExactAlgError, ExactMatrix, FieldSpec, ShapeMismatch, inverse, substream
from .pencil import DEFAULT_TRIALS

ZERO_WHP = "ZeroWhp"
NONZERO = "NonZero"
UNDEFINED_WHP = "UndefinedWhp"


class FormulaSyntaxError(ExactAlgError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class VariableIndexError(FormulaSyntaxError):
    pass


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    child: "Formula"


@dataclass(frozen=True)
class Add:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Mul:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Inv:
    child: "Formula"


Formula = Union[Const, Var, Neg, Add, Mul, Inv]

_TOKEN = re.compile(r"\s*(?:(\^-1)|(t\d+)|(\d+)|([-+*()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[bad]!r}", bad)
        start = m.start(m.lastindex)
        tok = m.group(m.lastindex)
        if m.lastindex == 2:
            idx = int(tok[1:])
            if idx < 1:
                raise VariableIndexError("variable indices start at 1", start)
            tokens.append(("var", idx, start))
        elif m.lastindex == 3:
            tokens.append(("int", int(tok), start))
        else:
            tokens.append((tok, tok, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise FormulaSyntaxError(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            node = Add(node, rhs if op == "+" else Neg(rhs))
        return node

    def term(self):
        neg = False
        if self.peek() == "-":
            self.take()
            neg = True
        node = self.factor()
        while self.peek() == "*":
            self.take()
            node = Mul(node, self.factor())
        return Neg(node) if neg else node

    def factor(self):
        node = self.atom()
        while self.peek() == "^-1":
            self.take()
            node = Inv(node)
        return node

    def atom(self):
        kind, val, pos = self.tokens[self.i]
        if kind == "int":
            self.take()
            return Const(val)
        if kind == "var":
            self.take()
            return Var(val)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise FormulaSyntaxError(f"expected a constant, variable or '(', found {what}", pos)


def parse(text: str) -> Formula:
    p = _Parser(text)
    node = p.expr()
    p.take("end")
    return node


# printing ------------------------------------------------------------------


def _p_expr(f) -> str:
    if isinstance(f, Add):
        if isinstance(f.right, Neg):
            return f"{_p_expr(f.left)} - {_p_term(f.right.child)}"
        return f"{_p_expr(f.left)} + {_p_term(f.right)}"
    return _p_term(f)


def _p_term(f) -> str:
    if isinstance(f, Neg):
        return "-" + _p_chain(f.child)
    return _p_chain(f)


def _p_chain(f) -> str:
    if isinstance(f, Mul):
        return f"{_p_chain(f.left)}*{_p_factor(f.right)}"
    return _p_factor(f)


def _p_factor(f) -> str:
    if isinstance(f, Var):
        return f"t{f.index}"
    if isinstance(f, Const) and f.value >= 0:
        return str(f.value)
    if isinstance(f, Inv):
        return _p_factor(f.child) + "^-1"
    return f"({_p_expr(f)})"


def to_text(f: Formula) -> str:
    return _p_expr(f)


# structure -----------------------------------------------------------------


def size(f: Formula) -> int:
    if isinstance(f, (Const, Var)):
        return 1
    if isinstance(f, (Neg, Inv)):
        return 1 + size(f.child)
    if isinstance(f, Add) and isinstance(f.right, Neg):
        return 1 + size(f.left) + size(f.right.child)
    return 1 + size(f.left) + size(f.right)


def num_vars(f: Formula) -> int:
    if isinstance(f, Var):
        return f.index
    if isinstance(f, Const):
        return 0
    if isinstance(f, (Neg, Inv)):
        return num_vars(f.child)
    return max(num_vars(f.left), num_vars(f.right))


def evaluation_dimension(f: Formula) -> int:
    """2 * (size + 1) - 1: enough for f and, if f is nonzero, for f^-1 as well."""
    return 2 * (size(f) + 1) - 1


# evaluation ----------------------------------------------------------------


class _Undefined(Exception):
    pass


def _eval(f, tup, I):
    if isinstance(f, Var):
        return tup[f.index - 1]
    if isinstance(f, Const):
        return I.scale(f.value)
    if isinstance(f, Neg):
        return -_eval(f.child, tup, I)
    if isinstance(f, Add):
        return _eval(f.left, tup, I) + _eval(f.right, tup, I)
    if isinstance(f, Mul):
        return _eval(f.left, tup, I) @ _eval(f.right, tup, I)
    try:
        return inverse(_eval(f.child, tup, I))
    except ExactAlgError:
        raise _Undefined from None


def evaluate(f: Formula, tuple_: Sequence[ExactMatrix], dim: int | None = None, field: FieldSpec | None = None):
    """Value of f at the tuple, or None if some inverse gate meets a singular input.

    ``dim``/``field`` are only needed for a tuple-free formula.
    """
    tuple_ = list(tuple_)
    if len(tuple_) < num_vars(f):
        raise ShapeMismatch(f"formula uses {num_vars(f)} variables, got {len(tuple_)} matrices")
    if tuple_:
        dim = tuple_[0].rows
        field = tuple_[0].field
        if any(T.shape != (dim, dim) or T.field != field for T in tuple_):
            raise ShapeMismatch("tuple matrices must all be p x p over one field")
    elif dim is None:
        raise ShapeMismatch("dimension unknown for a formula without variables")
    field = field or FieldSpec()
    try:
        return _eval(f, tuple_, ExactMatrix.identity(field, dim))
    except _Undefined:
        return None


def degree_bound(f: Formula, p: int) -> int:
    """Total degree of the polynomials whose nonvanishing a successful trial needs.

    Entries at each gate are N/D with N, D polynomials in the tuple entries;
    the bound sums deg det(N) over inverse gates plus deg N at the output.
    """
    total = 0

    def walk(g) -> tuple[int, int]:
        nonlocal total
        if isinstance(g, Var):
            return 1, 0
        if isinstance(g, Const):
            return 0, 0
        if isinstance(g, Neg):
            return walk(g.child)
        if isinstance(g, Inv):
            num, den = walk(g.child)
            total += p * num
            return den + (p - 1) * num, p * num
        (n1, d1), (n2, d2) = walk(g.left), walk(g.right)
        if isinstance(g, Add):
            return max(n1 + d2, n2 + d1), d1 + d2
        return n1 + n2, d1 + d2

    num, _ = walk(f)
    return total + num


@dataclass(frozen=True)
class RitVerdict:
    status: str
    dimension: int
    trials: int
    defined_trials: int
    witness_trial: int | None = None
    tuple: tuple[ExactMatrix, ...] | None = None
    value: ExactMatrix | None = None
    failure_bound: float = 0.0

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "dimension": self.dimension,
            "trials": self.trials,
            "defined_trials": self.defined_trials,
            "failure_bound": self.failure_bound,
        }
        if self.status == NONZERO:
            out["witness"] = {
                "trial": self.witness_trial,
                "tuple": [T.to_json() for T in self.tuple],
                "value": self.value.to_json(),
            }
        return out


def rit(f: Formula, trials: int = DEFAULT_TRIALS, seed: int = 0, field: FieldSpec | None = None, dim: int | None = None) -> RitVerdict:
    """Randomized rational identity test at dimension 2*(size+1) - 1."""
    field = field or FieldSpec()
    p = evaluation_dimension(f) if dim is None else dim
    m = num_vars(f)
    deg = degree_bound(f, p)
    per_trial = min(1.0, deg / field.sample_size)
    defined = 0
    for t in range(trials):
        rng = substream(seed, "rit", p, t)
        T = tuple(ExactMatrix.random(field, p, p, rng) for _ in range(m))
        val = evaluate(f, T, p, field)
        if val is None:
            continue
        defined += 1
        if not val.is_zero():
            return RitVerdict(NONZERO, p, trials, defined, t, T, val, 0.0)
    status = ZERO_WHP if defined else UNDEFINED_WHP
    return RitVerdict(status, p, trials, defined, failure_bound=per_trial**trials)
