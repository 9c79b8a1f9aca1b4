"""Modal formulas over the core connectives bot, ->, <> with derived sugar.

Every formula is a tree of four node kinds (:class:`Var`, :class:`Bot`,
:class:`Imp`, :class:`Dia`).  Negation, conjunction, disjunction, box and the
bounded closure modalities are expanded at construction time, so equality is
plain structural equality of the core tree.

Concrete syntax::

    formula  := imp
    imp      := or ( "->" imp )?          right associative
    or       := and ( "|" and )*          left associative
    and      := unary ( "&" unary )*      left associative
    unary    := ("~" | "<>" | "dia" | "[]" | "box") unary | atom
    atom     := VAR | '"' NAME '"' | "bot" | "top" | "(" formula ")"

with ``VAR`` matching ``p[0-9]+``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Iterator, Union

__all__ = [
    "Formula", "Var", "Bot", "Imp", "Dia", "BOT", "TOP", "P", "Q", "R",
    "neg", "conj", "disj", "box", "dia_k", "box_k", "dia_plus", "box_plus",
    "big_conj", "big_disj", "sigma",
    "FormulaSyntaxError", "parse", "render",
    "FormulaAnalysis", "analyze", "depth", "occ_depths", "min_depth",
    "variables", "subformulas", "psi_set", "substitute",
    "positive_view", "is_strictly_positive",
    "SchemeError", "SchemeId", "SCHEME_NAMES", "scheme",
    "to_json", "from_json", "formula_sort_key",
]


# --------------------------------------------------------------------------
# syntax tree


class Formula:
    """Base class of the four core node kinds."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


def _cached_hash(self, key) -> None:
    object.__setattr__(self, "_hash", hash(key))


@dataclass(frozen=True, slots=True, eq=True, repr=False)
class Var(Formula):
    name: str
    _hash: int = field(init=False, compare=False, repr=False, default=0)

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValueError(f"invalid variable name {self.name!r}")
        _cached_hash(self, ("var", self.name))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __reduce__(self):
        return (Var, (self.name,))


@dataclass(frozen=True, slots=True, eq=True, repr=False)
class Bot(Formula):
    _hash: int = field(init=False, compare=False, repr=False, default=0)

    def __post_init__(self):
        _cached_hash(self, ("bot",))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Bot()"

    def __reduce__(self):
        return (Bot, ())


@dataclass(frozen=True, slots=True, eq=True, repr=False)
class Imp(Formula):
    left: Formula
    right: Formula
    _hash: int = field(init=False, compare=False, repr=False, default=0)

    def __post_init__(self):
        _cached_hash(self, ("imp", self.left._hash, self.right._hash))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Imp({self.left!r}, {self.right!r})"

    def __reduce__(self):
        return (Imp, (self.left, self.right))


@dataclass(frozen=True, slots=True, eq=True, repr=False)
class Dia(Formula):
    inner: Formula
    _hash: int = field(init=False, compare=False, repr=False, default=0)

    def __post_init__(self):
        _cached_hash(self, ("dia", self.inner._hash))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Dia({self.inner!r})"

    def __reduce__(self):
        return (Dia, (self.inner,))


BOT = Bot()
TOP = Imp(BOT, BOT)
# the scheme variables p, q, r
P = Var("p0")
Q = Var("p1")
R = Var("p2")


def neg(f: Formula) -> Formula:
    return Imp(f, BOT)


def conj(a: Formula, b: Formula) -> Formula:
    """``a & b`` as ``~(a -> ~b)``."""
    return Imp(Imp(a, Imp(b, BOT)), BOT)


def disj(a: Formula, b: Formula) -> Formula:
    """``a | b`` as ``~a -> b``."""
    return Imp(Imp(a, BOT), b)


def box(f: Formula) -> Formula:
    return Imp(Dia(Imp(f, BOT)), BOT)


def dia_k(f: Formula, k: int) -> Formula:
    if k < 0:
        raise ValueError("k must be non-negative")
    for _ in range(k):
        f = Dia(f)
    return f


def box_k(f: Formula, k: int) -> Formula:
    if k < 0:
        raise ValueError("k must be non-negative")
    for _ in range(k):
        f = box(f)
    return f


def big_conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return TOP
    return reduce(conj, parts)


def big_disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return BOT
    return reduce(disj, parts)


def dia_plus(f: Formula, n: int) -> Formula:
    """``<>f | <><>f | ... | <>^n f``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return big_disj(dia_k(f, k) for k in range(1, n + 1))


def box_plus(f: Formula, n: int) -> Formula:
    """``[]f & [][]f & ... & []^n f``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return big_conj(box_k(f, k) for k in range(1, n + 1))


def sigma(n: int, p: Formula = P) -> Formula:
    """sigma_1 = p, sigma_n = p & <>sigma_{n-1}."""
    if n < 1:
        raise ValueError("sigma is defined for n >= 1")
    f = p
    for _ in range(n - 1):
        f = conj(p, Dia(f))
    return f


# --------------------------------------------------------------------------
# sugar recognition (shared by the printer and the positivity check)


def _match_top(f):
    return type(f) is Imp and type(f.left) is Bot and type(f.right) is Bot


def _match_and(f):
    # Imp(Imp(a, Imp(b, Bot)), Bot)
    if type(f) is Imp and type(f.right) is Bot and type(f.left) is Imp:
        inner = f.left.right
        if type(inner) is Imp and type(inner.right) is Bot:
            return f.left.left, inner.left
    return None


def _match_box(f):
    # Imp(Dia(Imp(a, Bot)), Bot)
    if type(f) is Imp and type(f.right) is Bot and type(f.left) is Dia:
        inner = f.left.inner
        # ~<>(a & b) and ~<>top print better unfolded
        if type(inner) is Imp and type(inner.right) is Bot and not (
            _match_and(inner) or _match_top(inner)
        ):
            return inner.left
    return None


def _match_not(f):
    if type(f) is Imp and type(f.right) is Bot:
        return f.left
    return None


def _match_or(f):
    if type(f) is Imp and type(f.left) is Imp and type(f.left.right) is Bot:
        # (a & b) -> c reads better than ~(a -> ~b) | c
        if _match_and(f.left) or _match_top(f.left):
            return None
        return f.left.left, f.right
    return None


# --------------------------------------------------------------------------
# printer

_VAR_RE = re.compile(r"p[0-9]+\Z")
_PREC_IMP, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4


def _var_text(name: str) -> str:
    if _VAR_RE.match(name):
        return name
    if '"' in name or "\\" in name:
        raise ValueError(f"variable name {name!r} cannot be printed")
    return f'"{name}"'


def render(f: Formula, sugar: bool = True) -> str:
    """Print ``f`` with minimal parentheses.

    With ``sugar=False`` only the core connectives are printed.
    """
    text, _ = _render(f, sugar)
    return text


def _wrap(part, need):
    text, prec = part
    return f"({text})" if prec < need else text


def _render(f, sugar):
    kind = type(f)
    if kind is Var:
        return _var_text(f.name), 5
    if kind is Bot:
        return "bot", 5
    if kind is Dia:
        return "<>" + _wrap(_render(f.inner, sugar), _PREC_UNARY), _PREC_UNARY
    if sugar:
        if _match_top(f):
            return "top", 5
        m = _match_box(f)
        if m is not None:
            return "[]" + _wrap(_render(m, sugar), _PREC_UNARY), _PREC_UNARY
        m = _match_and(f)
        if m is not None:
            left = _wrap(_render(m[0], sugar), _PREC_AND)
            right = _wrap(_render(m[1], sugar), _PREC_AND + 1)
            return f"{left} & {right}", _PREC_AND
        m = _match_not(f)
        if m is not None:
            return "~" + _wrap(_render(m, sugar), _PREC_UNARY), _PREC_UNARY
        m = _match_or(f)
        if m is not None:
            left = _wrap(_render(m[0], sugar), _PREC_OR)
            right = _wrap(_render(m[1], sugar), _PREC_OR + 1)
            return f"{left} | {right}", _PREC_OR
    left = _wrap(_render(f.left, sugar), _PREC_IMP + 1)
    right = _wrap(_render(f.right, sugar), _PREC_IMP)
    return f"{left} -> {right}", _PREC_IMP


# --------------------------------------------------------------------------
# parser


class FormulaSyntaxError(ValueError):
    """Raised by :func:`parse`; carries the byte offset and expected tokens."""

    def __init__(self, text: str, offset: int, expected: Iterable[str]):
        self.text = text
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        found = text[offset:offset + 8] or "end of input"
        super().__init__(
            f"syntax error at offset {offset}: expected one of "
            f"{', '.join(self.expected)}; found {found!r}"
        )


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<dia><>)
  | (?P<box>\[\])
  | (?P<sym>[&|~()])
  | (?P<quoted>"[^"\\]*")
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)
_KEYWORDS = {"bot", "top", "dia", "box"}
_ATOM_START = ("VAR", '"NAME"', "bot", "top", "(")
_UNARY_START = ("~", "<>", "dia", "[]", "box")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    raw = text.encode("utf-8")
    if len(raw) != len(text):
        # offsets are reported in bytes; keep the scanner on ASCII
        bad = next(i for i, ch in enumerate(text) if ord(ch) > 127)
        raise FormulaSyntaxError(text, len(text[:bad].encode("utf-8")), _ATOM_START + _UNARY_START)
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(text, pos, _ATOM_START + _UNARY_START + ("->", "&", "|", ")"))
        kind = m.lastgroup
        value = m.group()
        if kind == "word":
            if value in _KEYWORDS:
                kind = value
            elif _VAR_RE.match(value):
                kind = "var"
            else:
                raise FormulaSyntaxError(text, pos, _ATOM_START + _UNARY_START)
        elif kind == "quoted":
            value = value[1:-1]
            if not value:
                raise FormulaSyntaxError(text, pos + 1, ("NAME",))
        elif kind in ("sym", "arrow", "dia", "box"):
            kind = value
        if kind != "ws":
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        raise FormulaSyntaxError(self.text, self.tokens[self.i][2], expected)

    def formula(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Imp(left, self.formula())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = disj(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = conj(f, self.unary())
        return f

    def unary(self):
        kind = self.peek()
        if kind == "~":
            self.take()
            return neg(self.unary())
        if kind in ("<>", "dia"):
            self.take()
            return Dia(self.unary())
        if kind in ("[]", "box"):
            self.take()
            return box(self.unary())
        return self.atom()

    def atom(self):
        kind, value, _ = self.tokens[self.i]
        if kind in ("var", "quoted"):
            self.take()
            return Var(value)
        if kind == "bot":
            self.take()
            return BOT
        if kind == "top":
            self.take()
            return TOP
        if kind == "(":
            self.take()
            f = self.formula()
            if self.peek() != ")":
                self.fail((")", "->", "&", "|"))
            self.take()
            return f
        self.fail(_ATOM_START + _UNARY_START)


def parse(text: str) -> Formula:
    """Parse the concrete syntax into a core tree (sugar expanded)."""
    parser = _Parser(text)
    f = parser.formula()
    if parser.peek() != "eof":
        parser.fail(("end of input", "->", "&", "|"))
    return f


# --------------------------------------------------------------------------
# JSON form


def to_json(f: Formula) -> dict:
    kind = type(f)
    if kind is Var:
        return {"op": "var", "name": f.name}
    if kind is Bot:
        return {"op": "bot"}
    if kind is Imp:
        return {"op": "imp", "left": to_json(f.left), "right": to_json(f.right)}
    return {"op": "dia", "arg": to_json(f.inner)}


def from_json(data: Union[dict, str]) -> Formula:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        op = data["op"]
        if op == "var":
            return Var(data["name"])
        if op == "bot":
            return BOT
        if op == "imp":
            return Imp(from_json(data["left"]), from_json(data["right"]))
        if op == "dia":
            return Dia(from_json(data["arg"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed formula JSON: {data!r}") from exc
    raise ValueError(f"unknown formula op {op!r}")


# --------------------------------------------------------------------------
# metrics


def _iter_nodes(f: Formula) -> Iterator[Formula]:
    stack = [f]
    seen = set()
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        yield g
        if type(g) is Imp:
            stack.append(g.right)
            stack.append(g.left)
        elif type(g) is Dia:
            stack.append(g.inner)


def subformulas(f: Formula) -> frozenset:
    return frozenset(_iter_nodes(f))


def variables(f: Formula) -> frozenset:
    return frozenset(g.name for g in _iter_nodes(f) if type(g) is Var)


def psi_set(f: Formula) -> frozenset:
    """All psi such that <>psi is a subformula of f."""
    return frozenset(g.inner for g in _iter_nodes(f) if type(g) is Dia)


def depth(f: Formula) -> int:
    memo = {}

    def d(g):
        if g in memo:
            return memo[g]
        kind = type(g)
        if kind is Imp:
            r = max(d(g.left), d(g.right))
        elif kind is Dia:
            r = d(g.inner) + 1
        else:
            r = 0
        memo[g] = r
        return r

    return d(f)


def occ_depths(f: Formula) -> dict[str, frozenset]:
    """Map each variable p to D_p(f), the modal depths of its occurrences."""
    memo = {}

    def go(g):
        if g in memo:
            return memo[g]
        kind = type(g)
        if kind is Var:
            r = {g.name: frozenset({0})}
        elif kind is Bot:
            r = {}
        elif kind is Imp:
            a, b = go(g.left), go(g.right)
            r = dict(a)
            for k, v in b.items():
                r[k] = r.get(k, frozenset()) | v
        else:
            r = {k: frozenset(x + 1 for x in v) for k, v in go(g.inner).items()}
        memo[g] = r
        return r

    return go(f)


def min_depth(f: Formula, p: str) -> Union[int, float]:
    """min(D_p(f) U {inf})."""
    ds = occ_depths(f).get(p, frozenset())
    return min(ds) if ds else math.inf


def positive_view(f: Formula):
    """Fold ``f`` into the strictly positive fragment, or return None.

    The result is a nested tuple over ``("top",)``, ``("var", name)``,
    ``("and", a, b)`` and ``("dia", a)``.  Double negations are folded away
    before deciding.
    """
    if type(f) is Var:
        return ("var", f.name)
    if type(f) is Dia:
        inner = positive_view(f.inner)
        return None if inner is None else ("dia", inner)
    if _match_top(f):
        return ("top",)
    m = _match_and(f)
    if m is not None:
        a, b = positive_view(m[0]), positive_view(m[1])
        if a is None or b is None:
            return None
        return ("and", a, b)
    m = _match_not(f)
    if m is not None:
        inner = _match_not(m)
        if inner is not None:
            return positive_view(inner)
    return None


def _positive_vars(view) -> set:
    if view[0] == "var":
        return {view[1]}
    if view[0] == "top":
        return set()
    return set().union(*(_positive_vars(v) for v in view[1:]))


def is_strictly_positive(f: Formula, p: str = "p0") -> bool:
    """True when f belongs to the strictly positive fragment over p alone."""
    view = positive_view(f)
    return view is not None and _positive_vars(view) <= {p}


@dataclass(frozen=True)
class FormulaAnalysis:
    depth: int
    occ_depths: dict
    min_depth: dict
    vars: frozenset
    subformulas: frozenset
    psi_set: frozenset
    # variables p with f in the strictly positive fragment over p
    strictly_positive_in: frozenset
    # built from variables, top, & and <> only (no variable restriction)
    positive_shape: bool

    def is_strictly_positive_in(self, p: str) -> bool:
        return self.positive_shape and self.vars <= {p}


def analyze(f: Formula) -> FormulaAnalysis:
    occ = occ_depths(f)
    vs = variables(f)
    view = positive_view(f)
    shape = view is not None
    sp = frozenset(vs) if shape and len(vs) == 1 else frozenset()
    return FormulaAnalysis(
        depth=depth(f),
        occ_depths=occ,
        min_depth={v: min(occ[v]) for v in vs},
        vars=vs,
        subformulas=subformulas(f),
        psi_set=psi_set(f),
        strictly_positive_in=sp,
        positive_shape=shape,
    )


def substitute(a: Formula, p: str, f: Formula) -> Formula:
    """Replace every occurrence of the variable p in a by f."""
    memo = {}

    def go(g):
        if g in memo:
            return memo[g]
        kind = type(g)
        if kind is Var:
            r = f if g.name == p else g
        elif kind is Bot:
            r = g
        elif kind is Imp:
            left, right = go(g.left), go(g.right)
            r = g if (left is g.left and right is g.right) else Imp(left, right)
        else:
            inner = go(g.inner)
            r = g if inner is g.inner else Dia(inner)
        memo[g] = r
        return r

    return go(a)


def formula_sort_key(f: Formula):
    """Deterministic total order: smaller trees first, then by core text."""
    return (len(subformulas(f)), render(f, sugar=False))


# --------------------------------------------------------------------------
# axiom schemes


class SchemeError(ValueError):
    pass


SCHEME_NAMES = (
    "Trans", "wTrans", "Sigma", "DiaPlus", "BoxPlus", "A4", "Aw4", "ALob",
    "ALobPlus", "AT_plus", "AB_plus", "A3_plus", "GLn", "GL2variant", "L2",
)
_NEEDS_N = {"Trans", "wTrans", "Sigma", "DiaPlus", "BoxPlus", "ALobPlus",
            "AT_plus", "AB_plus", "A3_plus", "GLn"}


@dataclass(frozen=True)
class SchemeId:
    """A named axiom scheme with its parameters.

    ``gamma`` is the antecedent of A4/Aw4; ``beta`` is the formula under the
    outer diamond of ALob (the axiom is ``<>p -> <>(p & ~beta)``).
    """

    name: str
    n: int | None = None
    gamma: Formula | None = None
    beta: Formula | None = None

    def __post_init__(self):
        if self.name not in SCHEME_NAMES:
            raise SchemeError(f"unknown scheme {self.name!r}")
        if self.name in _NEEDS_N:
            if not isinstance(self.n, int) or self.n < 1:
                raise SchemeError(f"{self.name} needs an integer n >= 1")
            if self.name == "GLn" and self.n < 2:
                raise SchemeError("GLn needs n >= 2")
        if self.name in ("A4", "Aw4"):
            _check_positive(self.gamma, "gamma", 2)
        if self.name == "ALob":
            _check_positive(self.beta, "beta", 1)

    def describe(self) -> str:
        parts = [self.name]
        if self.n is not None:
            parts.append(f"n={self.n}")
        if self.gamma is not None:
            parts.append(f"gamma={render(self.gamma)}")
        if self.beta is not None:
            parts.append(f"beta={render(self.beta)}")
        return " ".join(parts)

    def to_json(self) -> dict:
        out = {"scheme": self.name}
        if self.n is not None:
            out["n"] = self.n
        if self.gamma is not None:
            out["gamma"] = render(self.gamma)
        if self.beta is not None:
            out["beta"] = render(self.beta)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SchemeId":
        def formula(key):
            value = data.get(key)
            if value is None:
                return None
            return parse(value) if isinstance(value, str) else from_json(value)

        return cls(data["scheme"], data.get("n"), formula("gamma"), formula("beta"))


def _check_positive(f, label, least_depth):
    if f is None:
        raise SchemeError(f"{label} is required")
    if not is_strictly_positive(f, P.name):
        raise SchemeError(f"{label} = {render(f)} is not strictly positive in p0")
    low = min_depth(f, P.name)
    if low == math.inf:
        raise SchemeError(f"{label} = {render(f)} does not contain p0")
    if low < least_depth:
        raise SchemeError(
            f"{label} = {render(f)} has an occurrence of p0 at depth {low} < {least_depth}"
        )


def scheme(sid: SchemeId) -> Formula:
    """Instantiate a scheme over p = p0 (and q = p1, r = p2)."""
    name, n = sid.name, sid.n
    if name == "Trans":
        return Imp(dia_k(P, n + 1), big_disj(dia_k(P, k) for k in range(1, n + 1)))
    if name == "wTrans":
        rhs = [dia_k(P, k) for k in range(1, n + 1)] + [P]
        return Imp(dia_k(P, n + 1), big_disj(rhs))
    if name == "Sigma":
        return sigma(n)
    if name == "DiaPlus":
        return dia_plus(P, n)
    if name == "BoxPlus":
        return box_plus(P, n)
    if name == "A4":
        return Imp(sid.gamma, Dia(P))
    if name == "Aw4":
        return Imp(sid.gamma, disj(Dia(P), P))
    if name == "ALob":
        return _lob(sid.beta)
    if name == "GLn":
        return _lob(dia_k(P, n - 1))
    if name == "GL2variant":
        return _lob(Dia(conj(P, Dia(P))))
    if name == "ALobPlus":
        return Imp(dia_plus(P, n), dia_plus(conj(P, neg(dia_plus(P, n))), n))
    if name == "AT_plus":
        return Imp(P, dia_plus(P, n))
    if name == "AB_plus":
        return Imp(P, box_plus(dia_plus(P, n), n))
    if name == "A3_plus":
        dp, dq = dia_plus(P, n), dia_plus(Q, n)
        return Imp(
            conj(dp, dq),
            big_disj([
                dia_plus(conj(P, dq), n),
                dia_plus(conj(Q, dp), n),
                dia_plus(conj(P, Q), n),
            ]),
        )
    # L2
    return Imp(
        Dia(conj(P, Dia(conj(Q, Dia(R))))),
        big_disj([Dia(conj(P, Dia(R))), Dia(Q), Dia(R)]),
    )


def _lob(beta: Formula) -> Formula:
    return Imp(Dia(P), Dia(conj(P, neg(beta))))
