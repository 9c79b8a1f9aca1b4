"""Frame validity of formulas and axiom schemes.

Two independent routes:

* :func:`valid_bruteforce` sweeps every valuation of the formula's variables.
  The sweep is bit-sliced: for each world it keeps one big integer whose bit
  ``i`` says whether the formula holds there under valuation number ``i``, so
  one pass over the formula tree evaluates all valuations at once.
* :func:`valid_axiom` uses first-order frame conditions and, for the strictly
  positive antecedents of A4/Aw4/ALob, the minimal valuations of ``p`` that
  make the antecedent true (the antecedent is monotone in ``p``, so checking
  the minimal ones suffices).

The two must agree wherever the brute-force budget allows both.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .formula import (
    BOT, P, Bot, Dia, Formula, Imp, SchemeError, SchemeId, Var, conj, depth,
    dia_k, is_strictly_positive, parse, positive_view, render, scheme, sigma,
    variables,
)
from .kripke import (
    Frame, closure, compose, frame_class_checks, iter_bits, power, union_powers,
)

__all__ = [
    "BudgetExceeded", "DEFAULT_LIMIT", "valid_bruteforce", "refute_bruteforce",
    "MinSets", "min_p_sets", "valid_axiom", "LogicSpec", "CATALOG", "logic",
    "catalog_names", "is_lambda_frame", "failing_axioms",
]

DEFAULT_LIMIT = 24
DEFAULT_NODE_BUDGET = 200_000


class BudgetExceeded(RuntimeError):
    """An exhaustive check would exceed its configured budget."""


# --------------------------------------------------------------------------
# brute force


def _stripe(position: int, nvals: int) -> int:
    """Bit i set iff bit ``position`` of i is set, for 0 <= i < nvals."""
    half = 1 << position
    x = ((1 << half) - 1) << half
    period = half << 1
    while period < nvals:
        x |= x << period
        period <<= 1
    return x & ((1 << nvals) - 1)


def _sweep(frame: Frame, phi: Formula, names: Sequence[str]) -> list[int]:
    size = frame.size
    nvals = 1 << (size * len(names))
    full = (1 << nvals) - 1
    slot = {name: i for i, name in enumerate(names)}
    succ = frame.succ
    memo = {}

    def go(g):
        hit = memo.get(g)
        if hit is not None:
            return hit
        kind = type(g)
        if kind is Var:
            i = slot[g.name]
            r = [_stripe(i * size + u, nvals) for u in range(size)]
        elif kind is Bot:
            r = [0] * size
        elif kind is Imp:
            a, b = go(g.left), go(g.right)
            r = [(x ^ full) | y for x, y in zip(a, b)]
        elif kind is Dia:
            a = go(g.inner)
            r = []
            for w in range(size):
                acc = 0
                for u in iter_bits(succ[w]):
                    acc |= a[u]
                r.append(acc)
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = r
        return r

    return go(phi)


def _check_budget(frame: Frame, names, limit: int) -> None:
    if frame.size * len(names) > limit:
        raise BudgetExceeded(
            f"{frame.size} worlds x {len(names)} variables exceeds the "
            f"brute-force limit {limit}"
        )


def valid_bruteforce(frame: Frame, phi: Formula, limit: int = DEFAULT_LIMIT) -> bool:
    """True iff ``phi`` holds at every world under every valuation."""
    names = sorted(variables(phi))
    _check_budget(frame, names, limit)
    full = (1 << (1 << (frame.size * len(names)))) - 1
    return all(t == full for t in _sweep(frame, phi, names))


def refute_bruteforce(frame: Frame, phi: Formula, limit: int = DEFAULT_LIMIT):
    """Least refuting (valuation, world), or None if ``phi`` is valid.

    Valuations are ordered by their index: bit ``i*size + u`` of the index
    says world ``u`` is in the extension of the i-th variable (sorted names).
    """
    names = sorted(variables(phi))
    _check_budget(frame, names, limit)
    size = frame.size
    full = (1 << (1 << (size * len(names)))) - 1
    truth = _sweep(frame, phi, names)
    bad = 0
    for t in truth:
        bad |= t ^ full
    if not bad:
        return None
    index = (bad & -bad).bit_length() - 1
    world = next(w for w in range(size) if not truth[w] >> index & 1)
    row = (1 << size) - 1
    valuation = {name: (index >> (i * size)) & row for i, name in enumerate(names)}
    return valuation, world


# --------------------------------------------------------------------------
# minimal valuations


@dataclass(frozen=True)
class MinSets:
    """The subset-minimal extensions of p making the formula true at a world."""

    antichain: tuple

    def __iter__(self):
        return iter(self.antichain)

    def __len__(self):
        return len(self.antichain)


def _prune(sets: Iterable[int]) -> tuple:
    kept = []
    for s in sorted(set(sets), key=lambda s: (bin(s).count("1"), s)):
        if not any(t & ~s == 0 for t in kept):
            kept.append(s)
    return tuple(sorted(kept))


class _MinSetSolver:
    def __init__(self, frame: Frame, view, budget: int):
        self.frame = frame
        self.view = view
        self.budget = budget
        self.memo = {}

    def charge(self, k):
        self.budget -= k
        if self.budget < 0:
            raise BudgetExceeded("minimal-valuation search exceeded its node budget")

    def solve(self, node, w):
        key = (id(node), w)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        tag = node[0]
        if tag == "top":
            r = (0,)
        elif tag == "var":
            r = (1 << w,)
        elif tag == "and":
            left = self.solve(node[1], w)
            right = self.solve(node[2], w) if left else ()
            self.charge(len(left) * len(right))
            r = _prune(a | b for a in left for b in right)
        else:
            acc = []
            for v in iter_bits(self.frame.succ[w]):
                acc.extend(self.solve(node[1], v))
            self.charge(len(acc))
            r = _prune(acc)
        self.memo[key] = r
        return r


def _positive_tree(gamma: Formula, p: str):
    if not is_strictly_positive(gamma, p):
        raise SchemeError(f"{render(gamma)} is not strictly positive in {p}")
    return positive_view(gamma)


def min_p_sets(frame: Frame, w: int, gamma: Formula, p: str = "p0",
               budget: int = DEFAULT_NODE_BUDGET) -> MinSets:
    """Subset-minimal S such that gamma holds at w when p is true exactly on S.

    An empty antichain means gamma fails at w under every valuation.
    """
    solver = _MinSetSolver(frame, _positive_tree(gamma, p), budget)
    return MinSets(solver.solve(solver.view, w))


def _all_min_sets(frame: Frame, gamma: Formula, budget: int):
    solver = _MinSetSolver(frame, _positive_tree(gamma, "p0"), budget)
    return [solver.solve(solver.view, w) for w in range(frame.size)]


# --------------------------------------------------------------------------
# scheme-aware validity


def _contained(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x & ~y == 0 for x, y in zip(a, b))


def _cwf(frame: Frame) -> bool:
    trans = closure(frame).trans
    return all(not (trans[w] >> w & 1) for w in range(frame.size))


def _a4_holds(frame: Frame, gamma: Formula, weak: bool, budget: int) -> bool:
    for w, sets in enumerate(_all_min_sets(frame, gamma, budget)):
        target = frame.succ[w] | ((1 << w) if weak else 0)
        if any(s & target == 0 for s in sets):
            return False
    return True


def valid_axiom(frame: Frame, sid: SchemeId, limit: int = DEFAULT_LIMIT,
                budget: int = DEFAULT_NODE_BUDGET) -> bool:
    """Frame validity of a scheme instance via its frame condition.

    A.3+n, L2 and the non-axiom builders (Sigma, DiaPlus, BoxPlus) fall
    back to :func:`valid_bruteforce`.
    """
    name, n = sid.name, sid.n
    if name == "Trans":
        return _contained(power(frame, n + 1), union_powers(frame, 1, n))
    if name == "wTrans":
        return _contained(power(frame, n + 1), union_powers(frame, 0, n))
    if name == "A4":
        return _a4_holds(frame, sid.gamma, False, budget)
    if name == "Aw4":
        return _a4_holds(frame, sid.gamma, True, budget)
    if name in ("ALob", "GLn", "GL2variant"):
        beta = {
            "ALob": sid.beta,
            "GLn": dia_k(P, (n or 2) - 1),
            "GL2variant": Dia(conj(P, Dia(P))),
        }[name]
        # GL-type frames: wK4_<>beta plus converse well-foundedness
        return _cwf(frame) and _a4_holds(frame, Dia(beta), True, budget)
    if name in ("ALobPlus", "AT_plus", "AB_plus"):
        # <>+n is the plain diamond of Q = R u ... u R^n
        q = union_powers(frame, 1, n)
        if name == "ALobPlus":
            return _contained(compose(q, q), q) and _cwf(frame)
        if name == "AT_plus":
            return all(q[w] >> w & 1 for w in range(frame.size))
        return all(q[v] >> w & 1 for w in range(frame.size) for v in iter_bits(q[w]))
    return valid_bruteforce(frame, scheme(sid), limit)


# --------------------------------------------------------------------------
# logics


@dataclass(frozen=True)
class LogicSpec:
    """A finitely axiomatised logic over K plus the data the tools need.

    ``pretrans_degree`` is an n with K4_<><>sigma_n contained in the logic,
    so every frame of the logic is n-transitive.
    """

    name: str
    axioms: tuple
    pretrans_degree: int
    requires_cwf: bool = False
    description: str = field(default="", compare=False)

    def __post_init__(self):
        if self.pretrans_degree < 1:
            raise ValueError("pretrans_degree must be at least 1")
        for ax in self.axioms:
            if not isinstance(ax, SchemeId):
                raise TypeError(f"axiom {ax!r} is not a SchemeId")

    def formulas(self) -> list[Formula]:
        return [scheme(ax) for ax in self.axioms]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "axioms": [ax.to_json() for ax in self.axioms],
            "n": self.pretrans_degree,
            "cwf": self.requires_cwf,
        }

    @classmethod
    def from_json(cls, data) -> "LogicSpec":
        if isinstance(data, str):
            data = json.loads(data)
        axioms = tuple(SchemeId.from_json(a) for a in data["axioms"])
        return cls(data["name"], axioms, int(data.get("n", 1)), bool(data.get("cwf", False)))


def _deg(f: Formula, shift: int = 0) -> int:
    return max(1, depth(f) + shift)


def _need(value, what):
    if value is None:
        raise ValueError(f"this logic needs {what}")
    return value


def _gamma_logic(kind, gamma, extra=()):
    gamma = parse(gamma) if isinstance(gamma, str) else gamma
    base = {"K4": ("A4", -1), "wK4": ("Aw4", 0)}[kind]
    n = _deg(gamma, base[1])
    axioms = [SchemeId(base[0], gamma=gamma)]
    axioms += [SchemeId(name, n=n) for name in extra]
    return tuple(axioms), n


def _k4_gamma(name, gamma, extra=()):
    axioms, n = _gamma_logic("K4", _need(gamma, "gamma"), extra)
    return LogicSpec(name, axioms, n)


def _gl_beta(name, beta):
    beta = parse(beta) if isinstance(beta, str) else beta
    return LogicSpec(name, (SchemeId("ALob", beta=beta),), _deg(beta), True)


def _needs_n(n, least=1):
    if n is None or n < least:
        raise ValueError(f"this logic needs n >= {least}")
    return n


CATALOG = {
    "K4": ("K + <><>p -> <>p", lambda n, g, b: _k4_gamma("K4", dia_k(P, 2))),
    "wK4": ("K + <><>p -> <>p | p",
            lambda n, g, b: LogicSpec("wK4", (SchemeId("Aw4", gamma=dia_k(P, 2)),), 2)),
    "GL": ("K + <>p -> <>(p & ~<>p)", lambda n, g, b: _gl_beta("GL", Dia(P))),
    "K4_1n": ("K4^1_n = K + <>^n p -> <>p (n >= 2)",
              lambda n, g, b: _k4_gamma(f"K4_1n[{_needs_n(n, 2)}]", dia_k(P, n))),
    "wK4_1n": ("wK4^1_n = K + <>^n p -> <>p | p (n >= 2)",
               lambda n, g, b: LogicSpec(f"wK4_1n[{_needs_n(n, 2)}]",
                                         (SchemeId("Aw4", gamma=dia_k(P, n)),), n)),
    "GLn": ("GL_n = K + <>p -> <>(p & ~<>^(n-1) p) (n >= 2)",
            lambda n, g, b: _gl_beta(f"GLn[{_needs_n(n, 2)}]", dia_k(P, n - 1))),
    "K4_sigma": ("K4_<><>sigma_n",
                 lambda n, g, b: _k4_gamma(f"K4_sigma[{_needs_n(n)}]", dia_k(sigma(n), 2))),
    "wK4_sigma": ("wK4_<><>sigma_n",
                  lambda n, g, b: LogicSpec(f"wK4_sigma[{_needs_n(n)}]",
                                            (SchemeId("Aw4", gamma=dia_k(sigma(n), 2)),), n + 1)),
    "GL_sigma": ("GL_<><>sigma_n",
                 lambda n, g, b: _gl_beta(f"GL_sigma[{_needs_n(n)}]", Dia(sigma(n)))),
    "GL2variant": ("K + <>p -> <>(p & ~<>(p & <>p))",
                   lambda n, g, b: _gl_beta("GL2variant", Dia(conj(P, Dia(P))))),
    "K4_gamma": ("K + gamma -> <>p", lambda n, g, b: _k4_gamma("K4_gamma", g)),
    "wK4_gamma": ("K + gamma -> <>p | p", lambda n, g, b: LogicSpec(
        "wK4_gamma", *_gamma_logic("wK4", _need(g, "gamma")))),
    "GL_beta": ("K + <>p -> <>(p & ~beta)", lambda n, g, b: _gl_beta("GL_beta", _need(b, "beta"))),
    "S4_gamma": ("K4_gamma + AT+n", lambda n, g, b: _k4_gamma("S4_gamma", g, ("AT_plus",))),
    "S5_gamma": ("S4_gamma + AB+n",
                 lambda n, g, b: _k4_gamma("S5_gamma", g, ("AT_plus", "AB_plus"))),
    "K4.3_gamma": ("K4_gamma + A.3+n", lambda n, g, b: _k4_gamma("K4.3_gamma", g, ("A3_plus",))),
    "S4.3_gamma": ("S4_gamma + A.3+n",
                   lambda n, g, b: _k4_gamma("S4.3_gamma", g, ("AT_plus", "A3_plus"))),
    "L2": ("least 2-transitive subframe-hereditary logic",
           lambda n, g, b: LogicSpec("L2", (SchemeId("L2"),), 2)),
}


def catalog_names() -> list[str]:
    return list(CATALOG)


def logic(name: str, n: int | None = None, gamma=None, beta=None) -> LogicSpec:
    """Resolve a catalog entry, e.g. ``logic("K4_sigma", n=2)``."""
    try:
        description, build = CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown logic {name!r}; known: {', '.join(CATALOG)}") from None
    spec = build(n, gamma, beta)
    return LogicSpec(spec.name, spec.axioms, spec.pretrans_degree, spec.requires_cwf, description)


def failing_axioms(frame: Frame, spec: LogicSpec, limit: int = DEFAULT_LIMIT) -> list[SchemeId]:
    return [ax for ax in spec.axioms if not valid_axiom(frame, ax, limit)]


def is_lambda_frame(frame: Frame, spec: LogicSpec, limit: int = DEFAULT_LIMIT) -> bool:
    if spec.requires_cwf and not _cwf(frame):
        return False
    return all(valid_axiom(frame, ax, limit) for ax in spec.axioms)
