"""Finite Kripke frames and models.

Worlds are ``0 .. size-1``.  A set of worlds is an ``int`` bit-set (bit ``w``
set when ``w`` is in the set) and a relation is a tuple of such rows, row
``w`` holding the successors of ``w``.  This is a dense bit-matrix with
arbitrary-width rows; :attr:`Frame.rel` gives the same relation as a numpy
boolean matrix.

Converse well-foundedness is tested as irreflexivity of the transitive
closure.  On a finite carrier an infinite ascending chain must revisit some
world, so the two notions coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .formula import Bot, Dia, Formula, Imp, Var

__all__ = [
    "Frame", "Model", "Closure", "Skeleton", "FrameClass", "SubframeKind",
    "iter_bits", "bits", "members", "full_set",
    "compose", "union_rows", "transitive_closure", "power", "union_powers",
    "closure", "skeleton", "max_in", "frame_class_checks",
    "subframe_relations", "evaluate", "truth_sets", "is_generated_set",
]


def iter_bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def members(x: int) -> list[int]:
    return list(iter_bits(x))


def bits(worlds: Iterable[int]) -> int:
    out = 0
    for w in worlds:
        out |= 1 << w
    return out


def full_set(size: int) -> int:
    return (1 << size) - 1


# --------------------------------------------------------------------------
# relation algebra on row tuples


def compose(a: Sequence[int], b: Sequence[int]) -> tuple:
    """Rows of the composite relation: first a, then b."""
    out = []
    for row in a:
        acc = 0
        for v in iter_bits(row):
            acc |= b[v]
        out.append(acc)
    return tuple(out)


def union_rows(a: Sequence[int], b: Sequence[int]) -> tuple:
    return tuple(x | y for x, y in zip(a, b))


def _identity(size: int) -> tuple:
    return tuple(1 << w for w in range(size))


def _transpose(rows: Sequence[int]) -> tuple:
    size = len(rows)
    out = [0] * size
    for w, row in enumerate(rows):
        for v in iter_bits(row):
            out[v] |= 1 << w
    return tuple(out)


def transitive_closure(rows: Sequence[int]) -> tuple:
    """R+ by repeated squaring: T := T | T.T until stable."""
    t = tuple(rows)
    while True:
        nxt = union_rows(t, compose(t, t))
        if nxt == t:
            return t
        t = nxt


# --------------------------------------------------------------------------
# frames


class Frame:
    """A finite frame (W, R) with W = {0, ..., size-1}.

    Immutable; derived data (closure, predecessors) is computed on first use
    and cached.  Concurrent first use may compute a cache entry twice, which
    is harmless since the result is deterministic.
    """

    __slots__ = ("size", "succ", "_cache")

    def __init__(self, size: int, succ: Sequence[int]):
        if size < 1:
            raise ValueError("a frame needs at least one world")
        succ = tuple(int(r) for r in succ)
        if len(succ) != size:
            raise ValueError(f"expected {size} rows, got {len(succ)}")
        mask = full_set(size)
        if any(r & ~mask for r in succ):
            raise ValueError("relation mentions worlds outside the frame")
        self.size = size
        self.succ = succ
        self._cache = {}

    @classmethod
    def from_edges(cls, size: int, edges: Iterable[Sequence[int]]) -> "Frame":
        rows = [0] * size
        for u, v in edges:
            if not (0 <= u < size and 0 <= v < size):
                raise ValueError(f"edge ({u}, {v}) outside 0..{size - 1}")
            rows[u] |= 1 << v
        return cls(size, rows)

    @classmethod
    def from_matrix(cls, matrix) -> "Frame":
        m = np.asarray(matrix, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("relation matrix must be square")
        rows = [bits(np.flatnonzero(m[w]).tolist()) for w in range(m.shape[0])]
        return cls(m.shape[0], rows)

    @classmethod
    def from_code(cls, size: int, code: int) -> "Frame":
        """Inverse of :attr:`code`."""
        row_mask = full_set(size)
        return cls(size, [(code >> (w * size)) & row_mask for w in range(size)])

    @property
    def code(self) -> int:
        """Integer code: bit ``u*size + v`` is set iff ``u R v``."""
        out = 0
        for w, row in enumerate(self.succ):
            out |= row << (w * self.size)
        return out

    @property
    def rel(self) -> np.ndarray:
        m = np.zeros((self.size, self.size), dtype=bool)
        for w, row in enumerate(self.succ):
            for v in iter_bits(row):
                m[w, v] = True
        m.setflags(write=False)
        return m

    @property
    def worlds(self) -> int:
        return full_set(self.size)

    @property
    def pred(self) -> tuple:
        if "pred" not in self._cache:
            self._cache["pred"] = _transpose(self.succ)
        return self._cache["pred"]

    def edges(self) -> list[tuple[int, int]]:
        return [(w, v) for w, row in enumerate(self.succ) for v in iter_bits(row)]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.succ[u] >> v & 1)

    def __eq__(self, other):
        return isinstance(other, Frame) and self.size == other.size and self.succ == other.succ

    def __hash__(self):
        return hash((self.size, self.succ))

    def __repr__(self):
        return f"Frame.from_edges({self.size}, {self.edges()})"

    def __reduce__(self):
        return (Frame, (self.size, self.succ))


@dataclass(frozen=True)
class Closure:
    """Powers R^0..R^size, R+ and R* (plus their converses) as row tuples."""

    powers: tuple
    trans: tuple
    refl_trans: tuple
    trans_inv: tuple
    refl_trans_inv: tuple

    @staticmethod
    def matrix(rows: Sequence[int]) -> np.ndarray:
        size = len(rows)
        m = np.zeros((size, size), dtype=bool)
        for w, row in enumerate(rows):
            for v in iter_bits(row):
                m[w, v] = True
        return m


def closure(f: Frame) -> Closure:
    """Relation powers up to exponent ``size`` and both closures.

    Higher powers add nothing new to R+ over a finite carrier; use
    :func:`power` (repeated squaring) when a specific R^k with k > size is
    needed.
    """
    cached = f._cache.get("closure")
    if cached is not None:
        return cached
    powers = [_identity(f.size)]
    for _ in range(f.size):
        powers.append(compose(powers[-1], f.succ))
    trans = transitive_closure(f.succ)
    refl = union_rows(trans, _identity(f.size))
    result = Closure(
        powers=tuple(powers),
        trans=trans,
        refl_trans=refl,
        trans_inv=_transpose(trans),
        refl_trans_inv=_transpose(refl),
    )
    f._cache["closure"] = result
    return result


def power(f: Frame, k: int) -> tuple:
    """Rows of R^k for any k >= 0."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k <= f.size:
        return closure(f).powers[k]
    result = _identity(f.size)
    base = f.succ
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


def union_powers(f: Frame, lo: int, hi: int) -> tuple:
    """Rows of the union of R^k for lo <= k <= hi."""
    acc = (0,) * f.size
    cur = power(f, lo)
    for _ in range(lo, hi + 1):
        acc = union_rows(acc, cur)
        cur = compose(cur, f.succ)
    return acc


# --------------------------------------------------------------------------
# clusters and maximality


@dataclass(frozen=True)
class Skeleton:
    """Clusters of mutual R*-reachability and the order they inherit.

    Cluster ids follow the smallest world in each cluster.  ``order``
    contains ``(a, b)`` when cluster ``a`` precedes or equals cluster ``b``.
    """

    cluster_of: tuple
    clusters: tuple
    order: frozenset

    def leq(self, a: int, b: int) -> bool:
        return (a, b) in self.order


def skeleton(f: Frame) -> Skeleton:
    c = closure(f)
    cluster_of = [-1] * f.size
    clusters = []
    for w in range(f.size):
        if cluster_of[w] >= 0:
            continue
        cls = c.refl_trans[w] & c.refl_trans_inv[w]
        for v in iter_bits(cls):
            cluster_of[v] = len(clusters)
        clusters.append(cls)
    reps = [(cls & -cls).bit_length() - 1 for cls in clusters]
    order = frozenset(
        (a, b)
        for a, ra in enumerate(reps)
        for b, rb in enumerate(reps)
        if c.refl_trans[ra] >> rb & 1
    )
    return Skeleton(tuple(cluster_of), tuple(clusters), order)


def max_in(f: Frame, x: int) -> int:
    """Worlds v of x such that v R* u implies u R* v for every u in x."""
    c = closure(f)
    out = 0
    for v in iter_bits(x):
        if not (c.refl_trans[v] & x & ~c.refl_trans_inv[v]):
            out |= 1 << v
    return out


@dataclass(frozen=True)
class FrameClass:
    n_transitive: bool
    conversely_well_founded: bool
    irreflexive: bool


def frame_class_checks(f: Frame, n: int) -> FrameClass:
    if n < 1:
        raise ValueError("n must be at least 1")
    c = closure(f)
    bounded = union_powers(f, 1, n)
    n_trans = all(t & ~b == 0 for t, b in zip(c.trans, bounded))
    cwf = all(not (c.trans[w] >> w & 1) for w in range(f.size))
    irrefl = all(not (f.succ[w] >> w & 1) for w in range(f.size))
    return FrameClass(n_trans, cwf, irrefl)


@dataclass(frozen=True)
class SubframeKind:
    weak_subframe: bool
    subframe: bool
    generated_subframe: bool
    semisubframe: bool


def _embedding_list(embedding, size):
    if isinstance(embedding, Mapping):
        emb = [embedding[w] for w in range(size)]
    else:
        emb = list(embedding)
    if len(emb) != size:
        raise ValueError("embedding must map every world of the small frame")
    if len(set(emb)) != len(emb):
        raise ValueError("embedding is not injective")
    return emb


def subframe_relations(f: Frame, f0: Frame, embedding) -> SubframeKind:
    """Classify ``f`` as a substructure of ``f0`` along ``embedding``.

    ``embedding`` maps each world of ``f`` (by index or key) to a world of
    ``f0``.  The semisubframe condition uses R* of the small frame.
    """
    emb = _embedding_list(embedding, f.size)
    if any(not (0 <= e < f0.size) for e in emb):
        raise ValueError("embedding leaves the big frame")
    image = bits(emb)
    # R0 restricted to the image, pulled back to small indices
    pulled = []
    for a in range(f.size):
        row0 = f0.succ[emb[a]]
        pulled.append(bits(b for b in range(f.size) if row0 >> emb[b] & 1))
    weak = all(r & ~p == 0 for r, p in zip(f.succ, pulled))
    sub = tuple(pulled) == f.succ
    generated = sub and all(f0.succ[e] & ~image == 0 for e in emb)
    rt = closure(f).refl_trans
    semi = weak and all((rt[a] & pulled[a]) & ~f.succ[a] == 0 for a in range(f.size))
    return SubframeKind(weak, sub, generated, semi)


def is_generated_set(f: Frame, x: int) -> bool:
    return all(f.succ[w] & ~x == 0 for w in iter_bits(x))


# --------------------------------------------------------------------------
# models


class Model:
    """A frame with a valuation (variable name -> world bit-set).

    Variables absent from the valuation are false everywhere.
    """

    __slots__ = ("frame", "valuation")

    def __init__(self, frame: Frame, valuation: Mapping[str, int] | None = None):
        val = {}
        for name, ws in (valuation or {}).items():
            if not isinstance(ws, int):
                ws = bits(ws)
            if ws & ~frame.worlds:
                raise ValueError(f"valuation of {name} mentions worlds outside the frame")
            val[name] = ws
        self.frame = frame
        self.valuation = val

    @property
    def size(self) -> int:
        return self.frame.size

    def value(self, name: str) -> int:
        return self.valuation.get(name, 0)

    def restrict(self, worlds: Sequence[int], frame: Frame) -> "Model":
        """Pull the valuation back along ``worlds`` (small index -> big world)."""
        val = {}
        for name, ws in self.valuation.items():
            val[name] = bits(i for i, w in enumerate(worlds) if ws >> w & 1)
        return Model(frame, val)

    def __eq__(self, other):
        if not isinstance(other, Model) or self.frame != other.frame:
            return False
        names = set(self.valuation) | set(other.valuation)
        return all(self.value(n) == other.value(n) for n in names)

    def __repr__(self):
        val = {k: members(v) for k, v in sorted(self.valuation.items())}
        return f"Model({self.frame!r}, {val})"

    def __reduce__(self):
        return (Model, (self.frame, self.valuation))


def truth_sets(m: Model, f: Formula, memo: dict | None = None) -> dict:
    """Truth sets of ``f`` and all of its subformulas, keyed by formula."""
    memo = {} if memo is None else memo
    pred = m.frame.pred
    full = m.frame.worlds

    def go(g):
        hit = memo.get(g)
        if hit is not None:
            return hit
        kind = type(g)
        if kind is Var:
            r = m.value(g.name)
        elif kind is Bot:
            r = 0
        elif kind is Imp:
            r = (full & ~go(g.left)) | go(g.right)
        elif kind is Dia:
            r = 0
            for u in iter_bits(go(g.inner)):
                r |= pred[u]
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = r
        return r

    go(f)
    return memo


def evaluate(m: Model, f: Formula) -> int:
    """The truth set of ``f`` in ``m`` as a world bit-set."""
    return truth_sets(m, f)[f]
