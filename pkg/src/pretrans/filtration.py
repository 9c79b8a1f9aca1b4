"""Selective filtration on finite models.

Two layer-by-layer extractors pull a finite countermodel out of a big model
rooted at a world ``x``:

* ``extract_k4`` keeps a subframe.  A demand ``(w, psi)`` (w satisfies
  <>psi) is answered by an already kept world when one works (backward hit),
  otherwise by the lowest maximal witness, which then joins the next layer.
* ``extract_gl`` always answers with the lowest maximal witness, records the
  link ``w S v``, and keeps ``R0 & S*``, a semisubframe.

Ties go to the lowest-numbered world; demands are handled in order of world
id, then formula order (``formula_sort_key``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formula import Dia, Formula, formula_sort_key, neg, psi_set, render
from .kripke import (Frame, Model, bits, closure, iter_bits, max_in, members,
                     subframe_relations, transitive_closure, truth_sets)
from .paths import LabeledPath, bounds
from .validity import is_lambda_frame, logic

__all__ = [
    "FiltrationTrace", "FrameClassError", "FiltrationError", "NotWeakSubmodel",
    "is_selective", "extract_k4", "extract_gl", "countermodel_root",
    "witness_path", "bound_holds",
]


class FrameClassError(ValueError):
    """The big model's frame is outside the class the extractor needs."""


class FiltrationError(RuntimeError):
    """A layer was still nonempty after the proven bound; this must not happen."""


class NotWeakSubmodel(ValueError):
    pass


@dataclass
class FiltrationTrace:
    variant: str
    x: int
    zeta: Formula
    psi: list
    layers: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)      # (w, psi index) -> v
    backward_hits: set = field(default_factory=set)    # (w, psi index)
    parents: dict = field(default_factory=dict)        # v -> (w, psi index)
    link_rel: set = field(default_factory=set)         # (w, v), gl only
    kept_worlds: int = 0
    kept_rel: list = field(default_factory=list)       # (w, v) in big ids
    embedding: list = field(default_factory=list)      # small id -> big id
    x_maximal: bool | None = None
    bound: int = 0

    def to_json(self) -> dict:
        out = {
            "variant": self.variant,
            "x": self.x,
            "zeta": render(self.zeta),
            "psi": [render(p) for p in self.psi],
            "layers": [members(layer) for layer in self.layers],
            "witnesses": [[w, render(self.psi[i]), v]
                          for (w, i), v in sorted(self.witnesses.items())],
            "backward_hits": [[w, render(self.psi[i])] for w, i in sorted(self.backward_hits)],
            "kept_worlds": members(self.kept_worlds),
            "kept_rel": [list(e) for e in sorted(self.kept_rel)],
            "embedding": list(self.embedding),
            "bound_C": self.bound,
        }
        if self.variant == "gl":
            out["link_rel"] = [list(e) for e in sorted(self.link_rel)]
            out["x_maximal"] = self.x_maximal
        return out


def _psi_order(zeta: Formula) -> list:
    return sorted(psi_set(zeta), key=formula_sort_key)


def is_selective(small: Model, big: Model, embedding, zeta: Formula) -> bool:
    """Every <>psi demand met in ``big`` at a kept world is met in ``small``."""
    emb = list(embedding)
    kind = subframe_relations(small.frame, big.frame, emb)
    names = set(small.valuation) | set(big.valuation)
    if not kind.weak_subframe or any(
        small.value(p) != bits(a for a, e in enumerate(emb) if big.value(p) >> e & 1)
        for p in names
    ):
        raise NotWeakSubmodel("small model is not a weak submodel of big")
    memo = truth_sets(big, zeta)
    for psi in _psi_order(zeta):
        ext = memo[psi]
        for a, e in enumerate(emb):
            if big.frame.succ[e] & ext and not any(
                ext >> emb[b] & 1 for b in iter_bits(small.frame.succ[a])
            ):
                return False
    return True


def _setup(big: Model, zeta: Formula, n: int, name: str, validate: bool):
    if validate and not is_lambda_frame(big.frame, logic(name, n=n)):
        raise FrameClassError(f"big frame is not a {name}[{n}]-frame")
    psi = _psi_order(zeta)
    memo = truth_sets(big, zeta)
    ext = [memo[p] for p in psi]
    dia = [memo[Dia(p)] for p in psi]
    return psi, ext, dia


def _lowest(x: int) -> int:
    return (x & -x).bit_length() - 1


def _finish(big: Model, trace: FiltrationTrace, rows_big: dict) -> Model:
    emb = members(trace.kept_worlds)
    index = {w: i for i, w in enumerate(emb)}
    succ = [bits(index[v] for v in iter_bits(rows_big[w])) for w in emb]
    trace.embedding = emb
    trace.kept_rel = [(w, v) for w in emb for v in iter_bits(rows_big[w])]
    return big.restrict(emb, Frame(len(emb), succ))


def extract_k4(big: Model, x: int, zeta: Formula, n: int, validate: bool = True):
    """Subframe extraction over a K4_<><>sigma_n model; returns (small, trace)."""
    psi, ext, dia = _setup(big, zeta, n, "K4_sigma", validate)
    frame = big.frame
    cap = bounds(n, max(1, len(psi))).C_k4
    trace = FiltrationTrace("k4", x, zeta, psi, bound=cap)
    layer, seen, k = 1 << x, 1 << x, 0
    trace.layers.append(layer)
    while layer:
        if k >= cap:
            raise FiltrationError(f"layer {k} nonempty at the bound C={cap}")
        nxt = 0
        for w in iter_bits(layer):
            for i in range(len(psi)):
                if not dia[i] >> w & 1:
                    continue
                cand = frame.succ[w] & ext[i]
                back = cand & seen
                if back:
                    v = _lowest(back)
                    trace.backward_hits.add((w, i))
                else:
                    v = _lowest(max_in(frame, cand))
                    if not nxt >> v & 1:
                        trace.parents[v] = (w, i)
                    nxt |= 1 << v
                trace.witnesses[(w, i)] = v
        seen |= nxt
        layer = nxt
        trace.layers.append(layer)
        k += 1
    trace.kept_worlds = seen
    rows = {w: frame.succ[w] & seen for w in iter_bits(seen)}
    return _finish(big, trace, rows), trace


def extract_gl(big: Model, x: int, zeta: Formula, n: int, validate: bool = True):
    """Semisubframe extraction over a GL_<>sigma_n model; returns (small, trace)."""
    psi, ext, dia = _setup(big, zeta, n, "GL_sigma", validate)
    frame = big.frame
    refuting = frame.worlds & ~truth_sets(big, zeta)[zeta]
    cap = bounds(n, max(1, len(psi))).C_gl
    trace = FiltrationTrace("gl", x, zeta, psi, bound=cap)
    trace.x_maximal = bool(max_in(frame, refuting) >> x & 1)
    layer, seen, k = 1 << x, 1 << x, 0
    trace.layers.append(layer)
    link = [0] * frame.size
    while layer:
        if k >= cap:
            raise FiltrationError(f"layer {k} nonempty at the bound C={cap}")
        found = 0
        for w in iter_bits(layer):
            for i in range(len(psi)):
                if not dia[i] >> w & 1:
                    continue
                v = _lowest(max_in(frame, frame.succ[w] & ext[i]))
                trace.witnesses[(w, i)] = v
                trace.link_rel.add((w, v))
                link[w] |= 1 << v
                if not (seen | found) >> v & 1:
                    trace.parents[v] = (w, i)
                found |= 1 << v
        layer = found & ~seen
        seen |= layer
        trace.layers.append(layer)
        k += 1
    trace.kept_worlds = seen
    s_star = transitive_closure(link)
    rows = {w: frame.succ[w] & (s_star[w] | 1 << w) for w in iter_bits(seen)}
    return _finish(big, trace, rows), trace


def countermodel_root(big: Model, zeta: Formula, variant: str):
    """Lowest refuting world (k4) or lowest maximal refuting world (gl)."""
    refuting = big.frame.worlds & ~truth_sets(big, zeta)[zeta]
    if variant == "gl":
        refuting = max_in(big.frame, refuting)
    elif variant != "k4":
        raise ValueError(f"unknown variant {variant!r}")
    return _lowest(refuting) if refuting else None


def witness_path(trace: FiltrationTrace, v: int) -> LabeledPath:
    """The chain of forward witnesses from the root down to kept world ``v``."""
    worlds, labels = [v], []
    while v != trace.x:
        w, i = trace.parents[v]
        worlds.append(w)
        labels.append(trace.psi[i])
        v = w
    return LabeledPath(tuple(reversed(worlds)), tuple(reversed(labels)))


def bound_holds(trace: FiltrationTrace) -> bool:
    """Kept size against |Psi|^C, plus the geometric sum that always holds.

    ``|W| <= sum_{l<C} |Psi|^l`` is what the layer count gives directly; the
    strict ``|W| < |Psi|^C`` form needs ``|Psi| >= 2``.
    """
    size = bin(trace.kept_worlds).count("1")
    p, c = len(trace.psi), len(trace.layers) - 1
    if c > trace.bound:
        return False
    if p <= 1:
        return size <= max(c, 1)
    # sum_{l<c} p^l < p^c <= p^C
    return size <= (p ** c - 1) // (p - 1)
