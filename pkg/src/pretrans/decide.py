"""Frame enumeration, random generation, countermodel search, inclusion probes.

Frames are enumerated by code in ascending order (bit ``u*size + v`` set iff
``u R v``).  Isomorphism reduction keeps the frame whose code is least among
all vertex relabelings; for sizes up to 4 the canonical table is computed
once with numpy.

A search that finds nothing has only covered its budget.  The finite model
property thresholds are reported next to the budget and are never reached.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .formula import Formula, SchemeId, psi_set, render
from .kripke import Frame, Model, members, transitive_closure, compose, union_rows
from .paths import bounds
from .validity import (DEFAULT_LIMIT, LogicSpec, _cwf, failing_axioms,
                       is_lambda_frame, refute_bruteforce)

__all__ = [
    "SearchBudget", "SearchResult", "InclusionVerdict", "MAX_ENUM_SIZE",
    "enumerate_frames", "canonical_code", "random_frame", "random_dag",
    "random_lambda_frame", "random_semisubframe", "countermodel_search",
    "inclusion_probe", "fmp_threshold",
]

MAX_ENUM_SIZE = 5
DENSITIES = (0.2, 0.4, 0.6)


@dataclass(frozen=True)
class SearchBudget:
    max_worlds: int = 4
    max_frames: int = 0
    seed: int = 0
    exhaustive_up_to: int = 4

    def __post_init__(self):
        if self.exhaustive_up_to > self.max_worlds:
            raise ValueError("exhaustive_up_to must not exceed max_worlds")
        if self.exhaustive_up_to > MAX_ENUM_SIZE:
            raise ValueError(f"exhaustive search is capped at {MAX_ENUM_SIZE} worlds")
        if min(self.max_worlds, self.max_frames, self.exhaustive_up_to) < 0:
            raise ValueError("budget fields must be nonnegative")

    def to_json(self) -> dict:
        return {"max_worlds": self.max_worlds, "max_frames": self.max_frames,
                "seed": self.seed, "exhaustive_up_to": self.exhaustive_up_to}


# --------------------------------------------------------------------------
# enumeration


def _permuted_codes(codes: np.ndarray, size: int, perm) -> np.ndarray:
    out = np.zeros_like(codes)
    for u in range(size):
        for v in range(size):
            out |= ((codes >> (u * size + v)) & 1) << (perm[u] * size + perm[v])
    return out


@lru_cache(maxsize=None)
def _canonical_table(size: int) -> np.ndarray:
    codes = np.arange(1 << (size * size), dtype=np.int64)
    best = codes.copy()
    for perm in itertools.permutations(range(size)):
        np.minimum(best, _permuted_codes(codes, size, perm), out=best)
    return best


def canonical_code(frame: Frame) -> int:
    """Least code over all relabelings of ``frame``."""
    size = frame.size
    if size <= 4:
        return int(_canonical_table(size)[frame.code])
    edges = frame.edges()
    return min(
        sum(1 << (p[u] * size + p[v]) for u, v in edges)
        for p in itertools.permutations(range(size))
    )


def enumerate_frames(size: int, iso_reduce: bool = False,
                     allow_large: bool = False) -> Iterator[Frame]:
    """Every frame on ``size`` worlds in ascending code order."""
    if size < 1:
        raise ValueError("size must be at least 1")
    if size > MAX_ENUM_SIZE and not allow_large:
        raise ValueError(f"refusing to enumerate {size}-world frames without allow_large")
    if iso_reduce and size <= 4:
        table = _canonical_table(size)
        for code in np.flatnonzero(table == np.arange(table.size)):
            yield Frame.from_code(size, int(code))
        return
    for code in range(1 << (size * size)):
        frame = Frame.from_code(size, code)
        if not iso_reduce or canonical_code(frame) == code:
            yield frame


# --------------------------------------------------------------------------
# random frames


def random_frame(size: int, rng: np.random.Generator, density: float | None = None) -> Frame:
    if density is None:
        density = float(rng.choice(DENSITIES))
    matrix = rng.random((size, size)) < density
    return Frame.from_matrix(matrix)


def random_dag(size: int, rng: np.random.Generator, density: float | None = None) -> Frame:
    """A conversely well-founded frame: random forward edges under a random order."""
    if density is None:
        density = float(rng.choice(DENSITIES))
    order = rng.permutation(size)
    upper = np.triu(rng.random((size, size)) < density, k=1)
    matrix = np.zeros((size, size), dtype=bool)
    matrix[np.ix_(order, order)] = upper
    return Frame.from_matrix(matrix)


def _power_closure(frame: Frame, m: int) -> Frame:
    """Least superset of R with R^m included in R."""
    rows = frame.succ
    while True:
        p = rows
        for _ in range(m - 1):
            p = compose(p, rows)
        new = union_rows(rows, p)
        if new == rows:
            return Frame(frame.size, rows)
        rows = new


def _shaped(size: int, rng: np.random.Generator, cwf: bool, degree: int) -> Frame:
    base = random_dag(size, rng) if cwf else random_frame(size, rng)
    kind = int(rng.integers(3))
    if kind == 0:
        return base
    if kind == 1:
        return Frame(size, transitive_closure(base.succ))
    return _power_closure(base, int(rng.integers(2, degree + 2)))


def random_lambda_frame(spec: LogicSpec, size: int, rng: np.random.Generator,
                        tries: int = 200) -> Frame | None:
    """Rejection-sample a frame of ``spec``; None if every try fails.

    Candidates are raw random relations, their transitive closures, or their
    closures under R^m included in R, which raises the hit rate.
    """
    for _ in range(tries):
        frame = _shaped(size, rng, spec.requires_cwf, spec.pretrans_degree)
        if is_lambda_frame(frame, spec):
            return frame
    return None


def random_semisubframe(big: Frame, rng: np.random.Generator):
    """A random semisubframe of ``big``; returns (small, embedding).

    Picks a nonempty world subset and a random subset of the induced edges,
    then adds back induced edges until the semisubframe condition holds.
    """
    size = big.size
    keep = [w for w in range(size) if rng.random() < 0.7] or [int(rng.integers(size))]
    index = {w: i for i, w in enumerate(keep)}
    induced = [0] * len(keep)
    for a, w in enumerate(keep):
        for v in members(big.succ[w]):
            if v in index:
                induced[a] |= 1 << index[v]
    rows = [r & int(rng.integers(1 << len(keep))) for r in induced]
    while True:
        star = transitive_closure(rows)
        new = [r | (induced[a] & (star[a] | 1 << a)) for a, r in enumerate(rows)]
        if new == rows:
            break
        rows = new
    return Frame(len(keep), rows), keep


# --------------------------------------------------------------------------
# search


def _frames(budget: SearchBudget) -> Iterator[Frame]:
    for size in range(1, budget.exhaustive_up_to + 1):
        yield from enumerate_frames(size, iso_reduce=True)
    sizes = list(range(budget.exhaustive_up_to + 1, budget.max_worlds + 1))
    if not sizes:
        return
    rng = np.random.default_rng(budget.seed)
    for i in range(budget.max_frames):
        yield random_frame(sizes[i % len(sizes)], rng)


def fmp_threshold(spec: LogicSpec, zeta: Formula) -> str:
    """|Psi|^C for the filtration matching ``spec``; a label, not a number."""
    p = len(psi_set(zeta))
    b = bounds(spec.pretrans_degree, max(1, p))
    c = b.C_gl if spec.requires_cwf else b.C_k4
    return f"{p}^{c}"


@dataclass
class SearchResult:
    model: Model | None
    world: int | None
    frames_scanned: int
    frames_in_class: int
    budget: SearchBudget
    fmp_threshold: str

    @property
    def found(self) -> bool:
        return self.model is not None

    def to_json(self) -> dict:
        from .formats import model_to_json
        out = {
            "verdict": "countermodel" if self.found else "absent",
            "budget_used": {"frames_scanned": self.frames_scanned,
                            "frames_in_class": self.frames_in_class,
                            **self.budget.to_json()},
            "fmp_threshold": {"value": self.fmp_threshold, "reached": False},
        }
        if self.found:
            out["model"] = model_to_json(self.model)
            out["world"] = self.world
        return out


def countermodel_search(spec: LogicSpec, zeta: Formula, budget: SearchBudget,
                        limit: int = DEFAULT_LIMIT) -> SearchResult:
    """First (frame, valuation, world) of ``spec`` refuting ``zeta``.

    Order: frame size, then frame code, then valuation index, then world.
    """
    scanned = in_class = 0
    for frame in _frames(budget):
        scanned += 1
        if not is_lambda_frame(frame, spec, limit):
            continue
        in_class += 1
        hit = refute_bruteforce(frame, zeta, limit)
        if hit is not None:
            valuation, world = hit
            return SearchResult(Model(frame, valuation), world, scanned, in_class,
                                budget, fmp_threshold(spec, zeta))
    return SearchResult(None, None, scanned, in_class, budget, fmp_threshold(spec, zeta))


@dataclass
class InclusionVerdict:
    verdict: str                      # "no_counterexample" | "counterexample"
    frame: Frame | None
    scheme: SchemeId | None
    frames_scanned: int
    budget: SearchBudget
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from .formats import frame_to_json
        out = {"verdict": self.verdict,
               "budget_used": {"frames_scanned": self.frames_scanned, **self.budget.to_json()}}
        if self.frame is not None:
            out["frame"] = frame_to_json(self.frame)
            out["scheme"] = self.scheme.to_json() if self.scheme else None
            out["formula"] = render(self.scheme_formula()) if self.scheme else None
            out.update(self.extra)
        return out

    def scheme_formula(self):
        from .formula import scheme
        return scheme(self.scheme)


def inclusion_probe(weak: LogicSpec, strong: LogicSpec, budget: SearchBudget,
                    limit: int = DEFAULT_LIMIT) -> InclusionVerdict:
    """Look for a frame of ``strong`` on which some axiom of ``weak`` fails.

    Such a frame shows ``weak`` is not contained in ``strong``.
    """
    scanned = 0
    for frame in _frames(budget):
        scanned += 1
        if not is_lambda_frame(frame, strong, limit):
            continue
        bad = failing_axioms(frame, weak, limit)
        if bad:
            return InclusionVerdict("counterexample", frame, bad[0], scanned, budget)
        if weak.requires_cwf and not _cwf(frame):
            return InclusionVerdict("counterexample", frame, None, scanned, budget,
                                    {"reason": "not conversely well-founded"})
    return InclusionVerdict("no_counterexample", None, None, scanned, budget)
