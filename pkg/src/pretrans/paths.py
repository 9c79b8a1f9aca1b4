"""Labeled paths, reducibility, and zigzag links in K4_<><>sigma_n frames.

Notation: a grid is a list of lines, each line a path ``u_0 .. u_n`` of
length ``n``; consecutive lines are connected by ``u^i_n R* u^{i+1}_0``.
A link is a triple ``(i, i2, j)`` with ``i < i2`` and ``u^i_j R u^{i2}_{j+1}``
(for labeled grids the target must also satisfy the label ``psi^i_j``).

Links are found by exhaustive scan and the lexicographically least triple is
returned.  The existence guarantee comes from the zigzag argument; the scan
does not replay it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .formula import Formula, formula_sort_key, parse, render
from .kripke import Frame, Model, closure, iter_bits, max_in, truth_sets
from .validity import is_lambda_frame, logic

__all__ = [
    "Bounds", "bounds", "LabeledPath", "PreconditionError", "LinkNotFound",
    "label_sets", "is_labeled_path", "is_optimal", "find_reduction",
    "find_zigzag_link", "grid_link", "grid_link_pigeonhole",
    "greedy_optimal_path", "seq_out_index", "longest_irreducible_optimal",
]


class PreconditionError(ValueError):
    """A precondition of a path operation does not hold for the given input."""


class LinkNotFound(RuntimeError):
    """No link exists although every precondition holds; this would be a counterexample to the zigzag property."""


@dataclass(frozen=True)
class Bounds:
    n: int
    psi_size: int
    N: int
    M: int
    C_k4: int
    C_gl: int


def bounds(n: int, psi_size: int) -> Bounds:
    """N = n^n, M = N*|Psi|^n, C_k4 = n(M^2+M+1), C_gl = n^(n+1)|Psi|^n + n."""
    if n < 1 or psi_size < 1:
        raise ValueError("n and psi_size must both be at least 1")
    big_n = n ** n
    m = big_n * psi_size ** n
    return Bounds(
        n=n,
        psi_size=psi_size,
        N=big_n,
        M=m,
        C_k4=n * (m * m + m + 1),
        C_gl=n ** (n + 1) * psi_size ** n + n,
    )


@dataclass(frozen=True)
class LabeledPath:
    """``worlds[0], labels[0], worlds[1], ..., labels[m-1], worlds[m]``."""

    worlds: tuple
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.worlds) != len(self.labels) + 1:
            raise ValueError("a labeled path has one more world than labels")

    @property
    def length(self) -> int:
        return len(self.labels)

    def segment(self, start: int, stop: int) -> "LabeledPath":
        """The sub-path ``u_start .. u_stop``."""
        return LabeledPath(self.worlds[start:stop + 1], self.labels[start:stop])

    def to_json(self) -> list:
        out = [self.worlds[0]]
        for label, w in zip(self.labels, self.worlds[1:]):
            out.extend([render(label), w])
        return out

    @classmethod
    def from_json(cls, data: Sequence) -> "LabeledPath":
        if not data or len(data) % 2 == 0:
            raise ValueError("path JSON must alternate world, formula, ..., world")
        worlds = [int(w) for w in data[0::2]]
        labels = [parse(t) if isinstance(t, str) else t for t in data[1::2]]
        return cls(tuple(worlds), tuple(labels))


def label_sets(m: Model, labels) -> dict:
    memo = {}
    for psi in set(labels):
        truth_sets(m, psi, memo)
    return memo


def is_labeled_path(m: Model, path: LabeledPath) -> bool:
    ext = label_sets(m, path.labels)
    succ = m.frame.succ
    return all(
        0 <= u < m.size and succ[u] >> v & 1 and ext[psi] >> v & 1
        for u, psi, v in zip(path.worlds, path.labels, path.worlds[1:])
    ) and 0 <= path.worlds[0] < m.size


def is_optimal(m: Model, path: LabeledPath) -> bool:
    """Every step lands in max(R(u_k) & [psi_k])."""
    if not is_labeled_path(m, path):
        return False
    ext = label_sets(m, path.labels)
    succ = m.frame.succ
    return all(
        max_in(m.frame, succ[u] & ext[psi]) >> v & 1
        for u, psi, v in zip(path.worlds, path.labels, path.worlds[1:])
    )


def find_reduction(m: Model, path: LabeledPath):
    """Least ``(k, k2)`` with ``k2 <= k < length`` and u_k2 in R(u_k) & [psi_k].

    Returns None when the path is irreducible.
    """
    if not is_labeled_path(m, path):
        raise PreconditionError("not a labeled path in the model")
    ext = label_sets(m, path.labels)
    succ = m.frame.succ
    seen = 0
    for k, (u, psi) in enumerate(zip(path.worlds, path.labels)):
        seen |= 1 << u
        hits = succ[u] & ext[psi] & seen
        if hits:
            for k2 in range(k + 1):
                if hits >> path.worlds[k2] & 1:
                    return k, k2
    return None


def _check_grid(frame: Frame, n: int, lines, need: int, check_frame: bool):
    if n < 1:
        raise PreconditionError("n must be at least 1")
    if check_frame and not is_lambda_frame(frame, logic("K4_sigma", n=n)):
        raise PreconditionError(f"frame is not a K4_sigma[{n}]-frame")
    if len(lines) < need:
        raise PreconditionError(f"need at least {need} lines, got {len(lines)}")
    succ = frame.succ
    for i, line in enumerate(lines):
        if len(line) != n + 1:
            raise PreconditionError(f"line {i} has length {len(line) - 1}, expected {n}")
        for j in range(n):
            if not succ[line[j]] >> line[j + 1] & 1:
                raise PreconditionError(f"line {i} is broken at step {j}")
    rt = closure(frame).refl_trans
    for i in range(len(lines) - 1):
        if not rt[lines[i][n]] >> lines[i + 1][0] & 1:
            raise PreconditionError(f"line {i} does not reach line {i + 1} (R* connectivity)")


def find_zigzag_link(frame: Frame, n: int, paths: Sequence[Sequence[int]],
                     check_frame: bool = True):
    """Least ``(i, i2, j)`` with ``i < i2`` and ``u^i_j R u^{i2}_{j+1}``.

    ``paths`` holds at least n^n + 1 connected lines of length n on a
    K4_<><>sigma_n frame.
    """
    lines = [tuple(p) for p in paths]
    _check_grid(frame, n, lines, n ** n + 1, check_frame)
    succ = frame.succ
    for i in range(len(lines)):
        for i2 in range(i + 1, len(lines)):
            for j in range(n):
                if succ[lines[i][j]] >> lines[i2][j + 1] & 1:
                    return i, i2, j
    raise LinkNotFound("no zigzag link in a grid that satisfies every premise")


def grid_link(m: Model, n: int, labeled_paths: Sequence[LabeledPath],
              psi_size: int | None = None, check_frame: bool = True):
    """Least ``(i, i2, j)`` with ``u^{i2}_{j+1} in R(u^i_j) & [psi^i_j]``.

    Needs at least M + 1 lines, M = n^n * psi_size^n; ``psi_size`` defaults
    to the number of distinct labels in the grid.
    """
    labels = {psi for p in labeled_paths for psi in p.labels}
    psi_size = psi_size or max(1, len(labels))
    need = bounds(n, psi_size).M + 1
    _check_grid(m.frame, n, [p.worlds for p in labeled_paths], need, check_frame)
    for i, p in enumerate(labeled_paths):
        if not is_labeled_path(m, p):
            raise PreconditionError(f"line {i} is not a labeled path")
    ext = label_sets(m, labels)
    succ = m.frame.succ
    for i, p in enumerate(labeled_paths):
        for i2 in range(i + 1, len(labeled_paths)):
            q = labeled_paths[i2]
            for j in range(n):
                target = q.worlds[j + 1]
                if succ[p.worlds[j]] >> target & 1 and ext[p.labels[j]] >> target & 1:
                    return i, i2, j
    raise LinkNotFound("no labeled link in a grid that satisfies every premise")


def grid_link_pigeonhole(m: Model, n: int, labeled_paths: Sequence[LabeledPath],
                         check_frame: bool = True):
    """A labeled link found the constructive way.

    Lines with equal label vectors are grouped; the first group to reach
    n^n + 1 lines is handed to :func:`find_zigzag_link`, and the frame link
    it returns is also a labeled link because both lines carry the same
    labels.
    """
    groups: dict = {}
    need = n ** n + 1
    for i, p in enumerate(labeled_paths):
        members = groups.setdefault(p.labels, [])
        members.append(i)
        if len(members) == need:
            sub = [labeled_paths[k].worlds for k in members]
            a, b, j = find_zigzag_link(m.frame, n, sub, check_frame)
            return members[a], members[b], j
    raise PreconditionError(f"no label vector repeats {need} times")


def greedy_optimal_path(m: Model, start: int, labels: Sequence[Formula], length: int) -> LabeledPath:
    """Extend from ``start`` by the lowest world of max(R(u) & [psi]).

    Labels cycle round-robin.  Stops early when no successor satisfies the
    current label.
    """
    labels = sorted(set(labels), key=formula_sort_key) if isinstance(labels, (set, frozenset)) else list(labels)
    ext = label_sets(m, labels)
    succ = m.frame.succ
    worlds, used = [start], []
    for k in range(length):
        psi = labels[k % len(labels)]
        best = max_in(m.frame, succ[worlds[-1]] & ext[psi])
        if not best:
            break
        worlds.append((best & -best).bit_length() - 1)
        used.append(psi)
    return LabeledPath(tuple(worlds), tuple(used))


def seq_out_index(frame: Frame, path: LabeledPath, l: int, m_bound: int, n: int):
    """Least k <= l(M-1)+n with u_{k+l} R+ u_k, or None."""
    trans = closure(frame).trans
    w = path.worlds
    for k in range(min(l * (m_bound - 1) + n, len(w) - 1 - l) + 1):
        if trans[w[k + l]] >> w[k] & 1:
            return k
    return None


def longest_irreducible_optimal(m: Model, labels: Sequence[Formula], start: int,
                                cap: int) -> LabeledPath:
    """Longest irreducible optimal path from ``start`` (length at most ``cap``).

    Depth-first over every label choice and every maximal witness.  A
    reducible prefix makes every extension reducible, so such branches are
    cut as soon as they appear.
    """
    labels = list(dict.fromkeys(labels))
    ext = label_sets(m, labels)
    succ = m.frame.succ
    steps = {}
    best = LabeledPath((start,), ())
    worlds, used = [start], []

    def options(u, i):
        key = (u, i)
        if key not in steps:
            cand = succ[u] & ext[labels[i]]
            steps[key] = (cand, list(iter_bits(max_in(m.frame, cand))))
        return steps[key]

    def go(seen):
        nonlocal best
        if len(used) > best.length:
            best = LabeledPath(tuple(worlds), tuple(used))
        if len(used) >= cap:
            return True
        u = worlds[-1]
        for i, psi in enumerate(labels):
            cand, nxt = options(u, i)
            if cand & seen:
                continue          # u_k' in R(u_k) & [psi_k] for some k' <= k
            for v in nxt:
                worlds.append(v)
                used.append(psi)
                done = go(seen | 1 << v)
                worlds.pop()
                used.pop()
                if done:
                    return True
        return False

    go(1 << start)
    return best
