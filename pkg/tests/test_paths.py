import itertools

import numpy as np
import pytest

from checks import random_grid
from conftest import CHAIN3, CYCLE2
from pretrans.decide import random_lambda_frame
from pretrans.formula import TOP, Dia, P, Q, neg, parse
from pretrans.kripke import Frame, Model, closure, members, skeleton
from pretrans.paths import (LabeledPath, LinkNotFound, PreconditionError, bounds,
                            find_reduction, find_zigzag_link, greedy_optimal_path,
                            grid_link, grid_link_pigeonhole, is_labeled_path,
                            is_optimal, longest_irreducible_optimal, seq_out_index)
from pretrans.validity import logic

TRANS3 = Frame.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def all_reductions(m, path):
    """Every (k, k2) with k2 <= k < m and u_k2 in R(u_k) & [psi_k], by definition."""
    out = []
    for k in range(path.length):
        for k2 in range(k + 1):
            u, v, psi = path.worlds[k], path.worlds[k2], path.labels[k]
            if m.frame.has_edge(u, v) and _holds(m, psi, v):
                out.append((k, k2))
    return out


def _holds(m, psi, w):
    from pretrans.kripke import evaluate
    return bool(evaluate(m, psi) >> w & 1)


def test_bounds_examples():
    b = bounds(1, 1)
    assert (b.N, b.M, b.C_k4, b.C_gl) == (1, 1, 3, 2)
    b = bounds(2, 2)
    assert (b.N, b.M, b.C_k4, b.C_gl) == (4, 16, 546, 34)
    b = bounds(1, 3)
    assert (b.M, b.C_k4) == (3, 13)
    for bad in [(0, 1), (1, 0)]:
        with pytest.raises(ValueError):
            bounds(*bad)


def test_reduction_examples():
    chain = Model(Frame.from_edges(2, [(0, 1)]))
    assert find_reduction(chain, LabeledPath((0, 1), (TOP,))) is None
    cyc = Model(CYCLE2)
    assert find_reduction(cyc, LabeledPath((0, 1, 0, 1), (TOP, TOP, TOP))) == (1, 0)
    refl = Model(Frame.from_edges(2, [(0, 1), (1, 1)]), {"p0": [1]})
    assert find_reduction(refl, LabeledPath((0, 1), (P,))) is None
    assert find_reduction(refl, LabeledPath((0, 1, 1), (P, P))) == (1, 1)
    with pytest.raises(PreconditionError):
        find_reduction(chain, LabeledPath((1, 0), (TOP,)))


def test_reduction_is_least_witness(rng):
    labels = [TOP, P, neg(P), Dia(P)]
    for _ in range(300):
        size = int(rng.integers(1, 6))
        f = Frame.from_matrix(rng.random((size, size)) < 0.5)
        m = Model(f, {"p0": int(rng.integers(1 << size))})
        w = [int(rng.integers(size))]
        used = []
        for _ in range(int(rng.integers(1, 8))):
            choices = [(psi, v) for psi in labels for v in members(f.succ[w[-1]])
                       if _holds(m, psi, v)]
            if not choices:
                break
            psi, v = choices[int(rng.integers(len(choices)))]
            used.append(psi)
            w.append(v)
        path = LabeledPath(tuple(w), tuple(used))
        assert is_labeled_path(m, path)
        expected = all_reductions(m, path)
        assert find_reduction(m, path) == (min(expected) if expected else None)


def test_optimality():
    m = Model(TRANS3, {"p0": [1, 2]})
    assert is_optimal(m, LabeledPath((0, 2), (P,)))
    assert not is_optimal(m, LabeledPath((0, 1), (P,)))
    g = greedy_optimal_path(m, 0, [P], 5)
    assert g.worlds == (0, 2) and is_optimal(m, g)


def test_path_json_roundtrip():
    p = LabeledPath((0, 1, 2), (P, parse("<>p0 & p1")))
    data = p.to_json()
    assert data == [0, "p0", 1, "<>p0 & p1", 2]
    assert LabeledPath.from_json(data) == p
    with pytest.raises(ValueError):
        LabeledPath.from_json([0, "p0"])


def test_zigzag_transitive_example():
    # u0_0 -> u0_1 R* u1_0 -> u1_1 on a transitive chain
    f = Frame(4, [0b1110, 0b1100, 0b1000, 0])
    assert find_zigzag_link(f, 1, [(0, 1), (2, 3)]) == (0, 1, 0)


def test_zigzag_degenerate_single_cluster():
    full = Frame(3, [0b111] * 3)
    i, i2, j = find_zigzag_link(full, 2, [(0, 1, 2)] * 5)
    assert (i, i2) == (0, 1)


def test_zigzag_preconditions():
    with pytest.raises(PreconditionError, match="K4_sigma"):
        find_zigzag_link(CYCLE2, 1, [(0, 1), (0, 1)])
    with pytest.raises(PreconditionError, match="broken"):
        find_zigzag_link(TRANS3, 1, [(0, 1), (2, 0)])
    with pytest.raises(PreconditionError, match="connectivity"):
        find_zigzag_link(TRANS3, 1, [(1, 2), (0, 1)])
    with pytest.raises(PreconditionError, match="at least"):
        find_zigzag_link(TRANS3, 1, [(0, 1)])


def verify_link(frame, grid, link):
    i, i2, j = link
    assert i < i2
    assert frame.rel[grid[i][j], grid[i2][j + 1]]


@pytest.mark.parametrize("n", [1, 2])
def test_zigzag_link_on_random_grids(n, rng):
    spec = logic("K4_sigma", n=n)
    hits = 0
    for _ in range(80):
        f = random_lambda_frame(spec, int(rng.integers(2, 7)), rng)
        grid = f and random_grid(f, n, n ** n + 1, rng)
        if not grid:
            continue
        link = find_zigzag_link(f, n, grid)
        verify_link(f, grid, link)
        brute = [(i, i2, j) for i in range(len(grid)) for i2 in range(i + 1, len(grid))
                 for j in range(n) if f.rel[grid[i][j], grid[i2][j + 1]]]
        assert link == min(brute)
        hits += 1
    assert hits > 20


def random_labeled_grid(m, n, lines, labels, rng):
    rt = closure(m.frame).refl_trans
    from pretrans.kripke import evaluate
    ext = {psi: evaluate(m, psi) for psi in labels}
    grid, start = [], int(rng.integers(m.size))
    for _ in range(lines):
        w, used = [start], []
        for _ in range(n):
            choices = [(psi, v) for psi in labels for v in members(m.frame.succ[w[-1]] & ext[psi])]
            if not choices:
                return None
            psi, v = choices[int(rng.integers(len(choices)))]
            w.append(v)
            used.append(psi)
        grid.append(LabeledPath(tuple(w), tuple(used)))
        reach = members(rt[w[-1]])
        start = reach[int(rng.integers(len(reach)))]
    return grid


@pytest.mark.parametrize("n,labels", [(1, [TOP]), (1, [P, neg(P)]), (2, [TOP]), (2, [P, neg(P)])])
def test_grid_link_direct_and_pigeonhole_agree(n, labels, rng):
    spec = logic("K4_sigma", n=n)
    need = bounds(n, len(labels)).M + 1
    done = 0
    for _ in range(60):
        size = int(rng.integers(2, 6))
        f = random_lambda_frame(spec, size, rng)
        if f is None:
            continue
        m = Model(f, {"p0": int(rng.integers(1 << size))})
        grid = random_labeled_grid(m, n, need, labels, rng)
        if grid is None:
            continue
        direct = grid_link(m, n, grid, psi_size=len(labels))
        i, i2, j = grid_link_pigeonhole(m, n, grid)
        for a, b, c in (direct, (i, i2, j)):
            assert a < b
            v = grid[b].worlds[c + 1]
            assert f.rel[grid[a].worlds[c], v] and _holds(m, grid[a].labels[c], v)
        assert direct <= (i, i2, j)
        done += 1
    assert done > 10


def test_grid_link_single_label_is_zigzag():
    m = Model(TRANS3)
    grid = [LabeledPath((0, 1), (TOP,)), LabeledPath((1, 2), (TOP,))]
    assert grid_link(m, 1, grid) == find_zigzag_link(TRANS3, 1, [g.worlds for g in grid])


def test_irreducible_paths_visit_distinct_worlds(rng):
    for _ in range(100):
        size = int(rng.integers(1, 6))
        f = Frame.from_matrix(rng.random((size, size)) < 0.4)
        m = Model(f, {"p0": int(rng.integers(1 << size))})
        p = longest_irreducible_optimal(m, [TOP, P], 0, 50)
        assert find_reduction(m, p) is None and is_optimal(m, p)
        assert len(set(p.worlds)) == len(p.worlds)


@pytest.mark.parametrize("n", [1, 2])
def test_seq_out_on_generated_paths(n, rng):
    spec = logic("K4_sigma", n=n)
    labels = [TOP, P]
    m_bound = bounds(n, len(labels)).M
    l = n
    checked = 0
    for _ in range(60):
        size = int(rng.integers(2, 7))
        f = random_lambda_frame(spec, size, rng)
        if f is None:
            continue
        m = Model(f, {"p0": int(rng.integers(1 << size))})
        path = greedy_optimal_path(m, int(rng.integers(size)), labels, l * m_bound + n)
        if path.length < l * m_bound + n:
            continue
        k = seq_out_index(f, path, l, m_bound, n)
        assert k is not None and k <= l * (m_bound - 1) + n
        checked += 1
    assert checked > 5


@pytest.mark.parametrize("n", [1, 2])
def test_seq_in_paths_inside_one_cluster(n, rng):
    spec = logic("K4_sigma", n=n)
    labels = [TOP, P, neg(P)]
    length = n * (bounds(n, len(labels)).M + 1)
    checked = 0
    for _ in range(60):
        size = int(rng.integers(2, 7))
        f = random_lambda_frame(spec, size, rng)
        if f is None:
            continue
        m = Model(f, {"p0": int(rng.integers(1 << size))})
        from pretrans.kripke import evaluate
        ext = {psi: evaluate(m, psi) for psi in labels}
        sk = skeleton(f)
        for cluster in sk.clusters:
            start = members(cluster)[0]
            w, used = [start], []
            while len(used) < length:
                choices = [(psi, v) for psi in labels
                           for v in members(f.succ[w[-1]] & ext[psi] & cluster)]
                if not choices:
                    break
                psi, v = choices[int(rng.integers(len(choices)))]
                w.append(v)
                used.append(psi)
            if len(used) == length:
                assert find_reduction(m, LabeledPath(tuple(w), tuple(used))) is not None
                checked += 1
    assert checked > 5
