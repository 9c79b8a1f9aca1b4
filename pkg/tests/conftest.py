import numpy as np
import pytest
from hypothesis import strategies as st

from pretrans.formula import BOT, TOP, Dia, Imp, Var, conj, dia_k, disj
from pretrans.kripke import Frame, Model

VARS = [Var("p0"), Var("p1")]


def formulas(max_leaves=12, names=VARS):
    leaves = st.sampled_from(list(names) + [BOT, TOP])

    def extend(children):
        return st.one_of(
            st.builds(Imp, children, children),
            st.builds(Dia, children),
            st.builds(conj, children, children),
            st.builds(disj, children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def positive_formulas(max_leaves=6, p=Var("p0")):
    """Strictly positive in p: p, top, &, <>."""
    leaves = st.sampled_from([p, TOP])

    def extend(children):
        return st.one_of(st.builds(conj, children, children), st.builds(Dia, children))

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@st.composite
def frames(draw, min_size=1, max_size=4):
    size = draw(st.integers(min_size, max_size))
    return Frame.from_code(size, draw(st.integers(0, (1 << size * size) - 1)))


@st.composite
def models(draw, min_size=1, max_size=5, names=("p0", "p1")):
    f = draw(frames(min_size, max_size))
    val = {n: draw(st.integers(0, (1 << f.size) - 1)) for n in names}
    return Model(f, val)


CHAIN3 = Frame.from_edges(3, [(0, 1), (1, 2)])
CYCLE2 = Frame.from_edges(2, [(0, 1), (1, 0)])
CYCLE3 = Frame.from_edges(3, [(0, 1), (1, 2), (2, 0)])


def gammas_small():
    """Admissible antecedents used across tests: <>^2 p, <>^2(p & <>p), <>^3 p."""
    p = Var("p0")
    return [dia_k(p, 2), dia_k(conj(p, Dia(p)), 2), dia_k(p, 3)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_formula(rng, max_depth=3, names=("p0", "p1"), size=10):
    """Random formula with modal depth at most ``max_depth``, biased towards <>."""
    if size <= 1 or rng.random() < 0.15:
        pick = int(rng.integers(len(names) + 2))
        return Var(names[pick % len(names)]) if pick < len(names) + 1 else TOP
    kind = int(rng.integers(6))
    if kind <= 2 and max_depth > 0:
        return Dia(random_formula(rng, max_depth - 1, names, size - 1))
    if kind == 3:
        return Imp(random_formula(rng, max_depth, names, size // 2),
                   random_formula(rng, max_depth, names, size // 2))
    if kind == 4:
        return conj(random_formula(rng, max_depth, names, size // 2),
                    random_formula(rng, max_depth, names, size // 2))
    return disj(random_formula(rng, max_depth, names, size // 2),
                random_formula(rng, max_depth, names, size // 2))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
