import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CHAIN3, CYCLE2, CYCLE3, frames, gammas_small, positive_formulas
from pretrans.decide import enumerate_frames, random_semisubframe
from pretrans.formula import (TOP, Dia, P, SchemeId, conj, dia_k, parse, scheme,
                              sigma)
from pretrans.kripke import Frame, Model, evaluate, frame_class_checks, subframe_relations
from pretrans.validity import (BudgetExceeded, LogicSpec, catalog_names,
                               is_lambda_frame, logic, min_p_sets, refute_bruteforce,
                               valid_axiom, valid_bruteforce)


def reps(max_size=4):
    for size in range(1, max_size + 1):
        yield from enumerate_frames(size, iso_reduce=True)


def brute_min_sets(frame, w, gamma):
    sats = [s for s in range(1 << frame.size)
            if evaluate(Model(frame, {"p0": s}), gamma) >> w & 1]
    return {s for s in sats if not any(t != s and t & ~s == 0 for t in sats)}


def test_bruteforce_examples():
    gl = parse("<>p0 -> <>(p0 & ~<>p0)")
    assert valid_bruteforce(Frame(1, [0]), gl)
    assert not valid_bruteforce(CYCLE2, scheme(SchemeId("Trans", n=1)))
    assert valid_bruteforce(CYCLE2, scheme(SchemeId("wTrans", n=1)))
    assert refute_bruteforce(CYCLE2, scheme(SchemeId("Trans", n=1))) == ({"p0": 0b01}, 0)


def test_bruteforce_budget():
    with pytest.raises(BudgetExceeded):
        valid_bruteforce(Frame(9, [0] * 9), parse("p0 & p1 & p2 -> p0"))


def test_min_sets_examples():
    assert set(min_p_sets(CYCLE3, 0, dia_k(P, 2))) == {0b100}
    assert set(min_p_sets(CHAIN3, 0, TOP)) == {0}
    assert len(min_p_sets(CHAIN3, 2, conj(P, Dia(P)))) == 0
    with pytest.raises(ValueError):
        min_p_sets(CHAIN3, 0, parse("<>~p0"))


@settings(max_examples=150)
@given(frames(max_size=4), positive_formulas(max_leaves=5), st.integers(0, 3))
def test_min_sets_match_bruteforce(f, gamma, w):
    w %= f.size
    got = set(min_p_sets(f, w, gamma))
    assert got == brute_min_sets(f, w, gamma)
    assert all(a == b or a & ~b for a in got for b in got)


def test_valid_axiom_examples():
    assert not valid_axiom(CYCLE3, SchemeId("A4", gamma=dia_k(P, 3)))
    assert not valid_bruteforce(CYCLE3, scheme(SchemeId("A4", gamma=dia_k(P, 3))))
    full = Frame(3, [0b111] * 3)
    for g in gammas_small():
        assert valid_axiom(full, SchemeId("A4", gamma=g))
    assert not valid_axiom(CYCLE2, SchemeId("ALob", beta=Dia(P)))


def test_is_lambda_frame_examples():
    assert is_lambda_frame(CHAIN3, logic("K4_sigma", n=2))
    assert not is_lambda_frame(Frame.from_edges(1, [(0, 0)]), logic("GL_sigma", n=1))
    assert is_lambda_frame(CYCLE3, logic("K4_1n", n=4))


def schemes_for_agreement():
    p = P
    gammas = [dia_k(p, 2), dia_k(conj(p, Dia(p)), 2), dia_k(p, 3), conj(dia_k(p, 2), dia_k(p, 3))]
    betas = [Dia(p), dia_k(p, 2), Dia(conj(p, Dia(p))), conj(Dia(p), Dia(TOP))]
    out = [SchemeId(name, n=n) for name in ("Trans", "wTrans", "ALobPlus", "AT_plus", "AB_plus")
           for n in (1, 2, 3)]
    out += [SchemeId(k, gamma=g) for k in ("A4", "Aw4") for g in gammas]
    out += [SchemeId("ALob", beta=b) for b in betas]
    out += [SchemeId("GLn", n=n) for n in (2, 3)] + [SchemeId("GL2variant")]
    return out


@pytest.mark.parametrize("sid", schemes_for_agreement(), ids=lambda s: s.describe())
def test_fast_path_agrees_with_bruteforce_up_to_three_worlds(sid):
    phi = scheme(sid)
    for size in (1, 2, 3):
        for f in enumerate_frames(size):
            assert valid_axiom(f, sid) == valid_bruteforce(f, phi), (f, sid)


@settings(max_examples=60, deadline=None)
@given(frames(min_size=4, max_size=4))
def test_fallback_schemes_consistent(f):
    for sid in (SchemeId("A3_plus", n=1), SchemeId("L2")):
        assert valid_axiom(f, sid) == valid_bruteforce(f, scheme(sid))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_n_transitivity_bridge_three_worlds(n):
    trans = scheme(SchemeId("Trans", n=n))
    for size in (1, 2, 3):
        for f in enumerate_frames(size):
            assert frame_class_checks(f, n).n_transitive == valid_bruteforce(f, trans)


@pytest.mark.parametrize("n", [1, 2])
def test_frame_level_inclusions(n):
    gl, k4, wk4 = logic("GL_sigma", n=n), logic("K4_sigma", n=n), logic("wK4_sigma", n=n)
    k4_next = logic("K4_sigma", n=n + 1)
    for f in reps():
        if is_lambda_frame(f, gl):
            assert is_lambda_frame(f, k4)
        if is_lambda_frame(f, k4):
            assert is_lambda_frame(f, wk4)
            assert is_lambda_frame(f, k4_next)
            assert frame_class_checks(f, n).n_transitive
        if is_lambda_frame(f, wk4):
            assert frame_class_checks(f, n + 1).n_transitive


@pytest.mark.parametrize("n", [1, 2])
def test_gl_frames_are_k4_frames_with_plus_lob(n):
    gl, k4 = logic("GL_sigma", n=n), logic("K4_sigma", n=n)
    plus = SchemeId("ALobPlus", n=n)
    for f in reps():
        assert is_lambda_frame(f, gl) == (is_lambda_frame(f, k4) and valid_axiom(f, plus))


def test_catalog_resolves():
    for name in catalog_names():
        spec = logic(name, n=3, gamma=dia_k(P, 2), beta=Dia(P))
        assert spec.pretrans_degree >= 1
        assert LogicSpec.from_json(spec.to_json()) == spec
    assert logic("GLn", n=3).axioms[0] == SchemeId("ALob", beta=dia_k(P, 2))
    with pytest.raises(ValueError):
        logic("K4_1n")
    with pytest.raises(ValueError):
        logic("nonsense")


def test_logic_spec_json_from_user():
    spec = LogicSpec.from_json('{"name": "mine", "axioms": [{"scheme": "A4", "gamma": "<><>p0"}], "n": 2, "cwf": false}')
    assert spec.axioms == (SchemeId("A4", gamma=dia_k(P, 2)),)
    assert is_lambda_frame(Frame.from_edges(2, [(0, 1)]), spec)


def test_semisubframe_heredity_sampled(rng):
    specs = [logic("K4_gamma", gamma=g) for g in gammas_small()]
    specs += [logic("wK4_gamma", gamma=g) for g in gammas_small()]
    specs += [logic("GL_beta", beta=b) for b in (Dia(P), Dia(conj(P, Dia(P))))]
    from pretrans.decide import random_lambda_frame
    for i in range(150):
        spec = specs[i % len(specs)]
        big = random_lambda_frame(spec, int(rng.integers(2, 7)), rng)
        if big is None:
            continue
        small, emb = random_semisubframe(big, rng)
        assert subframe_relations(small, big, emb).semisubframe
        assert is_lambda_frame(small, spec), (big, small, emb, spec.name)
