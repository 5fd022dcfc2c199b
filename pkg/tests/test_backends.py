"""Tape compilation and the two interpreter backends.

The tree-walking evaluator is the reference; the numpy and Cython tape
interpreters must agree with it and with each other (bitwise on arithmetic,
to an ulp on transcendentals).
"""

import numpy as np
import pytest
from conftest import random_polynomial, random_tree

import degenlag.symbolic.engine as engine
from degenlag.errors import DomainError
from degenlag.symbolic import (
    Chart,
    compile_tape,
    con,
    coord,
    differentiate,
    div,
    eval_many,
    eval_many_python,
    eval_one,
    evaluate,
    log,
    parse_expr,
    point_map,
    power,
    sqrt,
)

NAMES = ("q1", "q2", "v1", "v2")

needs_compiled = pytest.mark.skipif(
    engine.BACKEND != "compiled", reason="compiled backend not built"
)


def test_tape_matches_tree_walk(rng):
    ch = Chart.tangent(2)
    e = parse_expr("sin(q1)*q2^3 - exp(v1)/(1 + q2^2) + sqrt(q1^2 + 1)", ch)
    tape = compile_tape([e], NAMES)
    pts = rng.uniform(-2, 2, (50, 4))
    vals = eval_many(tape, pts)
    for k in range(50):
        ref = evaluate(e, point_map(NAMES, pts[k]))
        assert vals[k, 0] == pytest.approx(ref, rel=1e-13, abs=1e-13)


def test_multi_output_tape(rng):
    ch = Chart.tangent(2)
    e = parse_expr("q1*v2 + q2*v1", ch)
    grads = [differentiate(e, n) for n in NAMES]
    tape = compile_tape([e] + grads, NAMES)
    assert tape.n_outputs == 5
    pts = rng.uniform(-2, 2, (20, 4))
    vals = eval_many(tape, pts)
    assert np.allclose(vals[:, 0], pts[:, 0] * pts[:, 3] + pts[:, 1] * pts[:, 2])
    assert np.allclose(vals[:, 1], pts[:, 3])  # d/dq1 = v2


def test_random_trees_tape_vs_tree_walk(rng):
    for _ in range(40):
        e = random_tree(rng, list(NAMES), depth=4)
        tape = compile_tape([e], NAMES)
        pts = rng.uniform(-2, 2, (30, 4))
        vals = eval_many(tape, pts)[:, 0]
        for k in range(30):
            pm = point_map(NAMES, pts[k])
            try:
                ref = evaluate(e, pm)
            except DomainError:
                assert np.isnan(vals[k])
                continue
            if np.isnan(ref) or np.isinf(ref):
                continue
            assert vals[k] == pytest.approx(ref, rel=1e-12, abs=1e-12)


@needs_compiled
def test_backends_agree_bitwise_on_arithmetic(rng):
    from degenlag.symbolic import eval_many_compiled

    for _ in range(30):
        e = random_polynomial(rng, list(NAMES), depth=5)
        tape = compile_tape([e], NAMES)
        pts = rng.uniform(-2, 2, (200, 4))
        a = eval_many_python(tape, pts)
        b = eval_many_compiled(tape, pts)
        assert a.tobytes() == b.tobytes()


@needs_compiled
def test_backends_agree_on_transcendentals(rng):
    from degenlag.symbolic import eval_many_compiled

    for _ in range(30):
        e = random_tree(rng, list(NAMES), depth=4)
        tape = compile_tape([e], NAMES)
        pts = rng.uniform(-2, 2, (200, 4))
        a = eval_many_python(tape, pts)
        b = eval_many_compiled(tape, pts)
        assert np.array_equal(np.isnan(a), np.isnan(b))
        ok = ~np.isnan(a)
        np.testing.assert_allclose(a[ok], b[ok], rtol=1e-16, atol=5e-16)


def test_domain_violations_are_nan_in_batch():
    tape = compile_tape([div(con(1), coord("q1")), log(coord("q1")), sqrt(coord("q1")),
                         power(coord("q1"), -1)], ("q1",))
    pts = np.array([[0.0], [-1.0], [2.0]])
    vals = eval_many(tape, pts)
    assert np.isnan(vals[0, 0]) and np.isnan(vals[0, 3])  # 1/0, 0^-1
    assert np.isnan(vals[1, 1]) and np.isnan(vals[1, 2])  # log(-1), sqrt(-1)
    assert np.isnan(vals[0, 1])  # log(0) is a domain error, not -inf
    assert np.isfinite(vals[2]).all()


def test_nan_propagates_through_arithmetic():
    e = coord("q1") * log(coord("q2")) + con(1)
    tape = compile_tape([e], ("q1", "q2"))
    vals = eval_many(tape, np.array([[2.0, -1.0]]))
    assert np.isnan(vals[0, 0])


def test_deep_tree_compiles(rng):
    e = coord("q1")
    for _ in range(300):
        e = e + coord("q2")
    tape = compile_tape([e], ("q1", "q2"))
    out = eval_one(tape, np.array([1.0, 1.0]))
    assert out[0] == 301.0


def test_eval_one_and_shape_validation():
    tape = compile_tape([coord("q1") + coord("q2")], ("q1", "q2"))
    assert eval_one(tape, np.array([1.0, 2.0]))[0] == 3.0
    with pytest.raises(ValueError):
        eval_many(tape, np.zeros((3, 5)))


def test_unused_layout_names_are_fine():
    tape = compile_tape([coord("q1") ** 2], ("q1", "q2", "v1"))
    assert eval_one(tape, np.array([3.0, 99.0, -1.0]))[0] == 9.0


def test_layout_must_cover_free_coords():
    with pytest.raises(ValueError):
        compile_tape([coord("q1") + coord("zz")], ("q1",))
