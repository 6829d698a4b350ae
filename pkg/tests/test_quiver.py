import json
import math
import random

import pytest

from ncinv.exactalg import ExactMatrix, FieldSpec, ShapeMismatch, kronecker, rank
from ncinv.nullcone import NOT_IN_NULLCONE, in_nullcone
from ncinv.pencil import Pencil
from ncinv.quiver import (
    SEMISTABLE,
    UNSTABLE_WHP,
    Arrow,
    CyclicQuiver,
    NonzeroPairing,
    Quiver,
    build_semi_pencil,
    is_semistable,
    kronecker_setup,
    paths,
    pq_full_test,
    quiver_from_json,
    quiver_to_json,
    semi_pencil_size,
    semi_pencil_vars,
)

from conftest import mat


def low_rank(F, rows, cols, r, rng):
    if r == 0:
        return ExactMatrix.zeros(F, rows, cols)
    return ExactMatrix.random(F, rows, r, rng) @ ExactMatrix.random(F, r, cols, rng)


def test_paths_kronecker():
    Q = Quiver.kronecker(3)
    ps = paths(Q, "x", "y")
    assert [p.arrows[0].name for p in ps] == ["a1", "a2", "a3"]
    assert all(len(p) == 1 for p in ps)
    assert paths(Q, "y", "x") == []
    assert len(paths(Q, "x", "x")) == 1 and len(paths(Q, "x", "x")[0]) == 0


def test_paths_chain_and_diamond():
    chain = Quiver(["x", "y", "z"], [("a", "x", "y"), ("b", "y", "z")])
    (p,) = paths(chain, "x", "z")
    assert [a.name for a in p.arrows] == ["a", "b"]
    diamond = Quiver(["s", "l", "r", "t"], [("a", "s", "l"), ("b", "s", "r"), ("c", "l", "t"), ("e", "r", "t"), ("f", "s", "t")])
    assert [[a.name for a in p.arrows] for p in paths(diamond, "s", "t")] == [["a", "c"], ["b", "e"], ["f"]]


def test_path_evaluation_order(F, rng):
    chain = Quiver(["x", "y", "z"], [("a", "x", "y"), ("b", "y", "z")])
    Va, Vb = ExactMatrix.random(F, 3, 2, rng), ExactMatrix.random(F, 1, 3, rng)
    (p,) = paths(chain, "x", "z")
    assert p.evaluate({"a": Va, "b": Vb}, {"x": 2, "y": 3, "z": 1}, F) == Vb @ Va


def test_cyclic_quiver_rejected():
    with pytest.raises(CyclicQuiver):
        Quiver(["x", "y"], [("a", "x", "y"), ("b", "y", "x")])
    with pytest.raises(CyclicQuiver):
        Quiver(["x"], [("loop", "x", "x")])


def test_bad_quiver_inputs():
    with pytest.raises(ValueError):
        Quiver(["x", "x"], [])
    with pytest.raises(ValueError):
        Quiver(["x"], [("a", "x", "z")])
    with pytest.raises(ValueError):
        Quiver(["x", "y"], [("a", "x", "y"), ("a", "x", "y")])


def test_nonzero_pairing(F):
    Q = Quiver.kronecker(1)
    with pytest.raises(NonzeroPairing):
        build_semi_pencil(Q, {"x": 1, "y": 2}, {"x": 1, "y": -1}, {"a1": ExactMatrix.zeros(F, 2, 1)}, F)


def test_rep_shape_checked(F):
    Q = Quiver.kronecker(1)
    with pytest.raises(ShapeMismatch):
        build_semi_pencil(Q, {"x": 1, "y": 1}, {"x": 1, "y": -1}, {"a1": ExactMatrix.zeros(F, 2, 1)}, F)
    with pytest.raises(ShapeMismatch):
        build_semi_pencil(Q, {"x": 1, "y": 1}, {"x": 1, "y": -1}, {}, F)


def test_semi_pencil_kronecker_recovers_tuple(F, rng):
    Xs = [ExactMatrix.random(F, 3, 3, rng) for _ in range(2)]
    Q = Quiver.kronecker(2)
    P = build_semi_pencil(Q, {"x": 3, "y": 3}, {"x": 1, "y": -1}, {"a1": Xs[0], "a2": Xs[1]}, F)
    assert list(P.coeffs) == Xs


def test_semi_pencil_scalar_example(F):
    Q = Quiver.kronecker(2)
    P = build_semi_pencil(Q, {"x": 1, "y": 1}, {"x": 1, "y": -1}, {"a1": mat(F, [[4]]), "a2": mat(F, [[7]])}, F)
    assert P.coeffs == (mat(F, [[4]]), mat(F, [[7]]))


@pytest.mark.parametrize("p,q", [(1, 2), (2, 3), (2, 2), (3, 2)])
def test_semi_pencil_pq_size(F, rng, p, q):
    Xs = [ExactMatrix.random(F, p, q, rng) for _ in range(2)]
    Q, dim, weight, rep = kronecker_setup(Xs)
    P = build_semi_pencil(Q, dim, weight, rep, F)
    assert P.rows == P.cols == math.lcm(p, q)
    assert P.vars == 2 * weight["x"] * -weight["y"]


def test_var_count_invariant(F, rng):
    Q = Quiver(["s", "l", "r", "t"], [("a", "s", "l"), ("b", "s", "r"), ("c", "l", "t"), ("e", "r", "t"), ("f", "s", "t")])
    dim = {"s": 2, "l": 1, "r": 2, "t": 2}
    weight = {"s": 2, "l": 2, "r": 0, "t": -3}
    assert sum(weight[v] * dim[v] for v in dim) == 0
    rep = {a.name: ExactMatrix.random(F, dim[a.head], dim[a.tail], rng) for a in Q.arrows}
    P = build_semi_pencil(Q, dim, weight, rep, F)
    assert P.rows == P.cols == semi_pencil_size(Q, dim, weight) == 6
    # s: 3 paths to t, l: 1 path to t
    assert P.vars == semi_pencil_vars(Q, weight) == 2 * 3 * 3 + 2 * 1 * 3


def test_fresh_variables_per_block(F, rng):
    Q = Quiver.kronecker(1)
    V = ExactMatrix.random(F, 1, 1, rng)
    P = build_semi_pencil(Q, {"x": 1, "y": 1}, {"x": 2, "y": -2}, {"a1": V}, F)
    assert P.vars == 4
    supports = [{(i, j) for i in range(2) for j in range(2) if X[i, j] != 0} for X in P.coeffs]
    assert all(len(s) == 1 for s in supports)
    assert len(set().union(*supports)) == 4


def test_semistable_examples(F):
    Q = Quiver.kronecker(2)
    dim, w = {"x": 1, "y": 1}, {"x": 1, "y": -1}
    v = is_semistable(Q, dim, w, {"a1": mat(F, [[1]]), "a2": mat(F, [[0]])}, F)
    assert v.status == SEMISTABLE and v.d == 1
    v = is_semistable(Q, dim, w, {"a1": mat(F, [[0]]), "a2": mat(F, [[0]])}, F)
    assert v.status == UNSTABLE_WHP


def test_zero_weight_and_no_paths(F):
    Q = Quiver.kronecker(1)
    v = is_semistable(Q, {"x": 1, "y": 1}, {"x": 0, "y": 0}, {"a1": mat(F, [[0]])}, F)
    assert v.status == SEMISTABLE and v.pencil.rows == 0
    two = Quiver(["x", "y"], [])
    v = is_semistable(two, {"x": 1, "y": 1}, {"x": 1, "y": -1}, {}, F)
    assert v.status == UNSTABLE_WHP and v.pencil.vars == 0


@pytest.mark.parametrize("seed", range(12))
def test_theta_equivalence(F, seed):
    rng = random.Random(seed)
    n, m = rng.randint(1, 3), rng.randint(1, 3)
    Xs = [low_rank(F, n, n, rng.randint(0, n), rng) for _ in range(m)]
    Q, dim, weight, rep = kronecker_setup(Xs)
    semi = is_semistable(Q, dim, weight, rep, F, seed=seed)
    raw = in_nullcone(Pencil.linear(Xs), seed=seed)
    assert semi.semistable == (raw.status == NOT_IN_NULLCONE)


@pytest.mark.parametrize("seed", range(6))
def test_weight_scaling_agreement(F, seed):
    rng = random.Random(100 + seed)
    Q = Quiver(["x", "y", "z"], [("a", "x", "y"), ("b", "y", "z"), ("c", "x", "z")])
    dim = {"x": 1, "y": 2, "z": 1}
    weight = {"x": 1, "y": 0, "z": -1}
    rep = {
        "a": low_rank(F, 2, 1, rng.randint(0, 1), rng),
        "b": low_rank(F, 1, 2, rng.randint(0, 1), rng),
        "c": low_rank(F, 1, 1, rng.randint(0, 1), rng),
    }
    once = is_semistable(Q, dim, weight, rep, F, seed=seed)
    P2 = build_semi_pencil(Q, dim, {v: 2 * s for v, s in weight.items()}, rep, F)
    twice = in_nullcone(P2, seed=seed)
    assert once.semistable == (twice.status == NOT_IN_NULLCONE)


def test_pq_single_vector_is_unstable(F):
    # SL_2 has no nonconstant invariant on a single vector
    v = pq_full_test([mat(F, [[1, 0]])])
    assert v.status == UNSTABLE_WHP
    assert v.pencil.rows == 2
    v = pq_full_test([mat(F, [[1, 0]]), mat(F, [[0, 1]])])
    assert v.status == SEMISTABLE and v.d == 1


def test_pq_zero_tuple_unstable(F):
    v = pq_full_test([ExactMatrix.zeros(F, 2, 3)] * 2)
    assert v.status == UNSTABLE_WHP
    assert v.metadata["lcm"] == 6 and v.metadata["blowup_bound"] == 5
    assert v.metadata["generation_degree_bound_char0"] == 36**2


def test_pq_square_is_nullcone(F, rng):
    Xs = [ExactMatrix.random(F, 2, 2, rng) for _ in range(2)]
    assert pq_full_test(Xs).semistable
    assert in_nullcone(Pencil.linear(Xs)).status == NOT_IN_NULLCONE


def test_pq_shape_errors(F):
    with pytest.raises(ShapeMismatch):
        pq_full_test([])
    with pytest.raises(ShapeMismatch):
        pq_full_test([ExactMatrix.zeros(F, 1, 2), ExactMatrix.zeros(F, 2, 1)])


def rectangular_oracle(Xs, trials=24, seed=0):
    """Full rank of sum X_a (x) T_a, T_a of size (q' d) x (p' d), for some d <= lcm - 1."""
    F = Xs[0].field
    p, q = Xs[0].shape
    e = math.gcd(p, q)
    pp, qq = p // e, q // e
    top = max(1, math.lcm(p, q) - 1)
    rng = random.Random(seed)
    for d in range(1, top + 1):
        for _ in range(trials):
            M = None
            for X in Xs:
                term = kronecker(X, ExactMatrix.random(F, qq * d, pp * d, rng))
                M = term if M is None else M + term
            assert M.rows == M.cols
            if rank(M) == M.rows:
                return True
    return False


@pytest.mark.parametrize("p,q,seed", [(1, 2, 0), (1, 2, 1), (2, 3, 2), (2, 3, 3)])
def test_pq_matches_rectangular_oracle(F, p, q, seed):
    rng = random.Random(seed)
    m = rng.randint(1, 3)
    Xs = [low_rank(F, p, q, rng.randint(0, min(p, q)), rng) for _ in range(m)]
    assert pq_full_test(Xs, seed=seed).semistable == rectangular_oracle(Xs, seed=seed)


def test_quiver_json_round_trip(F, rng):
    Q = Quiver(["x", "y", "z"], [("a", "x", "y"), ("b", "y", "z")])
    dim = {"x": 1, "y": 2, "z": 1}
    rep = {"a": ExactMatrix.random(F, 2, 1, rng), "b": ExactMatrix.random(F, 1, 2, rng)}
    weight = {"x": 1, "y": 0, "z": -1}
    obj = json.loads(json.dumps(quiver_to_json(Q, dim, weight, rep)))
    Q2, dim2, weight2, rep2 = quiver_from_json(obj, F)
    assert Q2.to_json() == Q.to_json() and dim2 == dim and weight2 == weight and rep2 == rep
    v = is_semistable(Q2, dim2, weight2, rep2, F)
    assert v.semistable == (rep["b"] @ rep["a"] != ExactMatrix.zeros(F, 1, 1))


def test_arrow_objects_accepted():
    Q = Quiver(["x", "y"], [Arrow("a", "x", "y")])
    assert Q.out_arrows("x") == [Arrow("a", "x", "y")]
