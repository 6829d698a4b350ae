import random

import pytest

from ncinv.exactalg import ExactMatrix, FieldSpec, ShapeMismatch, det, rank
from ncinv.hardinstances import (
    PreconditionViolated,
    VerificationFailed,
    build_Fd,
    build_Nd,
    canonical_substitution,
    charpoly_kernel,
    kernel_basis,
    long_cycle,
    verify_hard_instance,
)
from ncinv.pencil import blowup_eval

from conftest import mat

SLOTS = {"I": 0, "A": 1, "B": 2, "C": 3}

# the 8 x 8 block display, one symbol per block ('.' is empty, '-' prefixes a sign)
F3_DISPLAY = [
    "I  .  .  .  .  B  .  .",
    "-A I  .  .  .  .  B  .",
    ".  -A .  .  .  .  .  B",
    ".  .  I  .  .  C  .  .",
    ".  .  -A I  .  .  C  .",
    ".  .  .  -A .  .  .  C",
    ".  .  .  .  I  A  .  .",
    ".  .  .  .  -A .  A  I",
]

F2_DISPLAY = [
    "I  B  .",
    "-A .  B",
    ".  A  I",
]


def coefficients_from_display(F, display, m):
    n = len(display)
    X = [[[0] * n for _ in range(n)] for _ in range(m)]
    for r, line in enumerate(display):
        for c, sym in enumerate(line.split()):
            if sym == ".":
                continue
            sign = -1 if sym.startswith("-") else 1
            X[SLOTS[sym.lstrip("-")]][r][c] = sign
    return [ExactMatrix.from_values(F, Xi) for Xi in X]


def test_Nd_scalar_example(F):
    a, b = 3, 5
    N = build_Nd(2, mat(F, [[a]]), [mat(F, [[b]])])
    assert N == mat(F, [[a * b, b], [a, 1]])
    assert det(N) == 0


def test_Nd_block_layout(F, rng):
    A = ExactMatrix.random(F, 2, 2, rng)
    B, C = ExactMatrix.random(F, 2, 2, rng), ExactMatrix.random(F, 2, 2, rng)
    N = build_Nd(3, A, [B, C])
    I = ExactMatrix.identity(F, 2)
    want = ExactMatrix.blocks(F, [[A @ A @ B, A @ B, B], [A @ A @ C, A @ C, C], [A @ A, A, I]])
    assert N == want


@pytest.mark.parametrize("d", [3, 4])
def test_canonical_Nd_nonsingular(F, d):
    A, Bs, _ = canonical_substitution(F, d)
    assert det(build_Nd(d, A, Bs)) != 0


def test_canonical_Nd_singular_for_repeated_eigenvalues(F):
    A, Bs, _ = canonical_substitution(F, 3, (1, 1, 2))
    assert det(build_Nd(3, A, Bs)) == 0


def test_long_cycle(F):
    C = long_cycle(F, 3)
    assert C == mat(F, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    assert C @ C @ C == ExactMatrix.identity(F, 3)


def test_Nd_preconditions(F):
    with pytest.raises(PreconditionViolated):
        build_Nd(1, mat(F, [[1]]), [])
    with pytest.raises(PreconditionViolated):
        build_Nd(3, mat(F, [[1]]), [mat(F, [[1]])])
    with pytest.raises(ShapeMismatch):
        build_Nd(2, mat(F, [[1]]), [ExactMatrix.identity(F, 2)])


def test_charpoly_kernel_scalar(F):
    a, b = 4, 9
    v = charpoly_kernel(2, mat(F, [[a]]), [mat(F, [[b]])])
    assert v == [1, F(-a)]
    N = build_Nd(2, mat(F, [[a]]), [mat(F, [[b]])])
    assert (N @ ExactMatrix(F, [[x] for x in v], 1)).is_zero()


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_charpoly_kernel_random_residual(F, d):
    rng = random.Random(d)
    for k in range(1, d):
        A = ExactMatrix.random(F, k, k, rng)
        Bs = [ExactMatrix.random(F, k, k, rng) for _ in range(d - 1)]
        K = kernel_basis(d, A, Bs)
        assert (build_Nd(d, A, Bs) @ K).is_zero()
        assert rank(K) == k


def test_charpoly_kernel_preconditions(F):
    A = ExactMatrix.identity(F, 2)
    with pytest.raises(PreconditionViolated):
        charpoly_kernel(2, A, [A])
    with pytest.raises(PreconditionViolated):
        charpoly_kernel(3, A, [A, A], u=[0, 0])


def test_F2_layout(F):
    inst = build_Fd(2, F)
    assert list(inst.pencil.coeffs) == coefficients_from_display(F, F2_DISPLAY, 3)


def test_F3_layout(F):
    inst = build_Fd(3, F)
    assert list(inst.pencil.coeffs) == coefficients_from_display(F, F3_DISPLAY, 4)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_Fd_shape(F, d):
    inst = build_Fd(d, F)
    assert inst.size == d * d - 1
    assert inst.pencil.vars == d + 1
    assert inst.canonical_tuple[0] == ExactMatrix.identity(F, d)
    assert len(inst.canonical_tuple) == d + 1


@pytest.mark.parametrize("d", [2, 3, 4])
def test_canonical_substitution_invertible(F, d):
    inst = build_Fd(d, F)
    assert det(blowup_eval(inst.pencil, inst.canonical_tuple)) != 0


@pytest.mark.parametrize("d,n", [(2, 3), (3, 8)])
def test_verify(F, d, n):
    rep = verify_hard_instance(build_Fd(d, F), trials=20, seed=1)
    assert rep.n == n and rep.delta_lower == d
    assert rep.canonical_det_nonzero and rep.canonical_Nd_nonsingular
    for k in range(1, d):
        assert rep.sampled_singular[k] == (20, 20)
        assert rep.kernel_certificates[k]["residual_zero"]
    out = rep.to_json()
    assert out["conclusion"] == {"n": n, "delta_lower": d}


def test_verify_repeated_eigenvalues_fail_clause_b(F):
    with pytest.raises(VerificationFailed) as info:
        verify_hard_instance(build_Fd(3, F, (1, 1, 2)), trials=4)
    assert info.value.clause == "b"


def test_small_field_rational(Q):
    inst = build_Fd(2, Q)
    assert verify_hard_instance(inst, trials=4).delta_lower == 2


def test_Fd_precondition():
    with pytest.raises(PreconditionViolated):
        build_Fd(1)
    with pytest.raises(PreconditionViolated):
        build_Fd(3, FieldSpec(), (1, 2))
