"""Property suites run by ``ncinv selftest``.

Exact suites must never fail.  Monte Carlo suites can only fail by a sample
missing a generic rank; each reports the Schwartz-Zippel bound for that
event, and failures are tolerated ("degraded") only when that bound is not
negligible for the configured field and trial count.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field

from .exactalg import (
    ExactAlgError,
    ExactMatrix,
    FieldSpec,
    charpoly,
    det,
    direct_sum,
    inverse,
    kronecker,
    poly_eval_matrix,
    rank,
    substream,
)
from .hardinstances import build_Fd, build_Nd, canonical_substitution, kernel_basis
from .ncformula import Add, Const, Inv, Mul, Neg, Var, evaluate, parse, rit, to_text
from .nullcone import f_T, in_nullcone, skewfield_invertible
from .pencil import Pencil, blowup_eval, blowup_rank, failure_bound
from .quiver import Quiver, build_semi_pencil, is_semistable, semi_pencil_vars
from .verify import explicit_blowup

NEGLIGIBLE = 1e-9


@dataclass
class SuiteResult:
    suite: str
    kind: str  # "exact" or "monte-carlo"
    instances: int = 0
    failures: int = 0
    failure_bound: float = 0.0
    notes: list[str] = dc_field(default_factory=list)

    @property
    def status(self) -> str:
        if not self.failures:
            return "pass"
        if self.kind == "monte-carlo" and self.failure_bound >= NEGLIGIBLE:
            return "degraded"
        return "fail"

    def check(self, ok: bool, note: str = ""):
        self.instances += 1
        if not ok:
            self.failures += 1
            if note and len(self.notes) < 5:
                self.notes.append(note)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "kind": self.kind,
            "status": self.status,
            "instances": self.instances,
            "failures": self.failures,
            "failure_bound_per_instance": self.failure_bound,
            "notes": self.notes,
        }


def _rand(F, r, c, rng):
    return ExactMatrix.random(F, r, c, rng)


def suite_exactalg(F: FieldSpec, seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("exactalg", "exact")
    rng = substream(seed, "selftest", "exactalg")
    for _ in range(10):
        r, c = rng.randint(1, 5), rng.randint(1, 5)
        M = _rand(F, r, c, rng)
        res.check(rank(M) == rank(M.T), "rank(M) != rank(M^T)")
        n = rng.randint(1, 5)
        A, B = _rand(F, n, n, rng), _rand(F, n, n, rng)
        res.check(det(A @ B) == F(det(A) * det(B)), "det not multiplicative")
        try:
            Ai = inverse(A)
            res.check(Ai @ A == ExactMatrix.identity(F, n) and det(A) != 0, "bad inverse")
        except ExactAlgError:
            res.check(det(A) == 0, "inverse failed on a nonsingular matrix")
        S = ExactMatrix.from_values(F, [[1, 2], [2, 4]])
        try:
            inverse(S)
            res.check(False, "singular matrix inverted")
        except ExactAlgError:
            res.check(True)
        C1, C2 = _rand(F, 2, 3, rng), _rand(F, 3, 2, rng)
        A2, B2 = _rand(F, 2, 2, rng), _rand(F, 2, 2, rng)
        res.check(kronecker(A2, C1) @ kronecker(B2, C2) == kronecker(A2 @ B2, C1 @ C2), "mixed product")
        res.check(poly_eval_matrix(charpoly(A), A).is_zero(), "Cayley-Hamilton")
    return res


def suite_pencil_linearity(F: FieldSpec, seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("pencil-linearity-directsum", "exact")
    rng = substream(seed, "selftest", "linearity")
    for _ in range(8):
        n, m, p, q = rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3)
        P = Pencil.random(F, n, n, m, rng)
        T = [_rand(F, p, q, rng) for _ in range(m)]
        S = [_rand(F, p, q, rng) for _ in range(m)]
        res.check(
            blowup_eval(P, [a + b for a, b in zip(T, S)]) == blowup_eval(P, T) + blowup_eval(P, S),
            "blow-up not linear in the tuple",
        )
        S2 = [_rand(F, q, p, rng) for _ in range(m)]
        joined = [direct_sum(a, b) for a, b in zip(T, S2)]
        res.check(
            rank(blowup_eval(P, joined)) == rank(blowup_eval(P, T)) + rank(blowup_eval(P, S2)),
            "rank not additive on direct sums",
        )
    return res


def _random_structured_pencil(F, n, m, rng) -> Pencil:
    """Coefficients of random rank, so blow-up ranks are not all generic-full."""
    coeffs = []
    for _ in range(m):
        r = rng.randint(0, n)
        if r == 0:
            coeffs.append(ExactMatrix.zeros(F, n, n))
        else:
            coeffs.append(_rand(F, n, r, rng) @ _rand(F, r, n, rng))
    return Pencil.linear(coeffs)


def suite_regularity(F: FieldSpec, seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("regularity", "monte-carlo")
    rng = substream(seed, "selftest", "regularity")
    for i in range(12):
        n, m = rng.randint(2, 3), rng.randint(2, 3)
        P = _random_structured_pencil(F, n, m, rng)
        for d in (2, 3):
            r = blowup_rank(P, d, d, trials, seed + i).achieved_rank
            res.failure_bound = max(res.failure_bound, failure_bound(n * d, F, trials))
            res.check(r % d == 0, f"rank {r} at d={d} not divisible by {d}")
    return res


def suite_concavity(F: FieldSpec, seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("monotone-concave", "monte-carlo")
    rng = substream(seed, "selftest", "concavity")
    for i in range(4):
        P = _random_structured_pencil(F, 3, 2, rng)
        r = {(p, q): blowup_rank(P, p, q, trials, seed + i).achieved_rank if p and q else 0 for p in range(5) for q in range(5)}
        for (p, q), v in r.items():
            if q + 1 <= 4:
                res.check(r[p, q + 1] >= v, f"r({p},{q + 1}) < r({p},{q})")
            if p + 1 <= 4:
                res.check(r[p + 1, q] >= v, f"r({p + 1},{q}) < r({p},{q})")
            if q + 2 <= 4:
                res.check(2 * r[p, q + 1] >= v + r[p, q + 2], f"not concave in q at ({p},{q})")
            if p + 2 <= 4:
                res.check(2 * r[p + 1, q] >= v + r[p + 2, q], f"not concave in p at ({p},{q})")
        res.failure_bound = max(res.failure_bound, failure_bound(12, F, trials))
    return res


def suite_nullcone(F: FieldSpec, seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("nullcone", "monte-carlo")
    rng = substream(seed, "selftest", "nullcone")
    for i in range(8):
        n = rng.randint(2, 4)
        P = _random_structured_pencil(F, n, rng.randint(1, 3), rng)
        v = in_nullcone(P, trials, seed + i)
        res.failure_bound = max(res.failure_bound, v.failure_bound, failure_bound(n * n, F, trials))
        if not v.in_nullcone:
            M = explicit_blowup(P, v.witness.tuple)
            res.check(det(M) != 0, "certificate does not re-verify")
        # descent: full rank at d = n forces full rank at d = n - 1
        w = blowup_rank(P, n, n, trials, seed + i)
        if w.achieved_rank == n * n:
            res.check(not v.in_nullcone, "full at d=n but not at d=n-1")
        # SL_n x SL_n invariance of f_T
        d = rng.randint(1, 2)
        T = [_rand(F, d, d, rng) for _ in P.coeffs]
        g, h = _elementary_sl(F, n, rng), _elementary_sl(F, n, rng)
        moved = Pencil.linear([g @ X @ inverse(h) for X in P.coeffs])
        res.check(f_T(P, T) == f_T(moved, T), "f_T not SL x SL invariant")
    # n = 1: membership iff all scalars vanish
    for i in range(4):
        vals = [rng.choice([0, rng.randrange(1, 1000)]) for _ in range(3)]
        P = Pencil.from_values(F, [[[v]] for v in vals])
        res.check(in_nullcone(P, trials, seed + i).in_nullcone == all(v == 0 for v in vals), "n = 1 case")
    return res


def _elementary_sl(F, n, rng) -> ExactMatrix:
    M = ExactMatrix.identity(F, n)
    for _ in range(3):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            continue
        E = [list(r) for r in ExactMatrix.identity(F, n).data]
        E[i][j] = F.random(rng)
        M = M @ ExactMatrix(F, E, n)
    return M


def suite_hardinstances(F: FieldSpec, seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("hard-instances", "exact")
    rng = substream(seed, "selftest", "hard")
    for d in range(2, 6):
        for k in range(1, d):
            A = _rand(F, k, k, rng)
            Bs = [_rand(F, k, k, rng) for _ in range(d - 1)]
            K = kernel_basis(d, A, Bs)
            res.check((build_Nd(d, A, Bs) @ K).is_zero() and rank(K) == k, f"kernel certificate d={d} k={k}")
        if F.prime is None or d < F.prime:
            A, Bs, _ = canonical_substitution(F, d)
            res.check(det(build_Nd(d, A, Bs)) != 0, f"canonical N_{d} singular")
        if d <= 4:
            inst = build_Fd(d, F)
            res.check(det(blowup_eval(inst.pencil, inst.canonical_tuple)) != 0, f"canonical F_{d} singular")
    return res


def suite_quiver(F: FieldSpec, seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("quiver", "monte-carlo")
    rng = substream(seed, "selftest", "quiver")
    for i in range(6):
        n, m = rng.randint(1, 3), rng.randint(1, 3)
        P = _random_structured_pencil(F, n, m, rng)
        Q = Quiver.kronecker(m)
        rep = {f"a{j + 1}": X for j, X in enumerate(P.coeffs)}
        a = is_semistable(Q, {"x": n, "y": n}, {"x": 1, "y": -1}, rep, F, trials, seed + i)
        b = in_nullcone(P, trials, seed + i)
        res.check(a.semistable == (not b.in_nullcone), "theta(m) disagrees with in_nullcone")
        c = is_semistable(Q, {"x": n, "y": n}, {"x": 2, "y": -2}, rep, F, trials, seed + i)
        res.check(a.semistable == c.semistable, "sigma and 2 sigma disagree")
        res.failure_bound = max(res.failure_bound, b.failure_bound, c.failure_bound)
    Q = Quiver(["x", "y", "z"], [("a", "x", "y"), ("b", "y", "z"), ("c", "x", "z"), ("e", "x", "z")])
    dim = {"x": 2, "y": 1, "z": 2}
    weight = {"x": 1, "y": 0, "z": -1}
    rep = {"a": _rand(F, 1, 2, rng), "b": _rand(F, 2, 1, rng), "c": _rand(F, 2, 2, rng), "e": _rand(F, 2, 2, rng)}
    P = build_semi_pencil(Q, dim, weight, rep, F)
    res.check(P.vars == semi_pencil_vars(Q, weight) == 3 and P.rows == 2, "variable count")
    return res


def _random_formula(rng: random.Random, depth: int, m: int):
    if depth == 0 or rng.random() < 0.25:
        return Var(rng.randint(1, m)) if rng.random() < 0.8 else Const(rng.randint(0, 5))
    kind = rng.choice(["add", "mul", "neg", "inv", "sub"])
    if kind == "add":
        return Add(_random_formula(rng, depth - 1, m), _random_formula(rng, depth - 1, m))
    if kind == "sub":
        return Add(_random_formula(rng, depth - 1, m), Neg(_random_formula(rng, depth - 1, m)))
    if kind == "mul":
        return Mul(_random_formula(rng, depth - 1, m), _random_formula(rng, depth - 1, m))
    if kind == "neg":
        return Neg(_random_formula(rng, depth - 1, m))
    return Inv(_random_formula(rng, depth - 1, m))


def _has_inv(f) -> bool:
    if isinstance(f, Inv):
        return True
    if isinstance(f, (Neg,)):
        return _has_inv(f.child)
    if isinstance(f, (Add, Mul)):
        return _has_inv(f.left) or _has_inv(f.right)
    return False


def _commutative_eval(f, xs, F):
    if isinstance(f, Var):
        return xs[f.index - 1]
    if isinstance(f, Const):
        return F(f.value)
    if isinstance(f, Neg):
        return F(-_commutative_eval(f.child, xs, F))
    if isinstance(f, Add):
        return F(_commutative_eval(f.left, xs, F) + _commutative_eval(f.right, xs, F))
    return F(_commutative_eval(f.left, xs, F) * _commutative_eval(f.right, xs, F))


def suite_ncformula(F: FieldSpec, seed: int, trials: int) -> SuiteResult:
    res = SuiteResult("ncformula", "exact")
    rng = substream(seed, "selftest", "ncformula")
    for _ in range(30):
        f = _random_formula(rng, 4, 3)
        res.check(parse(to_text(f)) == f, f"round trip failed for {to_text(f)}")
        if not _has_inv(f):
            xs = [F.random(rng) for _ in range(3)]
            val = evaluate(f, [ExactMatrix.from_values(F, [[x]]) for x in xs])
            res.check(val.data[0][0] == _commutative_eval(f, xs, F), "dimension-1 evaluation")
    for text in ("t1 - t1", "t1*t2 - t2*t1", "(t1 + t1*t2^-1*t1)^-1 + (t1+t2)^-1 - t1^-1"):
        v = rit(parse(text), trials=max(1, min(trials, 2)), seed=seed, field=F)
        if v.status == "NonZero":
            again = evaluate(parse(text), v.tuple)
            res.check(again is not None and not again.is_zero(), "NonZero witness does not re-evaluate")
        res.check(not (text != "t1*t2 - t2*t1" and v.status == "NonZero"), f"{text} reported NonZero")
    return res


SUITES = (
    suite_exactalg,
    suite_pencil_linearity,
    suite_regularity,
    suite_concavity,
    suite_nullcone,
    suite_hardinstances,
    suite_quiver,
    suite_ncformula,
)


def run_selftest(field: FieldSpec, seed: int = 0, trials: int = 8) -> dict:
    results = [suite(field, seed, trials) for suite in SUITES]
    return {
        "suites": [r.to_json() for r in results],
        "passed": all(r.status != "fail" for r in results),
        "field": field.to_json(),
        "seed": seed,
        "trials": trials,
    }
