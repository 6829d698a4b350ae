"""Pencils whose blow-ups stay singular below size d but not at size d.

Index map used throughout (block indices are 1-based):

* ``build_Nd``: block (i, j) is A^(d-j) B_i for i < d and A^(d-j) for i = d,
  so block column j carries exponent d - j and the last column exponent 0.
* ``build_Fd``: block rows are d-1 towers of d rows followed by one tower of
  d-1 rows; block columns are d-1 groups of d-1 columns (the bidiagonal
  I / -A towers), one group of d-2 columns (the short tower) and the final
  strip of d columns holding I_d (x) B_i and the A / I strip.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exactalg import ExactAlgError, ExactMatrix, FieldSpec, ShapeMismatch, charpoly, det, rank, substream
from .nullcone import degree_bounds
from .pencil import DEFAULT_TRIALS, Pencil, blowup_eval


class PreconditionViolated(ExactAlgError):
    pass


class VerificationFailed(ExactAlgError):
    def __init__(self, clause: str, detail: str):
        super().__init__(f"clause ({clause}) failed: {detail}")
        self.clause = clause


@dataclass(frozen=True)
class HardInstance:
    d: int
    pencil: Pencil
    canonical_tuple: tuple[ExactMatrix, ...]
    lambdas: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.pencil.rows


def long_cycle(field: FieldSpec, d: int) -> ExactMatrix:
    """Permutation matrix sending e_j to e_{j+1 mod d}."""
    return ExactMatrix.from_values(field, [[1 if i == (j + 1) % d else 0 for j in range(d)] for i in range(d)])


def canonical_substitution(field: FieldSpec, d: int, lambdas: Sequence[int] | None = None):
    """(A, B_1, ..., B_{d-1}) with A = diag(lambdas), B_i = (long cycle)^i."""
    if lambdas is None:
        lambdas = range(1, d + 1)
    lambdas = tuple(lambdas)
    if len(lambdas) != d:
        raise PreconditionViolated(f"need {d} eigenvalues, got {len(lambdas)}")
    A = ExactMatrix.diag(field, lambdas)
    B1 = long_cycle(field, d)
    Bs = [B1]
    for _ in range(d - 2):
        Bs.append(Bs[-1] @ B1)
    return A, tuple(Bs), lambdas


def build_Nd(d: int, A: ExactMatrix, Bs: Sequence[ExactMatrix]) -> ExactMatrix:
    if d < 2:
        raise PreconditionViolated("d must be >= 2")
    if len(Bs) != d - 1:
        raise PreconditionViolated(f"need {d - 1} matrices B_i, got {len(Bs)}")
    k = A.rows
    if not A.is_square or any(B.shape != (k, k) for B in Bs):
        raise ShapeMismatch("all blocks must be k x k")
    powers = [A ** (d - j) for j in range(1, d + 1)]  # exponent for block column j
    grid = [[P @ B for P in powers] for B in Bs]
    grid.append(powers)
    return ExactMatrix.blocks(A.field, grid)


def charpoly_kernel(d: int, A: ExactMatrix, Bs: Sequence[ExactMatrix], u: Sequence | None = None) -> list:
    """Kernel vector w (x) u of N_d built from the characteristic polynomial of A.

    With p(t) = t^k + c_{k-1} t^{k-1} + ... + c_0, block column j (exponent
    d - j) gets weight c_{d-j} (c_k = 1, zero above k), so every block row
    collapses to p(A) B_i u = 0.
    """
    k = A.rows
    if k >= d:
        raise PreconditionViolated(f"need k < d, got k={k}, d={d}")
    field = A.field
    coeffs = list(charpoly(A)) + [field.one]  # c_0..c_k
    w = [coeffs[d - j] if d - j <= k else field.zero for j in range(1, d + 1)]
    if u is None:
        u = [field.one] + [field.zero] * (k - 1)
    u = [field(x) for x in u]
    if len(u) != k or all(x == 0 for x in u):
        raise PreconditionViolated("u must be a nonzero vector of length k")
    return [field(wj * ui) for wj in w for ui in u]


def kernel_basis(d: int, A: ExactMatrix, Bs: Sequence[ExactMatrix]) -> ExactMatrix:
    """The k kernel vectors from u = e_1..e_k, as columns of a dk x k matrix."""
    k = A.rows
    field = A.field
    cols = []
    for i in range(k):
        u = [field.one if j == i else field.zero for j in range(k)]
        cols.append(charpoly_kernel(d, A, Bs, u))
    return ExactMatrix(field, [list(r) for r in zip(*cols)], k)


def _apply(M: ExactMatrix, v: Sequence) -> list:
    p = M.field.prime
    out = [sum(a * b for a, b in zip(row, v)) for row in M.data]
    return out if p is None else [x % p for x in out]


def build_Fd(d: int, field: FieldSpec | None = None, lambdas: Sequence[int] | None = None) -> HardInstance:
    """Linear pencil in d+1 variables (slots I, A, B_1..B_{d-1}) of size d^2 - 1."""
    if d < 2:
        raise PreconditionViolated("d must be >= 2")
    field = field or FieldSpec()
    size = d * d - 1
    m = d + 1
    X = [[[0] * size for _ in range(size)] for _ in range(m)]
    I_SLOT, A_SLOT = 0, 1

    def put(slot, r, c, v):
        X[slot][r][c] += v

    strip = (d - 1) * (d - 1) + (d - 2)  # first column of the final strip
    row = 0
    col = 0
    # d-1 towers P_d(A) with I_d (x) B_i in the final strip
    for i in range(1, d):
        for j in range(d - 1):
            put(I_SLOT, row + j, col + j, 1)
            put(A_SLOT, row + j + 1, col + j, -1)
        for j in range(d):
            put(A_SLOT + i, row + j, strip + j, 1)
        row += d
        col += d - 1
    # P_{d-1}(A) next to Q_d(A)
    for j in range(d - 2):
        put(I_SLOT, row + j, col + j, 1)
        put(A_SLOT, row + j + 1, col + j, -1)
    for j in range(d - 1):
        put(A_SLOT, row + j, strip + j, 1)
    put(I_SLOT, row + d - 2, strip + d - 1, 1)
    assert row + d - 1 == size and col + d - 2 == strip

    pencil = Pencil.linear([ExactMatrix.from_values(field, Xi) for Xi in X])
    A, Bs, lam = canonical_substitution(field, d, lambdas)
    canonical = (ExactMatrix.identity(field, d), A) + Bs
    return HardInstance(d, pencil, canonical, lam)


@dataclass
class HardInstanceReport:
    d: int
    n: int
    m: int
    sampled_singular: dict[int, tuple[int, int]]  # k -> (singular count, trials)
    kernel_certificates: dict[int, dict]
    canonical_det_nonzero: bool
    canonical_Nd_nonsingular: bool
    delta_lower: int
    bound_consistent: bool

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "m": self.m,
            "sampled_singular": {
                str(k): {"singular": s, "trials": t} for k, (s, t) in self.sampled_singular.items()
            },
            "kernel_certificates": {str(k): v for k, v in self.kernel_certificates.items()},
            "canonical_invertible": self.canonical_det_nonzero,
            "canonical_Nd_nonsingular": self.canonical_Nd_nonsingular,
            "conclusion": {"n": self.n, "delta_lower": self.delta_lower},
            "consistent_with_degree_bounds": self.bound_consistent,
        }


def verify_hard_instance(inst: HardInstance, trials: int = DEFAULT_TRIALS, seed: int = 0) -> HardInstanceReport:
    """Check the three clauses; raises VerificationFailed naming the clause that broke.

    (a) for k < d: every sampled substitution with t_1 = I_k is singular, and
        N_d has an exact charpoly kernel at a random k x k (A, B_i);
    (b) the canonical d x d substitution is exactly invertible;
    (c) hence delta(d^2 - 1) >= d, checked against degree_bounds.
    """
    d = inst.d
    P = inst.pencil
    field = P.field
    n = P.rows
    sampled: dict[int, tuple[int, int]] = {}
    certs: dict[int, dict] = {}
    for k in range(1, d):
        singular = 0
        for t in range(trials):
            rng = substream(seed, "hard", d, k, t)
            T = (ExactMatrix.identity(field, k),) + tuple(
                ExactMatrix.random(field, k, k, rng) for _ in range(P.vars - 1)
            )
            if rank(blowup_eval(P, T)) < n * k:
                singular += 1
        sampled[k] = (singular, trials)
        if singular != trials:
            raise VerificationFailed("a", f"{trials - singular} of {trials} substitutions at k={k} were invertible")

        rng = substream(seed, "hard-kernel", d, k)
        A = ExactMatrix.random(field, k, k, rng)
        Bs = [ExactMatrix.random(field, k, k, rng) for _ in range(d - 1)]
        N = build_Nd(d, A, Bs)
        K = kernel_basis(d, A, Bs)
        residual = N @ K
        kernel_rank = rank(K)
        certs[k] = {
            "A": A.to_json(),
            "Bs": [B.to_json() for B in Bs],
            "kernel": K.to_json(),
            "residual_zero": residual.is_zero(),
            "kernel_rank": kernel_rank,
        }
        if not residual.is_zero() or kernel_rank != k:
            raise VerificationFailed("a", f"charpoly kernel certificate broke at k={k}")

    nonzero = det(blowup_eval(P, inst.canonical_tuple)) != 0
    A, Bs = inst.canonical_tuple[1], inst.canonical_tuple[2:]
    nd_ok = det(build_Nd(d, A, Bs)) != 0
    if not nonzero:
        raise VerificationFailed("b", "canonical substitution is singular")
    if not nd_ok:
        raise VerificationFailed("b", "canonical N_d is singular")

    lower = degree_bounds(n, d + 1).delta_lower
    if lower != d:
        raise VerificationFailed("c", f"degree_bounds({n}, {d + 1}).delta_lower = {lower}, expected {d}")
    return HardInstanceReport(d, n, P.vars, sampled, certs, nonzero, nd_ok, d, True)
