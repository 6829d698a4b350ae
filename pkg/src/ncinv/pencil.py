"""Matrix pencils X_0 + t_1 X_1 + ... + t_m X_m and their tensor blow-ups."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .exactalg import ExactMatrix, FieldSpec, ShapeMismatch, rank, substream

DEFAULT_TRIALS = 8


@dataclass(frozen=True)
class Pencil:
    """k x n pencil; ``constant`` is None for a linear pencil."""

    field: FieldSpec
    rows: int
    cols: int
    coeffs: tuple[ExactMatrix, ...]
    constant: ExactMatrix | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        mats = list(self.coeffs) + ([self.constant] if self.constant is not None else [])
        for X in mats:
            if X.shape != (self.rows, self.cols):
                raise ShapeMismatch(f"coefficient of shape {X.shape}, pencil is {self.rows}x{self.cols}")
            if X.field != self.field:
                raise ShapeMismatch("coefficient over a different field")

    @classmethod
    def linear(cls, coeffs: Sequence[ExactMatrix], constant: ExactMatrix | None = None) -> "Pencil":
        ref = constant if constant is not None else coeffs[0]
        return cls(ref.field, ref.rows, ref.cols, tuple(coeffs), constant)

    @classmethod
    def from_values(cls, field: FieldSpec, coeffs, constant=None) -> "Pencil":
        mats = [ExactMatrix.from_values(field, X) for X in coeffs]
        const = ExactMatrix.from_values(field, constant) if constant is not None else None
        return cls.linear(mats, const)

    @classmethod
    def random(cls, field: FieldSpec, rows: int, cols: int, m: int, rng) -> "Pencil":
        return cls(field, rows, cols, tuple(ExactMatrix.random(field, rows, cols, rng) for _ in range(m)))

    @property
    def vars(self) -> int:
        return len(self.coeffs)

    @property
    def affine(self) -> bool:
        return self.constant is not None

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def homogeneous_part(self) -> "Pencil":
        return Pencil(self.field, self.rows, self.cols, self.coeffs)

    def to_json(self) -> dict:
        out = {
            "rows": self.rows,
            "cols": self.cols,
            "vars": self.vars,
            "field": self.field.to_json(),
            "coeffs": [X.to_json() for X in self.coeffs],
        }
        if self.constant is not None:
            out["constant"] = self.constant.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Pencil":
        field = FieldSpec.from_json(obj["field"])
        rows, cols = int(obj["rows"]), int(obj["cols"])
        coeffs = tuple(ExactMatrix.from_json(field, X, cols) for X in obj["coeffs"])
        if len(coeffs) != int(obj.get("vars", len(coeffs))):
            raise ShapeMismatch("'vars' does not match the number of coefficient matrices")
        constant = obj.get("constant")
        if constant is not None:
            constant = ExactMatrix.from_json(field, constant, cols)
        return cls(field, rows, cols, coeffs, constant)


@dataclass(frozen=True)
class BlowupWitness:
    """A tuple T of p x q matrices and the rank of X_0 (x) I + sum X_i (x) T_i.

    For an affine pencil the constant slot is the implicit identity (p == q).
    """

    p: int
    q: int
    tuple: tuple[ExactMatrix, ...]
    achieved_rank: int
    affine: bool = False
    trial: int = dc_field(default=0, compare=False)

    def verify(self, pencil: Pencil) -> bool:
        return rank(blowup_eval(pencil, self.tuple, self.p, self.q)) == self.achieved_rank

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "affine": self.affine,
            "achieved_rank": self.achieved_rank,
            "trial": self.trial,
            "tuple": [T.to_json() for T in self.tuple],
        }

    @classmethod
    def from_json(cls, field: FieldSpec, obj: dict) -> "BlowupWitness":
        q = int(obj["q"])
        return cls(
            p=int(obj["p"]),
            q=q,
            tuple=tuple(ExactMatrix.from_json(field, T, q) for T in obj["tuple"]),
            achieved_rank=int(obj["achieved_rank"]),
            affine=bool(obj.get("affine", False)),
            trial=int(obj.get("trial", 0)),
        )


def blowup_eval(P: Pencil, tuple_: Sequence[ExactMatrix], p: int | None = None, q: int | None = None) -> ExactMatrix:
    """X_0 (x) I_p + sum_i X_i (x) T_i, assembled block by block.

    ``p``/``q`` are only needed when the tuple is empty.
    """
    tuple_ = list(tuple_)
    if len(tuple_) != P.vars:
        raise ShapeMismatch(f"pencil has {P.vars} variables, got {len(tuple_)} matrices")
    if tuple_:
        p, q = tuple_[0].shape
        if any(T.shape != (p, q) for T in tuple_):
            raise ShapeMismatch("tuple matrices differ in shape")
        if any(T.field != P.field for T in tuple_):
            raise ShapeMismatch("tuple over a different field")
    elif p is None or q is None:
        raise ShapeMismatch("blow-up shape unknown for an empty tuple")
    if P.affine and p != q:
        raise ShapeMismatch("affine pencils need square blow-ups")

    field = P.field
    mod = field.prime
    zero = field.zero
    k, n = P.rows, P.cols
    out = [[zero] * (n * q) for _ in range(k * p)]
    for a in range(k):
        for b in range(n):
            terms = [(X.data[a][b], T.data) for X, T in zip(P.coeffs, tuple_) if X.data[a][b] != 0]
            c0 = P.constant.data[a][b] if P.constant is not None else 0
            if not terms and c0 == 0:
                continue
            for i in range(p):
                row = out[a * p + i]
                for j in range(q):
                    s = c0 if i == j else 0
                    for c, T in terms:
                        s += c * T[i][j]
                    row[b * q + j] = s % mod if mod is not None else field(s)
    return ExactMatrix(field, out, n * q)


def random_tuple(field: FieldSpec, m: int, p: int, q: int, rng) -> tuple[ExactMatrix, ...]:
    return tuple(ExactMatrix.random(field, p, q, rng) for _ in range(m))


def trial_tuple(P: Pencil, p: int, q: int, seed: int, trial: int) -> tuple[ExactMatrix, ...]:
    """The tuple sampled by trial ``trial``; depends only on (seed, p, q, trial)."""
    return random_tuple(P.field, P.vars, p, q, substream(seed, "blowup", p, q, trial))


def blowup_rank(P: Pencil, p: int, q: int, trials: int = DEFAULT_TRIALS, seed: int = 0) -> BlowupWitness:
    """Best sampled rank of the (p, q) blow-up, with the lowest-index maximizing tuple."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if P.affine and p != q:
        raise ShapeMismatch("affine pencils need square blow-ups")
    ceiling = min(P.rows * p, P.cols * q)
    best: BlowupWitness | None = None
    for t in range(trials):
        T = trial_tuple(P, p, q, seed, t)
        r = rank(blowup_eval(P, T, p, q))
        if best is None or r > best.achieved_rank:
            best = BlowupWitness(p, q, T, r, P.affine, t)
        # Later trials cannot beat the ceiling, so stopping keeps the lowest index.
        if r == ceiling:
            break
    return best


def failure_bound(degree: int, field: FieldSpec, trials: int) -> float:
    """Schwartz-Zippel bound that `trials` independent samples all miss a nonzero
    polynomial of total degree `degree`."""
    per_trial = min(1.0, degree / field.sample_size)
    return per_trial**trials
