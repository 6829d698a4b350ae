"""Null-cone membership, skew-field invertibility and non-commutative rank bounds.

All positive verdicts carry a blow-up tuple whose full rank is an exact
certificate.  Negative verdicts are one-sided Monte Carlo: a missed witness
has probability at most ``failure_bound`` (Schwartz-Zippel over the sampling
set, using the degree d*n of f_T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .exactalg import ExactAlgError, ExactMatrix, ShapeMismatch, det, inverse, rank, substream
from .pencil import (
    DEFAULT_TRIALS,
    BlowupWitness,
    Pencil,
    blowup_eval,
    blowup_rank,
    failure_bound,
    random_tuple,
)

IN_NULLCONE = "InNullCone"
NOT_IN_NULLCONE = "NotInNullCone"
INVERTIBLE = "Invertible"
SINGULAR_WHP = "SingularWhp"


class NormalizationFailed(ExactAlgError):
    def __init__(self, witness: BlowupWitness, msg: str = "no invertible first slot found"):
        super().__init__(msg)
        self.witness = witness


@dataclass(frozen=True)
class NullConeVerdict:
    status: str
    witness: BlowupWitness | None
    sizes_tested: tuple[int, ...]
    trials: int
    failure_bound: float

    @property
    def in_nullcone(self) -> bool:
        return self.status == IN_NULLCONE

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness": self.witness.to_json() if self.witness else None,
            "blowup_sizes_tested": list(self.sizes_tested),
            "trials": self.trials,
            "failure_bound": self.failure_bound,
        }


@dataclass(frozen=True)
class SkewFieldVerdict:
    status: str
    witness: BlowupWitness | None
    sizes_tested: tuple[int, ...]
    trials: int
    failure_bound: float

    @property
    def invertible(self) -> bool:
        return self.status == INVERTIBLE

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness": self.witness.to_json() if self.witness else None,
            "blowup_sizes_tested": list(self.sizes_tested),
            "trials": self.trials,
            "failure_bound": self.failure_bound,
        }


@dataclass(frozen=True)
class NCRankBound:
    best: int
    per_d: tuple[tuple[int, int], ...]
    witnesses: tuple[BlowupWitness, ...] = dc_field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "best": self.best,
            "per_d": [{"d": d, "rank": r} for d, r in self.per_d],
            "witnesses": [w.to_json() for w in self.witnesses],
        }


@dataclass(frozen=True)
class DegreeBoundReport:
    n: int
    m: int
    delta_upper: int
    gamma_upper: int
    delta_lower: int
    gamma_lower: int
    beta_upper_char0: int
    beta_cap_char0: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def completeness_size(n: int) -> int:
    """Blow-up size that decides full rank for an n x n linear pencil."""
    return max(1, n - 1)


def f_T(P: Pencil, tuple_: Sequence[ExactMatrix]):
    """det(X_1 (x) T_1 + ... + X_m (x) T_m) for a square linear pencil."""
    if not P.is_square or P.affine:
        raise ShapeMismatch("f_T needs a square linear pencil")
    if any(not T.is_square for T in tuple_):
        raise ShapeMismatch("f_T needs square tuple matrices")
    return det(blowup_eval(P, tuple_))


def _search_full_rank(P: Pencil, sizes, trials: int, seed: int) -> BlowupWitness | None:
    n = P.rows
    for d in sizes:
        w = blowup_rank(P, d, d, trials, seed)
        if w.achieved_rank == n * d:
            return w
    return None


def in_nullcone(P: Pencil, trials: int = DEFAULT_TRIALS, seed: int = 0, d_max: int | None = None) -> NullConeVerdict:
    """Scan blow-up sizes 1..max(1, n-1); the first full-rank sample is the witness.

    The top size alone is already complete; scanning upward only makes the
    reported witness as small as the sampling allows.
    """
    if P.affine or not P.is_square:
        raise ShapeMismatch("in_nullcone needs a square linear pencil")
    n = P.rows
    if n < 1:
        raise ShapeMismatch("in_nullcone needs n >= 1")
    top = completeness_size(n) if d_max is None else d_max
    sizes = tuple(range(1, top + 1))
    w = _search_full_rank(P, sizes, trials, seed)
    bound = failure_bound(top * n, P.field, trials)
    if w is not None:
        return NullConeVerdict(NOT_IN_NULLCONE, w, sizes[: w.p], trials, 0.0)
    return NullConeVerdict(IN_NULLCONE, None, sizes, trials, bound)


def skewfield_invertible(P: Pencil, trials: int = DEFAULT_TRIALS, seed: int = 0, d_max: int | None = None) -> SkewFieldVerdict:
    """Invertibility of X_0 + sum t_i X_i over the free skew field.

    Affine pencils keep the constant slot fixed to the identity in every
    blow-up instead of spending an extra variable on it.
    """
    if not P.is_square:
        raise ShapeMismatch("skewfield_invertible needs a square pencil")
    n = P.rows
    top = completeness_size(n) if d_max is None else d_max
    sizes = tuple(range(1, top + 1))
    w = _search_full_rank(P, sizes, trials, seed)
    if w is not None:
        return SkewFieldVerdict(INVERTIBLE, w, sizes[: w.p], trials, 0.0)
    return SkewFieldVerdict(SINGULAR_WHP, None, sizes, trials, failure_bound(top * n, P.field, trials))


def ncrank_lower_bound(P: Pencil, d_max: int | None = None, trials: int = DEFAULT_TRIALS, seed: int = 0) -> NCRankBound:
    """max_d ceil(r(d,d)/d) over sampled square blow-ups, a certified lower bound."""
    if P.affine:
        raise ShapeMismatch("ncrank is defined for linear pencils")
    if d_max is None:
        d_max = completeness_size(max(P.rows, P.cols))
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    per_d = []
    witnesses = []
    best = 0
    for d in range(1, d_max + 1):
        w = blowup_rank(P, d, d, trials, seed)
        per_d.append((d, w.achieved_rank))
        witnesses.append(w)
        best = max(best, -(-w.achieved_rank // d))
    return NCRankBound(best, tuple(per_d), tuple(witnesses))


def normalize_witness(P: Pencil, w: BlowupWitness, retries: int = 16, seed: int = 0) -> BlowupWitness:
    """Rewrite a full-rank witness so that the first slot is the identity.

    If T_1 is singular, fresh full-rank tuples are sampled until one has an
    invertible first slot; then S_i = T_1^{-1} T_i.
    """
    if P.affine or not P.vars:
        raise ShapeMismatch("normalize_witness needs a linear pencil with at least one variable")
    d = w.p
    full = P.rows * d
    if w.p != w.q or w.achieved_rank != full:
        raise ShapeMismatch("witness does not certify full rank")
    candidates = [w.tuple]
    rng = substream(seed, "normalize", d)
    for _ in range(retries):
        candidates.append(random_tuple(P.field, P.vars, d, d, rng))
    for T in candidates:
        try:
            T1_inv = inverse(T[0])
        except ExactAlgError:
            continue
        S = tuple(T1_inv @ Ti for Ti in T)
        r = rank(blowup_eval(P, S))
        if r == full:
            return BlowupWitness(d, d, S, r, False, w.trial)
    raise NormalizationFailed(w)


def degree_bounds(n: int, m: int) -> DegreeBoundReport:
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    delta_upper = max(1, n - 1)
    delta_lower = math.isqrt(n + 1)
    return DegreeBoundReport(
        n=n,
        m=m,
        delta_upper=delta_upper,
        gamma_upper=n * delta_upper,
        delta_lower=delta_lower,
        gamma_lower=n * delta_lower,
        beta_upper_char0=min(m, n * n) * n**4,
        beta_cap_char0=n**6,
    )


def popov_bound(degrees: Sequence[int]) -> int:
    """Generating-degree bound from a homogeneous system of parameters of the given degrees."""
    degrees = list(degrees)
    if not degrees:
        return 0
    return max(sum(degrees) - len(degrees), max(degrees))


def pq_generation_bound(p: int, q: int) -> int:
    """Degree bound for generators of the SL_p x SL_q invariants of p x q tuples (char 0)."""
    return (p * q * math.lcm(p, q)) ** 2
