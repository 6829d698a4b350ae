"""Blow-up based null-cone, skew-field invertibility and rational identity tests."""

from .exactalg import DEFAULT_PRIME, ExactMatrix, FieldSpec, charpoly, det, inverse, kronecker, rank
from .hardinstances import build_Fd, build_Nd, charpoly_kernel, verify_hard_instance
from .ncformula import evaluate, parse, rit, size
from .nullcone import (
    degree_bounds,
    f_T,
    in_nullcone,
    ncrank_lower_bound,
    normalize_witness,
    skewfield_invertible,
)
from .pencil import BlowupWitness, Pencil, blowup_eval, blowup_rank
from .quiver import Quiver, build_semi_pencil, is_semistable, paths, pq_full_test

__all__ = [
    "DEFAULT_PRIME",
    "BlowupWitness",
    "ExactMatrix",
    "FieldSpec",
    "Pencil",
    "Quiver",
    "blowup_eval",
    "blowup_rank",
    "build_Fd",
    "build_Nd",
    "build_semi_pencil",
    "charpoly",
    "charpoly_kernel",
    "degree_bounds",
    "det",
    "evaluate",
    "f_T",
    "in_nullcone",
    "inverse",
    "is_semistable",
    "kronecker",
    "ncrank_lower_bound",
    "normalize_witness",
    "parse",
    "paths",
    "pq_full_test",
    "rank",
    "rit",
    "size",
    "skewfield_invertible",
    "verify_hard_instance",
]
