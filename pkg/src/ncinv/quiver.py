"""Acyclic quivers, path enumeration and the semi-invariant pencil.

Conventions: an arrow a has V(a) of shape alpha(head) x alpha(tail).  In the
semi-invariant pencil, block rows run over sink copies (vertices with
sigma < 0) and block columns over source copies (sigma > 0), both in vertex
declaration order then copy index.  Variables are numbered source copy
major, then sink copy, then path in enumeration order; no variable is shared
between two blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Mapping, Sequence

from .exactalg import ExactAlgError, ExactMatrix, FieldSpec, ShapeMismatch
from .nullcone import NOT_IN_NULLCONE, completeness_size, in_nullcone, pq_generation_bound
from .pencil import DEFAULT_TRIALS, BlowupWitness, Pencil

SEMISTABLE = "Semistable"
UNSTABLE_WHP = "UnstableWhp"


class CyclicQuiver(ExactAlgError):
    pass


class NonzeroPairing(ExactAlgError):
    pass


@dataclass(frozen=True)
class Arrow:
    name: str
    tail: str
    head: str


@dataclass(frozen=True)
class Path:
    """Arrows in traversal order (a_1 first); empty for the trivial path at ``tail``."""

    tail: str
    head: str
    arrows: tuple[Arrow, ...] = ()

    def __len__(self):
        return len(self.arrows)

    def evaluate(self, rep: Mapping[str, ExactMatrix], dim: Mapping[str, int], field: FieldSpec) -> ExactMatrix:
        M = ExactMatrix.identity(field, dim[self.tail])
        for a in self.arrows:
            M = rep[a.name] @ M
        return M


class Quiver:
    def __init__(self, vertices: Sequence[str], arrows: Sequence[Arrow | tuple]):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("vertex names must be unique")
        self.arrows = tuple(a if isinstance(a, Arrow) else Arrow(*a) for a in arrows)
        if len({a.name for a in self.arrows}) != len(self.arrows):
            raise ValueError("arrow names must be unique")
        vs = set(self.vertices)
        for a in self.arrows:
            if a.tail not in vs or a.head not in vs:
                raise ValueError(f"arrow {a.name} uses an unknown vertex")
        graph = {v: set() for v in self.vertices}
        for a in self.arrows:
            graph[a.head].add(a.tail)
        try:
            tuple(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            raise CyclicQuiver(f"quiver has a cycle through {exc.args[1]}") from None

    @classmethod
    def kronecker(cls, m: int) -> "Quiver":
        """theta(m): vertices x, y and m arrows x -> y."""
        return cls(["x", "y"], [Arrow(f"a{i + 1}", "x", "y") for i in range(m)])

    def out_arrows(self, v: str):
        return [a for a in self.arrows if a.tail == v]

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "arrows": [{"name": a.name, "tail": a.tail, "head": a.head} for a in self.arrows],
        }


def paths(Q: Quiver, x: str, y: str) -> list[Path]:
    """All paths x -> y, DFS over arrows in declaration order."""
    found: list[Path] = []

    def walk(v: str, acc: tuple[Arrow, ...]):
        if v == y:
            found.append(Path(x, y, acc))
        for a in Q.out_arrows(v):
            walk(a.head, acc + (a,))

    walk(x, ())
    return found


def _check(Q: Quiver, dim: Mapping[str, int], weight: Mapping[str, int], rep: Mapping[str, ExactMatrix] | None):
    for v in Q.vertices:
        if dim.get(v, 0) < 0:
            raise ValueError(f"negative dimension at {v}")
    pairing = sum(weight.get(v, 0) * dim.get(v, 0) for v in Q.vertices)
    if pairing != 0:
        raise NonzeroPairing(f"sigma . alpha = {pairing}")
    if rep is not None:
        for a in Q.arrows:
            if a.name not in rep:
                raise ShapeMismatch(f"no matrix for arrow {a.name}")
            want = (dim.get(a.head, 0), dim.get(a.tail, 0))
            if rep[a.name].shape != want:
                raise ShapeMismatch(f"V({a.name}) has shape {rep[a.name].shape}, expected {want}")


def semi_pencil_size(Q: Quiver, dim: Mapping[str, int], weight: Mapping[str, int]) -> int:
    return sum(max(weight.get(v, 0), 0) * dim.get(v, 0) for v in Q.vertices)


def semi_pencil_vars(Q: Quiver, weight: Mapping[str, int]) -> int:
    return sum(
        max(weight.get(x, 0), 0) * len(paths(Q, x, y)) * max(-weight.get(y, 0), 0)
        for x in Q.vertices
        for y in Q.vertices
    )


def build_semi_pencil(
    Q: Quiver,
    dim: Mapping[str, int],
    weight: Mapping[str, int],
    rep: Mapping[str, ExactMatrix],
    field: FieldSpec,
) -> Pencil:
    _check(Q, dim, weight, rep)
    plus = {v: max(weight.get(v, 0), 0) for v in Q.vertices}
    minus = {v: max(-weight.get(v, 0), 0) for v in Q.vertices}
    n = semi_pencil_size(Q, dim, weight)

    col_off: dict[tuple[str, int], int] = {}
    off = 0
    for v in Q.vertices:
        for c in range(plus[v]):
            col_off[(v, c)] = off
            off += dim.get(v, 0)
    row_off: dict[tuple[str, int], int] = {}
    off = 0
    for v in Q.vertices:
        for c in range(minus[v]):
            row_off[(v, c)] = off
            off += dim.get(v, 0)

    zero = field.zero
    coeffs = []
    for x in Q.vertices:
        for i in range(plus[x]):
            for y in Q.vertices:
                if not minus[y]:
                    continue
                ps = paths(Q, x, y)
                for j in range(minus[y]):
                    r0, c0 = row_off[(y, j)], col_off[(x, i)]
                    for p in ps:
                        block = p.evaluate(rep, dim, field)
                        X = [[zero] * n for _ in range(n)]
                        for a in range(block.rows):
                            X[r0 + a][c0 : c0 + block.cols] = block.data[a]
                        coeffs.append(ExactMatrix(field, X, n))
    return Pencil(field, n, n, tuple(coeffs))


@dataclass(frozen=True)
class SemistabilityVerdict:
    status: str
    pencil: Pencil
    witness: BlowupWitness | None
    d: int
    trials: int
    failure_bound: float
    metadata: dict | None = None

    @property
    def semistable(self) -> bool:
        return self.status == SEMISTABLE

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "pencil": self.pencil.to_json(),
            "witness": self.witness.to_json() if self.witness else None,
            "d": self.d,
            "trials": self.trials,
            "failure_bound": self.failure_bound,
        }
        if self.metadata:
            out["metadata"] = self.metadata
        return out


def is_semistable(
    Q: Quiver,
    dim: Mapping[str, int],
    weight: Mapping[str, int],
    rep: Mapping[str, ExactMatrix],
    field: FieldSpec,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> SemistabilityVerdict:
    """A nonzero f_T on the semi-invariant pencil is a semi-invariant of weight d*sigma not vanishing at V."""
    P = build_semi_pencil(Q, dim, weight, rep, field)
    n = P.rows
    if n == 0:
        # The constant function is a weight-sigma semi-invariant here.
        return SemistabilityVerdict(SEMISTABLE, P, None, 0, trials, 0.0)
    if P.vars == 0:
        return SemistabilityVerdict(UNSTABLE_WHP, P, None, completeness_size(n), trials, 0.0)
    v = in_nullcone(P, trials, seed)
    if v.status == NOT_IN_NULLCONE:
        return SemistabilityVerdict(SEMISTABLE, P, v.witness, v.witness.p, trials, 0.0)
    return SemistabilityVerdict(UNSTABLE_WHP, P, None, completeness_size(n), trials, v.failure_bound)


def kronecker_setup(tuple_: Sequence[ExactMatrix]):
    """theta(m) with tail dimension q, head dimension p and weight (p', -q')."""
    if not tuple_:
        raise ShapeMismatch("need at least one matrix")
    p, q = tuple_[0].shape
    if any(X.shape != (p, q) for X in tuple_):
        raise ShapeMismatch("all matrices must be p x q")
    e = math.gcd(p, q)
    Q = Quiver.kronecker(len(tuple_))
    dim = {"x": q, "y": p}
    weight = {"x": p // e, "y": -(q // e)}
    rep = {f"a{i + 1}": X for i, X in enumerate(tuple_)}
    return Q, dim, weight, rep


def pq_full_test(tuple_: Sequence[ExactMatrix], trials: int = DEFAULT_TRIALS, seed: int = 0) -> SemistabilityVerdict:
    """Semistability of a tuple of p x q matrices under SL_p x SL_q."""
    Q, dim, weight, rep = kronecker_setup(tuple_)
    p, q = tuple_[0].shape
    v = is_semistable(Q, dim, weight, rep, tuple_[0].field, trials, seed)
    meta = {
        "p": p,
        "q": q,
        "lcm": math.lcm(p, q),
        "blowup_bound": max(1, math.lcm(p, q) - 1),
        "generation_degree_bound_char0": pq_generation_bound(p, q),
    }
    return SemistabilityVerdict(v.status, v.pencil, v.witness, v.d, v.trials, v.failure_bound, meta)


def quiver_from_json(obj: dict, field: FieldSpec):
    Q = Quiver(obj["vertices"], [Arrow(a["name"], a["tail"], a["head"]) for a in obj["arrows"]])
    dim = {v: int(obj.get("dim", {}).get(v, 0)) for v in Q.vertices}
    weight = {v: int(obj.get("weight", {}).get(v, 0)) for v in Q.vertices}
    rep = {}
    for a in Q.arrows:
        data = obj.get("rep", {}).get(a.name)
        rows, cols = dim[a.head], dim[a.tail]
        if data is None:
            rep[a.name] = ExactMatrix.zeros(field, rows, cols)
        else:
            rep[a.name] = ExactMatrix.from_json(field, data, cols)
    return Q, dim, weight, rep


def quiver_to_json(Q: Quiver, dim, weight, rep) -> dict:
    out = Q.to_json()
    out["dim"] = dict(dim)
    out["weight"] = dict(weight)
    out["rep"] = {name: M.to_json() for name, M in rep.items()}
    return out
