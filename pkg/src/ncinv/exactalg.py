"""Exact scalar fields and dense exact linear algebra.

Scalars are plain Python objects: ``int`` residues in ``[0, p)`` for a prime
field, ``fractions.Fraction`` for the rationals.  Matrices are immutable
row-major tuples of tuples.  Every routine is exact; the pivot rule (first
nonzero entry in scan order) only fixes determinism.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_PRIME = 2**61 - 1

# Entries of random rational samples are integers drawn from [-B, B].
RATIONAL_SAMPLE_BOUND = 2**20


class ExactAlgError(ValueError):
    pass


class NonSquare(ExactAlgError):
    pass


class Singular(ExactAlgError):
    pass


class ShapeMismatch(ExactAlgError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24, probabilistic beyond."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """A prime field GF(p) (``prime`` set) or the rationals (``prime is None``)."""

    prime: int | None = DEFAULT_PRIME

    def __post_init__(self):
        if self.prime is not None and not is_prime(self.prime):
            raise ExactAlgError(f"{self.prime} is not prime")

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls(prime=None)

    @property
    def is_prime_field(self) -> bool:
        return self.prime is not None

    @property
    def sample_size(self) -> int:
        """Size of the set random scalars are drawn from (for Schwartz-Zippel)."""
        if self.prime is not None:
            return self.prime
        return 2 * RATIONAL_SAMPLE_BOUND + 1

    def __call__(self, value) -> int | Fraction:
        """Canonical scalar from an int, Fraction or decimal string ("a" or "a/b")."""
        if isinstance(value, str):
            value = Fraction(value)
        if self.prime is None:
            return Fraction(value)
        if isinstance(value, Fraction):
            return value.numerator * pow(value.denominator, -1, self.prime) % self.prime
        return int(value) % self.prime

    @property
    def zero(self):
        return 0 if self.prime is not None else Fraction(0)

    @property
    def one(self):
        return 1 if self.prime is not None else Fraction(1)

    def inv(self, x):
        if x == 0:
            raise Singular("inverse of zero")
        if self.prime is None:
            return 1 / x
        return pow(x, -1, self.prime)

    def random(self, rng: random.Random):
        if self.prime is None:
            return Fraction(rng.randint(-RATIONAL_SAMPLE_BOUND, RATIONAL_SAMPLE_BOUND))
        return rng.randrange(self.prime)

    def to_json(self) -> dict:
        if self.prime is None:
            return {"rationals": True}
        return {"prime": str(self.prime)}

    @classmethod
    def from_json(cls, obj: dict) -> "FieldSpec":
        if obj.get("rationals"):
            return cls.rationals()
        return cls(int(obj["prime"]))


def substream(seed: int, *labels) -> random.Random:
    """Independent, reproducible RNG for one (seed, labels...) pair."""
    return random.Random("/".join(str(x) for x in (seed, *labels)))


def _scalar_str(x) -> str:
    if isinstance(x, Fraction) and x.denominator != 1:
        return f"{x.numerator}/{x.denominator}"
    return str(int(x))


class ExactMatrix:
    """Immutable dense matrix over a :class:`FieldSpec`."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: FieldSpec, data: Iterable[Sequence], cols: int | None = None):
        rows = tuple(tuple(r) for r in data)
        if cols is None:
            if not rows:
                raise ShapeMismatch("cannot infer column count of an empty matrix")
            cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise ShapeMismatch("ragged rows")
        self.field = field
        self.rows = len(rows)
        self.cols = cols
        self.data = rows

    # construction -------------------------------------------------------

    @classmethod
    def from_values(cls, field: FieldSpec, values, cols: int | None = None) -> "ExactMatrix":
        return cls(field, [[field(v) for v in row] for row in values], cols)

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "ExactMatrix":
        z = field.zero
        return cls(field, [[z] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "ExactMatrix":
        z, o = field.zero, field.one
        return cls(field, [[o if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def diag(cls, field: FieldSpec, values) -> "ExactMatrix":
        values = [field(v) for v in values]
        n = len(values)
        z = field.zero
        return cls(field, [[values[i] if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def random(cls, field: FieldSpec, rows: int, cols: int, rng: random.Random) -> "ExactMatrix":
        return cls(field, [[field.random(rng) for _ in range(cols)] for _ in range(rows)], cols)

    @classmethod
    def blocks(cls, field: FieldSpec, grid: Sequence[Sequence["ExactMatrix"]]) -> "ExactMatrix":
        """Assemble a block matrix; every block row must share heights."""
        out: list[list] = []
        cols = None
        for brow in grid:
            h = brow[0].rows
            if any(b.rows != h for b in brow):
                raise ShapeMismatch("block heights differ in a block row")
            for i in range(h):
                line: list = []
                for b in brow:
                    line.extend(b.data[i])
                out.append(line)
            width = sum(b.cols for b in brow)
            if cols is None:
                cols = width
            elif cols != width:
                raise ShapeMismatch("block rows have different widths")
        return cls(field, out, cols or 0)

    # basic protocol -----------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, idx):
        i, j = idx
        return self.data[i][j]

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and self.data == other.data

    def __hash__(self):
        return hash((self.field, self.rows, self.cols, self.data))

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols}, {[list(map(_scalar_str, r)) for r in self.data]})"

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def _check_same(self, other: "ExactMatrix"):
        if self.field != other.field:
            raise ShapeMismatch("matrices over different fields")
        if self.shape != other.shape:
            raise ShapeMismatch(f"shape {self.shape} vs {other.shape}")

    def _wrap(self, rows, cols=None) -> "ExactMatrix":
        return ExactMatrix(self.field, rows, self.cols if cols is None else cols)

    def _reduce_rows(self, rows):
        p = self.field.prime
        if p is None:
            return rows
        return [[x % p for x in r] for r in rows]

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same(other)
        rows = [[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)]
        return self._wrap(self._reduce_rows(rows))

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same(other)
        rows = [[a - b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)]
        return self._wrap(self._reduce_rows(rows))

    def __neg__(self) -> "ExactMatrix":
        return self._wrap(self._reduce_rows([[-a for a in r] for r in self.data]))

    def scale(self, c) -> "ExactMatrix":
        c = self.field(c)
        return self._wrap(self._reduce_rows([[c * a for a in r] for r in self.data]))

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.field != other.field:
            raise ShapeMismatch("matrices over different fields")
        if self.cols != other.rows:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols_t = list(zip(*other.data)) if other.rows else [()] * other.cols
        p = self.field.prime
        if p is None:
            rows = [[sum(a * b for a, b in zip(r, c)) for c in cols_t] for r in self.data]
        else:
            rows = [[sum(a * b for a, b in zip(r, c)) % p for c in cols_t] for r in self.data]
        return ExactMatrix(self.field, rows, other.cols)

    def __pow__(self, e: int) -> "ExactMatrix":
        if not self.is_square:
            raise NonSquare("power of a non-square matrix")
        result = ExactMatrix.identity(self.field, self.rows)
        base = self
        while e > 0:
            if e & 1:
                result = result @ base
            base = base @ base
            e >>= 1
        return result

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.field, [list(c) for c in zip(*self.data)], self.rows)

    @property
    def T(self) -> "ExactMatrix":
        return self.transpose()

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "ExactMatrix":
        return ExactMatrix(self.field, [row[c0:c1] for row in self.data[r0:r1]], c1 - c0)

    def column(self, j: int) -> list:
        return [row[j] for row in self.data]

    # serialization ------------------------------------------------------

    def to_json(self) -> list[list[str]]:
        return [[_scalar_str(x) for x in row] for row in self.data]

    @classmethod
    def from_json(cls, field: FieldSpec, obj, cols: int | None = None) -> "ExactMatrix":
        return cls.from_values(field, obj, cols)


# elimination -------------------------------------------------------------


def _echelon(M: ExactMatrix) -> tuple[int, object]:
    """Forward elimination; returns (rank, determinant or None if non-square)."""
    field = M.field
    p = field.prime
    rows = [list(r) for r in M.data]
    n_rows, n_cols = M.rows, M.cols
    rank = 0
    det = field.one
    for col in range(n_cols):
        if rank == n_rows:
            break
        piv = None
        for i in range(rank, n_rows):
            if rows[i][col] != 0:
                piv = i
                break
        if piv is None:
            det = field.zero
            continue
        if piv != rank:
            rows[piv], rows[rank] = rows[rank], rows[piv]
            det = -det
        prow = rows[rank]
        pval = prow[col]
        det = det * pval if p is None else det * pval % p
        inv = field.inv(pval)
        for i in range(rank + 1, n_rows):
            r = rows[i]
            if r[col] == 0:
                continue
            f = r[col] * inv
            if p is None:
                rows[i] = [a - f * b for a, b in zip(r, prow)]
            else:
                f %= p
                rows[i] = [(a - f * b) % p for a, b in zip(r, prow)]
        rank += 1
    if n_rows != n_cols:
        return rank, None
    if rank < n_rows:
        return rank, field.zero
    return rank, (det % p if p is not None else det)


def rank(M: ExactMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return _echelon(M)[0]


def det(M: ExactMatrix):
    if not M.is_square:
        raise NonSquare(f"det of a {M.rows}x{M.cols} matrix")
    if M.rows == 0:
        return M.field.one
    return _echelon(M)[1]


def inverse(M: ExactMatrix) -> ExactMatrix:
    """Gauss-Jordan inverse; raises :class:`Singular` when det(M) = 0."""
    if not M.is_square:
        raise NonSquare(f"inverse of a {M.rows}x{M.cols} matrix")
    field = M.field
    p = field.prime
    n = M.rows
    z, o = field.zero, field.one
    rows = [list(r) + [o if i == j else z for j in range(n)] for i, r in enumerate(M.data)]
    for col in range(n):
        piv = next((i for i in range(col, n) if rows[i][col] != 0), None)
        if piv is None:
            raise Singular("matrix is singular")
        rows[piv], rows[col] = rows[col], rows[piv]
        inv = field.inv(rows[col][col])
        prow = [a * inv for a in rows[col]]
        if p is not None:
            prow = [a % p for a in prow]
        rows[col] = prow
        for i in range(n):
            if i == col or rows[i][col] == 0:
                continue
            f = rows[i][col]
            if p is None:
                rows[i] = [a - f * b for a, b in zip(rows[i], prow)]
            else:
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], prow)]
    return ExactMatrix(field, [r[n:] for r in rows], n)


def kronecker(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    """(i, j) block of the result is a_ij * B."""
    if A.field != B.field:
        raise ShapeMismatch("matrices over different fields")
    p = A.field.prime
    out = []
    for arow in A.data:
        for brow in B.data:
            line = []
            for a in arow:
                line.extend(a * b for b in brow)
            out.append(line if p is None else [x % p for x in line])
    return ExactMatrix(A.field, out, A.cols * B.cols)


def direct_sum(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    z = A.field.zero
    rows = [list(r) + [z] * B.cols for r in A.data]
    rows += [[z] * A.cols + list(r) for r in B.data]
    return ExactMatrix(A.field, rows, A.cols + B.cols)


def charpoly(A: ExactMatrix) -> list:
    """Coefficients (c_0, ..., c_{k-1}) of the monic characteristic polynomial.

    Berkowitz's algorithm: only ring operations, so it is valid over GF(p)
    for every p, including p <= k.
    """
    if not A.is_square:
        raise NonSquare(f"charpoly of a {A.rows}x{A.cols} matrix")
    field = A.field
    p = field.prime
    n = A.rows
    one, zero = field.one, field.zero
    red = (lambda x: x) if p is None else (lambda x: x % p)
    # poly holds coefficients of det(tI - A_r) from highest degree down,
    # where A_r is the leading r x r principal submatrix.
    poly = [one]
    for r in range(n):
        a_rr = A.data[r][r]
        R = A.data[r][:r]  # row r, columns < r
        C = [A.data[i][r] for i in range(r)]  # column r, rows < r
        sub = [A.data[i][:r] for i in range(r)]
        # Toeplitz column: 1, -a_rr, -R C, -R S C, -R S^2 C, ...
        col = [one, red(-a_rr)]
        v = C
        for _ in range(r):
            col.append(red(-sum(x * y for x, y in zip(R, v))))
            v = [red(sum(x * y for x, y in zip(srow, v))) for srow in sub]
        new = []
        for i in range(r + 2):
            s = zero
            for j in range(min(i, r) + 1):
                s += col[i - j] * poly[j]
            new.append(red(s))
        poly = new
    # poly = [1, c_{n-1}, ..., c_0]
    return list(reversed(poly[1:]))


def poly_eval_matrix(coeffs: Sequence, A: ExactMatrix) -> ExactMatrix:
    """Evaluate the monic polynomial t^k + c_{k-1} t^{k-1} + ... + c_0 at A (Horner)."""
    n = A.rows
    I = ExactMatrix.identity(A.field, n)
    acc = I
    for c in reversed(coeffs):
        acc = acc @ A + I.scale(c)
    return acc


def det_berkowitz(M: ExactMatrix):
    """Determinant read off the characteristic polynomial; independent of elimination."""
    if not M.is_square:
        raise NonSquare(f"det of a {M.rows}x{M.cols} matrix")
    n = M.rows
    if n == 0:
        return M.field.one
    c0 = charpoly(M)[0]
    return M.field(c0 if n % 2 == 0 else -c0)
