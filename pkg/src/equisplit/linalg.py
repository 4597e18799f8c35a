"""Dense exact matrices and canonical subspaces over Q or F_l.

Everything here is immutable and compared exactly: there is no tolerance
anywhere in this package.  Maps use the column-vector convention, so
``A @ B`` means "apply B, then A" and the image of a matrix is its column
space.  Subspaces are stored as reduced row-echelon bases, which makes the
representation canonical: two subspaces are equal iff their stored bases
are identical.
"""

from .errors import AmbientMismatch, FieldMismatch, NotSquare, ShapeMismatch
from .fields import Field


class Matrix:
    """An immutable dense matrix over an exact field."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: Field, entries, cols: int | None = None):
        entries = tuple(tuple(row) for row in entries)
        self.field = field
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else (cols or 0)
        if any(len(row) != self.cols for row in entries):
            raise ShapeMismatch("ragged rows")
        self.entries = entries

    @classmethod
    def from_int_rows(cls, field: Field, rows) -> "Matrix":
        conv = field.from_int
        return cls(field, [[conv(a) for a in row] for row in rows])

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        one, zero = field.one(), field.zero()
        return cls(field, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, field: Field, rows: int, cols: int) -> "Matrix":
        z = field.zero()
        return cls(field, [[z] * cols for _ in range(rows)], cols=cols)

    def _check_field(self, other: "Matrix"):
        if self.field != other.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("addition shape mismatch")
        ell = self.field.char
        if ell:
            rows = [
                [(a + b) % ell for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        else:
            rows = [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        return Matrix(self.field, rows)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("subtraction shape mismatch")
        ell = self.field.char
        if ell:
            rows = [
                [(a - b) % ell for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        else:
            rows = [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        return Matrix(self.field, rows)

    def __neg__(self) -> "Matrix":
        return self.scale(self.field.from_int(-1))

    def scale(self, scalar) -> "Matrix":
        ell = self.field.char
        if ell:
            rows = [[(scalar * a) % ell for a in row] for row in self.entries]
        else:
            rows = [[scalar * a for a in row] for row in self.entries]
        return Matrix(self.field, rows)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.cols != other.rows:
            raise ShapeMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        if self.cols == 0:
            return Matrix.zero(self.field, self.rows, other.cols)
        cols = list(zip(*other.entries))
        ell = self.field.char
        if ell:
            rows = [
                [sum(a * b for a, b in zip(row, col)) % ell for col in cols]
                for row in self.entries
            ]
        else:
            rows = [
                [sum(a * b for a, b in zip(row, col)) for col in cols]
                for row in self.entries
            ]
        return Matrix(self.field, rows, cols=other.cols)

    def apply(self, vector) -> tuple:
        """Matrix-vector product (vector as a flat tuple of scalars)."""
        if len(vector) != self.cols:
            raise ShapeMismatch("vector length mismatch")
        ell = self.field.char
        if ell:
            return tuple(sum(a * v for a, v in zip(row, vector)) % ell for row in self.entries)
        return tuple(sum(a * v for a, v in zip(row, vector)) for row in self.entries)

    def transpose(self) -> "Matrix":
        if self.rows and self.cols:
            return Matrix(self.field, zip(*self.entries))
        if self.rows == 0:
            return Matrix(self.field, ((),) * self.cols)
        return Matrix(self.field, (), cols=self.rows)

    def permute_rows(self, mapping) -> "Matrix":
        """Row i of the result is row mapping[i] of self."""
        return Matrix(self.field, (self.entries[mapping[i]] for i in range(self.rows)))

    def permute_cols(self, mapping) -> "Matrix":
        """Column j of the result is column mapping[j] of self."""
        return Matrix(self.field, ((row[mapping[j]] for j in range(self.cols)) for row in self.entries))

    def hstack(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.rows != other.rows:
            raise ShapeMismatch("hstack row mismatch")
        return Matrix(
            self.field,
            (ra + rb for ra, rb in zip(self.entries, other.entries)),
            cols=self.cols + other.cols,
        )

    def vstack(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.cols != other.cols:
            raise ShapeMismatch("vstack column mismatch")
        return Matrix(self.field, self.entries + other.entries, cols=self.cols)

    def submatrix(self, row_indices, col_indices) -> "Matrix":
        return Matrix(
            self.field,
            ((self.entries[i][j] for j in col_indices) for i in row_indices),
        )

    def is_zero(self) -> bool:
        return all(not a for row in self.entries for a in row)

    def is_identity(self) -> bool:
        if self.rows != self.cols:
            return False
        return self == Matrix.identity(self.field, self.rows)

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.field, self.entries))

    def __repr__(self):
        return f"Matrix({self.field.tag}, {self.rows}x{self.cols})"


def _rref_rows(field: Field, entries):
    """Reduced row-echelon form of a list of rows; returns (rows, pivot_cols)."""
    rows = [list(r) for r in entries]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    ell = field.char
    for c in range(ncols):
        pivot_row = next((i for i in range(r, nrows) if rows[i][c]), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        if ell:
            inv = pow(rows[r][c], -1, ell)
            rows[r] = [(a * inv) % ell for a in rows[r]]
            lead = rows[r]
            for i in range(nrows):
                if i != r and rows[i][c]:
                    f = rows[i][c]
                    rows[i] = [(a - f * b) % ell for a, b in zip(rows[i], lead)]
        else:
            inv = 1 / rows[r][c]
            rows[r] = [a * inv for a in rows[r]]
            lead = rows[r]
            for i in range(nrows):
                if i != r and rows[i][c]:
                    f = rows[i][c]
                    rows[i] = [a - f * b for a, b in zip(rows[i], lead)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def rref(m: Matrix) -> Matrix:
    """The unique reduced row-echelon form of ``m`` (row space preserved)."""
    rows, _ = _rref_rows(m.field, m.entries)
    return Matrix(m.field, rows)


def rank(m: Matrix) -> int:
    _, pivots = _rref_rows(m.field, m.entries)
    return len(pivots)


def is_idempotent(m: Matrix) -> bool:
    """True iff m @ m == m exactly."""
    if m.rows != m.cols:
        raise NotSquare(f"{m.rows}x{m.cols}")
    return m @ m == m


def inverse(m: Matrix) -> Matrix:
    """Inverse of a square invertible matrix, via [m | I] row reduction."""
    if m.rows != m.cols:
        raise NotSquare(f"{m.rows}x{m.cols}")
    n = m.rows
    aug = m.hstack(Matrix.identity(m.field, n))
    rows, pivots = _rref_rows(m.field, aug.entries)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return Matrix(m.field, (row[n:] for row in rows))


class Subspace:
    """A linear subspace in canonical form: the row space of an RREF basis.

    ``basis`` holds the nonzero RREF rows, so equal subspaces have
    identical stored bases.
    """

    __slots__ = ("field", "ambient_dim", "basis", "pivots")

    def __init__(self, field: Field, ambient_dim: int, basis, pivots):
        self.field = field
        self.ambient_dim = ambient_dim
        self.basis = tuple(tuple(row) for row in basis)
        self.pivots = tuple(pivots)

    @classmethod
    def from_rows(cls, field: Field, ambient_dim: int, rows) -> "Subspace":
        """Canonical subspace spanned by the given row vectors.

        Plain ints in the rows are coerced to field scalars.
        """
        conv = field.from_int
        rows = [
            [conv(a) if isinstance(a, int) and field.char == 0 else a for a in row]
            for row in rows
            if any(row)
        ]
        if not rows:
            return cls(field, ambient_dim, (), ())
        if any(len(row) != ambient_dim for row in rows):
            raise AmbientMismatch("spanning row of wrong length")
        reduced, pivots = _rref_rows(field, rows)
        return cls(field, ambient_dim, reduced[: len(pivots)], pivots)

    @classmethod
    def zero(cls, field: Field, ambient_dim: int) -> "Subspace":
        return cls(field, ambient_dim, (), ())

    @classmethod
    def full(cls, field: Field, ambient_dim: int) -> "Subspace":
        eye = Matrix.identity(field, ambient_dim)
        return cls(field, ambient_dim, eye.entries, range(ambient_dim))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, vector) -> bool:
        if len(vector) != self.ambient_dim:
            raise AmbientMismatch("vector of wrong length")
        v = list(vector)
        ell = self.field.char
        for row, p in zip(self.basis, self.pivots):
            f = v[p]
            if f:
                if ell:
                    v = [(a - f * b) % ell for a, b in zip(v, row)]
                else:
                    v = [a - f * b for a, b in zip(v, row)]
        return not any(v)

    def contains_space(self, other: "Subspace") -> bool:
        self._check(other)
        return all(self.contains(row) for row in other.basis)

    def _check(self, other: "Subspace"):
        if self.field != other.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        if self.ambient_dim != other.ambient_dim:
            raise AmbientMismatch(f"{self.ambient_dim} vs {other.ambient_dim}")

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.field == other.field
            and self.ambient_dim == other.ambient_dim
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.field, self.ambient_dim, self.basis))

    def __repr__(self):
        return f"Subspace(dim {self.dim} of {self.ambient_dim} over {self.field.tag})"


def image(m: Matrix) -> Subspace:
    """Column space of ``m`` as a canonical subspace."""
    return Subspace.from_rows(m.field, m.rows, zip(*m.entries))


def kernel(m: Matrix) -> Subspace:
    """Null space {x : m x = 0} as a canonical subspace."""
    reduced, pivots = _rref_rows(m.field, m.entries)
    n = m.cols
    free = [c for c in range(n) if c not in set(pivots)]
    zero, one = m.field.zero(), m.field.one()
    vectors = []
    for f in free:
        v = [zero] * n
        v[f] = one
        for row, p in zip(reduced, pivots):
            v[p] = m.field.neg(row[f])
        vectors.append(v)
    return Subspace.from_rows(m.field, n, vectors)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    """Sum of two subspaces of the same ambient space."""
    a._check(b)
    return Subspace.from_rows(a.field, a.ambient_dim, a.basis + b.basis)


def subspace_intersect(a: Subspace, b: Subspace) -> Subspace:
    """Intersection, via the kernel of the stacked-basis matrix.

    A vector lies in both row spaces iff it is x.A = y.B for some x, y, i.e.
    (x, -y) lies in the left null space of the stacked matrix [A; B].
    """
    a._check(b)
    if not a.basis or not b.basis:
        return Subspace.zero(a.field, a.ambient_dim)
    stacked = Matrix(a.field, a.basis + b.basis)
    left_null = kernel(stacked.transpose())
    a_mat = Matrix(a.field, a.basis)
    vectors = [a_mat.transpose().apply(coeffs[: len(a.basis)]) for coeffs in left_null.basis]
    return Subspace.from_rows(a.field, a.ambient_dim, vectors)
