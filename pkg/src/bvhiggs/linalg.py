"""Sparse linear algebra over exact scalar fields, with a float fallback.

Matrix entries may be Fraction, QuadExt (a + b*sqrt(d) with a, b rational),
float or complex.  Everything exact goes through plain Gaussian elimination
with a sparsity-greedy pivot; the sizes this package meets (a few hundred
columns) make that entirely adequate.  Float ranks use an SVD with a relative
threshold and report near-threshold singular values as a conditioning flag.
"""
from __future__ import annotations

from fractions import Fraction
import math

import numpy as np


def _squarefree_split(n: int):
    # n = s^2 * d with d squarefree; trial division is fine at our sizes
    s, d = 1, 1
    m = n
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            s *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    d *= m
    return s, d


class QuadExt:
    """Element a + b*sqrt(d) of a real quadratic extension of the rationals.

    d is a squarefree integer >= 2.  Elements with b == 0 compare and hash
    like plain rationals, so mixed-field arithmetic works whenever at most
    one genuine square root is involved.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=2):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = int(d)
        if self.b and self.d < 2:
            raise ValueError("irrational part needs d >= 2")

    def _pair(self, other):
        if isinstance(other, QuadExt):
            if self.b and other.b and self.d != other.d:
                raise ValueError("mixed quadratic fields %d and %d" % (self.d, other.d))
            return other.a, other.b, (self.d if self.b else other.d)
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0), self.d
        return None

    def __add__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        oa, ob, d = p
        return _quad(self.a + oa, self.b + ob, d)

    __radd__ = __add__

    def __sub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        oa, ob, d = p
        return _quad(self.a - oa, self.b - ob, d)

    def __rsub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        oa, ob, d = p
        return _quad(oa - self.a, ob - self.b, d)

    def __neg__(self):
        return _quad(-self.a, -self.b, self.d)

    def __mul__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        oa, ob, d = p
        return _quad(self.a * oa + self.b * ob * d, self.a * ob + self.b * oa, d)

    __rmul__ = __mul__

    def inverse(self):
        n = self.a * self.a - self.b * self.b * self.d
        if not n:
            raise ZeroDivisionError("division by zero in quadratic field")
        return _quad(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        oa, ob, d = p
        return self * _quad(oa, ob, d).inverse()

    def __rtruediv__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        oa, ob, d = p
        return _quad(oa, ob, d) * self.inverse()

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        if isinstance(other, QuadExt):
            if self.b and other.b and self.d != other.d:
                return False
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return not self.b and self.a == other
        return NotImplemented

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash(("quad", self.a, self.b, self.d))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __abs__(self):
        v = float(self)
        return abs(v)

    def __repr__(self):
        if not self.b:
            return "QuadExt(%s)" % (self.a,)
        return "QuadExt(%s, %s, d=%d)" % (self.a, self.b, self.d)


def _quad(a, b, d):
    q = QuadExt.__new__(QuadExt)
    q.a = a
    q.b = b
    q.d = d
    return q


def sqrt_fraction(q):
    """Exact square root of a nonnegative rational: Fraction if it is a
    perfect square, QuadExt otherwise."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative radicand")
    if q == 0:
        return Fraction(0)
    # sqrt(p/q) = sqrt(p*q)/q
    s, d = _squarefree_split(q.numerator * q.denominator)
    if d == 1:
        return Fraction(s, q.denominator)
    return QuadExt(0, Fraction(s, q.denominator), d)


def _as_float(x):
    if isinstance(x, complex):
        return x
    return float(x)


class SparseMatrix:
    """Dict-of-keys sparse matrix.  Keys are (row, col), values nonzero."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data=None):
        self.rows = rows
        self.cols = cols
        self.data = {}
        if data:
            for k, v in data.items():
                if v:
                    i, j = k
                    if not (0 <= i < rows and 0 <= j < cols):
                        raise IndexError("entry %s outside %dx%d" % (k, rows, cols))
                    self.data[k] = v

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols)

    @classmethod
    def identity(cls, n, one=Fraction(1)):
        return cls(n, n, {(i, i): one for i in range(n)})

    @classmethod
    def from_dense(cls, rows_list):
        r = len(rows_list)
        c = len(rows_list[0]) if r else 0
        data = {}
        for i, row in enumerate(rows_list):
            if len(row) != c:
                raise ValueError("ragged rows")
            for j, v in enumerate(row):
                if v:
                    data[(i, j)] = v
        return cls(r, c, data)

    @classmethod
    def from_diag(cls, values):
        n = len(values)
        return cls(n, n, {(i, i): v for i, v in enumerate(values) if v})

    def copy(self):
        m = SparseMatrix(self.rows, self.cols)
        m.data = dict(self.data)
        return m

    def nnz(self):
        return len(self.data)

    def is_zero(self):
        return not self.data

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self.data == other.data

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch %sx%s vs %sx%s"
                             % (self.rows, self.cols, other.rows, other.cols))
        out = dict(self.data)
        for k, v in other.data.items():
            s = out.get(k)
            s = v if s is None else s + v
            if s:
                out[k] = s
            elif k in out:
                del out[k]
        m = SparseMatrix(self.rows, self.cols)
        m.data = out
        return m

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        m = SparseMatrix(self.rows, self.cols)
        m.data = {k: -v for k, v in self.data.items()}
        return m

    def scale(self, c):
        m = SparseMatrix(self.rows, self.cols)
        if c:
            m.data = {k: c * v for k, v in self.data.items() if c * v}
        return m

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("inner dimension mismatch %d vs %d" % (self.cols, other.rows))
        rows_other = {}
        for (i, j), v in other.data.items():
            rows_other.setdefault(i, {})[j] = v
        out = {}
        for (i, k), a in self.data.items():
            row = rows_other.get(k)
            if not row:
                continue
            for j, b in row.items():
                key = (i, j)
                s = out.get(key)
                s = a * b if s is None else s + a * b
                if s:
                    out[key] = s
                elif key in out:
                    del out[key]
        m = SparseMatrix(self.rows, other.cols)
        m.data = out
        return m

    def transpose(self):
        m = SparseMatrix(self.cols, self.rows)
        m.data = {(j, i): v for (i, j), v in self.data.items()}
        return m

    def kron(self, other):
        """Kronecker product; row index is self-major."""
        m = SparseMatrix(self.rows * other.rows, self.cols * other.cols)
        for (i, j), a in self.data.items():
            for (k, l), b in other.data.items():
                v = a * b
                if v:
                    m.data[(i * other.rows + k, j * other.cols + l)] = v
        return m

    def apply(self, vec):
        if len(vec) != self.cols:
            raise ValueError("vector length %d, expected %d" % (len(vec), self.cols))
        out = [0] * self.rows
        for (i, j), a in self.data.items():
            x = vec[j]
            if x:
                out[i] = out[i] + a * x
        return out

    def map_entries(self, fn):
        m = SparseMatrix(self.rows, self.cols)
        for k, v in self.data.items():
            w = fn(v)
            if w:
                m.data[k] = w
        return m

    def submatrix(self, row_idx, col_idx):
        rpos = {r: i for i, r in enumerate(row_idx)}
        cpos = {c: j for j, c in enumerate(col_idx)}
        m = SparseMatrix(len(row_idx), len(col_idx))
        for (i, j), v in self.data.items():
            if i in rpos and j in cpos:
                m.data[(rpos[i], cpos[j])] = v
        return m

    def to_dense(self, zero=Fraction(0)):
        out = [[zero] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.data.items():
            out[i][j] = v
        return out

    def to_numpy(self):
        cplx = any(isinstance(v, complex) for v in self.data.values())
        arr = np.zeros((self.rows, self.cols), dtype=complex if cplx else float)
        for (i, j), v in self.data.items():
            arr[i, j] = _as_float(v)
        return arr

    def max_abs(self):
        if not self.data:
            return 0.0
        return max(abs(_as_float(v)) for v in self.data.values())

    def argmax_abs(self):
        """(row, col) of the largest-magnitude entry, None if empty."""
        if not self.data:
            return None
        return max(self.data, key=lambda k: abs(_as_float(self.data[k])))

    def __repr__(self):
        return "SparseMatrix(%dx%d, nnz=%d)" % (self.rows, self.cols, self.nnz())


def stack_rows(mats):
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise ValueError("column mismatch in row stack")
    out = SparseMatrix(sum(m.rows for m in mats), cols)
    off = 0
    for m in mats:
        for (i, j), v in m.data.items():
            out.data[(off + i, j)] = v
        off += m.rows
    return out


def block_diag(mats):
    out = SparseMatrix(sum(m.rows for m in mats), sum(m.cols for m in mats))
    ro = co = 0
    for m in mats:
        for (i, j), v in m.data.items():
            out.data[(ro + i, co + j)] = v
        ro += m.rows
        co += m.cols
    return out


def exact_rank(mat: SparseMatrix) -> int:
    """Rank over the entry field by sparse Gaussian elimination.

    Pivot rows are chosen sparsest-first within each column, which keeps
    fill-in tolerable on the banded incidence-type matrices we feed it.
    """
    rows = {}
    for (i, j), v in mat.data.items():
        rows.setdefault(i, {})[j] = v
    by_col = {}
    for i, row in rows.items():
        for j in row:
            by_col.setdefault(j, set()).add(i)
    active = set(rows)
    rank = 0
    for col in range(mat.cols):
        # by_col is append-only, so filter for entries still present
        cands = [r for r in by_col.get(col, ()) if r in active and col in rows[r]]
        if not cands:
            continue
        piv = min(cands, key=lambda r: (len(rows[r]), r))
        prow = rows[piv]
        pval = prow[col]
        active.discard(piv)
        rank += 1
        for r in cands:
            if r == piv:
                continue
            rrow = rows[r]
            f = rrow[col] / pval
            for j, v in prow.items():
                s = rrow.get(j)
                s = -f * v if s is None else s - f * v
                if s:
                    rrow[j] = s
                    by_col.setdefault(j, set()).add(r)
                elif j in rrow:
                    del rrow[j]
            if col in rrow:
                del rrow[col]
    return rank


def exact_rref(dense, cols):
    """In-place reduced row echelon form on a dense list-of-lists.
    Returns the list of pivot column indices."""
    nr = len(dense)
    pivots = []
    r = 0
    for c in range(cols):
        p = None
        for i in range(r, nr):
            if dense[i][c]:
                p = i
                break
        if p is None:
            continue
        dense[r], dense[p] = dense[p], dense[r]
        pv = dense[r][c]
        dense[r] = [x / pv for x in dense[r]]
        for i in range(nr):
            if i != r and dense[i][c]:
                f = dense[i][c]
                dense[i] = [x - f * y for x, y in zip(dense[i], dense[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return pivots


def exact_nullspace(mat: SparseMatrix):
    """Basis of the right kernel, as a list of length-cols lists."""
    dense = mat.to_dense()
    pivots = exact_rref(dense, mat.cols)
    pivot_set = set(pivots)
    free = [c for c in range(mat.cols) if c not in pivot_set]
    basis = []
    for fc in free:
        v = [Fraction(0)] * mat.cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -dense[r][fc]
        basis.append(v)
    return basis


def invert_dense(mat: SparseMatrix) -> SparseMatrix:
    """Exact inverse of a small square matrix."""
    n = mat.rows
    if n != mat.cols:
        raise ValueError("not square")
    aug = [row + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
           for i, row in enumerate(mat.to_dense())]
    pivots = exact_rref(aug, n)
    if len(pivots) != n:
        raise ValueError("singular matrix")
    return SparseMatrix.from_dense([row[n:] for row in aug])


def solve_dense(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """Solve a @ x = b exactly for square invertible a."""
    return invert_dense(a) @ b


def float_rank(mat: SparseMatrix, tol: float = 1e-9):
    """SVD rank with relative threshold.

    Returns (rank, ill_conditioned, threshold, smax).  ill_conditioned is set
    when some singular value falls within a factor of 10 of the threshold,
    on either side; callers surface it as a warning flag.
    """
    if mat.is_zero():
        return 0, False, 0.0, 0.0
    arr = mat.to_numpy()
    svals = np.linalg.svd(arr, compute_uv=False)
    smax = float(svals[0])
    thr = tol * smax
    rank = int((svals > thr).sum())
    ill = bool(np.any((svals > thr / 10.0) & (svals < thr * 10.0)))
    return rank, ill, thr, smax


def rank(mat: SparseMatrix, mode: str = "rational", tol: float = 1e-9) -> int:
    if mode == "rational":
        return exact_rank(mat)
    if mode == "float":
        return float_rank(mat, tol)[0]
    raise ValueError("unknown mode %r" % (mode,))
