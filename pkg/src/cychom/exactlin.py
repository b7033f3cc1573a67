"""Exact sparse linear algebra over F_p (p prime) and Q.

Matrices are sparse maps acting on column vectors; subspaces are kept in
reduced row echelon form, which is canonical, so equal subspaces always
compare equal entrywise.  Everything is deterministic: no randomized
pivoting anywhere.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

# rows*cols below this bound go through the dense numpy path over F_p
_DENSE_CELLS = 250_000


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class Field:
    """F_p for prime p, or Q (characteristic 0)."""

    def __init__(self, characteristic: int):
        if characteristic != 0 and not _is_prime(characteristic):
            raise ValueError("characteristic must be 0 or prime")
        self.p = characteristic

    @property
    def is_prime_field(self) -> bool:
        return self.p != 0

    def coerce(self, x):
        if self.p:
            return int(x) % self.p
        if isinstance(x, Fraction):
            return x
        return Fraction(x)

    def zero(self):
        return 0 if self.p else Fraction(0)

    def one(self):
        return 1 if self.p else Fraction(1)

    def add(self, a, b):
        return (a + b) % self.p if self.p else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.p else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.p else a * b

    def neg(self, a):
        return (-a) % self.p if self.p else -a

    def inv(self, a):
        if self.p:
            a %= self.p
            if a == 0:
                raise ZeroDivisionError("no inverse for 0")
            return pow(a, self.p - 2, self.p)
        if a == 0:
            raise ZeroDivisionError("no inverse for 0")
        return Fraction(1) / a

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return "Q" if self.p == 0 else "F%d" % self.p


QQ = Field(0)


class Matrix:
    """Sparse exact matrix: rows x cols, entries stored as {row: {col: val}}."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: Field, rows: int, cols: int,
                 data: Optional[Dict[int, Dict[int, object]]] = None):
        self.field = field
        self.rows = rows
        self.cols = cols
        self.data = data if data is not None else {}

    # -- constructors ------------------------------------------------

    @classmethod
    def zero(cls, field, rows, cols):
        return cls(field, rows, cols)

    @classmethod
    def identity(cls, field, n):
        one = field.one()
        return cls(field, n, n, {i: {i: one} for i in range(n)})

    @classmethod
    def from_rows(cls, field, rows_list):
        data = {}
        ncols = len(rows_list[0]) if rows_list else 0
        for r, row in enumerate(rows_list):
            d = {}
            for c, v in enumerate(row):
                v = field.coerce(v)
                if v:
                    d[c] = v
            if d:
                data[r] = d
        return cls(field, len(rows_list), ncols, data)

    @classmethod
    def from_entries(cls, field, rows, cols, entries: Iterable[Tuple[int, int, object]]):
        data: Dict[int, Dict[int, object]] = {}
        for r, c, v in entries:
            v = field.coerce(v)
            if not v:
                continue
            row = data.setdefault(r, {})
            if c in row:
                v = field.add(row[c], v)
                if v:
                    row[c] = v
                else:
                    del row[c]
                    if not row:
                        del data[r]
            else:
                row[c] = v
        return cls(field, rows, cols, data)

    # -- bookkeeping -------------------------------------------------

    def entry(self, r, c):
        return self.data.get(r, {}).get(c, self.field.zero())

    def nnz(self):
        return sum(len(row) for row in self.data.values())

    def is_zero(self):
        return not self.data

    def copy(self):
        return Matrix(self.field, self.rows, self.cols,
                      {r: dict(row) for r, row in self.data.items()})

    def __eq__(self, other):
        return (isinstance(other, Matrix) and other.rows == self.rows
                and other.cols == self.cols and other.field == self.field
                and other.data == self.data)

    def __repr__(self):
        return "Matrix(%r, %dx%d, nnz=%d)" % (self.field, self.rows, self.cols, self.nnz())

    # -- arithmetic --------------------------------------------------

    def add(self, other):
        assert self.rows == other.rows and self.cols == other.cols
        F = self.field
        out = {r: dict(row) for r, row in self.data.items()}
        for r, row in other.data.items():
            mine = out.setdefault(r, {})
            for c, v in row.items():
                w = F.add(mine.get(c, F.zero()), v)
                if w:
                    mine[c] = w
                elif c in mine:
                    del mine[c]
            if not mine:
                del out[r]
        return Matrix(F, self.rows, self.cols, out)

    def scale(self, a):
        F = self.field
        a = F.coerce(a)
        if not a:
            return Matrix.zero(F, self.rows, self.cols)
        out = {r: {c: F.mul(a, v) for c, v in row.items()} for r, row in self.data.items()}
        return Matrix(F, self.rows, self.cols, out)

    def neg(self):
        return self.scale(self.field.neg(self.field.one()))

    def sub(self, other):
        return self.add(other.neg())

    def mul(self, other: "Matrix") -> "Matrix":
        """self @ other."""
        assert self.cols == other.rows, (self.cols, other.rows)
        F = self.field
        out: Dict[int, Dict[int, object]] = {}
        for r, row in self.data.items():
            acc: Dict[int, object] = {}
            for k, a in row.items():
                orow = other.data.get(k)
                if not orow:
                    continue
                for c, b in orow.items():
                    w = acc.get(c)
                    w = F.mul(a, b) if w is None else F.add(w, F.mul(a, b))
                    if w:
                        acc[c] = w
                    elif c in acc:
                        del acc[c]
            if acc:
                out[r] = acc
        return Matrix(F, self.rows, other.cols, out)

    def apply(self, vec: Dict[int, object]) -> Dict[int, object]:
        """Apply to a sparse column vector {index: val}."""
        F = self.field
        out: Dict[int, object] = {}
        for r, row in self.data.items():
            s = F.zero()
            for c, a in row.items():
                v = vec.get(c)
                if v is not None:
                    s = F.add(s, F.mul(a, v))
            if s:
                out[r] = s
        return out

    def transpose(self):
        out: Dict[int, Dict[int, object]] = {}
        for r, row in self.data.items():
            for c, v in row.items():
                out.setdefault(c, {})[r] = v
        return Matrix(self.field, self.cols, self.rows, out)

    def hstack(self, other):
        assert self.rows == other.rows
        out = {r: dict(row) for r, row in self.data.items()}
        for r, row in other.data.items():
            mine = out.setdefault(r, {})
            for c, v in row.items():
                mine[c + self.cols] = v
        return Matrix(self.field, self.rows, self.cols + other.cols, out)

    def vstack(self, other):
        assert self.cols == other.cols
        out = {r: dict(row) for r, row in self.data.items()}
        for r, row in other.data.items():
            out[r + self.rows] = dict(row)
        return Matrix(self.field, self.rows + other.rows, self.cols, out)

    def direct_sum(self, other):
        out = {r: dict(row) for r, row in self.data.items()}
        for r, row in other.data.items():
            out[r + self.rows] = {c + self.cols: v for c, v in row.items()}
        return Matrix(self.field, self.rows + other.rows, self.cols + other.cols, out)

    def kron(self, other):
        """Kronecker product (no signs; callers add Koszul signs themselves)."""
        F = self.field
        out: Dict[int, Dict[int, object]] = {}
        for r1, row1 in self.data.items():
            for r2, row2 in other.data.items():
                target = out.setdefault(r1 * other.rows + r2, {})
                for c1, v1 in row1.items():
                    for c2, v2 in row2.items():
                        target[c1 * other.cols + c2] = F.mul(v1, v2)
        return Matrix(F, self.rows * other.rows, self.cols * other.cols, out)

    def submatrix_cols(self, cols: List[int]):
        """Columns selected and re-indexed in the given order."""
        pos = {c: i for i, c in enumerate(cols)}
        out: Dict[int, Dict[int, object]] = {}
        for r, row in self.data.items():
            d = {pos[c]: v for c, v in row.items() if c in pos}
            if d:
                out[r] = d
        return Matrix(self.field, self.rows, len(cols), out)

    # -- elimination -------------------------------------------------

    def rank(self) -> int:
        return rank_of_rows(list(self.data.values()), self.cols, self.field)

    def rref(self) -> Tuple[List[Dict[int, object]], List[int]]:
        """Reduced echelon rows of the row space plus sorted pivot columns."""
        return rref_rows(list(self.data.values()), self.field)

    def kernel(self) -> "Subspace":
        rows, pivots = self.rref()
        pivset = set(pivots)
        F = self.field
        by_piv = {min(r): r for r in rows}
        basis = []
        for c in range(self.cols):
            if c in pivset:
                continue
            vec = {c: F.one()}
            for pc in pivots:
                v = by_piv[pc].get(c)
                if v:
                    vec[pc] = F.neg(v)
            basis.append(vec)
        return Subspace(F, self.cols, basis)

    def image(self) -> "Subspace":
        t = self.transpose()
        rows, _ = rref_rows(list(t.data.values()), self.field)
        return Subspace(self.field, self.rows, rows, _canonical=True)


# ---------------------------------------------------------------------------
# elimination engines


def _dense_rank_modp(rows: List[Dict[int, object]], ncols: int, p: int) -> int:
    m = len(rows)
    A = np.zeros((m, ncols), dtype=np.int64)
    for i, row in enumerate(rows):
        for c, v in row.items():
            A[i, c] = v
    r = 0
    for c in range(ncols):
        if r == m:
            break
        col = A[r:, c] % p
        nz = np.nonzero(col)[0]
        if len(nz) == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        inv = pow(int(A[r, c]) % p, p - 2, p)
        A[r] = (A[r] * inv) % p
        rest = A[r + 1:, c] % p
        mask = np.nonzero(rest)[0]
        if len(mask):
            A[r + 1 + mask] = (A[r + 1 + mask] - np.outer(rest[mask], A[r])) % p
        r += 1
    return r


def sparse_rank_modp(rows: List[Dict[int, int]], ncols: int, p: int) -> int:
    """Structural sparse elimination; pivots chosen to limit fill-in."""
    live: Dict[int, Dict[int, int]] = {i: dict(r) for i, r in enumerate(rows) if r}
    col_rows: Dict[int, set] = {}
    for i, r in live.items():
        for c in r:
            col_rows.setdefault(c, set()).add(i)
    rank = 0
    import heapq
    heap = [(len(r), i) for i, r in live.items()]
    heapq.heapify(heap)
    while heap:
        ln, i = heapq.heappop(heap)
        row = live.get(i)
        if row is None:
            continue
        if len(row) != ln:
            heapq.heappush(heap, (len(row), i))
            continue
        # pivot column: fewest live rows, then smallest index
        c = min(row, key=lambda cc: (len(col_rows.get(cc, ())), cc))
        piv = row.pop(c)
        inv = pow(piv, p - 2, p)
        if inv != 1:
            row = {cc: (v * inv) % p for cc, v in row.items()}
        rank += 1
        targets = col_rows.pop(c, set())
        targets.discard(i)
        for cc in row:
            col_rows[cc].discard(i)
        del live[i]
        for j in targets:
            other = live[j]
            f = other.pop(c)
            for cc, v in row.items():
                w = (other.get(cc, 0) - f * v) % p
                if w:
                    if cc not in other:
                        col_rows[cc].add(j)
                    other[cc] = w
                elif cc in other:
                    del other[cc]
                    col_rows[cc].discard(j)
            if other:
                heapq.heappush(heap, (len(other), j))
            else:
                del live[j]
    return rank


def sparse_rank_q(rows: List[Dict[int, object]], ncols: int) -> int:
    """Sparse elimination over the rationals with fill-limiting pivots.

    Rows are rescaled to coprime integers so the elimination stays in
    integer arithmetic (fraction-free cross-multiplication, gcd
    normalization after each update).
    """
    from math import gcd
    live: Dict[int, Dict[int, int]] = {}
    idx = 0
    for r in rows:
        if not r:
            continue
        den = 1
        for v in r.values():
            f = Fraction(v)
            den = den * f.denominator // gcd(den, f.denominator)
        ints = {c: int(Fraction(v) * den) for c, v in r.items()}
        g = 0
        for v in ints.values():
            g = gcd(g, v)
        if g > 1:
            ints = {c: v // g for c, v in ints.items()}
        live[idx] = ints
        idx += 1
    col_rows: Dict[int, set] = {}
    for i, r in live.items():
        for c in r:
            col_rows.setdefault(c, set()).add(i)
    rank = 0
    import heapq
    heap = [(len(r), i) for i, r in live.items()]
    heapq.heapify(heap)
    while heap:
        ln, i = heapq.heappop(heap)
        row = live.get(i)
        if row is None:
            continue
        if len(row) != ln:
            heapq.heappush(heap, (len(row), i))
            continue
        c = min(row, key=lambda cc: (len(col_rows.get(cc, ())), cc))
        piv = row.pop(c)
        rank += 1
        targets = col_rows.pop(c, set())
        targets.discard(i)
        for cc in row:
            col_rows[cc].discard(i)
        del live[i]
        for j in targets:
            other = live[j]
            f = other.pop(c)
            g = 0
            new = {}
            for cc in set(other) | set(row):
                w = piv * other.get(cc, 0) - f * row.get(cc, 0)
                if w:
                    new[cc] = w
                    g = gcd(g, w)
            for cc in other:
                if cc not in new:
                    col_rows[cc].discard(j)
            for cc in new:
                if cc not in other:
                    col_rows.setdefault(cc, set()).add(j)
            if new:
                if g > 1:
                    new = {cc: v // g for cc, v in new.items()}
                live[j] = new
                heapq.heappush(heap, (len(new), j))
            else:
                del live[j]
    return rank


def rank_of_rows(rows: List[Dict[int, object]], ncols: int, field: Field) -> int:
    rows = [r for r in rows if r]
    if not rows:
        return 0
    if field.p:
        if len(rows) * ncols <= _DENSE_CELLS:
            return _dense_rank_modp(rows, ncols, field.p)
        return sparse_rank_modp(rows, ncols, field.p)
    return sparse_rank_q(rows, ncols)


def rref_rows(rows: List[Dict[int, object]],
              field: Field) -> Tuple[List[Dict[int, object]], List[int]]:
    """Reduced row echelon form of the span of the given row vectors.

    Returns (rows sorted by pivot column, pivot columns sorted).  The output
    is the canonical RREF basis of the row space.
    """
    F = field
    pivots: Dict[int, Dict[int, object]] = {}  # pivot col -> normalized row
    for row in rows:
        r = dict(row)
        while r:
            c = min(r)
            if c in pivots:
                f = r.pop(c)
                for cc, v in pivots[c].items():
                    if cc == c:
                        continue
                    w = F.sub(r.get(cc, F.zero()), F.mul(f, v))
                    if w:
                        r[cc] = w
                    elif cc in r:
                        del r[cc]
            else:
                inv = F.inv(r[c])
                if inv != F.one():
                    r = {cc: F.mul(inv, v) for cc, v in r.items()}
                pivots[c] = r
                break
    # back-substitution for full reduction
    for c in sorted(pivots, reverse=True):
        row = pivots[c]
        for c2 in sorted(pivots):
            if c2 <= c:
                continue
            f = row.get(c2)
            if f is None or c2 not in pivots:
                continue
            for cc, v in pivots[c2].items():
                w = F.sub(row.get(cc, F.zero()), F.mul(f, v))
                if w:
                    row[cc] = w
                elif cc in row:
                    del row[cc]
    piv_sorted = sorted(pivots)
    return [pivots[c] for c in piv_sorted], piv_sorted


# ---------------------------------------------------------------------------


class Subspace:
    """Subspace of field^ambient with canonical reduced-echelon basis rows."""

    __slots__ = ("field", "ambient", "basis", "pivots")

    def __init__(self, field: Field, ambient: int,
                 vectors: Iterable[Dict[int, object]], _canonical=False):
        self.field = field
        self.ambient = ambient
        vecs = [v for v in vectors if v]
        if _canonical:
            self.basis = vecs
            self.pivots = [min(v) for v in vecs]
        else:
            self.basis, self.pivots = rref_rows(vecs, field)

    @classmethod
    def zero_space(cls, field, ambient):
        return cls(field, ambient, [], _canonical=True)

    @classmethod
    def full(cls, field, ambient):
        one = field.one()
        return cls(field, ambient, [{i: one} for i in range(ambient)], _canonical=True)

    @property
    def dim(self):
        return len(self.basis)

    def basis_matrix(self) -> Matrix:
        """Rows = basis vectors."""
        return Matrix(self.field, self.dim, self.ambient,
                      {i: dict(row) for i, row in enumerate(self.basis)})

    def inclusion_matrix(self) -> Matrix:
        """ambient x dim matrix whose columns are the basis vectors."""
        data: Dict[int, Dict[int, object]] = {}
        for j, vec in enumerate(self.basis):
            for r, v in vec.items():
                data.setdefault(r, {})[j] = v
        return Matrix(self.field, self.ambient, self.dim, data)

    def reduce_vec(self, vec: Dict[int, object]) -> Dict[int, object]:
        """Residue of vec after reduction against the basis."""
        F = self.field
        r = dict(vec)
        for pc, row in zip(self.pivots, self.basis):
            f = r.get(pc)
            if not f:
                continue
            for cc, v in row.items():
                w = F.sub(r.get(cc, F.zero()), F.mul(f, v))
                if w:
                    r[cc] = w
                elif cc in r:
                    del r[cc]
        return r

    def coords(self, vec: Dict[int, object]) -> Dict[int, object]:
        """Coordinates of vec in the canonical basis; raises if not a member."""
        F = self.field
        r = dict(vec)
        out = {}
        for j, (pc, row) in enumerate(zip(self.pivots, self.basis)):
            f = r.get(pc)
            if not f:
                continue
            out[j] = f
            for cc, v in row.items():
                w = F.sub(r.get(cc, F.zero()), F.mul(f, v))
                if w:
                    r[cc] = w
                elif cc in r:
                    del r[cc]
        if r:
            raise ValueError("vector not in subspace")
        return out

    def contains_vec(self, vec) -> bool:
        return not self.reduce_vec(vec)

    def contains(self, other: "Subspace") -> bool:
        return all(self.contains_vec(v) for v in other.basis)

    def __eq__(self, other):
        return (isinstance(other, Subspace) and other.ambient == self.ambient
                and other.basis == self.basis)

    def __repr__(self):
        return "Subspace(dim %d of %d over %r)" % (self.dim, self.ambient, self.field)

    # -- lattice operations -------------------------------------------------

    def sum(self, other: "Subspace") -> "Subspace":
        assert self.ambient == other.ambient
        return Subspace(self.field, self.ambient, self.basis + other.basis)

    def intersect(self, other: "Subspace") -> "Subspace":
        assert self.ambient == other.ambient
        if self.dim == self.ambient:
            return other
        if other.dim == other.ambient:
            return self
        # kernel of the quotient-by-other map restricted to self
        q = other.quotient_map()
        inc = self.inclusion_matrix()
        k = q.mul(inc).kernel()
        vecs = [inc.apply(v) for v in k.basis]
        return Subspace(self.field, self.ambient, vecs)

    def quotient_map(self) -> Matrix:
        """Matrix ambient -> ambient/self in the complement coordinates.

        Complement basis: coordinates at non-pivot columns after reduction.
        """
        F = self.field
        pivset = set(self.pivots)
        free = [c for c in range(self.ambient) if c not in pivset]
        data: Dict[int, Dict[int, object]] = {}
        for k, c in enumerate(free):
            row = {c: F.one()}
            for pc, bvec in zip(self.pivots, self.basis):
                v = bvec.get(c)
                if v:
                    row[pc] = F.neg(v)
            data[k] = row
        return Matrix(F, len(free), self.ambient, data)

    def preimage(self, d: Matrix) -> "Subspace":
        """{v : d(v) in self} as a subspace of the source of d."""
        assert d.rows == self.ambient
        if self.dim == self.ambient:
            return Subspace.full(self.field, d.cols)
        return self.quotient_map().mul(d).kernel()
