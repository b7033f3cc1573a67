"""The cyclic category and cyclic complexes.

Morphisms of the cyclic category are modelled as nondecreasing maps
g: Z -> Z with g(i + n') = g(i) + n, normalized so 0 <= g(0) < n.  A
cyclic complex stores, for every object [n] up to a simplicial bound, a
chain complex together with the face and cyclic structure maps; arbitrary
morphisms can be evaluated when the complex carries an evaluator.

CH, CH', the two-column bicomplex, the sigma-dagger coinvariant complex cc,
the mixed structure via cc(K tensor E), the four flavours of cyclic-type
homology with stabilization detection, edgewise subdivision and the
pi-pushforwards all live here.
"""
from __future__ import annotations

from typing import Callable, Dict, List, Optional, Tuple

from .exactlin import Field, Matrix
from .complexes import (ChainComplex, MixedComplex, BiComplex, ChainMap,
                        TrustError, tensor, expand)


class LambdaMorphism:
    """A morphism [n_src] -> [n_tgt] of the cyclic category."""

    __slots__ = ("n_src", "n_tgt", "values")

    def __init__(self, n_src: int, n_tgt: int, values):
        if n_src < 1 or n_tgt < 1:
            raise ValueError("objects [n] need n >= 1")
        values = list(values)
        assert len(values) == n_src
        shift = (values[0] % n_tgt) - values[0]
        values = [v + shift for v in values]
        for i in range(n_src - 1):
            if values[i + 1] < values[i]:
                raise ValueError("not nondecreasing")
        if values[-1] > values[0] + n_tgt:
            raise ValueError("wraps more than once")
        self.n_src = n_src
        self.n_tgt = n_tgt
        self.values = tuple(values)

    def g(self, x: int) -> int:
        q, r = divmod(x, self.n_src)
        return self.values[r] + q * self.n_tgt

    def compose(self, other: "LambdaMorphism") -> "LambdaMorphism":
        """self after other."""
        assert other.n_tgt == self.n_src
        return LambdaMorphism(other.n_src, self.n_tgt,
                              [self.g(other.g(i)) for i in range(other.n_src)])

    def power(self, k: int) -> "LambdaMorphism":
        assert self.n_src == self.n_tgt
        out = identity(self.n_src)
        for _ in range(k):
            out = self.compose(out)
        return out

    def preimages(self) -> List[Tuple[int, List[int]]]:
        """[(target vertex, ordered source lifts)] sorted by target vertex.

        Lifts are integers (reduce mod n_src for the source position); an
        empty list marks a vertex not hit by the vertex map.
        """
        out = []
        base = self.values[0]
        for w in range(base, base + self.n_tgt):
            lifts = [x for x in range(-self.n_src, 2 * self.n_src) if self.g(x) == w]
            out.append((w % self.n_tgt, lifts))
        out.sort()
        return out

    def __eq__(self, other):
        return (isinstance(other, LambdaMorphism) and other.n_src == self.n_src
                and other.n_tgt == self.n_tgt and other.values == self.values)

    def __hash__(self):
        return hash((self.n_src, self.n_tgt, self.values))

    def __repr__(self):
        return "LambdaMorphism(%d->%d, %r)" % (self.n_src, self.n_tgt, self.values)


def identity(n: int) -> LambdaMorphism:
    return LambdaMorphism(n, n, range(n))


def face(n: int, j: int) -> LambdaMorphism:
    """The j-th face [n] -> [n-1]: merges vertices j and j+1 (mod n)."""
    if n < 2:
        raise ValueError("faces need n >= 2")
    if not 0 <= j <= n - 1:
        raise ValueError("face index out of range")
    vals = [v if v <= j else v - 1 for v in range(n)]
    return LambdaMorphism(n, n - 1, vals)


def cyclic(n: int) -> LambdaMorphism:
    return LambdaMorphism(n, n, [i + 1 for i in range(n)])


def tau_p(m: int, p: int) -> LambdaMorphism:
    """The order-p automorphism of [mp]: rotation by m."""
    return LambdaMorphism(m * p, m * p, [i + m for i in range(m * p)])


def lift_to_p(f: LambdaMorphism, p: int) -> LambdaMorphism:
    """The tau-equivariant lift [f.n_src * p] -> [f.n_tgt * p]."""
    vals = []
    for t in range(p):
        vals.extend(f.values[v] + t * f.n_tgt for v in range(f.n_src))
    return LambdaMorphism(f.n_src * p, f.n_tgt * p, vals)


def koszul_sign(order: List[int], degs: List[int]) -> int:
    """Sign of reordering graded factors (degrees indexed by original
    position) into the order given by `order`."""
    sign = 1
    for a in range(len(order)):
        if degs[order[a]] % 2 == 0:
            continue
        for b in range(a + 1, len(order)):
            if order[a] > order[b] and degs[order[b]] % 2:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# the circle complex K


def K_complex(field: Field, n: int) -> ChainComplex:
    """Cellular chains of the circle with n vertices and n edges."""
    F = field
    entries = []
    for i in range(n):
        entries.append(((i + 1) % n, i, F.one()))
        entries.append((i, i, F.neg(F.one())))
    d1 = Matrix.from_entries(F, n, n, entries)
    return ChainComplex(F, {0: n, 1: n}, {1: d1}, true_lo=0, true_hi=1)


def K_map(field: Field, f: LambdaMorphism) -> Dict[int, Matrix]:
    """The cellular chain map K(n_src) -> K(n_tgt) of a Lambda morphism."""
    F = field
    n_s, n_t = f.n_src, f.n_tgt
    v_entries = []
    for v in range(n_s):
        v_entries.append((f.g(v) % n_t, v, F.one()))
    e_entries = []
    for i in range(n_s):
        for w in range(f.g(i), f.g(i + 1)):
            e_entries.append((w % n_t, i, F.one()))
    return {0: Matrix.from_entries(F, n_t, n_s, v_entries),
            1: Matrix.from_entries(F, n_t, n_s, e_entries)}


def K_aug(field: Field, n: int) -> Matrix:
    """Augmentation kappa_0: K_0 -> k (every vertex to 1)."""
    return Matrix.from_entries(field, 1, n, ((0, v, field.one()) for v in range(n)))


def K_coaug(field: Field, n: int) -> Matrix:
    """Coaugmentation kappa_1: k -> K_1 (the fundamental cycle)."""
    return Matrix.from_entries(field, n, 1, ((e, 0, field.one()) for e in range(n)))


def four_term_exact(field: Field, n: int) -> bool:
    """Exactness of 0 -> k -> K_1 -> K_0 -> k -> 0."""
    K = K_complex(field, n)
    d, a, c = K.diff(1), K_aug(field, n), K_coaug(field, n)
    if not a.mul(d).is_zero() or not d.mul(c).is_zero():
        return False
    return (c.rank() == 1 and d.rank() == n - 1 and a.rank() == 1
            and d.kernel().dim == 1 and a.kernel().dim == n - 1)


# ---------------------------------------------------------------------------
# structure maps, stored either as plain degreewise matrices or factored


def _columns(M: Matrix) -> Dict[int, Dict[int, object]]:
    out: Dict[int, Dict[int, object]] = {}
    for r, row in M.data.items():
        for c, v in row.items():
            out.setdefault(c, {})[r] = v
    return out


def _monomial_of(M: Matrix, dim: int):
    """img[col] = (row, scalar) when M is invertible monomial, else None."""
    img = [None] * dim
    count = 0
    rows_seen = set()
    for r, row in M.data.items():
        for c, v in row.items():
            if img[c] is not None or r in rows_seen:
                return None
            img[c] = (r, v)
            rows_seen.add(r)
            count += 1
    if count != dim:
        return None
    return img


class TensorMap:
    """A degree-zero map K(src) tensor E(src) -> K(tgt) tensor E(tgt), kept
    factored so that huge Kronecker products are never materialized.

    `kmap` has components 0 (vertices) and 1 (edges); `emap` is degreewise.
    The objects are tensor complexes whose .slots record the (a, b) layout.
    """

    def __init__(self, field: Field, src: ChainComplex, tgt: ChainComplex,
                 kmap: Dict[int, Matrix], emap: Dict[int, Matrix]):
        self.field = field
        self.src = src
        self.tgt = tgt
        self.kmap = kmap
        if isinstance(emap, TensorMap):
            emap = {b: emap.mat(b) for b in sorted(emap.src.dims)
                    if emap.src.dim(b)}
        self.emap = emap
        self._kcols = {a: _columns(m) for a, m in kmap.items()}
        self._ecols: Dict[int, Dict[int, Dict[int, object]]] = {}

    def _ecol(self, b: int) -> Dict[int, Dict[int, object]]:
        if b not in self._ecols:
            m = self.emap.get(b)
            self._ecols[b] = _columns(m) if m is not None else {}
        return self._ecols[b]

    @staticmethod
    def _layout(C: ChainComplex, k: int):
        out = []
        off = 0
        for (a, b), dim in C.slots.get(k, []):
            out.append((a, b, off, dim))
            off += dim
        return out

    def mat(self, k: int) -> Matrix:
        """Materialized component at internal degree k."""
        F = self.field
        tgt_off = {(a, b): off for a, b, off, dim in self._layout(self.tgt, k)}
        entries = []
        for a, b, off, dim in self._layout(self.src, k):
            em = self.emap.get(b)
            if em is None or (a, b) not in tgt_off:
                continue
            km = self.kmap[a]
            o2 = tgt_off[(a, b)]
            ne_t, ne_s = em.rows, em.cols
            for rk, rowk in km.data.items():
                for ck, vk in rowk.items():
                    for re_, rowe in em.data.items():
                        for ce, ve in rowe.items():
                            entries.append((o2 + rk * ne_t + re_,
                                            off + ck * ne_s + ce, F.mul(vk, ve)))
        return Matrix.from_entries(F, self.tgt.dim(k), self.src.dim(k), entries)

    def times(self, k: int, S: Matrix) -> Matrix:
        """self (at degree k) composed with S, column by column."""
        F = self.field
        layout = self._layout(self.src, k)
        tgt_off = {(a, b): off for a, b, off, dim in self._layout(self.tgt, k)}
        entries = []
        for c, col in _columns(S).items():
            for x, v in col.items():
                for a, b, off, dim in layout:
                    if off <= x < off + dim:
                        break
                else:
                    continue
                em = self.emap.get(b)
                if em is None or (a, b) not in tgt_off:
                    continue
                ne_s, ne_t = em.cols, em.rows
                rk, ce = divmod(x - off, ne_s)
                o2 = tgt_off[(a, b)]
                kcol = self._kcols[a].get(rk, {})
                ecol = self._ecol(b).get(ce, {})
                for rK, vK in kcol.items():
                    for rE, vE in ecol.items():
                        entries.append((o2 + rK * ne_t + rE, c,
                                        F.mul(v, F.mul(vK, vE))))
        return Matrix.from_entries(F, self.tgt.dim(k), S.cols, entries)

    def monomial(self, k: int):
        """img list when the component is an invertible monomial operator."""
        if self.src.dim(k) != self.tgt.dim(k):
            return None
        F = self.field
        tgt_off = {(a, b): off for a, b, off, dim in self._layout(self.tgt, k)}
        img = [None] * self.src.dim(k)
        for a, b, off, dim in self._layout(self.src, k):
            em = self.emap.get(b)
            if em is None or (a, b) not in tgt_off:
                return None
            km = self.kmap[a]
            ik = _monomial_of(km, km.cols)
            ie = _monomial_of(em, em.cols)
            if ik is None or ie is None:
                return None
            ne_s, ne_t = em.cols, em.rows
            o2 = tgt_off[(a, b)]
            for x in range(dim):
                rk, ce = divmod(x, ne_s)
                tk, vk = ik[rk]
                te, ve = ie[ce]
                img[off + x] = (o2 + tk * ne_t + te, F.mul(vk, ve))
        return img


def _map_component(table, k: int, rows: int, cols: int, field: Field) -> Matrix:
    if isinstance(table, TensorMap):
        return table.mat(k)
    m = table.get(k)
    if m is None:
        m = Matrix.zero(field, rows, cols)
    return m


# ---------------------------------------------------------------------------
# cyclic complexes


class CyclicComplex:
    """Per-object complexes E([n]) for 1 <= n <= N with face and cyclic maps.

    Structure maps are degreewise matrix tables or TensorMap objects.  `mor`,
    when present, evaluates an arbitrary LambdaMorphism (needed for edgewise
    subdivision).  `min_slope` is a lower bound s such that the true E([n])
    vanishes in internal degrees below n*s for every n, including the unseen
    objects past the bound; it drives all trust computations.  Objects whose
    internal degrees are genuinely unbounded below (Laurent expansions) set
    `slope_valid` to False and the coinvariant complex refuses to certify
    anything unless the caller supplies a bound explicitly.
    """

    def __init__(self, field: Field, N: int, obj: Dict[int, ChainComplex],
                 faces, cyclic_op, mor: Optional[Callable] = None,
                 min_slope: int = 0, slope_valid: bool = True):
        self.field = field
        self.N = N
        self.obj = obj
        self.faces = faces
        self.cyclic_op = cyclic_op
        self.mor = mor
        self.min_slope = min_slope
        self.slope_valid = slope_valid

    def face_mat(self, n: int, j: int, k: int) -> Matrix:
        return _map_component(self.faces[(n, j)], k, self.obj[n - 1].dim(k),
                              self.obj[n].dim(k), self.field)

    def face_times(self, n: int, j: int, k: int, S: Matrix) -> Matrix:
        t = self.faces[(n, j)]
        if isinstance(t, TensorMap):
            return t.times(k, S)
        return self.face_mat(n, j, k).mul(S)

    def cyclic_mat(self, n: int, k: int) -> Matrix:
        return _map_component(self.cyclic_op[n], k, self.obj[n].dim(k),
                              self.obj[n].dim(k), self.field)

    def sdagger_mat(self, n: int, k: int) -> Matrix:
        m = self.cyclic_mat(n, k)
        if n % 2 == 0:
            m = m.neg()
        return m

    def sdagger_monomial(self, n: int, k: int):
        t = self.cyclic_op[n]
        if isinstance(t, TensorMap):
            img = t.monomial(k)
        else:
            m = t.get(k)
            img = None if m is None else _monomial_of(m, self.obj[n].dim(k))
        if img is not None and n % 2 == 0:
            img = [(r, self.field.neg(v)) for r, v in img]
        return img

    def b_mat(self, n: int, k: int, drop_last: bool = False) -> Matrix:
        """Alternating face sum at object n, internal degree k."""
        if n < 2:
            return Matrix.zero(self.field, 0, self.obj[n].dim(k))
        out = Matrix.zero(self.field, self.obj[n - 1].dim(k), self.obj[n].dim(k))
        top = n - 1 if drop_last else n
        for j in range(top):
            m = self.face_mat(n, j, k)
            out = out.add(m if j % 2 == 0 else m.neg())
        return out

    def b_times(self, n: int, k: int, S: Matrix, drop_last: bool = False) -> Matrix:
        if n < 2:
            return Matrix.zero(self.field, 0, S.cols)
        out = Matrix.zero(self.field, self.obj[n - 1].dim(k), S.cols)
        top = n - 1 if drop_last else n
        for j in range(top):
            m = self.face_times(n, j, k, S)
            out = out.add(m if j % 2 == 0 else m.neg())
        return out

    def verify_relations(self, max_n: Optional[int] = None) -> List[str]:
        """Check the cyclic category relations on stored generators."""
        bad = []
        top = min(self.N, max_n) if max_n else self.N
        for n in range(1, top + 1):
            C = self.obj[n]
            degs = sorted(C.dims)
            for k in degs:
                t = self.cyclic_mat(n, k)
                tn = Matrix.identity(self.field, C.dim(k))
                for _ in range(n):
                    tn = t.mul(tn)
                if not tn.sub(Matrix.identity(self.field, C.dim(k))).is_zero():
                    bad.append("t_%d^%d != id at degree %d" % (n, n, k))
            if n < 2:
                continue
            for k in degs:
                for j in range(n):
                    lhs = self.obj[n - 1].diff(k).mul(self.face_mat(n, j, k))
                    rhs = self.face_mat(n, j, k - 1).mul(C.diff(k))
                    if not lhs.sub(rhs).is_zero():
                        bad.append("face (%d,%d) not a chain map at %d" % (n, j, k))
                if n >= 3:
                    for kk in range(1, n):
                        for j in range(kk):
                            lhs = self.face_mat(n - 1, j, k).mul(self.face_mat(n, kk, k))
                            rhs = self.face_mat(n - 1, kk - 1, k).mul(self.face_mat(n, j, k))
                            if not lhs.sub(rhs).is_zero():
                                bad.append("simplicial identity fails (%d;%d,%d)" % (n, j, kk))
                for j in range(1, n):
                    lhs = self.face_mat(n, j, k).mul(self.cyclic_mat(n, k))
                    rhs = self.cyclic_mat(n - 1, k).mul(self.face_mat(n, j - 1, k))
                    if not lhs.sub(rhs).is_zero():
                        bad.append("cyclic relation fails (%d, j=%d, deg %d)" % (n, j, k))
                lhs = self.face_mat(n, 0, k).mul(self.cyclic_mat(n, k))
                if not lhs.sub(self.face_mat(n, n - 1, k)).is_zero():
                    bad.append("d_0 t != d_{n-1} at (%d, deg %d)" % (n, k))
        return bad


def const_cyclic(field: Field, N: int) -> CyclicComplex:
    """The constant cyclic object k."""
    one = Matrix.identity(field, 1)
    obj = {n: ChainComplex(field, {0: 1}, {}, true_lo=0, true_hi=0)
           for n in range(1, N + 1)}
    faces = {(n, j): {0: one} for n in range(2, N + 1) for j in range(n)}
    cyc = {n: {0: one} for n in range(1, N + 1)}

    def mor(f):
        return {0: one}

    return CyclicComplex(field, N, obj, faces, cyc, mor=mor, min_slope=0)


def K_tensor(E: CyclicComplex) -> CyclicComplex:
    """The cyclic complex K tensor E (objectwise, diagonal structure maps)."""
    F = E.field
    obj = {n: tensor(K_complex(F, n), E.obj[n]) for n in E.obj}

    def lam(f: LambdaMorphism, emap):
        return TensorMap(F, obj[f.n_src], obj[f.n_tgt], K_map(F, f), emap)

    faces = {(n, j): lam(face(n, j), emap) for (n, j), emap in E.faces.items()}
    cyc = {n: lam(cyclic(n), emap) for n, emap in E.cyclic_op.items()}
    mor = None
    if E.mor is not None:
        def mor(f):  # noqa: F811
            return lam(f, E.mor(f))
    return CyclicComplex(F, E.N, obj, faces, cyc, mor=mor,
                         min_slope=E.min_slope, slope_valid=E.slope_valid)


# ---------------------------------------------------------------------------
# (co)invariants of a finite-order operator


def coinvariants(op: Matrix, field: Field) -> Tuple[Matrix, Matrix]:
    """(Q, S) with Q the quotient onto coker(1 - op) and S a section."""
    dim = op.cols
    if dim == 0:
        return Matrix.zero(field, 0, 0), Matrix.zero(field, 0, 0)
    img = _monomial_of(op, dim)
    if img is not None:
        return _monomial_coinv(img, dim, field)
    sub = Matrix.identity(field, dim).sub(op).image()
    Q = sub.quotient_map()
    pivset = set(sub.pivots)
    free = [c for c in range(dim) if c not in pivset]
    S = Matrix.from_entries(field, dim, len(free),
                            ((c, j, field.one()) for j, c in enumerate(free)))
    return Q, S


def _orbits(img, dim):
    seen = [False] * dim
    orbits = []
    for x0 in range(dim):
        if seen[x0]:
            continue
        orbit = [x0]
        seen[x0] = True
        x = x0
        while True:
            y, _ = img[x]
            if y == x0:
                break
            orbit.append(y)
            seen[y] = True
            x = y
        orbits.append(orbit)
    return orbits


def _monomial_coinv(img, dim, field: Field) -> Tuple[Matrix, Matrix]:
    F = field
    q_data: Dict[int, Dict[int, object]] = {}
    s_data: Dict[int, Dict[int, object]] = {}
    row = 0
    one = F.one()
    for orbit in _orbits(img, dim):
        # transport scalars: if op(x) = s*y then [y] = s^{-1} [x]
        t = {orbit[0]: one}
        x = orbit[0]
        while True:
            y, s = img[x]
            if y == orbit[0]:
                cyc_scalar = F.mul(t[x], s)
                break
            t[y] = F.mul(t[x], F.inv(s))
            x = y
        if cyc_scalar != one:
            continue  # orbit dies in the coinvariants
        q_data[row] = t
        s_data[orbit[0]] = {row: one}
        row += 1
    return (Matrix(field, row, dim, q_data), Matrix(field, dim, row, s_data))


def invariants(op: Matrix, field: Field) -> Tuple[Matrix, Matrix]:
    """(P, Inc): inclusion of ker(1 - op) plus coordinate reading, P*Inc = id."""
    dim = op.cols
    if dim == 0:
        return Matrix.zero(field, 0, 0), Matrix.zero(field, 0, 0)
    F = field
    img = _monomial_of(op, dim)
    if img is not None:
        return _monomial_inv(img, dim, F)
    ker = Matrix.identity(F, dim).sub(op).kernel()
    Inc = ker.inclusion_matrix()
    P = Matrix.from_entries(F, ker.dim, dim,
                            ((j, pc, F.one()) for j, pc in enumerate(ker.pivots)))
    return P, Inc


def _monomial_inv(img, dim, field: Field) -> Tuple[Matrix, Matrix]:
    F = field
    p_data: Dict[int, Dict[int, object]] = {}
    i_data: Dict[int, Dict[int, object]] = {}
    col = 0
    one = F.one()
    for orbit in _orbits(img, dim):
        # invariant vector: coefficients u with u(op x) = s_x * u(x)
        u = {orbit[0]: one}
        x = orbit[0]
        ok = True
        while True:
            y, s = img[x]
            if y == orbit[0]:
                ok = F.mul(u[x], s) == one
                break
            u[y] = F.mul(u[x], s)
            x = y
        if not ok:
            continue
        for x2, scal in u.items():
            i_data.setdefault(x2, {})[col] = scal
        p_data[col] = {orbit[0]: one}
        col += 1
    return (Matrix(F, col, dim, p_data), Matrix(F, dim, col, i_data))


# ---------------------------------------------------------------------------
# cc and CH


class CcSummand:
    __slots__ = ("n", "k", "offset", "dim", "Q", "S")

    def __init__(self, n, k, offset, dim, Q, S):
        self.n, self.k, self.offset, self.dim, self.Q, self.S = n, k, offset, dim, Q, S


def _sdagger_coinv(E: CyclicComplex, n: int, k: int):
    img = E.sdagger_monomial(n, k)
    if img is not None:
        return _monomial_coinv(img, E.obj[n].dim(k), E.field)
    return coinvariants(E.sdagger_mat(n, k), E.field)


class CcResult:
    """cc(E): sigma-dagger coinvariants, cc_i = sum over n of the
    coinvariants of E_{i+1-n}([n])."""

    def __init__(self, E: CyclicComplex, check: bool = True,
                 data_hi: Optional[int] = None):
        F = E.field
        self.E = E
        if data_hi is None:
            if not E.slope_valid:
                raise TrustError("objects unbounded below; pass an explicit "
                                 "certified degree bound")
            data_hi = (E.N + 1) * (E.min_slope + 1) - 2
        summands: Dict[int, List[CcSummand]] = {}
        for n in range(1, E.N + 1):
            C = E.obj[n]
            for k in sorted(C.dims):
                Q, S = _sdagger_coinv(E, n, k)
                if not Q.rows:
                    continue
                lst = summands.setdefault(n - 1 + k, [])
                off = sum(s.dim for s in lst)
                lst.append(CcSummand(n, k, off, Q.rows, Q, S))
        self.summands = summands
        dims = {i: sum(s.dim for s in lst) for i, lst in summands.items()}
        d: Dict[int, Matrix] = {}
        for i, lst in summands.items():
            tgt = {(s.n, s.k): s for s in summands.get(i - 1, [])}
            entries = []
            for s in lst:
                t = tgt.get((s.n - 1, s.k))
                if t is not None and s.n >= 2:
                    blk = t.Q.mul(E.b_times(s.n, s.k, s.S))
                    for r, row in blk.data.items():
                        for c, v in row.items():
                            entries.append((t.offset + r, s.offset + c, v))
                t = tgt.get((s.n, s.k - 1))
                if t is not None:
                    # internal differential with totalization sign (-1)^(n-1)
                    blk = t.Q.mul(E.obj[s.n].diff(s.k).mul(s.S))
                    if s.n % 2 == 0:
                        blk = blk.neg()
                    for r, row in blk.data.items():
                        for c, v in row.items():
                            entries.append((t.offset + r, s.offset + c, v))
            m = Matrix.from_entries(F, dims.get(i - 1, 0), dims.get(i, 0), entries)
            if not m.is_zero():
                d[i] = m
        slots = {i: [((s.n, s.k), s.dim) for s in lst] for i, lst in summands.items()}
        if not dims:
            dims = {0: 0}
        true_lo = None
        if E.slope_valid:
            true_lo = min(E.min_slope, min(dims))
        self.complex = ChainComplex(F, dims, d, true_lo=true_lo, true_hi=None,
                                    data_lo=min(dims), data_hi=data_hi,
                                    slots=slots, check=check)

    def summand_of(self, i: int, n: int, k: int) -> Optional[CcSummand]:
        for s in self.summands.get(i, []):
            if s.n == n and s.k == k:
                return s
        return None


def cc(E: CyclicComplex, check: bool = True, data_hi=None) -> ChainComplex:
    return CcResult(E, check=check, data_hi=data_hi).complex


def ch_complex(E: CyclicComplex, drop_last: bool = False, check=True) -> ChainComplex:
    """CH(E) (or CH' when drop_last): no coinvariants, alternating faces."""
    F = E.field
    cells: Dict[int, List[Tuple[int, int, int]]] = {}
    dims: Dict[int, int] = {}
    for n in range(1, E.N + 1):
        C = E.obj[n]
        for k in sorted(C.dims):
            i = n - 1 + k
            off = dims.get(i, 0)
            cells.setdefault(i, []).append((n, k, off))
            dims[i] = off + C.dim(k)
    d = {}
    for i in sorted(cells):
        tgt = {(n, k): off for n, k, off in cells.get(i - 1, [])}
        entries = []
        for n, k, off in cells[i]:
            if n >= 2 and (n - 1, k) in tgt:
                o2 = tgt[(n - 1, k)]
                blk = E.b_mat(n, k, drop_last=drop_last)
                for r, row in blk.data.items():
                    for c, v in row.items():
                        entries.append((o2 + r, off + c, v))
            if (n, k - 1) in tgt:
                o2 = tgt[(n, k - 1)]
                blk = E.obj[n].diff(k)
                if n % 2 == 0:
                    blk = blk.neg()
                for r, row in blk.data.items():
                    for c, v in row.items():
                        entries.append((o2 + r, off + c, v))
        m = Matrix.from_entries(F, dims.get(i - 1, 0), dims.get(i, 0), entries)
        if not m.is_zero():
            d[i] = m
    slots = {i: [((n, k), E.obj[n].dim(k)) for n, k, _ in lst]
             for i, lst in cells.items()}
    if not dims:
        dims = {0: 0}
    data_hi = (E.N + 1) * (E.min_slope + 1) - 2 if E.slope_valid else min(dims) - 1
    return ChainComplex(F, dims, d,
                        true_lo=min(E.min_slope, min(dims)) if E.slope_valid else None,
                        true_hi=None, data_lo=min(dims), data_hi=data_hi,
                        slots=slots, check=check)


def _kappa_times(KE_obj: ChainComplex, n: int, k: int, S: Matrix,
                 field: Field) -> Matrix:
    """((kappa_1 kappa_0) tensor id) * S on K([n]) tensor E([n]) from internal
    degree k to k+1 (full coordinates): vertex v tensor e goes to the sum of
    all edges tensor e."""
    F = field
    src_off = TensorMap._layout(KE_obj, k)
    tgt_off = {(a, b): off for a, b, off, dim in TensorMap._layout(KE_obj, k + 1)}
    entries = []
    for c, col in _columns(S).items():
        for x, v in col.items():
            for a, b, off, dim in src_off:
                if off <= x < off + dim:
                    break
            else:
                continue
            if a != 0 or (1, b) not in tgt_off:
                continue
            ne = dim // n  # K_0([n]) has n vertices
            t_in = (x - off) % ne
            o2 = tgt_off[(1, b)]
            for edge in range(n):
                entries.append((o2 + edge * ne + t_in, c, v))
    return Matrix.from_entries(F, KE_obj.dim(k + 1), S.cols, entries)


class BuildCh:
    """CH', CH, the two-column bicomplex, and the mixed complex cc(K(E))."""

    def __init__(self, E: CyclicComplex, check: bool = True):
        F = E.field
        self.E = E
        self.ch_prime = ch_complex(E, drop_last=True, check=check)
        self.ch = ch_complex(E, drop_last=False, check=check)
        # two-column bicomplex CH' --(1 - sigma-dagger)--> CH
        dims = {}
        dh = {}
        dv = {}
        for i in self.ch.dims:
            dims[(0, i)] = self.ch.dim(i)
        for i in self.ch_prime.dims:
            dims[(1, i)] = self.ch_prime.dim(i)
        for i, lst in (self.ch_prime.slots or {}).items():
            tgt_off = {}
            o = 0
            for (n, k), dim in self.ch.slots.get(i, []):
                tgt_off[(n, k)] = o
                o += dim
            entries = []
            off = 0
            for (n, k), dim in lst:
                o2 = tgt_off[(n, k)]
                sd = E.sdagger_mat(n, k)
                for t in range(dim):
                    entries.append((o2 + t, off + t, F.one()))
                for r, row in sd.data.items():
                    for c, v in row.items():
                        entries.append((o2 + r, off + c, F.neg(v)))
                off += dim
            m = Matrix.from_entries(F, self.ch.dim(i), self.ch_prime.dim(i), entries)
            if not m.is_zero():
                dh[(1, i)] = m
        for i, m in self.ch.d.items():
            dv[(0, i)] = m
        for i, m in self.ch_prime.d.items():
            dv[(1, i)] = m
        self.bicx = BiComplex.from_commuting(F, dims, dh, dv, check=check)
        # the mixed complex: cc(K tensor E), B induced by kappa_1 kappa_0
        self.KE = K_tensor(E)
        self.ccK = CcResult(self.KE, check=check)
        base = self.ccK.complex
        B: Dict[int, Matrix] = {}
        for i, lst in self.ccK.summands.items():
            tgt = {(s.n, s.k): s for s in self.ccK.summands.get(i + 1, [])}
            entries = []
            for s in lst:
                t = tgt.get((s.n, s.k + 1))
                if t is None:
                    continue
                blk = t.Q.mul(_kappa_times(self.KE.obj[s.n], s.n, s.k, s.S, F))
                if s.n % 2 == 0:  # totalization sign (-1)^(n-1)
                    blk = blk.neg()
                for r, row in blk.data.items():
                    for c, v in row.items():
                        entries.append((t.offset + r, s.offset + c, v))
            m = Matrix.from_entries(F, base.dim(i + 1), base.dim(i), entries)
            if not m.is_zero():
                B[i] = m
        self.mixed = MixedComplex(base, B, check=check)


def build_ch(E: CyclicComplex, check: bool = True) -> BuildCh:
    return BuildCh(E, check=check)


# ---------------------------------------------------------------------------
# homology drivers with stabilization detection


def _restrict_entries(m: Matrix, row_idx: Dict[int, int], col_idx: Dict[int, int]):
    for r, row in m.data.items():
        r2 = row_idx.get(r)
        if r2 is None:
            continue
        for c, v in row.items():
            c2 = col_idx.get(c)
            if c2 is not None:
                yield (r2, c2, v)


class _SlabEngine:
    """Homology of three-degree slices of periodic expansions of a mixed
    complex, with optional slot caps (u-power truncations) and optional
    restriction to a simplicial summand range nmin <= n <= nmax."""

    def __init__(self, mixed: MixedComplex):
        self.mixed = mixed
        self.C = mixed.base
        self._idx_cache: Dict[Tuple, Dict[int, int]] = {}
        self._rank_cache: Dict[Tuple, int] = {}

    def _indices(self, k: int, nmax: Optional[int], nmin=None) -> Dict[int, int]:
        if nmax is None and nmin is None:
            return {x: x for x in range(self.C.dim(k))}
        key = (k, nmax, nmin)
        if key not in self._idx_cache:
            sel = {}
            pos = 0
            off = 0
            for (nk, dim) in self.C.slots.get(k, []):
                n = nk[0] if isinstance(nk, tuple) else nk
                if (nmax is None or n <= nmax) and (nmin is None or n >= nmin):
                    for t in range(dim):
                        sel[off + t] = pos
                        pos += 1
                off += dim
            self._idx_cache[key] = sel
        return self._idx_cache[key]

    def _layout(self, ks: List[int], nmax, nmin=None):
        total = 0
        layout = {}
        for k in ks:
            idx = self._indices(k, nmax, nmin)
            layout[k] = (total, idx)
            total += len(idx)
        return total, layout

    def _slab_d(self, src_ks, tgt_ks, nmax, nmin=None, tgt_nmax=None) -> Matrix:
        F = self.C.field
        sdim, slay = self._layout(src_ks, nmax, nmin)
        tdim, tlay = self._layout(tgt_ks, nmax if tgt_nmax is None else tgt_nmax,
                                  None if tgt_nmax is not None else nmin)
        entries = []
        for k in src_ks:
            soff, sidx = slay[k]
            dm = self.C.d.get(k)
            if dm is not None and k - 1 in tlay:
                toff, tidx = tlay[k - 1]
                for r, c, v in _restrict_entries(dm, tidx, sidx):
                    entries.append((toff + r, soff + c, v))
            bm = self.mixed.B.get(k)
            if bm is not None and k + 1 in tlay:
                toff, tidx = tlay[k + 1]
                for r, c, v in _restrict_entries(bm, tidx, sidx):
                    entries.append((toff + r, soff + c, v))
        return Matrix.from_entries(F, tdim, sdim, entries)

    def _ks(self, parity: int, cap: Optional[int]) -> List[int]:
        hi = self.C.hi if cap is None else min(cap, self.C.hi)
        lo = self.C.lo if (self.C.lo - parity) % 2 == 0 else self.C.lo + 1
        return list(range(lo, hi + 1, 2))

    def _ranks_at(self, i: int, cap_mid, nmax, nmin=None):
        key = (i % 2, cap_mid, nmax, nmin)
        if key not in self._rank_cache:
            mid = self._ks(i % 2, cap_mid)
            below = self._ks((i - 1) % 2, None if cap_mid is None else cap_mid - 1)
            above = self._ks((i + 1) % 2, None if cap_mid is None else cap_mid + 1)
            dim_mid, _ = self._layout(mid, nmax, nmin)
            d_in = self._slab_d(above, mid, nmax, nmin)
            d_out = self._slab_d(mid, below, nmax, nmin)
            self._rank_cache[key] = (dim_mid, d_out.rank(), d_in.rank())
        return self._rank_cache[key]

    def homology_at(self, i: int, cap_mid: Optional[int], nmax=None,
                    nmin=None) -> int:
        """Homology dim at degree i of the expansion whose slot degrees are
        capped at `cap_mid` in the middle degree (caps shift by one per
        homological degree; None means no cap)."""
        dim_mid, r_out, r_in = self._ranks_at(i, cap_mid, nmax, nmin)
        return dim_mid - r_out - r_in

    def slab_complex(self, i: int, nmax=None, nmin=None) -> ChainComplex:
        """The three-degree slice around degree i as an explicit complex
        (degrees 0, 1, 2 for i-1, i, i+1), for homology representatives."""
        mid = self._ks(i % 2, None)
        below = self._ks((i - 1) % 2, None)
        above = self._ks((i + 1) % 2, None)
        d_out = self._slab_d(mid, below, nmax, nmin)
        d_in = self._slab_d(above, mid, nmax, nmin)
        dims = {0: d_out.rows, 1: d_out.cols, 2: d_in.cols}
        d = {}
        if not d_out.is_zero():
            d[1] = d_out
        if not d_in.is_zero():
            d[2] = d_in
        return ChainComplex(self.C.field, dims, d, true_lo=0, true_hi=2,
                            check=False)

    def image_rank(self, i: int, nmax_small: int, nmax_big: int) -> int:
        """Rank of H_i(restriction to n <= nmax_small) -> H_i(n <= nmax_big)
        induced by the inclusion."""
        F = self.C.field
        small = self.slab_complex(i, nmax=nmax_small)
        hdim, reps = small.homology(1)
        if hdim == 0:
            return 0
        mid_ks = self._ks(i % 2, None)
        tot_s, lay_s = self._layout(mid_ks, nmax_small)
        dim_b, lay_b = self._layout(mid_ks, nmax_big)
        promote = [0] * tot_s
        for k in mid_ks:
            off, idx = lay_s[k]
            off_b, idx_b = lay_b[k]
            for g, loc in idx.items():
                promote[off + loc] = off_b + idx_b[g]
        entries = []
        for col, rep in enumerate(reps):
            for x, v in rep.items():
                entries.append((promote[x], col, v))
        R = Matrix.from_entries(F, dim_b, hdim, entries)
        above = self._ks((i + 1) % 2, None)
        d_in_b = self._slab_d(above, mid_ks, nmax_big)
        r_in = d_in_b.rank()
        return R.hstack(d_in_b).rank() - r_in


def hp_stabilized(mixed: MixedComplex, window: Tuple[int, int],
                  depth: int = 16) -> Dict[int, dict]:
    """Periodic cyclic homology via the u-power truncations V((u))/u^M V[[u]].

    Per degree the truncation homology is computed at increasing depth M as
    long as the truncation is still certified against the true object; two
    consecutive agreeing values count as stabilized.  Degrees where the
    certified slot range runs out before stabilization stay flagged."""
    eng = _SlabEngine(mixed)
    C = mixed.base
    out = {}
    memo: Dict[Tuple[int, int], int] = {}
    for i in range(window[0], window[1] + 1):
        rec = {"dim": None, "stabilized": False, "depth": None}
        if C.true_lo is not None:
            prev = None
            for M in range(1, depth + 1):
                cap = i + 2 * M - 2
                if cap < C.lo:
                    # the truncation has not reached the stored slots yet
                    continue
                # the slab touches slots up to cap+1; all must be certified
                if cap + 1 > C.data_hi:
                    break
                key = (i % 2, cap)
                if key not in memo:
                    memo[key] = eng.homology_at(i, cap)
                h = memo[key]
                if prev is not None and h == prev:
                    rec = {"dim": h, "stabilized": True, "depth": M}
                    break
                prev = h
        out[i] = rec
    return out


def cohp_stabilized(mixed: MixedComplex, window: Tuple[int, int],
                    depth: int = 16) -> Dict[int, dict]:
    """Co-periodic cyclic homology via the exhaustion by the subcomplexes
    supported on simplicial summands n <= n'.

    These are honest subcomplexes (the faces lower n, B preserves it) and
    homology commutes with the exhaustion, but the colimit runs along maps
    that need not be injective: classes die and others are born at the same
    step, so plain dimension sequences can look constant while the underlying
    classes churn.  The associated graded of the n-filtration (one column per
    n) is acyclic at almost every n; dimensions can only change at the
    exceptional columns, called crossings here, and between crossings the
    inclusions are isomorphisms.  Per parity this tracks, at each crossing,
    the rank of the map induced from the previous crossing level (the
    survivor rank rho) and the number of newborn classes nu = h - rho.

    Per parity, with c the last crossing and b, a the two crossing levels
    before it (level 0 when missing), the detector compares the image ranks
    r(a -> c) and r(b -> c) into the final level.  These count the classes at
    level c that have survived two resp. one crossing.  Judgement:
      * no crossings at all: the value 0 is exact (this covers
        characteristic 0, where every column is acyclic);
      * h(c) == r(b -> c): nothing was born at the last crossing and every
        class alive has survived a test, report h(c) as stabilized;
      * r(a -> c) == r(b -> c): two consecutive agreeing image ranks, the
        tested core is stable and the untested newcomers follow the observed
        churn pattern, report that rank;
      * otherwise flagged unstabilized, the current reading is still
        reported as dim.
    """
    eng = _SlabEngine(mixed)
    C = mixed.base
    ns = set()
    for lst in (C.slots or {}).values():
        for nk, _dim in lst:
            ns.add(nk[0] if isinstance(nk, tuple) else nk)
    bound = min(max(ns) if ns else 0, depth)
    crossings = []
    for n in range(1, bound + 1):
        if (eng.homology_at(0, None, nmax=n, nmin=n)
                or eng.homology_at(1, None, nmax=n, nmin=n)):
            crossings.append(n)
    verdict = {}
    for par in (0, 1):
        if not crossings:
            verdict[par] = (0, True, bound)
            continue
        c = crossings[-1]
        h_last = eng.homology_at(par, None, nmax=c)
        if len(crossings) < 2:
            verdict[par] = (h_last, False, c)
            continue
        b = crossings[-2]
        a = crossings[-3] if len(crossings) > 2 else 0
        core = eng.image_rank(par, b, c)
        if h_last == core:
            verdict[par] = (h_last, True, c)
            continue
        core2 = eng.image_rank(par, a, c) if a else 0
        if core == core2:
            verdict[par] = (core, True, c)
        else:
            verdict[par] = (h_last, False, c)
    out = {}
    for i in range(window[0], window[1] + 1):
        dim, ok, at = verdict[i % 2]
        out[i] = {"dim": dim, "stabilized": ok, "depth": at}
    return out


def extended_bound(A, n_max, depth, cell_budget=150000):
    """Simplicial bound for the stabilized periodic drivers.

    The stabilization detectors need to see the exceptional columns, which
    sit past any fixed bound, so the columns are extended beyond n_max up
    to depth when the column dimensions permit; otherwise the bound stays
    put and the affected degrees remain flagged."""
    best = n_max
    for N in range(n_max + 1, max(depth, n_max) + 1):
        if 3 * (max(A.dim, 1) ** N) // 2 > cell_budget:
            break
        best = N
    return best


def per_complex(mixed: MixedComplex, window: Tuple[int, int]) -> ChainComplex:
    return expand(mixed, "per", window)


def cyclic_homology(source, mode: str, window: Tuple[int, int] = (-6, 6),
                    depth: int = 16, check: bool = True):
    """Homology tables keyed by degree.

    mode 'hh': dims or None (refusals); 'hc': same, from the u-quotient
    expansion; 'hp'/'cohp': stabilization records with the dim, a stabilized
    flag and the depth reached.
    """
    if isinstance(source, CyclicComplex):
        source = build_ch(source, check=check)
    mixed = source.mixed if isinstance(source, BuildCh) else source
    lo, hi = window
    if mode == "hh":
        return mixed.base.homology_table(lo, hi)
    if mode == "hc":
        return expand(mixed, "Exp", (lo - 1, hi + 1)).homology_table(lo, hi)
    if mode == "hp":
        return hp_stabilized(mixed, window, depth)
    if mode == "cohp":
        return cohp_stabilized(mixed, window, depth)
    raise ValueError("unknown mode %r" % mode)


# ---------------------------------------------------------------------------
# the comparison map alpha: CC(E) -> cc(E)


def alpha(E: CyclicComplex, window: Tuple[int, int], check: bool = True,
          bch: Optional[BuildCh] = None,
          ccE: Optional[CcResult] = None) -> ChainMap:
    """The canonical map from the u-quotient expansion of cc(K(E)) onto
    cc(E): project to the u^0 slot, apply the augmentation on the K_0 part,
    pass to coinvariants."""
    F = E.field
    if bch is None:
        bch = build_ch(E, check=check)
    if ccE is None:
        ccE = CcResult(E, check=check)
    CC = expand(bch.mixed, "Exp", window)
    maps = {}
    for i in range(window[0], window[1] + 1):
        if not CC.dim(i) or not ccE.complex.dim(i):
            continue
        # offset of the u^0 slot (j=0, k=i)
        off0 = None
        o = 0
        for (j, k), dim in CC.slots.get(i, []):
            if j == 0 and k == i:
                off0 = o
                break
            o += dim
        if off0 is None:
            continue
        entries = []
        for s in bch.ccK.summands.get(i, []):
            tgt = ccE.summand_of(i, s.n, s.k)
            if tgt is None:
                continue
            KE_obj = bch.KE.obj[s.n]
            slot_at = TensorMap._layout(KE_obj, s.k)
            proj_entries = []
            for c, col in _columns(s.S).items():
                for x, v in col.items():
                    for a, b, o3, dim in slot_at:
                        if o3 <= x < o3 + dim:
                            break
                    else:
                        continue
                    if a != 0 or b != s.k:
                        continue
                    ne = dim // s.n
                    te = (x - o3) % ne
                    proj_entries.append((te, c, v))
            proj = Matrix.from_entries(F, E.obj[s.n].dim(s.k), s.S.cols, proj_entries)
            blk = tgt.Q.mul(proj)
            for r, row in blk.data.items():
                for c, v in row.items():
                    entries.append((tgt.offset + r, off0 + s.offset + c, v))
        m = Matrix.from_entries(F, ccE.complex.dim(i), CC.dim(i), entries)
        if not m.is_zero():
            maps[i] = m
    return ChainMap(CC, ccE.complex, maps, check=check)


# ---------------------------------------------------------------------------
# edgewise subdivision and the pi-pushforwards


class CyclicPComplex:
    """A p-cyclic complex: objects [m] (underlying [mp]) with the lifted
    faces, the restricted cyclic generator, and the order-p automorphism tau."""

    def __init__(self, field: Field, p: int, bound: int, obj, faces, cyclic_op,
                 tau, mor=None, min_slope: int = 0, slope_valid: bool = True):
        self.field = field
        self.p = p
        self.bound = bound
        self.obj = obj
        self.faces = faces
        self.cyclic_op = cyclic_op
        self.tau = tau
        self.mor = mor
        self.min_slope = min_slope
        self.slope_valid = slope_valid

    def face_mat(self, m: int, j: int, k: int) -> Matrix:
        return _map_component(self.faces[(m, j)], k, self.obj[m - 1].dim(k),
                              self.obj[m].dim(k), self.field)

    def cyclic_mat(self, m: int, k: int) -> Matrix:
        return _map_component(self.cyclic_op[m], k, self.obj[m].dim(k),
                              self.obj[m].dim(k), self.field)

    def tau_mat(self, m: int, k: int) -> Matrix:
        return _map_component(self.tau[m], k, self.obj[m].dim(k),
                              self.obj[m].dim(k), self.field)


def edgewise(E: CyclicComplex, p: int) -> CyclicPComplex:
    """Edgewise subdivision: object [m] becomes E([mp]) with tau the rotation
    by m; needs a morphism evaluator on E."""
    if E.mor is None:
        raise ValueError("edgewise subdivision needs a morphism evaluator")
    bound = E.N // p
    if bound < 1:
        raise ValueError("simplicial bound too small for p = %d" % p)
    obj = {m: E.obj[m * p] for m in range(1, bound + 1)}
    faces = {(m, j): E.mor(lift_to_p(face(m, j), p))
             for m in range(2, bound + 1) for j in range(m)}
    cyc = {m: E.mor(lift_to_p(cyclic(m), p)) for m in range(1, bound + 1)}
    tau = {m: E.mor(tau_p(m, p)) for m in range(1, bound + 1)}

    def mor(f):
        return E.mor(lift_to_p(f, p))

    return CyclicPComplex(E.field, p, bound, obj, faces, cyc, tau, mor=mor,
                          min_slope=E.min_slope * p, slope_valid=E.slope_valid)


def pi_p_push(Ep: CyclicPComplex, variant: str, check: bool = True):
    """Objectwise tau-coinvariants ('shriek') or invariants ('star') with the
    induced cyclic structure.  Returns (CyclicComplex, trace) where trace is
    the canonical norm map from the shriek to the star pushforward, stored
    degreewise per object (None for the star variant)."""
    F = Ep.field
    if variant not in ("shriek", "star"):
        raise ValueError("variant must be 'shriek' or 'star'")
    make = coinvariants if variant == "shriek" else invariants
    Qs: Dict[int, Dict[int, Matrix]] = {}
    Ss: Dict[int, Dict[int, Matrix]] = {}
    obj = {}
    for m in range(1, Ep.bound + 1):
        C = Ep.obj[m]
        Qs[m], Ss[m] = {}, {}
        for k in sorted(C.dims):
            Q, S = make(Ep.tau_mat(m, k), F)
            Qs[m][k] = Q
            Ss[m][k] = S
        dims = {k: Q.rows for k, Q in Qs[m].items() if Q.rows}
        d = {}
        for k in dims:
            if k - 1 not in Qs[m]:
                continue
            blk = Qs[m][k - 1].mul(C.diff(k).mul(Ss[m][k]))
            if not blk.is_zero():
                d[k] = blk
        if not dims:
            dims = {0: 0}
        obj[m] = ChainComplex(F, dims, d, true_lo=C.true_lo, true_hi=C.true_hi,
                              data_lo=C.data_lo, data_hi=C.data_hi, check=check)

    def induce(tab, m_src, m_tgt):
        out = {}
        for k in sorted(Ep.obj[m_src].dims):
            if k not in Qs[m_tgt]:
                continue
            if isinstance(tab, TensorMap):
                blk = Qs[m_tgt][k].mul(tab.times(k, Ss[m_src][k]))
            else:
                src_mat = tab.get(k)
                if src_mat is None:
                    continue
                blk = Qs[m_tgt][k].mul(src_mat.mul(Ss[m_src][k]))
            if not blk.is_zero():
                out[k] = blk
        return out

    faces = {(m, j): induce(tab, m, m - 1)
             for (m, j), tab in Ep.faces.items() if m <= Ep.bound}
    cyc = {m: induce(Ep.cyclic_op[m], m, m) for m in range(1, Ep.bound + 1)}
    out = CyclicComplex(F, Ep.bound, obj, faces, cyc,
                        min_slope=Ep.min_slope, slope_valid=Ep.slope_valid)
    trace = None
    if variant == "shriek":
        trace = {}
        for m in range(1, Ep.bound + 1):
            C = Ep.obj[m]
            trace[m] = {}
            for k in sorted(C.dims):
                op = Ep.tau_mat(m, k)
                norm = Matrix.zero(F, C.dim(k), C.dim(k))
                power = Matrix.identity(F, C.dim(k))
                for _ in range(Ep.p):
                    norm = norm.add(power)
                    power = op.mul(power)
                P, _inc = invariants(op, F)
                trace[m][k] = P.mul(norm.mul(Ss[m][k]))
    return out, trace


class PiFlatResult:
    """Objectwise periodic expansion of the tau-coinvariants of K tensor E,
    with the induced cyclic structure.

    `cyclic_obj` is a CyclicComplex whose objects are the expansions (these
    are unbounded in both directions, so slope-based trust is off); `mixed`
    keeps the underlying objectwise mixed complexes for filtration work.
    """

    def __init__(self, Ep: CyclicPComplex, window: Tuple[int, int],
                 check: bool = True):
        F = Ep.field
        p = Ep.p
        self.Ep = Ep
        self.window = window
        T: Dict[int, ChainComplex] = {}
        Qs: Dict[int, Dict[int, Matrix]] = {}
        Ss: Dict[int, Dict[int, Matrix]] = {}
        self.mixed: Dict[int, MixedComplex] = {}
        for m in range(1, Ep.bound + 1):
            n = m * p
            Tm = tensor(K_complex(F, n), Ep.obj[m])
            T[m] = Tm
            tmap = TensorMap(F, Tm, Tm, K_map(F, tau_p(m, p)), Ep.tau[m])
            Qs[m], Ss[m] = {}, {}
            dims = {}
            for k in sorted(Tm.dims):
                img = tmap.monomial(k)
                if img is not None:
                    Q, S = _monomial_coinv(img, Tm.dim(k), F)
                else:
                    Q, S = coinvariants(tmap.mat(k), F)
                Qs[m][k], Ss[m][k] = Q, S
                if Q.rows:
                    dims[k] = Q.rows
            d = {}
            for k in dims:
                if k - 1 not in Qs[m]:
                    continue
                blk = Qs[m][k - 1].mul(Tm.diff(k).mul(Ss[m][k]))
                if not blk.is_zero():
                    d[k] = blk
            base = ChainComplex(F, dims, d, true_lo=Tm.true_lo,
                                true_hi=Tm.true_hi, check=check)
            B = {}
            for k in sorted(dims):
                if k + 1 not in Qs[m]:
                    continue
                blk = Qs[m][k + 1].mul(_kappa_times(Tm, n, k, Ss[m][k], F))
                if not blk.is_zero():
                    B[k] = blk
            self.mixed[m] = MixedComplex(base, B, check=check)
        self.T = T
        self.Qs, self.Ss = Qs, Ss
        obj = {m: expand(self.mixed[m], "per", window)
               for m in range(1, Ep.bound + 1)}

        def induce_exp(m_src, m_tgt, kmap_f, etab):
            src, tgt = obj[m_src], obj[m_tgt]
            tm = TensorMap(F, T[m_src], T[m_tgt], kmap_f, etab)
            fq = {}
            for k in sorted(T[m_src].dims):
                if k not in Qs[m_tgt]:
                    continue
                blk = Qs[m_tgt][k].mul(tm.times(k, Ss[m_src][k]))
                if not blk.is_zero():
                    fq[k] = blk
            out = {}
            for i in range(window[0], window[1] + 1):
                if not src.dim(i):
                    continue
                tgt_off = {}
                o = 0
                for (j, k), dim in tgt.slots.get(i, []):
                    tgt_off[(j, k)] = o
                    o += dim
                entries = []
                o = 0
                for (j, k), dim in src.slots.get(i, []):
                    blk = fq.get(k)
                    if blk is not None and (j, k) in tgt_off:
                        o2 = tgt_off[(j, k)]
                        for r, row in blk.data.items():
                            for c, v in row.items():
                                entries.append((o2 + r, o + c, v))
                    o += dim
                m2 = Matrix.from_entries(F, tgt.dim(i), src.dim(i), entries)
                if not m2.is_zero():
                    out[i] = m2
            return out

        faces = {}
        for m in range(2, Ep.bound + 1):
            for j in range(m):
                f = lift_to_p(face(m, j), p)
                faces[(m, j)] = induce_exp(m, m - 1, K_map(F, f), Ep.faces[(m, j)])
        cyc = {}
        for m in range(1, Ep.bound + 1):
            f = lift_to_p(cyclic(m), p)
            cyc[m] = induce_exp(m, m, K_map(F, f), Ep.cyclic_op[m])
        self.cyclic_obj = CyclicComplex(F, Ep.bound, obj, faces, cyc,
                                        min_slope=0, slope_valid=False)


def pi_p_flat(Ep: CyclicPComplex, window: Tuple[int, int],
              check: bool = True) -> PiFlatResult:
    return PiFlatResult(Ep, window, check=check)
