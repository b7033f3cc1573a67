"""Finite dimensional (DG) algebras by structure constants, and the cyclic
object built from an algebra: object [n] carries the n-th tensor power, a
cyclic category morphism acts by multiplying the factors sitting over each
target vertex (in the cyclic order given by the lifts, with Koszul signs
for graded input).

Bar-type Hochschild cochain complexes and a couple of helpers for the
characteristic-p pipeline (Frobenius twist, equivariant tensor powers)
live here as well.
"""
from itertools import product as iproduct

from .exactlin import Field, Matrix
from .complexes import ChainComplex
from .cyclic import CyclicComplex, LambdaMorphism, face, cyclic, koszul_sign


class FinDimAlgebra:
    """Structure constants: mul[(i, j)] = {k: c} means b_i b_j = sum c b_k.

    `unit` is the coordinate vector of 1, `deg` the list of basis degrees
    (all zero when omitted), `diff` the differential as {i: {j: c}} meaning
    d(b_i) = sum c b_j.
    """

    def __init__(self, field, names, mul, unit, deg=None, diff=None):
        self.field = field
        self.names = list(names)
        self.dim = len(self.names)
        self.mul = {k: dict(v) for k, v in mul.items() if v}
        self.unit = dict(unit)
        self.deg = list(deg) if deg is not None else [0] * self.dim
        self.diff = {i: dict(r) for i, r in (diff or {}).items() if r}

    def product(self, i, j):
        return self.mul.get((i, j), {})

    def vec_product(self, v, w):
        F = self.field
        out = {}
        for i, a in v.items():
            for j, b in w.items():
                c = F.mul(a, b)
                for k, s in self.product(i, j).items():
                    t = F.add(out.get(k, F.zero()), F.mul(c, s))
                    if t == F.zero():
                        out.pop(k, None)
                    else:
                        out[k] = t
        return out

    def d_vec(self, v):
        F = self.field
        out = {}
        for i, a in v.items():
            for j, c in self.diff.get(i, {}).items():
                t = F.add(out.get(j, F.zero()), F.mul(a, c))
                if t == F.zero():
                    out.pop(j, None)
                else:
                    out[j] = t
        return out

    def is_graded(self):
        return any(d != 0 for d in self.deg) or bool(self.diff)

    def validate(self):
        """Return a list of human-readable witnesses of broken axioms."""
        F = self.field
        bad = []
        unit_vec = self.unit
        for i, c in unit_vec.items():
            if c != F.zero() and self.deg[i] != 0:
                bad.append("unit has a component in degree %d" % self.deg[i])
        for i in range(self.dim):
            ei = {i: F.one()}
            if self.vec_product(unit_vec, ei) != ei:
                bad.append("1 * %s != %s" % (self.names[i], self.names[i]))
            if self.vec_product(ei, unit_vec) != ei:
                bad.append("%s * 1 != %s" % (self.names[i], self.names[i]))
        for i in range(self.dim):
            for j in range(self.dim):
                for k, c in self.product(i, j).items():
                    if c != F.zero() and self.deg[k] != self.deg[i] + self.deg[j]:
                        bad.append("degree of %s*%s term %s is off"
                                   % (self.names[i], self.names[j], self.names[k]))
        for i in range(self.dim):
            for j in range(self.dim):
                for k in range(self.dim):
                    lhs = self.vec_product(self.product(i, j), {k: F.one()})
                    rhs = self.vec_product({i: F.one()}, self.product(j, k))
                    if lhs != rhs:
                        bad.append("(%s %s) %s != %s (%s %s)"
                                   % (self.names[i], self.names[j], self.names[k],
                                      self.names[i], self.names[j], self.names[k]))
        if self.d_vec(unit_vec):
            bad.append("d(1) != 0")
        for i, row in self.diff.items():
            for j, c in row.items():
                if c != F.zero() and self.deg[j] != self.deg[i] - 1:
                    bad.append("d does not lower the degree of %s by 1" % self.names[i])
            if self.d_vec(row):
                bad.append("d^2(%s) != 0" % self.names[i])
        for i in range(self.dim):
            for j in range(self.dim):
                lhs = self.d_vec(self.product(i, j))
                rhs = self.vec_product(self.diff.get(i, {}), {j: F.one()})
                tail = self.vec_product({i: F.one()}, self.diff.get(j, {}))
                if self.deg[i] % 2:
                    tail = {k: F.neg(v) for k, v in tail.items()}
                for k, v in tail.items():
                    t = F.add(rhs.get(k, F.zero()), v)
                    if t == F.zero():
                        rhs.pop(k, None)
                    else:
                        rhs[k] = t
                if lhs != rhs:
                    bad.append("Leibniz fails on %s, %s" % (self.names[i], self.names[j]))
        return bad


# ---------------------------------------------------------------------------
# built-in algebras


def ground(field):
    return FinDimAlgebra(field, ["1"], {(0, 0): {0: field.one()}}, {0: field.one()})


def product_field(field, k=2):
    one = field.one()
    names = ["e%d" % i for i in range(k)]
    mul = {(i, i): {i: one} for i in range(k)}
    return FinDimAlgebra(field, names, mul, {i: one for i in range(k)})


def matrix_algebra(field, n=2):
    one = field.one()
    names = ["e%d%d" % (i, j) for i in range(n) for j in range(n)]
    mul = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    if j == k:
                        mul[(i * n + j, k * n + l)] = {i * n + l: one}
    unit = {i * n + i: one for i in range(n)}
    return FinDimAlgebra(field, names, mul, unit)


def dual_numbers(field):
    one = field.one()
    mul = {(0, 0): {0: one}, (0, 1): {1: one}, (1, 0): {1: one}}
    return FinDimAlgebra(field, ["1", "eps"], mul, {0: one})


def dg_two_term(field):
    """Two-term DG algebra k<1, x> with x in degree 1, x^2 = 0, dx = 1."""
    one = field.one()
    mul = {(0, 0): {0: one}, (0, 1): {1: one}, (1, 0): {1: one}}
    return FinDimAlgebra(field, ["1", "x"], mul, {0: one},
                         deg=[0, 1], diff={1: {0: one}})


# ---------------------------------------------------------------------------
# the cyclic object of an algebra


class TensorBasis:
    """Basis tuples of the n-th tensor power, grouped by total degree."""

    def __init__(self, A, n):
        self.A = A
        self.n = n
        by_deg = {}
        for t in iproduct(range(A.dim), repeat=n):
            k = sum(A.deg[i] for i in t)
            by_deg.setdefault(k, []).append(t)
        self.by_deg = by_deg
        self.index = {}
        for k, lst in by_deg.items():
            for pos, t in enumerate(lst):
                self.index[t] = (k, pos)
        self.dims = {k: len(lst) for k, lst in by_deg.items()}


def _tensor_complex(A, tb):
    """Chain complex of the tensor power with the Leibniz differential."""
    F = A.field
    d = {}
    if A.diff:
        for k, lst in tb.by_deg.items():
            if k - 1 not in tb.dims:
                continue
            entries = []
            for col, t in enumerate(lst):
                sign_deg = 0
                for v in range(tb.n):
                    if v:
                        sign_deg += A.deg[t[v - 1]]
                    for j, c in A.diff.get(t[v], {}).items():
                        t2 = t[:v] + (j,) + t[v + 1:]
                        k2, row = tb.index[t2]
                        val = c if sign_deg % 2 == 0 else F.neg(c)
                        entries.append((row, col, val))
            m = Matrix.from_entries(F, tb.dims[k - 1], len(lst), entries)
            if not m.is_zero():
                d[k] = m
    degs = sorted(tb.dims)
    return ChainComplex(F, dict(tb.dims), d, true_lo=degs[0], true_hi=degs[-1])


def _evaluate_mor(A, f, tb_src, tb_tgt):
    """Degreewise matrices of the structure map of a Lambda morphism."""
    F = A.field
    pre = f.preimages()
    n_src = f.n_src
    order = [l % n_src for (_w, lifts) in pre for l in lifts]
    entries = {}
    unit_items = sorted(A.unit.items())
    for k, lst in tb_src.by_deg.items():
        for col, t in enumerate(lst):
            sgn = koszul_sign(order, [A.deg[i] for i in t]) if A.is_graded() else 1
            # acc maps partial target tuples to coefficients
            acc = {(): F.one() if sgn == 1 else F.neg(F.one())}
            for _w, lifts in pre:
                if lifts:
                    vec = {t[lifts[0] % n_src]: F.one()}
                    for l in lifts[1:]:
                        vec = A.vec_product(vec, {t[l % n_src]: F.one()})
                        if not vec:
                            break
                    items = sorted(vec.items())
                else:
                    items = unit_items
                if not items:
                    acc = {}
                    break
                acc = {tup + (i,): F.mul(c, ci)
                       for tup, c in acc.items() for i, ci in items}
            for tup, c in acc.items():
                k2, row = tb_tgt.index[tup]
                entries.setdefault(k2, {}).setdefault(k, []).append((row, col, c))
    out = {}
    for k in tb_src.dims:
        ent = entries.get(k, {}).get(k, [])
        m = Matrix.from_entries(F, tb_tgt.dims.get(k, 0), tb_src.dims[k], ent)
        if not m.is_zero():
            out[k] = m
    return out


def anat(A, N, check=False):
    """The cyclic object of an algebra: [n] carries the n-th tensor power."""
    F = A.field
    tb = {n: TensorBasis(A, n) for n in range(1, N + 1)}
    obj = {n: _tensor_complex(A, tb[n]) for n in range(1, N + 1)}

    def mor(f):
        return _evaluate_mor(A, f, tb[f.n_src], tb[f.n_tgt])

    faces = {(n, j): mor(face(n, j)) for n in range(2, N + 1) for j in range(n)}
    cyc = {n: mor(cyclic(n)) for n in range(1, N + 1)}
    d_min = min(A.deg)
    E = CyclicComplex(F, N, obj, faces, cyc, mor=mor,
                      min_slope=min(0, d_min))
    if check:
        bad = E.verify_relations()
        if bad:
            raise ValueError("cyclic relations fail: %s" % bad[0])
    return E


# ---------------------------------------------------------------------------
# Hochschild cochains and the characteristic-p helpers


def hochschild_cochain_complex(A, n_max, reduced=False):
    """Bar cochain complex C^n = Hom(A^{tensor n}, A) for ungraded A, as a
    cochain complex stored with raising differential delta: C^n -> C^{n+1}.

    With `reduced`, the n = 0 term is dropped (Hom(k, A) removed); the
    resulting cohomology agrees with the full one in degrees >= 2.

    Returns (dims, delta) with delta[n]: C^n -> C^{n+1}.
    """
    F = A.field
    dim = A.dim
    dims = {n: dim ** (n + 1) for n in range(0, n_max + 1)}
    lo = 1 if reduced else 0

    def enc(args, out):
        # cochain basis: (input tuple, output basis index)
        code = out
        for a in args:
            code = code * dim + a
        return code

    delta = {}
    for n in range(lo, n_max):
        entries = []
        for I in iproduct(range(dim), repeat=n):
            for o in range(dim):
                col = enc(I, o)
                # (delta phi)(a_0..a_n); phi is the basis cochain (I -> b_o)
                for a0 in range(dim):
                    for k, c in A.product(a0, o).items():
                        entries.append((enc((a0,) + I, k), col, c))
                for i in range(1, n + 1):
                    for x in range(dim):
                        for y in range(dim):
                            c = A.product(x, y).get(I[i - 1])
                            if c is None or c == F.zero():
                                continue
                            args = I[:i - 1] + (x, y) + I[i:]
                            val = c if i % 2 == 0 else F.neg(c)
                            entries.append((enc(args, o), col, val))
                for an in range(dim):
                    for k, c in A.product(o, an).items():
                        val = c if (n + 1) % 2 == 0 else F.neg(c)
                        entries.append((enc(I + (an,), k), col, val))
        m = Matrix.from_entries(F, dims[n + 1], dims[n], entries)
        delta[n] = m
    if reduced:
        dims = {n: d for n, d in dims.items() if n >= 1}
    return dims, delta


def hochschild_cohomology_dims(A, n_max, reduced=False):
    """HH^n(A, A) dims for 0 <= n < n_max (reduced: 1 <= n < n_max)."""
    dims, delta = hochschild_cochain_complex(A, n_max, reduced=reduced)
    lo = 1 if reduced else 0
    out = {}
    for n in range(lo, n_max):
        r_in = delta[n - 1].rank() if n - 1 in delta else 0
        r_out = delta[n].rank() if n in delta else 0
        out[n] = dims[n] - r_in - r_out
    return out


def frobenius_twist(A):
    """The Frobenius twist; over the prime field the structure constants are
    unchanged, so this is a copy (dims are all that downstream code uses)."""
    if A.field.p == 0:
        raise ValueError("no Frobenius twist in characteristic zero")
    return FinDimAlgebra(A.field, A.names, A.mul, A.unit, deg=A.deg, diff=A.diff)


def tensor_power_equivariant(A, p):
    """The p-th tensor power algebra with its cyclic permutation operator.

    Returns (B, tau) where B is the tensor power with Koszul-signed
    componentwise multiplication and tau is the degreewise matrix of the
    longest cyclic permutation (last factor to the front, Koszul signs).
    """
    F = A.field
    tb = TensorBasis(A, p)
    names = ["(" + ",".join(A.names[i] for i in t) + ")"
             for k in sorted(tb.by_deg) for t in tb.by_deg[k]]
    flat = [t for k in sorted(tb.by_deg) for t in tb.by_deg[k]]
    pos = {t: i for i, t in enumerate(flat)}
    mul = {}
    for a, s in enumerate(flat):
        for b, t in enumerate(flat):
            # Koszul sign from moving each factor of t past the later factors of s
            e = 0
            for v in range(p):
                e += A.deg[t[v]] * sum(A.deg[s[w]] for w in range(v + 1, p))
            sgn = -1 if e % 2 else 1
            acc = {(): F.one() if sgn == 1 else F.neg(F.one())}
            for v in range(p):
                m = A.product(s[v], t[v])
                if not m:
                    acc = {}
                    break
                acc = {tup + (i,): F.mul(c, ci)
                       for tup, c in acc.items() for i, ci in m.items()}
            row = {}
            for tup, c in acc.items():
                row[pos[tup]] = F.add(row.get(pos[tup], F.zero()), c)
            row = {i: c for i, c in row.items() if c != F.zero()}
            if row:
                mul[(a, b)] = row
    unit_items = sorted(A.unit.items())
    unit = {}
    acc = {(): F.one()}
    for _v in range(p):
        acc = {tup + (i,): F.mul(c, ci) for tup, c in acc.items()
               for i, ci in unit_items}
    for tup, c in acc.items():
        unit[pos[tup]] = c
    deg = [sum(A.deg[i] for i in t) for t in flat]
    B = FinDimAlgebra(F, names, mul, unit, deg=deg)
    tau_entries = {}
    for a, t in enumerate(flat):
        t2 = (t[-1],) + t[:-1]
        e = A.deg[t[-1]] * sum(A.deg[t[v]] for v in range(p - 1))
        val = F.neg(F.one()) if e % 2 else F.one()
        tau_entries.setdefault(deg[a], []).append((pos[t2], a, val))
    # degreewise matrices in the TensorBasis coordinate order
    tau = {}
    for k, lst in tb.by_deg.items():
        loc = {pos[t]: i for i, t in enumerate(lst)}
        ent = [(loc[r], loc[c], v) for r, c, v in tau_entries.get(k, [])]
        tau[k] = Matrix.from_entries(F, len(lst), len(lst), ent)
    return B, tau
