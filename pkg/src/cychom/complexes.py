"""Windowed chain complexes with trust bookkeeping, mixed complexes and
their four periodic expansions, bicomplex totalization, cones and tensors.

Degrees are homological (d lowers degree by 1).  A complex only stores data
inside a finite window; `true_lo`/`true_hi` record where the *true* object
is known to vanish (None = no bound known), and `data_lo`/`data_hi` bound
the degrees where the stored dims and differentials agree with the true
object.  Homology is only reported where the three neighbouring degrees are
certified; everything else is a refusal, never a silent wrong answer.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from .exactlin import Field, Matrix, Subspace


class TrustError(Exception):
    """Raised when homology is requested outside the certified window."""


class ChainComplex:
    def __init__(self, field: Field, dims: Dict[int, int], d: Dict[int, Matrix],
                 true_lo: Optional[int] = None, true_hi: Optional[int] = None,
                 data_lo: Optional[int] = None, data_hi: Optional[int] = None,
                 slots: Optional[Dict[int, List[Tuple[object, int]]]] = None,
                 check: bool = True):
        self.field = field
        self.dims = {i: n for i, n in dims.items() if n}
        degrees = sorted(self.dims) or [0]
        self.lo, self.hi = degrees[0], degrees[-1]
        self.d = {i: m for i, m in d.items() if m is not None and not m.is_zero()}
        self.true_lo = true_lo
        self.true_hi = true_hi
        self.data_lo = self.lo if data_lo is None else data_lo
        self.data_hi = self.hi if data_hi is None else data_hi
        self.slots = slots
        self._rank_cache: Dict[int, int] = {}
        if check:
            self._check()

    def _check(self):
        for i, m in self.d.items():
            if m.cols != self.dim(i) or m.rows != self.dim(i - 1):
                raise ValueError("differential shape mismatch in degree %d" % i)
            nxt = self.d.get(i + 1)
            if nxt is not None and not m.mul(nxt).is_zero():
                raise ValueError("d^2 != 0 at degree %d" % (i + 1))

    # -- bookkeeping -------------------------------------------------

    def dim(self, i: int) -> int:
        return self.dims.get(i, 0)

    def diff(self, i: int) -> Matrix:
        m = self.d.get(i)
        if m is None:
            m = Matrix.zero(self.field, self.dim(i - 1), self.dim(i))
        return m

    def window(self) -> Tuple[int, int]:
        return (self.lo, self.hi)

    def known(self, i: int) -> bool:
        """True when degree i of the stored data certifiably matches the true object."""
        if self.data_lo <= i <= self.data_hi:
            return True
        if self.true_lo is not None and i < self.true_lo:
            return True
        if self.true_hi is not None and i > self.true_hi:
            return True
        return False

    def trusted(self, i: int) -> bool:
        return self.known(i - 1) and self.known(i) and self.known(i + 1)

    def trust(self) -> Tuple[Optional[int], Optional[int]]:
        """Maximal certified homology interval intersected with the window."""
        ts = [i for i in range(self.lo, self.hi + 1) if self.trusted(i)]
        if not ts:
            return (None, None)
        return (ts[0], ts[-1])

    def trusted_degrees(self, lo=None, hi=None) -> List[int]:
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        return [i for i in range(lo, hi + 1) if self.trusted(i)]

    # -- homology ----------------------------------------------------

    def _rank(self, i: int) -> int:
        if i not in self._rank_cache:
            self._rank_cache[i] = self.diff(i).rank() if self.dim(i) else 0
        return self._rank_cache[i]

    def homology_dim(self, i: int) -> int:
        if not self.trusted(i):
            raise TrustError("degree %d outside certified window %r" % (i, self.trust()))
        return self.dim(i) - self._rank(i) - self._rank(i + 1)

    def homology(self, i: int):
        """(dimension, canonical basis of representatives)."""
        dim = self.homology_dim(i)
        ker = self.diff(i).kernel() if self.dim(i) else Subspace.zero_space(self.field, 0)
        if self.dim(i) and i + 1 in self.d:
            img = self.d[i + 1].image()
            reps = [img.reduce_vec(v) for v in ker.basis]
            rep_space = Subspace(self.field, self.dim(i), reps)
        else:
            rep_space = ker
        assert rep_space.dim == dim
        return dim, rep_space.basis

    def homology_table(self, lo, hi) -> Dict[int, Optional[int]]:
        """dims for trusted degrees, None for refused ones."""
        return {i: (self.homology_dim(i) if self.trusted(i) else None)
                for i in range(lo, hi + 1)}

    def euler(self, lo, hi) -> int:
        return sum((-1) ** i * self.dim(i) for i in range(lo, hi + 1))

    # -- constructions -----------------------------------------------

    def shift(self, n: int) -> "ChainComplex":
        sgn = self.field.coerce((-1) ** n)
        return ChainComplex(
            self.field,
            {i + n: v for i, v in self.dims.items()},
            {i + n: m.scale(sgn) for i, m in self.d.items()},
            true_lo=None if self.true_lo is None else self.true_lo + n,
            true_hi=None if self.true_hi is None else self.true_hi + n,
            data_lo=self.data_lo + n, data_hi=self.data_hi + n,
            slots=None if self.slots is None else {i + n: s for i, s in self.slots.items()},
            check=False)

    def is_zero(self) -> bool:
        return not self.dims


def _certified_hull(lo: int, hi: int, pred) -> Tuple[int, int]:
    """Largest degree interval inside [lo, hi] where pred holds (empty -> (lo+1, lo))."""
    best = (lo + 1, lo)
    start = None
    for i in range(lo, hi + 2):
        if i <= hi and pred(i):
            if start is None:
                start = i
        elif start is not None:
            if (i - 1) - start > best[1] - best[0]:
                best = (start, i - 1)
            start = None
    return best


class ChainMap:
    def __init__(self, source: ChainComplex, target: ChainComplex,
                 maps: Dict[int, Matrix], degree: int = 0, check: bool = True):
        self.source = source
        self.target = target
        self.maps = {i: m for i, m in maps.items() if not m.is_zero()}
        self.degree = degree
        if check:
            self._check()

    def component(self, i: int) -> Matrix:
        m = self.maps.get(i)
        if m is None:
            m = Matrix.zero(self.source.field, self.target.dim(i + self.degree),
                            self.source.dim(i))
        return m

    def _check(self):
        k = self.degree
        for i in range(self.source.lo, self.source.hi + 1):
            f_i = self.component(i)
            if f_i.rows != self.target.dim(i + k) or f_i.cols != self.source.dim(i):
                raise ValueError("chain map shape mismatch at %d" % i)
            lhs = self.target.diff(i + k).mul(f_i)
            rhs = self.component(i - 1).mul(self.source.diff(i))
            if self.degree % 2:
                rhs = rhs.neg()
            if not lhs.sub(rhs).is_zero():
                raise ValueError("not a chain map at degree %d" % i)

    def is_qiso(self, degrees) -> bool:
        """Quasiisomorphism test on the given (trusted) degrees via cone acyclicity."""
        c = cone(self)
        return all(c.homology_dim(i) == 0 for i in degrees if c.trusted(i))


def cone(f: ChainMap) -> ChainComplex:
    """cone(f)_i = C_{i-1} + D_i, d(c,e) = (-dc, de - f(c))."""
    assert f.degree == 0
    C, D = f.source, f.target
    F = C.field
    dims = {}
    for i in range(min(C.lo + 1, D.lo), max(C.hi + 1, D.hi) + 1):
        n = C.dim(i - 1) + D.dim(i)
        if n:
            dims[i] = n
    d = {}
    for i in dims:
        nc, nd = C.dim(i - 1), D.dim(i)
        entries = []
        dc = C.diff(i - 1)
        for r, row in dc.data.items():
            for c, v in row.items():
                entries.append((r, c, F.neg(v)))
        dd = D.diff(i)
        for r, row in dd.data.items():
            for c, v in row.items():
                entries.append((C.dim(i - 2) + r, nc + c, v))
        fc = f.component(i - 1)
        for r, row in fc.data.items():
            for c, v in row.items():
                entries.append((C.dim(i - 2) + r, c, F.neg(v)))
        d[i] = Matrix.from_entries(F, C.dim(i - 2) + D.dim(i - 1), nc + nd, entries)
    tl = th = None
    if C.true_lo is not None and D.true_lo is not None:
        tl = min(C.true_lo + 1, D.true_lo)
    if C.true_hi is not None and D.true_hi is not None:
        th = max(C.true_hi + 1, D.true_hi)
    lo = min(C.lo + 1, D.lo) - 1
    hi = max(C.hi + 1, D.hi) + 1
    dlo, dhi = _certified_hull(lo, hi, lambda i: C.known(i - 1) and D.known(i))
    return ChainComplex(F, dims, d, true_lo=tl, true_hi=th, data_lo=dlo, data_hi=dhi)


def tensor(C: ChainComplex, D: ChainComplex) -> ChainComplex:
    """Tensor product with the Koszul sign (-1)^a on 1 x d_D."""
    F = C.field
    pairs: Dict[int, List[Tuple[int, int, int]]] = {}  # i -> [(a, b, offset)]
    dims = {}
    for i in range(C.lo + D.lo, C.hi + D.hi + 1):
        off = 0
        lst = []
        for a in range(C.lo, C.hi + 1):
            b = i - a
            n = C.dim(a) * D.dim(b)
            if n:
                lst.append((a, b, off))
                off += n
        if off:
            pairs[i] = lst
            dims[i] = off
    d = {}
    for i in dims:
        tgt = pairs.get(i - 1, [])
        tgt_off = {(a, b): off for a, b, off in tgt}
        entries = []
        for a, b, off in pairs[i]:
            nb = D.dim(b)
            # d_C x 1 into (a-1, b)
            if (a - 1, b) in tgt_off:
                o2 = tgt_off[(a - 1, b)]
                for r, row in C.diff(a).data.items():
                    for c, v in row.items():
                        for k in range(nb):
                            entries.append((o2 + r * nb + k, off + c * nb + k, v))
            # (-1)^a 1 x d_D into (a, b-1)
            if (a, b - 1) in tgt_off:
                o2 = tgt_off[(a, b - 1)]
                sgn = F.coerce((-1) ** a)
                nb2 = D.dim(b - 1)
                for r, row in D.diff(b).data.items():
                    for c, v in row.items():
                        for k in range(C.dim(a)):
                            entries.append((o2 + k * nb2 + r, off + k * nb + c,
                                            F.mul(sgn, v)))
        m = Matrix.from_entries(F, dims.get(i - 1, 0), dims[i], entries)
        if not m.is_zero():
            d[i] = m
    slots = {i: [((a, b), C.dim(a) * D.dim(b)) for a, b, _ in lst]
             for i, lst in pairs.items()}
    tl = None
    if C.true_lo is not None and D.true_lo is not None:
        tl = C.true_lo + D.true_lo
    th = None
    if C.true_hi is not None and D.true_hi is not None:
        th = C.true_hi + D.true_hi

    def cert(i):
        if C.true_lo is None or C.true_hi is None:
            return False
        return all(C.known(a) and D.known(i - a)
                   for a in range(C.true_lo, C.true_hi + 1))

    dlo, dhi = _certified_hull(C.lo + D.lo - 1, C.hi + D.hi + 1, cert)
    return ChainComplex(F, dims, d, true_lo=tl, true_hi=th,
                        data_lo=dlo, data_hi=dhi, slots=slots)


class BiComplex:
    """dims[(a,b)]; dh: (a,b)->(a-1,b); dv: (a,b)->(a,b-1); dh,dv anticommute."""

    def __init__(self, field: Field, dims: Dict[Tuple[int, int], int],
                 dh: Dict[Tuple[int, int], Matrix], dv: Dict[Tuple[int, int], Matrix],
                 check: bool = True):
        self.field = field
        self.dims = {k: n for k, n in dims.items() if n}
        self.dh = {k: m for k, m in dh.items() if not m.is_zero()}
        self.dv = {k: m for k, m in dv.items() if not m.is_zero()}
        if check:
            self._check()

    def dim(self, a, b):
        return self.dims.get((a, b), 0)

    def _mat(self, table, a, b, rows, cols):
        m = table.get((a, b))
        if m is None:
            m = Matrix.zero(self.field, rows, cols)
        return m

    def dh_at(self, a, b):
        return self._mat(self.dh, a, b, self.dim(a - 1, b), self.dim(a, b))

    def dv_at(self, a, b):
        return self._mat(self.dv, a, b, self.dim(a, b - 1), self.dim(a, b))

    def _check(self):
        for (a, b) in self.dims:
            if not self.dh_at(a - 1, b).mul(self.dh_at(a, b)).is_zero():
                raise ValueError("dh^2 != 0 at %r" % ((a, b),))
            if not self.dv_at(a, b - 1).mul(self.dv_at(a, b)).is_zero():
                raise ValueError("dv^2 != 0 at %r" % ((a, b),))
            anti = self.dh_at(a, b - 1).mul(self.dv_at(a, b)).add(
                self.dv_at(a - 1, b).mul(self.dh_at(a, b)))
            if not anti.is_zero():
                raise ValueError("dh, dv do not anticommute at %r" % ((a, b),))

    @classmethod
    def from_commuting(cls, field, dims, dh, dv_commuting, check=True):
        """Twist commuting squares into a bicomplex: dv -> (-1)^a dv."""
        dv = {}
        for (a, b), m in dv_commuting.items():
            dv[(a, b)] = m if a % 2 == 0 else m.neg()
        return cls(field, dims, dh, dv, check=check)


def total(bc: BiComplex, data_lo=None, data_hi=None,
          true_lo=None, true_hi=None) -> ChainComplex:
    """Sum-total complex of a bicomplex (finite support assumed)."""
    F = bc.field
    cells: Dict[int, List[Tuple[int, int, int]]] = {}
    dims: Dict[int, int] = {}
    for (a, b) in sorted(bc.dims):
        i = a + b
        off = dims.get(i, 0)
        cells.setdefault(i, []).append((a, b, off))
        dims[i] = off + bc.dim(a, b)
    d = {}
    for i in sorted(dims):
        tgt = {(a, b): off for a, b, off in cells.get(i - 1, [])}
        entries = []
        for a, b, off in cells[i]:
            for (mat, key) in ((bc.dh.get((a, b)), (a - 1, b)),
                               (bc.dv.get((a, b)), (a, b - 1))):
                if mat is None or key not in tgt:
                    continue
                o2 = tgt[key]
                for r, row in mat.data.items():
                    for c, v in row.items():
                        entries.append((o2 + r, off + c, v))
        m = Matrix.from_entries(F, dims.get(i - 1, 0), dims[i], entries)
        if not m.is_zero():
            d[i] = m
    slots = {i: [((a, b), bc.dim(a, b)) for a, b, _ in lst] for i, lst in cells.items()}
    if not dims:
        dims = {0: 0}
    return ChainComplex(F, dims, d, true_lo=true_lo, true_hi=true_hi,
                        data_lo=data_lo, data_hi=data_hi, slots=slots)


class MixedComplex:
    """A complex with a degree +1 operator B: B^2 = 0, dB + Bd = 0."""

    def __init__(self, base: ChainComplex, B: Dict[int, Matrix], check: bool = True):
        self.base = base
        self.B = {i: m for i, m in B.items() if not m.is_zero()}
        if check:
            self._check()

    def B_at(self, i: int) -> Matrix:
        m = self.B.get(i)
        if m is None:
            m = Matrix.zero(self.base.field, self.base.dim(i + 1), self.base.dim(i))
        return m

    def _check(self):
        C = self.base
        for i in range(C.lo, C.hi + 1):
            if self.B_at(i).cols != C.dim(i) or self.B_at(i).rows != C.dim(i + 1):
                raise ValueError("B shape mismatch at %d" % i)
            if not self.B_at(i + 1).mul(self.B_at(i)).is_zero():
                raise ValueError("B^2 != 0 at %d" % i)
            anti = C.diff(i + 1).mul(self.B_at(i)).add(self.B_at(i - 1).mul(C.diff(i)))
            if not anti.is_zero():
                raise ValueError("dB + Bd != 0 at %d" % i)


def mixed_from_group_action(E_dim: int, sigma: Matrix, n: int) -> MixedComplex:
    """Two-term mixed complex E --(1-sigma)--> E in degrees 1, 0; B = norm."""
    F = sigma.field
    power = Matrix.identity(F, E_dim)
    norm = Matrix.zero(F, E_dim, E_dim)
    for _ in range(n):
        norm = norm.add(power)
        power = sigma.mul(power)
    if not power.sub(Matrix.identity(F, E_dim)).is_zero():
        raise ValueError("sigma^n != id")
    d1 = Matrix.identity(F, E_dim).sub(sigma)
    base = ChainComplex(F, {0: E_dim, 1: E_dim}, {1: d1}, true_lo=0, true_hi=1)
    return MixedComplex(base, {0: norm})


EXPAND_MODES = ("Per", "coPer", "per", "Exp")


def expand(V: MixedComplex, mode: str, window: Tuple[int, int]) -> ChainComplex:
    """Total complex of V<u-powers> with differential d + uB, deg u = -2.

    Slot (j, k) in total degree i means u^j V_k with k = i + 2j.  Mode selects
    admissible u-powers: per/Per/coPer keep every slot inside V's window (they
    coincide extensionally on windowed data and differ only in trust
    bookkeeping), Exp keeps j <= 0.
    """
    if mode not in EXPAND_MODES:
        raise ValueError("unknown mode %r" % mode)
    C = V.base
    F = C.field
    lo, hi = window
    slot_lists: Dict[int, List[Tuple[int, int, int]]] = {}
    dims: Dict[int, int] = {}
    for i in range(lo, hi + 1):
        off = 0
        lst = []
        start = C.lo if (C.lo - i) % 2 == 0 else C.lo + 1
        for k in range(start, C.hi + 1, 2):
            j = (k - i) // 2
            if mode == "Exp" and j > 0:
                continue
            n = C.dim(k)
            if n:
                lst.append((j, k, off))
                off += n
        slot_lists[i] = lst
        if off:
            dims[i] = off
    d = {}
    for i in range(lo + 1, hi + 1):
        tgt = {(j, k): off for j, k, off in slot_lists.get(i - 1, [])}
        entries = []
        for j, k, off in slot_lists[i]:
            dm = C.d.get(k)
            if dm is not None and (j, k - 1) in tgt:
                o2 = tgt[(j, k - 1)]
                for r, row in dm.data.items():
                    for c, v in row.items():
                        entries.append((o2 + r, off + c, v))
            bm = V.B.get(k)
            if bm is not None and (j + 1, k + 1) in tgt:
                o2 = tgt[(j + 1, k + 1)]
                for r, row in bm.data.items():
                    for c, v in row.items():
                        entries.append((o2 + r, off + c, v))
        m = Matrix.from_entries(F, dims.get(i - 1, 0), dims.get(i, 0), entries)
        if not m.is_zero():
            d[i] = m
    # trust: degree i certified when every slot the true object would
    # contribute is present and itself certified
    certified = []
    for i in range(lo, hi + 1):
        if C.true_lo is None:
            break
        if mode == "Exp":
            k_hi = i if C.true_hi is None else min(i, C.true_hi)
        elif C.true_hi is None:
            break
        else:
            k_hi = C.true_hi
        ok = True
        kk = C.true_lo if (C.true_lo - i) % 2 == 0 else C.true_lo + 1
        while kk <= k_hi:
            if not C.known(kk):
                ok = False
                break
            kk += 2
        if ok:
            certified.append(i)
    if certified:
        data_lo, data_hi = certified[0], certified[-1]
    else:
        data_lo, data_hi = lo + 1, lo  # empty certification
    tl = C.true_lo if mode == "Exp" else None
    slots = {i: [(j, k) for j, k, _ in lst] for i, lst in slot_lists.items()}
    slot_sizes = {i: [((j, k), C.dim(k)) for j, k, _ in lst]
                  for i, lst in slot_lists.items()}
    cc = ChainComplex(F, dims, d, true_lo=tl, true_hi=None,
                      data_lo=data_lo, data_hi=data_hi,
                      slots=slot_sizes, check=False)
    cc.u_slots = slots
    return cc


def u_map(C_src: ChainComplex, C_tgt: ChainComplex, mode: str) -> Dict[int, Matrix]:
    """The periodicity map u on expansions: slot (j,k) of degree i to slot
    (j+1,k) of degree i-2; slots without a target are killed (Exp quotient)."""
    F = C_src.field
    out = {}
    for i, lst in C_src.u_slots.items():
        src_sizes = dict(C_src.slots[i])
        if i - 2 not in C_tgt.u_slots:
            continue
        tgt_off = {}
        off = 0
        for (j, k), n in C_tgt.slots[i - 2]:
            tgt_off[(j, k)] = off
            off += n
        entries = []
        soff = 0
        for (j, k) in lst:
            n = src_sizes[(j, k)]
            if (j + 1, k) in tgt_off:
                o2 = tgt_off[(j + 1, k)]
                for t in range(n):
                    entries.append((o2 + t, soff + t, F.one()))
            soff += n
        out[i] = Matrix.from_entries(F, C_tgt.dim(i - 2), C_src.dim(i), entries)
    return out
