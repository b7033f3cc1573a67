"""Decreasing filtrations on windowed chain complexes.

A filtration is stored as honest subspaces F^j of each chain group, for j
in a finite index window [j_min, j_max].  Outside the window it extends by
the full space below (when `exhaustive`) and by zero above (when
`separated`).  Graded pieces, filtered truncations, depth quotients and the
commensurability tests are all built from these subspaces exactly.
"""
from __future__ import annotations

from typing import Dict, Optional, Tuple

from .exactlin import Matrix, Subspace
from .complexes import ChainComplex, ChainMap


class SubQuotient:
    """num/den inside a coordinate space, den contained in num.

    Keeps a canonical complement basis: representatives are the basis
    vectors of num at the non-pivot positions of den-inside-num, so that
    project(rep(k)) is the k-th unit vector.
    """

    __slots__ = ("num", "den", "q", "free", "dim")

    def __init__(self, num: Subspace, den: Subspace):
        F = num.field
        self.num = num
        self.den = den
        den_in = Subspace(F, num.dim, [num.coords(v) for v in den.basis])
        self.q = den_in.quotient_map()
        piv = set(den_in.pivots)
        self.free = [c for c in range(num.dim) if c not in piv]
        self.dim = len(self.free)

    def rep(self, k: int) -> Dict[int, object]:
        """Ambient representative of the k-th quotient basis vector."""
        return dict(self.num.basis[self.free[k]])

    def project(self, vec: Dict[int, object]) -> Dict[int, object]:
        """Quotient coordinates of an ambient vector lying in num."""
        return self.q.apply(self.num.coords(vec))


def _connect(src: SubQuotient, tgt: SubQuotient, op: Matrix) -> Matrix:
    """The map src -> tgt induced by op on representatives."""
    entries = []
    for c in range(src.dim):
        w = op.apply(src.rep(c))
        for r, v in tgt.project(w).items():
            entries.append((r, c, v))
    return Matrix.from_entries(op.field, tgt.dim, src.dim, entries)


def _image_of(d: Matrix, S: Subspace) -> Subspace:
    """d(S) as a subspace of the target of d."""
    return Subspace(S.field, d.rows, [d.apply(v) for v in S.basis])


def _span_blocks(field, ambient, ranges):
    """Coordinate subspace spanned by unit vectors in the given (off, dim) ranges."""
    one = field.one()
    idx = sorted(x for off, n in ranges for x in range(off, off + n))
    return Subspace(field, ambient, [{x: one} for x in idx], _canonical=True)


class FilteredComplex:
    def __init__(self, base: ChainComplex, steps, j_min: int, j_max: int,
                 exhaustive: bool = True, separated: bool = True,
                 check: bool = False):
        self.base = base
        self.steps = steps
        self.j_min = j_min
        self.j_max = j_max
        self.exhaustive = exhaustive
        self.separated = separated
        if check:
            msgs = self.verify()
            if msgs:
                raise ValueError(msgs[0])

    def levels(self):
        return list(range(self.j_min, self.j_max + 1))

    def step(self, j: int, i: int) -> Subspace:
        F = self.base.field
        amb = self.base.dim(i)
        if amb == 0:
            return Subspace.zero_space(F, 0)
        if j < self.j_min:
            if self.exhaustive:
                return Subspace.full(F, amb)
            j = self.j_min
        elif j > self.j_max:
            if self.separated:
                return Subspace.zero_space(F, amb)
            j = self.j_max
        return self.steps[(j, i)]

    def verify(self):
        """Nesting and d-stability of every stored step; [] when clean."""
        msgs = []
        C = self.base
        for i in sorted(C.dims):
            for j in range(self.j_min, self.j_max + 1):
                if (j, i) not in self.steps:
                    msgs.append("missing step (%d, %d)" % (j, i))
                    continue
                if j < self.j_max and not self.step(j, i).contains(self.step(j + 1, i)):
                    msgs.append("F^%d not inside F^%d in degree %d" % (j + 1, j, i))
                d = C.diff(i)
                below = self.step(j, i - 1)
                for v in self.step(j, i).basis:
                    if not below.contains_vec(d.apply(v)):
                        msgs.append("F^%d not d-stable at degree %d" % (j, i))
                        break
        return msgs

    # -- derived complexes --------------------------------------------

    def gr_pieces(self, j: int) -> Dict[int, SubQuotient]:
        return {i: SubQuotient(self.step(j, i), self.step(j + 1, i))
                for i in self.base.dims}

    def gr(self, j: int) -> ChainComplex:
        """Associated graded piece F^j/F^{j+1} with the induced differential."""
        C = self.base
        pieces = self.gr_pieces(j)
        dims = {i: pc.dim for i, pc in pieces.items() if pc.dim}
        d = {}
        for i in dims:
            if pieces.get(i - 1) is None or not pieces[i - 1].dim:
                continue
            m = _connect(pieces[i], pieces[i - 1], C.diff(i))
            if not m.is_zero():
                d[i] = m
        return ChainComplex(C.field, dims or {0: 0}, d,
                            true_lo=C.true_lo, true_hi=C.true_hi,
                            data_lo=C.data_lo, data_hi=C.data_hi, check=False)

    def sub_complex(self, j: int) -> ChainComplex:
        """F^j itself as a complex in the coordinates of its canonical basis."""
        C = self.base
        subs = {i: self.step(j, i) for i in C.dims}
        dims = {i: s.dim for i, s in subs.items() if s.dim}
        d = {}
        for i in dims:
            if (i - 1) not in dims:
                continue
            entries = []
            for c, bv in enumerate(subs[i].basis):
                for r, v in subs[i - 1].coords(C.diff(i).apply(bv)).items():
                    entries.append((r, c, v))
            m = Matrix.from_entries(C.field, dims[i - 1], dims[i], entries)
            if not m.is_zero():
                d[i] = m
        return ChainComplex(C.field, dims or {0: 0}, d,
                            true_lo=C.true_lo, true_hi=C.true_hi,
                            data_lo=C.data_lo, data_hi=C.data_hi, check=False)

    def quotient_pieces(self, j: int) -> Dict[int, SubQuotient]:
        C = self.base
        return {i: SubQuotient(Subspace.full(C.field, C.dim(i)), self.step(j, i))
                for i in C.dims}

    def quotient_complex(self, j: int) -> ChainComplex:
        """base / F^j with the induced differential."""
        C = self.base
        pieces = self.quotient_pieces(j)
        dims = {i: pc.dim for i, pc in pieces.items() if pc.dim}
        d = {}
        for i in dims:
            if pieces.get(i - 1) is None or not pieces[i - 1].dim:
                continue
            m = _connect(pieces[i], pieces[i - 1], C.diff(i))
            if not m.is_zero():
                d[i] = m
        return ChainComplex(C.field, dims or {0: 0}, d,
                            true_lo=C.true_lo, true_hi=C.true_hi,
                            data_lo=C.data_lo, data_hi=C.data_hi, check=False)


# ---------------------------------------------------------------------------
# basic constructions


def stupid(C: ChainComplex) -> FilteredComplex:
    """F^j C_i = C_i when i + j <= 0, zero otherwise."""
    F = C.field
    if not C.dims:
        return FilteredComplex(C, {}, 0, 0)
    j_min = -max(C.dims)
    j_max = 1 - min(C.dims)
    steps = {}
    for i in C.dims:
        for j in range(j_min, j_max + 1):
            if i + j <= 0:
                steps[(j, i)] = Subspace.full(F, C.dim(i))
            else:
                steps[(j, i)] = Subspace.zero_space(F, C.dim(i))
    return FilteredComplex(C, steps, j_min, j_max)


def rescale(FC: FilteredComplex, n: int) -> FilteredComplex:
    """F^j of the result is F^{jn} of the input."""
    if n < 1:
        raise ValueError("rescaling index must be >= 1")
    j_min = -((-FC.j_min) // n)  # ceil for the lower end
    j_max = -((-FC.j_max) // n)
    if j_max < j_min:
        j_max = j_min
    steps = {(j, i): FC.step(j * n, i)
             for i in FC.base.dims for j in range(j_min, j_max + 1)}
    return FilteredComplex(FC.base, steps, j_min, j_max,
                           FC.exhaustive, FC.separated)


def shiftF(FC: FilteredComplex, n: int) -> FilteredComplex:
    """F^j of the result is F^{j+n} of the input."""
    steps = {(j - n, i): sp for (j, i), sp in FC.steps.items()}
    return FilteredComplex(FC.base, steps, FC.j_min - n, FC.j_max - n,
                           FC.exhaustive, FC.separated)


# ---------------------------------------------------------------------------
# filtered truncations


def _induced_on_sub(FC, subs, base2):
    F = FC.base.field
    steps = {}
    for i in base2.dims:
        amb = subs[i]
        for j in range(FC.j_min, FC.j_max + 1):
            cut = FC.step(j, i).intersect(amb)
            steps[(j, i)] = Subspace(F, amb.dim, [amb.coords(v) for v in cut.basis])
    return steps


def _trunc_geq(FC: FilteredComplex, n: int) -> FilteredComplex:
    C = FC.base
    F = C.field
    subs = {}
    for i in C.dims:
        below = FC.step(n + 1 - i, i - 1)
        subs[i] = below.preimage(C.diff(i)).intersect(FC.step(n - i, i))
    dims = {i: s.dim for i, s in subs.items() if s.dim}
    d = {}
    for i in dims:
        if (i - 1) not in dims:
            continue
        entries = []
        for c, bv in enumerate(subs[i].basis):
            for r, v in subs[i - 1].coords(C.diff(i).apply(bv)).items():
                entries.append((r, c, v))
        m = Matrix.from_entries(F, dims[i - 1], dims[i], entries)
        if not m.is_zero():
            d[i] = m
    base2 = ChainComplex(F, dims or {0: 0}, d,
                         true_lo=C.true_lo, true_hi=C.true_hi,
                         data_lo=C.data_lo + 1, data_hi=C.data_hi, check=False)
    steps = _induced_on_sub(FC, subs, base2)
    out = FilteredComplex(base2, steps, FC.j_min, FC.j_max,
                          FC.exhaustive, FC.separated)
    out.from_subs = subs
    return out


def _trunc_leq(FC: FilteredComplex, n: int) -> FilteredComplex:
    C = FC.base
    F = C.field
    pieces = {}
    for i in C.dims:
        den = FC.step(n + 1 - i, i).sum(
            _image_of(C.diff(i + 1), FC.step(n - i, i + 1)))
        pieces[i] = SubQuotient(Subspace.full(F, C.dim(i)), den)
    dims = {i: pc.dim for i, pc in pieces.items() if pc.dim}
    d = {}
    for i in dims:
        if pieces.get(i - 1) is None or not pieces[i - 1].dim:
            continue
        m = _connect(pieces[i], pieces[i - 1], C.diff(i))
        if not m.is_zero():
            d[i] = m
    base2 = ChainComplex(F, dims or {0: 0}, d,
                         true_lo=C.true_lo, true_hi=C.true_hi,
                         data_lo=C.data_lo, data_hi=C.data_hi - 1, check=False)
    steps = {}
    for i in base2.dims:
        pc = pieces[i]
        for j in range(FC.j_min, FC.j_max + 1):
            steps[(j, i)] = Subspace(F, pc.dim,
                                     [pc.project(v) for v in FC.step(j, i).basis])
    out = FilteredComplex(base2, steps, FC.j_min, FC.j_max,
                          FC.exhaustive, FC.separated)
    out.from_pieces = pieces
    return out


def truncF(FC: FilteredComplex, lo: Optional[int] = None,
           hi: Optional[int] = None) -> FilteredComplex:
    """Filtered truncation: lo gives >= lo, hi gives <= hi, both the interval.

    The interval form applies the quotient truncation first, matching the
    composite definition of the two one-sided functors.
    """
    out = FC
    if hi is not None:
        out = _trunc_leq(out, hi)
    if lo is not None:
        out = _trunc_geq(out, lo)
    return out


def tau_step(FC: FilteredComplex, n: int, i: int) -> Subspace:
    """Degree-i part of the truncation-by-n subcomplex of the base."""
    d = FC.base.diff(i)
    return FC.step(n + 1 - i, i - 1).preimage(d).intersect(FC.step(n - i, i))


def tau_filtration(FC: FilteredComplex, n_lo: int, n_hi: int) -> FilteredComplex:
    """The filtration of the base by its filtered truncations from below."""
    steps = {(n, i): tau_step(FC, n, i)
             for i in FC.base.dims for n in range(n_lo, n_hi + 1)}
    return FilteredComplex(FC.base, steps, n_lo, n_hi)


# ---------------------------------------------------------------------------
# standard filtration on cyclic-summand complexes and their expansions


def standard_filtration(source) -> FilteredComplex:
    """Block filtration by summand weight n + k on a complex with (n, k) slots.

    A summand of simplicial size n and internal degree k enters F^j exactly
    when j + n + k <= 0, which is the termwise filtration of each column by
    its own degree transported through the totalization.
    """
    C = source.complex if hasattr(source, "complex") else source
    if C.slots is None:
        raise ValueError("per-summand bookkeeping absent")
    F = C.field
    weights = [n + k for lst in C.slots.values() for (n, k), dim in lst if dim]
    if not weights:
        return FilteredComplex(C, {}, 0, 0)
    j_min = -max(weights)
    j_max = 1 - min(weights)
    steps = {}
    for i in C.dims:
        blocks = []
        off = 0
        for (n, k), dim in C.slots[i]:
            blocks.append((n + k, off, dim))
            off += dim
        for j in range(j_min, j_max + 1):
            keep = [(o, dm) for w, o, dm in blocks if w + j <= 0]
            steps[(j, i)] = _span_blocks(F, C.dim(i), keep)
    return FilteredComplex(C, steps, j_min, j_max)


def standard_on_expansion(E: ChainComplex, inner: ChainComplex) -> FilteredComplex:
    """The same weight filtration carried through a formal-variable expansion.

    E must be an expansion whose slot (j_u, k) blocks are whole degrees of
    `inner`, and inner must carry (n, k) slot bookkeeping where k is the
    circle-complex direction of a cyclic input concentrated in internal
    degree zero.  Only the simplicial size n carries weight; the formal
    variable and the circle direction are weightless, which makes u B and
    the internal differential weight-preserving and the face differential
    weight-lowering, so every step is a subcomplex and multiplication by u
    is a filtered isomorphism.
    """
    if E.slots is None or inner.slots is None or not hasattr(E, "u_slots"):
        raise ValueError("per-summand bookkeeping absent")
    F = E.field
    weights = [n
               for i in E.dims for (ju, kc), dim in E.slots[i] if dim
               for (n, k), bdim in inner.slots.get(kc, []) if bdim]
    if not weights:
        return FilteredComplex(E, {}, 0, 0)
    j_min = -max(weights)
    j_max = 1 - min(weights)
    steps = {}
    for i in E.dims:
        blocks = []
        off = 0
        for (ju, k), dim in E.slots[i]:
            for (n, kk), bdim in inner.slots.get(k, []):
                blocks.append((n, off, bdim))
                off += bdim
        for j in range(j_min, j_max + 1):
            keep = [(o, dm) for w, o, dm in blocks if w + j <= 0]
            steps[(j, i)] = _span_blocks(F, E.dim(i), keep)
    return FilteredComplex(E, steps, j_min, j_max)


# ---------------------------------------------------------------------------
# conjugate filtration


def conjugate_filtration(FC: FilteredComplex, p: int,
                         local: bool = False) -> FilteredComplex:
    """V^n = truncation from below of the p-rescaled input at 2n-1 (or 2n).

    The global flavor uses the odd offset, the local one the even offset.
    The level window is found by scanning until the levels saturate: below
    it every V^n is the whole complex, above it zero.
    """
    R = rescale(FC, p)
    off = 0 if local else -1
    C = FC.base
    if not C.dims:
        return FilteredComplex(C, {}, 0, 0)

    def level(n):
        m = 2 * n + off
        return {i: tau_step(R, m, i) for i in C.dims}

    def is_full(lv):
        return all(lv[i].dim == C.dim(i) for i in C.dims)

    def is_zero(lv):
        return all(lv[i].dim == 0 for i in C.dims)

    span = max(C.dims) - min(C.dims) + (R.j_max - R.j_min) + 4
    levels = {0: level(0)}
    n_hi = 0
    while not is_zero(levels[n_hi]):
        n_hi += 1
        levels[n_hi] = level(n_hi)
        if n_hi > span:
            raise ValueError("conjugate filtration does not separate")
    n_lo = 0
    while not is_full(levels[n_lo]):
        n_lo -= 1
        levels[n_lo] = level(n_lo)
        if n_lo < -span:
            raise ValueError("conjugate filtration does not exhaust")
    # keep exactly the levels strictly between the saturated ends
    j_min, j_max = n_lo + 1, n_hi - 1
    if j_max < j_min:
        j_min = j_max = n_lo + 1
        levels[j_min] = level(j_min)
    steps = {(n, i): levels[n][i]
             for n in range(j_min, j_max + 1) for i in C.dims}
    return FilteredComplex(C, steps, j_min, j_max)


def conjugate_filtration_local(FC: FilteredComplex, p: int) -> FilteredComplex:
    return conjugate_filtration(FC, p, local=True)


# ---------------------------------------------------------------------------
# completion by stabilization, commensurability, graded quasiisomorphisms


def _homology_map_rank(Cs: ChainComplex, Ct: ChainComplex, mat: Matrix, i: int) -> int:
    """Rank of the map induced on degree-i homology by a chain map component."""
    dim, reps = Cs.homology(i)
    if dim == 0 or Ct.dim(i) == 0:
        return 0
    entries = [(r, c, v) for c, vec in enumerate(reps)
               for r, v in mat.apply(vec).items()]
    R = Matrix.from_entries(Cs.field, Ct.dim(i), dim, entries)
    din = Ct.diff(i + 1)
    return R.hstack(din).rank() - din.rank()


def complete_stabilize(FC: FilteredComplex, window: Tuple[int, int],
                       M_max: int):
    """Homology of base/F^M for growing M with per-degree stabilization.

    A degree stabilizes once two consecutive depths agree and the induced
    map on their homology has full rank (hence is an isomorphism).
    """
    lo, hi = window
    C = FC.base
    ident = {i: Matrix.identity(C.field, C.dim(i)) for i in C.dims}
    out = {i: {"dim": None, "stabilized": False, "depth": None}
           for i in range(lo, hi + 1)}
    # iso[i] collects, per consecutive depth pair, whether the projection
    # from the deeper quotient is an isomorphism on homology
    iso = {i: [] for i in range(lo, hi + 1)}
    prev = None
    for M in range(FC.j_min, M_max + 1):
        pieces = FC.quotient_pieces(M)
        Q = FC.quotient_complex(M)
        if prev is not None:
            pieces0, Q0 = prev
            for i in range(lo, hi + 1):
                if not (Q0.trusted(i) and Q.trusted(i)):
                    iso[i].append(None)
                    continue
                h0 = Q0.homology_dim(i)
                h1 = Q.homology_dim(i)
                out[i]["dim"] = h1
                if h0 != h1:
                    iso[i].append(False)
                elif i not in C.dims:
                    iso[i].append(True)
                else:
                    proj = _connect(pieces[i], pieces0[i], ident[i])
                    iso[i].append(_homology_map_rank(Q, Q0, proj, i) == h1)
        prev = (pieces, Q)
    # stabilized means the deep end of the tower is a run of isomorphisms
    for i in range(lo, hi + 1):
        run = 0
        for flag in reversed(iso[i]):
            if flag is not True:
                break
            run += 1
        if run >= 1 and iso[i] and iso[i][-1] is True:
            out[i]["stabilized"] = True
            out[i]["depth"] = M_max - run
    return out


def commensurable(F1: FilteredComplex, F2: FilteredComplex,
                  degrees=None, levels=None):
    """Two-sided sandwich witnesses (j1 <= j <= j2) per degree and level.

    Returns (ok, witnesses) with witnesses[(i, j)] = (j1a, j2a, j1b, j2b)
    for the two containment chains, or None where the search failed.
    """
    if F1.base is not F2.base and F1.base.dims != F2.base.dims:
        raise ValueError("filtrations live on different complexes")
    if degrees is None:
        degrees = sorted(F1.base.dims)
    if levels is None:
        levels = range(min(F1.j_min, F2.j_min), max(F1.j_max, F2.j_max) + 1)
    lo_s = min(F1.j_min, F2.j_min) - 1
    hi_s = max(F1.j_max, F2.j_max) + 1

    def up(A, ja, B, i):
        # smallest t >= ja with B^t inside A^ja
        target = A.step(ja, i)
        for t in range(ja, hi_s + 1):
            if target.contains(B.step(t, i)):
                return t
        return None

    def down(A, ja, B, i):
        # largest t <= ja with A^ja inside B^t
        src = A.step(ja, i)
        for t in range(ja, lo_s - 1, -1):
            if B.step(t, i).contains(src):
                return t
        return None

    ok = True
    witnesses = {}
    for i in degrees:
        for j in levels:
            j2a = up(F1, j, F2, i)
            j1a = down(F1, j, F2, i)
            j2b = up(F2, j, F1, i)
            j1b = down(F2, j, F1, i)
            witnesses[(i, j)] = (j1a, j2a, j1b, j2b)
            if None in (j1a, j2a, j1b, j2b):
                ok = False
    return ok, witnesses


def filtered_qiso(f: ChainMap, FS: FilteredComplex, FT: FilteredComplex) -> bool:
    """True when the induced map on every stored graded piece is a
    quasiisomorphism (tested through cone acyclicity on trusted degrees)."""
    if f.source is not FS.base or f.target is not FT.base:
        raise ValueError("map does not match the filtered complexes")
    for j in range(min(FS.j_min, FT.j_min), max(FS.j_max, FT.j_max) + 1):
        ps = FS.gr_pieces(j)
        pt = FT.gr_pieces(j)
        gs = FS.gr(j)
        gt = FT.gr(j)
        maps = {}
        for i in gs.dims:
            entries = []
            for c in range(ps[i].dim):
                w = f.component(i).apply(ps[i].rep(c))
                if not FT.step(j, i).contains_vec(w):
                    raise ValueError("map does not respect the filtration "
                                     "at level %d, degree %d" % (j, i))
                tgt = pt.get(i)
                if tgt is None or not tgt.dim:
                    continue
                for r, v in tgt.project(w).items():
                    entries.append((r, c, v))
            m = Matrix.from_entries(gs.field, gt.dim(i), gs.dim(i), entries)
            if not m.is_zero():
                maps[i] = m
        g = ChainMap(gs, gt, maps, check=False)
        degs = [i for i in range(min(gs.lo, gt.lo) - 1, max(gs.hi, gt.hi) + 2)]
        if not g.is_qiso(degs):
            return False
    return True
