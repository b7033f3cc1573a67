import pytest
from hypothesis import given, settings, strategies as st

from cychom.exactlin import Field, Matrix
from cychom.complexes import ChainComplex, ChainMap, expand
from cychom.cyclic import build_ch, CcResult
from cychom.algebra import ground, dual_numbers, anat
from cychom.filtration import (stupid, rescale, shiftF, truncF, tau_filtration,
                               standard_filtration, standard_on_expansion,
                               conjugate_filtration, conjugate_filtration_local,
                               complete_stabilize, commensurable, filtered_qiso)

F3 = Field(3)
F5 = Field(5)


def two_term(F, rows, cols, entries):
    m = Matrix.from_entries(F, rows, cols, entries)
    return ChainComplex(F, {0: rows, 1: cols}, {1: m} if not m.is_zero() else {})


def ccK_filtered(A, N):
    """Standard filtration on cc of the circle-tensored cyclic object: the
    two slot indices give a genuinely mixed multi-step filtration."""
    bch = build_ch(anat(A, N), check=False)
    return bch, standard_filtration(bch.ccK)


def periodic_filtered(A, N, lo, hi):
    """Windowed two-periodic expansion with the weight filtration.

    expand leaves the trust window of an unbounded expansion empty, so the
    honest data window for the requested range is re-declared by hand after
    building two spare degrees on each side.
    """
    bch = build_ch(anat(A, N), check=False)
    cp0 = expand(bch.mixed, "per", (lo - 2, hi + 2))
    cp = ChainComplex(cp0.field, cp0.dims, cp0.d, data_lo=lo - 1, data_hi=hi + 1,
                      slots=cp0.slots, check=False)
    cp.u_slots = cp0.u_slots
    return bch, standard_on_expansion(cp, bch.ccK.complex)


# -- basic constructions -------------------------------------------------------

def test_stupid_steps():
    C = two_term(F5, 2, 3, [(0, 0, 1), (1, 2, 1)])
    FC = stupid(C)
    assert FC.verify() == []
    assert FC.step(0, 0).dim == 2 and FC.step(1, 0).dim == 0
    assert FC.step(-1, 1).dim == 3 and FC.step(0, 1).dim == 0
    # outside the window: full below, zero above
    assert FC.step(-10, 1).dim == 3 and FC.step(10, 0).dim == 0


def test_rescale_picks_multiples():
    C = two_term(F5, 2, 3, [(0, 0, 1)])
    FC = stupid(C)
    R = rescale(FC, 3)
    for i in (0, 1):
        for j in range(R.j_min, R.j_max + 1):
            assert R.step(j, i).dim == FC.step(3 * j, i).dim


def test_rescale_rejects_zero():
    C = two_term(F5, 1, 1, [(0, 0, 1)])
    with pytest.raises(ValueError):
        rescale(stupid(C), 0)


def test_shift_inverts():
    C = two_term(F3, 2, 2, [(0, 1, 1)])
    FC = stupid(C)
    back = shiftF(shiftF(FC, 2), -2)
    for (j, i), sp in FC.steps.items():
        assert back.step(j, i).dim == sp.dim


@given(st.integers(1, 3), st.integers(1, 3),
       st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2),
                          st.integers(1, 2)), max_size=4))
@settings(max_examples=40, deadline=None)
def test_stupid_truncations_trivial(rows, cols, raw):
    # the filtered truncation from below of the one-step filtration:
    # everything at level <= 0, nothing at level >= 1
    entries = [(r, c, v) for r, c, v in raw if r < rows and c < cols]
    C = two_term(F3, rows, cols, entries)
    FC = stupid(C)
    whole = truncF(FC, lo=0)
    assert {i: d for i, d in whole.base.dims.items() if d} == \
        {i: d for i, d in C.dims.items() if d}
    assert truncF(FC, lo=1).base.is_zero()


# -- truncation and graded identities -------------------------------------------

def test_mixed_filtration_verifies():
    bch, fc = ccK_filtered(dual_numbers(F3), 5)
    assert fc.verify() == []
    assert (fc.j_min, fc.j_max) == (-6, 0)


def test_gr_commutes_with_truncation():
    # the graded piece of a truncation from below is the plain truncation
    # of the graded piece, with the cutoff shifted by the level
    bch, fc = ccK_filtered(dual_numbers(F3), 5)
    for n in (1, 2):
        T = truncF(fc, lo=n)
        for j in fc.levels():
            lhs = T.gr(j)
            rhs = fc.gr(j)
            for i in range(0, 5):
                if lhs.trusted(i) and rhs.trusted(i):
                    want = rhs.homology_dim(i) if i >= n - j else 0
                    assert lhs.homology_dim(i) == want, (n, j, i)


def test_trunc_interval_window():
    bch, fc = ccK_filtered(dual_numbers(F3), 5)
    I = truncF(fc, lo=0, hi=0)
    # the interval truncation narrows the trusted window on both sides
    assert I.base.data_lo == fc.base.data_lo + 1
    assert I.base.data_hi == fc.base.data_hi - 1


def test_tau_filtration_commensurable():
    bch, fc = ccK_filtered(dual_numbers(F3), 5)
    T = tau_filtration(fc, -8, 8)
    ok, wit = commensurable(T, fc, degrees=range(0, 4))
    assert ok
    for key, (j1a, j2a, j1b, j2b) in wit.items():
        assert j1a <= key[1] <= j2a and j1b <= key[1] <= j2b


def test_tau_graded_matches_interval_truncation():
    # gr of the truncation filtration computes the same homology as the
    # interval truncation at that level (they are quasiisomorphic, not equal)
    bch, fc = ccK_filtered(dual_numbers(F3), 5)
    T = tau_filtration(fc, -8, 8)
    seen_nonzero = False
    for lev in range(-3, 4):
        g = T.gr(lev)
        I = truncF(fc, lo=lev, hi=lev).base
        for i in range(0, 5):
            if g.trusted(i) and I.trusted(i):
                assert g.homology_dim(i) == I.homology_dim(i), (lev, i)
                seen_nonzero = seen_nonzero or g.homology_dim(i) > 0
    assert seen_nonzero


def test_shift_and_rescale_commensurable():
    bch, fc = ccK_filtered(dual_numbers(F3), 4)
    ok, _ = commensurable(shiftF(fc, 1), fc, degrees=range(0, 3))
    assert ok
    ok, _ = commensurable(rescale(fc, 2), fc, degrees=range(0, 3))
    assert ok


# -- the standard filtration ----------------------------------------------------

def test_standard_staircase_ground():
    # cc of the point over F5 has a line in each even degree, placed at
    # weight i + 1, so each graded level carries exactly one of them
    res = CcResult(anat(ground(F5), 6), check=False)
    fcs = standard_filtration(res)
    assert fcs.verify() == []
    for i in (0, 2, 4):
        assert fcs.gr_pieces(-(i + 1))[i].dim == 1
        assert sum(fcs.gr_pieces(j)[i].dim for j in fcs.levels()) == 1


def test_standard_requires_slots():
    C = two_term(F5, 1, 1, [])
    with pytest.raises(ValueError):
        standard_filtration(C)


def test_standard_on_expansion_verifies():
    bch, FC = periodic_filtered(ground(F3), 8, -4, 4)
    assert FC.verify() == []


def test_complete_stabilize_periodic_ground():
    # depth quotients of the two-periodic expansion of the point over F5:
    # every degree in the window settles to a line once the filtration is
    # exhausted, and the detector reports the settling depth
    bch, FC = periodic_filtered(ground(F5), 8, -4, 4)
    res = complete_stabilize(FC, (-4, 4), 0)
    for i in range(-4, 5):
        assert res[i]["stabilized"], i
        assert res[i]["dim"] == 1
        assert res[i]["depth"] == -4


# -- the conjugate filtration ----------------------------------------------------

def conj_setup():
    bch, FC = periodic_filtered(ground(F3), 10, -6, 6)
    return FC, conjugate_filtration(FC, 3)


def test_conjugate_verifies_and_saturates():
    FC, V = conj_setup()
    assert V.verify() == []
    assert (V.j_min, V.j_max) == (-5, 4)
    C = V.base
    i0 = min(C.dims)
    assert V.step(V.j_min - 1, i0).dim == C.dim(i0)
    assert V.step(V.j_max + 1, i0).dim == 0


def test_conjugate_two_periodicity():
    # multiplication by the formal variable is a filtered isomorphism, so
    # the level-n step in degree i matches the level-0 step in degree i - 2n
    FC, V = conj_setup()
    C = V.base
    for n in (-1, 1):
        for i in range(0, 7):
            assert V.step(n, i).dim == V.step(0, i - 2 * n).dim, (n, i)


def test_conjugate_graded_homology_ground():
    # each graded piece carries a single homology line on the diagonal,
    # within the degrees the simplicial window resolves faithfully
    FC, V = conj_setup()
    g0 = V.gr(0)
    assert g0.homology_dim(0) == 1
    assert g0.homology_dim(1) == 0
    g1 = V.gr(1)
    assert g1.homology_dim(2) == 1
    assert g1.homology_dim(3) == 0


def test_conjugate_local_offset():
    # the local flavor truncates at 2n instead of 2n - 1: its level 0 no
    # longer contains the degree-0 cycles that the global one keeps
    bch, FC = periodic_filtered(ground(F3), 8, -4, 4)
    Vg = conjugate_filtration(FC, 3)
    Vl = conjugate_filtration_local(FC, 3)
    assert Vl.step(0, 0).dim < Vg.step(0, 0).dim
    assert Vl.verify() == []


def test_conjugate_commensurable_with_rescaled_standard():
    FC, V = conj_setup()
    R = rescale(FC, 3)
    ok, _ = commensurable(V, R, degrees=range(0, 4))
    assert ok


# -- filtered quasiisomorphisms ---------------------------------------------------

def test_filtered_qiso_identity():
    bch, fc = ccK_filtered(dual_numbers(F3), 4)
    C = fc.base
    ident = ChainMap(C, C, {i: Matrix.identity(F3, C.dim(i)) for i in C.dims},
                     check=False)
    assert filtered_qiso(ident, fc, fc)
    zero = ChainMap(C, C, {}, check=False)
    assert not filtered_qiso(zero, fc, fc)


def test_filtered_qiso_rejects_level_drop():
    bch, fc = ccK_filtered(dual_numbers(F3), 4)
    C = fc.base
    ident = ChainMap(C, C, {i: Matrix.identity(F3, C.dim(i)) for i in C.dims},
                     check=False)
    sh = shiftF(fc, -1)
    with pytest.raises(ValueError):
        filtered_qiso(ident, sh, fc)
