from itertools import product as iproduct

import pytest

from cychom.exactlin import Field, Matrix, QQ
from cychom.cyclic import build_ch, edgewise
from cychom.algebra import (FinDimAlgebra, ground, product_field,
                            matrix_algebra, dual_numbers, dg_two_term, anat,
                            hochschild_cohomology_dims, frobenius_twist,
                            tensor_power_equivariant)

F3 = Field(3)
F5 = Field(5)


# -- an independent Hochschild homology oracle --------------------------------
# the cyclic bar complex C_n = A tensor ... tensor A (n+1 factors) with the
# usual alternating-face differential, built from the raw structure constants
# with none of the package's cyclic machinery

def bar_hh_dims(A, n_max):
    F = A.field
    dim = len(A.names)

    def basis(n):
        return list(iproduct(range(dim), repeat=n + 1))

    def b_matrix(n):
        src = basis(n)
        tgt = basis(n - 1)
        pos = {t: i for i, t in enumerate(tgt)}
        entries = []
        for c, t in enumerate(src):
            for i in range(n + 1):
                if i < n:
                    pair = A.mul.get((t[i], t[i + 1]), {})
                    rest = t[:i] + t[i + 2:]
                    ins = i
                else:
                    pair = A.mul.get((t[n], t[0]), {})
                    rest = t[1:n]
                    ins = 0
                sgn = F.coerce((-1) ** i)
                for g, coef in pair.items():
                    out = rest[:ins] + (g,) + rest[ins:]
                    entries.append((pos[out], c, F.mul(sgn, F.coerce(coef))))
        return Matrix.from_entries(F, len(tgt), len(src), entries)

    mats = {n: b_matrix(n) for n in range(1, n_max + 2)}
    dims = []
    for n in range(n_max + 1):
        full = dim ** (n + 1)
        r_out = mats[n].rank() if n >= 1 else 0
        dims.append(full - r_out - mats[n + 1].rank())
    return dims


ORACLE = {}


def oracle(key, A, n_max):
    if key not in ORACLE:
        ORACLE[key] = bar_hh_dims(A, n_max)
    return ORACLE[key]


@pytest.mark.parametrize("key,make,expect", [
    ("f5", lambda: ground(F5), [1, 0, 0, 0, 0]),
    ("f5xf5", lambda: product_field(F5), [2, 0, 0, 0, 0]),
    ("m2f5", lambda: matrix_algebra(F5), [1, 0, 0, 0, 0]),
    ("f3eps", lambda: dual_numbers(F3), [2, 1, 1, 1, 1]),
    ("qeps", lambda: dual_numbers(QQ), [2, 1, 1, 1, 1]),
])
def test_bar_oracle_values(key, make, expect):
    assert oracle(key, make(), 4) == expect


@pytest.mark.parametrize("key,make", [
    ("f5", lambda: ground(F5)),
    ("f5xf5", lambda: product_field(F5)),
    ("m2f5", lambda: matrix_algebra(F5)),
    ("f3eps", lambda: dual_numbers(F3)),
    ("qeps", lambda: dual_numbers(QQ)),
])
def test_hh_matches_oracle(key, make):
    A = make()
    want = oracle(key, A, 4)
    bch = build_ch(anat(A, 7), check=False)
    C = bch.mixed.base
    for i in range(5):
        if C.trusted(i):
            assert C.homology_dim(i) == want[i], (key, i)


def test_hh0_is_commutator_quotient():
    for A in (product_field(F5), matrix_algebra(F3), dual_numbers(F3)):
        F = A.field
        dim = len(A.names)
        cols = []
        for a in range(dim):
            for b in range(dim):
                ab = A.mul.get((a, b), {})
                ba = A.mul.get((b, a), {})
                col = {}
                for g, c in ab.items():
                    col[g] = F.add(col.get(g, F.zero()), F.coerce(c))
                for g, c in ba.items():
                    col[g] = F.add(col.get(g, F.zero()), F.neg(F.coerce(c)))
                cols.append(col)
        comm = Matrix.from_entries(
            F, dim, len(cols),
            [(g, j, v) for j, col in enumerate(cols) for g, v in col.items()])
        bch = build_ch(anat(A, 5), check=False)
        assert bch.mixed.base.homology_dim(0) == dim - comm.rank()


# -- validation ----------------------------------------------------------------

def test_validate_builtins():
    for A in (ground(F3), product_field(F5), matrix_algebra(F5),
              dual_numbers(QQ), dg_two_term(F3)):
        assert A.validate() == []


def test_validate_broken_associativity():
    # x*x = y, x*y = e, y*x = 0: (xx)x = 0 but x(xx) = e
    A = FinDimAlgebra(F5, ["e", "x", "y"],
                      mul={(0, 0): {0: 1}, (0, 1): {1: 1}, (0, 2): {2: 1},
                           (1, 0): {1: 1}, (2, 0): {2: 1},
                           (1, 1): {2: 1}, (1, 2): {0: 1}},
                      unit={0: 1})
    msgs = A.validate()
    assert any("x x) x" in m or "(x x)" in m for m in msgs)


def test_validate_unit_law():
    A = FinDimAlgebra(F5, ["e"], mul={(0, 0): {0: 2}}, unit={0: 1})
    assert any("1 *" in m or "* 1" in m for m in A.validate())


def test_dg_leibniz_violation_detected():
    A = dg_two_term(F3)
    bad = FinDimAlgebra(F3, A.names, mul={(0, 0): {0: 1}, (0, 1): {1: 1},
                                          (1, 0): {1: 1}, (1, 1): {1: 1}},
                        unit={0: 1}, deg=[0, 1], diff={1: {0: 1}})
    assert any("Leibniz" in m or "degree" in m for m in bad.validate())


# -- cohomology ----------------------------------------------------------------

def test_hh_cohomology_ground():
    assert hochschild_cohomology_dims(ground(F5), 4) == {0: 1, 1: 0, 2: 0, 3: 0}


def test_hh_cohomology_dual():
    assert hochschild_cohomology_dims(dual_numbers(F3), 5) == {0: 2, 1: 1, 2: 1, 3: 1, 4: 1}


def test_hh_cohomology_matrix():
    assert hochschild_cohomology_dims(matrix_algebra(F5), 3) == {0: 1, 1: 0, 2: 0}


def test_reduced_ground_vanishes():
    red = hochschild_cohomology_dims(ground(F5), 5, reduced=True)
    assert red == {1: 0, 2: 0, 3: 0, 4: 0}


def test_reduced_les_rank_identity():
    # 0 -> HH^0 -> A -> red^1 -> HH^1 -> 0 and red^i = HH^i for i >= 2
    for A in (dual_numbers(F3), matrix_algebra(F3)):
        full = hochschild_cohomology_dims(A, 5)
        red = hochschild_cohomology_dims(A, 5, reduced=True)
        assert red[1] == len(A.names) - full[0] + full[1]
        assert all(red[i] == full[i] for i in range(2, 5))


# -- twist and tensor powers -----------------------------------------------------

def test_frobenius_twist_prime_field():
    A = matrix_algebra(F3)
    T = frobenius_twist(A)
    assert T.mul == A.mul and T.names == A.names
    assert frobenius_twist(T).mul == A.mul


def test_frobenius_twist_rejects_q():
    with pytest.raises(ValueError):
        frobenius_twist(ground(QQ))


def test_tensor_power_small():
    B, tau = tensor_power_equivariant(ground(F3), 3)
    assert len(B.names) == 1
    assert tau[0].entry(0, 0) == F3.one()


def test_tensor_power_matches_edgewise():
    A = dual_numbers(F3)
    B, tau = tensor_power_equivariant(A, 3)
    Ep = edgewise(anat(A, 6), 3)
    for k in sorted(Ep.obj[1].dims):
        t_edge = Ep.tau_mat(1, k)
        assert t_edge.rows == tau[k].rows
        assert (t_edge.add(tau[k].neg())).is_zero()
    assert len(B.names) == 8
    t = tau[0]
    t3 = t.mul(t).mul(t)
    assert all(t3.entry(i, i) == F3.one() for i in range(8))


def test_anat_faces_reproduce_multiplication():
    A = matrix_algebra(F3)
    E = anat(A, 4)
    m = E.face_mat(2, 0, 0)  # d_0 on A tensor A multiplies the two factors
    dim = len(A.names)
    for a in range(dim):
        for b in range(dim):
            col = a * dim + b
            want = A.mul.get((a, b), {})
            for g in range(dim):
                assert (m.entry(g, col) or 0) == F3.coerce(want.get(g, 0))


def test_dg_two_term_acyclic_hh():
    # d(x) = 1 makes the algebra contractible, so HH vanishes where trusted
    A = dg_two_term(F3)
    bch = build_ch(anat(A, 6), check=True)
    C = bch.mixed.base
    for i in C.trusted_degrees(0, 3):
        assert C.homology_dim(i) == 0
