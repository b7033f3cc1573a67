import random

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cychom.exactlin import Field, Matrix, Subspace, QQ, rref_rows

F5 = Field(5)
F3 = Field(3)


def test_field_basics():
    assert F5.inv(2) == 3
    assert F5.add(3, 4) == 2
    assert QQ.inv(Fraction(2, 3)) == Fraction(3, 2)
    with pytest.raises(ZeroDivisionError):
        F3.inv(0)
    with pytest.raises(ValueError):
        Field(4)


def test_rank_examples():
    # [[1,2],[2,4]] over F5 -> 1
    assert Matrix.from_rows(F5, [[1, 2], [2, 4]]).rank() == 1
    # zero 3x3 over Q -> 0
    assert Matrix.zero(QQ, 3, 3).rank() == 0
    # [[1,1],[1,4]] over F5 -> 2
    assert Matrix.from_rows(F5, [[1, 1], [1, 4]]).rank() == 2


def test_kernel_examples():
    assert Matrix.identity(F3, 2).kernel().dim == 0
    assert Matrix.zero(F3, 2, 3).kernel().dim == 3
    k = Matrix.from_rows(QQ, [[1, 1], [2, 2]]).kernel()
    assert k.dim == 1
    assert k.contains_vec({0: Fraction(1), 1: Fraction(-1)})


def test_subspace_ops_examples():
    A = Subspace(F5, 2, [{0: 1}])
    B = Subspace(F5, 2, [{1: 1}])
    assert A.intersect(B).dim == 0
    assert A.sum(B).dim == 2
    d = Matrix.from_rows(F5, [[1, 0], [0, 0]])
    assert A.preimage(d).dim == 2
    q = Subspace(QQ, 3, [{0: Fraction(1), 1: Fraction(1), 2: Fraction(1)}]).quotient_map()
    assert q.rows == 2 and q.image().dim == 2


def test_matrix_algebra():
    a = Matrix.from_rows(F5, [[1, 2], [3, 4]])
    b = Matrix.from_rows(F5, [[0, 1], [1, 0]])
    assert a.mul(b) == Matrix.from_rows(F5, [[2, 1], [4, 3]])
    assert a.add(a.neg()).is_zero()
    assert a.transpose().transpose() == a
    assert a.kron(b).rows == 4 and a.kron(b).rank() == 4
    assert a.direct_sum(b).rank() == 4
    assert a.apply({0: 1, 1: 1}) == {0: 3, 1: 2}


def _random_rows(rng, nrows, ncols, p):
    return [{c: rng.randrange(1, p) for c in range(ncols) if rng.random() < 0.4}
            for _ in range(nrows)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_rank_nullity(seed):
    rng = random.Random(seed)
    m, n = rng.randrange(1, 7), rng.randrange(1, 7)
    M = Matrix(F3, m, n, {i: r for i, r in enumerate(_random_rows(rng, m, n, 3)) if r})
    assert M.rank() + M.kernel().dim == n
    # kernel vectors really are in the kernel
    for v in M.kernel().basis:
        assert not M.apply(v)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_rref_canonical(seed):
    rng = random.Random(seed)
    rows = _random_rows(rng, 5, 5, 5)
    shuffled = rows[:]
    rng.shuffle(shuffled)
    # also mix in a random combination of the originals
    comb = {}
    for r in rows[:2]:
        for c, v in r.items():
            comb[c] = (comb.get(c, 0) + 2 * v) % 5
    a = Subspace(F5, 5, rows + [comb])
    b = Subspace(F5, 5, shuffled)
    assert a == b
    # idempotence
    again = Subspace(F5, 5, a.basis)
    assert again == a


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_modular_law_and_preimage(seed):
    rng = random.Random(seed)
    A = Subspace(F3, 5, _random_rows(rng, 2, 5, 3))
    B = Subspace(F3, 5, _random_rows(rng, 2, 5, 3))
    s, i = A.sum(B), A.intersect(B)
    assert s.dim == A.dim + B.dim - i.dim
    assert s.contains(A) and A.contains(i)
    d = Matrix(F3, 5, 4, {i2: r for i2, r in enumerate(_random_rows(rng, 5, 4, 3)) if r})
    pre = A.preimage(d)
    for v in pre.basis:
        assert A.contains_vec(d.apply(v))
    # preimage is the biggest such subspace: dim = dim ker + dim(im(d) cap A) by rank count
    assert pre.dim >= d.kernel().dim


def test_dense_sparse_agree():
    rng = random.Random(7)
    for _ in range(10):
        rows = _random_rows(rng, 30, 40, 5)
        M = Matrix(F5, 30, 40, {i: r for i, r in enumerate(rows) if r})
        from cychom.exactlin import sparse_rank_modp, _dense_rank_modp
        assert sparse_rank_modp(rows, 40, 5) == _dense_rank_modp(rows, 40, 5) == len(rref_rows(rows, F5)[1])


def test_coords_roundtrip():
    s = Subspace(F5, 4, [{0: 1, 2: 3}, {1: 1, 3: 2}])
    v = {0: 2, 2: 1, 1: 4, 3: 3}
    c = s.coords(v)
    rebuilt = {}
    for j, coef in c.items():
        for cc, w in s.basis[j].items():
            rebuilt[cc] = (rebuilt.get(cc, 0) + coef * w) % 5
    rebuilt = {k: x for k, x in rebuilt.items() if x}
    assert rebuilt == v
    with pytest.raises(ValueError):
        s.coords({0: 1, 1: 1, 2: 1})
