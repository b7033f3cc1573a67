import random
from fractions import Fraction

import pytest

from cychom.exactlin import Field, Matrix, Subspace
from cychom.complexes import ChainComplex
from cychom.algebra import ground, product_field, dual_numbers, matrix_algebra
from cychom.filtration import FilteredComplex, stupid
from cychom.tate import complex_tensor_power, tate_complex
from cychom.spectral import (ss_from_filtered, degeneration_verdict,
                             u_adic_filtration, hdr_ss, conj_ss,
                             conj_local_e1, conj_hypothesis_check)

F3 = Field(3)
F5 = Field(5)
QQ = Field(0)


# -- helpers ---------------------------------------------------------------


def _invert(M):
    F = M.field
    nn = M.rows
    A = [[M.entry(r, c) for c in range(nn)] for r in range(nn)]
    I = [[F.one() if r == c else F.zero() for c in range(nn)]
         for r in range(nn)]
    for col in range(nn):
        piv = next(r for r in range(col, nn) if A[r][col] != F.zero())
        A[col], A[piv] = A[piv], A[col]
        I[col], I[piv] = I[piv], I[col]
        s = F.inv(A[col][col])
        A[col] = [F.mul(s, x) for x in A[col]]
        I[col] = [F.mul(s, x) for x in I[col]]
        for r in range(nn):
            if r != col and A[r][col] != F.zero():
                f = A[r][col]
                A[r] = [F.sub(x, F.mul(f, y)) for x, y in zip(A[r], A[col])]
                I[r] = [F.sub(x, F.mul(f, y)) for x, y in zip(I[r], I[col])]
    rows = {r: {c: I[r][c] for c in range(nn) if I[r][c] != F.zero()}
            for r in range(nn)}
    return Matrix(F, nn, nn, rows)


def random_complex(rng, F, maxdim=4, lo=0, hi=3):
    """A valid chain complex in a scrambled basis: a canonical square-zero
    differential (matched source/target pairs) conjugated by random
    invertible degreewise changes of basis."""
    dims = {i: rng.randrange(0, maxdim + 1) for i in range(lo, hi + 1)}
    pairing = {}
    used = set()
    for i in sorted(dims, reverse=True):
        if i - 1 not in dims:
            continue
        srcs = [k for k in range(dims[i]) if (i, k) not in used]
        tgts = list(range(dims[i - 1]))
        rng.shuffle(srcs)
        rng.shuffle(tgts)
        m = rng.randrange(0, min(len(srcs), len(tgts)) + 1)
        for t in range(m):
            pairing.setdefault(i, {})[srcs[t]] = tgts[t]
            used.add((i - 1, tgts[t]))

    def rand_inv(nn):
        while True:
            rows = {r: {c: F.coerce(v) for c in range(nn)
                        for v in [rng.randrange(1, 5)]
                        if rng.random() < 0.7}
                    for r in range(nn)}
            M = Matrix(F, nn, nn, rows)
            if M.rank() == nn:
                return M

    Q = {i: rand_inv(dims[i]) for i in dims if dims[i]}
    Qi = {i: _invert(Q[i]) for i in Q}
    diffs = {}
    for i in sorted(dims):
        if i - 1 not in dims or not dims[i] or not dims[i - 1]:
            continue
        rows = {}
        for src, tgt in pairing.get(i, {}).items():
            rows.setdefault(tgt, {})[src] = F.one()
        d0 = Matrix(F, dims[i - 1], dims[i], rows)
        diffs[i] = Q[i - 1].mul(d0).mul(Qi[i])
    return ChainComplex(F, dims, diffs, lo, hi, check=True)


def subspace_pages(FC, r_max, window):
    """Direct subspace computation of the pages: numerators and
    denominators built literally from cycle and boundary spaces.  Slower
    than the rank formulas the package uses, and independent of them."""
    C = FC.base
    F = C.field
    lo, hi = window
    s_lo, s_hi = FC.j_min - 1, FC.j_max
    r_inf = s_hi - s_lo + 2

    def step(j, i):
        if C.dim(i) == 0:
            return Subspace.zero_space(F, 0)
        return FC.step(max(min(j, s_hi + 1), s_lo), i)

    def Z(s, r, n):
        got = step(s, n)
        if got.dim and C.dim(n - 1):
            tgt = step(s + r, n - 1)
            if tgt.dim < C.dim(n - 1):
                got = got.intersect(tgt.preimage(C.diff(n)))
        return got

    def dimage(s, r, n):
        amb = C.dim(n)
        if amb == 0 or C.dim(n + 1) == 0:
            return Subspace.zero_space(F, amb)
        S = Z(s, r, n + 1)
        d = C.diff(n + 1)
        return Subspace(F, amb, [d.apply(v) for v in S.basis])

    pages, ranks, inf = {}, {}, {}
    for r in sorted(set(range(1, r_max + 1)) | {r_inf}):
        tab, rk = {}, {}
        for n in range(lo - 1, hi + 2):
            for s in range(s_lo, s_hi + 1):
                if C.dim(n) == 0:
                    continue
                num = Z(s, r, n)
                if not num.dim:
                    continue
                den = Z(s + 1, r - 1, n).sum(dimage(s - r + 1, r - 1, n))
                e = num.dim - den.dim
                if e:
                    tab[(s, n)] = e
                if C.dim(n - 1):
                    d = C.diff(n)
                    img = Subspace(F, C.dim(n - 1),
                                   [d.apply(v) for v in num.basis])
                    den_t = Z(s + r + 1, r - 1, n - 1).sum(
                        dimage(s + 1, r - 1, n - 1))
                    rr = img.sum(den_t).dim - den_t.dim
                    if rr:
                        rk[(s, n)] = rr
        if r <= r_max:
            pages[r] = tab
            ranks[r] = rk
        if r == r_inf:
            inf = tab
    return pages, ranks, inf


def bb_model_pages(window, r_max, k_hi=40):
    """Brute-force model for the dual numbers over Q: the two-column
    normalized chain groups with the explicit boundary and cycle
    operators, totalized two-periodically, filtered by the formal
    variable power, pages by dense elimination over Fractions.  Written
    against the textbook formulas only, independent of the package."""
    lo, hi = window

    def slots(n):
        return [((k - n) // 2, k) for k in range(0, k_hi + 1)
                if (k - n) % 2 == 0]

    def basis(n):
        out = []
        for (j, k) in slots(n):
            out.append((j, k, 0))
            out.append((j, k, 1))
        return out

    def diff(n):
        # on x tensor eps^k: boundary sends the unit line to
        # (1 + (-1)^k) eps tensor eps^(k-1) and kills the eps line;
        # the cycle operator sends eps tensor eps^k to
        # (k+1) 1 tensor eps^(k+1) for even k and to 0 otherwise
        src, tgt = basis(n), basis(n - 1)
        tidx = {v: i for i, v in enumerate(tgt)}
        rows = [[Fraction(0)] * len(src) for _ in range(len(tgt))]
        for ci, (j, k, x) in enumerate(src):
            if x == 0 and k >= 1 and (1 + (-1) ** k):
                t = (j, k - 1, 1)
                if t in tidx:
                    rows[tidx[t]][ci] += Fraction(1 + (-1) ** k)
            if x == 1 and k % 2 == 0:
                t = (j + 1, k + 1, 0)
                if t in tidx:
                    rows[tidx[t]][ci] += Fraction(k + 1)
        return rows, src, tgt

    def rank_dense(rows):
        if not rows or not rows[0]:
            return 0
        A = [r[:] for r in rows]
        m, nc = len(A), len(A[0])
        r = 0
        for c in range(nc):
            piv = next((i for i in range(r, m) if A[i][c]), None)
            if piv is None:
                continue
            A[r], A[piv] = A[piv], A[r]
            inv = Fraction(1) / A[r][c]
            A[r] = [v * inv for v in A[r]]
            for i in range(m):
                if i != r and A[i][c]:
                    f = A[i][c]
                    A[i] = [v - f * w for v, w in zip(A[i], A[r])]
            r += 1
        return r

    cache = {}

    def r_rank(a, b, n):
        key = (a, b, n)
        if key not in cache:
            rows, src, tgt = diff(n)
            keep_c = [i for i, (j, k, x) in enumerate(src) if j >= a]
            keep_r = [i for i, (j, k, x) in enumerate(tgt) if j < b]
            cache[key] = rank_dense([[rows[i][c] for c in keep_c]
                                     for i in keep_r])
        return cache[key]

    BIG = 10 ** 6

    def sdim(a, n):
        return sum(1 for (j, k, x) in basis(n) if j >= a)

    def zdim(a, t, n):
        return sdim(a, n) - r_rank(a, a + t, n)

    def bdim(a, t, n):
        return r_rank(a, BIG, n) - r_rank(a, a + t, n)

    pages, ranks = {}, {}
    for r in range(1, r_max + 1):
        tab, rk = {}, {}
        for n in range(lo, hi + 1):
            for (s, k) in slots(n):
                e = (zdim(s, r, n) - zdim(s + 1, r - 1, n)
                     - bdim(s - r + 1, r - 1, n + 1)
                     + bdim(s - r + 1, r, n + 1))
                if e:
                    tab[(s, n)] = e
                rr = (bdim(s, r, n) - bdim(s, r + 1, n)
                      - bdim(s + 1, r - 1, n) + bdim(s + 1, r, n))
                if rr:
                    rk[(s, n)] = rr
        pages[r], ranks[r] = tab, rk
    return pages, ranks


# the expected dual-numbers page dims are pinned by the model before the
# package pipeline is ever run on that algebra
_BB_PAGES, _BB_RANKS = bb_model_pages((-7, 7), 4)


# -- elementary filtered complexes -----------------------------------------


def test_point_two_step():
    C = ChainComplex(QQ, {0: 1}, {}, 0, 0)
    SS = ss_from_filtered(stupid(C), 3, (-1, 1))
    assert SS.pages[1] == {(0, 0): 1}
    assert SS.inf == {(0, 0): 1}
    assert all(not rk for rk in SS.ranks.values())
    assert degeneration_verdict(SS)["verdict"] == "degenerate"
    assert SS.accounting_errors() == []
    assert SS.mass_balance()[0] == (1, 1)


def test_cone_detects_differential():
    C = ChainComplex(QQ, {0: 1, 1: 1},
                     {1: Matrix.identity(QQ, 1)}, 0, 1)
    SS = ss_from_filtered(stupid(C), 3, (-1, 2))
    assert SS.pages[1] == {(0, 0): 1, (-1, 1): 1}
    assert SS.ranks[1] == {(-1, 1): 1}
    assert SS.pages[2] == {}
    assert SS.inf == {}
    v = degeneration_verdict(SS)
    assert v["verdict"] == "nondegenerate"
    assert v["witness"] == {"page": 1, "level": -1, "degree": 1, "rank": 1}
    assert SS.accounting_errors() == []


def test_untrusted_filtration_gives_no_verdict():
    C = ChainComplex(QQ, {0: 1, 1: 1}, {1: Matrix.identity(QQ, 1)}, 0, 1)
    FC = stupid(C)
    loose = FilteredComplex(C, FC.steps, FC.j_min, FC.j_max,
                            exhaustive=False)
    SS = ss_from_filtered(loose, 3, (-1, 2))
    assert not SS.dim_trust[1] and not SS.rank_trust[1]
    assert degeneration_verdict(SS) == {"verdict": "inconclusive",
                                        "witness": "trust window empty"}


def test_u_adic_needs_slot_bookkeeping():
    C = ChainComplex(QQ, {0: 1}, {}, 0, 0)
    with pytest.raises(ValueError):
        u_adic_filtration(C)


# -- agreement with the direct subspace computation ------------------------


def test_pages_match_subspace_computation():
    rng = random.Random(11)
    for F in (F3, QQ):
        for _ in range(5):
            C = random_complex(rng, F)
            FC = stupid(C)
            SS = ss_from_filtered(FC, 4, (-1, 4))
            pages, ranks, inf = subspace_pages(FC, 4, (-1, 4))
            assert SS.pages == pages
            assert SS.ranks == ranks
            assert SS.inf == inf
            assert SS.accounting_errors() == []
            for n, (tot, ab) in SS.mass_balance().items():
                assert tot == ab


def test_tate_filtration_pages_account():
    V = ChainComplex(F3, {0: 2, 1: 1},
                     {1: Matrix(F3, 2, 1, {0: {0: F3.one()}})}, 0, 1)
    T = tate_complex(complex_tensor_power(V, 3), window=(-2, 2))
    SS = ss_from_filtered(T.filtered(), 3, (-2, 2))
    assert SS.accounting_errors() == []
    mb = SS.mass_balance()
    assert mb and all(tot == ab for tot, ab in mb.values())


# -- the variable-power sequence of the periodic theory --------------------


def test_hdr_ground_field_degenerates():
    SS = hdr_ss(ground(F5))
    assert SS.e1_mismatches == []
    assert SS.accounting_errors() == []
    assert degeneration_verdict(SS)["verdict"] == "degenerate"
    for (s, n) in SS.dim_trust[1]:
        want = 1 if n + 2 * s == 0 else 0
        assert SS.dim(1, s, n) == want


def test_hdr_product_field_rational():
    SS = hdr_ss(product_field(QQ))
    assert SS.e1_mismatches == []
    assert SS.accounting_errors() == []
    assert degeneration_verdict(SS)["verdict"] == "degenerate"


def test_hdr_matrix_algebra_rational():
    SS = hdr_ss(matrix_algebra(QQ, 2), n_max=5)
    assert SS.e1_mismatches == []
    assert SS.accounting_errors() == []
    v = degeneration_verdict(SS)
    assert v["verdict"] == "degenerate"
    # odd degrees balance too at this bound
    assert 1 in v["witness"]["balanced_degrees"]


def test_hdr_dual_numbers_matches_model_and_fails():
    SS = hdr_ss(dual_numbers(QQ))
    assert SS.e1_mismatches == []
    assert SS.accounting_errors() == []
    for r in range(1, 5):
        for (s, n) in SS.dim_trust[r]:
            assert SS.dim(r, s, n) == _BB_PAGES[r].get((s, n), 0), (r, s, n)
        for (s, n) in SS.rank_trust[r]:
            assert SS.rank(r, s, n) == _BB_RANKS[r].get((s, n), 0), (r, s, n)
    v = degeneration_verdict(SS)
    assert v["verdict"] == "nondegenerate"
    w = v["witness"]
    assert w["rank"] > 0 and SS.trusted_rank(w["page"], w["level"],
                                             w["degree"])


def test_hdr_trust_is_scale_stable():
    # certified slots at a small simplicial bound must carry the same
    # numbers as at a larger one
    S6 = hdr_ss(dual_numbers(F3), n_max=6)
    S10 = hdr_ss(dual_numbers(F3), n_max=10)
    for r in S6.pages:
        for (s, n) in S6.dim_trust[r] & S10.dim_trust[r]:
            assert S6.dim(r, s, n) == S10.dim(r, s, n)
        for (s, n) in S6.rank_trust[r] & S10.rank_trust[r]:
            assert S6.rank(r, s, n) == S10.rank(r, s, n)
    assert degeneration_verdict(S6)["verdict"] == "nondegenerate"


# -- the conjugate sequence -------------------------------------------------


def test_conj_needs_matching_characteristic():
    with pytest.raises(ValueError):
        conj_ss(ground(F5), 3)


def test_conj_ground_field():
    SS = conj_ss(ground(F3), 3, n_max=9)
    assert SS.e1_mismatches == []
    assert SS.accounting_errors() == []
    v = degeneration_verdict(SS)
    assert v["verdict"] == "degenerate"
    for (s, n) in SS.dim_trust[1]:
        want = 1 if n - 2 * s == 0 else 0
        assert SS.dim(1, s, n) == want
    # abutment agrees with the stabilized co-periodic dims
    for n in range(-6, 7):
        assert SS.abutment[n] == (1 if n % 2 == 0 else 0)
    assert SS.local_mismatches == []
    assert SS.local_e1[0] == 1 and SS.local_e1[1] == 0


def test_conj_dual_numbers_local_agrees():
    SS = conj_ss(dual_numbers(F3), 3, n_max=9)
    assert SS.e1_mismatches == []
    assert SS.local_mismatches == []
    assert SS.local_e1[0] == 2 and SS.local_e1[1] == 1
    assert degeneration_verdict(SS)["verdict"] == "degenerate"
    assert SS.accounting_errors() == []


def test_conj_matrix_algebra_f5_is_honest():
    # the certified window is empty at any tractable simplicial bound, so
    # the verdict must refuse rather than extrapolate
    SS = conj_ss(matrix_algebra(F5, 2), 5, n_max=4)
    assert all(SS.dim(1, s, n) == 0 for (s, n) in SS.dim_trust[1])
    assert degeneration_verdict(SS) == {"verdict": "inconclusive",
                                        "witness": "trust window empty"}
    assert SS.accounting_errors() == []
    assert SS.local_e1 is None


def test_hypothesis_report():
    rep = conj_hypothesis_check(ground(F3), 3)
    assert rep["vanishing"] and rep["violations"] == []
    assert rep["hypotheses_met"] is False
    rep = conj_hypothesis_check(ground(F3), 3, w2_lift=True)
    assert rep["hypotheses_met"] is True
    with pytest.raises(ValueError):
        conj_hypothesis_check(ground(F3), 5)
