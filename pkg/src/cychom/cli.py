"""Command line front end.

Algebra files in, deterministic dimension tables and spectral reports out.
Every reported number carries a trust marker; refusals print as '-' and
never as a guess.  Machine mode (--json-lines) emits one JSON record per
row with a stable key order, so identical (file, config, version) triples
produce byte-identical output.
"""

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from . import __version__
from .exactlin import Field, Matrix, Subspace
from .complexes import ChainComplex
from .algebra import (FinDimAlgebra, anat, ground, dual_numbers,
                      matrix_algebra, product_field, dg_two_term)
from .cyclic import (build_ch, ch_complex, cyclic_homology, extended_bound,
                     four_term_exact)
from .filtration import (conjugate_filtration, commensurable, rescale,
                         stupid, truncF)
from .tate import (algebra_gmodule, complex_tensor_power, tate_homology_dims,
                   tightness, periodic_resolution, bar_resolution,
                   quasiexact_check, trivial_module, regular_module)
from .spectral import (hdr_ss, conj_ss, conj_hypothesis_check,
                       degeneration_verdict, ss_from_filtered)


class CliError(Exception):
    """Input-level failure; maps to exit code 1."""


DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
BUILTINS = ("f3", "f5", "f5xf5", "m2f5", "f3eps", "q", "qeps", "m2q", "dgx")


# ---------------------------------------------------------------------------
# algebra files


def _parse_coeff(tok, field, where):
    try:
        if field.p:
            return field.coerce(int(tok))
        if "/" in tok:
            a, b = tok.split("/", 1)
            return field.coerce(Fraction(int(a), int(b)))
        return field.coerce(Fraction(int(tok)))
    except (ValueError, ZeroDivisionError):
        raise CliError("%s: coefficient %r does not parse in the declared"
                       " field" % (where, tok))


def _parse_rhs(rhs, field, names, where):
    """Right hand side of a mul or diff line: `0` or c*name terms joined
    by +."""
    rhs = rhs.strip()
    if rhs == "0":
        return {}
    out = {}
    for term in rhs.split("+"):
        term = term.strip()
        if "*" not in term:
            raise CliError("%s: term %r lacks the coeff*name form"
                           % (where, term))
        coeff, name = term.split("*", 1)
        name = name.strip()
        if name not in names:
            raise CliError("%s: unknown basis name %r" % (where, name))
        c = _parse_coeff(coeff.strip(), field, where)
        k = names[name]
        v = field.add(out.get(k, field.zero()), c)
        if v == field.zero():
            out.pop(k, None)
        else:
            out[k] = v
    return out


def parse_algebra(path):
    """Parse and validate an algebra file; raises CliError with the line
    number on syntax problems and with a witness on broken axioms."""
    if not os.path.exists(path):
        cand = os.path.join(DATA_DIR, path + ".alg")
        if os.path.basename(path) == path and os.path.exists(cand):
            path = cand
        else:
            raise CliError("no such file: %s" % path)
    field = None
    names = None
    name_list = []
    unit = None
    degs = {}
    mul = {}
    mul_lines = {}
    diff = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            where = "%s:%d" % (path, lineno)
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 1)
            kw = parts[0]
            rest = parts[1] if len(parts) > 1 else ""
            if kw == "field":
                if rest == "Q":
                    field = Field(0)
                elif rest.startswith("F") and rest[1:].isdigit():
                    try:
                        field = Field(int(rest[1:]))
                    except ValueError:
                        raise CliError("%s: %s is not a prime field"
                                       % (where, rest))
                else:
                    raise CliError("%s: field must be F<p> or Q" % where)
            elif kw == "basis":
                name_list = rest.split()
                if len(set(name_list)) != len(name_list):
                    raise CliError("%s: duplicate basis name" % where)
                if not name_list:
                    raise CliError("%s: empty basis" % where)
                names = {nm: i for i, nm in enumerate(name_list)}
            elif kw == "unit":
                if names is None:
                    raise CliError("%s: unit before basis" % where)
                unit = {}
                for nm in (t.strip() for t in rest.split("+")):
                    if nm not in names:
                        raise CliError("%s: unknown unit name %r"
                                       % (where, nm))
                    unit[names[nm]] = field.one()
            elif kw == "deg":
                toks = rest.split()
                if len(toks) != 2 or names is None or toks[0] not in names:
                    raise CliError("%s: malformed deg line" % where)
                degs[names[toks[0]]] = int(toks[1])
            elif kw in ("mul", "diff"):
                if names is None or field is None:
                    raise CliError("%s: %s before basis/field" % (where, kw))
                if "->" not in rest:
                    raise CliError("%s: missing ->" % where)
                lhs, rhs = rest.split("->", 1)
                toks = lhs.split()
                if kw == "mul":
                    if len(toks) != 2 or any(t not in names for t in toks):
                        raise CliError("%s: mul needs two basis names"
                                       % where)
                    pair = (names[toks[0]], names[toks[1]])
                    if pair in mul_lines:
                        raise CliError("%s: second mul line for %s %s"
                                       % (where, toks[0], toks[1]))
                    mul_lines[pair] = lineno
                    val = _parse_rhs(rhs, field, names, where)
                    if val:
                        mul[pair] = val
                else:
                    if len(toks) != 1 or toks[0] not in names:
                        raise CliError("%s: diff needs one basis name"
                                       % where)
                    val = _parse_rhs(rhs, field, names, where)
                    if val:
                        diff[names[toks[0]]] = val
            else:
                raise CliError("%s: unknown keyword %r" % (where, kw))
    if field is None:
        raise CliError("%s: no field line" % path)
    if names is None:
        raise CliError("%s: no basis line" % path)
    if unit is None:
        raise CliError("%s: no unit line" % path)
    for i in range(len(name_list)):
        for j in range(len(name_list)):
            if (i, j) not in mul_lines:
                raise CliError("%s: missing mul line for pair %s %s"
                               % (path, name_list[i], name_list[j]))
    deg = [degs.get(i, 0) for i in range(len(name_list))]
    A = FinDimAlgebra(field, name_list, mul, unit, deg=deg, diff=diff)
    bad = A.validate()
    if bad:
        raise CliError("%s: algebra axioms fail: %s" % (path, bad[0]))
    return A


# ---------------------------------------------------------------------------
# configuration and reports


class RunConfig:
    def __init__(self, n_max=8, window=(-6, 6), depth=16, pages=4,
                 json_lines=False, prime=None, expect_degenerate=False,
                 w2_lift=False):
        if n_max < 2:
            raise CliError("--n-max must be at least 2")
        if window[0] > window[1]:
            raise CliError("--window must be nonempty")
        self.n_max = n_max
        self.window = window
        self.depth = depth
        self.pages = pages
        self.json_lines = json_lines
        self.prime = prime
        self.expect_degenerate = expect_degenerate
        self.w2_lift = w2_lift


def _parse_window(text):
    try:
        lo, hi = text.split(":")
        return (int(lo), int(hi))
    except ValueError:
        raise CliError("--window wants lo:hi")


class Report:
    """Ordered rows; each row is a dict with a stable key order."""

    def __init__(self, out):
        self.out = out
        self.rows = []

    def add(self, **kv):
        self.rows.append(kv)

    def emit(self, json_lines):
        for row in self.rows:
            if json_lines:
                self.out.write(json.dumps(row, separators=(", ", ": "))
                               + "\n")
            else:
                self.out.write(_human(row) + "\n")


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def _human(row):
    kind = row.get("row", "")
    rest = "  ".join("%s=%s" % (k, _fmt(v)) for k, v in row.items()
                     if k != "row")
    return ("%-8s %s" % (kind, rest)).rstrip()


def _dim_rows(rep, table, window, unit_name="dim"):
    for i in range(window[0], window[1] + 1):
        v = table.get(i)
        if isinstance(v, dict):
            rep.add(row=unit_name, degree=i, dim=v["dim"],
                    trusted=bool(v["stabilized"]), depth=v["depth"])
        else:
            rep.add(row=unit_name, degree=i, dim=v, trusted=v is not None)


def _page_rows(rep, SS):
    for r in sorted(SS.pages):
        for (s, n) in sorted(SS.pages[r]):
            rep.add(row="page", page=r, level=s, degree=n,
                    dim=SS.pages[r][(s, n)], trusted=SS.trusted_dim(r, s, n))
        for (s, n) in sorted(SS.ranks.get(r, ())):
            rep.add(row="rank", page=r, level=s, degree=n,
                    rank=SS.ranks[r][(s, n)],
                    trusted=SS.trusted_rank(r, s, n))
    for (s, n) in sorted(SS.inf):
        rep.add(row="limit", level=s, degree=n, dim=SS.inf[(s, n)],
                trusted=(s, n) in SS.inf_trust)
    _dim_rows(rep, SS.abutment, SS.window, unit_name="abutment")


# ---------------------------------------------------------------------------
# commands


def _homology_command(mode, A, cfg, rep):
    n = cfg.n_max
    if mode in ("hp", "cohp"):
        # the stabilization detectors may need columns past the requested
        # bound; extend while the column dimensions permit
        n = extended_bound(A, cfg.n_max, cfg.depth)
    src = build_ch(anat(A, n), check=False)
    table = cyclic_homology(src, mode, cfg.window, cfg.depth, check=False)
    _dim_rows(rep, table, cfg.window)
    return 0


def _hdr_command(A, cfg, rep):
    SS = hdr_ss(A, pages=cfg.pages, window=cfg.window, n_max=cfg.n_max,
                depth=cfg.depth)
    _page_rows(rep, SS)
    for (s, n, got, want) in SS.e1_mismatches:
        rep.add(row="e1-mismatch", level=s, degree=n, dim=got, expected=want)
    bad = SS.accounting_errors()
    rep.add(row="accounting", violations=len(bad))
    v = degeneration_verdict(SS)
    rep.add(row="verdict", verdict=v["verdict"], witness=v["witness"])
    if cfg.expect_degenerate and v["verdict"] != "degenerate":
        return 2
    return 0


def _conj_command(A, cfg, rep):
    if cfg.prime is None:
        raise CliError("conj needs -p")
    if A.field.p != cfg.prime:
        raise CliError("conj: -p %d does not match characteristic %d"
                       % (cfg.prime, A.field.p))
    SS = conj_ss(A, cfg.prime, pages=cfg.pages, window=cfg.window,
                 depth=cfg.depth, n_max=cfg.n_max)
    _page_rows(rep, SS)
    for (s, n, got, want) in SS.e1_mismatches:
        rep.add(row="e1-mismatch", level=s, degree=n, dim=got, expected=want)
    if SS.local_e1 is not None:
        for j in range(cfg.window[0], cfg.window[1] + 1):
            v = SS.local_e1.get(j)
            rep.add(row="local-e1", degree=j, dim=v, trusted=v is not None)
        rep.add(row="local-compare", mismatches=len(SS.local_mismatches))
    bad = SS.accounting_errors()
    rep.add(row="accounting", violations=len(bad))
    hyp = conj_hypothesis_check(A, cfg.prime,
                                w2_lift=True if cfg.w2_lift else None)
    rep.add(row="hypotheses", vanishing=hyp["vanishing"],
            violations=hyp["violations"],
            w2_lift_asserted=hyp["w2_lift_asserted"],
            hypotheses_met=hyp["hypotheses_met"])
    v = degeneration_verdict(SS)
    rep.add(row="verdict", verdict=v["verdict"], witness=v["witness"])
    if cfg.expect_degenerate and v["verdict"] != "degenerate":
        return 2
    return 0


def _tate_command(A, cfg, rep):
    if cfg.prime is None:
        raise CliError("tate needs -p")
    E = algebra_gmodule(A, cfg.prime)
    dims = tate_homology_dims(E, window=cfg.window)
    for i in range(cfg.window[0], cfg.window[1] + 1):
        v = dims.get(i)
        rep.add(row="dim", degree=i, dim=v, trusted=i in dims)
    t = tightness(E)
    rep.add(row="tight", tight=t["tight"])
    return 0


# ---------------------------------------------------------------------------
# verification suites


def _random_complex(rng, F, maxdim=3, lo=0, hi=3):
    dims = {i: rng.randrange(0, maxdim + 1) for i in range(lo, hi + 1)}
    used = set()
    diffs = {}
    for i in sorted(dims, reverse=True):
        if i - 1 not in dims or not dims[i] or not dims[i - 1]:
            continue
        srcs = [k for k in range(dims[i]) if (i, k) not in used]
        tgts = list(range(dims[i - 1]))
        rng.shuffle(srcs)
        rng.shuffle(tgts)
        m = rng.randrange(0, min(len(srcs), len(tgts)) + 1)
        entries = []
        for t in range(m):
            entries.append((tgts[t], srcs[t], _nonzero(rng, F)))
            used.add((i - 1, tgts[t]))
        mat = Matrix.from_entries(F, dims[i - 1], dims[i], entries)
        if not mat.is_zero():
            diffs[i] = mat
    return ChainComplex(F, dims, diffs, lo, hi, check=True)


def _nonzero(rng, F):
    return F.coerce(rng.randrange(1, F.p if F.p else 7))


def _random_subspace(rng, F, amb, k):
    vecs = []
    for _ in range(k):
        vecs.append({c: _nonzero(rng, F) for c in range(amb)
                     if rng.random() < 0.6})
    return Subspace(F, amb, vecs)


def _suite_core(seed):
    rng = random.Random(seed)
    checks = []
    ok = True
    for F in (Field(3), Field(5), Field(0)):
        for _ in range(5):
            C = _random_complex(rng, F)  # constructor checks d^2 = 0
            for i in C.dims:
                h = C.homology_dim(i) if C.trusted(i) else None
                if h is not None and h < 0:
                    ok = False
    checks.append(("square-zero random complexes", ok))
    ok = True
    for _ in range(10):
        F = Field(3)
        U = _random_subspace(rng, F, 6, 3)
        W = _random_subspace(rng, F, 6, 3)
        if U.dim + W.dim != U.sum(W).dim + U.intersect(W).dim:
            ok = False
    checks.append(("subspace dimension formula", ok))
    ok = True
    for _ in range(10):
        F = Field(5)
        cells = {(rng.randrange(4), rng.randrange(5)): _nonzero(rng, F)
                 for _ in range(8)}
        M = Matrix.from_entries(F, 4, 5,
                                [(r, c, v) for (r, c), v in cells.items()])
        if M.rank() + M.kernel().dim != 5:
            ok = False
    checks.append(("rank-nullity", ok))
    return checks


def _suite_cyclic(seed):
    checks = []
    ok = all(four_term_exact(Field(5), n) and four_term_exact(Field(3), n)
             for n in range(1, 9))
    checks.append(("four-term exactness n <= 8", ok))
    ok = True
    for A in (ground(Field(5)), dual_numbers(Field(3)),
              dg_two_term(Field(3))):
        Cp = ch_complex(anat(A, 5), drop_last=True, check=True)
        for i in Cp.trusted_degrees(0, 3):
            if Cp.homology_dim(i) != 0:
                ok = False
    checks.append(("primed column acyclic", ok))
    return checks


def _suite_tate(seed):
    rng = random.Random(seed)
    checks = []
    ok = True
    for p in (2, 3):
        for mk in (trivial_module, regular_module):
            E = mk(Field(p), p)
            a = tate_homology_dims(E, periodic_resolution(p, Field(p)),
                                   (-3, 3))
            b = tate_homology_dims(E, bar_resolution(p, Field(p)), (-3, 3))
            if a != b:
                ok = False
    checks.append(("resolution flavor independence", ok))
    ok = True
    for _ in range(4):
        V = _random_complex(rng, Field(3), maxdim=2, hi=2)
        if sum(V.dim(i) for i in V.dims) == 0:
            continue
        rep = tightness(complex_tensor_power(V, 3))
        if not rep["tight"]:
            ok = False
        q = quasiexact_check(V, 3, window=(-2, 2))
        if not q["ok"]:
            ok = False
    checks.append(("tensor cubes tight and quasiexact", ok))
    return checks


def _suite_filtration(seed):
    checks = []
    bch = build_ch(anat(dual_numbers(Field(3)), 4), check=False)
    from .filtration import standard_filtration, tau_filtration
    fc = standard_filtration(bch.ccK)
    ok = True
    for n in (1, 2):
        T = truncF(fc, lo=n)
        for j in fc.levels():
            lhs, rhs = T.gr(j), fc.gr(j)
            for i in range(0, 3):
                if lhs.trusted(i) and rhs.trusted(i):
                    want = rhs.homology_dim(i) if i >= n - j else 0
                    if lhs.homology_dim(i) != want:
                        ok = False
    checks.append(("graded piece of truncation", ok))
    from .complexes import expand
    bch3 = build_ch(anat(ground(Field(3)), 6), check=False)
    cp0 = expand(bch3.mixed, "per", (-4, 4))
    cp = ChainComplex(cp0.field, cp0.dims, cp0.d, data_lo=-3, data_hi=3,
                      slots=cp0.slots, check=False)
    cp.u_slots = cp0.u_slots
    from .filtration import standard_on_expansion
    FC = standard_on_expansion(cp, bch3.ccK.complex)
    V = conjugate_filtration(FC, 3)
    ok, _ = commensurable(V, rescale(FC, 3), degrees=range(0, 3))
    checks.append(("conjugate commensurable with rescaled standard", ok))
    return checks


def _suite_spectral(seed):
    rng = random.Random(seed)
    checks = []
    ok = True
    for F in (Field(3), Field(0)):
        for _ in range(5):
            C = _random_complex(rng, F)
            SS = ss_from_filtered(stupid(C), 4, (-1, 4))
            if SS.accounting_errors():
                ok = False
            for n, (tot, ab) in SS.mass_balance().items():
                if tot != ab:
                    ok = False
    checks.append(("page accounting and mass balance", ok))
    SS = hdr_ss(ground(Field(5)))
    ok = (SS.e1_mismatches == [] and not SS.accounting_errors()
          and degeneration_verdict(SS)["verdict"] == "degenerate")
    checks.append(("first page reads the algebra homology", ok))
    return checks


SUITES = {
    "core": _suite_core,
    "cyclic": _suite_cyclic,
    "tate": _suite_tate,
    "filtration": _suite_filtration,
    "spectral": _suite_spectral,
}


def _verify_command(which, cfg, rep):
    seed = int(os.environ.get("CYCHOM_SEED", "0"))
    if which == "all":
        names = list(SUITES)
    elif which in SUITES:
        names = [which]
    else:
        raise CliError("unknown suite %r (have: %s, all)"
                       % (which, ", ".join(SUITES)))
    failed = 0
    for name in names:
        for check, ok in SUITES[name](seed):
            rep.add(row="check", suite=name, name=check, passed=bool(ok))
            if not ok:
                failed += 1
    rep.add(row="summary", suites=len(names), failed=failed, seed=seed)
    return 2 if failed else 0


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(
        prog="cychom",
        description="exact Hochschild / cyclic / periodic / co-periodic "
                    "homology of finite dimensional algebras")
    ap.add_argument("command",
                    choices=["hh", "hc", "hp", "cohp", "hdr", "conj",
                             "tate", "verify"])
    ap.add_argument("target",
                    help="algebra file (or builtin name: %s); for verify, "
                         "a suite name" % ", ".join(BUILTINS))
    ap.add_argument("-p", dest="prime", type=int, default=None)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--window", type=str, default="-6:6")
    ap.add_argument("--depth", type=int, default=16)
    ap.add_argument("--pages", type=int, default=4)
    ap.add_argument("--json-lines", action="store_true")
    ap.add_argument("--expect-degenerate", action="store_true")
    ap.add_argument("--assert-w2-lift", action="store_true")
    return ap


def run(argv=None, out=None):
    out = out or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    cfg = RunConfig(n_max=args.n_max, window=_parse_window(args.window),
                    depth=args.depth, pages=args.pages,
                    json_lines=args.json_lines, prime=args.prime,
                    expect_degenerate=args.expect_degenerate,
                    w2_lift=args.assert_w2_lift)
    rep = Report(out)
    rep.add(row="meta", version=__version__, command=args.command,
            target=os.path.basename(args.target), n_max=cfg.n_max,
            window="%d:%d" % cfg.window, depth=cfg.depth, pages=cfg.pages)
    if args.command == "verify":
        code = _verify_command(args.target, cfg, rep)
    else:
        A = parse_algebra(args.target)
        if args.command in ("hh", "hc", "hp", "cohp"):
            code = _homology_command(args.command, A, cfg, rep)
        elif args.command == "hdr":
            code = _hdr_command(A, cfg, rep)
        elif args.command == "conj":
            code = _conj_command(A, cfg, rep)
        else:
            code = _tate_command(A, cfg, rep)
    rep.emit(cfg.json_lines)
    return code


def main():
    try:
        sys.exit(run())
    except CliError as e:
        sys.stderr.write("error: %s\n" % e)
        sys.exit(1)


if __name__ == "__main__":
    main()
