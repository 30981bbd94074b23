"""The universal anticanonical cubic surface.

Markings and the Schlafli graph, the anticanonical ideal generators, the 135
node-coordinate tables, the expected/true valuation matrices with their
minor searches, the apex collinearity criterion, lifting obstructions, and
the monomial map checks.
"""
from __future__ import annotations

import json
import math
import random
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy

from ._tables import TRIANGLE_ORDER
from .coble import Covariants, NonFactorable
from .e6_weyl import (S_INDEX, S_SYMBOLS, T_INDEX, T_SYMBOLS, WeylGroup,
                      line_triangles, positive_roots, triangle_lines)
from .exact_core import (IntMatrix, LinearForm, MPoly, Rational,
                         cone_extremal_rays, solve_exponent_system)


class OrbitSizeMismatch(RuntimeError):
    """A seed orbit under the Weyl action closed at an unexpected size."""


class FactorizationFailure(ArithmeticError):
    """A node coordinate failed to factor as a Yoshida/Cross monomial."""


class NotFound(RuntimeError):
    """No tropically non-singular minor of the required kind exists."""


# ---------------------------------------------------------------------------
# Schlafli graph


class SchlafliGraph:
    """The 27 exceptional curves, their 135 intersections, 45 triangles."""

    def __init__(self):
        self.lines: Tuple[str, ...] = S_SYMBOLS
        self.triangles: Tuple[str, ...] = T_SYMBOLS
        self.triangle_lines: Dict[str, Tuple[str, ...]] = {
            t: triangle_lines(t) for t in T_SYMBOLS}
        self.line_triangles: Dict[str, Tuple[str, ...]] = {
            s: line_triangles(s) for s in S_SYMBOLS}
        edges = set()
        for t, ls in self.triangle_lines.items():
            for a, b in combinations(ls, 2):
                edges.add(frozenset((a, b)))
        self.edges: List[frozenset] = sorted(
            edges, key=lambda e: tuple(sorted(S_INDEX[s] for s in e)))
        self._validate()

    def _validate(self):
        assert len(self.lines) == 27 and len(self.triangles) == 45
        if len(self.edges) != 135:
            raise OrbitSizeMismatch("expected 135 intersecting pairs, got %d"
                                    % len(self.edges))
        for s in self.lines:
            if len(self.neighbors(s)) != 10:
                raise OrbitSizeMismatch("line %s is not 10-regular" % s)
        for e in self.edges:
            if len(self.node_zero_triangles(e)) != 9:
                raise OrbitSizeMismatch("node %s not in 9 triangles" % set(e))

    def neighbors(self, s: str) -> List[str]:
        out = []
        for t in self.line_triangles[s]:
            out.extend(x for x in self.triangle_lines[t] if x != s)
        return sorted(set(out), key=S_INDEX.get)

    def node_zero_triangles(self, node: frozenset) -> List[int]:
        """Indices of the nine triangles containing either line of a node."""
        a, b = sorted(node, key=S_INDEX.get)
        ts = set(self.line_triangles[a]) | set(self.line_triangles[b])
        return sorted(T_INDEX[t] for t in ts)

    def link_nodes(self, s: str) -> List[frozenset]:
        """The five nodes opposite s, one per triangle through s, in
        triangle order."""
        out = []
        for t in self.line_triangles[s]:
            rest = [x for x in self.triangle_lines[t] if x != s]
            out.append(frozenset(rest))
        return out

    def all_nodes(self) -> List[frozenset]:
        return list(self.edges)


def build_schlafli() -> SchlafliGraph:
    return SchlafliGraph()


# ---------------------------------------------------------------------------
# ideal generators

#: linear trinomial seed: C116*X[x21] - C2*X[x31] + C19*X[x41]
_LINEAR_SEED = ((T_INDEX["x21"], 1, 116), (T_INDEX["x31"], -1, 2),
                (T_INDEX["x41"], 1, 19))
#: cubic binomial seed: C9*C107*C2 * X12X23X31 - C80*C116*C86 * X13X21X32
_CUBIC_SEED = (
    (1, (2, 9, 107), tuple(sorted(T_INDEX[t] for t in ("x12", "x23", "x31")))),
    (-1, (80, 86, 116), tuple(sorted(T_INDEX[t] for t in ("x13", "x21", "x32")))),
)


def _root_index_by_coeffs(coeffs: Sequence[int]) -> int:
    for r in positive_roots():
        if tuple(r.coeffs) == tuple(coeffs):
            return r.index
    raise KeyError(coeffs)


def _cox_seed() -> Tuple:
    # (d3-d4)(d1+d3+d4) E2F12 - (d2-d4)(d1+d2+d4) E3F13
    #                          + (d2-d3)(d1+d2+d3) E4F14
    def rt(*c):
        return _root_index_by_coeffs(c)

    return (
        (1, tuple(sorted((rt(0, 0, -1, 1, 0, 0), rt(1, 0, 1, 1, 0, 0)))),
         (S_INDEX["E2"], S_INDEX["F12"])),
        (-1, tuple(sorted((rt(0, -1, 0, 1, 0, 0), rt(1, 1, 0, 1, 0, 0)))),
         (S_INDEX["E3"], S_INDEX["F13"])),
        (1, tuple(sorted((rt(0, -1, 1, 0, 0, 0), rt(1, 1, 1, 0, 0, 0)))),
         (S_INDEX["E4"], S_INDEX["F14"])),
    )


def _norm_linear(terms) -> Tuple:
    terms = sorted(terms)
    if terms[0][1] < 0:
        terms = [(t, -s, k) for (t, s, k) in terms]
    return tuple(terms)


def _norm_cubic(terms) -> Tuple:
    terms = sorted(terms, key=lambda x: (x[2], x[1]))
    if terms[0][0] < 0:
        terms = [(-s, cr, ts) for (s, cr, ts) in terms]
    return tuple(terms)


def _norm_cox(terms) -> Tuple:
    terms = sorted(terms, key=lambda x: (x[2], x[1]))
    if terms[0][0] < 0:
        terms = [(-s, rr, ll) for (s, rr, ll) in terms]
    return tuple(terms)


class IdealGenerators:
    """The three Weyl orbits of printed seeds generating the universal
    anticanonical ideal (linear trinomials, cubic binomials) and the Cox-side
    quadratic trinomials, with transporter group elements from each seed."""

    def __init__(self, linear, cubic, cox):
        self.linear: Dict[Tuple, int] = linear
        self.cubic: Dict[Tuple, int] = cubic
        self.cox: Dict[Tuple, int] = cox

    @property
    def linear_trinomials(self) -> List[Tuple]:
        return sorted(self.linear)

    @property
    def cubic_binomials(self) -> List[Tuple]:
        return sorted(self.cubic)

    @property
    def cox_trinomials(self) -> List[Tuple]:
        return sorted(self.cox)


def build_ideal(cov: Covariants) -> IdealGenerators:
    """Close the three printed seeds under the Weyl generators."""
    g = cov.group
    tv = [g._gen_actions["T_vars"][i] for i in range(6)]
    cr = [g._gen_actions["cross"][i] for i in range(6)]
    ms = [g._gen_actions["marking_s"][i] for i in range(6)]
    rt = [g.perms[gid] for gid in g.gen_ids]

    def img_signed(perm, idx):
        e = perm[idx]
        return abs(e) - 1, (1 if e > 0 else -1)

    def lin_step(gi, trin):
        out = []
        for (t, s, k) in trin:
            t2, e1 = img_signed(tv[gi], t)
            k2, e2 = img_signed(cr[gi], k)
            out.append((t2, s * e1 * e2, k2))
        return _norm_linear(out)

    def cub_step(gi, binom):
        out = []
        for (s, crs, ts) in binom:
            sign = s
            ncr, nts = [], []
            for k in crs:
                k2, e = img_signed(cr[gi], k)
                sign *= e
                ncr.append(k2)
            for t in ts:
                t2, e = img_signed(tv[gi], t)
                sign *= e
                nts.append(t2)
            out.append((sign, tuple(sorted(ncr)), tuple(sorted(nts))))
        return _norm_cubic(out)

    def cox_step(gi, trin):
        out = []
        for (s, roots, lines) in trin:
            sign = s
            nr = []
            for r in roots:
                e = rt[gi][r]
                nr.append(abs(e) - 1)
                if e < 0:
                    sign = -sign
            nl = tuple(sorted(img_signed(ms[gi], l)[0] for l in lines))
            out.append((sign, tuple(sorted(nr)), nl))
        return _norm_cox(out)

    linear = g.orbit(_norm_linear(_LINEAR_SEED), lin_step)
    # The cross coefficients break part of the seed stabilizer: the orbit of
    # the decorated binomial has three members per underlying monomial
    # binomial (any of a triangle's three crosses can appear on its variable,
    # compensated by the partner term).  Keep one canonical decoration per
    # monomial support.
    cubic_full = g.orbit(_norm_cubic(_CUBIC_SEED), cub_step)
    if len(cubic_full) != 360:
        raise OrbitSizeMismatch("decorated cubic orbit closed at %d, "
                                "expected 360" % len(cubic_full))
    by_support = {}
    for mem, trans in cubic_full.items():
        support = tuple((s, ts) for (s, _, ts) in mem)
        cur = by_support.get(support)
        if cur is None or mem < cur[0]:
            by_support[support] = (mem, trans)
    cubic = dict(by_support.values())
    cox = g.orbit(_norm_cox(_cox_seed()), cox_step)
    for name, got, want in (("linear", len(linear), 270),
                            ("cubic", len(cubic), 120),
                            ("cox", len(cox), 270)):
        if got != want:
            raise OrbitSizeMismatch("%s orbit closed at %d, expected %d"
                                    % (name, got, want))
    return IdealGenerators(linear, cubic, cox)


# ---------------------------------------------------------------------------
# node coordinate tables

#: pivot columns of the spanning basis: vector i carries 1 at pivot i and 0
#: at the other three.  With these four triangles the node E1^F12 coincides
#: with basis vector 3.
_BASIS_PIVOTS = (T_INDEX["x12"], T_INDEX["x13"], T_INDEX["x21"],
                 T_INDEX["x23"])

#: prime used to probe valuations of coordinate functions at special points
_PROBE_PRIME = 2147483647
#: prime used only to pre-select independent rows cheaply
_SELECT_PRIME = 2305843009213693951

#: number of independent rational points used to pin down and cross-check
#: the constant factor of every recovered monomial
_VERIFY_POINTS = 5


def _ival(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    n = int(n)
    if n == 0:
        raise ZeroDivisionError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _qval(q, p: int) -> int:
    return _ival(q.numerator, p) - _ival(q.denominator, p)


def _int_scale(vec) -> List[int]:
    """Primitive integer vector proportional to a rational vector."""
    den = 1
    for x in vec:
        den = den * int(x.denominator) // math.gcd(den, int(x.denominator))
    out = [int(x * den) for x in vec]
    g = 0
    for x in out:
        g = math.gcd(g, x)
    if g > 1:
        out = [x // g for x in out]
    return out


def _rref_kernel(rows: Sequence[Sequence[int]]
                 ) -> Tuple[List[int], List[List[Rational]]]:
    """Right kernel over Q of an integer matrix.

    Returns (free_cols, basis); basis vector i carries 1 at free_cols[i] and
    0 at the other free columns.
    """
    m = [[Rational(x) for x in r] for r in rows]
    ncols = len(rows[0])
    pivots: List[Tuple[int, int]] = []
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, len(m)) if m[r][col]), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = m[row][col]
        m[row] = [x / inv for x in m[row]]
        for r in range(len(m)):
            if r != row and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[row])]
        pivots.append((row, col))
        row += 1
    pivot_cols = {c for _, c in pivots}
    free = [c for c in range(ncols) if c not in pivot_cols]
    basis = []
    for fc in free:
        v = [Rational(0)] * ncols
        v[fc] = Rational(1)
        for r, c in pivots:
            v[c] = -m[r][fc]
        basis.append(v)
    return free, basis


def _rref_rows(rows: Sequence[Sequence[Rational]]
               ) -> Tuple[List[int], List[List[Rational]]]:
    """Reduced row echelon form of full-rank rows; returns (pivot cols, rows)."""
    m = [list(r) for r in rows]
    ncols = len(m[0])
    piv_cols: List[int] = []
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, len(m)) if m[r][col]), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = m[row][col]
        m[row] = [x / inv for x in m[row]]
        for r in range(len(m)):
            if r != row and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[row])]
        piv_cols.append(col)
        row += 1
        if row == len(m):
            break
    return piv_cols, m


def _independent_rows(rows: Sequence[Sequence[int]], prime: int) -> List[int]:
    """Indices of a maximal set of rows independent modulo a prime."""
    ncols = len(rows[0])
    echelon: List[Tuple[int, List[int]]] = []  # (pivot col, reduced row)
    picked = []
    for ri, row in enumerate(rows):
        v = [x % prime for x in row]
        for pc, er in echelon:
            if v[pc]:
                f = v[pc]
                v = [(a - f * b) % prime for a, b in zip(v, er)]
        pc = next((c for c in range(ncols) if v[c]), None)
        if pc is None:
            continue
        inv = pow(v[pc], -1, prime)
        v = [a * inv % prime for a in v]
        echelon.append((pc, v))
        picked.append(ri)
    return picked


class _Frame:
    """Kernel of the linear-trinomial system at one rational point.

    kvecs[i] is an integer multiple of the kernel vector carrying 1 at
    free column i and 0 at the other free columns.
    """

    __slots__ = ("point", "kvecs", "free")

    def __init__(self, point: Sequence[int], kvecs: List[List[int]],
                 free: Tuple[int, ...]):
        self.point = list(point)
        self.kvecs = kvecs
        self.free = free


def _cross_values(cov: Covariants, point: Sequence) -> List[Rational]:
    yos = [y.poly.evaluate(point) for y in cov.yoshidas]
    out = []
    for c in cov.crosses:
        (s1, i1), (s2, i2) = c.binomial
        out.append(Rational(s1) * yos[i1] + Rational(s2) * yos[i2])
    return out


def _trinomial_rows(cov: Covariants, trinomials: Sequence[Tuple],
                    point: Sequence) -> List[List[int]]:
    cvals = _cross_values(cov, point)
    rows = []
    for trin in trinomials:
        row = [Rational(0)] * 45
        for (t, s, k) in trin:
            row[t] += Rational(s) * cvals[k]
        rows.append(_int_scale(row))
    return rows


def _frame_at(cov: Covariants, trinomials: Sequence[Tuple],
              point: Sequence[int],
              pivots: Optional[Tuple[int, ...]] = None) -> Optional[_Frame]:
    """Compute the 4-dimensional kernel at a point, or None if degenerate."""
    rows = _trinomial_rows(cov, trinomials, point)
    picked = _independent_rows(rows, _SELECT_PRIME)
    if len(picked) != 41:
        return None
    free, basis = _rref_kernel([rows[i] for i in picked])
    if len(basis) != 4:
        return None
    # normalize the kernel basis to an identity block on the pivot columns
    piv_cols = _BASIS_PIVOTS if pivots is None else tuple(pivots)
    ext = [[v[c] for c in piv_cols] + v for v in basis]
    lead, ext = _rref_rows(ext)
    if lead != [0, 1, 2, 3]:
        return None
    basis = [v[4:] for v in ext]
    kvecs = [_int_scale(v) for v in basis]
    for row in rows:
        for kv in kvecs:
            if sum(a * b for a, b in zip(row, kv)):
                return None
    return _Frame(point, kvecs, tuple(piv_cols))


#: factor labels: ("root", index 0..35) and ("quintic", triangle symbol)
def _factor_list(cov: Covariants) -> List[Tuple[str, object, MPoly]]:
    out = [("root", r.index, r.poly) for r in positive_roots()]
    out += [("quintic", t, cov.quintics[t].poly) for t in TRIANGLE_ORDER]
    return out


def _mod_value(poly: MPoly, point: Sequence[int], prime: int) -> int:
    v = poly.evaluate(point)
    num, den = int(v.numerator), int(v.denominator)
    if den % prime == 0:
        raise ZeroDivisionError("denominator vanishes modulo probe prime")
    return num * pow(den, -1, prime) % prime


def _special_point(poly_kind: str, poly: MPoly,
                   all_polys: Sequence[MPoly], self_idx: int,
                   rng: random.Random) -> List[int]:
    """A rational point where one factor has valuation exactly one at the
    probe prime and every other factor is a unit."""
    P = _PROBE_PRIME
    x = sympy.symbols("x")
    for _ in range(200):
        if poly_kind == "root":
            pt = [rng.randrange(1, P) for _ in range(6)]
            coeffs = {e.index(1): c for e, c in poly.terms.items()}
            i0 = min(coeffs)
            a = Rational(coeffs[i0])
            v = poly.evaluate(pt)
            shift = int(v / a) % P
            # shift away by a random multiple of the prime so the factor is
            # divisible by it without vanishing outright
            pt[i0] = (pt[i0] - shift) % P + P * rng.randrange(1, 1 << 30)
            bump = i0
        else:
            tail = [rng.randrange(1, P) for _ in range(5)]
            cs: Dict[int, int] = {}
            for e, c in poly.terms.items():
                m = int(c.numerator) * pow(int(c.denominator), -1, P) % P
                for i in range(1, 6):
                    m = m * pow(tail[i - 1], e[i], P) % P
                cs[e[0]] = (cs.get(e[0], 0) + m) % P
            deg = max(k for k, v in cs.items() if v)
            if deg == 0:
                continue
            roots = sympy.Poly([cs.get(k, 0) for k in range(deg, -1, -1)],
                               x, modulus=P).ground_roots()
            roots = [int(r) % P for r in roots]
            if not roots:
                continue
            pt = [rng.choice(roots)] + tail
            bump = 0
        fv = poly.evaluate(pt)
        num = int(fv.numerator)
        if num == 0 or num % P:
            continue
        if num % (P * P) == 0:
            pt[bump] += P
            num = int(poly.evaluate(pt).numerator)
            if num == 0 or num % P or num % (P * P) == 0:
                continue
        ok = True
        for j, other in enumerate(all_polys):
            if j == self_idx:
                continue
            if _mod_value(other, pt, P) == 0:
                ok = False
                break
        if ok:
            return pt
    raise NotFound("no valuation-one point for factor %d" % self_idx)


class CoordMonomial:
    """A coordinate function as a Laurent monomial in roots and quintics,
    regrouped as a Laurent monomial in Crosses and Yoshidas."""

    __slots__ = ("unit", "root_exp", "quintic_exp",
                 "cross_unit", "cross_exp", "yoshida_exp")

    def __init__(self, unit, root_exp: Dict[int, int],
                 quintic_exp: Dict[str, int]):
        self.unit = unit
        self.root_exp = dict(root_exp)
        self.quintic_exp = dict(quintic_exp)
        self.cross_unit = None
        self.cross_exp: Optional[Dict[int, int]] = None
        self.yoshida_exp: Optional[Dict[int, int]] = None

    def regroup(self, cov: Covariants) -> "CoordMonomial":
        got = cov.as_yoshida_cross_monomial(
            self.unit, self.root_exp, self.quintic_exp)
        if got is None or got[3] != "direct":
            raise FactorizationFailure(
                "coordinate is not a Cross/Yoshida monomial")
        self.cross_unit, self.cross_exp, self.yoshida_exp = got[:3]
        return self

    def evaluate(self, cov: Covariants, point: Sequence) -> Rational:
        roots = positive_roots()
        val = Rational(self.unit)
        for i, e in self.root_exp.items():
            val = val * roots[i].poly.evaluate(point) ** e
        for t, e in self.quintic_exp.items():
            val = val * cov.quintics[t].poly.evaluate(point) ** e
        return val

    def __repr__(self):
        return "CoordMonomial(unit=%s, roots=%s, quintics=%s)" % (
            self.unit, self.root_exp, self.quintic_exp)


class NodeTables:
    """Exact coordinates of the 135 nodes and of a spanning basis of the
    linear span of the surface, as Cross/Yoshida Laurent monomials.

    Each node vector is normalized to 1 at its anchor column (the pivot
    column selected by the reduced combination of spanning vectors); basis
    row i is normalized to 1 at pivot column i.
    """

    def __init__(self, graph: SchlafliGraph, pivots: Tuple[int, ...],
                 anchors: Dict[frozenset, int]):
        self.graph = graph
        self.pivots = pivots
        self.anchors = anchors  # node -> index into pivots
        self.nodes: Dict[frozenset, List[Optional[CoordMonomial]]] = {}
        self.basis: List[List[Optional[CoordMonomial]]] = []
        self._special: List[_Frame] = []   # one frame per factor, in order
        self._verify: List[Tuple[_Frame, List[Rational]]] = []

    # -- per-frame exact linear algebra ---------------------------------

    def node_combo(self, frame: _Frame, node: frozenset) -> List[int]:
        zcols = self.graph.node_zero_triangles(node)
        mat = [[kv[z] for kv in frame.kvecs] for z in zcols]
        free, basis = _rref_kernel(mat)
        if len(basis) != 1:
            raise FactorizationFailure(
                "node space dimension %d at frame point" % len(basis))
        c = _int_scale(basis[0])
        k = self.anchors[node]
        if c[k] == 0:
            raise FactorizationFailure("anchor coefficient vanished")
        return c

    def node_values(self, frame: _Frame, node: frozenset) -> List[Rational]:
        """The 45 node coordinates at a frame point, anchor-normalized."""
        c = self.node_combo(frame, node)
        w = [sum(ci * kv[j] for ci, kv in zip(c, frame.kvecs))
             for j in range(45)]
        a = w[self.pivots[self.anchors[node]]]
        return [Rational(x) / a for x in w]

    def basis_values(self, frame: _Frame) -> List[List[Rational]]:
        """The 4x45 spanning rows at a frame point, pivot-normalized."""
        out = []
        for i, kv in enumerate(frame.kvecs):
            lam = kv[self.pivots[i]]
            out.append([Rational(x) / lam for x in kv])
        return out

    # -- monomial recovery ----------------------------------------------

    def recover_monomial(self, eval_fn: Callable[[_Frame], Rational]
                         ) -> CoordMonomial:
        """Recover a Laurent monomial in roots and quintics from exact
        evaluations of a coordinate function at the stored frames.

        The factor exponents are read off as valuations at the probe prime,
        one special frame per factor; the unit is fixed at the first
        verification frame and must be reproduced at all the others.
        """
        exps: Dict[int, int] = {}
        for pos, frame in enumerate(self._special):
            e = _qval(eval_fn(frame), _PROBE_PRIME)
            if e:
                exps[pos] = e
        unit = None
        for frame, fvals in self._verify:
            v = eval_fn(frame)
            mono = Rational(1)
            for pos, e in exps.items():
                mono = mono * fvals[pos] ** e
            u = v / mono
            if unit is None:
                unit = u
            elif unit != u:
                raise FactorizationFailure(
                    "coordinate is not a monomial in roots and quintics")
        root_exp = {pos: e for pos, e in exps.items() if pos < 36}
        quintic_exp = {TRIANGLE_ORDER[pos - 36]: e
                       for pos, e in exps.items() if pos >= 36}
        return CoordMonomial(unit, root_exp, quintic_exp)


def build_node_tables(cov: Covariants, ideal: Optional[IdealGenerators] = None,
                      seed: int = 2026,
                      log: Optional[Callable[[str], None]] = None
                      ) -> NodeTables:
    """Compute the 135 node coordinate tables and the 4x45 spanning basis.

    Works with exact kernels of the linear-trinomial system at rational
    points: special points where exactly one root or quintic factor has
    valuation one at a large prime read off the factor exponents, and
    independent random points pin down and cross-check the units.
    """
    if ideal is None:
        ideal = build_ideal(cov)
    trinomials = ideal.linear_trinomials
    graph = build_schlafli()
    rng = random.Random(seed)

    def say(msg):
        if log:
            log(msg)

    def random_frame(pivots=None):
        while True:
            pt = [rng.randrange(1, 10 ** 6) for _ in range(6)]
            frame = _frame_at(cov, trinomials, pt, pivots)
            if frame is not None:
                return frame

    generic = random_frame()
    pivots = generic.free
    say("pivot columns %s" % (pivots,))

    tables = NodeTables(graph, pivots, {})
    # anchors and zero patterns from the generic frame
    for node in graph.all_nodes():
        zcols = graph.node_zero_triangles(node)
        mat = [[kv[z] for kv in generic.kvecs] for z in zcols]
        _, basis = _rref_kernel(mat)
        if len(basis) != 1:
            raise FactorizationFailure(
                "node space dimension %d at generic point" % len(basis))
        c = _int_scale(basis[0])
        k = next(i for i in range(4) if c[i])
        tables.anchors[node] = k
        w = [sum(ci * kv[j] for ci, kv in zip(c, generic.kvecs))
             for j in range(45)]
        zset = set(zcols)
        for j in range(45):
            if (w[j] == 0) != (j in zset):
                raise FactorizationFailure(
                    "zero pattern of node %s is not its triangle set"
                    % sorted(node))

    factors = _factor_list(cov)
    polys = [f[2] for f in factors]
    for pos, (kind, key, poly) in enumerate(factors):
        while True:
            pt = _special_point(kind, poly, polys, pos, rng)
            frame = _frame_at(cov, trinomials, pt, pivots)
            if frame is not None:
                break
        tables._special.append(frame)
        say("special point %d/%d (%s %s)" % (pos + 1, len(factors), kind, key))

    for _ in range(_VERIFY_POINTS):
        frame = random_frame(pivots)
        fvals = [p.evaluate(frame.point) for p in polys]
        if any(v == 0 for v in fvals):
            continue
        tables._verify.append((frame, fvals))
    if len(tables._verify) < 2:
        raise FactorizationFailure("not enough verification points")

    say("recovering node coordinates")
    P = _PROBE_PRIME
    node_exps: Dict[frozenset, List[Dict[int, int]]] = {
        node: [dict() for _ in range(45)] for node in graph.all_nodes()}
    basis_exps: List[List[Optional[Dict[int, int]]]] = [
        [None if kv[j] == 0 else dict() for j in range(45)]
        for kv in generic.kvecs]
    for pos, frame in enumerate(tables._special):
        for node in graph.all_nodes():
            c = tables.node_combo(frame, node)
            w = [sum(ci * kv[j] for ci, kv in zip(c, frame.kvecs))
                 for j in range(45)]
            va = _ival(w[pivots[tables.anchors[node]]], P)
            zset = set(graph.node_zero_triangles(node))
            for j in range(45):
                if j in zset:
                    continue
                e = _ival(w[j], P) - va
                if e:
                    node_exps[node][j][pos] = e
        for i, kv in enumerate(frame.kvecs):
            lam = _ival(kv[pivots[i]], P)
            for j in range(45):
                if basis_exps[i][j] is None:
                    if kv[j] != 0:
                        raise FactorizationFailure(
                            "basis entry (%d, %d) is not identically zero"
                            % (i, j))
                    continue
                e = _ival(kv[j], P) - lam
                if e:
                    basis_exps[i][j][pos] = e

    say("fixing units and cross-checking")

    def settle(exps: Dict[int, int], values: List[Rational]) -> CoordMonomial:
        unit = None
        for (frame, fvals), v in zip(tables._verify, values):
            mono = Rational(1)
            for pos, e in exps.items():
                mono = mono * fvals[pos] ** e
            u = v / mono
            if unit is None:
                unit = u
            elif unit != u:
                raise FactorizationFailure(
                    "coordinate is not a monomial in roots and quintics")
        root_exp = {pos: e for pos, e in exps.items() if pos < 36}
        quintic_exp = {TRIANGLE_ORDER[pos - 36]: e
                       for pos, e in exps.items() if pos >= 36}
        return CoordMonomial(unit, root_exp, quintic_exp).regroup(cov)

    verify_node_vals = {
        node: [tables.node_values(frame, node)
               for frame, _ in tables._verify]
        for node in graph.all_nodes()}
    verify_basis_vals = [tables.basis_values(frame)
                         for frame, _ in tables._verify]
    for node in graph.all_nodes():
        zset = set(graph.node_zero_triangles(node))
        row: List[Optional[CoordMonomial]] = []
        for j in range(45):
            if j in zset:
                row.append(None)
                continue
            vals = [vv[j] for vv in verify_node_vals[node]]
            row.append(settle(node_exps[node][j], vals))
        tables.nodes[node] = row
    for i in range(4):
        row = []
        for j in range(45):
            if basis_exps[i][j] is None:
                for vb in verify_basis_vals:
                    if vb[i][j] != 0:
                        raise FactorizationFailure(
                            "basis entry (%d, %d) is not identically zero"
                            % (i, j))
                row.append(None)
                continue
            vals = [vb[i][j] for vb in verify_basis_vals]
            row.append(settle(basis_exps[i][j], vals))
        tables.basis.append(row)
    say("node tables complete")
    return tables


# ---------------------------------------------------------------------------
# valuations over the non-apex cone representatives

#: scalar parameter attached to each pinned ray
_RAY_PARAM = {"a": "r1", "a2": "r2", "a3": "r3", "a4": "r4", "b": "r4p"}
_RAY_ORDER = ("a", "a2", "a3", "a4", "b")

#: cones where the leading representative of the extra-cross triangle picks
#: up a positive correction beyond its binomial estimate
_EPSILON_CONES = frozenset({"aa2a4", "aa4", "a2a4", "a4"})
#: Yoshida exponents of the cubed correction monomial; the correction is one
#: third of its valuation
_EPSILON_EXPONENTS = {5: 1, 18: 1, 19: 3, 20: 2, 22: 4, 24: 3, 28: 6, 31: 3,
                      17: -3, 21: -4, 23: -3, 25: -6, 26: -1, 27: -4, 30: -2}
#: cross whose triple needs the correction, and its estimate Yoshida
_EPSILON_CROSS = 15
_EPSILON_BASE_YOSHIDA = 32


class ConeRep:
    """A representative cone of the quotient fan, spanned by a subset of the
    five pinned rays, with one positive scalar parameter per ray."""

    __slots__ = ("label", "ray_names", "rays", "params")

    def __init__(self, label: str, ray_names: Tuple[str, ...],
                 rays: Sequence[Tuple[int, ...]]):
        self.label = label
        self.ray_names = ray_names
        self.rays = [tuple(r) for r in rays]
        self.params = tuple(_RAY_PARAM[n] for n in ray_names)

    def yoshida_form(self, k: int) -> LinearForm:
        """Valuation of Yoshida k as a linear form in the ray scalars."""
        return LinearForm(self.params, 0,
                          {p: r[k] for p, r in zip(self.params, self.rays)})

    def barycenter(self) -> Dict[str, int]:
        return {p: 1 for p in self.params}

    def __repr__(self):
        return "ConeRep(%s)" % self.label


def cone_representatives() -> Dict[str, ConeRep]:
    """The 23 non-apex cone representatives: the nonempty faces of the two
    pinned adjacent maximal cones."""
    from .bergman_naruki import _rep_basis
    a, a2, a3, a4, b = _rep_basis()
    vec = {"a": a, "a2": a2, "a3": a3, "a4": a4, "b": b}
    out: Dict[str, ConeRep] = {}
    for top in (("a", "a2", "a3", "a4"), ("a", "a2", "a3", "b")):
        for r in range(1, 5):
            for names in combinations(top, r):
                label = "".join(names)
                if label not in out:
                    out[label] = ConeRep(label, names,
                                         [vec[n] for n in names])
    assert len(out) == 23
    return out


class Undetermined(ValueError):
    """A Cross valuation cannot be pinned down on the given cone."""


class ConeValuations:
    """Valuations of the Yoshida and Cross functions on one cone.

    Every Yoshida valuation is a linear form in the ray scalars.  A Cross
    with a representation whose two Yoshidas differ on the cone has exact
    valuation the smaller of the two; an all-tied Cross inherits a value
    from an untied member of its triple through the cubed-ratio monomial
    when possible, and otherwise only a binomial estimate remains.
    """

    def __init__(self, cov: Covariants, cone: ConeRep):
        self.cov = cov
        self.cone = cone
        self._yos = [cone.yoshida_form(k) for k in range(40)]
        self._tied: List[bool] = []
        self._plain: List[LinearForm] = []
        for c in cov.crosses:
            mins = []
            commons = []
            for (s1, i, s2, j) in c.reps:
                fi, fj = self._yos[i], self._yos[j]
                rel = compare_forms(fi, fj)
                if rel == "equal":
                    commons.append(fi)
                elif rel == "incomparable":
                    raise Undetermined(
                        "representation of C%d is sign-mixed on %s"
                        % (c.index, cone.label))
                else:
                    mins.append(fi if rel == "less" else fj)
            if mins:
                first = mins[0]
                for m in mins[1:]:
                    if compare_forms(first, m) != "equal":
                        raise Undetermined(
                            "untied estimates of C%d disagree on %s"
                            % (c.index, cone.label))
                self._tied.append(False)
                self._plain.append(first)
            else:
                best = commons[0]
                for m in commons[1:]:
                    rel = compare_forms(best, m)
                    if rel == "less":
                        best = m
                    elif rel == "incomparable":
                        raise Undetermined(
                            "tied estimates of C%d incomparable on %s"
                            % (c.index, cone.label))
                self._tied.append(True)
                self._plain.append(best)
        self._expected: List[LinearForm] = []
        self._determined: List[bool] = []
        for k in range(135):
            form, det = self._settle(k)
            self._expected.append(form)
            self._determined.append(det)

    # -- cross bookkeeping ----------------------------------------------

    def tied(self, k: int) -> bool:
        return self._tied[k]

    def triple_of(self, k: int) -> Tuple[int, int, int]:
        return self.cov.quintics[self.cov.crosses[k].triangle].cross_indices

    def ratio_shift(self, k: int, m: int) -> LinearForm:
        """One third of the valuation of the Yoshida monomial (C_k/C_m)^3
        for two crosses of a common triangle."""
        ck, cm = self.cov.crosses[k], self.cov.crosses[m]
        assert ck.triangle == cm.triangle
        v = [0] * 36
        for r in ck.root_indices:
            v[r] += 3
        for r in cm.root_indices:
            v[r] -= 3
        x = self.cov._solve_yoshida(v)
        if x is None:
            raise Undetermined("cubed ratio C%d/C%d is not a Yoshida monomial"
                               % (k, m))
        form = LinearForm(self.cone.params)
        for y, e in x.items():
            form = form + Rational(e, 3) * self._yos[y]
        return form

    def _settle(self, k: int) -> Tuple[LinearForm, bool]:
        if not self._tied[k]:
            return self._plain[k], True
        triple = self.triple_of(k)
        if (self.cone.label in _EPSILON_CONES
                and _EPSILON_CROSS in triple):
            eps = LinearForm(self.cone.params)
            for y, e in _EPSILON_EXPONENTS.items():
                eps = eps + Rational(e, 3) * self._yos[y]
            base = self._yos[_EPSILON_BASE_YOSHIDA] + eps
            if k == _EPSILON_CROSS:
                return base, False
            return base + self.ratio_shift(k, _EPSILON_CROSS), False
        for m in triple:
            if not self._tied[m]:
                return self._plain[m] + self.ratio_shift(k, m), True
        return self._plain[k], False

    # -- public queries -------------------------------------------------

    def yoshida(self, k: int) -> LinearForm:
        return self._yos[k]

    def cross_expected(self, k: int) -> LinearForm:
        return self._expected[k]

    def cross_determined(self, k: int) -> bool:
        return self._determined[k]

    def monomial_form(self, cm: CoordMonomial) -> Tuple[LinearForm, bool]:
        """Expected valuation of a coordinate monomial and whether it is
        certain on the cone."""
        form = LinearForm(self.cone.params)
        det = True
        for y, e in cm.yoshida_exp.items():
            form = form + e * self._yos[y]
        for k, e in cm.cross_exp.items():
            form = form + e * self._expected[k]
            det = det and self._determined[k]
        return form, det


def compare_forms(a: LinearForm, b: LinearForm) -> str:
    from .exact_core import compare_over_cone
    return compare_over_cone(a, b)


_CONE_VALUATIONS: Dict[Tuple[int, str], ConeValuations] = {}


def cone_valuations(cov: Covariants, cone: ConeRep) -> ConeValuations:
    key = (id(cov), cone.label)
    got = _CONE_VALUATIONS.get(key)
    if got is None:
        got = ConeValuations(cov, cone)
        _CONE_VALUATIONS[key] = got
    return got


# ---------------------------------------------------------------------------
# ruling out extra lines: expected/true matrices and minor searches

#: sentinel for a matrix entry whose valuation cannot be certified
UNDET = object()


class RuleOutMatrices:
    """The expected and certain valuation matrices of the five boundary
    nodes in the link of a curve, evaluated at the cone barycenter.

    m_exp entries are rationals or None (infinity); m_true entries add the
    UNDET sentinel for coordinates with an uncertain Cross factor.
    """

    __slots__ = ("line", "cone", "nodes", "m_exp", "m_true")

    def __init__(self, line, cone, nodes, m_exp, m_true):
        self.line = line
        self.cone = cone
        self.nodes = nodes
        self.m_exp = m_exp
        self.m_true = m_true


def link_rows(graph: SchlafliGraph, line: str) -> List[frozenset]:
    """The five nodes opposite a curve, ordered by its pencil of triangles."""
    ts = sorted(graph.line_triangles[line], key=T_INDEX.get)
    return [frozenset(x for x in graph.triangle_lines[t] if x != line)
            for t in ts]


def build_rule_out_matrices(tables: NodeTables, vals: ConeValuations,
                            line: str) -> RuleOutMatrices:
    graph = tables.graph
    nodes = link_rows(graph, line)
    bary = vals.cone.barycenter()
    m_exp: List[List[Optional[Rational]]] = []
    m_true: List[List[object]] = []
    for node in nodes:
        row_exp: List[Optional[Rational]] = []
        row_true: List[object] = []
        for cm in tables.nodes[node]:
            if cm is None:
                row_exp.append(None)
                row_true.append(None)
                continue
            form, det = vals.monomial_form(cm)
            v = form.evaluate(bary)
            row_exp.append(v)
            row_true.append(v if det else UNDET)
        m_exp.append(row_exp)
        m_true.append(row_true)
    return RuleOutMatrices(line, vals.cone.label, nodes, m_exp, m_true)


def _trop_nonsingular(entries: List[List[Optional[Rational]]]) -> bool:
    best = None
    mult = 0
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1),
                 (2, 1, 0)):
        term = Rational(0)
        dead = False
        for i, j in enumerate(perm):
            x = entries[i][j]
            if x is None:
                dead = True
                break
            term += x
        if dead:
            continue
        if best is None or term < best:
            best, mult = term, 1
        elif term == best:
            mult += 1
    return best is not None and mult == 1


def rule_out_line(mats: RuleOutMatrices, J: Sequence[int]
                  ) -> Tuple[str, object]:
    """Search the column triples (lexicographically) for a certifying minor.

    Returns ("certificate", J') on success, else ("candidates", list of all
    column triples whose expected minor is tropically non-singular).
    """
    non_sing: List[Tuple[int, int, int]] = []
    for Jp in combinations(range(45), 3):
        sub = [[mats.m_exp[i][j] for j in Jp] for i in J]
        if not _trop_nonsingular(sub):
            continue
        non_sing.append(Jp)
        if all(mats.m_true[i][j] is not UNDET for i in J for j in Jp):
            return "certificate", Jp
    return "candidates", non_sing


def rule_out_search(mats: RuleOutMatrices
                    ) -> Tuple[Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]],
                               Dict[Tuple[int, ...], List[Tuple[int, ...]]]]:
    """Iterate the row triples lexicographically; return the first
    certificate (J, J') and the per-J candidate lists accumulated before
    (and including) the failing rows."""
    candidates: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = {}
    for J in combinations(range(5), 3):
        kind, payload = rule_out_line(mats, J)
        if kind == "certificate":
            return (J, payload), candidates
        candidates[J] = payload
    return None, candidates
