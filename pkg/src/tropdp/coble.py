"""Yoshida and Cross covariants, Eckardt quintics, and exponent lattices.

Yoshidas are degree-9 squarefree products of positive roots; Crosses are
signed differences of two Yoshidas factoring as four roots times an Eckardt
quintic.  The signed assignment of quintics to anticanonical triangles is
propagated from the det-M seed by the Weyl action and induces the signed
action on the scaled triangle variables.
"""
from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ._tables import CROSS_BINOMIALS, ROOTS, TRIANGLE_ORDER, YOSHIDA_ROOTS
from .e6_weyl import (S_INDEX, S_SYMBOLS, T_INDEX, T_SYMBOLS, WeylGroup,
                      apply_signed, positive_roots, s_perm_from_t_perm,
                      transposition_s_perm, transposition_t_perm)
from .exact_core import IntMatrix, MPoly, NonDivisor, Rational, solve_exponent_system


# Triangles whose quintic sign is flipped after BFS propagation from the seed;
# see Covariants._assign_quintics.
_QUINTIC_SIGN_FLIPS = frozenset(
    {"x56", "x63", "x64", "x65", "y142536", "y142635"})


class IdentityFailure(AssertionError):
    """A covariant table row failed its expansion check."""


class NonFactorable(ArithmeticError):
    """A polynomial does not factor into roots and Eckardt quintics."""


class Yoshida:
    __slots__ = ("index", "root_indices", "poly")

    def __init__(self, index: int, root_indices: Tuple[int, ...], poly: MPoly):
        self.index = index
        self.root_indices = root_indices
        self.poly = poly

    def __repr__(self) -> str:
        return "Y%d" % self.index


class Cross:
    """A Cross function with its four binomial representations.

    reps entries are (s1, i, s2, j) with poly == s1*Y_i + s2*Y_j.
    Factorization: poly == unit * (product of the four roots) * quintic,
    where quintic is the signed quintic attached to `triangle`.
    """

    __slots__ = ("index", "binomial", "poly", "reps", "root_indices",
                 "triangle", "unit")

    def __init__(self, index, binomial, poly):
        self.index = index
        self.binomial = binomial
        self.poly = poly
        self.reps: List[Tuple[int, int, int, int]] = []
        self.root_indices: Tuple[int, ...] = ()
        self.triangle: str = ""
        self.unit: Rational = Rational(1)

    def __repr__(self) -> str:
        return "C%d" % self.index


class EckardtQuintic:
    __slots__ = ("triangle", "poly", "cross_indices")

    def __init__(self, triangle: str, poly: MPoly, cross_indices: Tuple[int, ...]):
        self.triangle = triangle
        self.poly = poly
        self.cross_indices = cross_indices

    def __repr__(self) -> str:
        return "Q(%s)" % self.triangle


def det_m_seed() -> MPoly:
    """det of the 3x3 concurrency matrix for the lines through point pairs
    (1,5), (2,3), (4,6); the quintic attached to triangle y152346."""
    d = [MPoly.variable(i) for i in range(6)]

    def row(i, j):
        return (d[i] * d[j] * (d[i] + d[j]),
                d[i] * d[i] + d[i] * d[j] + d[j] * d[j],
                MPoly.const(1))

    m = [row(0, 4), row(1, 2), row(3, 5)]
    det = MPoly.zero()
    for sgn, (a, b, c) in (
            (1, (0, 1, 2)), (-1, (0, 2, 1)), (-1, (1, 0, 2)),
            (1, (1, 2, 0)), (1, (2, 0, 1)), (-1, (2, 1, 0))):
        det = det + MPoly.const(sgn) * (m[0][a] * m[1][b] * m[2][c])
    return det


def _canonical(poly: MPoly) -> Tuple[MPoly, int]:
    """Sign-normalize so the lex-leading coefficient is positive."""
    _, lc = poly.leading()
    if lc < 0:
        return -poly, -1
    return poly, 1


class Covariants:
    """The 40 Yoshidas, 135 Crosses, 45 quintics, and induced group actions."""

    def __init__(self, group: WeylGroup):
        self.group = group
        self.yoshidas: List[Yoshida] = []
        self.crosses: List[Cross] = []
        self.quintics: Dict[str, EckardtQuintic] = {}
        self.yoshida_matrix: Optional[IntMatrix] = None
        self._rep_lookup: Dict[Tuple[int, int], Tuple[int, List[Tuple[int, int, int, int]]]] = {}
        self._quintic_keys: Dict[frozenset, Tuple[str, int]] = {}

    # ------------------------------------------------------------------
    # construction

    def build(self) -> "Covariants":
        roots = positive_roots()
        self._build_yoshidas(roots)
        self._build_crosses(roots)
        self._build_representations()
        self._assign_quintics()
        self._register_group_actions()
        self.yoshida_matrix = IntMatrix([
            [1 if r in y.root_indices else 0 for r in range(36)]
            for y in self.yoshidas])
        return self

    def _build_yoshidas(self, roots):
        for k, idxs in enumerate(YOSHIDA_ROOTS):
            p = MPoly.const(1)
            for i in idxs:
                p = p * roots[i].poly
            self.yoshidas.append(Yoshida(k, tuple(idxs), p))

    def _build_crosses(self, roots):
        for k, ((s1, i1), (s2, i2)) in enumerate(CROSS_BINOMIALS):
            poly = s1 * self.yoshidas[i1].poly + s2 * self.yoshidas[i2].poly
            self.crosses.append(Cross(k, ((s1, i1), (s2, i2)), poly))
        # factor each Cross as four roots times a quintic
        for c in self.crosses:
            rem = c.poly
            divs = []
            for r in roots:
                try:
                    rem = rem.exact_div(r.poly)
                except NonDivisor:
                    continue
                divs.append(r.index)
            if len(divs) != 4 or rem.degree() != 5:
                raise IdentityFailure("C%d does not factor as 4 roots x quintic"
                                      % c.index)
            c.root_indices = tuple(divs)
            c.triangle = TRIANGLE_ORDER[c.index // 3]
            canon, sgn = _canonical(rem)
            key = frozenset(canon.terms.items())
            got = self._quintic_keys.get(key)
            if got is None:
                self._quintic_keys[key] = (c.triangle, 0)  # sign fixed later
            elif got[0] != c.triangle:
                raise IdentityFailure(
                    "quintic of C%d straddles two triangles" % c.index)
            c.unit = Rational(sgn)  # relative to the canonical quintic
        if len(self._quintic_keys) != 45:
            raise IdentityFailure("expected 45 distinct quintics")

    def _build_representations(self):
        keyed = {}
        for c in self.crosses:
            canon, sgn = _canonical(c.poly)
            keyed[frozenset(canon.terms.items())] = (c.index, sgn)
        for i in range(40):
            for j in range(i + 1, 40):
                for s2 in (1, -1):
                    comb = self.yoshidas[i].poly + s2 * self.yoshidas[j].poly
                    canon, sgn = _canonical(comb)
                    got = keyed.get(frozenset(canon.terms.items()))
                    if got is None:
                        continue
                    k, csgn = got
                    # crosses[k].poly == (csgn*sgn) * (Y_i + s2*Y_j)
                    s = csgn * sgn
                    self.crosses[k].reps.append((s, i, s * s2, j))
        for c in self.crosses:
            if len(c.reps) != 4:
                raise IdentityFailure("C%d has %d binomial representations"
                                      % (c.index, len(c.reps)))
            for r in c.reps:
                key = tuple(sorted((r[1], r[3])))
                self._rep_lookup.setdefault(key, []).append((c.index, r))

    def _canonical_quintic(self, triangle: str) -> MPoly:
        for key, (t, _) in self._quintic_keys.items():
            if t == triangle:
                p = MPoly()
                p.terms = dict(key)
                return p
        raise KeyError(triangle)

    def _assign_quintics(self):
        """Signed triangle <-> quintic bijection, seeded at y152346 = det M and
        propagated by the generators; also derives the sixth generator's
        triangle permutation."""
        canon = {t: self._canonical_quintic(t) for t in T_SYMBOLS}
        canon_key = {frozenset(p.terms.items()): t for t, p in canon.items()}
        # seed: the quintic of y152346 is minus the concurrency determinant,
        # pinned by the Cross coefficients of the linear trinomial seed
        seed_poly = -det_m_seed()
        sc, ss = _canonical(seed_poly)
        if frozenset(sc.terms.items()) != frozenset(canon["y152346"].terms.items()):
            raise IdentityFailure("det M is not the quintic of y152346")
        signs: Dict[str, int] = {"y152346": ss}
        gen_subs = [self.group.substitution_images(g) for g in self.group.gen_ids]
        self.gen_t_perms: List[List[int]] = [[0] * 45 for _ in range(6)]
        frontier = ["y152346"]
        seen_edges = set()
        while frontier:
            nxt = []
            for t in frontier:
                qt = canon[t] * signs[t]
                for gi, subs in enumerate(gen_subs):
                    img = qt.substitute(subs)
                    ic, isgn = _canonical(img)
                    t2 = canon_key[frozenset(ic.terms.items())]
                    if t2 not in signs:
                        signs[t2] = isgn
                        nxt.append(t2)
                    eps = isgn * signs[t2]
                    entry = eps * (T_INDEX[t2] + 1)
                    prev = self.gen_t_perms[gi][T_INDEX[t]]
                    if prev and prev != entry:
                        raise IdentityFailure(
                            "inconsistent quintic sign propagation at %s" % t)
                    self.gen_t_perms[gi][T_INDEX[t]] = entry
                    seen_edges.add((T_INDEX[t], gi))
            frontier = nxt
        if len(signs) != 45 or any(0 in row for row in self.gen_t_perms):
            raise IdentityFailure("quintic orbit did not cover all triangles")
        # The propagation pins quintic signs along a BFS tree; the remaining
        # freedom is an independent sign per triangle (flipping Q_t rescales the
        # three crosses over t and conjugates the signed T-action by the flip).
        # Normalize so that the fourth generator acts with all positive signs
        # and the sixth exchanges x_5i/x_6i coordinates positively except at
        # x63; this forces the six flips below.
        for t in _QUINTIC_SIGN_FLIPS:
            signs[t] = -signs[t]
        for row in self.gen_t_perms:
            for i, e in enumerate(row):
                g = -1 if T_SYMBOLS[i] in _QUINTIC_SIGN_FLIPS else 1
                g2 = -1 if T_SYMBOLS[abs(e) - 1] in _QUINTIC_SIGN_FLIPS else 1
                row[i] = e * g * g2
        for t in T_SYMBOLS:
            triple_n = None
            for n, tt in enumerate(TRIANGLE_ORDER):
                if tt == t:
                    triple_n = n
                    break
            poly = canon[t] * signs[t]
            self.quintics[t] = EckardtQuintic(
                t, poly, (3 * triple_n, 3 * triple_n + 1, 3 * triple_n + 2))
        # rescale each Cross's unit to refer to the signed quintic
        for c in self.crosses:
            c.unit = c.unit * signs[c.triangle]

    def _register_group_actions(self):
        g = self.group
        g.register_yoshida_action()
        yos_gens = [g.yoshida_perm_from_roots(e) for e in g.gen_ids]
        cross_gens = []
        for p in yos_gens:
            cross_gens.append(tuple(self._cross_image(p, k) for k in range(135)))
        g.register_action("cross", cross_gens)
        g.register_action("T_vars", [tuple(row) for row in self.gen_t_perms])
        t_unsigned = [tuple(abs(e) - 1 for e in row) for row in self.gen_t_perms]
        g.register_action("marking_t",
                          [tuple(x + 1 for x in row) for row in t_unsigned])
        s_gens = [tuple(x + 1 for x in s_perm_from_t_perm(row))
                  for row in t_unsigned]
        # subscript transpositions must agree with the incidence derivation
        for gi, (a, b) in enumerate([(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]):
            expect = tuple(x + 1 for x in transposition_s_perm(a, b))
            if s_gens[gi] != expect:
                raise IdentityFailure("line action of generator %d" % (gi + 1))
            expect_t = tuple(transposition_t_perm(a, b))
            if t_unsigned[gi] != expect_t:
                raise IdentityFailure("triangle action of generator %d" % (gi + 1))
        g.register_action("marking_s", s_gens)

    def _cross_image(self, yos_perm: Sequence[int], k: int) -> int:
        (s1, i1), (s2, i2) = self.crosses[k].binomial
        j1, e1 = apply_signed(yos_perm, i1)
        j2, e2 = apply_signed(yos_perm, i2)
        # image polynomial: s1*e1*Y_j1 + s2*e2*Y_j2
        for m, (u1, a, u2, b) in self._rep_lookup[tuple(sorted((j1, j2)))]:
            if a == j1 and b == j2 and (s1 * e1) * u2 == (s2 * e2) * u1:
                return ((s1 * e1) // u1) * (m + 1)
            if a == j2 and b == j1 and (s2 * e2) * u2 == (s1 * e1) * u1:
                return ((s2 * e2) // u1) * (m + 1)
        raise IdentityFailure("cross image lookup failed for C%d" % k)

    # ------------------------------------------------------------------
    # queries

    def cross_representations(self, k: int) -> List[Tuple[int, int, int, int]]:
        """The four (s1, i, s2, j) with C_k == s1*Y_i + s2*Y_j."""
        return list(self.crosses[k].reps)

    def quintic_of_triple(self, n: int) -> EckardtQuintic:
        return self.quintics[TRIANGLE_ORDER[n]]

    # ------------------------------------------------------------------
    # factorization into roots and quintics

    def factor_into_roots_and_quintics(
            self, num: MPoly, den: Optional[MPoly] = None
    ) -> Tuple[Rational, Dict[int, int], Dict[str, int]]:
        """Write num/den as unit * prod root^a * prod quintic^b.

        Returns (unit, {root index: exponent}, {triangle: exponent}).
        Raises NonFactorable if a nonconstant remainder survives.
        """
        roots = positive_roots()
        re: Dict[int, int] = {}
        qe: Dict[str, int] = {}
        unit = Rational(1)
        for poly, sgn in ((num, 1), (den, -1)) if den is not None else ((num, 1),):
            rem = poly
            progress = True
            while rem.degree() > 0 and progress:
                progress = False
                for r in roots:
                    while True:
                        try:
                            rem = rem.exact_div(r.poly)
                        except NonDivisor:
                            break
                        re[r.index] = re.get(r.index, 0) + sgn
                        progress = True
                if rem.degree() >= 5:
                    for t, q in self.quintics.items():
                        while True:
                            try:
                                rem = rem.exact_div(q.poly)
                            except NonDivisor:
                                break
                            qe[t] = qe.get(t, 0) + sgn
                            progress = True
            if rem.degree() != 0:
                raise NonFactorable("nonconstant remainder of degree %d"
                                    % rem.degree())
            c = rem.terms[(0,) * 6]
            unit = unit * (c if sgn > 0 else 1 / c)
        re = {k: v for k, v in re.items() if v}
        qe = {k: v for k, v in qe.items() if v}
        return unit, re, qe

    # ------------------------------------------------------------------
    # Yoshida/Cross Laurent monomials

    #: preferred lattice-basis rows of the Yoshida matrix
    LATTICE_BASIS_ROWS: Tuple[int, ...] = (5,) + tuple(range(17, 32))

    def as_yoshida_cross_monomial(
            self, unit: Rational, root_exp: Dict[int, int],
            quintic_exp: Dict[str, int]
    ) -> Optional[Tuple[Rational, Dict[int, int], Dict[int, int], str]]:
        """Regroup a root/quintic factorization as a Laurent monomial in
        Yoshidas and Crosses.

        Each quintic is absorbed into one of the three Crosses containing it;
        the residual root vector is solved over the Yoshida row lattice.  All
        absorption choices are tried for a direct solution before falling
        back to the cube.  Returns (unit, {cross: exp}, {yoshida: exp},
        flag in {"direct", "cubed"}) or None.
        """
        choices: List[List[Tuple[int, int]]] = []
        for t, b in sorted(quintic_exp.items()):
            choices.append([(k, b) for k in self.quintics[t].cross_indices])
        combos: List[Dict[int, int]] = []

        def expand(pos: int, cross_e: Dict[int, int]):
            if pos == len(choices):
                combos.append(dict(cross_e))
                return
            for k, b in choices[pos]:
                ce = dict(cross_e)
                ce[k] = ce.get(k, 0) + b
                expand(pos + 1, ce)

        expand(0, {})

        def residual(cross_e: Dict[int, int]) -> Tuple[Rational, List[int]]:
            resid = dict(root_exp)
            u = unit
            for k, b in cross_e.items():
                c = self.crosses[k]
                for r in c.root_indices:
                    resid[r] = resid.get(r, 0) - b
                u = u / (c.unit ** b if b >= 0 else 1 / (c.unit ** -b))
            return u, [resid.get(r, 0) for r in range(36)]

        for cross_e in combos:
            u, v = residual(cross_e)
            x = self._solve_yoshida(v)
            if x is not None:
                return (u, cross_e, x, "direct")
        for cross_e in combos:
            u, v = residual(cross_e)
            x = self._solve_yoshida([3 * z for z in v])
            if x is not None:
                # report the cube: f^3 == unit * prod C^e * prod Y^x
                return (u ** 3, {k: 3 * b for k, b in cross_e.items()},
                        x, "cubed")
        return None

    def _solve_yoshida(self, v: Sequence[int]) -> Optional[Dict[int, int]]:
        rows = [list(self.yoshida_matrix.rows[i]) for i in self.LATTICE_BASIS_ROWS]
        x = solve_exponent_system(IntMatrix(rows), v)
        if x is not None:
            return {self.LATTICE_BASIS_ROWS[i]: e
                    for i, e in enumerate(x) if e}
        x = solve_exponent_system(self.yoshida_matrix, v)
        if x is not None:
            return {i: e for i, e in enumerate(x) if e}
        return None

    # ------------------------------------------------------------------
    # relevant Cross sets

    #: triple indices whose leading Cross is replaced by a non-leading one
    _R0_EXCLUDED = (5, 9, 12, 13, 24, 25, 32, 36)
    _R0_EXTRA = (28, 37, 41, 73, 76, 97, 110)
    #: the printed index range for the excluded set reads one past the triple
    #: count; the artifact enforces |R0| = 44 and flags the discrepancy
    R0_RANGE_FLAG = "printed range {0..45} exceeds the 45 triples (0..44)"

    def relevant_cross_sets(self) -> Tuple[List[int], Dict[int, str]]:
        """(R0: 44 cross indices, R: cross index -> triangle, 45 entries)."""
        r0 = [3 * i for i in range(45) if i not in self._R0_EXCLUDED]
        r0 += list(self._R0_EXTRA)
        r0.sort()
        assert len(r0) == 44
        r = {k: TRIANGLE_ORDER[k // 3] for k in r0}
        r[15] = TRIANGLE_ORDER[5]
        assert len(r) == 45
        assert sorted(r.values()) == sorted(T_SYMBOLS)
        return r0, r

    # ------------------------------------------------------------------
    # persistence

    def to_json(self) -> dict:
        return {
            "version": 1,
            "yoshidas": [list(y.root_indices) for y in self.yoshidas],
            "crosses": [{
                "binomial": [list(c.binomial[0]), list(c.binomial[1])],
                "reps": [list(r) for r in c.reps],
                "roots": list(c.root_indices),
                "triangle": c.triangle,
                "unit": str(c.unit),
            } for c in self.crosses],
            "triangles": [{
                "symbol": t,
                "cross_triple": list(self.quintics[t].cross_indices),
            } for t in T_SYMBOLS],
        }

    def save(self, path: str):
        with open(path, "w") as f:
            json.dump(self.to_json(), f, sort_keys=True, indent=0)


_COVARIANTS: Optional[Covariants] = None


def build_covariants(group: Optional[WeylGroup] = None,
                     cache_path: Optional[str] = None) -> Covariants:
    """Build (or return the cached) covariant family."""
    global _COVARIANTS
    if _COVARIANTS is not None:
        return _COVARIANTS
    if group is None:
        from .e6_weyl import generate_group
        group = generate_group()
    _COVARIANTS = Covariants(group).build()
    if cache_path:
        os.makedirs(os.path.dirname(cache_path) or ".", exist_ok=True)
        _COVARIANTS.save(cache_path)
    return _COVARIANTS
