"""E6 root system on the d-basis and the Weyl group W(E6).

The 36 positive roots are fixed linear forms in d1..d6.  Group elements are
6x6 rational matrices acting by substitution; each is keyed by its signed
permutation of the positive roots.  Induced signed permutations on Yoshida
indices, markings, and triangle variables are cached per element.
"""
from __future__ import annotations

import os
import struct
from array import array
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from ._tables import ROOTS, YOSHIDA_ROOTS, TRIANGLE_ORDER
from .exact_core import MPoly

N_ROOTS = 36

# ---------------------------------------------------------------------------
# roots and the bilinear form


class Root:
    """A positive root: index, coefficient 6-tuple, and linear polynomial."""

    __slots__ = ("index", "coeffs", "poly")

    def __init__(self, index: int, coeffs: Tuple[int, ...]):
        self.index = index
        self.coeffs = coeffs
        self.poly = MPoly.linear(coeffs)

    def __repr__(self) -> str:
        return "r%d" % self.index


_POSITIVE_ROOTS: Optional[Tuple[Root, ...]] = None


def positive_roots() -> Tuple[Root, ...]:
    """The 36 positive roots r0..r35 in table order."""
    global _POSITIVE_ROOTS
    if _POSITIVE_ROOTS is None:
        _POSITIVE_ROOTS = tuple(Root(i, c) for i, c in enumerate(ROOTS))
    return _POSITIVE_ROOTS


def root_pairing(c1: Sequence, c2: Sequence) -> Fraction:
    """Bilinear form with d_i.d_j = 8/9 on the diagonal and -1/9 off it."""
    dot = sum(Fraction(a) * Fraction(b) for a, b in zip(c1, c2))
    return dot - Fraction(sum(c1)) * Fraction(sum(c2)) / 9


# ---------------------------------------------------------------------------
# generators

def _transposition_matrix(i: int, j: int) -> Tuple[Tuple[Fraction, ...], ...]:
    m = [[Fraction(int(r == c)) for c in range(6)] for r in range(6)]
    m[i][i] = m[j][j] = Fraction(0)
    m[i][j] = m[j][i] = Fraction(1)
    return tuple(tuple(r) for r in m)


_SIGMA6 = tuple(tuple(Fraction(x, 3) for x in row) for row in (
    (3, 0, 0, 1, 1, 1),
    (0, 3, 0, 1, 1, 1),
    (0, 0, 3, 1, 1, 1),
    (0, 0, 0, 1, -2, -2),
    (0, 0, 0, -2, 1, -2),
    (0, 0, 0, -2, -2, 1),
))

#: sigma1..sigma5 transpose adjacent subscripts; sigma6 is the special matrix.
GENERATOR_MATRICES: Tuple[Tuple[Tuple[Fraction, ...], ...], ...] = (
    _transposition_matrix(0, 1),
    _transposition_matrix(1, 2),
    _transposition_matrix(2, 3),
    _transposition_matrix(3, 4),
    _transposition_matrix(4, 5),
    _SIGMA6,
)

_ROOT_INDEX: Dict[Tuple[Fraction, ...], int] = {}
for _i, _c in enumerate(ROOTS):
    _ROOT_INDEX[tuple(Fraction(x) for x in _c)] = _i + 1
    _ROOT_INDEX[tuple(Fraction(-x) for x in _c)] = -(_i + 1)


def signed_root_perm(matrix: Sequence[Sequence[Fraction]]) -> Tuple[int, ...]:
    """Signed permutation induced on root coefficient vectors c -> M^T c.

    Entries are s*(i+1): root i maps to sign s times root |entry|-1.
    Raises ValueError if some image is not +-(a positive root).
    """
    out = []
    for c in ROOTS:
        img = tuple(sum(Fraction(c[i]) * matrix[i][j] for i in range(6))
                    for j in range(6))
        code = _ROOT_INDEX.get(img)
        if code is None:
            raise ValueError("matrix does not permute the roots")
        out.append(code)
    return tuple(out)


def compose_signed(p: Sequence[int], q: Sequence[int]) -> Tuple[int, ...]:
    """Apply p, then q, on signed indices (entries s*(i+1))."""
    out = []
    for e in p:
        f = q[abs(e) - 1]
        out.append(f if e > 0 else -f)
    return tuple(out)


def apply_signed(p: Sequence[int], i: int) -> Tuple[int, int]:
    """Image (index, sign) of unsigned index i under signed permutation p."""
    e = p[i]
    return (abs(e) - 1, 1 if e > 0 else -1)


# ---------------------------------------------------------------------------
# marking symbols

S_SYMBOLS: Tuple[str, ...] = tuple(
    ["E%d" % i for i in range(1, 7)]
    + ["F%d%d" % (i, j) for i in range(1, 7) for j in range(i + 1, 7)]
    + ["G%d" % i for i in range(1, 7)])
S_INDEX = {s: i for i, s in enumerate(S_SYMBOLS)}

#: canonical order of the 45 triangle symbols (the Cross-triple order)
T_SYMBOLS: Tuple[str, ...] = tuple(TRIANGLE_ORDER)
T_INDEX = {t: i for i, t in enumerate(T_SYMBOLS)}


def normalize_y(pairs: Iterable[Tuple[int, int]]) -> str:
    """Canonical y-symbol of a tripartition of {1..6} into pairs."""
    ps = sorted(tuple(sorted(p)) for p in pairs)
    return "y" + "".join("%d%d" % p for p in ps)


def triangle_lines(t: str) -> Tuple[str, ...]:
    """The three exceptional curves in an anticanonical triangle."""
    if t[0] == "x":
        i, j = int(t[1]), int(t[2])
        return ("E%d" % i, "F%s" % "".join(map(str, sorted((i, j)))), "G%d" % j)
    digits = [int(c) for c in t[1:]]
    return tuple("F%d%d" % tuple(sorted(digits[k:k + 2])) for k in (0, 2, 4))


_LINE_TRIANGLES: Dict[str, Tuple[str, ...]] = {}
for _t in T_SYMBOLS:
    for _s in triangle_lines(_t):
        _LINE_TRIANGLES.setdefault(_s, ())
for _t in T_SYMBOLS:
    for _s in triangle_lines(_t):
        _LINE_TRIANGLES[_s] += (_t,)


def line_triangles(s: str) -> Tuple[str, ...]:
    """The five anticanonical triangles containing an exceptional curve."""
    return _LINE_TRIANGLES[s]


def _apply_subscripts(sym: str, perm: Dict[int, int]) -> str:
    if sym[0] == "E" or sym[0] == "G":
        return sym[0] + str(perm.get(int(sym[1]), int(sym[1])))
    if sym[0] == "F":
        i, j = sorted(perm.get(int(c), int(c)) for c in sym[1:])
        return "F%d%d" % (i, j)
    if sym[0] == "x":
        return "x%d%d" % (perm.get(int(sym[1]), int(sym[1])),
                          perm.get(int(sym[2]), int(sym[2])))
    digits = [perm.get(int(c), int(c)) for c in sym[1:]]
    return normalize_y([(digits[k], digits[k + 1]) for k in (0, 2, 4)])


def transposition_s_perm(a: int, b: int) -> Tuple[int, ...]:
    """Unsigned permutation of S_SYMBOLS swapping subscripts a and b."""
    perm = {a: b, b: a}
    return tuple(S_INDEX[_apply_subscripts(s, perm)] for s in S_SYMBOLS)


def transposition_t_perm(a: int, b: int) -> Tuple[int, ...]:
    """Unsigned permutation of T_SYMBOLS swapping subscripts a and b."""
    perm = {a: b, b: a}
    return tuple(T_INDEX[_apply_subscripts(t, perm)] for t in T_SYMBOLS)


def s_perm_from_t_perm(t_perm: Sequence[int]) -> Tuple[int, ...]:
    """Derive the line permutation from a triangle permutation via incidence.

    The image of a line is the unique line lying in the images of all five
    triangles that contain it.
    """
    out = []
    for s in S_SYMBOLS:
        imgs = [T_SYMBOLS[t_perm[T_INDEX[t]]] for t in line_triangles(s)]
        common = set(triangle_lines(imgs[0]))
        for t in imgs[1:]:
            common &= set(triangle_lines(t))
        if len(common) != 1:
            raise ValueError("triangle permutation is not line-induced")
        out.append(S_INDEX[common.pop()])
    return tuple(out)


# ---------------------------------------------------------------------------
# the Weyl group

_CACHE_MAGIC = b"TDPW"
_CACHE_VERSION = 2


class WeylGroup:
    """W(E6), fully materialized, keyed by signed root permutations.

    Elements are integers 0..order-1; index 0 is the identity.  Each
    non-identity element records a parent and generator with
    perm = compose(perm[parent], generator_perm), so induced actions extend
    from generator data by one composition per element.
    """

    def __init__(self):
        self.perms: List[Tuple[int, ...]] = []
        self.index: Dict[Tuple[int, ...], int] = {}
        self.parent = array("i")
        self.genof = array("b")
        self.gen_ids: List[int] = []
        self._induced: Dict[str, List[Tuple[int, ...]]] = {}
        self._gen_actions: Dict[str, List[Tuple[int, ...]]] = {}

    # -- construction

    @classmethod
    def build(cls) -> "WeylGroup":
        g = cls()
        identity = tuple(i + 1 for i in range(N_ROOTS))
        g.perms.append(identity)
        g.index[identity] = 0
        g.parent.append(-1)
        g.genof.append(-1)
        gen_perms = [signed_root_perm(m) for m in GENERATOR_MATRICES]
        frontier = [0]
        while frontier:
            nxt = []
            for ei in frontier:
                p = g.perms[ei]
                for gi, q in enumerate(gen_perms):
                    new = compose_signed(p, q)
                    if new not in g.index:
                        g.index[new] = len(g.perms)
                        g.perms.append(new)
                        g.parent.append(ei)
                        g.genof.append(gi)
                        nxt.append(g.index[new])
            frontier = nxt
        g.gen_ids = [g.index[q] for q in gen_perms]
        return g

    @property
    def order(self) -> int:
        return len(self.perms)

    def root_perm(self, i: int) -> Tuple[int, ...]:
        return self.perms[i]

    def element_index(self, perm: Tuple[int, ...]) -> int:
        return self.index[perm]

    def multiply(self, a: int, b: int) -> int:
        """Index of the element acting as a first, then b."""
        return self.index[compose_signed(self.perms[a], self.perms[b])]

    def inverse(self, a: int) -> int:
        p = self.perms[a]
        inv = [0] * N_ROOTS
        for i, e in enumerate(p):
            j = abs(e) - 1
            inv[j] = (i + 1) if e > 0 else -(i + 1)
        return self.index[tuple(inv)]

    def word(self, i: int) -> List[int]:
        """Generator indices applied left to right."""
        out: List[int] = []
        while i != 0:
            out.append(self.genof[i])
            i = self.parent[i]
        out.reverse()
        return out

    def matrix(self, i: int) -> Tuple[Tuple[Fraction, ...], ...]:
        """6x6 matrix: the element substitutes d_i -> sum_j M[i][j] d_j."""
        m = [[Fraction(int(r == c)) for c in range(6)] for r in range(6)]
        for gi in self.word(i):
            gm = GENERATOR_MATRICES[gi]
            m = [[sum(m[r][k] * gm[k][c] for k in range(6)) for c in range(6)]
                 for r in range(6)]
        return tuple(tuple(r) for r in m)

    def substitution_images(self, i: int) -> List[MPoly]:
        m = self.matrix(i)
        return [MPoly.linear(row) for row in m]

    # -- induced actions

    def register_action(self, family: str,
                        generator_actions: Sequence[Sequence[int]]):
        """Register signed (or unsigned, encoded i+1) generator permutations
        for a family; per-element caches extend lazily."""
        self._gen_actions[family] = [tuple(a) for a in generator_actions]
        self._induced.pop(family, None)

    def _build_induced(self, family: str) -> List[Tuple[int, ...]]:
        got = self._induced.get(family)
        if got is not None:
            return got
        gens = self._gen_actions[family]
        n = len(gens[0])
        acts: List[Optional[Tuple[int, ...]]] = [None] * self.order
        acts[0] = tuple(range(1, n + 1))
        for i in range(1, self.order):
            acts[i] = compose_signed(acts[self.parent[i]], gens[self.genof[i]])
        self._induced[family] = acts  # type: ignore[assignment]
        return acts  # type: ignore[return-value]

    def action(self, i: int, family: str) -> Tuple[int, ...]:
        """Signed permutation of element i on the named family."""
        if family == "roots":
            return self.perms[i]
        return self._build_induced(family)[i]

    def induced_signed_action(self, i: int, family: str) -> Tuple[int, ...]:
        """Signed permutation of element i on a registered family.

        Families "yoshida", "cross", "marking_s", "marking_t" and "T_vars"
        become available once the covariant tables register their generator
        actions; "roots" is always available.
        """
        return self.action(i, family)

    def family_orbit(self, seed: int, family: str):
        """Orbit of an index under the unsigned action on a family, with
        transporters; indices are 0-based."""

        def step(gi: int, x: int) -> int:
            return abs(self._gen_actions[family][gi][x]) - 1 \
                if family != "roots" else abs(self.perms[self.gen_ids[gi]][x]) - 1

        return self.orbit(seed, step)

    def yoshida_perm_from_roots(self, i: int) -> Tuple[int, ...]:
        """Signed Yoshida permutation computed directly from the root action."""
        p = self.perms[i]
        setidx = {frozenset(s): k for k, s in enumerate(YOSHIDA_ROOTS)}
        out = []
        for s in YOSHIDA_ROOTS:
            sign = 1
            img = []
            for r in s:
                e = p[r]
                img.append(abs(e) - 1)
                if e < 0:
                    sign = -sign
            out.append(sign * (setidx[frozenset(img)] + 1))
        return tuple(out)

    def register_yoshida_action(self):
        self.register_action(
            "yoshida", [self.yoshida_perm_from_roots(g) for g in self.gen_ids])

    # -- orbits

    def orbit(self, seed, apply_gen: Callable[[int, object], object]):
        """Orbit of seed under the 6 generators with transporter elements.

        apply_gen(generator_number, x) -> image.  Returns dict
        member -> group element index sending seed to member.
        """
        transporter = {seed: 0}
        frontier = [seed]
        while frontier:
            nxt = []
            for x in frontier:
                w = transporter[x]
                for gi, g in enumerate(self.gen_ids):
                    y = apply_gen(gi, x)
                    if y not in transporter:
                        transporter[y] = self.multiply(w, g)
                        nxt.append(y)
            frontier = nxt
        return transporter

    # -- persistence

    def save(self, path: str):
        with open(path, "wb") as f:
            f.write(_CACHE_MAGIC)
            f.write(struct.pack("<HI", _CACHE_VERSION, self.order))
            flat = array("h")
            for p in self.perms:
                flat.extend(p)
            if os.sys.byteorder == "big":  # pragma: no cover
                flat.byteswap()
            f.write(flat.tobytes())
            par = array("i", self.parent)
            gen = array("b", self.genof)
            if os.sys.byteorder == "big":  # pragma: no cover
                par.byteswap()
            f.write(par.tobytes())
            f.write(gen.tobytes())

    @classmethod
    def load(cls, path: str) -> "WeylGroup":
        with open(path, "rb") as f:
            if f.read(4) != _CACHE_MAGIC:
                raise ValueError("bad cache file")
            version, n = struct.unpack("<HI", f.read(6))
            if version != _CACHE_VERSION:
                raise ValueError("cache version mismatch")
            flat = array("h")
            flat.frombytes(f.read(2 * N_ROOTS * n))
            par = array("i")
            par.frombytes(f.read(4 * n))
            gen = array("b")
            gen.frombytes(f.read(n))
            if os.sys.byteorder == "big":  # pragma: no cover
                flat.byteswap()
                par.byteswap()
        g = cls()
        g.perms = [tuple(flat[i * N_ROOTS:(i + 1) * N_ROOTS]) for i in range(n)]
        g.index = {p: i for i, p in enumerate(g.perms)}
        g.parent = par
        g.genof = gen
        gen_perms = [signed_root_perm(m) for m in GENERATOR_MATRICES]
        g.gen_ids = [g.index[q] for q in gen_perms]
        return g


_GROUP: Optional[WeylGroup] = None


def generate_group(cache_path: Optional[str] = None) -> WeylGroup:
    """The full Weyl group, loaded from cache when possible."""
    global _GROUP
    if _GROUP is not None:
        return _GROUP
    if cache_path and os.path.exists(cache_path):
        try:
            _GROUP = WeylGroup.load(cache_path)
            return _GROUP
        except ValueError:
            pass
    _GROUP = WeylGroup.build()
    if cache_path:
        os.makedirs(os.path.dirname(cache_path) or ".", exist_ok=True)
        _GROUP.save(cache_path)
    return _GROUP
