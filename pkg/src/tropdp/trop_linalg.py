"""Min-plus linear algebra over extended scalars and metric trees.

Scalars live in the value ring (Rational or LinearForm) extended by
infinity; addition is min, multiplication is +.  On top of the scalar
layer the module provides tropical permanents, the 3x3-minor collinearity
test, column projection/lifting for points with repeated directions at
infinity, reconstruction of a generic tropical line from its points at
infinity, and lattice lengths of tree edges.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from typing import (Dict, FrozenSet, Iterable, List, Optional, Sequence,
                    Tuple, Union)

from .exact_core import (IncomparableForms, LinearForm, Rational,
                         compare_over_cone)

Value = Union[Rational, LinearForm]


class PreconditionViolated(ValueError):
    """Input breaks a documented precondition."""


class InconsistentColumns(ValueError):
    """Columns sharing an infinity row are not projectively equal."""


class NoAdjacencySolution(ValueError):
    """No vertex-adjacency system solves: the input is not collinear."""


class NotAnEdge(ValueError):
    """The two directed vertices cannot bound a common edge."""


# ---------------------------------------------------------------------------
# value-ring helpers (None encodes infinity)


def _as_value(x) -> Optional[Value]:
    if x is None or (isinstance(x, float) and x == float("inf")):
        return None
    if isinstance(x, TropScalar):
        return x.value
    if isinstance(x, LinearForm):
        return x
    return Rational(x)


def _cmp_values(a: Value, b: Value) -> int:
    """Order two finite values; -1, 0 or 1."""
    if isinstance(a, LinearForm) or isinstance(b, LinearForm):
        if not isinstance(a, LinearForm):
            a = LinearForm.constant(b.params, a)
        if not isinstance(b, LinearForm):
            b = LinearForm.constant(a.params, b)
        rel = compare_over_cone(a, b)
        if rel == "incomparable":
            raise IncomparableForms(
                "cannot order %r against %r over the open cone" % (a, b))
        return {"less": -1, "equal": 0, "greater": 1}[rel]
    return (a > b) - (a < b)


def _sign(a: Value) -> int:
    return _cmp_values(a, Rational(0))


def _is_zero(a: Value) -> bool:
    if isinstance(a, LinearForm):
        return a.is_zero()
    return a == 0


def _min_value(values: Iterable[Value]) -> Value:
    best = None
    for v in values:
        if best is None or _cmp_values(v, best) < 0:
            best = v
    if best is None:
        raise ValueError("empty minimum")
    return best


class TropScalar:
    """Element of the tropical semiring over the value ring plus infinity.

    Addition is min, multiplication is classical +; infinity is the
    additive identity and absorbs multiplication.
    """

    __slots__ = ("value",)

    def __init__(self, value=None):
        self.value = _as_value(value)

    @staticmethod
    def inf() -> "TropScalar":
        return TropScalar(None)

    @property
    def is_inf(self) -> bool:
        return self.value is None

    def __add__(self, other) -> "TropScalar":
        other = other if isinstance(other, TropScalar) else TropScalar(other)
        if self.is_inf:
            return other
        if other.is_inf:
            return self
        return self if _cmp_values(self.value, other.value) <= 0 else other

    __radd__ = __add__

    def __mul__(self, other) -> "TropScalar":
        other = other if isinstance(other, TropScalar) else TropScalar(other)
        if self.is_inf or other.is_inf:
            return TropScalar(None)
        return TropScalar(self.value + other.value)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        other = other if isinstance(other, TropScalar) else TropScalar(other)
        if self.is_inf or other.is_inf:
            return self.is_inf and other.is_inf
        return _cmp_values(self.value, other.value) == 0

    def __lt__(self, other) -> bool:
        other = other if isinstance(other, TropScalar) else TropScalar(other)
        if self.is_inf:
            return False
        if other.is_inf:
            return True
        return _cmp_values(self.value, other.value) < 0

    def __le__(self, other) -> bool:
        return self == other or self < other

    def __hash__(self) -> int:
        return hash(("inf",)) if self.is_inf else hash(self.value)

    def __repr__(self) -> str:
        return "inf" if self.is_inf else repr(self.value)


INF = TropScalar(None)


class TropicalMatrix:
    """r x n matrix over the extended scalars with optional labels.

    Rows represent points of tropical projective space: no row may be
    entirely infinite.
    """

    __slots__ = ("entries", "row_labels", "col_labels")

    def __init__(self, rows: Sequence[Sequence], row_labels=None,
                 col_labels=None):
        self.entries: Tuple[Tuple[Optional[Value], ...], ...] = tuple(
            tuple(_as_value(x) for x in row) for row in rows)
        if not self.entries:
            raise ValueError("empty matrix")
        n = len(self.entries[0])
        if any(len(row) != n for row in self.entries):
            raise ValueError("ragged rows")
        for i, row in enumerate(self.entries):
            if all(x is None for x in row):
                raise ValueError("row %d is entirely infinite" % i)
        self.row_labels = tuple(row_labels) if row_labels else None
        self.col_labels = tuple(col_labels) if col_labels else None

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def ncols(self) -> int:
        return len(self.entries[0])

    def submatrix(self, rows: Sequence[int],
                  cols: Sequence[int]) -> "TropicalMatrix":
        return TropicalMatrix(
            [[self.entries[i][j] for j in cols] for i in rows],
            row_labels=[self.row_labels[i] for i in rows]
            if self.row_labels else None,
            col_labels=[self.col_labels[j] for j in cols]
            if self.col_labels else None)

    def infinity_columns(self, i: int) -> FrozenSet[int]:
        return frozenset(j for j, x in enumerate(self.entries[i])
                         if x is None)


def _coerce_matrix(points) -> TropicalMatrix:
    return points if isinstance(points, TropicalMatrix) \
        else TropicalMatrix(points)


# ---------------------------------------------------------------------------
# permanents and collinearity


def tropical_permanent(matrix) -> Tuple[TropScalar, int]:
    """Min over permutations of diagonal sums, with its multiplicity.

    An all-infinite diagonal term counts only if every term is infinite;
    in that case the value is infinity and every permutation attains it
    (the matrix is singular by convention).
    """
    m = _coerce_matrix(matrix)
    d = m.nrows
    if m.ncols != d:
        raise ValueError("permanent requires a square matrix")
    best: Optional[Value] = None
    mult = 0
    total = 0
    for perm in permutations(range(d)):
        total += 1
        term: Optional[Value] = Rational(0)
        for i, j in enumerate(perm):
            x = m.entries[i][j]
            if x is None:
                term = None
                break
            term = term + x
        if term is None:
            continue
        if best is None:
            best, mult = term, 1
            continue
        c = _cmp_values(term, best)
        if c < 0:
            best, mult = term, 1
        elif c == 0:
            mult += 1
    if best is None:
        return INF, total
    return TropScalar(best), mult


def is_singular(matrix) -> bool:
    """Is the minimum in the tropical permanent achieved twice?"""
    _value, mult = tropical_permanent(matrix)
    return mult != 1


def _check_disjoint_infinities(m: TropicalMatrix):
    seen: Dict[int, int] = {}
    for i in range(m.nrows):
        for j in m.infinity_columns(i):
            if j in seen:
                raise PreconditionViolated(
                    "rows %d and %d share the infinite column %d"
                    % (seen[j], i, j))
            seen[j] = i


def is_tropically_collinear(points) -> Tuple[bool, Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]]:
    """Are the rows collinear in tropical projective space?

    True iff every 3x3 minor is tropically singular; on failure the
    witness is one (rows, cols) pair with a non-singular minor.
    """
    m = _coerce_matrix(points)
    _check_disjoint_infinities(m)
    for rows in combinations(range(m.nrows), 3):
        for cols in combinations(range(m.ncols), 3):
            if not is_singular(m.submatrix(rows, cols)):
                return False, (rows, cols)
    return True, None


# ---------------------------------------------------------------------------
# projection and lifting


def _column_difference(m: TropicalMatrix, j: int, jj: int,
                       skip: FrozenSet[int]) -> Optional[Value]:
    """Constant difference of two columns away from the rows in skip, or
    None when the difference is not constant."""
    diff: Optional[Value] = None
    for i in range(m.nrows):
        if i in skip:
            continue
        a, b = m.entries[i][j], m.entries[i][jj]
        if a is None or b is None:
            return None
        d = a - b
        if diff is None:
            diff = d
        elif not _is_zero(diff - d):
            return None
    return diff


def merge_parallel_columns(points) -> Tuple[List[int], TropicalMatrix]:
    """Deduplicate columns that agree in tropical projective space.

    Columns sharing an infinity row are verified projectively equal and
    collapsed; all-finite duplicate columns are collapsed likewise.  The
    returned index set J keeps the lexicographically minimal
    representative of each class.
    """
    m = _coerce_matrix(points)
    _check_disjoint_infinities(m)
    owner: Dict[int, int] = {}
    for i in range(m.nrows):
        for j in m.infinity_columns(i):
            owner[j] = i
    keep: List[int] = []
    seen_inf: Dict[int, int] = {}
    finite_classes: List[Tuple[int, Tuple[Optional[Value], ...]]] = []
    for j in range(m.ncols):
        if j in owner:
            i = owner[j]
            if i in seen_inf:
                if _column_difference(m, seen_inf[i], j,
                                      frozenset([i])) is None:
                    raise InconsistentColumns(
                        "columns %d and %d share the infinite row %d but "
                        "differ projectively" % (seen_inf[i], j, i))
                continue
            seen_inf[i] = j
            keep.append(j)
            continue
        base = m.entries[0][j]
        normalized = tuple(m.entries[i][j] - base for i in range(m.nrows))
        for _rep, other in finite_classes:
            if all(_is_zero(a - b) for a, b in zip(normalized, other)):
                break
        else:
            finite_classes.append((j, normalized))
            keep.append(j)
    keep.sort()
    return keep, m.submatrix(range(m.nrows), keep)


# ---------------------------------------------------------------------------
# metric trees


class MetricTree:
    """Balanced metric tree in tropical projective space.

    Vertices pair a coordinate vector with the index set I of the inward
    edge direction -e_I; edges carry lattice lengths; leaf labels name
    the vertices at infinity.
    """

    __slots__ = ("vertices", "edges", "leaf_labels")

    def __init__(self,
                 vertices: Sequence[Tuple[Sequence, FrozenSet[int]]],
                 edges: Sequence[Tuple[int, int, TropScalar]],
                 leaf_labels: Optional[Dict[int, str]] = None):
        self.vertices: List[Tuple[Tuple[Optional[Value], ...],
                                  FrozenSet[int]]] = [
            (tuple(_as_value(x) for x in coords), frozenset(inward))
            for coords, inward in vertices]
        self.edges: List[Tuple[int, int, TropScalar]] = [
            (min(u, v), max(u, v),
             length if isinstance(length, TropScalar) else TropScalar(length))
            for u, v, length in edges]
        self.leaf_labels: Dict[int, str] = dict(leaf_labels or {})

    @property
    def n(self) -> int:
        return len(self.vertices[0][0])

    def leaves(self) -> List[int]:
        return [i for i, (coords, _inward) in enumerate(self.vertices)
                if any(x is None for x in coords)]

    def neighbors(self, i: int) -> List[int]:
        out = []
        for u, v, _length in self.edges:
            if u == i:
                out.append(v)
            elif v == i:
                out.append(u)
        return out

    def is_balanced(self) -> bool:
        """Leaf directions partition the coordinates and at every finite
        vertex the primitive edge directions sum to a multiple of 1."""
        seen: List[int] = []
        for i in self.leaves():
            inward = self.vertices[i][1]
            if any(j in seen for j in inward):
                return False
            seen.extend(inward)
        if sorted(seen) != list(range(self.n)):
            return False
        for i, (coords, inward) in enumerate(self.vertices):
            if any(x is None for x in coords):
                continue
            total = [0] * self.n
            for w in self.neighbors(i):
                w_inward = self.vertices[w][1]
                if w_inward < inward:
                    for j in w_inward:
                        total[j] += 1
                else:
                    for j in inward:
                        total[j] -= 1
            if any(x != total[0] for x in total):
                return False
        return True

    def _canonical(self):
        def sort_key(pair):
            coords, inward = pair
            return ([(1, "") if x is None else (0, str(x)) for x in coords],
                    sorted(inward))

        keyed = sorted(((_normalize_point(coords), inward)
                        for coords, inward in self.vertices), key=sort_key)
        index = {kv: i for i, kv in enumerate(keyed)}
        old = [index[(_normalize_point(coords), inward)]
               for coords, inward in self.vertices]
        edges = sorted((min(old[u], old[v]), max(old[u], old[v]), length)
                       for u, v, length in self.edges)
        labels = sorted((old[i], lab) for i, lab in self.leaf_labels.items())
        return keyed, edges, labels

    def same_tree(self, other: "MetricTree") -> bool:
        a, b = self._canonical(), other._canonical()
        return a[0] == b[0] and a[2] == b[2] and \
            [(u, v) for u, v, _l in a[1]] == [(u, v) for u, v, _l in b[1]] and \
            all(la == lb for (_u, _v, la), (_x, _y, lb) in zip(a[1], b[1]))

    def to_json(self) -> Dict:
        return {
            "vertices": [{"coords": [_value_to_json(x) for x in coords],
                          "inward": sorted(inward)}
                         for coords, inward in self.vertices],
            "edges": [{"u": u, "v": v, "length": _value_to_json(
                None if length.is_inf else length.value)}
                      for u, v, length in self.edges],
            "leaf_labels": {str(i): lab
                            for i, lab in sorted(self.leaf_labels.items())},
        }

    @staticmethod
    def from_json(data: Dict) -> "MetricTree":
        vertices = [([_value_from_json(x) for x in v["coords"]],
                     frozenset(v["inward"])) for v in data["vertices"]]
        edges = [(e["u"], e["v"], TropScalar(_value_from_json(e["length"])))
                 for e in data["edges"]]
        labels = {int(i): lab
                  for i, lab in data.get("leaf_labels", {}).items()}
        return MetricTree(vertices, edges, labels)

    def to_dot(self) -> str:
        lines = ["graph tree {"]
        for i, (coords, inward) in enumerate(self.vertices):
            label = self.leaf_labels.get(i)
            coord_text = "(%s)" % ",".join(
                "inf" if x is None else str(x) for x in coords)
            text = "%s %s" % (label, coord_text) if label else coord_text
            lines.append('  v%d [label="%s"];' % (i, text))
        for u, v, length in self.edges:
            lines.append('  v%d -- v%d [label="%s"];'
                         % (u, v, "inf" if length.is_inf else length.value))
        lines.append("}")
        return "\n".join(lines)


def _value_to_json(x: Optional[Value]):
    if x is None:
        return "inf"
    if isinstance(x, LinearForm):
        return repr(x)
    x = Rational(x)
    return "%d/%d" % (x.numerator, x.denominator)


def _value_from_json(x) -> Optional[Value]:
    if x == "inf" or x is None:
        return None
    return Rational(Fraction(x))


def _normalize_point(coords: Sequence[Optional[Value]]
                     ) -> Tuple[Optional[Value], ...]:
    """Projective representative with minimal finite coordinate zero."""
    finite = [x for x in coords if x is not None]
    base = _min_value(finite)
    return tuple(None if x is None else x - base for x in coords)


# ---------------------------------------------------------------------------
# line reconstruction (from the points at infinity)


def _solve_adjacency(v, iv, w, iw):
    """Solve the vertex-adjacency system for (lambda, lambda', mu).

    Equations v_k - lambda [k in I] = w_k - lambda' [k in I'] + mu over
    the coordinates finite in both points; returns None if unsolvable or
    a multiplier would be negative.
    """
    rows: List[Tuple[List[Fraction], Value]] = []
    for k, (a, b) in enumerate(zip(v, w)):
        if a is None or b is None:
            continue
        coeff = [Fraction(-1) if k in iv else Fraction(0),
                 Fraction(1) if k in iw else Fraction(0),
                 Fraction(-1)]
        rows.append((coeff, b - a))
    sol: List[Optional[Value]] = [None, None, None]
    pivots: List[Tuple[int, List[Fraction], Value]] = []
    for coeff, rhs in rows:
        coeff, rhs = list(coeff), rhs
        for pcol, pcoeff, prhs in pivots:
            f = coeff[pcol]
            if f:
                coeff = [a - f * b for a, b in zip(coeff, pcoeff)]
                rhs = rhs - f * prhs
        col = next((i for i, x in enumerate(coeff) if x), None)
        if col is None:
            if not _is_zero(rhs):
                return None
            continue
        inv = Fraction(1) / coeff[col]
        pivots.append((col, [x * inv for x in coeff], rhs * inv))
    solved = [Rational(0)] * 3
    for col, coeff, rhs in reversed(pivots):
        total = rhs
        for j in range(col + 1, 3):
            if coeff[j]:
                total = total - coeff[j] * solved[j]
        solved[col] = total
    lam, lam2, mu = solved
    if _sign(lam) < 0 or _sign(lam2) < 0:
        return None
    return lam, lam2, mu


def _adjacent_vertex(v, iv, w, iw):
    """New vertex joining (v, I) and (w, I'), or None."""
    sol = _solve_adjacency(v, iv, w, iw)
    if sol is None:
        return None
    lam, lam2, mu = sol
    out = []
    for k, (a, b) in enumerate(zip(v, w)):
        if a is not None:
            out.append(a - lam if k in iv else a)
        elif b is not None:
            x = b - lam2 if k in iw else b
            out.append(x + mu)
        else:
            return None
    return tuple(out)


def reconstruct_line(leaves, labels: Optional[Sequence[str]] = None
                     ) -> MetricTree:
    """Unique generic tropical line through n+1 points at infinity.

    Leaf i must have its single infinite coordinate at position i.  New
    vertices are produced from directed pairs via the adjacency system,
    merged projectively (inward sets united), until two recorded
    directions cover all coordinates.
    """
    pts = [tuple(_as_value(x) for x in p) for p in leaves]
    n = len(pts) - 1
    for i, p in enumerate(pts):
        if len(p) != n + 1:
            raise PreconditionViolated("leaf %d has length %d, expected %d"
                                       % (i, len(p), n + 1))
        if [j for j, x in enumerate(p) if x is None] != [i]:
            raise PreconditionViolated(
                "leaf %d must have its single infinite coordinate at "
                "position %d" % (i, i))
    full = frozenset(range(n + 1))

    vertices: Dict[Tuple[Optional[Value], ...], FrozenSet[int]] = {}
    for i, p in enumerate(pts):
        vertices[_normalize_point(p)] = frozenset([i])
    edges: set = set()

    def stop_pairs():
        keys = list(vertices)
        return [(a, b) for a, b in combinations(keys, 2)
                if vertices[a] | vertices[b] == full]

    rounds = 0
    while not stop_pairs():
        rounds += 1
        if rounds > n + 2:
            raise NoAdjacencySolution(
                "no complementary direction pair after %d rounds" % rounds)
        before = dict(vertices)
        pairs = list(combinations(list(vertices), 2))
        while pairs:
            ka, kb = pairs.pop()
            ia = before.get(ka, vertices[ka])
            ib = before.get(kb, vertices[kb])
            vv = _adjacent_vertex(ka, ia, kb, ib)
            if vv is None:
                continue
            kc = _normalize_point(vv)
            vertices[kc] = vertices.get(kc, frozenset()) | ia | ib
            if kc != ka:
                edges.add(frozenset((ka, kc)))
            if kc != kb:
                edges.add(frozenset((kb, kc)))
        if vertices == before:
            raise NoAdjacencySolution(
                "no adjacency system solves: the leaves are not the points "
                "at infinity of a tropical line")

    for ka, kb in stop_pairs():
        edges.add(frozenset((ka, kb)))

    keys = sorted(vertices, key=lambda k: (len(vertices[k]),
                                           sorted(vertices[k])))
    index = {k: i for i, k in enumerate(keys)}
    out_vertices = [(k, vertices[k]) for k in keys]
    out_edges = []
    for e in sorted(edges, key=lambda e: sorted(index[k] for k in e)):
        ka, kb = tuple(e)
        u, v = index[ka], index[kb]
        length = edge_length((keys[u], vertices[keys[u]]),
                             (keys[v], vertices[keys[v]]))
        out_edges.append((u, v, length))
    leaf_labels = {}
    for i, p in enumerate(pts):
        leaf_labels[index[_normalize_point(p)]] = \
            labels[i] if labels else "p%d" % i
    return MetricTree(out_vertices, out_edges, leaf_labels)


def lift_line(projected: MetricTree, J: Sequence[int],
              full_leaves) -> MetricTree:
    """Undo a coordinate projection of a tropical line.

    J holds one coordinate per leaf direction class of the full line;
    every dropped coordinate j is recovered as a constant offset
    lambda_j from its class representative, read off any other leaf.
    """
    pts = [tuple(_as_value(x) for x in p) for p in full_leaves]
    n = len(pts[0])
    blocks = [frozenset(j for j, x in enumerate(p) if x is None)
              for p in pts]
    col_of = {j: sorted(J).index(j) for j in sorted(J)}
    offsets: Dict[int, Tuple[int, Value]] = {}
    for i, block in enumerate(blocks):
        anchor = next(iter(block & frozenset(J)))
        s = (i + 1) % len(pts)
        for j in block:
            offsets[j] = (i, pts[s][j] - pts[s][anchor])
    vertices = []
    for coords, inward in projected.vertices:
        lifted = []
        for j in range(n):
            i, lam = offsets[j]
            anchor = next(iter(blocks[i] & frozenset(J)))
            base = coords[col_of[anchor]]
            lifted.append(None if base is None else base + lam)
        lifted_inward = frozenset().union(*[blocks[i] for i in inward])
        vertices.append((lifted, lifted_inward))
    return MetricTree(vertices, projected.edges, dict(projected.leaf_labels))


def edge_length(v: Tuple[Sequence, Iterable[int]],
                w: Tuple[Sequence, Iterable[int]]) -> TropScalar:
    """Lattice length of the edge joining two directed vertices.

    The inward sets must be complementary or nested; the length is the
    |lambda| solving w - v = lambda e_I + mu 1 over the finite
    coordinates, with I the smaller of the two sets (either if they are
    complementary).  An edge reaching a point at infinity has infinite
    length.
    """
    vc = tuple(_as_value(x) for x in v[0])
    wc = tuple(_as_value(x) for x in w[0])
    iv, iw = frozenset(v[1]), frozenset(w[1])
    n = len(vc)
    full = frozenset(range(n))
    if iv | iw == full and not (iv <= iw or iw <= iv):
        direction = iv
    elif iv <= iw:
        direction = iv
    elif iw <= iv:
        direction = iw
        vc, wc = wc, vc
    else:
        raise NotAnEdge("inward sets %s and %s are neither nested nor "
                        "complementary" % (sorted(iv), sorted(iw)))
    if any(x is None for x in vc) or any(x is None for x in wc):
        return INF
    mu = None
    lam = None
    for k in range(n):
        d = wc[k] - vc[k]
        if k in direction:
            if lam is None:
                lam = d
            elif not _is_zero(lam - d):
                raise NotAnEdge("difference is not of the form "
                                "lambda e_I + mu 1")
        else:
            if mu is None:
                mu = d
            elif not _is_zero(mu - d):
                raise NotAnEdge("difference is not of the form "
                                "lambda e_I + mu 1")
    if mu is None or lam is None:
        raise NotAnEdge("direction set is empty or full")
    lam = lam - mu
    return TropScalar(lam if _sign(lam) >= 0 else -lam)
