"""Exact arithmetic substrate.

Rationals (gmpy2-backed), sparse multivariate polynomials in d1..d6,
Laurent scalars in a valuation parameter t, linear forms over nonnegative
cone scalars, integer matrices (rank / kernel / Smith form / lattice index),
and exact extremal-ray enumeration for low-dimensional cones.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

try:
    from gmpy2 import mpq as Rational
except ImportError:  # pragma: no cover
    Rational = Fraction

QLike = Union[int, Fraction, "Rational"]

NVARS = 6  # ambient polynomial variables d1..d6


class NonDivisor(ArithmeticError):
    """Raised by exact division when the divisor does not divide."""


# ---------------------------------------------------------------------------
# multivariate polynomials


class MPoly:
    """Sparse polynomial in d1..d6 with exact rational coefficients.

    Terms map exponent 6-tuples to nonzero Rational coefficients.
    Immutable by convention: no method mutates self.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Tuple[int, ...], QLike]] = None):
        t: Dict[Tuple[int, ...], Rational] = {}
        if terms:
            for e, c in terms.items():
                c = Rational(c)
                if c != 0:
                    prev = t.get(e)
                    if prev is None:
                        t[e] = c
                    else:
                        s = prev + c
                        if s:
                            t[e] = s
                        else:
                            del t[e]
        self.terms = t

    @staticmethod
    def zero() -> "MPoly":
        return MPoly()

    @staticmethod
    def const(c: QLike) -> "MPoly":
        return MPoly({(0,) * NVARS: c})

    @staticmethod
    def variable(i: int) -> "MPoly":
        e = [0] * NVARS
        e[i] = 1
        return MPoly({tuple(e): 1})

    @staticmethod
    def linear(coeffs: Sequence[QLike]) -> "MPoly":
        terms = {}
        for i, c in enumerate(coeffs):
            if c:
                e = [0] * NVARS
                e[i] = 1
                terms[tuple(e)] = c
        return MPoly(terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, MPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __neg__(self) -> "MPoly":
        p = MPoly()
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __add__(self, other: "MPoly") -> "MPoly":
        if len(self.terms) < len(other.terms):
            self, other = other, self
        t = dict(self.terms)
        for e, c in other.terms.items():
            prev = t.get(e)
            if prev is None:
                t[e] = c
            else:
                s = prev + c
                if s:
                    t[e] = s
                else:
                    del t[e]
        p = MPoly()
        p.terms = t
        return p

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self + (-other)

    def __mul__(self, other) -> "MPoly":
        if not isinstance(other, MPoly):
            c = Rational(other)
            p = MPoly()
            if c:
                p.terms = {e: k * c for e, k in self.terms.items()}
            return p
        t: Dict[Tuple[int, ...], Rational] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2],
                     e1[3] + e2[3], e1[4] + e2[4], e1[5] + e2[5])
                prev = t.get(e)
                if prev is None:
                    t[e] = c1 * c2
                else:
                    s = prev + c1 * c2
                    if s:
                        t[e] = s
                    else:
                        del t[e]
        p = MPoly()
        p.terms = t
        return p

    __rmul__ = __mul__

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def leading(self) -> Tuple[Tuple[int, ...], Rational]:
        """Leading term under lex order on exponents."""
        e = max(self.terms)
        return e, self.terms[e]

    def divmod_single(self, b: "MPoly") -> Tuple["MPoly", "MPoly"]:
        """Division by a single divisor under lex order: self = q*b + r,
        no term of r divisible by b's leading monomial."""
        if not b.terms:
            raise ZeroDivisionError("division by zero polynomial")
        eb, cb = b.leading()
        q: Dict[Tuple[int, ...], Rational] = {}
        r: Dict[Tuple[int, ...], Rational] = {}
        work = dict(self.terms)
        while work:
            e = max(work)
            c = work.pop(e)
            diff = tuple(x - y for x, y in zip(e, eb))
            if all(x >= 0 for x in diff):
                f = c / cb
                q[diff] = q.get(diff, Rational(0)) + f
                for e2, c2 in b.terms.items():
                    if e2 == eb:
                        continue
                    key = tuple(x + y for x, y in zip(diff, e2))
                    prev = work.get(key)
                    val = (prev if prev is not None else Rational(0)) - f * c2
                    if val:
                        work[key] = val
                    elif prev is not None:
                        del work[key]
            else:
                r[e] = c
        qq, rr = MPoly(), MPoly()
        qq.terms = {e: c for e, c in q.items() if c}
        rr.terms = r
        return qq, rr

    def exact_div(self, b: "MPoly") -> "MPoly":
        q, r = self.divmod_single(b)
        if r.terms:
            raise NonDivisor("divisor does not divide exactly")
        return q

    def divides(self, other: "MPoly") -> bool:
        return not other.divmod_single(self)[1].terms

    def evaluate(self, point: Sequence) -> "Rational":
        """Evaluate at six scalars supporting * and + (Rational or TScalar)."""
        total = None
        for e, c in self.terms.items():
            term = c
            for i, k in enumerate(e):
                for _ in range(k):
                    term = term * point[i]
            total = term if total is None else total + term
        if total is None:
            return Rational(0)
        return total

    def substitute(self, images: Sequence["MPoly"]) -> "MPoly":
        """Substitute d_i -> images[i] (each an MPoly)."""
        out = MPoly()
        pow_cache: List[Dict[int, MPoly]] = [dict() for _ in range(NVARS)]

        def power(i: int, k: int) -> MPoly:
            if k == 0:
                return MPoly.const(1)
            got = pow_cache[i].get(k)
            if got is None:
                got = power(i, k - 1) * images[i]
                pow_cache[i][k] = got
            return got

        for e, c in self.terms.items():
            term = MPoly.const(c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def content_free(self) -> Tuple["MPoly", Rational]:
        """Return (primitive polynomial with positive lex-leading coeff, unit)."""
        if not self.terms:
            return self, Rational(1)
        _, lc = self.leading()
        p = MPoly()
        p.terms = {e: c / lc for e, c in self.terms.items()}
        return p, lc

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                "d%d" % (i + 1) if k == 1 else "d%d^%d" % (i + 1, k)
                for i, k in enumerate(e) if k)
            parts.append(("%s" % c) + ("*" + mono if mono else ""))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# t-Laurent scalars


class TScalar:
    """Sparse Laurent polynomial in t over Rational; exponents rational.

    Models elements of a valued field with value group Q and splitting
    gamma -> t^gamma.  val() is the smallest exponent present.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Optional[Dict[QLike, QLike]] = None):
        c: Dict[Rational, Rational] = {}
        if coeffs:
            for e, v in coeffs.items():
                v = Rational(v)
                if v != 0:
                    e = Rational(e)
                    prev = c.get(e)
                    if prev is None:
                        c[e] = v
                    else:
                        s = prev + v
                        if s:
                            c[e] = s
                        else:
                            del c[e]
        self.coeffs = c

    @staticmethod
    def const(v: QLike) -> "TScalar":
        return TScalar({0: v})

    @staticmethod
    def monomial(v: QLike, gamma: QLike) -> "TScalar":
        return TScalar({gamma: v})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)) or type(other).__name__ == "mpq":
            other = TScalar.const(other)
        return isinstance(other, TScalar) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(frozenset(self.coeffs.items()))

    def __neg__(self) -> "TScalar":
        s = TScalar()
        s.coeffs = {e: -v for e, v in self.coeffs.items()}
        return s

    def _coerce(self, other) -> "TScalar":
        if isinstance(other, TScalar):
            return other
        return TScalar.const(other)

    def __add__(self, other) -> "TScalar":
        other = self._coerce(other)
        c = dict(self.coeffs)
        for e, v in other.coeffs.items():
            prev = c.get(e)
            if prev is None:
                c[e] = v
            else:
                s = prev + v
                if s:
                    c[e] = s
                else:
                    del c[e]
        out = TScalar()
        out.coeffs = c
        return out

    __radd__ = __add__

    def __sub__(self, other) -> "TScalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TScalar":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "TScalar":
        other = self._coerce(other)
        c: Dict[Rational, Rational] = {}
        for e1, v1 in self.coeffs.items():
            for e2, v2 in other.coeffs.items():
                e = e1 + e2
                prev = c.get(e)
                if prev is None:
                    c[e] = v1 * v2
                else:
                    s = prev + v1 * v2
                    if s:
                        c[e] = s
                    else:
                        del c[e]
        out = TScalar()
        out.coeffs = c
        return out

    __rmul__ = __mul__

    def __truediv__(self, other) -> "TScalar":
        other = self._coerce(other)
        if len(other.coeffs) == 1:
            ((e, v),) = other.coeffs.items()
            out = TScalar()
            out.coeffs = {e1 - e: v1 / v for e1, v1 in self.coeffs.items()}
            return out
        raise ZeroDivisionError("can only divide by t-monomials")

    def val(self):
        """Valuation: min exponent, or None (read: +infinity) for zero."""
        if not self.coeffs:
            return None
        return min(self.coeffs)

    def initial(self) -> "Rational":
        """Leading (lowest-order) coefficient; 0 for the zero element."""
        v = self.val()
        if v is None:
            return Rational(0)
        return self.coeffs[v]

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join("%s*t^%s" % (v, e) for e, v in sorted(self.coeffs.items()))


def t_valuation(x: TScalar):
    """Valuation of a TScalar (None encodes +infinity)."""
    return x.val()


# ---------------------------------------------------------------------------
# linear forms over declared-nonnegative parameters


class IncomparableForms(ValueError):
    """Two linear forms that cannot be ordered over the open cone."""


class LinearForm:
    """constant + sum coeff_i * param_i over an ordered parameter tuple.

    Parameters are declared strictly positive on the cone's relative
    interior; comparison uses coefficient-sign dominance.
    """

    __slots__ = ("params", "const", "coeffs")

    def __init__(self, params: Tuple[str, ...], const: QLike = 0,
                 coeffs: Optional[Dict[str, QLike]] = None):
        self.params = params
        self.const = Rational(const)
        self.coeffs = {p: Rational(0) for p in params}
        if coeffs:
            for p, c in coeffs.items():
                if p not in self.coeffs:
                    raise KeyError("unknown parameter %r" % p)
                self.coeffs[p] = Rational(c)

    @staticmethod
    def constant(params: Tuple[str, ...], c: QLike) -> "LinearForm":
        return LinearForm(params, c)

    @staticmethod
    def param(params: Tuple[str, ...], name: str) -> "LinearForm":
        return LinearForm(params, 0, {name: 1})

    def _check(self, other: "LinearForm"):
        if self.params != other.params:
            raise ValueError("parameter lists differ")

    def __add__(self, other) -> "LinearForm":
        if not isinstance(other, LinearForm):
            return LinearForm(self.params, self.const + Rational(other), self.coeffs)
        self._check(other)
        return LinearForm(self.params, self.const + other.const,
                          {p: self.coeffs[p] + other.coeffs[p] for p in self.params})

    __radd__ = __add__

    def __neg__(self) -> "LinearForm":
        return LinearForm(self.params, -self.const,
                          {p: -c for p, c in self.coeffs.items()})

    def __sub__(self, other) -> "LinearForm":
        if not isinstance(other, LinearForm):
            return self + (-Rational(other))
        return self + (-other)

    def __rsub__(self, other) -> "LinearForm":
        return (-self) + other

    def __mul__(self, scalar) -> "LinearForm":
        s = Rational(scalar)
        return LinearForm(self.params, self.const * s,
                          {p: c * s for p, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearForm):
            return self.is_constant() and self.const == Rational(other)
        return (self.params == other.params and self.const == other.const
                and self.coeffs == other.coeffs)

    def __hash__(self) -> int:
        return hash((self.params, self.const, tuple(self.coeffs[p] for p in self.params)))

    def is_zero(self) -> bool:
        return self.const == 0 and all(c == 0 for c in self.coeffs.values())

    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs.values())

    def evaluate(self, values: Dict[str, QLike]) -> "Rational":
        total = self.const
        for p, c in self.coeffs.items():
            if c:
                total += c * Rational(values[p])
        return total

    def __repr__(self) -> str:
        parts = []
        if self.const or self.is_constant():
            parts.append(str(self.const))
        for p in self.params:
            c = self.coeffs[p]
            if c == 1:
                parts.append(p)
            elif c:
                parts.append("%s*%s" % (c, p))
        return " + ".join(parts)


def compare_over_cone(a: LinearForm, b: LinearForm) -> str:
    """Order two forms over the open cone where all parameters are > 0.

    Returns 'less', 'equal', 'greater', or 'incomparable'.
    """
    a._check(b)
    d = b - a
    vals = [d.const] + [d.coeffs[p] for p in d.params]
    if all(v == 0 for v in vals):
        return "equal"
    if all(v >= 0 for v in vals):
        return "less"
    if all(v <= 0 for v in vals):
        return "greater"
    return "incomparable"


# ---------------------------------------------------------------------------
# exact integer linear algebra


Vec = Tuple[int, ...]


class IntMatrix:
    """Dense integer matrix with exact rank / kernel / Smith form."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence[int]]):
        self.rows = [list(map(int, r)) for r in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        assert all(len(r) == self.ncols for r in self.rows)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(list(zip(*self.rows))) if self.rows else IntMatrix([])

    def rank(self) -> int:
        return len(_row_echelon([list(r) for r in self.rows]))

    def kernel_basis(self) -> List[List[Fraction]]:
        """Basis of the right kernel over Q."""
        m = [[Fraction(x) for x in r] for r in self.rows]
        n = self.ncols
        pivots: List[Tuple[int, int]] = []
        row = 0
        for col in range(n):
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
        basis = []
        for free in range(n):
            if free in pivot_cols:
                continue
            v = [Fraction(0)] * n
            v[free] = Fraction(1)
            for r, c in pivots:
                v[c] = -m[r][free]
            basis.append(v)
        return basis

    def smith_normal_form(self) -> Tuple[List[int], "IntMatrix", "IntMatrix"]:
        """Return (diagonal d1|d2|..., U, V) with U*self*V diagonal."""
        return _smith(self)

    def elementary_divisors(self) -> List[int]:
        return self.smith_normal_form()[0]

    def lattice_index_in_saturation(self) -> int:
        """Index of the row lattice inside its saturation in Z^ncols."""
        divs = [abs(x) for x in self.elementary_divisors() if x]
        out = 1
        for x in divs:
            out *= x
        return out

    def __repr__(self) -> str:
        return "IntMatrix(%dx%d)" % (self.nrows, self.ncols)


def _row_echelon(m: List[List[int]]) -> List[List[Fraction]]:
    mm = [[Fraction(x) for x in r] for r in m]
    out = []
    cols = len(mm[0]) if mm else 0
    row = 0
    for col in range(cols):
        piv = next((r for r in range(row, len(mm)) if mm[r][col]), None)
        if piv is None:
            continue
        mm[row], mm[piv] = mm[piv], mm[row]
        for r in range(row + 1, len(mm)):
            if mm[r][col]:
                f = mm[r][col] / mm[row][col]
                mm[r] = [x - f * y for x, y in zip(mm[r], mm[row])]
        out.append(mm[row])
        row += 1
        if row == len(mm):
            break
    return out


def _smith(mat: IntMatrix) -> Tuple[List[int], IntMatrix, IntMatrix]:
    a = [list(r) for r in mat.rows]
    m, n = mat.nrows, mat.ncols
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def addmul_row(dst, src, f):
        a[dst] = [x + f * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + f * y for x, y in zip(u[dst], u[src])]

    def addmul_col(dst, src, f):
        for r in a:
            r[dst] += f * r[src]
        for r in v:
            r[dst] += f * r[src]

    t = 0
    while t < min(m, n):
        # find pivot with smallest nonzero absolute value
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] and (best is None or abs(a[i][j]) < best[0]):
                    best = (abs(a[i][j]), i, j)
        if best is None:
            break
        _, bi, bj = best
        swap_rows(t, bi)
        swap_cols(t, bj)
        dirty = False
        for i in range(t + 1, m):
            if a[i][t]:
                addmul_row(i, t, -(a[i][t] // a[t][t]))
                if a[i][t]:
                    dirty = True
        for j in range(t + 1, n):
            if a[t][j]:
                addmul_col(j, t, -(a[t][j] // a[t][t]))
                if a[t][j]:
                    dirty = True
        if dirty:
            continue
        # divisibility fix-up
        fixed = True
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if a[i][j] % a[t][t]:
                    addmul_row(t, i, 1)
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            if a[t][t] < 0:
                a[t] = [-x for x in a[t]]
                u[t] = [-x for x in u[t]]
            t += 1
    diag = [a[i][i] for i in range(min(m, n))]
    return diag, IntMatrix(u), IntMatrix(v)


def solve_exponent_system(M: IntMatrix, v: Sequence[int]) -> Optional[List[int]]:
    """Integer solution x of M^T x = v (x indexed by rows of M), or None."""
    a = M.transpose()  # a x = v, a is ncols x nrows
    diag, U, V = a.smith_normal_form()
    uv = [sum(U.rows[i][j] * int(v[j]) for j in range(a.nrows)) for i in range(a.nrows)]
    r = len([x for x in diag if x])
    y = [0] * a.ncols
    for i in range(a.nrows):
        if i < len(diag) and diag[i]:
            if uv[i] % diag[i]:
                return None
            y[i] = uv[i] // diag[i]
        elif uv[i]:
            return None
    x = [sum(V.rows[i][j] * y[j] for j in range(a.ncols)) for i in range(a.ncols)]
    # verify (defensive: Smith transforms are easy to get subtly wrong)
    for j in range(a.nrows):
        assert sum(M.rows[i][j] * x[i] for i in range(M.nrows)) == int(v[j])
    return x


# ---------------------------------------------------------------------------
# extremal rays by double description


def _primitive(vec: Sequence[Fraction]) -> Vec:
    from math import gcd
    den = 1
    for x in vec:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


def cone_extremal_rays(inequalities: Sequence[Sequence[int]], dim: int,
                       nonneg: bool = True) -> List[Vec]:
    """Extremal rays of {z in R^dim : z >= 0 (if nonneg), A z >= 0}.

    Exact double description; returns primitive integer rays.  The lineality
    space (if any) is not reported: rays beyond lineality only.
    """
    ineqs: List[List[Fraction]] = []
    if nonneg:
        for i in range(dim):
            row = [Fraction(0)] * dim
            row[i] = Fraction(1)
            ineqs.append(row)
    ineqs.extend([[Fraction(x) for x in a] for a in inequalities])

    lineality: List[List[Fraction]] = [
        [Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    rays: List[List[Fraction]] = []
    processed: List[List[Fraction]] = []

    def dot(a, z):
        return sum(x * y for x, y in zip(a, z))

    for a in ineqs:
        lvals = [dot(a, l) for l in lineality]
        if any(lvals):
            k = next(i for i, x in enumerate(lvals) if x)
            l0 = lineality.pop(k)
            v0 = lvals.pop(k)
            if v0 < 0:
                l0 = [-x for x in l0]
                v0 = -v0
            lineality = [[x - (lv / v0) * y for x, y in zip(l, l0)]
                         for l, lv in zip(lineality, lvals)]
            new_rays = []
            for r in rays:
                rv = dot(a, r)
                new_rays.append([x - (rv / v0) * y for x, y in zip(r, l0)])
            new_rays.append(l0)
            rays = new_rays
        else:
            vals = [dot(a, r) for r in rays]
            pos = [r for r, v in zip(rays, vals) if v > 0]
            zero = [r for r, v in zip(rays, vals) if v == 0]
            neg = [(r, v) for r, v in zip(rays, vals) if v < 0]
            if neg:
                posv = [(r, v) for r, v in zip(rays, vals) if v > 0]
                combos = []
                for rp, vp in posv:
                    zp = _zeroset(rp, processed)
                    for rn, vn in neg:
                        zn = _zeroset(rn, processed)
                        common = zp & zn
                        if not _adjacent(common, rp, rn, rays, processed):
                            continue
                        # vp*rn - vn*rp satisfies a exactly (a.new = 0)
                        new = [vp * xn - vn * xp for xp, xn in zip(rp, rn)]
                        combos.append(new)
                rays = pos + zero + combos
            else:
                rays = pos + zero
        processed.append(a)

    out = []
    seen = set()
    for r in rays:
        if all(x == 0 for x in r):
            continue
        p = _primitive(r)
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _zeroset(r, processed) -> frozenset:
    return frozenset(i for i, a in enumerate(processed)
                     if sum(x * y for x, y in zip(a, r)) == 0)


def _adjacent(common: frozenset, r1, r2, rays, processed) -> bool:
    """r1, r2 adjacent iff no third ray's zero set contains their common one."""
    for r in rays:
        if r is r1 or r is r2:
            continue
        if common <= _zeroset(r, processed):
            return False
    return True
