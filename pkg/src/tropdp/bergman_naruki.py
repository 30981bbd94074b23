"""Flats of the root arrangement, the nested-set fan, and its monomial image.

The 750 proper irreducible flats of the rank-6 root arrangement span a
five-dimensional simplicial fan in R^36 modulo the all-ones line (cones are
the nested families of flats).  Pushing that fan through the 40x36 exponent
matrix of the degree-9 covariants yields a four-dimensional fan in R^40
modulo the all-ones line, whose maximal cones come in two symmetry classes.
This module builds both fans exactly, classifies points of the image fan,
checks compatibility with the binomial covariant representations, and
computes fibers of the monomial map over interior points of the two maximal
cone representatives.
"""
from __future__ import annotations

import json
import os
from fractions import Fraction
from functools import reduce
from itertools import combinations, permutations
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from ._tables import YOSHIDA_ROOTS
from .e6_weyl import WeylGroup, positive_roots
from .exact_core import cone_extremal_rays

# Arithmetic is done modulo a prime exceeding every minor of the 6x36 root
# coefficient matrix (Hadamard bound sqrt(6)^6 = 216 for 6x6 minors of a
# -1/0/1 matrix), so modular ranks equal rational ranks exactly.
_P = (1 << 61) - 1

FLAT_TYPE_ORDER = ("A1", "A2", "A3", "D4", "A4", "A5", "D5")
_TYPE_BY_SHAPE = {(1, 1): "A1", (2, 3): "A2", (3, 6): "A3", (4, 12): "D4",
                  (4, 10): "A4", (5, 15): "A5", (5, 20): "D5"}
RAY_IMAGE_TYPE = {"A1": "a", "A4": "a", "A5": "a",
                  "A2": "b", "A3": "a2", "D4": "zero", "D5": "zero"}


class NotInSupport(ValueError):
    """A point does not lie in the support of the image fan."""


class MergeFailure(RuntimeError):
    """Image cones sharing a linear span do not merge into a simplicial cone."""


class Flat:
    """An irreducible flat: a span-closed, connected set of positive roots."""

    __slots__ = ("index", "mask", "roots", "rank", "type", "orbit")

    def __init__(self, index: int, mask: int, rank: int, ftype: str, orbit: int):
        self.index = index
        self.mask = mask
        self.roots = tuple(_bits(mask))
        self.rank = rank
        self.type = ftype
        self.orbit = orbit

    def __repr__(self) -> str:
        return "rho%d<%s>" % (self.index, self.type)


def _bits(m: int) -> List[int]:
    out = []
    while m:
        b = m & -m
        out.append(b.bit_length() - 1)
        m ^= b
    return out


class _RootGeometry:
    """Span closures and connectivity over the 36 positive roots."""

    def __init__(self):
        self.vecs = [r.coeffs for r in positive_roots()]
        self.adj = [0] * 36
        for i in range(36):
            for j in range(36):
                if i != j and self.pairing_nonzero(i, j):
                    self.adj[i] |= 1 << j
        self._join_cache: Dict[int, Tuple[int, int]] = {}

    def pairing_nonzero(self, i: int, j: int) -> bool:
        a, b = self.vecs[i], self.vecs[j]
        return 9 * sum(x * y for x, y in zip(a, b)) - sum(a) * sum(b) != 0

    def _reduce(self, basis, v):
        v = list(v)
        for piv, row in basis:
            c = v[piv]
            if c:
                f = c * pow(row[piv], _P - 2, _P) % _P
                v = [(a - f * b) % _P for a, b in zip(v, row)]
        return v

    def closure_rank(self, idxs: Sequence[int]) -> Tuple[int, int]:
        """Span closure of a set of roots: (bitmask of member roots, rank)."""
        basis = []
        for i in idxs:
            v = self._reduce(basis, [c % _P for c in self.vecs[i]])
            for k in range(6):
                if v[k]:
                    basis.append((k, v))
                    break
        mask = 0
        for j in range(36):
            if not any(self._reduce(basis, [c % _P for c in self.vecs[j]])):
                mask |= 1 << j
        return mask, len(basis)

    def connected(self, mask: int) -> bool:
        s = _bits(mask)
        if not s:
            return False
        seen = 1 << s[0]
        frontier = seen
        while frontier:
            nxt = 0
            for i in _bits(frontier):
                nxt |= self.adj[i] & mask & ~seen
            seen |= nxt
            frontier = nxt
        return seen == mask

    def join_reducible(self, masks: Sequence[int]) -> bool:
        """Is the closure of the union a proper reducible flat?"""
        u = 0
        for m in masks:
            u |= m
        got = self._join_cache.get(u)
        if got is None:
            cl, r = self.closure_rank(_bits(u))
            got = not (r == 6 or self.connected(cl))
            self._join_cache[u] = got
        return got


_GEOMETRY: Optional[_RootGeometry] = None


def _geometry() -> _RootGeometry:
    global _GEOMETRY
    if _GEOMETRY is None:
        _GEOMETRY = _RootGeometry()
    return _GEOMETRY


_FLATS: Optional[List[Flat]] = None


def irreducible_flats() -> List[Flat]:
    """All 750 proper irreducible flats, in the canonical ray order.

    Flats are grouped by type in the order A1, A2, A3, D4, A4, A5, D5 and
    listed lexicographically by sorted root tuple within each block.
    """
    global _FLATS
    if _FLATS is not None:
        return _FLATS
    geo = _geometry()
    found: Dict[int, int] = {1 << i: 1 for i in range(36)}
    frontier = [(1 << i, 1) for i in range(36)]
    while frontier:
        nxt = []
        for m, rk in frontier:
            if rk == 5:
                continue
            for j in range(36):
                if (m >> j) & 1 or not (geo.adj[j] & m):
                    continue
                cl, r = geo.closure_rank(_bits(m) + [j])
                if r <= 5 and cl not in found and geo.connected(cl):
                    found[cl] = r
                    nxt.append((cl, r))
        frontier = nxt
    if len(found) != 750:
        raise RuntimeError("expected 750 irreducible flats, got %d" % len(found))
    typed = {m: _TYPE_BY_SHAPE[(r, bin(m).count("1"))] for m, r in found.items()}
    order = sorted(found, key=lambda m: (FLAT_TYPE_ORDER.index(typed[m]),
                                         tuple(_bits(m))))
    _FLATS = [Flat(i, m, found[m], typed[m], FLAT_TYPE_ORDER.index(typed[m]))
              for i, m in enumerate(order)]
    return _FLATS


def flat_index() -> Dict[int, int]:
    return {f.mask: f.index for f in irreducible_flats()}


def flat_generator_perms(group: WeylGroup) -> List[List[int]]:
    """Permutations of the 750 flats induced by the six group generators."""
    flats = irreducible_flats()
    fidx = flat_index()
    perms = []
    for g in group.gen_ids:
        rp = group.perms[g]
        unsigned = [abs(e) - 1 for e in rp]
        p = []
        for f in flats:
            img = 0
            for i in f.roots:
                img |= 1 << unsigned[i]
            p.append(fidx[img])
        perms.append(p)
    return perms


def trop_yoshida(v36: Sequence) -> Tuple:
    """Image of a vector under the 40x36 exponent matrix, normalized so the
    minimum coordinate is zero (the canonical representative modulo the
    all-ones line)."""
    y = [sum(v36[i] for i in s) for s in YOSHIDA_ROOTS]
    mn = min(y)
    return tuple(a - mn for a in y)


def _primitive(v: Sequence[int]) -> Tuple[int, ...]:
    g = reduce(gcd, v)
    return tuple(a // g for a in v) if g > 1 else tuple(v)


def _add_norm(u: Sequence, v: Sequence) -> Tuple:
    w = [a + b for a, b in zip(u, v)]
    mn = min(w)
    return tuple(a - mn for a in w)


class Fan:
    """Rays (canonical integer vectors modulo the all-ones line) plus cones
    given as sorted ray-index tuples with orbit ids."""

    FORMAT_VERSION = 1

    def __init__(self, ambient_dim: int, rays: List[Tuple[int, ...]],
                 cones: List[Tuple[int, ...]], cone_orbits: List[int],
                 meta: Optional[dict] = None):
        self.ambient_dim = ambient_dim
        self.rays = rays
        self.cones = cones
        self.cone_orbits = cone_orbits
        self.meta = meta or {}

    def to_json(self) -> dict:
        return {
            "version": self.FORMAT_VERSION,
            "ambient_dim": self.ambient_dim,
            "n_rays": len(self.rays),
            "rays": [list(r) for r in self.rays],
            "cones": [list(c) for c in self.cones],
            "cone_orbits": list(self.cone_orbits),
            "meta": self.meta,
        }

    def save(self, path: str):
        tmp = path + ".tmp"
        with open(tmp, "w") as f:
            json.dump(self.to_json(), f, sort_keys=True, separators=(",", ":"))
        os.replace(tmp, path)

    @classmethod
    def from_json(cls, data: dict) -> "Fan":
        if data.get("version") != cls.FORMAT_VERSION:
            raise ValueError("unsupported fan format version")
        return cls(data["ambient_dim"],
                   [tuple(r) for r in data["rays"]],
                   [tuple(c) for c in data["cones"]],
                   list(data["cone_orbits"]),
                   data.get("meta", {}))

    @classmethod
    def load(cls, path: str) -> "Fan":
        with open(path) as f:
            return cls.from_json(json.load(f))


class BergmanFan(Fan):
    """The nested-set fan: rays are the 750 flat incidence vectors, cones
    the maximal nested families; meta holds orbit counts per dimension and
    per-cone transporters to the orbit representatives."""

    @property
    def orbit_counts(self) -> List[int]:
        return list(self.meta["orbit_counts"])

    @property
    def transporters(self) -> List[int]:
        return list(self.meta["transporters"])

    @property
    def orbit_reps(self) -> List[Tuple[int, ...]]:
        return [tuple(c) for c in self.meta["orbit_reps"]]


def _nested_ok(geo: _RootGeometry, flats: List[Flat],
               cell: Sequence[int], v: int) -> bool:
    """May flat v extend the nested family `cell`?  Checks every antichain
    through v for a reducible proper join."""
    mv = flats[v].mask
    cand = [flats[i].mask for i in cell
            if (flats[i].mask & mv) not in (flats[i].mask, mv)]
    for r in range(1, len(cand) + 1):
        for sub in combinations(cand, r):
            ok = True
            for a, b in combinations(sub, 2):
                if (a & b) in (a, b):
                    ok = False
                    break
            if ok and not geo.join_reducible(list(sub) + [mv]):
                return False
    return True


def nested_edges(group: WeylGroup) -> List[int]:
    """Adjacency bitmasks of the nested-set complex on the 750 flats.

    Two flats are adjacent when comparable or when their join is a proper
    reducible flat.  Rows are computed for the seven orbit representatives
    and transported by the group action."""
    geo = _geometry()
    flats = irreducible_flats()
    gperms = flat_generator_perms(group)
    reps = []
    seen_orbits = set()
    for f in flats:
        if f.orbit not in seen_orbits:
            seen_orbits.add(f.orbit)
            reps.append(f.index)
    edges = [0] * 750
    seed_edges = set()
    for i in reps:
        mi = flats[i].mask
        for j in range(750):
            if j == i:
                continue
            mj = flats[j].mask
            if (mi & mj) in (mi, mj) or geo.join_reducible([mi, mj]):
                seed_edges.add((min(i, j), max(i, j)))
    frontier = list(seed_edges)
    all_edges = set(seed_edges)
    while frontier:
        nxt = []
        for a, b in frontier:
            for p in gperms:
                ia, ib = p[a], p[b]
                e = (ia, ib) if ia < ib else (ib, ia)
                if e not in all_edges:
                    all_edges.add(e)
                    nxt.append(e)
        frontier = nxt
    for a, b in all_edges:
        edges[a] |= 1 << b
        edges[b] |= 1 << a
    return edges


def build_bergman(group: WeylGroup,
                  cache_path: Optional[str] = None) -> BergmanFan:
    """Build (or load) the nested-set fan with full orbit bookkeeping."""
    if cache_path and os.path.exists(cache_path):
        fan = BergmanFan.load(cache_path)
        return fan
    geo = _geometry()
    flats = irreducible_flats()
    gperms = flat_generator_perms(group)
    edges = nested_edges(group)

    orbit_counts = [7]
    rep_cells = []
    seen_orbits = set()
    for f in flats:
        if f.orbit not in seen_orbits:
            seen_orbits.add(f.orbit)
            rep_cells.append((f.index,))
    reps_by_dim = [list(rep_cells)]
    max_cells: List[Tuple[int, ...]] = []
    max_orbit: List[int] = []
    max_transporter: List[int] = []
    for dim in range(2, 6):
        new_seen: Dict[Tuple[int, ...], Tuple[int, int]] = {}
        reps = []
        for cell in rep_cells:
            mask = edges[cell[0]]
            for i in cell[1:]:
                mask &= edges[i]
            for v in _bits(mask):
                if v in cell:
                    continue
                nc = tuple(sorted(cell + (v,)))
                if nc in new_seen:
                    continue
                if not _nested_ok(geo, flats, cell, v):
                    continue
                oid = len(reps)
                reps.append(nc)
                new_seen[nc] = (oid, 0)
                frontier = [nc]
                while frontier:
                    nxt = []
                    for c in frontier:
                        w = new_seen[c][1]
                        for gi, p in enumerate(gperms):
                            ic = tuple(sorted(p[i] for i in c))
                            if ic not in new_seen:
                                new_seen[ic] = (
                                    oid, group.multiply(w, group.gen_ids[gi]))
                                nxt.append(ic)
                    frontier = nxt
        rep_cells = reps
        reps_by_dim.append(list(reps))
        orbit_counts.append(len(reps))
        if dim == 5:
            for c in sorted(new_seen):
                oid, w = new_seen[c]
                max_cells.append(c)
                max_orbit.append(oid)
                max_transporter.append(w)

    rays = []
    for f in flats:
        v = [0] * 36
        for b in f.roots:
            v[b] = 1
        rays.append(tuple(v))
    meta = {
        "orbit_counts": orbit_counts,
        "orbit_reps": [list(c) for c in reps_by_dim[-1]],
        "reps_by_dim": [[list(c) for c in reps] for reps in reps_by_dim],
        "transporters": max_transporter,
        "flat_types": [f.type for f in flats],
        "flat_orbits": [f.orbit for f in flats],
    }
    fan = BergmanFan(36, rays, max_cells, max_orbit, meta)
    if cache_path:
        fan.save(cache_path)
    return fan


# ---------------------------------------------------------------------------
# exact cone membership helpers (modulo the all-ones line)


def _solve_coords(gens: Sequence[Sequence[int]], v: Sequence) -> Optional[List[Fraction]]:
    """Solve v = sum(l_i * gens_i) + c * 1 exactly.  Returns the l_i if the
    system has a unique solution, else None (inconsistent or degenerate)."""
    k = len(gens)
    cols = list(gens) + [tuple([1] * len(v))]
    n = len(v)
    rows = [[Fraction(cols[j][i]) for j in range(k + 1)] + [Fraction(v[i])]
            for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(k + 1):
        piv = next((i for i in range(r, n) if rows[i][c]), None)
        if piv is None:
            return None
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        inv = 1 / pr[c]
        rows[r] = pr = [x * inv for x in pr]
        for i in range(n):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        piv_cols.append(c)
        r += 1
        if r == k + 1:
            break
    if r < k + 1:
        return None
    for i in range(r, n):
        if rows[i][-1]:
            return None
    return [rows[i][-1] for i in range(k)]


def _in_cone(gens: Sequence[Sequence[int]], v: Sequence) -> bool:
    """Is v in the cone spanned by gens, modulo the all-ones line?"""
    sol = _solve_coords(gens, v)
    if sol is not None:
        return all(x >= 0 for x in sol)
    # degenerate: homogenized feasibility via extremal rays
    k = len(gens)
    n = len(v)
    ineqs = []
    for i in range(n):
        row = [gens[j][i] for j in range(k)] + [1, -1, -v[i]]
        ineqs.append(row)
        ineqs.append([-x for x in row])
    rays = cone_extremal_rays(ineqs, k + 3, nonneg=True)
    return any(r[-1] > 0 for r in rays)


def _compress(vectors: Sequence[Sequence[int]]) -> List[Tuple[Fraction, ...]]:
    """Coordinates of vectors in a basis of their span plus the all-ones
    line (quotienting out the lineality), to shrink membership solves."""
    n = len(vectors[0])
    basis: List[Tuple[int, List[Fraction]]] = []

    def reduce_full(v):
        v = [Fraction(x) for x in v]
        coords = []
        for piv, row in basis:
            c = v[piv] / row[piv]
            coords.append(c)
            if c:
                v = [a - c * b for a, b in zip(v, row)]
        return v, coords

    basis.append((0, [Fraction(1)] * n))  # the all-ones line, quotiented out
    for v in vectors:
        rem, _ = reduce_full(v)
        for k in range(n):
            if rem[k]:
                basis.append((k, rem))
                break
    out = []
    for v in vectors:
        rem, coords = reduce_full(v)
        if any(rem):
            raise ValueError("vector outside span")
        out.append(tuple(coords[1:]))  # drop the all-ones coordinate
    return out


def _in_cone_coords(gens: Sequence[Sequence[Fraction]],
                    v: Sequence[Fraction]) -> bool:
    """Membership v in cone(gens) for low-dimensional exact coordinates."""
    k = len(gens)
    d = len(v)
    ineqs = []
    for i in range(d):
        row = [gens[j][i] for j in range(k)] + [-v[i]]
        ineqs.append(row)
        ineqs.append([-x for x in row])
    rays = cone_extremal_rays(ineqs, k + 1, nonneg=True)
    return any(r[-1] > 0 for r in rays)


def _extremal_subset(gens: List[Tuple[int, ...]]) -> List[Tuple[int, ...]]:
    """Drop generators that are nonnegative combinations of the others."""
    gens = list(gens)
    coords = _compress(gens)
    changed = True
    while changed:
        changed = False
        for i in range(len(gens)):
            others = coords[:i] + coords[i + 1:]
            if others and _in_cone_coords(others, coords[i]):
                gens.pop(i)
                coords.pop(i)
                changed = True
                break
    return gens


class NarukiFan(Fan):
    """Image fan in R^40 modulo the all-ones line.

    `rays` lists the 346 primitive image rays (36 of type a, then 40 of type
    b, then 270 of type a2); cones are the maximal cells of the image: 135
    simplicial cells on four a-rays (aaaa) and 1080 cells on three a-rays
    and one b-ray (aaab), with pairwise distinct linear spans and disjoint
    interiors.  The maximal cones of the fan proper are the barycentric
    subcones -- 24 of type (a a2 a3 a4) per aaaa cell and 6 of type
    (a a2 a3 b) per aaab cell -- enumerated on demand by `refined_cones`.
    """

    @property
    def ray_types(self) -> List[str]:
        return list(self.meta["ray_types"])

    @property
    def cone_types(self) -> List[str]:
        return list(self.meta["cone_types"])

    @property
    def transporters(self) -> List[int]:
        return list(self.meta["transporters"])

    def refined_counts(self) -> Tuple[int, int]:
        n1 = sum(1 for t in self.cone_types if t == "aaaa")
        n2 = len(self.cone_types) - n1
        return 24 * n1, 6 * n2

    def refined_stabilizers(self) -> Tuple[int, int]:
        return tuple(self.meta["refined_stabilizers"])

    def refined_cones(self, cell_index: int) -> List[Tuple[Tuple[int, ...], ...]]:
        """Barycentric subcones of one maximal cell, as sorted tuples of
        primitive normalized ray vectors."""
        cone = self.cones[cell_index]
        avecs = [self.rays[i] for i in cone if self.ray_types[i] == "a"]
        bvecs = [self.rays[i] for i in cone if self.ray_types[i] == "b"]
        out = []
        for order in permutations(range(len(avecs))):
            rays = []
            acc = [0] * self.ambient_dim
            for j in order:
                acc = [x + y for x, y in zip(acc, avecs[j])]
                rays.append(_primitive(_normalize_img(acc)))
            out.append(tuple(sorted(rays + [tuple(v) for v in bvecs])))
        return sorted(set(out))


class NarukiConeLabel:
    """Location of a point: cone type, transporter to the representative
    orbit cone, and scalar coordinates in the refined ray basis."""

    def __init__(self, cone_type: str, cone_index: Optional[int],
                 transporter: int, scalars: Tuple[Fraction, ...]):
        self.cone_type = cone_type
        self.cone_index = cone_index
        self.transporter = transporter
        self.scalars = scalars

    def __repr__(self) -> str:
        return "NarukiConeLabel(%s, r=%s)" % (
            self.cone_type, tuple(str(s) for s in self.scalars))


def ray_images(bergman: BergmanFan) -> Tuple[List[Tuple[int, ...]], List[str]]:
    """Raw (non-primitivized) images of the 750 rays with their type tags."""
    imgs = []
    types = []
    ftypes = bergman.meta["flat_types"]
    for i, ray in enumerate(bergman.rays):
        img = trop_yoshida(ray)
        imgs.append(img)
        types.append("zero" if not any(img) else RAY_IMAGE_TYPE[ftypes[i]])
    return imgs, types


def _yoshida_coord_perm(group: WeylGroup, w: int) -> List[int]:
    return [abs(e) - 1 for e in group.action(w, "yoshida")]


def _normalize_img(v: Sequence[int]) -> Tuple[int, ...]:
    mn = min(v)
    return tuple(a - mn for a in v)


def _permute_ray(img: Sequence[int], perm: Sequence[int]) -> Tuple[int, ...]:
    out = [0] * len(img)
    for i, v in enumerate(img):
        out[perm[i]] = v
    mn = min(out)
    return tuple(a - mn for a in out)


def build_naruki(group: WeylGroup, bergman: BergmanFan,
                 cache_path: Optional[str] = None) -> NarukiFan:
    """Build (or load) the image fan.

    The maximal cells of the image are the images of the maximal nested-set
    cones that are maximal with respect to inclusion.  Exactly one symmetry
    class of nested-set cones maps onto cells spanned by four a-rays and
    seven classes map onto cells spanned by three a-rays and a b-ray; every
    other image cone is verified to lie inside one of those cells.  The
    cells have pairwise distinct linear spans (hence disjoint interiors) and
    need no further merging; their barycentric subcones are the maximal
    cones of the fan, in two symmetry classes whose stabilizer orders are
    recorded in the metadata.
    """
    if cache_path and os.path.exists(cache_path):
        return NarukiFan.load(cache_path)
    if "yoshida" not in group._gen_actions:
        group.register_yoshida_action()
    imgs, types = ray_images(bergman)
    prim = [_primitive(v) if any(v) else v for v in imgs]
    prim_type: Dict[Tuple[int, ...], str] = {}
    for i in range(750):
        if types[i] != "zero":
            prev = prim_type.get(prim[i])
            if prev is not None and prev != types[i]:
                raise MergeFailure("conflicting ray types for one image ray")
            prim_type[prim[i]] = types[i]
    rays: List[Tuple[int, ...]] = []
    ray_types: List[str] = []
    for t in ("a", "b", "a2"):
        for v in sorted(r for r, rt in prim_type.items() if rt == t):
            rays.append(v)
            ray_types.append(t)
    counts = (ray_types.count("a"), ray_types.count("b"), ray_types.count("a2"))
    if counts != (36, 40, 270):
        raise MergeFailure("unexpected image ray counts %s" % (counts,))
    ray_idx = {v: i for i, v in enumerate(rays)}

    # every a2 ray is the sum of two a rays
    avecs = [v for v, t in zip(rays, ray_types) if t == "a"]
    pair_sums = {_primitive(_normalize_img([x + y for x, y in zip(u, v)]))
                 for u, v in combinations(avecs, 2)}
    for v, t in zip(rays, ray_types):
        if t == "a2" and v not in pair_sums:
            raise MergeFailure("a2 ray is not a sum of two a rays")

    # exact extremal reduction of the 21 orbit representatives' image cones
    rep_extremals: Dict[int, List[Tuple[int, ...]]] = {}
    rep_shape: Dict[int, Tuple[str, ...]] = {}
    for oid, cell in enumerate(bergman.orbit_reps):
        gens = sorted({prim[i] for i in cell if any(prim[i])})
        ext = _extremal_subset(gens)
        rep_extremals[oid] = ext
        rep_shape[oid] = tuple(sorted(prim_type[v] for v in ext))
    first = {o for o, s in rep_shape.items() if s == ("a",) * 4}
    second = {o for o, s in rep_shape.items() if s == ("a", "a", "a", "b")}

    # transport the representative cells to the whole orbits and deduplicate
    cells1: set = set()
    cells2: set = set()
    for cone, oid, w in zip(bergman.cones, bergman.cone_orbits,
                            bergman.transporters):
        if oid in first or oid in second:
            perm = _yoshida_coord_perm(group, w)
            ext = tuple(sorted(_permute_ray(v, perm)
                               for v in rep_extremals[oid]))
            (cells1 if oid in first else cells2).add(ext)
    if (len(cells1), len(cells2)) != (135, 1080):
        raise MergeFailure(
            "maximal cell counts (%d, %d)" % (len(cells1), len(cells2)))

    # distinct linear spans imply pairwise disjoint interiors
    all_cells = sorted(cells1) + sorted(cells2)
    if len({_span_key(c) for c in all_cells}) != len(all_cells):
        raise MergeFailure("two maximal cells share a linear span")

    # every non-maximal representative image cone lies inside a maximal cell
    for oid, ext in rep_extremals.items():
        if oid in first or oid in second:
            continue
        if not any(_cell_contains(cell, ext) for cell in all_cells):
            raise MergeFailure(
                "image cone of symmetry class %d is not covered" % oid)

    merged_cones = [tuple(sorted(ray_idx[v] for v in c)) for c in all_cells]
    merged_types = ["aaaa"] * len(cells1) + ["aaab"] * len(cells2)
    order = sorted(range(len(merged_cones)),
                   key=lambda i: (merged_types[i], merged_cones[i]))
    merged_cones = [merged_cones[i] for i in order]
    merged_types = [merged_types[i] for i in order]

    # orbits of maximal cells under the coordinate permutation action
    gen_ray_perms = []
    for g in group.gen_ids:
        perm = _yoshida_coord_perm(group, g)
        gen_ray_perms.append([ray_idx[_permute_ray(rays[i], perm)]
                              for i in range(len(rays))])
    cone_pos = {c: i for i, c in enumerate(merged_cones)}
    orbit_id = [-1] * len(merged_cones)
    transporter = [0] * len(merged_cones)
    orbits = 0
    for start in range(len(merged_cones)):
        if orbit_id[start] != -1:
            continue
        oid = orbits
        orbits += 1
        orbit_id[start] = oid
        frontier = [start]
        while frontier:
            nxt = []
            for ci in frontier:
                w = transporter[ci]
                for gi, p in enumerate(gen_ray_perms):
                    ic = tuple(sorted(p[i] for i in merged_cones[ci]))
                    pos = cone_pos[ic]
                    if orbit_id[pos] == -1:
                        orbit_id[pos] = oid
                        transporter[pos] = group.multiply(w, group.gen_ids[gi])
                        nxt.append(pos)
            frontier = nxt
    if orbits != 2:
        raise MergeFailure("expected two symmetry classes of maximal cells")

    meta = {
        "ray_types": ray_types,
        "cone_types": merged_types,
        "transporters": transporter,
        "refined_stabilizers": [0, 0],
    }
    fan = NarukiFan(40, rays, merged_cones, orbit_id, meta)
    meta["refined_stabilizers"] = list(_refined_orbit_check(group, fan))
    if cache_path:
        fan.save(cache_path)
    return fan


def _cell_contains(cell: Sequence[Tuple[int, ...]],
                   vecs: Sequence[Tuple[int, ...]]) -> bool:
    coords = _compress(list(cell) + list(vecs))
    cc, vc = coords[:len(cell)], coords[len(cell):]
    return all(_in_cone_coords(cc, v) for v in vc)


def _refined_orbit_check(group: WeylGroup, fan: NarukiFan) -> Tuple[int, int]:
    """Verify the barycentric subcones form one orbit per cell type, that
    the two pinned representative cones occur among them, and return the
    stabilizer orders of the two orbits."""
    refined: Dict[str, set] = {"aaaa": set(), "aaab": set()}
    for ci, ctype in enumerate(fan.cone_types):
        refined[ctype].update(fan.refined_cones(ci))
    if (len(refined["aaaa"]), len(refined["aaab"])) != (3240, 6480):
        raise MergeFailure("refined cone counts (%d, %d)" % (
            len(refined["aaaa"]), len(refined["aaab"])))
    a, a2, a3, a4, b = _rep_basis()
    reps = {
        "aaaa": tuple(sorted(_primitive(_normalize_img(v))
                             for v in (a, a2, a3, a4))),
        "aaab": tuple(sorted(_primitive(_normalize_img(v))
                             for v in (a, a2, a3, b))),
    }
    stabs = []
    for ctype in ("aaaa", "aaab"):
        pool = refined[ctype]
        if reps[ctype] not in pool:
            raise MergeFailure("pinned %s cone is not a refined cone" % ctype)
        gen_perms = [_yoshida_coord_perm(group, g) for g in group.gen_ids]
        seen = {reps[ctype]}
        frontier = [reps[ctype]]
        while frontier:
            nxt = []
            for cone in frontier:
                for p in gen_perms:
                    ic = tuple(sorted(_permute_ray(v, p) for v in cone))
                    if ic not in seen:
                        if ic not in pool:
                            raise MergeFailure(
                                "refined orbit leaves the refined cone set")
                        seen.add(ic)
                        nxt.append(ic)
            frontier = nxt
        if len(seen) != len(pool):
            raise MergeFailure("refined %s cones split into several orbits"
                               % ctype)
        stabs.append(group.order // len(seen))
    return tuple(stabs)


def _span_key(vectors: Sequence[Sequence[int]]) -> Tuple:
    """Canonical key of the linear span of vectors plus the all-ones line,
    via the reduced echelon form modulo the working prime."""
    basis: List[Tuple[int, List[int]]] = []
    for v in list(vectors) + [[1] * len(vectors[0])]:
        row = [c % _P for c in v]
        for piv, b in basis:
            c = row[piv]
            if c:
                f = c * pow(b[piv], _P - 2, _P) % _P
                row = [(a - f * x) % _P for a, x in zip(row, b)]
        for k, c in enumerate(row):
            if c:
                inv = pow(c, _P - 2, _P)
                row = [a * inv % _P for a in row]
                basis.append((k, row))
                break
    basis.sort()
    # back-substitute for full reduction
    for i in range(len(basis) - 1, -1, -1):
        piv, row = basis[i]
        for j in range(i):
            pj, rj = basis[j]
            c = rj[piv]
            if c:
                basis[j] = (pj, [(a - c * b) % _P for a, b in zip(rj, row)])
    return tuple((piv, tuple(row)) for piv, row in basis)


# ---------------------------------------------------------------------------
# point classification


def classify_point(naruki: NarukiFan, p: Sequence) -> NarukiConeLabel:
    """Smallest refined cone containing p in its relative interior."""
    p = [Fraction(x) for x in p]
    mn = min(p)
    p = [x - mn for x in p]
    if not any(p):
        return NarukiConeLabel("apex", None, 0, ())
    for ci, cone in enumerate(naruki.cones):
        gens = [naruki.rays[i] for i in cone]
        sol = _solve_coords(gens, p)
        if sol is None or any(x < 0 for x in sol):
            continue
        ctype = naruki.cone_types[ci]
        if ctype == "aaaa":
            c = sorted(sol, reverse=True)
            r = (c[0] - c[1], c[1] - c[2], c[2] - c[3], c[3])
            labels = ["a", "a2", "a3", "a4"]
        else:
            b_pos = next(k for k, i in enumerate(cone)
                         if naruki.ray_types[i] == "b")
            bcoord = sol[b_pos]
            c = sorted((x for k, x in enumerate(sol) if k != b_pos),
                       reverse=True)
            r = (c[0] - c[1], c[1] - c[2], c[2], bcoord)
            labels = ["a", "a2", "a3", "b"]
        tag = "".join(l for l, x in zip(labels, r) if x > 0)
        if not tag:
            tag = "apex"
        return NarukiConeLabel(tag, ci, naruki.transporters[ci],
                               tuple(x for x in r))
    raise NotInSupport("point is outside the image fan")


# ---------------------------------------------------------------------------
# compatibility of the binomial covariant representations with the fan


def check_cross_compatibility(covariants, apex: bool = True) -> dict:
    """On the two pinned refined maximal cone representatives, check that
    each coordinate-difference hyperplane of each covariant binomial either
    contains the cone or misses its relative interior (no mixed signs on the
    generating rays), and record which covariants are all-tied or admit a
    tie-free representation.  Mixed signs on a cone imply mixed signs on
    every cone containing it, so checking the two maximal representatives
    covers all their faces; symmetry carries the result to the whole fan."""
    a, a2, a3, a4, b = _rep_basis()
    rep_cones = {"aa2a3a4": [a, a2, a3, a4], "aa2a3b": [a, a2, a3, b]}
    if apex:
        rep_cones["apex"] = [tuple([0] * 40)]
    report = {"violations": [], "all_tied": {}, "tie_free": {}}
    for ctype, refined in rep_cones.items():
        all_tied = []
        tie_free = []
        for k, c in enumerate(covariants.crosses):
            tied_everywhere = True
            free = False
            for (_s1, i, _s2, j) in c.reps:
                vals = [r[i] - r[j] for r in refined]
                if any(v > 0 for v in vals) and any(v < 0 for v in vals):
                    report["violations"].append((ctype, k, (i, j)))
                if all(v == 0 for v in vals):
                    continue
                tied_everywhere = False
                free = True
            if tied_everywhere:
                all_tied.append(k)
            if free:
                tie_free.append(k)
        report["all_tied"][ctype] = all_tied
        report["tie_free"][ctype] = tie_free
    return report


# ---------------------------------------------------------------------------
# fibers of the monomial map over the two smooth cone representatives


def _rep_basis():
    """The five pinned primitive rays spanning the adjacent representative
    cones, as images of explicit preimage vectors."""
    def e(*idx):
        v = [0] * 36
        for i in idx:
            v[i] += 1
        return v
    a = trop_yoshida(e(0))
    a2 = trop_yoshida(e(0, 1))
    a3 = trop_yoshida(e(0, 1, 4))
    a4 = trop_yoshida(e(0, 0, 1, 1, 18, 23, 24, 25))
    b = trop_yoshida(e(0, 2, 9))
    return a, a2, a3, a4, b


def fiber_over_smooth(group: WeylGroup, bergman: BergmanFan,
                      cone_type: str) -> List[dict]:
    """Components of the fiber over an interior point of the representative
    maximal cone of the given type ("aa2a3a4" or "aa2a3b").

    Each component is the intersection of a maximal nested-set cone with the
    preimage of the open representative cone.  Returns one record per
    component: the cone, the extremal rays of the component's closure (as
    coefficient vectors over the cone's five rays and in R^36), and the
    strict inequalities cutting the component out of its closure.
    """
    a, a2, a3, a4, b = _rep_basis()
    if cone_type in ("aa2a3a4", "aaaa"):
        basis = [a, a2, a3, a4]
    elif cone_type in ("aa2a3b", "aaab"):
        basis = [a, a2, a3, b]
    else:
        raise ValueError("cone_type must be aa2a3a4 or aa2a3b")
    imgs, _types = ray_images(bergman)

    # Reduced echelon form of (basis rows, all-ones): yields linear
    # functionals g_i extending the scalar coordinates off the span, and one
    # residual functional per non-pivot column vanishing exactly on the span.
    # augmented with an identity block to recover coordinates with respect
    # to the original rows
    rows = [[Fraction(x) for x in v] +
            [Fraction(int(i == k)) for k in range(5)]
            for i, v in enumerate(basis + [[1] * 40])]
    pivots: List[int] = []
    r = 0
    for col in range(40):
        piv = next((i for i in range(r, 5) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        rows[r] = [x / rows[r][col] for x in rows[r]]
        for i in range(5):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    if r != 5:
        raise MergeFailure("representative rays are linearly dependent")
    nonpiv = [j for j in range(40) if j not in pivots]

    def coords_of(v):
        # coordinates over (basis, all-ones), dropping the all-ones slot;
        # valid on the span, linear everywhere
        return tuple(sum(v[p] * rows[i][40 + k] for i, p in enumerate(pivots))
                     for k in range(4))

    def residual_of(v):
        return tuple(v[j] - sum(v[p] * rows[i][j]
                                for i, p in enumerate(pivots))
                     for j in nonpiv)

    rvecs = [coords_of(img) for img in imgs]
    resid = [residual_of(img) for img in imgs]

    # integer-scaled residuals modulo a prime: a quick certificate that the
    # residual map has trivial null space (the common case; a modular rank
    # drop is double-checked exactly, so false negatives are harmless)
    P = (1 << 31) - 1
    scale = []
    for j in range(len(nonpiv)):
        d = 1
        for v in resid:
            q = v[j].denominator
            d = d * q // gcd(d, q)
        scale.append(d)
    mresid = [tuple(int(v[j] * scale[j]) % P for j in range(len(nonpiv)))
              for v in resid]

    components = []
    for cone in bergman.cones:
        if _modular_rank([mresid[i] for i in cone], P) == 5:
            continue
        # null space of the residual map: combinations z of the cone's rays
        # whose image lands in the span of the representative cone
        mat = [[resid[i][j] for i in cone] for j in range(len(nonpiv))]
        null = _nullspace([row for row in mat if any(row)], 5)
        if not null:
            continue
        # polyhedron {t : z(t) >= 0, r(z(t)) >= 0}; the component must meet
        # the open cone and the interior of the nested-set cone
        d = len(null)
        zrows = [[null[k][j] for k in range(d)] for j in range(5)]
        rs = [rvecs[i] for i in cone]
        rrows = [[sum(zrows[j][k] * rs[j][i] for j in range(5))
                  for k in range(d)] for i in range(4)]
        trays = cone_extremal_rays(zrows + rrows, d, nonneg=False)
        if not trays:
            continue
        tb = [sum(t[k] for t in trays) for k in range(d)]
        zb = [sum(zrows[j][k] * tb[k] for k in range(d)) for j in range(5)]
        rb = [sum(rrows[i][k] * tb[k] for k in range(d)) for i in range(4)]
        if not (all(x > 0 for x in zb) and all(x > 0 for x in rb)):
            continue
        zrays = [_scale_primitive(
            [sum(zrows[j][k] * t[k] for k in range(d)) for j in range(5)])
            for t in trays]
        rrays = [[sum(Fraction(z[j]) * rs[j][i] for j in range(5))
                  for i in range(4)] for z in zrays]
        # the image of the closure covers the whole representative cone
        for i in range(4):
            if not _conic_member(rrays, i):
                raise MergeFailure("component image misses the open cone")
        ray36 = []
        for z in zrays:
            v = [Fraction(0)] * 36
            for zj, ri in zip(z, cone):
                if zj:
                    for k, x in enumerate(bergman.rays[ri]):
                        v[k] += zj * x
            ray36.append(tuple(v))
        # open conditions: positivity of the four scalar coordinates, as
        # linear forms in the closure-ray coefficients p_0..p_{m-1}
        conds = []
        for i in range(4):
            conds.append(_scale_primitive([r4[i] for r4 in rrays]))
        components.append({
            "cone": cone,
            "zrays": [tuple(z) for z in zrays],
            "rays36": ray36,
            "open_conditions": [tuple(c) for c in conds],
        })
    return components


def _modular_rank(vectors: List[Tuple[int, ...]], p: int) -> int:
    """Rank (a lower bound, exact with overwhelming margin here) of the
    given integer vectors modulo the prime p."""
    rows: List[List[int]] = []
    for v in vectors:
        w = list(v)
        for row in rows:
            piv = next(i for i, x in enumerate(row) if x)
            if w[piv]:
                f = w[piv] * pow(row[piv], p - 2, p) % p
                w = [(a - f * b) % p for a, b in zip(w, row)]
        if any(w):
            rows.append(w)
    return len(rows)


def _conic_member(gens: Sequence[Sequence[Fraction]], i: int) -> bool:
    """Is the i-th unit vector a nonnegative combination of gens?"""
    m = len(gens)
    n = len(gens[0])
    ineqs = []
    for k in range(n):
        row = [gens[j][k] for j in range(m)]
        row.append(Fraction(-1) if k == i else Fraction(0))
        ineqs.append(row)
        ineqs.append([-x for x in row])
    rays = cone_extremal_rays(ineqs, m + 1, nonneg=True)
    return any(r[-1] > 0 for r in rays)


def _nullspace(rows: List[Sequence[Fraction]], n: int) -> List[Tuple[Fraction, ...]]:
    """Basis of the null space of the given rows acting on R^n."""
    mat = [list(map(Fraction, row)) for row in rows]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        mat[r] = [x / mat[r][col] for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col]:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
    basis = []
    for col in range(n):
        if col in pivots:
            continue
        v = [Fraction(0)] * n
        v[col] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -mat[i][col]
        basis.append(tuple(v))
    return basis


def _scale_primitive(vals: Sequence[Fraction]) -> List:
    """Scale rationals by a positive constant to coprime integers."""
    vals = [Fraction(x) for x in vals]
    den = reduce(lambda a, b: a * b // gcd(a, b),
                 (v.denominator for v in vals), 1)
    ints = [int(v * den) for v in vals]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g > 1:
        ints = [x // g for x in ints]
    return ints
