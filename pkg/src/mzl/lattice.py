"""Generating functions of lattice points in rational polyhedral cells.

A cell is ``{x in N^n : eq forms = 0, ge forms >= 0, congruences}``.  The
decomposition eliminates equalities and congruences over the integers,
homogenizes the resulting polyhedron, triangulates the cone by pulling, makes
the simplicial cones half-open with respect to a generic interior vector and
reads off the fundamental parallelepiped points at height one.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from . import intlin
from .groth import GrothElement
from .series import (GeomFactor, RationalSeries, SeriesError, SeriesTerm)


class CellError(ValueError):
    pass


@dataclass(frozen=True)
class LinearForm:
    """``x -> coeffs . x + const``."""

    coeffs: Tuple[int, ...]
    const: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        object.__setattr__(self, "const", int(self.const))

    def __call__(self, x: Sequence[int]) -> int:
        return sum(c * v for c, v in zip(self.coeffs, x)) + self.const

    def linear(self, x: Sequence[int]) -> int:
        return sum(c * v for c, v in zip(self.coeffs, x))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def pad(self, n: int, offset: int = 0) -> "LinearForm":
        """Embed into ``n`` variables, placing the coefficients at ``offset``."""
        c = [0] * n
        c[offset:offset + len(self.coeffs)] = self.coeffs
        return LinearForm(tuple(c), self.const)

    @classmethod
    def of(cls, coeffs, const=0) -> "LinearForm":
        return cls(tuple(coeffs), const)

    @classmethod
    def var(cls, i: int, n: int) -> "LinearForm":
        return cls(tuple(int(j == i) for j in range(n)))


@dataclass(frozen=True)
class Congruence:
    form: LinearForm
    r: int
    d: int

    def __post_init__(self):
        if self.d <= 0:
            raise CellError("congruence modulus must be positive")


@dataclass(frozen=True)
class Cell:
    dim: int
    eq: Tuple[LinearForm, ...] = ()
    ge: Tuple[LinearForm, ...] = ()
    cong: Tuple[Congruence, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "eq", tuple(self.eq))
        object.__setattr__(self, "ge", tuple(self.ge))
        object.__setattr__(self, "cong", tuple(self.cong))
        for f in self.eq + self.ge + tuple(c.form for c in self.cong):
            if f.dim != self.dim:
                raise CellError(f"form {f} has {f.dim} coefficients, cell has dimension {self.dim}")

    def contains(self, x: Sequence[int]) -> bool:
        if len(x) != self.dim or any(v < 0 for v in x):
            return False
        return (all(f(x) == 0 for f in self.eq) and all(f(x) >= 0 for f in self.ge)
                and all((c.form(x) - c.r) % c.d == 0 for c in self.cong))


@dataclass(frozen=True)
class HalfOpenPiece:
    """Points ``shift + p + N-span(generators)`` for ``p`` in ``points``."""

    shift: Tuple[int, ...]
    generators: Tuple[Tuple[int, ...], ...]
    points: Tuple[Tuple[int, ...], ...]
    open_facets: Tuple[int, ...] = field(default=())


# ------------------------------------------------------------ geometry

def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _extreme_rays(M: List[List[int]], D: int) -> List[Tuple[int, ...]]:
    """Primitive extreme rays of the pointed cone ``{z : M z >= 0}`` in Q^D."""
    rays = set()
    for S in itertools.combinations(range(len(M)), D - 1):
        rows = [M[i] for i in S]
        if D > 1 and intlin.rank_q(rows) != D - 1:
            continue
        ns = intlin.nullspace_q(rows, D)
        if len(ns) != 1:
            continue
        r = intlin.primitive(ns[0])
        for s in (r, [-x for x in r]):
            if all(_dot(row, s) >= 0 for row in M):
                rays.add(tuple(s))
    return sorted(rays)


def _pulling_triangulation(rays: List[Tuple[int, ...]], M: List[List[int]]):
    """Simplices (tuples of ray indices) of a pulling triangulation."""
    tight = [frozenset(i for i, r in enumerate(rays) if _dot(row, r) == 0) for row in M]

    @lru_cache(maxsize=None)
    def rank(face: frozenset) -> int:
        return intlin.rank_q([rays[i] for i in sorted(face)]) if face else 0

    @lru_cache(maxsize=None)
    def tri(face: frozenset) -> Tuple[Tuple[int, ...], ...]:
        d = rank(face)
        if len(face) == d:
            return (tuple(sorted(face)),)
        v = min(face)
        facets = set()
        for t in tight:
            T = face & t
            if T != face and rank(T) == d - 1:
                facets.add(T)
        out = []
        for G in facets:
            if v in G:
                continue
            for s in tri(G):
                out.append(tuple(sorted(s + (v,))))
        return tuple(out)

    return list(tri(frozenset(range(len(rays)))))


def _decompose_cone(rays_b: List[List[int]], simplices, heights: List[int], rng_seed: int = 0):
    """Half-open parallelepiped points of every simplex, kept at height one.

    ``rays_b`` are coordinates in a lattice basis of the cone's span, so every
    simplex matrix is square.  Yields ``(points, recession_idx, open_idx)``.
    """
    s = len(rays_b[0])
    rng = random.Random(rng_seed)
    weights = [Fraction(1) + Fraction(i + 1, 7919 * (i + 3)) for i in range(len(rays_b))]
    for _attempt in range(50):
        y = [sum(w * r[k] for w, r in zip(weights, rays_b)) for k in range(s)]
        pieces = []
        ok = True
        for simp in simplices:
            G = [[rays_b[i][k] for i in simp] for k in range(s)]  # columns are generators
            Ginv = intlin.inverse_q(G)
            lam = intlin.matvec(Ginv, y)
            if any(x == 0 for x in lam):
                ok = False
                break
            is_open = [x < 0 for x in lam]
            H, _U, rank = column_hnf_square(G)
            diag = [H[i][i] for i in range(s)]
            pts = []
            for z in itertools.product(*(range(d) for d in diag)):
                lz = intlin.matvec(Ginv, z)
                fr = []
                for j, x in enumerate(lz):
                    f = x - (x.numerator // x.denominator)
                    if f == 0 and is_open[j]:
                        f = Fraction(1)
                    fr.append(f)
                p = [sum(fr[j] * rays_b[i][k] for j, i in enumerate(simp)) for k in range(s)]
                assert all(v.denominator == 1 for v in p)
                pts.append(([int(v) for v in p], fr))
            hs = [heights[i] for i in simp]
            out_pts = []
            for p, fr in pts:
                h = sum(f * hh for f, hh in zip(fr, hs))
                if h == 1:
                    out_pts.append(p)
                elif h == 0:
                    for j, i in enumerate(simp):
                        if hs[j] == 1:
                            out_pts.append([a + b for a, b in zip(p, rays_b[i])])
            rec = [i for j, i in enumerate(simp) if hs[j] == 0]
            opn = [i for j, i in enumerate(simp) if hs[j] == 0 and is_open[j]]
            pieces.append((out_pts, rec, opn))
        if ok:
            return pieces
        weights = [Fraction(1) + Fraction(rng.randint(1, 10 ** 6), 10 ** 7) for _ in rays_b]
    raise CellError("could not find a generic interior vector")


def column_hnf_square(G):
    H, U, rank = intlin.column_hnf(G, len(G))
    if rank != len(G):
        raise CellError("degenerate simplex")
    return H, U, rank


def cell_decompose(c: Cell) -> List[HalfOpenPiece]:
    """Disjoint half-open pieces whose lattice points are exactly the cell's."""
    return list(_cell_decompose_cached(c))


@lru_cache(maxsize=2048)
def _cell_decompose_cached(c: Cell) -> Tuple[HalfOpenPiece, ...]:
    N = c.dim
    nc = len(c.cong)
    width = N + nc
    A, b = [], []
    for f in c.eq:
        A.append(list(f.coeffs) + [0] * nc)
        b.append(-f.const)
    for j, cg in enumerate(c.cong):
        row = list(cg.form.coeffs) + [0] * nc
        row[N + j] = -cg.d
        A.append(row)
        b.append(cg.r - cg.form.const)
    sol = intlin.solve_integer(A, b, width)
    if sol is None:
        return ()
    x0 = sol[0][:N]
    K = [row for row in sol[1][:N]]
    k = len(K[0]) if K else 0
    ineq = []
    for i in range(N):
        ineq.append((K[i][:] if k else [], x0[i]))
    for f in c.ge:
        g = [sum(f.coeffs[i] * K[i][j] for i in range(N)) for j in range(k)]
        ineq.append((g, f(x0)))
    M = []
    for g, h in ineq:
        if not any(g):
            if h < 0:
                return ()
            continue
        M.append(list(g) + [h])
    D = k + 1
    M.append([0] * k + [1])
    if N and intlin.rank_q(M) < D:
        raise CellError("cell is not pointed")
    if k == 0:
        return (HalfOpenPiece(tuple(x0), (), ((0,) * N,)),)
    rays = _extreme_rays(M, D)
    if not any(r[-1] > 0 for r in rays):
        return ()
    s = intlin.rank_q(rays)
    if s == D:
        B = intlin.identity(D)
        rays_b = [list(r) for r in rays]
    else:
        orth = [intlin.primitive(v) for v in intlin.nullspace_q(rays, D)]
        Bcols = intlin.integer_kernel(orth, D)  # D x s, rows
        B = Bcols
        cols = [[B[i][j] for i in range(D)] for j in range(s)]
        rays_b = []
        for r in rays:
            cc = intlin.solve_q(cols, r)
            assert cc is not None and all(x.denominator == 1 for x in cc)
            rays_b.append([int(x) for x in cc])
    Mb = [[sum(row[i] * B[i][j] for i in range(D)) for j in range(s)] for row in M]
    simplices = _pulling_triangulation([tuple(r) for r in rays_b], Mb)
    heights = [r[-1] for r in rays]
    raw = _decompose_cone(rays_b, simplices, heights)

    def to_x(zb):
        z = [sum(B[i][j] * zb[j] for j in range(s)) for i in range(D)]
        return z

    pieces = []
    for pts, rec, opn in raw:
        if not pts:
            continue
        xs = []
        for p in pts:
            z = to_x(p)
            assert z[-1] == 1
            u = z[:k]
            xs.append(tuple(x0[i] + sum(K[i][j] * u[j] for j in range(k)) for i in range(N)))
        gens = []
        for i in rec:
            z = to_x(rays_b[i])
            u = z[:k]
            gens.append(tuple(sum(K[i2][j] * u[j] for j in range(k)) for i2 in range(N)))
        shift = tuple(min(p[i] for p in xs) for i in range(N))
        offs = tuple(sorted(tuple(p[i] - shift[i] for i in range(N)) for p in xs))
        pieces.append(HalfOpenPiece(shift, tuple(gens), offs,
                                    tuple(rec.index(i) for i in opn)))
    return tuple(pieces)


def cell_gf(c: Cell, variables: Optional[Sequence[str]] = None) -> RationalSeries:
    """Generating function ``sum_{x in cell} X^x`` as a rational series."""
    variables = tuple(variables or [f"x{i + 1}" for i in range(c.dim)])
    if len(variables) != c.dim:
        raise CellError("one variable per cell coordinate is required")
    terms = {}
    for piece in cell_decompose(c):
        den = tuple(GeomFactor(0, g) for g in piece.generators)
        for p in piece.points:
            b0 = tuple(a + b for a, b in zip(piece.shift, p))
            key = (b0, den)
            terms[key] = terms[key] + 1 if key in terms else GrothElement.one()
    return RationalSeries(variables, terms)


def gf_specialize(g: RationalSeries, forms: Sequence[LinearForm], eps: LinearForm,
                  variables: Sequence[str] = ("T",)) -> RationalSeries:
    """Substitute ``x^delta -> L^(-eps(delta)) * T^(forms(delta))``.

    Every denominator factor must map to a positive total T-degree and all
    exponents must stay nonnegative, otherwise the result would not be a
    power series.
    """
    forms = list(forms)
    if len(forms) != len(variables):
        raise CellError("one form per output variable is required")
    terms = {}
    for t in g.all_terms():
        b0 = tuple(f(t.b0) for f in forms)
        if any(x < 0 for x in b0):
            raise CellError(f"numerator {t.b0} maps to negative T-exponent {b0}")
        den = []
        for fac in t.den:
            nb = tuple(f.linear(fac.b) for f in forms)
            if any(x < 0 for x in nb) or not any(nb):
                raise CellError(f"generator {fac.b} does not map to positive T-degree (got {nb})")
            den.append(GeomFactor(fac.a - eps.linear(fac.b), nb))
        key = (b0, tuple(den))
        c = t.coeff.times_L(-eps(t.b0))
        terms[key] = terms[key] + c if key in terms else c
    return RationalSeries(variables, terms)


def cell_enumerate(c: Cell, bound: int) -> List[Tuple[int, ...]]:
    """Brute-force list of cell points with coordinate sum at most ``bound``."""
    out = []

    def rec(prefix, left):
        if len(prefix) == c.dim:
            if c.contains(prefix):
                out.append(tuple(prefix))
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v)

    rec([], bound)
    return out


# --------------------------------------------------------------- Hadamard

def hadamard_terms(p: RationalSeries, q: RationalSeries) -> RationalSeries:
    r = p.arity
    out = RationalSeries(p.variables)
    for t1 in p.all_terms():
        for t2 in q.all_terms():
            out = out + _hadamard_pair(t1, t2, p.variables)
    return out


def _hadamard_pair(t1: SeriesTerm, t2: SeriesTerm, variables) -> RationalSeries:
    r = len(variables)
    s1, s2 = len(t1.den), len(t2.den)
    n = s1 + s2
    coeff = t1.coeff * t2.coeff
    if n == 0:
        if t1.b0 == t2.b0:
            return RationalSeries(variables, poly={t1.b0: coeff})
        return RationalSeries(variables)
    eqs = []
    for v in range(r):
        row = [f.b[v] for f in t1.den] + [-f.b[v] for f in t2.den]
        eqs.append(LinearForm(tuple(row), t1.b0[v] - t2.b0[v]))
    eqs = [e for e in eqs if any(e.coeffs) or e.const]
    cell = Cell(n, tuple(eqs))
    g = cell_gf(cell)
    forms = [LinearForm(tuple(f.b[v] for f in t1.den) + (0,) * s2, t1.b0[v]) for v in range(r)]
    eps = LinearForm(tuple(-f.a for f in t1.den) + tuple(-f.a for f in t2.den), 0)
    return gf_specialize(g, forms, eps, variables).scale(coeff)


# ------------------------------------------------------------------ JSON

def form_from_json(obj, dim: Optional[int] = None) -> LinearForm:
    if isinstance(obj, dict):
        return LinearForm(tuple(obj["coeffs"]), obj.get("const", 0))
    obj = list(obj)
    if dim is not None and len(obj) == dim:
        return LinearForm(tuple(obj), 0)
    return LinearForm(tuple(obj[:-1]), obj[-1])


def form_to_json(f: LinearForm) -> list:
    return list(f.coeffs) + [f.const]


def cell_from_json(obj) -> Cell:
    """``{dim, eq: [[coeffs..., const]], ge: [...], cong: [{form, r, d}]}``."""
    try:
        dim = int(obj["dim"])
        eq = tuple(form_from_json(f, None) for f in obj.get("eq", []))
        ge = tuple(form_from_json(f, None) for f in obj.get("ge", []))
        cong = tuple(Congruence(form_from_json(cg["form"], None), int(cg["r"]), int(cg["d"]))
                     for cg in obj.get("cong", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise CellError(f"bad cell description: {exc}") from exc
    return Cell(dim, eq, ge, cong)


def cell_to_json(c: Cell) -> dict:
    return {"kind": "cell", "dim": c.dim, "eq": [form_to_json(f) for f in c.eq],
            "ge": [form_to_json(f) for f in c.ge],
            "cong": [{"form": form_to_json(cg.form), "r": cg.r, "d": cg.d} for cg in c.cong]}


def piece_to_json(p: HalfOpenPiece) -> dict:
    return {"shift": list(p.shift), "generators": [list(g) for g in p.generators],
            "points": [list(x) for x in p.points], "open": list(p.open_facets)}
