"""Motivic zeta functions and nearby cycles from log-resolution data."""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Sequence, Tuple

from . import groth
from .groth import GrothElement
from .lattice import Cell, LinearForm, cell_decompose, cell_gf, gf_specialize, CellError
from .series import GeomFactor, RationalSeries, rs_limit, rs_substitute


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class Divisor:
    id: str
    N: int
    nu: int


@dataclass(frozen=True)
class MultiDivisor:
    """Divisor with multiplicities ``(N(f), N(f_1), ..., N(f_m))`` and ``nu``."""

    id: str
    Nvec: Tuple[int, ...]
    nu: int

    @property
    def N(self) -> int:
        return self.Nvec[0]


@dataclass(frozen=True)
class Stratum:
    I: Tuple[str, ...]
    cover_class: GrothElement
    m: int
    base: Optional[str] = None
    over_point: bool = False

    def describe(self) -> str:
        return f"I=[{','.join(self.I)}]" + (f"@{self.base}" if self.base else "")


def _validate(dim, divisors, strata, n_of):
    if dim < 1:
        raise ResolutionError("ambient dimension must be positive")
    ids = [d.id for d in divisors]
    if len(set(ids)) != len(ids):
        raise ResolutionError(f"duplicate divisor ids in {ids}")
    by_id = {d.id: d for d in divisors}
    for d in divisors:
        if d.nu < 1:
            raise ResolutionError(f"divisor {d.id}: nu must be >= 1")
    for k, s in enumerate(strata):
        where = f"stratum {k} ({s.describe()})"
        if not s.I:
            raise ResolutionError(f"{where}: empty index set")
        if len(set(s.I)) != len(s.I):
            raise ResolutionError(f"{where}: repeated divisor")
        for i in s.I:
            if i not in by_id:
                raise ResolutionError(f"{where}: unknown divisor {i!r}")
        g = 0
        for i in s.I:
            g = gcd(g, n_of(by_id[i]))
        if g == 0:
            raise ResolutionError(f"{where}: no divisor of the function")
        if s.m != g:
            raise ResolutionError(f"{where}: m={s.m} but gcd of N is {g}")
        for sym in s.cover_class.symbols():
            if sym.mu_order != s.m:
                raise ResolutionError(f"{where}: symbol {sym} carries mu={sym.mu_order}, expected {s.m}")
    return by_id


@dataclass(frozen=True)
class ResolutionData:
    dim: int
    divisors: Tuple[Divisor, ...]
    strata: Tuple[Stratum, ...]

    def __post_init__(self):
        object.__setattr__(self, "divisors", tuple(self.divisors))
        object.__setattr__(self, "strata", tuple(self.strata))
        for d in self.divisors:
            if d.N < 1:
                raise ResolutionError(f"divisor {d.id}: N must be >= 1")
        _validate(self.dim, self.divisors, self.strata, lambda d: d.N)

    def divisor(self, i: str) -> Divisor:
        return next(d for d in self.divisors if d.id == i)


@dataclass(frozen=True)
class MultiResolutionData:
    dim: int
    divisors: Tuple[MultiDivisor, ...]
    strata: Tuple[Stratum, ...]

    def __post_init__(self):
        object.__setattr__(self, "divisors", tuple(self.divisors))
        object.__setattr__(self, "strata", tuple(self.strata))
        lens = {len(d.Nvec) for d in self.divisors}
        if len(lens) > 1:
            raise ResolutionError("all divisors need the same number of multiplicities")
        for d in self.divisors:
            if not d.Nvec or any(x < 0 for x in d.Nvec):
                raise ResolutionError(f"divisor {d.id}: multiplicities must be nonnegative")
        _validate(self.dim, self.divisors, self.strata, lambda d: d.N)

    @property
    def m(self) -> int:
        return len(self.divisors[0].Nvec) - 1 if self.divisors else 0

    def divisor(self, i: str) -> MultiDivisor:
        return next(d for d in self.divisors if d.id == i)

    def restrict(self) -> ResolutionData:
        """Forget the auxiliary functions."""
        return ResolutionData(self.dim, tuple(Divisor(d.id, d.N, d.nu) for d in self.divisors), self.strata)


def _stratum_weight(s: Stratum) -> GrothElement:
    return (GrothElement.L() - 1) ** (len(s.I) - 1) * s.cover_class


def _ordered(strata):
    return sorted(strata, key=lambda s: (sorted(s.I), s.base or "", groth.render(s.cover_class)))


def zeta_from_resolution(r: ResolutionData, local: bool = False) -> RationalSeries:
    """Sum over strata of ``(L-1)^(|I|-1) [E_I] prod L^-nu T^N / (1 - L^-nu T^N)``.

    With ``local`` only strata over the base point enter and the result is
    absolute; otherwise each stratum's base label is attached to its class.
    """
    out = RationalSeries(("T",))
    for s in _ordered(r.strata):
        if local and not s.over_point:
            continue
        c = _stratum_weight(s)
        c = groth.rel_pushforward(c) if local else (c.with_base(s.base) if s.base else c)
        divs = [r.divisor(i) for i in s.I]
        c = c.times_L(-sum(d.nu for d in divs))
        den = tuple(GeomFactor(-d.nu, (d.N,)) for d in divs)
        out = out + RationalSeries(("T",), {((sum(d.N for d in divs),), den): c})
    return out


def nearby_cycles(z: RationalSeries) -> GrothElement:
    """Minus the limit at infinity."""
    return -rs_limit(z)


def nearby_formula(r: ResolutionData, local: bool = False) -> GrothElement:
    """``sum (1-L)^(|I|-1) [E_I]``, the closed form of the nearby cycles."""
    total = GrothElement()
    for s in _ordered(r.strata):
        if local and not s.over_point:
            continue
        c = (1 - GrothElement.L()) ** (len(s.I) - 1) * s.cover_class
        c = groth.rel_pushforward(c) if local else (c.with_base(s.base) if s.base else c)
        total = total + c
    return total


# ------------------------------------------------------ multi-variable zeta

def _stratum_cell(r: MultiResolutionData, s: Stratum, theta: Cell, rr: int, with_n: bool):
    """Cell over ``(k_j, beta, alpha[, n])`` for one stratum."""
    divs = [r.divisor(i) for i in s.I]
    ns, m = len(divs), r.m
    if theta.dim != m + rr:
        raise CellError(f"theta has dimension {theta.dim}, expected m + r = {m + rr}")
    dim = ns + m + rr + (1 if with_n else 0)
    eq = []
    for i in range(m):
        c = [0] * dim
        for j, d in enumerate(divs):
            c[j] = d.Nvec[i + 1]
        c[ns + i] = -1
        eq.append(LinearForm(tuple(c)))
    if with_n:
        c = [0] * dim
        for j, d in enumerate(divs):
            c[j] = d.N
        c[-1] = -1
        eq.append(LinearForm(tuple(c)))
    ge = [LinearForm(tuple(int(i == j) for i in range(dim)), -1) for j in range(ns)]
    cell = Cell(dim, tuple(eq) + tuple(f.pad(dim, ns) for f in theta.eq),
                tuple(ge) + tuple(f.pad(dim, ns) for f in theta.ge),
                tuple(type(cg)(cg.form.pad(dim, ns), cg.r, cg.d) for cg in theta.cong))
    return cell, divs


def zeta_multi(r: MultiResolutionData, theta: Cell, rvars: int) -> RationalSeries:
    """The multivariable series in ``T0..Tr`` built stratum by stratum.

    Each stratum's cell is specialized with an auxiliary variable carrying
    ``sum k_j nu_j``, which is then substituted by ``L^-1``.
    """
    names = tuple(f"T{i}" for i in range(rvars + 1))
    aux = names + (f"T{rvars + 1}",)
    out = RationalSeries(names)
    m = r.m
    for s in _ordered(r.strata):
        cell, divs = _stratum_cell(r, s, theta, rvars, False)
        ns = len(divs)
        dim = cell.dim
        forms = [LinearForm(tuple(d.N for d in divs) + (0,) * (dim - ns))]
        for i in range(rvars):
            forms.append(LinearForm.var(ns + m + i, dim))
        forms.append(LinearForm(tuple(d.nu for d in divs) + (0,) * (dim - ns)))
        g = gf_specialize(cell_gf(cell), forms, LinearForm((0,) * dim), aux)
        g = rs_substitute(g, {aux[-1]: (-1, (0,) * (rvars + 1))})
        w = _stratum_weight(s)
        out = out + g.scale(w.with_base(s.base) if s.base else w)
    return out


@dataclass(frozen=True)
class ConeComponent:
    """``coeff * sum_{x in cell} L^-weight(x) * [n(x), alpha(x)]`` bookkeeping."""

    coeff: GrothElement
    cell: Cell
    n_form: LinearForm
    alpha_forms: Tuple[LinearForm, ...] = ()
    weight: LinearForm = None

    def __post_init__(self):
        if self.weight is None:
            object.__setattr__(self, "weight", LinearForm((0,) * self.cell.dim))


def _compose(f: LinearForm, n_form: LinearForm, alpha_forms) -> LinearForm:
    """``f(n(x), alpha(x))`` as a form in x."""
    inner = (n_form,) + tuple(alpha_forms)
    if f.dim != len(inner):
        raise CellError(f"form over {f.dim} variables applied to (n, alpha) of length {len(inner)}")
    dim = n_form.dim
    coeffs = [sum(f.coeffs[i] * inner[i].coeffs[j] for i in range(len(inner))) for j in range(dim)]
    const = f.const + sum(f.coeffs[i] * inner[i].const for i in range(len(inner)))
    return LinearForm(tuple(coeffs), const)


def cone_sum_series(components: Sequence[ConeComponent], ell: LinearForm, eps: LinearForm) -> RationalSeries:
    """``sum coeff * L^-(weight + eps(n, alpha)) T^ell(n, alpha)`` over all cells."""
    out = RationalSeries(("T",))
    for comp in components:
        lf = _compose(ell, comp.n_form, comp.alpha_forms)
        ef = _compose(eps, comp.n_form, comp.alpha_forms)
        for piece in cell_decompose(comp.cell):
            for gvec in piece.generators:
                if lf.linear(gvec) <= 0:
                    raise CellError(f"ell is not positive on generator {gvec}")
                if ef.linear(gvec) < 0:
                    raise CellError(f"eps is negative on generator {gvec}")
        total = LinearForm(tuple(a + b for a, b in zip(comp.weight.coeffs, ef.coeffs)),
                           comp.weight.const + ef.const)
        g = gf_specialize(cell_gf(comp.cell), [lf], total, ("T",))
        out = out + g.scale(comp.coeff)
    return out


def cone_sum_limit(components, ell, eps) -> GrothElement:
    return rs_limit(cone_sum_series(components, ell, eps))


def multi_components(r: MultiResolutionData, theta: Cell, delta: Cell, rvars: int) -> List[ConeComponent]:
    """Cone components of ``sum_{(n,alpha) in delta} mu(A_{n,alpha}) ...``."""
    if delta.dim != rvars + 1:
        raise CellError(f"delta has dimension {delta.dim}, expected r + 1 = {rvars + 1}")
    out = []
    for s in _ordered(r.strata):
        cell, divs = _stratum_cell(r, s, theta, rvars, True)
        ns, m, dim = len(divs), r.m, cell.dim
        # delta lives on (n, alpha); n is the last coordinate, alpha after beta
        pos = [dim - 1] + [ns + m + i for i in range(rvars)]

        def place(f):
            c = [0] * dim
            for k, p in enumerate(pos):
                c[p] += f.coeffs[k]
            return LinearForm(tuple(c), f.const)

        cell = Cell(dim, cell.eq + tuple(place(f) for f in delta.eq),
                    cell.ge + tuple(place(f) for f in delta.ge),
                    cell.cong + tuple(type(cg)(place(cg.form), cg.r, cg.d) for cg in delta.cong))
        weight = LinearForm(tuple(d.nu for d in divs) + (0,) * (dim - ns))
        w = _stratum_weight(s)
        out.append(ConeComponent(w.with_base(s.base) if s.base else w, cell,
                                 LinearForm.var(dim - 1, dim),
                                 tuple(LinearForm.var(p, dim) for p in pos[1:]), weight))
    return out


class InvarianceError(AssertionError):
    pass


def invariant_limit(r: MultiResolutionData, theta: Cell, delta: Cell, ell: LinearForm, eps: LinearForm,
                 rvars: int, alternatives: Sequence[Tuple[LinearForm, LinearForm]] = ()) -> GrothElement:
    """Limit of the one-variable specialization; re-run for every alternative
    ``(ell, eps)`` and insist on the same value."""
    comps = multi_components(r, theta, delta, rvars)
    value = cone_sum_limit(comps, ell, eps)
    for ell2, eps2 in alternatives:
        other = cone_sum_limit(comps, ell2, eps2)
        if other != value:
            raise InvarianceError(f"limit depends on (ell, eps): {groth.render(value)} vs {groth.render(other)}")
    return value


# ------------------------------------------------------------------ JSON

def _stratum_from_json(k, obj) -> Stratum:
    try:
        cls = groth.from_json(obj.get("class", 1))
        return Stratum(tuple(str(i) for i in obj["I"]), cls, int(obj["m"]), obj.get("base"),
                       bool(obj.get("over_point", False)))
    except KeyError as exc:
        raise ResolutionError(f"stratum {k}: missing field {exc}") from exc
    except groth.GrothError as exc:
        raise ResolutionError(f"stratum {k}: bad class: {exc}") from exc


def resolution_from_json(obj):
    """Resolution schema; divisors with ``Nvec`` give MultiResolutionData."""
    try:
        dim = int(obj["dim"])
        divs = obj["divisors"]
    except KeyError as exc:
        raise ResolutionError(f"resolution: missing field {exc}") from exc
    strata = tuple(_stratum_from_json(k, s) for k, s in enumerate(obj.get("strata", [])))
    if any("Nvec" in d for d in divs):
        return MultiResolutionData(dim, tuple(MultiDivisor(str(d["id"]), tuple(int(x) for x in d["Nvec"]),
                                                           int(d["nu"])) for d in divs), strata)
    return ResolutionData(dim, tuple(Divisor(str(d["id"]), int(d["N"]), int(d["nu"])) for d in divs), strata)


def resolution_to_json(r) -> dict:
    multi = isinstance(r, MultiResolutionData)
    divs = [({"id": d.id, "Nvec": list(d.Nvec), "nu": d.nu} if multi else {"id": d.id, "N": d.N, "nu": d.nu})
            for d in r.divisors]
    strata = []
    for s in r.strata:
        e = {"I": list(s.I), "class": groth.render(s.cover_class), "m": s.m, "over_point": s.over_point}
        if s.base:
            e["base"] = s.base
        strata.append(e)
    return {"kind": "multi-resolution" if multi else "resolution", "dim": r.dim, "divisors": divs,
            "strata": strata}
