"""The integral identity: its U/W split, the closed forms behind the U part,
the W cancellation and the end-to-end check on resolution fixtures."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import groth
from .groth import GrothElement, Specialization, gr_specialize
from .jets import ArcCondition, OrdConstraint, OrdTerm, PolySpec
from .lattice import Cell, LinearForm, cell_gf, gf_specialize
from .series import RationalSeries, rs_expand, rs_hadamard, rs_limit
from .zeta import (ConeComponent, MultiResolutionData, ResolutionData, cone_sum_limit,
                   multi_components, nearby_cycles, zeta_from_resolution)


class IdentityError(ValueError):
    pass


# the cell {(n, m) : 1 <= m <= n}
TRIANGLE = Cell(2, (), (LinearForm((1, -1)), LinearForm((0, 1), -1)))


def u_cell_series(d1: int, d2: int) -> RationalSeries:
    """``(L^d2 - 1) sum_{1<=m<=n} L^-(n d1 + (d2 - d1) m) T^n``."""
    g = gf_specialize(cell_gf(TRIANGLE), [LinearForm((1, 0))], LinearForm((d1, d2 - d1)))
    return g.scale(GrothElement.L(d2) - 1)


def u_series(d1: int, d2: int) -> RationalSeries:
    """``sum_n [U'_n] L^-n(d1+d2) T^n`` from the triangle cell plus the tail
    ``L^d1 sum_{n>=1} L^-n d2 T^n``."""
    if d1 < 1 or d2 < 1:
        raise IdentityError("d1 and d2 must be positive")
    tail = RationalSeries.geometric(-d2, 1).scale(GrothElement.L(d1))
    return u_cell_series(d1, d2) + tail


def u_prime_class(d1: int, d2: int, n: int) -> GrothElement:
    """Closed form of ``[U'_n]`` as a sum over ``m = ord y``."""
    L = GrothElement.L
    total = L((n + 1) * d1)
    for m in range(1, n + 1):
        total = total + L(m * d1) * (L(d2) - 1) * L((n - m) * d2)
    return total


def u_prime_condition(d1: int, d2: int, n: int) -> ArcCondition:
    """Arcs ``(x, y)`` in ``A^d1 x A^d2`` with ``ord y > 0`` and ``ord x + ord y > n``."""
    d = d1 + d2
    xs = tuple(PolySpec.coordinate(i, d) for i in range(d1))
    ys = tuple(PolySpec.coordinate(d1 + i, d) for i in range(d2))
    return ArcCondition(d, ords=(OrdConstraint((OrdTerm(1, ys),), ">", 0),
                                 OrdConstraint((OrdTerm(1, xs), OrdTerm(1, ys)), ">", n)))


def _check_zloc(z: RationalSeries):
    if z.arity != 1:
        raise IdentityError("z_loc must be univariate")
    if rs_expand(z, 0):
        raise IdentityError("z_loc must have zero constant term")


def u_part(d1: int, d2: int, z_loc: RationalSeries) -> GrothElement:
    """``-lim (u_series * z_loc)`` (Hadamard product), checked against ``L^d1 * (-lim z_loc)``."""
    _check_zloc(z_loc)
    value = -rs_limit(rs_hadamard(u_series(d1, d2), z_loc))
    expected = GrothElement.L(d1) * -rs_limit(z_loc)
    if value != expected:
        raise IdentityError(f"U part {groth.render(value)} differs from {groth.render(expected)}")
    return value


# --------------------------------------------------------------------- W part

@dataclass
class WReport:
    limit_plain: GrothElement
    limit_twisted: GrothElement
    difference: GrothElement

    @property
    def ok(self) -> bool:
        return not self.difference


def _restrict_triangle(comps: Sequence[ConeComponent]) -> List[ConeComponent]:
    out = []
    for c in comps:
        if len(c.alpha_forms) != 1:
            raise IdentityError("W data needs exactly one auxiliary index m")
        n, m = c.n_form, c.alpha_forms[0]
        extra = (LinearForm(tuple(a - b for a, b in zip(n.coeffs, m.coeffs)), n.const - m.const),
                 LinearForm(m.coeffs, m.const - 1))
        cell = Cell(c.cell.dim, c.cell.eq, c.cell.ge + extra, c.cell.cong)
        out.append(ConeComponent(c.coeff, cell, n, (m,), c.weight))
    return out


def w_cancellation(data, d: int) -> WReport:
    """``L^d`` times the difference of the limits of ``sum mu(A_nm) T^n`` and
    ``sum mu(A_nm) L^-m T^n`` over ``1 <= m <= n``.

    ``data`` is a list of ConeComponents over ``(n, m)`` or a pair
    ``(MultiResolutionData, theta)`` with one auxiliary index.
    """
    if isinstance(data, tuple) and len(data) == 2 and isinstance(data[0], MultiResolutionData):
        comps = multi_components(data[0], data[1], Cell(2), 1)
    elif isinstance(data, (list, tuple)) and all(isinstance(c, ConeComponent) for c in data):
        comps = list(data)
    else:
        raise IdentityError("W data must be cone-generated (cone components or multi-resolution data)")
    comps = _restrict_triangle(comps)
    ell = LinearForm((1, 0))
    a = cone_sum_limit(comps, ell, LinearForm((0, 0)))
    b = cone_sum_limit(comps, ell, LinearForm((0, 1)))
    return WReport(a, b, (a - b).times_L(d))


# ----------------------------------------------------------- end to end check

@dataclass
class IdentityInstance:
    d1: int
    d2: int
    d3: int
    res_f: ResolutionData
    table: Dict[str, List[Tuple[str, GrothElement]]]
    res_ftilde: Optional[ResolutionData] = None
    poly: Optional[PolySpec] = None
    name: str = ""

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1 or self.d3 < 0:
            raise IdentityError("need d1, d2 >= 1 and d3 >= 0")
        if self.res_f.dim != self.d1 + self.d2 + self.d3:
            raise IdentityError(f"res_f has dimension {self.res_f.dim}, expected d1 + d2 + d3")
        labels = {s.base for s in self.res_f.strata if s.base}
        for k in self.table:
            if k not in labels:
                raise IdentityError(f"pullback table mentions unknown label {k!r}")
        for k in labels:
            if k not in self.table:
                raise IdentityError(f"label {k!r} of res_f is missing from the pullback table")
        if self.res_ftilde is not None and self.res_ftilde.dim != self.d3:
            raise IdentityError("res_ftilde must live on the d3-dimensional factor")
        if self.poly is not None and self.poly.d != self.res_f.dim:
            raise IdentityError("polynomial arity differs from the resolution dimension")

    def homogeneous(self) -> Optional[bool]:
        """Equal x- and y-degree in every monomial (weight zero under the scaling)."""
        if self.poly is None:
            return None
        return all(sum(e[:self.d1]) == sum(e[self.d1:self.d1 + self.d2]) for e, _c in self.poly.monomials)


@dataclass
class IdentityReport:
    lhs: GrothElement
    rhs: GrothElement
    symbolic: bool
    specialized: List[Tuple[int, Fraction, Fraction, bool]] = field(default_factory=list)
    homogeneous: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return self.symbolic and all(r[3] for r in self.specialized) and self.homogeneous is not False

    def summary(self) -> str:
        verdict = "MATCH" if self.ok else "MISMATCH"
        return f"LHS = {groth.render(self.lhs)}, RHS = {groth.render(self.rhs)}, {verdict}"


def identity_sides(inst: IdentityInstance) -> Tuple[GrothElement, GrothElement]:
    s_f = nearby_cycles(zeta_from_resolution(inst.res_f))
    lhs = groth.rel_pushforward(groth.rel_pullback(s_f, inst.table))
    if inst.res_ftilde is None:
        rhs = GrothElement()
    else:
        rhs = GrothElement.L(inst.d1) * nearby_cycles(zeta_from_resolution(inst.res_ftilde, local=True))
    return lhs, rhs


def identity_check(inst: IdentityInstance, specs: Sequence[Specialization] = ()) -> IdentityReport:
    lhs, rhs = identity_sides(inst)
    rep = IdentityReport(lhs, rhs, lhs == rhs, homogeneous=inst.homogeneous())
    for s in specs:
        a = Fraction(gr_specialize(lhs, s))
        b = Fraction(gr_specialize(rhs, s))
        rep.specialized.append((s.q, a, b, a == b))
    return rep
