"""Shared strategies and random generators for the test suite."""
import os
import random

from hypothesis import strategies as st

from mzl.groth import ClassSymbol, GrothElement, LaurentPoly
from mzl.lattice import Cell, Congruence, LinearForm
from mzl.series import RationalSeries


ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


# ------------------------------------------------------------- strategies

SYMBOLS = [ClassSymbol("E"), ClassSymbol("F"), ClassSymbol("mu", 2), ClassSymbol("C", 3)]

laurent = st.dictionaries(st.integers(-3, 3), st.integers(-4, 4), max_size=3).map(LaurentPoly)


@st.composite
def groth_elements(draw, labels=(None,)):
    out = GrothElement()
    for _ in range(draw(st.integers(0, 3))):
        syms = tuple(draw(st.lists(st.sampled_from(SYMBOLS), max_size=2)))
        base = draw(st.sampled_from(labels))
        out = out + GrothElement({(syms, base): draw(laurent)})
    return out


@st.composite
def generator_products(draw, max_factors=3, max_a=4, max_b=4):
    """Products of 1 to ``max_factors`` generators ``L^a T^b / (1 - L^a T^b)``
    times a random coefficient."""
    k = draw(st.integers(1, max_factors))
    den = [(draw(st.integers(-max_a, max_a)), draw(st.integers(1, max_b))) for _ in range(k)]
    coeff = GrothElement.from_poly(draw(laurent)) or GrothElement.one()
    return RationalSeries.term(coeff.times_L(sum(a for a, _ in den)), sum(b for _, b in den), den)


@st.composite
def convergent_series(draw, max_terms=2, **kw):
    p = RationalSeries(("T",))
    for _ in range(draw(st.integers(1, max_terms))):
        p = p + draw(generator_products(**kw))
    return p


def random_series(rng, r=1, max_terms=3, max_factors=2, a=2, b=2):
    """Arbitrary closed-form series (numerator shifts allowed)."""
    names = ("T",) if r == 1 else tuple(f"T{i}" for i in range(r))
    s = RationalSeries(names)
    for _ in range(rng.randint(1, max_terms)):
        den = []
        for _ in range(rng.randint(0, max_factors)):
            bv = tuple(rng.randint(0, b) for _ in range(r))
            if not any(bv):
                bv = (1,) + bv[1:]
            den.append((rng.randint(-a, a), bv))
        b0 = tuple(rng.randint(0, b) for _ in range(r))
        s = s + RationalSeries.term(GrothElement.L(rng.randint(-1, 1)) + rng.randint(-2, 2), b0, den, names)
    return s


def random_cell(rng, max_dim=4, coef=3):
    n = rng.randint(1, max_dim)

    def form():
        return LinearForm(tuple(rng.randint(-coef, coef) for _ in range(n)), rng.randint(-coef, coef))

    eq = tuple(form() for _ in range(rng.randint(0, 1)))
    ge = tuple(form() for _ in range(rng.randint(0, 3)))
    cg = tuple(Congruence(LinearForm(tuple(rng.randint(-2, 2) for _ in range(n))), rng.randint(0, 2),
                          rng.randint(1, 3)) for _ in range(rng.randint(0, 1)))
    return Cell(n, eq, ge, cg)


def random_multi(rng, n_div=None):
    """Random multi-resolution data with one auxiliary function, plus a conic
    theta over ``(beta1, alpha1)`` whose fibers over each ``beta1`` are finite."""
    from math import gcd

    from mzl.groth import ClassSymbol, GrothElement
    from mzl.zeta import MultiDivisor, MultiResolutionData, Stratum

    n_div = n_div or rng.randint(1, 3)
    divs = [MultiDivisor(f"E{i}", (rng.randint(1, 3), rng.randint(0, 2)), rng.randint(1, 4)) for i in range(n_div)]
    strata = []
    subsets = [(i,) for i in range(n_div)] + [(i, j) for i in range(n_div) for j in range(i + 1, n_div)]
    for I in subsets:
        if rng.random() < 0.25:
            continue
        m = 0
        for i in I:
            m = gcd(m, divs[i].N)
        sym = GrothElement.symbol(ClassSymbol("E" + "".join(map(str, I)) + "o", m))
        cls = sym * (GrothElement.L(rng.randint(0, 1)) + rng.randint(-1, 1)) or sym
        strata.append(Stratum(tuple(f"E{i}" for i in I), cls, m, None, rng.random() < 0.5))
    if not strata:
        strata.append(Stratum(("E0",), GrothElement.symbol(ClassSymbol("E0o", divs[0].N)), divs[0].N))
    r = MultiResolutionData(2, tuple(divs), tuple(strata))
    theta = rng.choice([
        Cell(2, (LinearForm((1, -1)),)),                      # alpha = beta
        Cell(2, (LinearForm((2, -1)),)),                      # alpha = 2 beta
        Cell(2, (), (LinearForm((1, -1)),)),                  # alpha <= beta
        Cell(2, (), (LinearForm((-1, 1)), LinearForm((2, -1)))),       # beta <= alpha <= 2 beta
        Cell(2, (), (LinearForm((1, -1)),), (Congruence(LinearForm((1, -1)), 0, 2),)),  # alpha <= beta, same parity
    ])
    return r, theta
