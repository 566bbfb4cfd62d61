import itertools
import random
from collections import Counter

import pytest

from mzl.groth import GrothElement
from mzl.lattice import (Cell, CellError, Congruence, LinearForm, cell_decompose, cell_enumerate, cell_from_json,
                         cell_gf, cell_to_json, gf_specialize)
from mzl.series import RationalSeries, parse, rs_eq, rs_expand, rs_hadamard

from helpers import random_cell, random_series

L = GrothElement.L
TRIANGLE = Cell(2, (), (LinearForm((1, -1)), LinearForm((0, 1), -1)))
EVENS = Cell(1, (), (LinearForm((1,), -1),), (Congruence(LinearForm((1,)), 0, 2),))


def piece_points(piece, bound):
    """Points of a half-open piece with coordinate sum at most ``bound``."""
    out = []
    k = len(piece.generators)
    for p in piece.points:
        base = [a + b for a, b in zip(piece.shift, p)]
        for mult in itertools.product(range(bound + 1), repeat=k):
            x = list(base)
            for m, g in zip(mult, piece.generators):
                x = [a + m * b for a, b in zip(x, g)]
            if sum(x) <= bound:
                out.append(tuple(x))
    return out


def test_decompose_examples():
    (p,) = cell_decompose(Cell(2))
    assert p.shift == (0, 0) and sorted(p.generators) == [(0, 1), (1, 0)] and p.points == ((0, 0),)
    (p,) = cell_decompose(TRIANGLE)
    assert p.shift == (1, 1) and sorted(p.generators) == [(1, 0), (1, 1)]
    assert sorted(piece_points(p, 10)) == sorted(cell_enumerate(TRIANGLE, 10))
    (p,) = cell_decompose(EVENS)
    assert p.shift == (2,) and p.generators == ((2,),)


def test_gf_examples():
    assert rs_eq(cell_gf(Cell(2)), parse("series(x1,x2): 1/((1-x1)(1-x2))"))
    assert rs_eq(cell_gf(TRIANGLE), parse("series(x1,x2): x1*x2/((1-x1)(1-x1*x2))"))
    assert rs_eq(cell_gf(EVENS), parse("series(x1): x1^2/(1-x1^2)"))


def test_triangle_gf_against_enumeration():
    got = rs_expand(cell_gf(TRIANGLE), 10)
    assert sorted(got) == sorted(cell_enumerate(TRIANGLE, 10))


def test_specialize_examples():
    g = gf_specialize(cell_gf(TRIANGLE), [LinearForm((1, 0))], LinearForm((1, 1)))
    assert rs_eq(g, parse("L^-2*T/((1-L^-1*T)(1-L^-2*T))"))
    # independent double sum
    want = {}
    for n in range(1, 11):
        for m in range(1, n + 1):
            want[(n,)] = want.get((n,), GrothElement()) + L(-(n + m))
    assert rs_expand(g, 10) == want
    pos = Cell(1, (), (LinearForm((1,), -1),))
    assert rs_eq(gf_specialize(cell_gf(pos), [LinearForm((1,))], LinearForm((0,))), parse("T/(1-T)"))
    with pytest.raises(CellError):
        gf_specialize(cell_gf(TRIANGLE), [LinearForm((0, 1))], LinearForm((0, 0)))


def test_enumerate_examples():
    assert set(cell_enumerate(Cell(2), 2)) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert set(cell_enumerate(TRIANGLE, 4)) == {(1, 1), (2, 1), (2, 2), (3, 1)}
    bad = Cell(1, (), (), (Congruence(LinearForm((2,)), 1, 2),))
    assert cell_enumerate(bad, 8) == []
    assert cell_decompose(bad) == []
    assert cell_gf(bad).is_zero_repr()


def test_random_cells_against_enumeration():
    rng = random.Random(2024)
    for _ in range(50):
        c = random_cell(rng)
        pieces = cell_decompose(c)
        B = 8
        pts = cell_enumerate(c, B)
        exps = rs_expand(cell_gf(c), B)
        assert set(exps) == set(pts), c
        assert all(v == 1 for v in exps.values()), c
        # the half-open pieces are pairwise disjoint and cover the cell
        counts = Counter(x for p in pieces for x in piece_points(p, B))
        assert all(v == 1 for v in counts.values()), c
        assert set(counts) == set(pts), c


def test_specialize_never_emits_degree_zero_factor():
    rng = random.Random(8)
    for _ in range(40):
        c = random_cell(rng, max_dim=3)
        g = cell_gf(c)
        forms = [LinearForm(tuple(rng.randint(1, 3) for _ in range(c.dim)))]
        eps = LinearForm(tuple(rng.randint(0, 2) for _ in range(c.dim)))
        s = gf_specialize(g, forms, eps)
        for t in s.terms():
            assert all(any(f.b) for f in t.den)


def test_fiber_product_hadamard_law():
    rng = random.Random(17)
    for _ in range(30):
        p, q = random_series(rng), random_series(rng)
        N = 15
        ep, eq_, eh = rs_expand(p, N), rs_expand(q, N), rs_expand(rs_hadamard(p, q), N)
        assert eh == {k: ep[k] * eq_[k] for k in ep if k in eq_ and ep[k] * eq_[k]}


def test_cell_json_round_trip():
    for c in (TRIANGLE, EVENS, Cell(3, (LinearForm((1, 1, -1)),))):
        assert cell_from_json(cell_to_json(c)) == c


def test_cell_contains():
    assert TRIANGLE.contains((3, 2)) and not TRIANGLE.contains((2, 3)) and not TRIANGLE.contains((1, 0))
