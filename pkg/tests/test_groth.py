from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mzl import groth
from mzl.groth import (ClassSymbol, GrothElement, GrothError, LaurentPoly, Specialization, gr_add, gr_mul,
                       gr_specialize, mu_symbol, rel_pullback, rel_pushforward)

from helpers import groth_elements

L = GrothElement.L
E = GrothElement.symbol(ClassSymbol("E"))
MU2 = GrothElement.symbol(mu_symbol(2))


def test_add_examples():
    assert gr_add(L() - 1, 1 - L()) == GrothElement()
    assert gr_add(MU2, MU2) == MU2 * 2
    s = gr_add(L(2) - 1, E * L())
    assert len(s.items()) == 2  # one entry per symbol monomial
    assert groth.render(s) == "L^2 - 1 + L*[E]"


def test_mul_examples():
    assert gr_mul(L() - 1, L() + 1) == L(2) - 1
    assert gr_mul(E * L(-2), L(3)) == E * L()
    assert gr_mul((L() - 1) + MU2, MU2) == (L() - 1) * MU2 + MU2 ** 2
    assert MU2 ** 2 != MU2


def test_specialize_examples():
    s = Specialization({mu_symbol(2): LaurentPoly(2)})
    assert gr_specialize((1 - L()) * (MU2 - 1), s) == LaurentPoly({0: 1, 1: -1})
    assert gr_specialize(L(2) - 1, Specialization({}, 5)) == 24
    assert gr_specialize(GrothElement.symbol(mu_symbol(3)), Specialization({}, 7)) == 3


def test_mu3_count_in_f7():
    # independent count of cube roots of unity
    assert sum(1 for x in range(1, 7) if pow(x, 3, 7) == 1) == 3


def test_specialize_negative_powers_are_exact():
    v = gr_specialize(L(-2) + 1, Specialization({}, 3))
    assert v == Fraction(10, 9)


def test_specialize_mu_needs_root_of_unity():
    with pytest.raises(GrothError):
        gr_specialize(GrothElement.symbol(mu_symbol(3)), Specialization({}, 5))
    # an explicit value overrides the default
    s = Specialization({mu_symbol(3): LaurentPoly(1)}, 5)
    assert gr_specialize(GrothElement.symbol(mu_symbol(3)), s) == 1


def test_specialize_unknown_symbol():
    with pytest.raises(GrothError):
        gr_specialize(E, Specialization({}, 3))


def test_pullback_examples():
    e2 = (L() - 1).with_base("xaxis*")
    assert rel_pullback(e2, {"xaxis*": [("xaxis*", 1)]}) == e2
    e1 = (L() - 1).with_base("yaxis*")
    assert rel_pullback(e1, {"yaxis*": []}) == GrothElement()
    o = MU2.with_base("origin")
    assert rel_pullback(o, {"origin": [("pt", 1)]}) == MU2.with_base("pt")
    with pytest.raises(GrothError):
        rel_pullback(o, {})


def test_pushforward_examples():
    assert rel_pushforward((L() - 1).with_base("A") + (1 - L()).with_base("B")) == GrothElement()
    assert rel_pushforward(MU2.with_base("origin")) == MU2
    assert rel_pushforward(L() + E) == L() + E


def test_pushforward_sums_collapsing_labels():
    e = E.with_base("A") + E.with_base("B") + E.with_base("C")
    assert rel_pushforward(e) == E * 3


def test_labels_multiply_as_fiber_products():
    a, b = E.with_base("A"), E.with_base("B")
    assert a * b == GrothElement()
    assert a * L() == (E * L()).with_base("A")


def test_parse_render_examples():
    e = groth.parse("3*L^2*[E1o;mu=2]@origin - L^-1 + [mu3]")
    assert groth.render(e) == "-L^-1 + [mu3] + 3*L^2*[E1o;mu=2]@origin"
    assert groth.parse("0") == GrothElement()
    with pytest.raises(GrothError):
        groth.parse("L^")


ring = groth_elements()
labelled = groth_elements(labels=(None, "A", "B"))


@given(ring, ring, ring)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + (-a) == GrothElement()
    assert a * GrothElement.one() == a


@given(ring, ring, st.sampled_from([3, 7, 13]))
def test_specialize_is_homomorphism(a, b, q):
    s = Specialization({ClassSymbol("E"): LaurentPoly({1: 1}), ClassSymbol("F"): LaurentPoly(2),
                        ClassSymbol("C", 3): LaurentPoly({0: 1, 1: 1})}, q)
    assert gr_specialize(a * b, s) == gr_specialize(a, s) * gr_specialize(b, s)
    assert gr_specialize(a + b, s) == gr_specialize(a, s) + gr_specialize(b, s)


@given(labelled)
def test_pushforward_of_identity_pullback(e):
    table = {"A": [("A", 1)], "B": [("B", 1)]}
    assert rel_pushforward(rel_pullback(e, table)) == rel_pushforward(e)


@given(labelled)
def test_round_trip(e):
    text = groth.render(e)
    assert groth.parse(text) == e
    assert groth.render(groth.parse(text)) == text
    assert groth.from_json(groth.to_json(e)) == e
