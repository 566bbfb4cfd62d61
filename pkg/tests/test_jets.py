import itertools
import random
from fractions import Fraction

import pytest

from mzl import io, jets
from mzl.ffield import Field, FieldError, get_field
from mzl.groth import GrothElement, LaurentPoly, Specialization, mu_symbol
from mzl.jets import (ArcCondition, BudgetExceeded, JetError, OrdConstraint, OrdTerm, PolySpec, brute_count,
                      compare_zeta, contact_condition, count_jets, jet_integral, parse_poly, stability_probe)
from mzl.zeta import Divisor, ResolutionData, Stratum

from helpers import fixture_path

XY = parse_poly("x*y", ["x", "y"])
X1 = PolySpec.coordinate(0, 1)


def naive_contact_count(f: PolySpec, n: int, level: int, p: int, base_zero=()):
    """Pure-python count of level-``level`` jets with ``f(gamma) = t^n mod t^(n+1)``
    over the prime field F_p."""
    d = f.d
    size = level + 1

    def mul(a, b):
        out = [0] * size
        for i, x in enumerate(a):
            if x:
                for j in range(size - i):
                    out[i + j] = (out[i + j] + x * b[j]) % p
        return out

    count = 0
    for coeffs in itertools.product(range(p), repeat=d * size):
        gamma = [list(coeffs[i * size:(i + 1) * size]) for i in range(d)]
        if any(gamma[i][0] for i in base_zero):
            continue
        total = [0] * size
        for exps, c in f.monomials:
            term = [c % p] + [0] * level
            for i, e in enumerate(exps):
                for _ in range(e):
                    term = mul(term, gamma[i])
            total = [(a + b) % p for a, b in zip(total, term)]
        want = [0] * size
        want[n] = 1
        if total[:n + 1] == want[:n + 1]:
            count += 1
    return count


def test_count_examples():
    assert count_jets(contact_condition(XY, 1), 1, 3).count == 12
    assert count_jets(contact_condition(X1, 2, at_origin=True), 2, 5).count == 1
    X, Y = PolySpec.coordinate(0, 2), PolySpec.coordinate(1, 2)
    u2 = ArcCondition(2, ords=(OrdConstraint((OrdTerm(1, (Y,)),), ">", 0),
                               OrdConstraint((OrdTerm(1, (X,)), OrdTerm(1, (Y,))), ">", 2)))
    assert count_jets(u2, 2, 3).count == 63 == 3 * 27 - 2 * 9


def test_xy_contact_over_prime_powers():
    # a0 b0 = 0 and a0 b1 + a1 b0 = 1 has 2q(q - 1) solutions over any field
    for q in (2, 3, 4, 5, 8, 9):
        assert count_jets(contact_condition(XY, 1), 1, q).count == 2 * q * (q - 1)


def test_brute_against_naive_oracle():
    rng = random.Random(12)
    for _ in range(40):
        d = rng.randint(1, 2)
        p = rng.choice([2, 3])
        f = PolySpec(d, tuple((tuple(rng.randint(0, 3) for _ in range(d)), rng.randint(-2, 2))
                              for _ in range(rng.randint(1, 3))))
        if not f.monomials:
            continue
        n = rng.randint(0, 2)
        level = n + rng.randint(0, 1)
        bz = tuple(i for i in range(d) if rng.random() < 0.3)
        got = count_jets(ArcCondition(d, ((f, n),), base_zero=bz), level, p, "brute").count
        assert got == naive_contact_count(f, n, level, p, bz), (f, n, level, p, bz)


def test_recursive_matches_brute():
    rng = random.Random(7)
    done = 0
    while done < 150:
        d = rng.randint(1, 3)
        q = rng.choice([2, 3, 5, 7])
        f = PolySpec(d, tuple((tuple(rng.randint(0, 3) for _ in range(d)), rng.randint(-3, 3))
                              for _ in range(rng.randint(1, 4))))
        if not f.monomials:
            continue
        n = rng.randint(0, 4)
        level = n + rng.randint(0, 1)
        bz = tuple(i for i in range(d) if rng.random() < 0.3)
        if q ** (d * (level + 1) - len(bz)) > 1e5:
            continue
        done += 1
        cond = ArcCondition(d, ((f, n),), base_zero=bz)
        assert count_jets(cond, level, q, "brute").count == count_jets(cond, level, q, "recursive").count


def test_threads_do_not_change_counts(monkeypatch):
    monkeypatch.setattr(jets, "BLOCK", 97)  # many uneven blocks
    f = parse_poly("x*y + z^2", ["x", "y", "z"])
    cond = contact_condition(f, 2)
    one = brute_count(cond, 2, 3, threads=1)
    assert brute_count(cond, 2, 3, threads=4) == one
    monkeypatch.setattr(jets, "BLOCK", 2 ** 17)
    assert brute_count(cond, 2, 3, threads=1) == one


def test_budget(monkeypatch):
    monkeypatch.setenv("MZL_BUDGET", "1000")
    X, Y = PolySpec.coordinate(0, 2), PolySpec.coordinate(1, 2)
    cond = ArcCondition(2, ords=(OrdConstraint((OrdTerm(1, (X,)),), ">=", 1),))
    with pytest.raises(BudgetExceeded):
        count_jets(cond, 3, 3)
    # a pure contact locus falls back to the recursive counter
    assert count_jets(contact_condition(XY, 3), 3, 3).method == "recursive"
    monkeypatch.setenv("MZL_BUDGET", "lots")
    with pytest.raises(JetError):
        jets.budget()


def test_contact_above_level():
    with pytest.raises(JetError):
        count_jets(contact_condition(XY, 3), 2, 3)


def test_integral_examples():
    cap = 8
    rep = jet_integral(ArcCondition(1), (OrdTerm(1, (X1,)),), 3, cap)
    exact = Fraction(3, 4)
    assert rep.value <= exact <= rep.value + rep.tail_bound
    partial = sum(Fraction(2, 3 ** (n + 1)) * Fraction(1, 3 ** n) for n in range(cap + 1))
    assert rep.value == partial
    assert jet_integral(ArcCondition(1), (), 3, 4).value == 1
    empty = ArcCondition(1, ords=(OrdConstraint((OrdTerm(1, (X1,)),), "<", 0),))
    rep = jet_integral(empty, (OrdTerm(1, (X1,)),), 3, 4)
    assert rep.value == 0 and rep.tail_bound == 0


def test_stability_examples():
    rep = stability_probe(contact_condition(XY, 1), 3, 1, 3)
    assert rep.stable and rep.ratios == [9, 9]
    ord2 = ArcCondition(1, ords=(OrdConstraint((OrdTerm(1, (X1,)),), "=", 2),))
    rep = stability_probe(ord2, 3, 2, 4)
    assert rep.levels == [2, 3, 4] and rep.ratios == [3, 3]
    singular = ArcCondition(2, contact=((XY, 1),), ambient=(XY,))
    rep = stability_probe(singular, 3, 1, 3)
    assert not rep.supported and not rep.stable


def test_compare_examples():
    r = io.load(fixture_path("xy_res.json"), "resolution")
    for q in (3, 5):
        assert compare_zeta(r, XY, 4, q).ok
    z3 = ResolutionData(1, (Divisor("E", 3, 1),), (Stratum(("E",), GrothElement.symbol(mu_symbol(3)), 3, None, True),))
    f = parse_poly("x^3", ["x"])
    rep = compare_zeta(z3, f, 6, 7, Specialization({mu_symbol(3): LaurentPoly(3)}, 7), local=True)
    assert rep.ok
    # gamma = a2 t^2 + ... with a2^3 = 1 at n = 6
    assert {row.n: row.counted for row in rep.rows if row.counted} == {3: 3 * 7 ** 2, 6: 3 * 7 ** 4}


def test_compare_reports_corruption():
    r = io.load(fixture_path("xy_res.json"), "resolution")
    bad = ResolutionData(r.dim, (Divisor("Ex", 1, 2), r.divisors[1]), r.strata)
    rep = compare_zeta(bad, XY, 3, 3)
    assert not rep.ok and rep.first_mismatch == 1


def test_compare_checks_dimensions():
    r = io.load(fixture_path("xy_res.json"), "resolution")
    with pytest.raises(JetError):
        compare_zeta(r, X1, 2, 3)


def test_fields():
    for q in (4, 8, 9, 25):
        F = Field(q)
        elems = range(q)
        nonzero = [a for a in elems if a]
        for a in nonzero:
            assert sorted(int(F.mul(a, b)) for b in nonzero) == nonzero
        for a, b, c in itertools.islice(itertools.product(elems, repeat=3), 0, None, 7):
            assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    with pytest.raises(FieldError):
        Field(6)
    assert get_field(9) is get_field(9)


def test_poly_parsing():
    f = parse_poly("x^2 + y^3 - 2*x*y", ["x", "y"])
    assert f((2, 1)) == 4 + 1 - 4
    assert parse_poly(f.render(), ["x", "y"]) == f
    with pytest.raises(JetError):
        parse_poly("x + w", ["x", "y"])
