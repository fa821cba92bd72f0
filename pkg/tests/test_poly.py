"""Tests for multivariate polynomials over F_q: parsing, graded reverse
lexicographic order, Frobenius decomposition, and Groebner machinery."""

import random

import pytest

from cartier_lab.errors import ParseError, ValidationError
from cartier_lab.fields import Fq
from cartier_lab.poly import (
    IdealSpec,
    PolyRing,
    buchberger,
    compose_from_components,
    divmod_multi,
    frobenius_component,
    frobenius_decompose,
    gcd_univariate,
    grevlex_key,
    is_regular_sequence,
    normal_form,
    s_polynomial,
    solve_membership,
)

SEED = 7301


def ring(p, e=1, nvars=1):
    return PolyRing(Fq(p, e), tuple("xyz"[:nvars]))


# ------------------------------------------------------------ parse/format


@pytest.mark.parametrize(
    "text,canonical",
    [
        ("x^2*y+x+1", "x^2*y+x+1"),
        ("1+x", "x+1"),
        ("x*y + y*x", "2*x*y"),
        ("0", "0"),
        ("y^3", "y^3"),
        ("2*x^2 + 2*x^2", "4*x^2"),
    ],
)
def test_parse_format_canonical(text, canonical):
    R = ring(5, nvars=2)
    assert str(R.parse(text)) == canonical


@pytest.mark.parametrize("p,e,nvars", [(2, 1, 1), (3, 1, 2), (2, 2, 2), (5, 1, 3)])
def test_random_polynomials_roundtrip_through_strings(p, e, nvars):
    R = ring(p, e, nvars)
    rng = random.Random(SEED + p + nvars)
    for _ in range(25):
        f = R.random_poly(rng, max_degree=4)
        assert R.parse(str(f)) == f


def test_parse_rejects_garbage():
    R = ring(2, nvars=2)
    for bad in ("x +", "w", "x^", "x**2", "3x"):
        with pytest.raises(ParseError):
            R.parse(bad)


def test_parse_reduces_coefficients_mod_p():
    R = ring(3)
    assert R.parse("4*x") == R.parse("x")
    assert R.parse("3*x").is_zero()


# ----------------------------------------------------------------- ordering


def test_grevlex_ordering_properties():
    """Degree dominates; ties are broken reverse-lexicographically by the
    LAST variable with the SMALLER exponent winning.  Pinned against the
    standard worked example: x^2 > xy > y^2 > xz > yz > z^2 for x>y>z."""
    order = [(2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2)]
    keys = [grevlex_key(m) for m in order]
    assert keys == sorted(keys, reverse=True)
    # degree dominates everything
    assert grevlex_key((0, 0, 3)) > grevlex_key((2, 0, 0))


def test_leading_term_follows_grevlex():
    R = ring(5, nvars=3)
    f = R.parse("x*y + z^2 + x")
    mono, coeff = f.leading()
    assert mono == (1, 1, 0)
    assert coeff == R.ctx.scalar(1)


# ------------------------------------------------------------- arithmetic


@pytest.mark.parametrize("p,e", [(2, 1), (3, 1), (2, 2)])
def test_ring_axioms_on_randoms(p, e):
    R = ring(p, e, nvars=2)
    rng = random.Random(SEED + 10 * p + e)
    for _ in range(20):
        f = R.random_poly(rng, max_degree=3)
        g = R.random_poly(rng, max_degree=3)
        h = R.random_poly(rng, max_degree=3)
        assert (f + g) * h == f * h + g * h
        assert f * g == g * f
        assert (f * g) * h == f * (g * h)
        assert f + (-f) == R.zero


def test_pth_power_is_frobenius_on_polynomials():
    """Freshman's dream: (f+g)^p = f^p + g^p, computed coefficientwise."""
    for p in (2, 3, 5):
        R = ring(p, nvars=2)
        rng = random.Random(SEED + p)
        for _ in range(10):
            f = R.random_poly(rng, max_degree=3)
            g = R.random_poly(rng, max_degree=3)
            assert (f + g).pth_power() == f.pth_power() + g.pth_power()
            naive = R.one
            for _ in range(p):
                naive = naive * f
            assert f.pth_power() == naive


def test_substitute_evaluates():
    R = ring(3, nvars=2)
    f = R.parse("x^2*y + 2*y + 1")
    two = R.ctx.scalar(2)
    one = R.ctx.scalar(1)
    val = f.substitute({0: R.scalar(two), 1: R.scalar(one)})
    # 4*1 + 2 + 1 = 7 = 1 mod 3
    assert val == R.one


# ------------------------------------------- Frobenius decomposition


@pytest.mark.parametrize("p,e,nvars", [(2, 1, 1), (3, 1, 2), (2, 2, 1), (5, 1, 2)])
def test_frobenius_decompose_roundtrip(p, e, nvars):
    """f = sum_a h_a^p x^a with a ranging over [0,p)^n, uniquely."""
    R = ring(p, e, nvars)
    rng = random.Random(SEED + p * 7 + nvars)
    for _ in range(20):
        f = R.random_poly(rng, max_degree=3 * p)
        comps = frobenius_decompose(f)
        for a in comps:
            assert all(0 <= ai < p for ai in a)
        assert compose_from_components(R, comps) == f
        for a, h in comps.items():
            assert frobenius_component(f, a) == h


def test_frobenius_component_worked_example():
    R = ring(2)
    f = R.parse("x^3+x")  # = (x+1)^2 * x
    assert str(frobenius_component(f, (1,))) == "x+1"
    assert frobenius_component(f, (0,)).is_zero()


def test_frobenius_decompose_respects_twisted_linearity():
    R = ring(3)
    rng = random.Random(SEED)
    for _ in range(10):
        f = R.random_poly(rng, max_degree=4)
        g = R.random_poly(rng, max_degree=2)
        a = (1,)
        lhs = frobenius_component(g.pth_power() * f, a)
        rhs = g * frobenius_component(f, a)
        assert lhs == rhs


# ----------------------------------------------------------- division / GB


def test_divmod_multi_invariant():
    R = ring(3, nvars=2)
    rng = random.Random(SEED + 5)
    for _ in range(15):
        f = R.random_poly(rng, max_degree=4)
        divisors = [R.parse("x^2+y"), R.parse("y^2+2")]
        quots, rem = divmod_multi(f, divisors)
        acc = rem
        for q, d in zip(quots, divisors):
            acc = acc + q * d
        assert acc == f
        # remainder contains no monomial divisible by a leading monomial
        for mono, _ in rem.sorted_terms():
            for d in divisors:
                lm, _ = d.leading()
                assert not all(m >= l for m, l in zip(mono, lm))


def test_buchberger_twisted_cubic():
    """Classical worked example: the curve (t, t^2, t^3).  The graded
    reverse lexicographic basis is {x^2-y, x*y-z, y^2-x*z}."""
    R = ring(5, nvars=3)
    gens = [R.parse("y+4*x^2"), R.parse("z+4*x^3")]
    G = buchberger(gens)
    assert sorted(str(g) for g in G) == ["x*y+4*z", "x^2+4*y", "y^2+4*x*z"]


def test_buchberger_satisfies_the_pair_criterion():
    """All S-polynomials reduce to zero: the defining property,
    independent of how the basis was produced."""
    for p in (2, 3):
        R = ring(p, nvars=2)
        gens = [R.parse("x^2+y^2"), R.parse("x*y")]
        G = buchberger(gens)
        for i in range(len(G)):
            for j in range(i + 1, len(G)):
                assert normal_form(s_polynomial(G[i], G[j]), G).is_zero()
        for g in gens:
            assert normal_form(g, G).is_zero()


def test_buchberger_tracked_representations():
    """tracked=True returns coefficients expressing each basis element in
    terms of the input generators."""
    R = ring(5, nvars=3)
    gens = [R.parse("y+4*x^2"), R.parse("z+4*x^3")]
    basis, reps = buchberger(gens, tracked=True)
    for g, row in zip(basis, reps):
        acc = R.zero
        for c, gen in zip(row, gens):
            acc = acc + c * gen
        assert acc == g


def test_normal_form_is_idempotent_and_linear():
    R = ring(3, nvars=2)
    G = buchberger([R.parse("x^2+y"), R.parse("y^2+x")])
    rng = random.Random(SEED + 17)
    for _ in range(10):
        f = R.random_poly(rng, max_degree=4)
        g = R.random_poly(rng, max_degree=4)
        nf = normal_form(f, G)
        assert normal_form(nf, G) == nf
        assert normal_form(f + g, G) == normal_form(nf + normal_form(g, G), G)


def test_solve_membership_reconstructs():
    R = ring(5, nvars=3)
    gens = [R.parse("y+4*x^2"), R.parse("z+4*x^3")]
    f = R.parse("y^2+4*x*z")
    coeffs = solve_membership(f, gens)
    assert coeffs is not None
    acc = R.zero
    for c, g in zip(coeffs, gens):
        acc = acc + c * g
    assert acc == f
    assert solve_membership(R.parse("x"), gens) is None


# --------------------------------------------------------------- IdealSpec


def test_ideal_spec_membership_and_flags():
    R = ring(2, nvars=2)
    I = IdealSpec(R, [R.parse("x")])
    assert I.contains(R.parse("x*y+x"))
    assert not I.contains(R.parse("y"))
    assert not I.is_unit_ideal()
    assert IdealSpec(R, [R.parse("x+1"), R.parse("x")]).is_unit_ideal()
    assert IdealSpec(R, []).is_zero_ideal()
    assert I.normal_form(R.parse("x*y+y")) == R.parse("y")


def test_ideal_spec_equality_ignores_generator_choice():
    R = ring(3, nvars=2)
    I = IdealSpec(R, [R.parse("x"), R.parse("y")])
    J = IdealSpec(R, [R.parse("x+y"), R.parse("y")])
    assert I == J
    K = IdealSpec(R, [R.parse("x")])
    assert I != K


# ------------------------------------------------------- regular sequences


@pytest.mark.parametrize(
    "gens,expected",
    [
        (["x", "y"], True),
        (["x", "x"], False),
        (["x*y"], True),
        (["x", "x*y"], False),  # x*y is a zero divisor mod (x)... it maps to 0
        (["x+1", "y"], True),
    ],
)
def test_is_regular_sequence(gens, expected):
    R = ring(3, nvars=2)
    seq = [R.parse(g) for g in gens]
    assert is_regular_sequence(seq, R) == expected


def test_unit_containing_sequence_is_weakly_regular():
    """Convention: regularity does not require the ideal to be proper.
    1 acts injectively on R/(x), and everything acts injectively on the
    zero ring, so unit-containing sequences pass (and cut out the zero
    quotient)."""
    R = ring(3, nvars=2)
    assert is_regular_sequence([R.parse("x"), R.parse("1")], R)


# ------------------------------------------------------------------- gcd


@pytest.mark.parametrize(
    "f,g,expected",
    [
        ("x^2+4", "x^3+4", "x+4"),
        ("x^2+2", "x+2", "1"),
        ("x^4", "x^2", "x^2"),
    ],
)
def test_gcd_univariate(f, g, expected):
    R = ring(5)
    got = gcd_univariate(R.parse(f), R.parse(g))
    assert str(got) == expected


def test_gcd_univariate_divides_both():
    R = ring(3)
    rng = random.Random(SEED + 23)
    for _ in range(15):
        f = R.random_poly(rng, max_degree=4)
        g = R.random_poly(rng, max_degree=4)
        if f.is_zero() or g.is_zero():
            continue
        d = gcd_univariate(f, g)
        for h in (f, g):
            _, rem = divmod_multi(h, [d])
            assert rem.is_zero()
