"""Tests for row-span normal forms, syzygies, and Smith normal form over
F_q[x]."""

import random

import pytest

from cartier_lab.fields import Fq
from cartier_lab.poly import PolyRing
from cartier_lab.submodules import (
    hnf_rows,
    in_span,
    module_invariants,
    reduce_vector,
    smith_normal_form,
    solve_combination,
    span_equal,
    syzygy_generators,
    vec_add,
    vec_scale,
    zero_vector,
)

SEED = 5150


def univariate(p):
    return PolyRing(Fq(p, 1), ("x",))


def random_rows(R, rng, count, r, max_degree=3):
    return [
        tuple(R.random_poly(rng, max_degree=max_degree) for _ in range(r))
        for _ in range(count)
    ]


def random_combination(R, rng, rows, r):
    acc = zero_vector(R, r)
    for row in rows:
        acc = vec_add(acc, vec_scale(row, R.random_poly(rng, max_degree=2)))
    return acc


# ------------------------------------------------------------------- spans


@pytest.mark.parametrize("p", [2, 3])
def test_hnf_is_a_canonical_span_representative(p):
    R = univariate(p)
    rng = random.Random(SEED + p)
    for _ in range(15):
        r = rng.randrange(1, 4)
        rows = random_rows(R, rng, rng.randrange(1, 5), r)
        h1 = hnf_rows(rows, r, R)
        # same span, different presentation: shuffle and add combinations
        shuffled = list(rows)
        rng.shuffle(shuffled)
        shuffled.append(random_combination(R, rng, rows, r))
        h2 = hnf_rows(shuffled, r, R)
        assert span_equal(h1, h2)
        assert h1 == hnf_rows(h1, r, R)  # idempotent


@pytest.mark.parametrize("p", [2, 3])
def test_membership_detects_combinations(p):
    R = univariate(p)
    rng = random.Random(SEED + 10 * p)
    for _ in range(20):
        r = rng.randrange(1, 4)
        rows = random_rows(R, rng, rng.randrange(1, 4), r)
        h = hnf_rows(rows, r, R)
        combo = random_combination(R, rng, rows, r)
        assert in_span(combo, h, R)
        assert reduce_vector(combo, h, R) == tuple(zero_vector(R, r))


def test_membership_negative_case():
    R = univariate(2)
    x = R.parse("x")
    h = hnf_rows([(x, R.zero), (R.zero, x)], 2, R)
    assert not in_span((R.one, R.zero), h, R)
    assert in_span((x * x, x), h, R)


def test_reduce_vector_is_linear_over_the_span():
    R = univariate(3)
    rng = random.Random(SEED + 3)
    rows = random_rows(R, rng, 2, 3)
    h = hnf_rows(rows, 3, R)
    for _ in range(10):
        v = tuple(R.random_poly(rng, max_degree=3) for _ in range(3))
        w = random_combination(R, rng, rows, 3)
        assert reduce_vector(vec_add(v, w), h, R) == reduce_vector(v, h, R)


def test_multivariate_rings_are_rejected():
    """Span machinery is principal-ideal-domain only; rings with two or
    more variables must be refused loudly, never silently mishandled."""
    from cartier_lab.errors import UnsupportedRingError

    R = PolyRing(Fq(2, 1), ("x", "y"))
    x, y = R.parse("x"), R.parse("y")
    with pytest.raises(UnsupportedRingError):
        hnf_rows([(x,), (y,)], 1, R)


# ---------------------------------------------------------------- syzygies


@pytest.mark.parametrize("p", [2, 3])
def test_syzygies_annihilate_modulo_relations(p):
    R = univariate(p)
    rng = random.Random(SEED + 100 * p)
    for _ in range(10):
        r = rng.randrange(1, 3)
        gens = random_rows(R, rng, rng.randrange(1, 4), r)
        rels = random_rows(R, rng, rng.randrange(0, 3), r, max_degree=2)
        rel_h = hnf_rows(rels, r, R)
        syz = syzygy_generators(gens, rels, r, R)
        for coeffs in syz:
            assert len(coeffs) == len(gens)
            acc = zero_vector(R, r)
            for c, g in zip(coeffs, gens):
                acc = vec_add(acc, vec_scale(g, c))
            assert in_span(acc, rel_h, R)


def test_syzygy_of_dependent_generators_is_found():
    R = univariate(2)
    x = R.parse("x")
    # g2 = x * g1: the syzygy module contains (x, 1) up to span
    gens = [(R.one, x), (x, x * x)]
    syz = syzygy_generators(gens, [], 2, R)
    assert syz, "dependent generators must admit a syzygy"
    found = hnf_rows(syz, len(gens), R)
    assert in_span((x, R.one), found, R)


# -------------------------------------------------------- solve_combination


@pytest.mark.parametrize("p", [2, 3])
def test_solve_combination_reconstructs(p):
    R = univariate(p)
    rng = random.Random(SEED + 1000 * p)
    for _ in range(15):
        r = rng.randrange(1, 3)
        gens = random_rows(R, rng, rng.randrange(1, 4), r)
        rels = random_rows(R, rng, rng.randrange(0, 2), r, max_degree=1)
        rel_h = hnf_rows(rels, r, R)
        target = random_combination(R, rng, gens, r)
        coeffs = solve_combination(gens, rels, target, r, R)
        assert coeffs is not None
        acc = zero_vector(R, r)
        for c, g in zip(coeffs, gens):
            acc = vec_add(acc, vec_scale(g, c))
        diff = vec_add(target, vec_scale(acc, -R.one))
        assert in_span(diff, rel_h, R)


def test_solve_combination_reports_failure():
    R = univariate(2)
    x = R.parse("x")
    assert solve_combination([(x, R.zero)], [], (R.one, R.zero), 2, R) is None


# ------------------------------------------------------- Smith normal form


def _is_diagonal(D):
    for i, row in enumerate(D):
        for j, entry in enumerate(row):
            if i != j and not entry.is_zero():
                return False
    return True


def _mat_mul(A, B, R):
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = [[R.zero for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for j in range(m):
            acc = R.zero
            for t in range(k):
                acc = acc + A[i][t] * B[t][j]
            out[i][j] = acc
    return out


@pytest.mark.parametrize("p", [2, 3])
def test_smith_normal_form_randomized_identities(p):
    """D = U A V with D diagonal, monic nonzero entries in divisibility
    order, and U invertible (witnessed by the returned inverse)."""
    R = univariate(p)
    rng = random.Random(SEED + 7 * p)
    for _ in range(12):
        n = rng.randrange(1, 4)
        m = rng.randrange(1, 4)
        A = [
            [R.random_poly(rng, max_degree=2) for _ in range(m)]
            for _ in range(n)
        ]
        D, U, V, Uinv = smith_normal_form(A, R)
        assert _is_diagonal(D)
        assert _mat_mul(U, _mat_mul(A, V, R), R) == D
        ident = [
            [R.one if i == j else R.zero for j in range(n)] for i in range(n)
        ]
        assert _mat_mul(U, Uinv, R) == ident
        diag = [D[i][i] for i in range(min(n, m))]
        for i in range(len(diag) - 1):
            if diag[i].is_zero():
                assert diag[i + 1].is_zero()
            elif not diag[i + 1].is_zero():
                from cartier_lab.poly import divmod_multi

                _, rem = divmod_multi(diag[i + 1], [diag[i]])
                assert rem.is_zero()
        for d in diag:
            if not d.is_zero() and not d.is_constant():
                _, lead = d.leading()
                assert lead == R.ctx.scalar(1)


def test_smith_normal_form_worked_example():
    R = univariate(2)
    x = R.parse("x")
    D, U, V, Uinv = smith_normal_form([(x * x, R.zero), (R.zero, x)], R)
    assert [str(D[0][0]), str(D[1][1])] == ["x", "x^2"]


# -------------------------------------------------------- module invariants


def test_module_invariants_splits_torsion_and_free():
    R = univariate(2)
    x = R.parse("x")
    # R^2 / <(x^2, 0)>: one torsion coordinate R/(x^2), one free.  A zero
    # factor denotes a free coordinate (R/(0) = R).
    info = module_invariants([(x * x, R.zero)], 2, R)
    assert [str(f) for f in info["factors"]] == ["x^2", "0"]
    assert len(info["free_coords"]) == 1
    assert len(info["torsion_coords"]) == 1


def test_module_invariants_of_free_module():
    R = univariate(3)
    info = module_invariants([], 2, R)
    assert all(f.is_zero() for f in info["factors"])
    assert len(info["free_coords"]) == 2
    assert info["torsion_coords"] == []


def test_module_invariants_change_of_basis_is_consistent():
    """to_canonical and from_canonical compose to the identity modulo the
    relation span."""
    R = univariate(2)
    x = R.parse("x")
    rows = [(x * x, x), (R.zero, x * x * x)]
    info = module_invariants(rows, 2, R)
    to_c = info["to_canonical"]
    from_c = info["from_canonical"]
    prod = _mat_mul(from_c, to_c, R)
    rel_h = hnf_rows(rows, 2, R)
    for i in range(2):
        unit = tuple(R.one if j == i else R.zero for j in range(2))
        diff = vec_add(tuple(prod[i]), vec_scale(unit, -R.one))
        assert in_span(diff, rel_h, R)
