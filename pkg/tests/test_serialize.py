"""Tests for the JSON document format and human-readable element
strings.  Round trips must be bit-exact: load(dump(x)) == x on the
structured side and dump(load(doc)) == doc on the canonical-JSON side."""

import json
import random

import pytest

from cartier_lab.cartier import (
    CartierModule,
    jordan_block_module,
    omega_module,
    point_module,
)
from cartier_lab.errors import ParseError, ValidationError
from cartier_lab.fields import Fq
from cartier_lab.functors import open_pullback
from cartier_lab.gamma import GammaSheaf, cartier_to_gamma
from cartier_lab.ie import intermediate_extension
from cartier_lab.poly import PolyRing
from cartier_lab.serialize import (
    canonical_json,
    certificate_to_json,
    dump_document,
    element_from_string,
    element_to_string,
    fraction_to_string,
    load_document,
    module_from_json,
    module_to_json,
    sheaf_from_json,
    sheaf_to_json,
)

SEED = 60221


def univariate(p, e=1):
    return PolyRing(Fq(p, e), ("x",))


def random_module(R, rng, max_rank=2):
    rank = rng.randrange(1, max_rank + 1)
    table = {}
    for a in R.pth_basis():
        for j in range(rank):
            table[(a, j)] = tuple(
                R.random_poly(rng, max_degree=2) for _ in range(rank)
            )
    return CartierModule(R, rank, table)


# -------------------------------------------------------------- round trips


@pytest.mark.parametrize("p,e", [(2, 1), (3, 1), (2, 2)])
def test_module_json_roundtrip_is_bit_exact(p, e):
    R = univariate(p, e)
    rng = random.Random(SEED + 10 * p + e)
    for _ in range(12):
        mod = random_module(R, rng)
        doc = module_to_json(mod)
        again = module_to_json(module_from_json(doc))
        assert canonical_json(doc) == canonical_json(again)
        back = module_from_json(doc)
        assert back.kappa_table == mod.kappa_table
        assert back.relations == mod.relations


@pytest.mark.parametrize("p", [2, 3])
def test_sheaf_json_roundtrip_is_bit_exact(p):
    R = univariate(p)
    rng = random.Random(SEED + p)
    for _ in range(10):
        rank = rng.randrange(1, 3)
        mat = tuple(
            tuple(R.random_poly(rng, max_degree=2) for _ in range(rank))
            for _ in range(rank)
        )
        sh = GammaSheaf(R, rank, mat)
        doc = sheaf_to_json(sh)
        again = sheaf_to_json(sheaf_from_json(doc))
        assert canonical_json(doc) == canonical_json(again)
        assert sheaf_from_json(doc).gamma_matrix == mat


def test_point_module_kappa_keys_have_empty_exponent_part():
    """Over F_q (no variables) the table key is ',j'."""
    doc = module_to_json(jordan_block_module(Fq(2, 1), 2))
    assert set(doc["kappa"]) == {",0", ",1"}


def test_top_form_document_shape():
    doc = module_to_json(omega_module(univariate(2)))
    assert doc["generators"] == 1
    assert doc["generator_names"] == ["dx"]
    assert doc["kappa"] == {"0,0": ["0"], "1,0": ["1"]}
    assert doc["ring"] == {"p": 2, "e": 1, "vars": ["x"]}


def test_relations_and_names_survive():
    R = univariate(2)
    x = R.parse("x")
    mod = CartierModule(
        R,
        1,
        {((0,), 0): (x,), ((1,), 0): (R.zero,)},
        relations=[(x * x,)],
        generator_names=("v",),
    )
    back = module_from_json(module_to_json(mod))
    assert back.relations == mod.relations
    assert back.generator_names == ("v",)


def test_converted_sheaf_roundtrips_through_files(tmp_path):
    R = univariate(3)
    sh = cartier_to_gamma(omega_module(R))
    path = tmp_path / "sheaf.json"
    dump_document(sheaf_to_json(sh), path)
    loaded = load_document(path)
    assert isinstance(loaded, GammaSheaf)
    assert loaded.gamma_matrix == sh.gamma_matrix


def test_load_document_dispatches_on_gamma_key(tmp_path):
    mod_path = tmp_path / "m.json"
    dump_document(module_to_json(point_module(Fq(2, 1))), mod_path)
    assert isinstance(load_document(mod_path), CartierModule)
    sh_path = tmp_path / "s.json"
    R = univariate(2)
    dump_document(sheaf_to_json(GammaSheaf(R, 1, ((R.one,),))), sh_path)
    assert isinstance(load_document(sh_path), GammaSheaf)


def test_load_document_rejects_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError):
        load_document(bad)


def test_canonical_json_is_deterministic():
    doc = module_to_json(jordan_block_module(Fq(3, 1), 2))
    a = canonical_json(doc)
    b = canonical_json(json.loads(a))
    assert a == b
    assert a.endswith("\n")


# ----------------------------------------------------------- element strings


@pytest.mark.parametrize(
    "poly,expected",
    [
        ("x^2+x", "(x^2+x)*dx"),
        ("x", "x*dx"),
        ("1", "dx"),
        ("0", "0"),
    ],
)
def test_element_to_string_formats(poly, expected):
    R = univariate(2)
    assert element_to_string((R.parse(poly),), ("dx",)) == expected


def test_element_string_multi_generator():
    R = univariate(2)
    got = element_to_string((R.one, R.parse("x")), ("e1", "e2"))
    assert got == "e1+x*e2"
    assert element_to_string((R.zero, R.zero), ("e1", "e2")) == "0"


@pytest.mark.parametrize(
    "text",
    ["(x^2+x)*dx", "dx", "x*dx", "0"],
)
def test_element_string_roundtrip(text):
    R = univariate(2)
    vec = element_from_string(R, text, ("dx",))
    assert element_to_string(vec, ("dx",)) == text


def test_element_from_string_rejects_unknown_generator():
    R = univariate(2)
    with pytest.raises(ParseError):
        element_from_string(R, "x*dy", ("dx",))


def test_random_elements_roundtrip_through_strings():
    R = univariate(3)
    rng = random.Random(SEED)
    names = ("e1", "e2")
    for _ in range(25):
        vec = tuple(R.random_poly(rng, max_degree=3) for _ in range(2))
        text = element_to_string(vec, names)
        assert element_from_string(R, text, names) == vec


# --------------------------------------------------------- fraction strings


def test_fraction_strings_are_pinned():
    R = univariate(2)
    om = omega_module(R)
    loc = open_pullback(om, R.parse("x"))
    assert fraction_to_string(loc, ((R.one,), 2), ("dx",)) == "dx/x^2"
    assert fraction_to_string(loc, ((R.parse("x+1"),), 1), ("dx",)) == "((x+1)*dx)/x"
    assert fraction_to_string(loc, ((R.zero,), 1), ("dx",)) == "0"
    assert fraction_to_string(loc, ((R.one,), 0), ("dx",)) == "dx"


# ------------------------------------------------------------- certificates


def test_certificate_document_contains_the_lattice():
    R = univariate(2)
    x = R.parse("x")
    tw = CartierModule(
        R,
        1,
        {((0,), 0): (R.one,), ((1,), 0): (R.zero,)},
        generator_names=("dx",),
    )
    cert = intermediate_extension(open_pullback(tw, x))
    doc = certificate_to_json(cert)
    assert doc["lattice"]["generator_display"] == ["x*dx"]
    assert doc["lattice"]["denominator_exponent"] == 0
    assert doc["checks"]["localization_agreement"] is True
    assert doc["checks"]["quotient_nilpotent"] is True
    assert doc["checks"]["quotient_nilpotent_kstar"] is True
    assert doc["indices"]["k_star"] == 1
    assert doc["crystal_zero"] is False
    # canonical form is stable across a serialization cycle
    assert canonical_json(doc) == canonical_json(json.loads(canonical_json(doc)))
