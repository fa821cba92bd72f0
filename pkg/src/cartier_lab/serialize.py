"""JSON interchange for modules, sheaves, and certificates.

Polynomials travel as canonical strings (grevlex-descending terms); the
operator table is keyed by "a1 a2,j" — the space-separated exponent vector,
a comma, and the generator index (a bare ",j" over a zero-variable ring).
Round trips are bit-exact: serializing, parsing, and serializing again
yields identical bytes.
"""

import json

from .errors import ParseError, ValidationError
from .cartier import CartierModule
from .fields import Fq
from .gamma import GammaSheaf
from .poly import IdealSpec, PolyRing

__all__ = [
    "ring_to_json",
    "ring_from_json",
    "module_to_json",
    "module_from_json",
    "sheaf_to_json",
    "sheaf_from_json",
    "certificate_to_json",
    "element_to_string",
    "element_from_string",
    "fraction_to_string",
    "kappa_key_to_string",
    "kappa_key_from_string",
    "canonical_json",
    "load_document",
    "dump_document",
]


# ---------------------------------------------------------------------------
# rings
# ---------------------------------------------------------------------------


def ring_to_json(ring):
    return {
        "p": ring.ctx.p,
        "e": ring.ctx.e,
        "vars": list(ring.vars),
    }


def ring_from_json(obj):
    try:
        p = int(obj["p"])
        e = int(obj["e"])
        variables = tuple(str(v) for v in obj.get("vars", ()))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad ring description: {exc}") from None
    return PolyRing(Fq(p, e), variables)


# ---------------------------------------------------------------------------
# table keys and elements
# ---------------------------------------------------------------------------


def kappa_key_to_string(key):
    a, j = key
    return " ".join(str(int(x)) for x in a) + "," + str(int(j))


def kappa_key_from_string(text):
    if "," not in text:
        raise ValidationError(f"bad table key {text!r} (missing comma)")
    left, _, right = text.rpartition(",")
    a = tuple(int(tok) for tok in left.split()) if left.strip() else ()
    return (a, int(right))


def _vector_to_json(vec):
    return [str(f) for f in vec]


def _vector_from_json(ring, items, rank):
    if len(items) != rank:
        raise ValidationError(
            f"vector of length {len(items)}, expected {rank}"
        )
    return tuple(ring.parse(s) for s in items)


def element_to_string(vector, names):
    """Render a coordinate vector as a sum of poly*name terms."""
    parts = []
    for f, name in zip(vector, names):
        if f.is_zero():
            continue
        text = str(f)
        if text == "1":
            parts.append(name)
        elif "+" in text:
            parts.append(f"({text})*{name}")
        else:
            parts.append(f"{text}*{name}")
    return "+".join(parts) if parts else "0"


def element_from_string(ring, text, names):
    """Parse a sum of [poly*]name terms back into a coordinate vector."""
    text = text.strip()
    vec = [ring.zero for _ in names]
    if text == "0":
        return tuple(vec)
    index = {name: i for i, name in enumerate(names)}
    for chunk in _split_top_level(text):
        chunk = chunk.strip()
        if not chunk:
            raise ParseError("empty term in element string", text, 0)
        star = chunk.rfind("*")
        name = chunk[star + 1 :].strip() if star >= 0 else chunk
        if name in index:
            coeff_text = chunk[:star].strip() if star >= 0 else "1"
        else:
            # the whole trailing piece was part of the polynomial; the
            # generator must then be the final identifier after "*"
            raise ParseError(
                f"unknown generator {name!r} in element string", text, 0
            )
        if coeff_text.startswith("(") and coeff_text.endswith(")"):
            coeff_text = coeff_text[1:-1]
        coeff = ring.parse(coeff_text)
        i = index[name]
        vec[i] = vec[i] + coeff
    return tuple(vec)


def _split_top_level(text):
    """Split on '+' outside parentheses."""
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced parentheses", text, 0)
        if ch == "+" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError("unbalanced parentheses", text, 0)
    parts.append("".join(cur))
    return parts


def fraction_to_string(localized, fraction, names):
    v, k = localized.normalize(fraction)
    body = element_to_string(v, names)
    if k == 0:
        return body
    g = str(localized.g)
    gpart = f"({g})" if "+" in g else g
    denom = f"{gpart}^{k}" if k > 1 else gpart
    if "+" in body:
        body = f"({body})"
    return f"{body}/{denom}"


# ---------------------------------------------------------------------------
# modules and sheaves
# ---------------------------------------------------------------------------


def module_to_json(module):
    out = {
        "ring": ring_to_json(module.ring),
        "generators": module.rank,
        "relations": [_vector_to_json(r) for r in module.relations],
        "kappa": {
            kappa_key_to_string(k): _vector_to_json(v)
            for k, v in sorted(module.kappa_table.items())
        },
    }
    if module.generator_names is not None:
        out["generator_names"] = list(module.generator_names)
    if module.ideal is not None:
        out["ideal"] = [str(f) for f in module.ideal.generators]
    return out


def module_from_json(obj):
    ring = ring_from_json(obj.get("ring", {}))
    try:
        rank = int(obj["generators"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("missing or bad 'generators' count") from None
    relations = [
        _vector_from_json(ring, row, rank)
        for row in obj.get("relations", [])
    ]
    table = {}
    kappa = obj.get("kappa", {})
    if not isinstance(kappa, dict):
        raise ValidationError("'kappa' must be an object")
    for key_text, items in kappa.items():
        key = kappa_key_from_string(key_text)
        table[key] = _vector_from_json(ring, items, rank)
    names = obj.get("generator_names")
    ideal = None
    if "ideal" in obj:
        ideal = IdealSpec(ring, [ring.parse(s) for s in obj["ideal"]])
    return CartierModule(
        ring,
        rank,
        table,
        relations=relations,
        ideal=ideal,
        generator_names=tuple(names) if names else None,
    )


def sheaf_to_json(sheaf):
    out = {
        "ring": ring_to_json(sheaf.ring),
        "rank": sheaf.rank,
        "relations": [_vector_to_json(r) for r in sheaf.relations],
        "gamma": [[str(f) for f in row] for row in sheaf.gamma_matrix],
    }
    if sheaf.generator_names is not None:
        out["generator_names"] = list(sheaf.generator_names)
    if sheaf.ideal is not None:
        out["ideal"] = [str(f) for f in sheaf.ideal.generators]
    return out


def sheaf_from_json(obj):
    ring = ring_from_json(obj.get("ring", {}))
    try:
        rank = int(obj["rank"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("missing or bad 'rank'") from None
    relations = [
        _vector_from_json(ring, row, rank)
        for row in obj.get("relations", [])
    ]
    gamma = obj.get("gamma")
    if not isinstance(gamma, list) or len(gamma) != rank:
        raise ValidationError("'gamma' must be a rank x rank matrix")
    matrix = [_vector_from_json(ring, row, rank) for row in gamma]
    names = obj.get("generator_names")
    ideal = None
    if "ideal" in obj:
        ideal = IdealSpec(ring, [ring.parse(s) for s in obj["ideal"]])
    return GammaSheaf(
        ring,
        rank,
        matrix,
        relations=relations,
        ideal=ideal,
        generator_names=tuple(names) if names else None,
    )


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def certificate_to_json(cert):
    lat = cert.lattice
    module = cert.module
    names = module.generator_names or tuple(
        f"m{i}" for i in range(module.rank)
    )
    base_names = cert.localized.base.generator_names or tuple(
        f"m{i}" for i in range(cert.localized.base.rank)
    )
    gen_rows = lat.generator_rows()
    return {
        "lattice": {
            "denominator_exponent": lat.k,
            "generators": [_vector_to_json(row) for row in gen_rows],
            "generator_display": [
                fraction_to_string(cert.localized, (row, lat.k), base_names)
                for row in gen_rows
            ],
        },
        "kappa": {
            kappa_key_to_string(k): _vector_to_json(v)
            for k, v in sorted(module.kappa_table.items())
        },
        "checks": dict(cert.checks),
        "indices": dict(cert.indices),
        "crystal_zero": cert.crystal_zero,
    }


# ---------------------------------------------------------------------------
# documents
# ---------------------------------------------------------------------------


def canonical_json(obj):
    """Deterministic rendering used for reports and golden files."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_document(path):
    """Read a JSON document describing a module or a sheaf."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"malformed JSON in {path}: {exc}"
            ) from None
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: top level must be an object")
    if "gamma" in obj:
        return sheaf_from_json(obj)
    return module_from_json(obj)


def dump_document(obj, path):
    if isinstance(obj, CartierModule):
        payload = module_to_json(obj)
    elif isinstance(obj, GammaSheaf):
        payload = sheaf_to_json(obj)
    else:
        payload = obj
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(payload))
