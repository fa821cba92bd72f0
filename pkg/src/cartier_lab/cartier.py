"""Modules with a p^{-1}-linear structural operator.

A CartierModule is a finitely presented module M = R^r / (relations) over
R = F_q[x_1..x_n] (optionally modulo an ideal), together with an additive
operator kappa satisfying kappa(f^p m) = f kappa(m).  Such an operator is
determined by its values on x^a g_j for exponent vectors a in [0,p)^n and
generators g_j: for f = sum_a h_a^p x^a,

    kappa(f g_j) = sum_a h_a kappa(x^a g_j).

The kappa_table stores exactly these values, so evaluation is Frobenius
decomposition followed by table lookups.

Submodule-level computations (image chains, kernels, the maximal nilpotent
submodule, Hom spaces) need canonical normal forms and therefore require
the ring to be F_q or F_q[x]; multivariate rings support only free modules
and element-level evaluation.
"""

import os

from . import kernels
from .errors import (
    NonStabilized,
    InvariantViolation,
    UnsupportedRingError,
    ValidationError,
)
from .fields import SemilinearMap, P_INV_LINEAR
from .poly import frobenius_decompose
from .submodules import (
    hnf_rows,
    in_span,
    module_invariants,
    reduce_vector,
    span_equal,
    syzygy_generators,
    solve_combination,
    vec_add,
    vec_scale,
    zero_vector,
)

DEFAULT_ITERATION_CAP = 256

__all__ = [
    "CartierModule",
    "CartierMorphism",
    "apply_kappa",
    "kappa_power",
    "image_chain",
    "stable_image",
    "is_nilpotent",
    "max_nilpotent_submodule",
    "kernel",
    "cokernel",
    "image",
    "direct_sum",
    "submodule_module",
    "quotient_module",
    "hom_cartier",
    "HomResult",
    "FiniteModel",
    "finite_model",
    "to_semilinear",
    "omega_module",
    "point_module",
    "jordan_block_module",
    "iteration_cap",
]


def iteration_cap(explicit=None):
    """Resolve the stabilization-loop cap: explicit arg, then the
    CARTIER_LAB_MAX_ITER environment variable, then the default."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get("CARTIER_LAB_MAX_ITER", "")
    if env:
        return int(env)
    return DEFAULT_ITERATION_CAP


def _default_names(rank, nvars):
    if rank == 1 and nvars == 1:
        return ("dx",)
    return tuple(f"e{i + 1}" for i in range(rank))


class CartierModule:
    """Finitely presented module with a p^{-1}-linear operator table.

    Parameters
    ----------
    ring : PolyRing
    rank : number of generators of the presentation
    kappa_table : dict mapping (a, j) -> vector, where a is an exponent
        tuple in [0,p)^n, j a generator index, and the vector (length
        ``rank``) expresses kappa(x^a g_j) in the generators.
    relations : iterable of vectors spanning the relation submodule
    ideal : optional IdealSpec; the module lives over ring/ideal
    generator_names : display names; defaults to e1.. (or dx for a free
        rank-1 module over one variable)
    """

    __slots__ = (
        "ring",
        "rank",
        "kappa_table",
        "relations",
        "ideal",
        "generator_names",
        "_rel_hnf",
    )

    def __init__(
        self,
        ring,
        rank,
        kappa_table,
        relations=(),
        ideal=None,
        generator_names=None,
        validate=True,
    ):
        self.ring = ring
        self.rank = int(rank)
        self.relations = tuple(tuple(v) for v in relations)
        self.ideal = ideal
        if generator_names is None:
            generator_names = _default_names(self.rank, ring.nvars)
        self.generator_names = tuple(generator_names)
        self.kappa_table = {
            (tuple(a), int(j)): tuple(v) for (a, j), v in kappa_table.items()
        }
        self._rel_hnf = None
        if validate:
            self._validate()
        if ring.nvars <= 1:
            self._rel_hnf = hnf_rows(self.effective_relations(), self.rank, ring)

    # -- presentation ------------------------------------------------------

    def effective_relations(self):
        """Relation vectors together with ideal multiples of each generator."""
        rows = list(self.relations)
        if self.ideal is not None:
            for h in self.ideal.groebner:
                for i in range(self.rank):
                    row = list(zero_vector(self.ring, self.rank))
                    row[i] = h
                    rows.append(tuple(row))
        return tuple(rows)

    def relation_hnf(self):
        if self._rel_hnf is None:
            self._rel_hnf = hnf_rows(
                self.effective_relations(), self.rank, self.ring
            )
        return self._rel_hnf

    def _validate(self):
        ring = self.ring
        if self.rank < 0:
            raise ValidationError("rank must be nonnegative")
        if len(self.generator_names) != self.rank:
            raise ValidationError("generator_names length must match rank")
        if len(set(self.generator_names)) != self.rank:
            raise ValidationError("generator names must be distinct")
        if self.ideal is not None:
            if ring.nvars == 0:
                raise ValidationError("constant rings take no ideal quotient")
            if self.ideal.ring is not ring and self.ideal.ring != ring:
                raise ValidationError("ideal ring differs from module ring")
        if ring.nvars >= 2 and self.relations:
            raise UnsupportedRingError(
                "relations over multivariate rings are not supported; "
                "only free modules (possibly modulo an ideal) are"
            )
        expected = set()
        for a in ring.pth_basis():
            for j in range(self.rank):
                expected.add((a, j))
        got = set(self.kappa_table)
        if got != expected:
            missing = sorted(expected - got)[:3]
            extra = sorted(got - expected)[:3]
            raise ValidationError(
                f"kappa table keys mismatch (missing {missing}, extra {extra})"
            )
        for key, vec in self.kappa_table.items():
            if len(vec) != self.rank:
                raise ValidationError(f"kappa value at {key} has wrong length")
            for f in vec:
                if f.ring != ring:
                    raise ValidationError("kappa value over wrong ring")
        for vec in self.relations:
            if len(vec) != self.rank:
                raise ValidationError("relation vector has wrong length")
        self._check_well_defined()

    def _check_well_defined(self):
        """kappa must map the relation submodule into itself; it is enough
        to check kappa(x^a rho) for relation generators rho and all a."""
        ring = self.ring
        rels = self.effective_relations()
        if not rels:
            return
        if ring.nvars <= 1:
            hnf = hnf_rows(rels, self.rank, ring)
            for rho in rels:
                for a in ring.pth_basis():
                    xa = ring.monomial(a)
                    img = self._apply_raw(vec_scale(rho, xa))
                    if not in_span(img, hnf, ring):
                        raise ValidationError(
                            "kappa does not preserve the relation submodule "
                            f"(relation {tuple(str(c) for c in rho)}, "
                            f"shift {a})"
                        )
        else:
            # free module modulo an ideal: images of ideal rows must have
            # all coordinates inside the ideal
            for rho in rels:
                for a in ring.pth_basis():
                    xa = ring.monomial(a)
                    img = self._apply_raw(vec_scale(rho, xa))
                    for f in img:
                        if not self.ideal.normal_form(f).is_zero():
                            raise ValidationError(
                                "kappa does not preserve the ideal rows"
                            )

    # -- elements ----------------------------------------------------------

    def zero(self):
        return zero_vector(self.ring, self.rank)

    def check_element(self, v):
        v = tuple(v)
        if len(v) != self.rank:
            raise ValidationError(
                f"element has {len(v)} coordinates, module has rank {self.rank}"
            )
        for f in v:
            if f.ring != self.ring:
                raise ValidationError("element coordinate over wrong ring")
        return v

    def normal_form(self, v):
        v = self.check_element(v)
        if self.ring.nvars <= 1:
            return reduce_vector(v, self.relation_hnf(), self.ring)
        if self.ideal is not None:
            return tuple(self.ideal.normal_form(f) for f in v)
        return v

    def is_zero_element(self, v):
        return all(f.is_zero() for f in self.normal_form(v))

    def elements_equal(self, u, v):
        return self.normal_form(u) == self.normal_form(v)

    def random_element(self, rng, max_degree=3):
        return tuple(
            self.ring.random_poly(rng, max_degree=max_degree)
            for _ in range(self.rank)
        )

    # -- kappa -------------------------------------------------------------

    def _apply_raw(self, v):
        out = list(zero_vector(self.ring, self.rank))
        for j, f in enumerate(v):
            if f.is_zero():
                continue
            for a, g in frobenius_decompose(f).items():
                val = self.kappa_table[(a, j)]
                for i in range(self.rank):
                    if not val[i].is_zero():
                        out[i] = out[i] + g * val[i]
        return tuple(out)

    def apply_kappa(self, v):
        return self.normal_form(self._apply_raw(self.check_element(v)))

    def kappa_power(self, n, v):
        if n < 0:
            raise ValidationError("kappa_power needs n >= 0")
        v = self.check_element(v)
        for _ in range(n):
            v = self._apply_raw(v)
        return self.normal_form(v)

    def semilinearity_check(self, rng, trials=20, max_degree=3):
        """Spot-check kappa(f^p v) == f kappa(v) on random pairs."""
        p = self.ring.ctx.p
        for _ in range(trials):
            f = self.ring.random_poly(rng, max_degree=max_degree)
            v = self.random_element(rng, max_degree=max_degree)
            lhs = self.apply_kappa(vec_scale(v, f**p))
            rhs = self.normal_form(vec_scale(self._apply_raw(v), f))
            if lhs != rhs:
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, CartierModule):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.rank == other.rank
            and self.ideal == other.ideal
            and self.relations == other.relations
            and self.kappa_table == other.kappa_table
        )

    def __repr__(self):
        base = f"F_{self.ring.ctx.q}[{', '.join(self.ring.vars)}]"
        if self.ideal is not None:
            base += "/I"
        return (
            f"CartierModule(rank {self.rank} over {base}, "
            f"{len(self.relations)} relations)"
        )


class CartierMorphism:
    """R-linear map between Cartier modules commuting with the operators.

    ``images[j]`` is the image of the j-th source generator, as a vector
    over the target presentation.  Validation checks that relations map to
    zero and that the commuting square holds on every table key; both
    checks extend to all elements by additivity and semilinearity.
    """

    __slots__ = ("source", "target", "images")

    def __init__(self, source, target, images, validate=True):
        self.source = source
        self.target = target
        self.images = tuple(target.check_element(v) for v in images)
        if len(self.images) != source.rank:
            raise ValidationError("need one image per source generator")
        if validate:
            self._validate()

    def _validate(self):
        src, tgt = self.source, self.target
        if src.ring != tgt.ring:
            raise ValidationError("morphism endpoints over different rings")
        if (src.ideal is None) != (tgt.ideal is None) or (
            src.ideal is not None and src.ideal != tgt.ideal
        ):
            raise ValidationError("morphism endpoints over different quotients")
        for rho in src.effective_relations():
            if not tgt.is_zero_element(self._push(rho)):
                raise ValidationError(
                    "not well defined: a source relation has nonzero image"
                )
        ring = src.ring
        for (a, j), val in src.kappa_table.items():
            lhs = self._push(val)
            xa = ring.monomial(a)
            rhs = tgt._apply_raw(vec_scale(self.images[j], xa))
            if not tgt.elements_equal(lhs, rhs):
                raise ValidationError(
                    f"does not commute with kappa at shift {a}, generator {j}"
                )

    def _push(self, v):
        out = zero_vector(self.target.ring, self.target.rank)
        for j, f in enumerate(v):
            if not f.is_zero():
                out = vec_add(out, vec_scale(self.images[j], f))
        return out

    def apply(self, v):
        return self.target.normal_form(self._push(self.source.check_element(v)))

    def is_zero(self):
        return all(self.target.is_zero_element(im) for im in self.images)

    def compose(self, other):
        """self after other (other: A -> B, self: B -> C)."""
        if other.target is not self.source and other.target != self.source:
            raise ValidationError("composition endpoints do not match")
        images = tuple(self.apply(im) for im in other.images)
        return CartierMorphism(other.source, self.target, images, validate=False)

    @staticmethod
    def identity(module):
        images = []
        for j in range(module.rank):
            row = list(zero_vector(module.ring, module.rank))
            row[j] = module.ring.one
            images.append(tuple(row))
        return CartierMorphism(module, module, images, validate=False)

    @staticmethod
    def zero_map(source, target):
        images = [zero_vector(target.ring, target.rank)] * source.rank
        return CartierMorphism(source, target, images, validate=False)

    def __repr__(self):
        return f"CartierMorphism({self.source!r} -> {self.target!r})"


# ---------------------------------------------------------------------------
# module-level wrappers
# ---------------------------------------------------------------------------


def apply_kappa(module, elem):
    return module.apply_kappa(elem)


def kappa_power(module, n, elem):
    return module.kappa_power(n, elem)


def _require_pid(module, what):
    if module.ring.nvars > 1:
        raise UnsupportedRingError(
            f"{what} needs the ring to be F_q or F_q[x]"
        )


def image_chain(module, cap=None):
    """Descending chain of submodule spans M >= R kappa(M) >= ... until two
    consecutive members agree.  Members are HNF row tuples of preimages in
    R^r (each containing the relation span)."""
    _require_pid(module, "image_chain")
    cap = iteration_cap(cap)
    ring = module.ring
    rels = module.effective_relations()
    full = []
    for j in range(module.rank):
        row = list(zero_vector(ring, module.rank))
        row[j] = ring.one
        full.append(tuple(row))
    current = hnf_rows(list(full) + list(rels), module.rank, ring)
    chain = [current]
    for _ in range(cap):
        images = []
        for row in current:
            for a in ring.pth_basis():
                xa = ring.monomial(a)
                images.append(module._apply_raw(vec_scale(row, xa)))
        nxt = hnf_rows(images + list(rels), module.rank, ring)
        if span_equal(nxt, current):
            return chain
        chain.append(nxt)
        current = nxt
    raise NonStabilized(
        f"image chain did not stabilize within {cap} steps",
        partial=chain,
        cap=cap,
    )


def submodule_module(module, gens, names=None):
    """Present the submodule of ``module`` generated by ``gens`` as a
    CartierModule, with the inclusion morphism.  The span must be stable
    under every kappa(x^a .) -- callers use this for kernels, torsion and
    stable images, which are stable by construction."""
    _require_pid(module, "submodule presentation")
    ring = module.ring
    gens = [module.check_element(g) for g in gens]
    rels = module.effective_relations()
    sub_rels = syzygy_generators(gens, rels, module.rank, ring)
    table = {}
    for a in ring.pth_basis():
        xa = ring.monomial(a)
        for j, g in enumerate(gens):
            img = module._apply_raw(vec_scale(g, xa))
            coeffs = solve_combination(gens, rels, img, module.rank, ring)
            if coeffs is None:
                raise InvariantViolation(
                    "submodule is not stable under the structural operator"
                )
            table[(a, j)] = tuple(coeffs)
    if names is None:
        names = tuple(f"s{i + 1}" for i in range(len(gens)))
    sub = CartierModule(
        ring,
        len(gens),
        table,
        relations=sub_rels,
        ideal=module.ideal,
        generator_names=names,
    )
    incl = CartierMorphism(sub, module, gens, validate=False)
    return sub, incl


def quotient_module(module, gens, names=None):
    """Quotient of ``module`` by the span of ``gens``, with projection."""
    gens = [module.check_element(g) for g in gens]
    quot = CartierModule(
        module.ring,
        module.rank,
        module.kappa_table,
        relations=tuple(module.relations) + tuple(tuple(g) for g in gens),
        ideal=module.ideal,
        generator_names=names or module.generator_names,
    )
    proj = CartierMorphism(
        module, quot, CartierMorphism.identity(module).images, validate=False
    )
    return quot, proj


def stable_image(module, cap=None):
    """The stable member of the image chain, as a submodule with induced
    operator.  Returns (submodule, inclusion, chain)."""
    chain = image_chain(module, cap=cap)
    stable = chain[-1]
    rel_hnf = module.relation_hnf()
    gens = [row for row in stable if not in_span(row, rel_hnf, module.ring)]
    sub, incl = submodule_module(module, gens)
    return sub, incl, chain


def is_nilpotent(module, cap=None):
    """(nilpotent?, order).  Order is the first k with kappa^k(M) = 0."""
    chain = image_chain(module, cap=cap)
    rel_hnf = module.relation_hnf()
    stable_is_zero = all(
        in_span(row, rel_hnf, module.ring) for row in chain[-1]
    )
    if not stable_is_zero:
        return False, None
    return True, len(chain) - 1


def kernel(phi):
    """Kernel of a morphism as a Cartier submodule of the source."""
    _require_pid(phi.source, "kernel")
    src, tgt = phi.source, phi.target
    gens = syzygy_generators(
        list(phi.images), tgt.effective_relations(), tgt.rank, src.ring
    )
    # rows are coefficient vectors in the source generators; drop those that
    # are already zero in the source
    rel_hnf = src.relation_hnf()
    gens = [g for g in gens if not in_span(g, rel_hnf, src.ring)]
    return submodule_module(src, gens)


def cokernel(phi):
    """Cokernel: the target with the image span added to its relations."""
    tgt = phi.target
    extra = [im for im in phi.images if not tgt.is_zero_element(im)]
    coker = CartierModule(
        tgt.ring,
        tgt.rank,
        tgt.kappa_table,
        relations=tuple(tgt.relations) + tuple(tuple(v) for v in extra),
        ideal=tgt.ideal,
        generator_names=tgt.generator_names,
    )
    proj = CartierMorphism(
        tgt, coker, CartierMorphism.identity(tgt).images, validate=False
    )
    return coker, proj


def image(phi):
    """Image of a morphism as a Cartier submodule of the target, presented
    on the generator images (index-aligned with the source generators)."""
    return submodule_module(phi.target, list(phi.images))


def direct_sum(m1, m2):
    """Block direct sum; returns (sum, include_left, include_right)."""
    if m1.ring != m2.ring or m1.ideal != m2.ideal:
        raise ValidationError("direct sum needs a common ring and quotient")
    ring = m1.ring
    r1, r2 = m1.rank, m2.rank
    rank = r1 + r2

    def left(v):
        return tuple(v) + zero_vector(ring, r2)

    def right(v):
        return zero_vector(ring, r1) + tuple(v)

    relations = [left(rho) for rho in m1.relations] + [
        right(rho) for rho in m2.relations
    ]
    table = {}
    for a in ring.pth_basis():
        for j in range(r1):
            table[(a, j)] = left(m1.kappa_table[(a, j)])
        for j in range(r2):
            table[(a, r1 + j)] = right(m2.kappa_table[(a, j)])
    names = tuple(f"l_{n}" for n in m1.generator_names) + tuple(
        f"r_{n}" for n in m2.generator_names
    )
    total = CartierModule(
        ring, rank, table, relations=relations, ideal=m1.ideal,
        generator_names=names,
    )
    inc1 = CartierMorphism(
        m1, total, [left(v) for v in CartierMorphism.identity(m1).images],
        validate=False,
    )
    inc2 = CartierMorphism(
        m2, total, [right(v) for v in CartierMorphism.identity(m2).images],
        validate=False,
    )
    return total, inc1, inc2


# ---------------------------------------------------------------------------
# finite-length models: F_q bases and semilinear matrices
# ---------------------------------------------------------------------------


class FiniteModel:
    """F_q-basis view of a finite-length module over F_q or F_q[x].

    The basis consists of x^s g_c for each pivot column c of the relation
    HNF and 0 <= s < deg(pivot).  Canonical representatives (entries
    reduced below the pivots) are coordinate vectors in this basis, so
    reduction is F_q-linear and round trips exactly.
    """

    __slots__ = ("module", "basis", "_index")

    def __init__(self, module):
        ring = module.ring
        if ring.nvars > 1:
            raise UnsupportedRingError("finite models need F_q or F_q[x]")
        hnf = module.relation_hnf()
        pivots = {}
        for row in hnf:
            col = next(i for i, f in enumerate(row) if not f.is_zero())
            pivots[col] = row[col]
        basis = []
        for c in range(module.rank):
            if c not in pivots:
                if ring.nvars == 0:
                    basis.append((c, 0))
                    continue
                raise UnsupportedRingError(
                    "module has positive rank; no finite F_q-basis"
                )
            if ring.nvars == 0:
                continue  # pivot over a field kills the coordinate
            d = pivots[c].degree_in(0)
            for s in range(d):
                basis.append((c, s))
        self.module = module
        self.basis = tuple(basis)
        self._index = {bs: i for i, bs in enumerate(basis)}

    @property
    def dimension(self):
        return len(self.basis)

    def basis_vector(self, i):
        c, s = self.basis[i]
        ring = self.module.ring
        row = list(zero_vector(ring, self.module.rank))
        row[c] = ring.monomial((s,)) if ring.nvars else ring.one
        return tuple(row)

    def to_coords(self, v):
        red = self.module.normal_form(v)
        ctx = self.module.ring.ctx
        coords = [ctx.zero] * len(self.basis)
        for c, f in enumerate(red):
            for mono, coeff in f.terms.items():
                s = mono[0] if self.module.ring.nvars else 0
                idx = self._index.get((c, s))
                if idx is None:
                    raise InvariantViolation(
                        "normal form left the finite basis support"
                    )
                coords[idx] = coeff
        return tuple(coords)

    def from_coords(self, coords):
        ring = self.module.ring
        v = list(zero_vector(ring, self.module.rank))
        for i, c in enumerate(coords):
            if c.is_zero():
                continue
            col, s = self.basis[i]
            mono = ring.monomial((s,)) if ring.nvars else ring.one
            v[col] = v[col] + ring.scalar(c) * mono
        return tuple(v)

    def kappa_semilinear(self):
        """The operator as a p^{-1}-linear matrix map on coordinates."""
        ctx = self.module.ring.ctx
        cols = [
            self.to_coords(self.module.apply_kappa(self.basis_vector(j)))
            for j in range(self.dimension)
        ]
        matrix = [
            [cols[j][i] for j in range(self.dimension)]
            for i in range(self.dimension)
        ]
        return SemilinearMap(ctx, P_INV_LINEAR, matrix)

    def multiplication_matrix(self, f):
        """F_q-matrix of multiplication by the ring element f."""
        cols = [
            self.to_coords(vec_scale(self.basis_vector(j), f))
            for j in range(self.dimension)
        ]
        return [
            [cols[j][i] for j in range(self.dimension)]
            for i in range(self.dimension)
        ]


def finite_model(module):
    return FiniteModel(module)


def to_semilinear(module):
    """(SemilinearMap, FiniteModel) for a finite-length module."""
    model = FiniteModel(module)
    return model.kappa_semilinear(), model


# ---------------------------------------------------------------------------
# maximal nilpotent submodule
# ---------------------------------------------------------------------------


def _fp_operator_matrices(model):
    """F_p matrices (as numpy arrays) of kappa, multiplication by x, and
    multiplication by the field generator, acting on F_p coordinates."""
    import numpy as np

    module = model.module
    ctx = module.ring.ctx
    e = ctx.e
    d = model.dimension
    nfp = d * e

    def to_fp(coords):
        out = []
        for c in coords:
            out.extend(c.coords)
        return out

    def probe(op):
        cols = []
        for i in range(d):
            for k in range(e):
                c = [ctx.zero] * d
                c[i] = ctx.from_coords(
                    tuple(1 if kk == k else 0 for kk in range(e))
                )
                cols.append(to_fp(op(tuple(c))))
        return np.array(cols, dtype=np.int64).T % ctx.p

    kap = model.kappa_semilinear()
    ops = [probe(lambda c: kap.apply(c))]
    if module.ring.nvars == 1:
        xmat = model.multiplication_matrix(module.ring.var(0))

        def xmul(c):
            return tuple(
                sum(
                    (xmat[i][j] * c[j] for j in range(d)),
                    ctx.zero,
                )
                for i in range(d)
            )

        ops.append(probe(xmul))
    if e > 1:
        gen = ctx.gen
        ops.append(probe(lambda c: tuple(gen * x for x in c)))
    return ops, nfp


def _max_nil_finite(module):
    """Greatest submodule W with W inside ker(kappa^dim), x W <= W,
    kappa(W) <= W -- the maximal nilpotent Cartier submodule of a
    finite-length module.  Pure F_p linear algebra."""
    import numpy as np

    model = FiniteModel(module)
    ctx = module.ring.ctx
    p = ctx.p
    d = model.dimension
    if d == 0:
        return [], model, 0
    ops, nfp = _fp_operator_matrices(model)
    kap_fp = ops[0]
    # seed: ker(kappa^d) over F_p
    power = np.eye(nfp, dtype=np.int64)
    for _ in range(d):
        power = kernels.matmul_mod_p(kap_fp, power, p)
    seed = kernels.nullspace_mod_p(power, p)  # rows are kernel basis
    basis = seed.T.copy()  # columns span W
    while basis.shape[1] > 0:
        span_rows, _ = kernels.rref_mod_p(basis.T.copy(), p)
        span_rows = span_rows[
            ~np.all(span_rows == 0, axis=1)
        ]
        pivcols = []
        for row in span_rows:
            nz = np.nonzero(row)[0]
            pivcols.append(nz[0])

        def residual(vec):
            v = vec.copy()
            for row, pc in zip(span_rows, pivcols):
                if v[pc]:
                    v = (v - v[pc] * row) % p
            return v

        stacked = []
        for op in ops:
            imgs = (op @ basis) % p
            for c in range(basis.shape[1]):
                stacked.append(residual(imgs[:, c]))
        cond = np.array(stacked, dtype=np.int64)
        # unknowns: coefficient vector c with residual(ops . basis c) = 0;
        # rearrange rows so columns index the basis coefficients
        rows = []
        nops = len(ops)
        ncols = basis.shape[1]
        for k in range(nops):
            block = cond[k * ncols : (k + 1) * ncols]  # ncols x nfp
            rows.append(block.T)  # nfp x ncols
        cond_mat = np.vstack(rows) % p
        ker = kernels.nullspace_mod_p(cond_mat, p)
        if ker.shape[0] == basis.shape[1]:
            break
        basis = (basis @ ker.T) % p
    gens = []
    e = ctx.e
    for c in range(basis.shape[1]):
        coords = []
        for i in range(d):
            fp = tuple(int(basis[i * e + k, c]) for k in range(e))
            coords.append(ctx.from_coords(fp))
        gens.append(model.from_coords(coords))
    return gens, model, basis.shape[1]


def max_nilpotent_submodule(module, cap=None):
    """Largest kappa-stable submodule on which the operator is nilpotent.

    Exact for finite-length modules (all of dimension zero, torsion over
    F_q[x]) and whenever the whole module is nilpotent.  When the module
    has positive free rank the computation restricts to the torsion part
    and the result carries partial=True.

    Returns a dict: generators (vectors), module, inclusion, partial,
    order (nilpotency order of the submodule).
    """
    _require_pid(module, "max_nilpotent_submodule")
    nil, order = is_nilpotent(module, cap=cap)
    if nil:
        ident = CartierMorphism.identity(module)
        return {
            "generators": list(ident.images),
            "module": module,
            "inclusion": ident,
            "partial": False,
            "order": order,
        }
    ring = module.ring
    # finite length?
    hnf = module.relation_hnf()
    pivot_cols = set()
    for row in hnf:
        pivot_cols.add(next(i for i, f in enumerate(row) if not f.is_zero()))
    finite = ring.nvars == 0 or len(pivot_cols) == module.rank
    if finite:
        gens, _, _ = _max_nil_finite(module)
        sub, incl = submodule_module(module, gens)
        nil2, order2 = is_nilpotent(sub, cap=cap)
        if not nil2:
            raise InvariantViolation(
                "maximal nilpotent candidate failed its nilpotency check"
            )
        return {
            "generators": gens,
            "module": sub,
            "inclusion": incl,
            "partial": False,
            "order": order2,
        }
    # positive free rank: restrict to the torsion part
    info = module_invariants(module.effective_relations(), module.rank, ring)
    tors_gens = []
    for i in info["torsion_coords"]:
        col = tuple(info["from_canonical"][r][i] for r in range(module.rank))
        tors_gens.append(module.normal_form(col))
    tors_gens = [g for g in tors_gens if not module.is_zero_element(g)]
    if not tors_gens:
        zero_sub, incl = submodule_module(module, [])
        return {
            "generators": [],
            "module": zero_sub,
            "inclusion": incl,
            "partial": True,
            "order": 0,
        }
    torsion, t_incl = submodule_module(module, tors_gens)
    inner = max_nilpotent_submodule(torsion, cap=cap)
    gens = [t_incl.apply(g) for g in inner["generators"]]
    sub, incl = submodule_module(module, gens)
    return {
        "generators": gens,
        "module": sub,
        "inclusion": incl,
        "partial": True,
        "order": inner["order"],
    }


# ---------------------------------------------------------------------------
# Hom
# ---------------------------------------------------------------------------


class HomResult:
    __slots__ = ("basis", "dimension_fp", "partial", "degree_cap")

    def __init__(self, basis, dimension_fp, partial, degree_cap):
        self.basis = basis
        self.dimension_fp = dimension_fp
        self.partial = partial
        self.degree_cap = degree_cap

    def __repr__(self):
        flag = ", partial" if self.partial else ""
        return f"HomResult(dim_Fp={self.dimension_fp}{flag})"


def _hom_unknown_monomials(ring, degree_cap):
    if ring.nvars == 0:
        return [()]
    return [(s,) for s in range(degree_cap + 1)]


def hom_cartier(source, target, degree_cap=None):
    """F_p-basis of morphisms source -> target commuting with the
    operators.

    Over F_q the answer is complete.  Over F_q[x] matrix entries are
    searched up to a degree cap (default: twice the largest relation
    degree plus p) and the result is flagged partial.
    """
    _require_pid(source, "hom_cartier")
    if source.ring != target.ring or source.ideal != target.ideal:
        raise ValidationError("hom endpoints need a common ring and quotient")
    ring = source.ring
    ctx = ring.ctx
    p, e = ctx.p, ctx.e
    if degree_cap is None:
        maxdeg = 0
        for rows in (source.effective_relations(), target.effective_relations()):
            for rho in rows:
                for f in rho:
                    if not f.is_zero():
                        maxdeg = max(maxdeg, f.total_degree())
        degree_cap = 2 * maxdeg + p
    monos = _hom_unknown_monomials(ring, degree_cap)
    # unknown layout: (i target gen, j source gen, mono index, fp coord)
    slots = []
    for i in range(target.rank):
        for j in range(source.rank):
            for mi in range(len(monos)):
                for k in range(e):
                    slots.append((i, j, mi, k))
    nunk = len(slots)

    def images_for(fp_values):
        imgs = []
        for j in range(source.rank):
            vec = list(zero_vector(ring, target.rank))
            imgs.append(vec)
        for val, (i, j, mi, k) in zip(fp_values, slots):
            if val % p == 0:
                continue
            coeff = ctx.from_coords(
                tuple((val if kk == k else 0) % p for kk in range(e))
            )
            term = ring.scalar(coeff) * ring.monomial(monos[mi])
            imgs[j][i] = imgs[j][i] + term
        return [tuple(v) for v in imgs]

    def residuals(images):
        out = []
        for rho in source.effective_relations():
            acc = zero_vector(ring, target.rank)
            for j, f in enumerate(rho):
                if not f.is_zero():
                    acc = vec_add(acc, vec_scale(images[j], f))
            out.append(target.normal_form(acc))
        for (a, j), val in sorted(source.kappa_table.items()):
            lhs = zero_vector(ring, target.rank)
            for jj, f in enumerate(val):
                if not f.is_zero():
                    lhs = vec_add(lhs, vec_scale(images[jj], f))
            xa = ring.monomial(a)
            rhs = target._apply_raw(vec_scale(images[j], xa))
            out.append(target.normal_form(vec_add(lhs, vec_scale(rhs, -ring.one))))
        return out

    # probe unit unknowns, collect residual support, build the F_p system
    import numpy as np

    probes = []
    support = set()
    for u in range(nunk):
        vals = [0] * nunk
        vals[u] = 1
        res = residuals(images_for(vals))
        probes.append(res)
        for vi, vec in enumerate(res):
            for ci, f in enumerate(vec):
                for mono in f.terms:
                    support.add((vi, ci, mono))
    support = sorted(support)
    sindex = {s: i for i, s in enumerate(support)}
    nrows = len(support) * e
    if nrows == 0:
        mat = np.zeros((1, nunk), dtype=np.int64)
    else:
        mat = np.zeros((nrows, nunk), dtype=np.int64)
        for u, res in enumerate(probes):
            for vi, vec in enumerate(res):
                for ci, f in enumerate(vec):
                    for mono, coeff in f.terms.items():
                        base = sindex[(vi, ci, mono)] * e
                        for k, c in enumerate(coeff.coords):
                            mat[base + k, u] = c
    ker = kernels.nullspace_mod_p(mat % p, p)
    # canonical basis: rref over F_p
    if ker.shape[0]:
        ker, _ = kernels.rref_mod_p(ker, p)
        ker = ker[~np.all(ker == 0, axis=1)]
    basis = []
    for row in ker:
        imgs = images_for([int(v) for v in row])
        basis.append(CartierMorphism(source, target, imgs))
    partial = ring.nvars >= 1
    return HomResult(basis, len(basis), partial, degree_cap)


# ---------------------------------------------------------------------------
# standard constructors
# ---------------------------------------------------------------------------


def omega_module(ring):
    """Top differential forms with the classical trace operator: the table
    sends x^a dx to dx when every a_i equals p-1 and to zero otherwise."""
    p = ring.ctx.p
    if ring.nvars == 0:
        raise ValidationError("omega_module needs at least one variable")
    astar = tuple(p - 1 for _ in range(ring.nvars))
    table = {}
    for a in ring.pth_basis():
        table[(a, 0)] = (ring.one if a == astar else ring.zero,)
    name = "dx" if ring.nvars == 1 else "w"
    return CartierModule(ring, 1, table, generator_names=(name,))


def point_module(ctx):
    """Rank-1 module over F_q with the p-th-root operator (the point's
    dualizing structure): kappa(c e) = c^{1/p} e."""
    from .poly import PolyRing

    ring = PolyRing(ctx, ())
    table = {((), 0): (ring.one,)}
    return CartierModule(ring, 1, table, generator_names=("e",))


def jordan_block_module(ctx, size=2):
    """Nilpotent shift on F_q^size: kappa(e_1) = 0, kappa(e_k) = e_{k-1}."""
    from .poly import PolyRing

    ring = PolyRing(ctx, ())
    table = {}
    for j in range(size):
        vec = list(zero_vector(ring, size))
        if j > 0:
            vec[j - 1] = ring.one
        table[((), j)] = tuple(vec)
    return CartierModule(ring, size, table)
