"""Gamma-sheaves: modules with a linear map into their Frobenius pullback.

A GammaSheaf is N = R^r / relations with an R-linear gamma: N -> F^*N.
The pullback F^*N is presented on generators 1 (x) n_i with the twist
convention 1 (x) (f n) = f^p (1 (x) n), so its relation rows are the
entrywise p-th powers of N's rows (ideal rows stay as they are).  gamma is
stored as the matrix C with gamma(n_j) = sum_i C[i][j] (1 (x) n_i).

The equivalence with Cartier modules tensors with the rank-1 dualizing
module and is realized by two closed-form table conversions:

    kappa-table -> gamma-matrix:   C[i][j] = sum_a T^(a)[i][j]^p x^(a*-a)
    gamma-matrix -> kappa-table:   T^(a)[i][j] = component of C[i][j] x^a
                                   at the top exponent a* = (p-1,..,p-1)

where T^(a)[i][j] is the i-coordinate of kappa(x^a g_j).  Both composites
are the identity on tables, which the tests pin down exactly.

Iterates of gamma compose with Frobenius twists: the k-th iterate has
matrix C^(p^{k-1}) ... C^(p) C (entrywise powers).  Kernels of the
iterates form an ascending chain, which terminates over a Noetherian
ring; the stable kernel drives nilpotency tests and unit-root extraction.
"""

from .errors import (
    NonStabilized,
    InvariantViolation,
    UnsupportedRingError,
    ValidationError,
)
from .cartier import CartierModule, iteration_cap, point_module, omega_module
from .poly import PolyRing, frobenius_component, compose_from_components
from .submodules import (
    hnf_rows,
    in_span,
    reduce_vector,
    span_equal,
    syzygy_generators,
    solve_combination,
    vec_scale,
    zero_vector,
)

__all__ = [
    "DualizingData",
    "GammaSheaf",
    "UnitRoot",
    "structure_gamma",
    "cartier_to_gamma",
    "gamma_to_cartier",
    "gamma_kernel_chain",
    "gamma_image_chain",
    "gamma_nilpotent",
    "gamma_unit_defect",
    "gamma_pullback",
    "unit_root_stabilize",
]


class DualizingData:
    """The fixed rank-1 module with its classical operator, the monomial
    basis x^a (a in [0,p)^n) of the ring over its p-th powers, and the
    dual projections picking Frobenius components."""

    __slots__ = ("ring", "omega", "cartier_op", "frobenius_basis", "top")

    def __init__(self, ring):
        self.ring = ring
        if ring.nvars == 0:
            self.omega = point_module(ring.ctx)
        else:
            self.omega = omega_module(ring)
        self.cartier_op = self.omega.kappa_table
        self.frobenius_basis = tuple(
            ring.monomial(a) for a in ring.pth_basis()
        )
        p = ring.ctx.p
        self.top = tuple(p - 1 for _ in range(ring.nvars))

    def dual_basis(self, a, f):
        """Coefficient g_a in f = sum_b g_b^p x^b."""
        return frobenius_component(f, tuple(a))


class GammaSheaf:
    """Finitely presented module with a linear structural map into its
    Frobenius pullback, stored as the matrix over the generators."""

    __slots__ = ("ring", "rank", "gamma_matrix", "relations", "ideal",
                 "generator_names", "_rel_hnf")

    def __init__(
        self,
        ring,
        rank,
        gamma_matrix,
        relations=(),
        ideal=None,
        generator_names=None,
        validate=True,
    ):
        self.ring = ring
        self.rank = int(rank)
        self.gamma_matrix = tuple(tuple(row) for row in gamma_matrix)
        self.relations = tuple(tuple(v) for v in relations)
        self.ideal = ideal
        if generator_names is None:
            generator_names = tuple(f"n{i + 1}" for i in range(self.rank))
        self.generator_names = tuple(generator_names)
        self._rel_hnf = None
        if validate:
            self._validate()

    # -- presentation ------------------------------------------------------

    def effective_relations(self):
        rows = list(self.relations)
        if self.ideal is not None:
            for h in self.ideal.groebner:
                for i in range(self.rank):
                    row = list(zero_vector(self.ring, self.rank))
                    row[i] = h
                    rows.append(tuple(row))
        return tuple(rows)

    def twisted_relations(self, k=1):
        """Relation rows of the k-fold Frobenius pullback: entrywise
        p^k-th powers of the module rows, plus untouched ideal rows."""
        q = self.ring.ctx.p ** k
        rows = []
        for rho in self.relations:
            rows.append(tuple(f**q for f in rho))
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
        if len(self.gamma_matrix) != self.rank or any(
            len(row) != self.rank for row in self.gamma_matrix
        ):
            raise ValidationError("gamma matrix must be rank x rank")
        for row in self.gamma_matrix:
            for f in row:
                if f.ring != ring:
                    raise ValidationError("gamma entry over wrong ring")
        if self.ideal is not None and ring.nvars == 0:
            raise ValidationError("constant rings take no ideal quotient")
        if ring.nvars >= 2 and self.relations:
            raise UnsupportedRingError(
                "relations over multivariate rings are not supported"
            )
        if len(self.generator_names) != self.rank:
            raise ValidationError("generator_names length must match rank")
        # well-definedness: gamma maps relations into the twisted span
        rels = self.effective_relations()
        if not rels:
            return
        if ring.nvars <= 1:
            twisted = hnf_rows(self.twisted_relations(1), self.rank, ring)
            for rho in rels:
                img = self.apply_gamma(rho)
                if not in_span(img, twisted, ring):
                    raise ValidationError(
                        "gamma does not map the relations into the twisted "
                        "relation span"
                    )
        else:
            for rho in rels:
                img = self.apply_gamma(rho)
                for f in img:
                    if not self.ideal.normal_form(f).is_zero():
                        raise ValidationError(
                            "gamma does not preserve the ideal rows"
                        )

    # -- elements ----------------------------------------------------------

    def check_element(self, v):
        v = tuple(v)
        if len(v) != self.rank:
            raise ValidationError("element has wrong number of coordinates")
        return v

    def apply_gamma(self, v):
        """Coordinates of gamma(v) in the 1 (x) n_i generators of F^*N."""
        v = self.check_element(v)
        out = []
        for i in range(self.rank):
            acc = self.ring.zero
            for j in range(self.rank):
                if not v[j].is_zero() and not self.gamma_matrix[i][j].is_zero():
                    acc = acc + self.gamma_matrix[i][j] * v[j]
            out.append(acc)
        return tuple(out)

    def canonical_twist(self, v):
        """Coordinates of 1 (x) v in F^*N: entrywise p-th powers."""
        v = self.check_element(v)
        return tuple(f ** self.ring.ctx.p for f in v)

    def iterate_matrix(self, k):
        """Matrix of gamma^k: N -> F^{k*}N (C^(p^{k-1}) ... C^(p) C)."""
        ring = self.ring
        p = ring.ctx.p
        result = None
        for j in range(k):
            power = p**j
            twisted = [
                [entry**power for entry in row] for row in self.gamma_matrix
            ]
            if result is None:
                result = twisted
            else:
                result = _matmul(twisted, result, ring)
        if result is None:  # k == 0
            result = [
                [ring.one if i == jj else ring.zero for jj in range(self.rank)]
                for i in range(self.rank)
            ]
        return tuple(tuple(row) for row in result)

    def normal_form(self, v):
        if self.ring.nvars <= 1:
            return reduce_vector(self.check_element(v), self.relation_hnf(), self.ring)
        if self.ideal is not None:
            return tuple(self.ideal.normal_form(f) for f in self.check_element(v))
        return self.check_element(v)

    def is_zero_sheaf(self):
        if self.ring.nvars <= 1:
            hnf = self.relation_hnf()
            for j in range(self.rank):
                unit = list(zero_vector(self.ring, self.rank))
                unit[j] = self.ring.one
                if not in_span(tuple(unit), hnf, self.ring):
                    return False
            return True
        return self.rank == 0

    def __eq__(self, other):
        if not isinstance(other, GammaSheaf):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.rank == other.rank
            and self.ideal == other.ideal
            and self.relations == other.relations
            and self.gamma_matrix == other.gamma_matrix
        )

    def __repr__(self):
        base = f"F_{self.ring.ctx.q}[{', '.join(self.ring.vars)}]"
        if self.ideal is not None:
            base += "/I"
        return f"GammaSheaf(rank {self.rank} over {base})"


def _matmul(a, b, ring):
    n = len(a)
    m = len(b[0]) if b else 0
    k = len(b)
    out = [[ring.zero for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for j in range(m):
            acc = ring.zero
            for s in range(k):
                if not a[i][s].is_zero() and not b[s][j].is_zero():
                    acc = acc + a[i][s] * b[s][j]
            out[i][j] = acc
    return out


def structure_gamma(ring):
    """The structure sheaf with its Frobenius unit: rank 1, matrix [1]."""
    return GammaSheaf(ring, 1, ((ring.one,),), generator_names=("u",))


# ---------------------------------------------------------------------------
# the equivalence
# ---------------------------------------------------------------------------


def cartier_to_gamma(module, dualizing=None):
    """Convert an operator table to the matrix of the corresponding linear
    structural map (tensor with the inverse dualizing module)."""
    ring = module.ring
    if module.ideal is not None:
        raise UnsupportedRingError(
            "conversion over a quotient ring is ambiguous; re-present the "
            "module over the quotient's own coordinate ring first"
        )
    if dualizing is None:
        dualizing = DualizingData(ring)
    p = ring.ctx.p
    top = dualizing.top
    r = module.rank
    C = [[ring.zero for _ in range(r)] for _ in range(r)]
    for a in ring.pth_basis():
        shift = ring.monomial(tuple(t - ai for t, ai in zip(top, a)))
        for j in range(r):
            val = module.kappa_table[(a, j)]
            for i in range(r):
                if not val[i].is_zero():
                    C[i][j] = C[i][j] + val[i].pth_power() * shift
    return GammaSheaf(
        ring,
        r,
        C,
        relations=module.relations,
        ideal=None,
        generator_names=module.generator_names,
    )


def gamma_to_cartier(sheaf, dualizing=None):
    """Convert a structural matrix back to an operator table (tensor with
    the dualizing module): the table entry at shift a is the Frobenius
    component of C[i][j] x^a at the top exponent."""
    ring = sheaf.ring
    if sheaf.ideal is not None:
        raise UnsupportedRingError(
            "conversion over a quotient ring is ambiguous; re-present the "
            "sheaf over the quotient's own coordinate ring first"
        )
    if dualizing is None:
        dualizing = DualizingData(ring)
    top = dualizing.top
    r = sheaf.rank
    table = {}
    for a in ring.pth_basis():
        xa = ring.monomial(a)
        for j in range(r):
            vec = []
            for i in range(r):
                f = sheaf.gamma_matrix[i][j]
                if f.is_zero():
                    vec.append(ring.zero)
                else:
                    vec.append(frobenius_component(f * xa, top))
            table[(a, j)] = tuple(vec)
    names = sheaf.generator_names
    if r == 1 and ring.nvars == 1:
        names = ("dx",)
    return CartierModule(
        ring,
        r,
        table,
        relations=sheaf.relations,
        ideal=None,
        generator_names=names,
    )


# ---------------------------------------------------------------------------
# iteration, nilpotency, unit roots
# ---------------------------------------------------------------------------


def _full_span(ring, rank, extra):
    rows = []
    for j in range(rank):
        unit = list(zero_vector(ring, rank))
        unit[j] = ring.one
        rows.append(tuple(unit))
    return hnf_rows(rows + list(extra), rank, ring)


def gamma_kernel_chain(sheaf, cap=None):
    """Ascending kernels of the iterates gamma^k, as HNF spans in the
    generator coordinates (each containing the relation span).  Returns
    (chain, stabilized_index): chain[k] is ker(gamma^k), chain[0] the
    relation span, and chain[e] == chain[e+1] == ... for e = stabilized
    index."""
    if sheaf.ring.nvars > 1:
        raise UnsupportedRingError(
            "kernel chains need the ring to be F_q or F_q[x]"
        )
    cap = iteration_cap(cap)
    ring = sheaf.ring
    rels = sheaf.effective_relations()
    chain = [hnf_rows(rels, sheaf.rank, ring)]
    for e in range(1, cap + 2):
        gam = sheaf.iterate_matrix(e)
        cols = [
            tuple(gam[i][j] for i in range(sheaf.rank))
            for j in range(sheaf.rank)
        ]
        twisted = sheaf.twisted_relations(e)
        ker = syzygy_generators(cols, twisted, sheaf.rank, ring)
        span = hnf_rows(list(ker) + list(rels), sheaf.rank, ring)
        if span_equal(span, chain[-1]):
            return chain, e - 1
        chain.append(span)
        if e > cap:
            break
    raise NonStabilized(
        f"gamma kernel chain did not stabilize within {cap} steps",
        partial=chain,
        cap=cap,
    )


def gamma_image_chain(sheaf, cap=None):
    """Spans of the iterate images inside the successive pullbacks, one per
    step of the kernel chain (the driver that guarantees termination).
    Returns a dict with kernels, images, and the stabilization index."""
    chain, e_star = gamma_kernel_chain(sheaf, cap=cap)
    ring = sheaf.ring
    images = []
    for k in range(1, len(chain) + 1):
        gam = sheaf.iterate_matrix(k)
        cols = [
            tuple(gam[i][j] for i in range(sheaf.rank))
            for j in range(sheaf.rank)
        ]
        images.append(
            hnf_rows(cols + list(sheaf.twisted_relations(k)), sheaf.rank, ring)
        )
    return {"kernels": chain, "images": images, "stabilized_at": e_star}


def gamma_nilpotent(sheaf, cap=None):
    """(nilpotent?, order) by the direct iterate test: gamma^k vanishes
    when every matrix column lies in the k-fold twisted relation span."""
    chain, e_star = gamma_kernel_chain(sheaf, cap=cap)
    ring = sheaf.ring
    full = _full_span(ring, sheaf.rank, sheaf.effective_relations())
    for k, span in enumerate(chain):
        if span_equal(span, full):
            return True, k
    return False, None


def gamma_unit_defect(sheaf):
    """Kernel and cokernel of the structural map gamma: N -> F^*N, viewed
    as a morphism (N, gamma) -> (F^*N, F^*gamma); both carry the zero
    induced structure and must be nilpotent of order at most 1.

    Returns a dict with the kernel and cokernel sheaves, their nilpotency
    verdicts, and the combined nil-isomorphism flag.
    """
    ring = sheaf.ring
    if ring.nvars > 1:
        raise UnsupportedRingError("unit defect needs F_q or F_q[x]")
    r = sheaf.rank
    cols = [
        tuple(sheaf.gamma_matrix[i][j] for i in range(r)) for j in range(r)
    ]
    twisted = sheaf.twisted_relations(1)
    # kernel: coefficient vectors with gamma(v) in the twisted span
    ker_gens = syzygy_generators(cols, twisted, r, ring)
    rel_hnf = sheaf.relation_hnf()
    ker_gens = [g for g in ker_gens if not in_span(g, rel_hnf, ring)]
    ker_rels = syzygy_generators(
        ker_gens, sheaf.effective_relations(), r, ring
    )
    s = len(ker_gens)
    kernel = GammaSheaf(
        ring,
        s,
        tuple(tuple(ring.zero for _ in range(s)) for _ in range(s)),
        relations=ker_rels,
        ideal=sheaf.ideal,
        generator_names=tuple(f"k{i + 1}" for i in range(s)),
    )
    # cokernel: F^*N modulo the image columns; the induced map vanishes
    # because each twisted column (C e_j)^(p) is a twist of a relation
    coker = GammaSheaf(
        ring,
        r,
        tuple(tuple(ring.zero for _ in range(r)) for _ in range(r)),
        relations=tuple(twisted) + tuple(cols),
        ideal=sheaf.ideal,
        generator_names=tuple(f"c{i + 1}" for i in range(r)),
    )
    ker_nil, ker_order = gamma_nilpotent(kernel)
    coker_nil, coker_order = gamma_nilpotent(coker)
    if not (ker_nil and coker_nil):
        raise InvariantViolation(
            "unit defect of a structural map failed its nilpotency check"
        )
    return {
        "kernel": kernel,
        "cokernel": coker,
        "kernel_nilpotent": (ker_nil, ker_order),
        "cokernel_nilpotent": (coker_nil, coker_order),
        "nil_isomorphism": ker_nil and coker_nil,
    }


def gamma_pullback(sheaf, ideal_spec):
    """Restrict along the quotient by an ideal: same presentation with the
    ideal added, matrix entries in normal form."""
    ring = sheaf.ring
    if ideal_spec.ring != ring:
        raise ValidationError("ideal over a different ring")
    if sheaf.ideal is not None:
        from .poly import IdealSpec

        ideal_spec = IdealSpec(
            ring, list(sheaf.ideal.generators) + list(ideal_spec.generators)
        )
    matrix = tuple(
        tuple(ideal_spec.normal_form(f) for f in row)
        for row in sheaf.gamma_matrix
    )
    relations = tuple(
        tuple(ideal_spec.normal_form(f) for f in rho)
        for rho in sheaf.relations
    )
    relations = tuple(
        rho for rho in relations if any(not f.is_zero() for f in rho)
    )
    return GammaSheaf(
        ring,
        sheaf.rank,
        matrix,
        relations=relations,
        ideal=ideal_spec,
        generator_names=sheaf.generator_names,
    )


class UnitRoot:
    """A sheaf on which the structural map is injective, together with the
    stabilization index that produced it.  It stands in for the colimit
    along gamma, which is never materialized."""

    __slots__ = ("root", "injective_verified", "e_star", "kernel_chain")

    def __init__(self, root, injective_verified, e_star, kernel_chain):
        self.root = root
        self.injective_verified = injective_verified
        self.e_star = e_star
        self.kernel_chain = kernel_chain

    def __repr__(self):
        return (
            f"UnitRoot(rank {self.root.rank}, e_star={self.e_star}, "
            f"injective={self.injective_verified})"
        )


def unit_root_stabilize(sheaf, cap=None):
    """Kill the nilpotent defect: find the first e where ker(gamma^e)
    stabilizes and return the image of gamma^e with its induced map, on
    which gamma is injective."""
    ring = sheaf.ring
    if ring.nvars > 1:
        raise UnsupportedRingError("unit roots need F_q or F_q[x]")
    cap = iteration_cap(cap)
    chain, e_star = gamma_kernel_chain(sheaf, cap=cap)
    p = ring.ctx.p
    for e in range(e_star, cap + 1):
        gam = sheaf.iterate_matrix(e)
        cols = [
            tuple(gam[i][j] for i in range(sheaf.rank))
            for j in range(sheaf.rank)
        ]
        twisted_e = sheaf.twisted_relations(e)
        span_e = hnf_rows(twisted_e, sheaf.rank, ring)
        gens = [c for c in cols if not in_span(c, span_e, ring)]
        root_rels = syzygy_generators(gens, twisted_e, sheaf.rank, ring)
        s = len(gens)
        # induced matrix: solve F^{e*}(gamma)(g_j) in the twisted gens
        ok = True
        matrix = [[ring.zero for _ in range(s)] for _ in range(s)]
        twisted_next = sheaf.twisted_relations(e + 1)
        ce = [
            [entry ** (p**e) for entry in row] for row in sheaf.gamma_matrix
        ]
        twisted_gens = [tuple(f**p for f in g) for g in gens]
        for j, g in enumerate(gens):
            img = tuple(
                sum(
                    (ce[i][k] * g[k] for k in range(sheaf.rank)),
                    ring.zero,
                )
                for i in range(sheaf.rank)
            )
            coeffs = solve_combination(
                twisted_gens, twisted_next, img, sheaf.rank, ring
            )
            if coeffs is None:
                ok = False
                break
            for i in range(s):
                matrix[i][j] = coeffs[i]
        if not ok:
            continue
        root = GammaSheaf(
            ring,
            s,
            matrix,
            relations=root_rels,
            ideal=sheaf.ideal,
            generator_names=tuple(f"r{i + 1}" for i in range(s)),
        )
        # verify injectivity of the induced map
        if s == 0:
            return UnitRoot(root, True, e, chain)
        rchain, _ = gamma_kernel_chain(root, cap=cap)
        if len(rchain) == 1:  # ker(gamma) == relation span == ker(gamma^0)
            return UnitRoot(root, True, e, chain)
    raise NonStabilized(
        f"unit root extraction did not stabilize within {cap} steps",
        partial=chain,
        cap=cap,
    )
