"""Submodule linear algebra over F_q and F_q[x].

Submodules of R^r are represented by generating sets of vectors (tuples of
polynomials).  Over the Euclidean domain F_q[x] -- and over F_q itself,
where division is exact -- every submodule has a unique Hermite normal
form: rows in echelon order by pivot column, monic pivots, and entries
above each pivot of strictly smaller degree.  HNF rows are the canonical
form used for equality tests, membership, and vector reduction.

Syzygies and linear solves are done by row-reducing value|tag stacks; the
Smith normal form (with unimodular transforms) yields invariant factors
and the torsion decomposition of a presented module.

Rings with two or more variables are rejected: callers must arrange their
modules to be free in that case.
"""

from .errors import UnsupportedRingError, ValidationError
from .poly import divmod_multi

__all__ = [
    "zero_vector",
    "vec_add",
    "vec_sub",
    "vec_scale",
    "hnf_rows",
    "reduce_vector",
    "in_span",
    "span_equal",
    "syzygy_generators",
    "solve_combination",
    "smith_normal_form",
    "module_invariants",
]


def _check_ring(ring):
    if ring.nvars > 1:
        raise UnsupportedRingError(
            "submodule computations need F_q or F_q[x] (one variable at most)"
        )


def zero_vector(ring, r):
    return tuple(ring.zero for _ in range(r))


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(u, f):
    return tuple(f * a for a in u)


def _leftmost(v):
    for i, a in enumerate(v):
        if not a.is_zero():
            return i
    return None


def _divmod1(a, d):
    """(q, r) with a = q d + r, deg r < deg d (exact over constants)."""
    quots, rem = divmod_multi(a, [d])
    return quots[0], rem


def hnf_rows(vectors, r, ring):
    """Hermite normal form of the span of ``vectors`` inside R^r."""
    _check_ring(ring)
    work = [tuple(v) for v in vectors if any(not a.is_zero() for a in v)]
    for v in work:
        if len(v) != r:
            raise ValidationError("vector length does not match module rank")
    result = []
    for col in range(r):
        active = [v for v in work if not v[col].is_zero()]
        rest = [v for v in work if v[col].is_zero()]
        if not active:
            work = rest
            continue
        # Euclid on the col-entries until one survivor
        while len(active) > 1:
            active.sort(key=lambda v: v[col].degree_in(0) if ring.nvars else 0)
            piv = active[0]
            nxt = []
            for v in active[1:]:
                q, _ = _divmod1(v[col], piv[col])
                v2 = vec_sub(v, vec_scale(piv, q))
                if v2[col].is_zero():
                    if any(not a.is_zero() for a in v2):
                        rest.append(v2)
                else:
                    nxt.append(v2)
            active = [piv] + nxt
        piv = active[0]
        lead = piv[col].leading()[1]
        piv = vec_scale(piv, ring.scalar(lead.inv()))
        result.append(piv)
        work = rest
    # back-reduce entries above pivots
    for k in range(len(result)):
        col = _leftmost(result[k])
        d = result[k][col]
        for j in range(len(result)):
            if j == k:
                continue
            if not result[j][col].is_zero():
                q, _ = _divmod1(result[j][col], d)
                if not q.is_zero():
                    result[j] = vec_sub(result[j], vec_scale(result[k], q))
    result.sort(key=lambda v: _leftmost(v))
    return tuple(result)


def reduce_vector(v, hnf, ring):
    """Canonical representative of v modulo the span given by HNF rows."""
    v = tuple(v)
    for row in hnf:
        col = _leftmost(row)
        if not v[col].is_zero():
            q, _ = _divmod1(v[col], row[col])
            if not q.is_zero():
                v = vec_sub(v, vec_scale(row, q))
    return v


def in_span(v, hnf, ring):
    return all(a.is_zero() for a in reduce_vector(v, hnf, ring))


def span_equal(hnf_a, hnf_b):
    return tuple(hnf_a) == tuple(hnf_b)


def _tracked_echelon(gens, rels, r, ring):
    """Echelonize rows [gens; rels] over value columns, tracking how each
    surviving row is expressed in the generators (unit tags for gens, zero
    tags for rels).  Returns (pivot_rows, zero_tag_rows): pivot rows are
    (value, tag) pairs echelon in the value part; zero_tag_rows collect the
    tags of rows whose value part vanished."""
    _check_ring(ring)
    k = len(gens)

    def tag_unit(i):
        return tuple(ring.one if j == i else ring.zero for j in range(k))

    work = []
    for i, g in enumerate(gens):
        work.append((tuple(g), tag_unit(i)))
    for rel in rels:
        work.append((tuple(rel), tuple(ring.zero for _ in range(k))))

    result = []
    zero_tags = []
    for col in range(r):
        active = [w for w in work if not w[0][col].is_zero()]
        rest = [w for w in work if w[0][col].is_zero()]
        if not active:
            work = rest
            continue
        while len(active) > 1:
            active.sort(key=lambda w: w[0][col].degree_in(0) if ring.nvars else 0)
            piv = active[0]
            nxt = []
            for w in active[1:]:
                q, _ = _divmod1(w[0][col], piv[0][col])
                val = vec_sub(w[0], vec_scale(piv[0], q))
                tag = vec_sub(w[1], vec_scale(piv[1], q))
                if val[col].is_zero():
                    if any(not a.is_zero() for a in val):
                        rest.append((val, tag))
                    elif any(not a.is_zero() for a in tag):
                        zero_tags.append(tag)
                else:
                    nxt.append((val, tag))
            active = [piv] + nxt
        result.append(active[0])
        work = rest
    for val, tag in work:
        if all(a.is_zero() for a in val) and any(not a.is_zero() for a in tag):
            zero_tags.append(tag)
    return result, zero_tags


def syzygy_generators(gens, rels, r, ring):
    """Generators of {c in R^k : sum c_i gens_i lies in the span of rels}."""
    if not gens:
        return []
    pivots, zero_tags = _tracked_echelon(gens, rels, r, ring)
    return [t for t in hnf_rows(zero_tags, len(gens), ring)]


def solve_combination(gens, rels, target, r, ring):
    """Coefficients c with sum c_i gens_i = target modulo the span of rels,
    or None when no solution exists."""
    if not gens:
        reduced = reduce_vector(target, hnf_rows(rels, r, ring), ring)
        return [] if all(a.is_zero() for a in reduced) else None
    pivots, _ = _tracked_echelon(gens, rels, r, ring)
    k = len(gens)
    t = tuple(target)
    coeffs = [ring.zero] * k
    for val, tag in pivots:
        col = _leftmost(val)
        if not t[col].is_zero():
            q, _ = _divmod1(t[col], val[col])
            if not q.is_zero():
                t = vec_sub(t, vec_scale(val, q))
                for i in range(k):
                    coeffs[i] = coeffs[i] + q * tag[i]
    if any(not a.is_zero() for a in t):
        return None
    return coeffs


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def _deg(f):
    return f.degree_in(0) if f.ring.nvars else 0


def smith_normal_form(matrix, ring):
    """(D, U, V, Uinv) with U A V = D diagonal, d_1 | d_2 | ..., pivots monic.

    U and V are unimodular; Uinv is maintained alongside U so callers can
    map canonical coordinates back without a separate inversion.
    """
    _check_ring(ring)
    A = [list(row) for row in matrix]
    rows = len(A)
    cols = len(A[0]) if rows else 0

    U = [[ring.one if i == j else ring.zero for j in range(rows)] for i in range(rows)]
    Uinv = [
        [ring.one if i == j else ring.zero for j in range(rows)] for i in range(rows)
    ]
    V = [[ring.one if i == j else ring.zero for j in range(cols)] for i in range(cols)]

    def row_sub(i, k, q):  # row_i -= q * row_k
        A[i] = [a - q * b for a, b in zip(A[i], A[k])]
        U[i] = [a - q * b for a, b in zip(U[i], U[k])]
        for rr in range(rows):  # Uinv: col_k += q * col_i
            Uinv[rr][k] = Uinv[rr][k] + q * Uinv[rr][i]

    def row_swap(i, k):
        A[i], A[k] = A[k], A[i]
        U[i], U[k] = U[k], U[i]
        for rr in range(rows):
            Uinv[rr][i], Uinv[rr][k] = Uinv[rr][k], Uinv[rr][i]

    def row_scale(i, u, uinv):
        A[i] = [u * a for a in A[i]]
        U[i] = [u * a for a in U[i]]
        for rr in range(rows):
            Uinv[rr][i] = uinv * Uinv[rr][i]

    def col_sub(j, k, q):  # col_j -= q * col_k
        for i in range(rows):
            A[i][j] = A[i][j] - q * A[i][k]
        for i in range(cols):
            V[i][j] = V[i][j] - q * V[i][k]

    def col_swap(j, k):
        for i in range(rows):
            A[i][j], A[i][k] = A[i][k], A[i][j]
        for i in range(cols):
            V[i][j], V[i][k] = V[i][k], V[i][j]

    def find_pivot(k):
        best = None
        for i in range(k, rows):
            for j in range(k, cols):
                if not A[i][j].is_zero():
                    if best is None or _deg(A[i][j]) < _deg(A[best[0]][best[1]]):
                        best = (i, j)
        return best

    k = 0
    while k < min(rows, cols):
        piv = find_pivot(k)
        if piv is None:
            break
        i0, j0 = piv
        if i0 != k:
            row_swap(i0, k)
        if j0 != k:
            col_swap(j0, k)
        while True:
            # clear column k
            dirty = False
            for i in range(k + 1, rows):
                if not A[i][k].is_zero():
                    q, rem = _divmod1(A[i][k], A[k][k])
                    row_sub(i, k, q)
                    if not A[i][k].is_zero():
                        row_swap(i, k)
                        dirty = True
            if dirty:
                continue
            # clear row k
            dirty = False
            for j in range(k + 1, cols):
                if not A[k][j].is_zero():
                    q, rem = _divmod1(A[k][j], A[k][k])
                    col_sub(j, k, q)
                    if not A[k][j].is_zero():
                        col_swap(j, k)
                        dirty = True
            if dirty:
                continue
            # divisibility fix-up: pivot must divide the whole submatrix
            offender = None
            for i in range(k + 1, rows):
                for j in range(k + 1, cols):
                    if not A[i][j].is_zero():
                        _, rem = _divmod1(A[i][j], A[k][k])
                        if not rem.is_zero():
                            offender = i
                            break
                if offender is not None:
                    break
            if offender is None:
                break
            row_sub(k, offender, -ring.one)  # row_k += row_offender
        lead = A[k][k].leading()[1]
        if lead != ring.ctx.one:
            u = ring.scalar(lead.inv())
            row_scale(k, u, ring.scalar(lead))
        k += 1
    D = [[A[i][j] for j in range(cols)] for i in range(rows)]
    return D, U, V, Uinv


def module_invariants(relation_rows, r, ring):
    """Invariant-factor data of M = R^r / span(relation_rows).

    Returns a dict with:
      ``factors``: list of length r; entry i is the invariant factor d_i in
          canonical coordinates (ring.one for killed coordinates, zero
          polynomial for free coordinates);
      ``to_canonical``: matrix U (list of rows) with canonical = U . vector;
      ``from_canonical``: Uinv with vector = Uinv . canonical;
      ``torsion_coords`` / ``free_coords``: index lists.
    """
    _check_ring(ring)
    rels = [list(row) for row in relation_rows]
    if not rels:
        return {
            "factors": [ring.zero] * r,
            "to_canonical": [
                [ring.one if i == j else ring.zero for j in range(r)]
                for i in range(r)
            ],
            "from_canonical": [
                [ring.one if i == j else ring.zero for j in range(r)]
                for i in range(r)
            ],
            "torsion_coords": [],
            "free_coords": list(range(r)),
        }
    # generators of the relation module are columns of G (r x k)
    k = len(rels)
    G = [[rels[j][i] for j in range(k)] for i in range(r)]
    D, U, V, Uinv = smith_normal_form(G, ring)
    factors = []
    torsion, free = [], []
    for i in range(r):
        d = D[i][i] if i < min(r, k) else ring.zero
        factors.append(d)
        if d.is_zero():
            free.append(i)
        elif not d.is_unit():
            torsion.append(i)
    return {
        "factors": factors,
        "to_canonical": U,
        "from_canonical": Uinv,
        "torsion_coords": torsion,
        "free_coords": free,
    }


def mat_vec(M, v, ring):
    out = []
    for row in M:
        acc = ring.zero
        for a, b in zip(row, v):
            if not a.is_zero() and not b.is_zero():
                acc = acc + a * b
        out.append(acc)
    return tuple(out)
