"""Dense linear algebra mod a small prime p.

Everything in this package that is F_p-linear -- fixed-point counting,
Hom solving, brute-force enumeration -- bottoms out in row reduction of
int64 matrices mod p.  Two interchangeable backends are provided:

* a numba ``@njit`` backend (default when numba imports cleanly), and
* a pure-numpy fallback.

Set the environment variable ``CARTIER_LAB_NO_NUMBA=1`` to force the
numpy path.  ``backend()`` reports which one is active.  Both paths are
exercised by the test suite and compared by ``benchmarks/bench_kernels.py``.

Matrices are numpy int64 arrays with entries already reduced into
``[0, p)``; all functions return arrays in the same normal form.
"""

import os

import numpy as np

_USE_NUMBA = os.environ.get("CARTIER_LAB_NO_NUMBA", "") not in ("1", "true", "yes")
if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised only without numba
        _USE_NUMBA = False

__all__ = [
    "backend",
    "rref_mod_p",
    "rank_mod_p",
    "nullspace_mod_p",
    "solve_mod_p",
    "inv_mod_p",
    "matmul_mod_p",
]


def backend():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if _USE_NUMBA else "numpy"


def _inv_scalar(a, p):
    # Fermat: a^(p-2) mod p, p prime, a != 0
    return pow(int(a), p - 2, p)


# ---------------------------------------------------------------- numpy path


def _rref_numpy(a, p):
    m = a.copy() % p
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            m[[r, i]] = m[[i, r]]
        m[r] = (m[r] * _inv_scalar(m[r, c], p)) % p
        other = np.nonzero(m[:, c])[0]
        other = other[other != r]
        if other.size:
            m[other] = (m[other] - np.outer(m[other, c], m[r])) % p
        pivots.append(c)
        r += 1
    return m, np.array(pivots, dtype=np.int64)


# ---------------------------------------------------------------- numba path

if _USE_NUMBA:

    @njit(cache=True)
    def _inv_scalar_nb(a, p):
        # square-and-multiply a^(p-2) mod p
        e = p - 2
        result = 1
        base = a % p
        while e > 0:
            if e & 1:
                result = (result * base) % p
            base = (base * base) % p
            e >>= 1
        return result

    @njit(cache=True)
    def _rref_numba(a, p):
        m = a.copy() % p
        rows, cols = m.shape
        pivots = np.empty(min(rows, cols), dtype=np.int64)
        npiv = 0
        r = 0
        for c in range(cols):
            if r == rows:
                break
            piv = -1
            for i in range(r, rows):
                if m[i, c] != 0:
                    piv = i
                    break
            if piv == -1:
                continue
            if piv != r:
                for j in range(cols):
                    tmp = m[r, j]
                    m[r, j] = m[piv, j]
                    m[piv, j] = tmp
            inv = _inv_scalar_nb(m[r, c], p)
            for j in range(cols):
                m[r, j] = (m[r, j] * inv) % p
            for i in range(rows):
                if i != r and m[i, c] != 0:
                    f = m[i, c]
                    for j in range(cols):
                        m[i, j] = (m[i, j] - f * m[r, j]) % p
            pivots[npiv] = c
            npiv += 1
            r += 1
        return m, pivots[:npiv]


def rref_mod_p(a, p):
    """Reduced row echelon form of ``a`` mod p.

    Returns ``(r, pivots)`` where ``r`` is the RREF matrix and ``pivots``
    the pivot column indices, one per nonzero row.
    """
    a = np.ascontiguousarray(np.asarray(a, dtype=np.int64) % p)
    if a.size == 0:
        return a.copy(), np.empty(0, dtype=np.int64)
    if _USE_NUMBA:
        return _rref_numba(a, p)
    return _rref_numpy(a, p)


def rank_mod_p(a, p):
    return int(rref_mod_p(a, p)[1].size)


def nullspace_mod_p(a, p):
    """Basis of the right kernel {x : a @ x = 0 mod p}, rows = basis vectors."""
    a = np.asarray(a, dtype=np.int64) % p
    if a.size == 0:
        n = a.shape[1] if a.ndim == 2 else 0
        return np.eye(n, dtype=np.int64)
    r, pivots = rref_mod_p(a, p)
    n = a.shape[1]
    pivset = set(int(c) for c in pivots)
    free = [c for c in range(n) if c not in pivset]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-r[i, fc]) % p
    return basis


def solve_mod_p(a, b, p):
    """One solution x of a @ x = b mod p, or None if inconsistent."""
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    if a.ndim != 2:
        raise ValueError("matrix expected")
    aug = np.hstack([a, b.reshape(-1, 1)])
    r, pivots = rref_mod_p(aug, p)
    n = a.shape[1]
    for i, c in enumerate(pivots):
        if c == n:
            return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = r[i, n]
    return x


def inv_mod_p(a, p):
    """Inverse of a square matrix mod p, or None if singular."""
    a = np.asarray(a, dtype=np.int64) % p
    n = a.shape[0]
    aug = np.hstack([a, np.eye(n, dtype=np.int64)])
    r, pivots = rref_mod_p(aug, p)
    if pivots.size < n or int(pivots[n - 1]) != n - 1:
        return None
    return r[:n, n:].copy()


def matmul_mod_p(a, b, p):
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % p
