"""Fixed-width elimination over Z/p^e and over the prime field F_p.

The bar-complex oracle uses the Z/p^e pivot kernel; cochain complexes whose
coefficient groups are all elementary abelian p-groups are solved exactly by
row reduction over F_p.  Entries are reduced mod p^e < 2^31, so every
product fits in int64 and the arithmetic is exact.  Two interchangeable
backends exist: a numba-compiled loop and a vectorized numpy version.  The
backend is chosen per call (``backend="auto"`` prefers numba when it is
importable); there is no global or environment switch.
"""
from __future__ import annotations

import numpy as np

try:
    import numba as nb
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional at runtime
    nb = None
    HAS_NUMBA = False

BACKENDS = ("auto", "numba", "numpy")
MAX_MODULUS = 2 ** 31


def _local_pivots_numpy(a: np.ndarray, p: int, e: int) -> list[int]:
    mod = p ** e
    a = np.mod(a.astype(np.int64), mod)
    rows, cols = a.shape
    vals: list[int] = []
    r = 0
    while r < rows and r < cols:
        sub = a[r:, r:]
        found = None
        pv = 1
        for v in range(e):
            mask = np.mod(sub, pv * p) != 0
            if mask.any():
                flat = int(np.argmax(mask))
                found = (flat // sub.shape[1], flat % sub.shape[1], v)
                break
            pv *= p
        if found is None:
            break
        i, j, v = found
        i += r
        j += r
        if i != r:
            a[[r, i], :] = a[[i, r], :]
        if j != r:
            a[:, [r, j]] = a[:, [j, r]]
        unit = int(a[r, r]) // pv
        inv = pow(unit % mod, -1, mod)
        a[r, r:] = np.mod(a[r, r:] * inv, mod)
        f = a[r + 1:, r] // pv
        nz = np.nonzero(f)[0]
        if nz.size:
            rr = nz + r + 1
            a[rr, r:] = np.mod(a[rr, r:] - np.mod(np.outer(f[nz], a[r, r:]), mod), mod)
        vals.append(v)
        r += 1
    return vals


if HAS_NUMBA:
    @nb.njit(cache=True)
    def _inverse_mod(u: int, mod: int) -> int:
        a, b = u % mod, mod
        x0, x1 = 1, 0
        while b:
            q = a // b
            a, b = b, a - q * b
            x0, x1 = x1, x0 - q * x1
        return x0 % mod

    @nb.njit(cache=True)
    def _local_pivots_numba(a: np.ndarray, p: int, e: int) -> np.ndarray:
        mod = 1
        for _ in range(e):
            mod *= p
        rows, cols = a.shape
        for i in range(rows):
            for j in range(cols):
                a[i, j] = a[i, j] % mod
        out = np.empty(min(rows, cols), dtype=np.int64)
        count = 0
        r = 0
        while r < rows and r < cols:
            best_v = e
            bi = -1
            bj = -1
            for i in range(r, rows):
                for j in range(r, cols):
                    x = a[i, j]
                    if x != 0:
                        v = 0
                        while x % p == 0:
                            x //= p
                            v += 1
                        if v < best_v:
                            best_v = v
                            bi = i
                            bj = j
                            if v == 0:
                                break
                if best_v == 0:
                    break
            if bi < 0:
                break
            if bi != r:
                for j in range(cols):
                    t = a[r, j]
                    a[r, j] = a[bi, j]
                    a[bi, j] = t
            if bj != r:
                for i in range(rows):
                    t = a[i, r]
                    a[i, r] = a[i, bj]
                    a[i, bj] = t
            pv = 1
            for _ in range(best_v):
                pv *= p
            inv = _inverse_mod(a[r, r] // pv, mod)
            for j in range(r, cols):
                a[r, j] = (a[r, j] * inv) % mod
            for i in range(r + 1, rows):
                if a[i, r] != 0:
                    f = a[i, r] // pv
                    for j in range(r, cols):
                        if a[r, j] != 0:
                            a[i, j] = (a[i, j] - f * a[r, j]) % mod
            out[count] = best_v
            count += 1
            r += 1
        return out[:count]


def resolve_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"unknown kernel backend {backend!r}")
    if backend == "auto":
        return "numba" if HAS_NUMBA else "numpy"
    if backend == "numba" and not HAS_NUMBA:
        raise ValueError("numba backend requested but numba is not installed")
    return backend


def local_pivot_valuations(a: np.ndarray, p: int, e: int, backend: str = "auto") -> list[int]:
    """Valuations of the Smith-form pivots of ``a`` over Z/p^e (zero pivots omitted).

    The result is sorted; entries lie in 0..e-1.
    """
    if p < 2 or e < 1 or p ** e >= MAX_MODULUS:
        raise ValueError("modulus out of range for the fixed-width kernel")
    if a.size == 0:
        return []
    which = resolve_backend(backend)
    if which == "numba":
        vals = [int(v) for v in _local_pivots_numba(np.array(a, dtype=np.int64, copy=True), p, e)]
    else:
        vals = _local_pivots_numpy(np.array(a, dtype=np.int64, copy=True), p, e)
    return sorted(vals)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def _rref_numpy(a: np.ndarray, p: int, ncols: int) -> tuple[np.ndarray, list[int]]:
    rows = a.shape[0]
    piv: list[int] = []
    r = 0
    for j in range(ncols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, j])[0]
        if nz.size == 0:
            continue
        i = int(nz[0]) + r
        if i != r:
            a[[r, i], :] = a[[i, r], :]
        inv = pow(int(a[r, j]), -1, p)
        a[r, j:] = np.mod(a[r, j:] * inv, p)
        col = a[:, j].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            a[hit, j:] = np.mod(a[hit, j:] - np.outer(col[hit], a[r, j:]), p)
        piv.append(j)
        r += 1
    return a[:r], piv


if HAS_NUMBA:
    @nb.njit(cache=True)
    def _rref_numba(a: np.ndarray, p: int, ncols: int) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = a.shape
        for i in range(rows):
            for j in range(cols):
                a[i, j] = a[i, j] % p
        piv = np.empty(min(rows, ncols), dtype=np.int64)
        r = 0
        for j in range(ncols):
            if r == rows:
                break
            i = r
            while i < rows and a[i, j] == 0:
                i += 1
            if i == rows:
                continue
            if i != r:
                for k in range(j, cols):
                    t = a[r, k]
                    a[r, k] = a[i, k]
                    a[i, k] = t
            inv = _inverse_mod(a[r, j], p)
            for k in range(j, cols):
                a[r, k] = (a[r, k] * inv) % p
            for i2 in range(rows):
                if i2 != r and a[i2, j] != 0:
                    f = a[i2, j]
                    for k in range(j, cols):
                        if a[r, k] != 0:
                            a[i2, k] = (a[i2, k] - f * a[r, k]) % p
            piv[r] = j
            r += 1
        return a[:r].copy(), piv[:r].copy()


def rref_mod_p(a: np.ndarray, p: int, ncols: int | None = None,
               backend: str = "auto") -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p, pivoting only among the first ``ncols`` columns.

    Returns the nonzero rows and their pivot columns.
    """
    if not _is_prime(p) or p >= MAX_MODULUS:
        raise ValueError("modulus must be a prime below 2^31")
    a = np.mod(np.array(a, dtype=np.int64, copy=True), p)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    nc = a.shape[1] if ncols is None else ncols
    if a.shape[0] == 0 or a.shape[1] == 0:
        return a[:0], []
    if resolve_backend(backend) == "numba":
        r, piv = _rref_numba(a, p, nc)
        return r, [int(x) for x in piv]
    return _rref_numpy(a, p, nc)


def solve_mod_p(a: np.ndarray, b: np.ndarray, p: int, backend: str = "auto") -> np.ndarray | None:
    """Some x with a x = b over F_p (free variables set to 0), or None."""
    a = np.asarray(a, dtype=np.int64)
    rows, cols = a.shape if a.ndim == 2 else (len(b), 0)
    aug = np.zeros((rows, cols + 1), dtype=np.int64)
    if cols:
        aug[:, :cols] = a
    aug[:, cols] = np.asarray(b, dtype=np.int64)
    r, piv = rref_mod_p(aug, p, ncols=cols, backend=backend)
    if r.shape[0] and np.any(r[len(piv):, cols] % p):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, j in enumerate(piv):
        x[j] = r[i, cols]
    if rows and np.any(np.mod(a @ x - aug[:, cols], p)):
        return None
    return x


def nullspace_mod_p(a: np.ndarray, p: int, backend: str = "auto") -> np.ndarray:
    """Basis (as rows) of {x : a x = 0} over F_p."""
    a = np.asarray(a, dtype=np.int64)
    cols = a.shape[1]
    r, piv = rref_mod_p(a, p, backend=backend)
    free = [j for j in range(cols) if j not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, j in enumerate(free):
        basis[k, j] = 1
        for i, pj in enumerate(piv):
            basis[k, pj] = (-r[i, j]) % p
    return basis
