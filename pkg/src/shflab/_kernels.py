"""Index tables and hot numeric kernels for exterior algebra on R^6.

Every kernel exists twice: a pure-numpy version and a numba ``@njit``
version with the same signature.  The numba path is used when numba
imports cleanly and ``SHFLAB_DISABLE_NUMBA`` is unset (or ``0``); set
``SHFLAB_DISABLE_NUMBA=1`` to force the numpy path.
"""

from __future__ import annotations

import os
from itertools import combinations

import numpy as np

DIM = 6

# COMBOS[k] lists strictly increasing 0-based index tuples in lexicographic order.
COMBOS: list[list[tuple[int, ...]]] = [list(combinations(range(DIM), k)) for k in range(DIM + 1)]
POSITION: list[dict[tuple[int, ...], int]] = [
    {idx: n for n, idx in enumerate(c)} for c in COMBOS
]
SIZES = tuple(len(c) for c in COMBOS)
COMBO_ARRAYS = [np.array(c, dtype=np.int64).reshape(len(c), k) for k, c in enumerate(COMBOS)]


def mask_of(idx: tuple[int, ...]) -> int:
    m = 0
    for i in idx:
        m |= 1 << i
    return m


def _inversions(seq) -> int:
    n = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                n += 1
    return n


def merge_sign(left: tuple[int, ...], right: tuple[int, ...]) -> int:
    """Sign of e^left ^ e^right relative to the sorted monomial (0 if they overlap)."""
    if mask_of(left) & mask_of(right):
        return 0
    return -1 if _inversions(left + right) % 2 else 1


def _build_wedge_table(p: int, q: int):
    rows = []
    for ia, a in enumerate(COMBOS[p]):
        ma = mask_of(a)
        for ib, b in enumerate(COMBOS[q]):
            if ma & mask_of(b):
                continue
            out = tuple(sorted(a + b))
            rows.append((ia, ib, POSITION[p + q][out], merge_sign(a, b)))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    return arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), arr[:, 3].astype(np.float64)


WEDGE_TABLES = {
    (p, q): _build_wedge_table(p, q) for p in range(DIM + 1) for q in range(DIM + 1 - p)
}


def _build_contract_table(k: int):
    # iota_v e^I = sum_r (-1)^r v^{i_r} e^{I minus i_r}
    rows = []
    for ia, a in enumerate(COMBOS[k]):
        for r, i in enumerate(a):
            rest = a[:r] + a[r + 1:]
            rows.append((ia, i, POSITION[k - 1][rest], -1 if r % 2 else 1))
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    return arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), arr[:, 3].astype(np.float64)


CONTRACT_TABLES = {k: _build_contract_table(k) for k in range(1, DIM + 1)}


def _build_hitchin_table():
    # (iota_{e_v} e^I ^ e^J) ^ e^u = sign * e^{123456}; records (v, I, J, u, sign).
    rows = []
    full = tuple(range(DIM))
    for v in range(DIM):
        for ia, a in enumerate(COMBOS[3]):
            if v not in a:
                continue
            r = a.index(v)
            rest = a[:r] + a[r + 1:]
            s_contract = -1 if r % 2 else 1
            for ib, b in enumerate(COMBOS[3]):
                if mask_of(rest) & mask_of(b):
                    continue
                five = rest + b
                (u,) = tuple(set(full) - set(five))
                s = merge_sign(five, (u,))
                rows.append((v, ia, ib, u, s_contract * s))
    arr = np.array(rows, dtype=np.int64)
    return (arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), arr[:, 3].copy(),
            arr[:, 4].astype(np.float64))


HITCHIN_TABLE = _build_hitchin_table()


def _build_top_pairing(k: int) -> np.ndarray:
    """W[I, K] = coefficient of e^{123456} in e^I ^ e^K, K of degree 6-k."""
    W = np.zeros((SIZES[k], SIZES[DIM - k]))
    for i, a in enumerate(COMBOS[k]):
        for j, b in enumerate(COMBOS[DIM - k]):
            W[i, j] = merge_sign(a, b)
    return W


TOP_PAIRING = [_build_top_pairing(k) for k in range(DIM + 1)]


def _build_derivation_table(k: int):
    # Replacing slot r of e^I by e^j: e^{i_0..j..i_{k-1}} = sign * e^{sorted}.
    rows = []
    for ia, a in enumerate(COMBOS[k]):
        for r in range(k):
            for j in range(DIM):
                new = a[:r] + (j,) + a[r + 1:]
                if len(set(new)) < k:
                    continue
                srt = tuple(sorted(new))
                rows.append((ia, a[r], j, POSITION[k][srt], -1 if _inversions(new) % 2 else 1))
    if not rows:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z, z, np.zeros(0)
    arr = np.array(rows, dtype=np.int64)
    return (arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), arr[:, 3].copy(),
            arr[:, 4].astype(np.float64))


DERIVATION_TABLES = {k: _build_derivation_table(k) for k in range(DIM + 1)}


# --------------------------------------------------------------------------
# numpy kernels

def wedge_np(a, b, ia, ib, iout, sign, n_out):
    out = np.zeros(n_out)
    np.add.at(out, iout, sign * a[ia] * b[ib])
    return out


def contract_np(v, a, ia, iv, iout, sign, n_out):
    out = np.zeros(n_out)
    np.add.at(out, iout, sign * v[iv] * a[ia])
    return out


def compound_np(E, rows, cols):
    k = rows.shape[1]
    if k == 0:
        return np.ones((1, 1))
    sub = E[rows[:, None, :, None], cols[None, :, None, :]]
    return np.linalg.det(sub)


def hitchin_np(phi, tv, ta, tb, tu, ts):
    # S[u, v] collects beta_v ^ e^u over the table.
    S = np.zeros((DIM, DIM))
    np.add.at(S, (tu, tv), ts * phi[ta] * phi[tb])
    return S


def derivation_np(S, ia, islot, jnew, iout, sign, n):
    # column ia of the returned matrix is sum_r e^{..(S^* e^{i_r})..}
    M = np.zeros((n, n))
    np.add.at(M, (iout, ia), sign * S[islot, jnew])
    return M


# --------------------------------------------------------------------------
# numba kernels

def _make_numba_kernels():
    from numba import njit

    @njit(cache=True, nogil=True)
    def wedge_nb(a, b, ia, ib, iout, sign, n_out):
        out = np.zeros(n_out)
        for t in range(ia.shape[0]):
            out[iout[t]] += sign[t] * a[ia[t]] * b[ib[t]]
        return out

    @njit(cache=True, nogil=True)
    def contract_nb(v, a, ia, iv, iout, sign, n_out):
        out = np.zeros(n_out)
        for t in range(ia.shape[0]):
            out[iout[t]] += sign[t] * v[iv[t]] * a[ia[t]]
        return out

    @njit(cache=True, nogil=True)
    def _det(M):
        # Gaussian elimination with partial pivoting on a small copy.
        n = M.shape[0]
        A = M.copy()
        det = 1.0
        for c in range(n):
            p = c
            big = abs(A[c, c])
            for r in range(c + 1, n):
                if abs(A[r, c]) > big:
                    big = abs(A[r, c])
                    p = r
            if big == 0.0:
                return 0.0
            if p != c:
                for j in range(n):
                    tmp = A[c, j]
                    A[c, j] = A[p, j]
                    A[p, j] = tmp
                det = -det
            det *= A[c, c]
            for r in range(c + 1, n):
                f = A[r, c] / A[c, c]
                for j in range(c, n):
                    A[r, j] -= f * A[c, j]
        return det

    @njit(cache=True, nogil=True)
    def compound_nb(E, rows, cols):
        k = rows.shape[1]
        n = rows.shape[0]
        out = np.ones((n, cols.shape[0]))
        if k == 0:
            return out
        sub = np.empty((k, k))
        for I in range(n):
            for J in range(cols.shape[0]):
                for r in range(k):
                    for s in range(k):
                        sub[r, s] = E[rows[I, r], cols[J, s]]
                out[I, J] = _det(sub)
        return out

    @njit(cache=True, nogil=True)
    def hitchin_nb(phi, tv, ta, tb, tu, ts):
        S = np.zeros((6, 6))
        for t in range(tv.shape[0]):
            S[tu[t], tv[t]] += ts[t] * phi[ta[t]] * phi[tb[t]]
        return S

    @njit(cache=True, nogil=True)
    def derivation_nb(S, ia, islot, jnew, iout, sign, n):
        M = np.zeros((n, n))
        for t in range(ia.shape[0]):
            M[iout[t], ia[t]] += sign[t] * S[islot[t], jnew[t]]
        return M

    return wedge_nb, contract_nb, compound_nb, hitchin_nb, derivation_nb


def _numba_requested() -> bool:
    return os.environ.get("SHFLAB_DISABLE_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


USING_NUMBA = False
wedge_kernel = wedge_np
contract_kernel = contract_np
compound_kernel = compound_np
hitchin_kernel = hitchin_np
derivation_kernel = derivation_np

if _numba_requested():
    try:
        (wedge_kernel, contract_kernel, compound_kernel,
         hitchin_kernel, derivation_kernel) = _make_numba_kernels()
        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is optional
        pass


def backend() -> str:
    return "numba" if USING_NUMBA else "numpy"


def compound(E: np.ndarray, k: int) -> np.ndarray:
    """k-th compound matrix: entry (I, J) is the minor det E[I, J]."""
    return compound_kernel(np.ascontiguousarray(E, dtype=np.float64), COMBO_ARRAYS[k], COMBO_ARRAYS[k])
