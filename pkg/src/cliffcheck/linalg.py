"""Dense linear algebra over F_p on integer numpy arrays."""

from __future__ import annotations

import numpy as np


def inverse_table(p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, -1, p)
    return inv


def rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form of ``a`` mod p and its pivot columns."""
    m = np.array(a, dtype=np.int64) % p
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        others = m[:, c].copy()
        others[r] = 0
        m = (m - np.outer(others, m[r])) % p
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(a: np.ndarray, p: int) -> int:
    return len(rref(a, p)[1])


def reduce_rows(vectors: np.ndarray, basis: np.ndarray, pivots: list[int], p: int) -> np.ndarray:
    """Remainders of ``vectors`` (last axis) after elimination by an RREF basis."""
    out = np.array(vectors, dtype=np.int64) % p
    for row, c in zip(basis, pivots):
        out = (out - out[..., c:c + 1] * row) % p
    return out


def batched_rref(a: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """RREF of a stack of matrices (B, k, N) mod p.

    Returns the reduced stack and a (B, N) boolean mask of pivot columns.
    Rows are not compacted: zero rows sink to the bottom of each matrix.
    """
    m = np.array(a, dtype=np.int64) % p
    bsz, rows, cols = m.shape
    inv = inverse_table(p)
    r = np.zeros(bsz, dtype=np.int64)
    ar = np.arange(bsz)
    pivot_mask = np.zeros((bsz, cols), dtype=bool)
    row_ids = np.arange(rows)
    for c in range(cols):
        col = m[:, :, c]
        cand = (col != 0) & (row_ids[None, :] >= r[:, None])
        has = cand.any(axis=1) & (r < rows)
        if not has.any():
            continue
        k = np.argmax(cand, axis=1)
        idx = ar[has]
        rr, kk = r[has], k[has]
        row_k = m[idx, kk].copy()
        m[idx, kk] = m[idx, rr]
        row_k = (row_k * inv[row_k[:, c]][:, None]) % p
        m[idx, rr] = row_k
        factors = m[idx, :, c].copy()
        factors[np.arange(idx.size), rr] = 0
        m[idx] = (m[idx] - factors[:, :, None] * row_k[:, None, :]) % p
        pivot_mask[idx, c] = True
        r[has] += 1
    return m, pivot_mask
