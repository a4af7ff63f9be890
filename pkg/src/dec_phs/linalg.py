"""Small dense elimination helpers used for rank and kernel computations.

Incidence-type matrices stay integral under Gauss-Jordan elimination with
unit pivots, so kernels of the discrete derivatives come out exact in
floating point.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

PIVOT_TOL = 1e-10


def _dense(a) -> np.ndarray:
    if sp.issparse(a):
        a = a.toarray()
    return np.array(a, dtype=float, copy=True)


def rref(a, tol: float = PIVOT_TOL) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with partial pivoting.

    Returns the reduced matrix and the list of pivot columns.
    """
    m = _dense(a)
    rows, cols = m.shape
    scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        i = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[i, c]) <= tol * scale:
            m[r:, c] = 0.0
            continue
        if i != r:
            m[[r, i]] = m[[i, r]]
        m[r] /= m[r, c]
        col = m[:, c].copy()
        col[r] = 0.0
        nz = np.nonzero(col)[0]
        if nz.size:
            m[nz] -= np.outer(col[nz], m[r])
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a, tol: float = PIVOT_TOL) -> int:
    return len(rref(a, tol)[1])


def sign_fix(basis: np.ndarray) -> np.ndarray:
    """Flip each column so its first nonzero entry is positive."""
    out = basis.copy()
    for j in range(out.shape[1]):
        nz = np.nonzero(np.abs(out[:, j]) > 1e-14)[0]
        if nz.size and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def nullspace(a, tol: float = PIVOT_TOL) -> np.ndarray:
    """Kernel basis as columns, one per free variable of the reduced form.

    The basis is deterministic and sign-fixed; it is not orthonormalized
    (see ``orthonormalize``) so integer kernels stay integer.
    """
    m, pivots = rref(a, tol)
    ncols = m.shape[1]
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((ncols, len(free)))
    for j, f in enumerate(free):
        basis[f, j] = 1.0
        for r, pc in enumerate(pivots):
            basis[pc, j] = -m[r, f]
    return sign_fix(basis)


def orthonormalize(basis: np.ndarray) -> np.ndarray:
    if basis.shape[1] == 0:
        return basis.copy()
    q, _ = np.linalg.qr(basis)
    return sign_fix(q)


def same_span(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """True when the column spans of ``a`` and ``b`` coincide."""
    if a.shape[1] != b.shape[1]:
        return False
    if a.shape[1] == 0:
        return True
    ra = np.linalg.matrix_rank(a, tol)
    return ra == a.shape[1] and np.linalg.matrix_rank(np.hstack([a, b]), tol) == ra
