"""Residual-scan kernels with a numba path and a pure-numpy fallback.

The numba versions are used when numba imports cleanly and the environment
variable ``NSRES_DISABLE_NUMBA`` is unset (or ``0``).  Both paths compute the
same quantities; ``tests/test_kernels.py`` checks that they agree.

All residuals are Frobenius norms, which bound the spectral norm from above.
"""
from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("NSRES_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _flag not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("disabled by NSRES_DISABLE_NUMBA")
    import numba as _nb
    NUMBA_AVAILABLE = True
except ImportError:
    _nb = None
    NUMBA_AVAILABLE = False

BACKEND = "numba" if NUMBA_AVAILABLE else "numpy"


def _frob(A: np.ndarray, axes=(-2, -1)) -> np.ndarray:
    return np.sqrt(np.sum(A.real ** 2 + A.imag ** 2, axis=axes))


# ---------------------------------------------------------------- numpy path

def pair_product_residuals_np(A: np.ndarray, target: np.ndarray) -> np.ndarray:
    m = A.shape[0]
    out = np.zeros((m, m))
    for j in range(m):
        prod = A[j] @ A
        tgt = np.where((target[j] >= 0)[:, None, None], A[np.maximum(target[j], 0)], 0.0)
        out[j] = _frob(prod - tgt)
    return out


def f_pair_residuals_np(P: np.ndarray, F: np.ndarray):
    """f1/f2 residuals for every pair j <= k (zeros elsewhere)."""
    m = P.shape[0]
    r1 = np.zeros((m, m))
    r2a = np.zeros((m, m))
    r2b = np.zeros((m, m))
    PH = np.conj(np.swapaxes(P, -1, -2))
    for j in range(m):
        ks = np.arange(j, m)
        Fj = F[j]
        r1[j, ks] = _frob(PH[ks] @ Fj @ P[ks] - Fj)
        r2a[j, ks] = _frob(PH[ks] @ Fj - Fj)
        r2b[j, ks] = _frob(Fj @ P[ks] - Fj)
    return r1, r2a, r2b


def three_case_residuals_np(P0: np.ndarray, F0: np.ndarray) -> np.ndarray:
    """Residual of the three-case identity for index triples (i < j, l).

    ``P0``/``F0`` carry the zero operator at index 0.  Entry ``[i, j, l]`` is
    zero whenever ``i >= j``.
    """
    m1 = P0.shape[0]
    out = np.zeros((m1, m1, m1))
    for i in range(m1):
        for j in range(i + 1, m1):
            D = P0[j] - P0[i]
            DH = np.conj(D.T)
            lhs = DH @ F0 @ D
            Q = P0 - P0[i]
            QH = np.conj(np.swapaxes(Q, -1, -2))
            rhs = QH @ Q
            rhs[: i + 1] = 0.0
            rhs[j:] = DH @ D
            out[i, j] = _frob(lhs - rhs)
    return out


def cross_term_gap_np(V: np.ndarray, W: np.ndarray, lam: np.ndarray) -> float:
    """Expansion of ``||B xi||^2 - sum lam_k^2 d<F xi, xi>`` from the vectors.

    ``V[k] = D_k xi`` and ``W[k] = X_k xi`` (with ``W[-1]`` meaning ``X_0 xi = 0``
    handled by the caller prepending a zero row, so ``W`` has ``m + 1`` rows).
    """
    G = V.conj() @ V.T  # G[j, k] = <V_k, V_j>
    LL = np.outer(lam, lam)
    off = LL * G
    cross = np.sum(off) - np.trace(off)
    nW = np.sum(np.abs(W) ** 2, axis=1)
    nV = np.sum(np.abs(V) ** 2, axis=1)
    diag = np.sum(lam ** 2 * (nW[1:] - nW[:-1] - nV))
    return float(cross.real - diag)


# ---------------------------------------------------------------- numba path

if NUMBA_AVAILABLE:
    _jit = _nb.njit(cache=True)

    @_jit
    def _frob2(A):
        s = 0.0
        for a in A.ravel():
            s += a.real * a.real + a.imag * a.imag
        return np.sqrt(s)

    @_jit
    def pair_product_residuals_nb(A, target):
        m = A.shape[0]
        out = np.zeros((m, m))
        for j in range(m):
            for k in range(m):
                r = np.dot(A[j], A[k])
                t = target[j, k]
                if t >= 0:
                    r = r - A[t]
                out[j, k] = _frob2(r)
        return out

    @_jit
    def f_pair_residuals_nb(P, F):
        m = P.shape[0]
        r1 = np.zeros((m, m))
        r2a = np.zeros((m, m))
        r2b = np.zeros((m, m))
        for j in range(m):
            Fj = F[j]
            for k in range(j, m):
                Pk = P[k]
                PkH = np.ascontiguousarray(np.conj(Pk).T)
                left = np.dot(PkH, Fj)
                r1[j, k] = _frob2(np.dot(left, Pk) - Fj)
                r2a[j, k] = _frob2(left - Fj)
                r2b[j, k] = _frob2(np.dot(Fj, Pk) - Fj)
        return r1, r2a, r2b

    @_jit
    def three_case_residuals_nb(P0, F0):
        m1 = P0.shape[0]
        out = np.zeros((m1, m1, m1))
        for i in range(m1):
            for j in range(i + 1, m1):
                D = P0[j] - P0[i]
                DH = np.ascontiguousarray(np.conj(D).T)
                full = np.dot(DH, D)
                for l in range(m1):
                    lhs = np.dot(np.dot(DH, F0[l]), D)
                    if l <= i:
                        out[i, j, l] = _frob2(lhs)
                    elif l < j:
                        Q = P0[l] - P0[i]
                        QH = np.ascontiguousarray(np.conj(Q).T)
                        out[i, j, l] = _frob2(lhs - np.dot(QH, Q))
                    else:
                        out[i, j, l] = _frob2(lhs - full)
        return out

    @_jit
    def cross_term_gap_nb(V, W, lam):
        m = V.shape[0]
        cross = 0.0
        for j in range(m):
            for k in range(m):
                if j != k:
                    cross += lam[j] * lam[k] * np.vdot(V[j], V[k]).real
        diag = 0.0
        for k in range(m):
            nk = np.vdot(W[k + 1], W[k + 1]).real
            nk1 = np.vdot(W[k], W[k]).real
            nv = np.vdot(V[k], V[k]).real
            diag += lam[k] * lam[k] * (nk - nk1 - nv)
        return cross - diag

    pair_product_residuals = pair_product_residuals_nb
    f_pair_residuals = f_pair_residuals_nb
    three_case_residuals = three_case_residuals_nb
    cross_term_gap = cross_term_gap_nb
else:
    pair_product_residuals = pair_product_residuals_np
    f_pair_residuals = f_pair_residuals_np
    three_case_residuals = three_case_residuals_np
    cross_term_gap = cross_term_gap_np


def as_kernel_input(A: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(A, dtype=np.complex128)
