"""Dense complex matrix kernel.

Every other module is written against these functions.  Matrices are plain
``numpy.ndarray`` objects of dtype ``complex128``; there is no wrapper class.
The inner product is linear in the first slot, ``<x, y> = y^* x``.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import BadMatrix, NoConvergence, NotHermitian, NotPSD, Singular

ABS_FLOOR = 1e-14

__all__ = [
    "ABS_FLOOR", "HermEigen", "adjoint", "as_matrix", "cond", "general_eig",
    "haar_unitary", "herm_eig", "inner", "inverse", "is_hermitian",
    "matrix_from_json", "matrix_to_json", "op_norm", "psd_sqrt",
    "random_invertible", "rel_tol", "sort_spectrum",
]


class HermEigen(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def rel_tol(rel: float, scale: float) -> float:
    """Tolerance ``rel * scale`` with the package-wide absolute floor."""
    return max(rel * scale, ABS_FLOOR)


def as_matrix(M, square: bool = True) -> np.ndarray:
    """Coerce ``M`` to a finite 2-D complex array."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        raise BadMatrix(f"expected a 2-D matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise BadMatrix(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise BadMatrix("matrix has non-finite entries")
    return A


def adjoint(M: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(M)).T.copy()


def inner(x: np.ndarray, y: np.ndarray) -> complex:
    """``<x, y>``, linear in ``x`` and conjugate-linear in ``y``."""
    return complex(np.vdot(y, x))


def op_norm(M: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def is_hermitian(H: np.ndarray, rtol: float = 1e-10) -> bool:
    return op_norm(H - adjoint(H)) <= rel_tol(rtol, op_norm(H))


def herm_eig(H: np.ndarray) -> HermEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized as ``(H + H^*)/2`` first so that matrices which
    are Hermitian only up to roundoff are accepted.

    Raises:
        NotHermitian: if ``||H - H^*|| > 1e-10 ||H||``.
    """
    H = np.asarray(H, dtype=np.complex128)
    if not is_hermitian(H):
        raise NotHermitian(
            f"||H - H*|| = {op_norm(H - adjoint(H)):.3e} exceeds 1e-10 ||H||")
    Hs = 0.5 * (H + adjoint(H))
    try:
        w, U = np.linalg.eigh(Hs)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return HermEigen(w, U)


def sort_spectrum(ev: np.ndarray) -> np.ndarray:
    """Sort complex eigenvalues by real part, then imaginary part."""
    ev = np.asarray(ev, dtype=np.complex128)
    return ev[np.lexsort((ev.imag, ev.real))]


def general_eig(M: np.ndarray) -> np.ndarray:
    """All eigenvalues of ``M`` with algebraic multiplicity, sorted."""
    M = np.asarray(M, dtype=np.complex128)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return sort_spectrum(ev)


def psd_sqrt(H: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues with ``|w| <= 1e-10 ||H||`` are clamped to zero, so roundoff
    around a rank deficiency does not turn into O(sqrt(eps)) noise in the
    root; anything more negative raises :class:`NotPSD`.
    """
    w, U = herm_eig(H)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    cut = rel_tol(1e-10, scale)
    if w.size and w[0] < -cut:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is below -1e-10 ||H||")
    r = np.sqrt(np.where(w <= cut, 0.0, w))
    S = (U * r) @ adjoint(U)
    return 0.5 * (S + adjoint(S))


def inverse(M: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse of ``M`` together with its 2-norm condition number.

    Raises:
        Singular: if the smallest singular value is below ``1e-14 ||M||``.
    """
    M = np.asarray(M, dtype=np.complex128)
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0 or s[-1] < 1e-14 * s[0]:
        raise Singular("matrix is numerically singular")
    return np.linalg.inv(M), float(s[0] / s[-1])


def cond(M: np.ndarray) -> float:
    s = np.linalg.svd(np.asarray(M, dtype=np.complex128), compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else math.inf


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary (QR of a Ginibre matrix, phases fixed)."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_invertible(seed: int, n: int, kappa: float) -> np.ndarray:
    """Random ``U1 diag(s) U2^*`` with singular values log-uniform in ``[1, kappa]``."""
    if not kappa >= 1.0:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    rng = np.random.default_rng(seed)
    U1 = haar_unitary(rng, n)
    U2 = haar_unitary(rng, n)
    s = np.exp(rng.uniform(0.0, math.log(kappa), size=n)) if kappa > 1.0 else np.ones(n)
    return (U1 * s) @ adjoint(U2)


def _reject_constant(name: str):
    raise BadMatrix(f"non-finite number {name!r} in matrix payload")


def matrix_to_json(M: np.ndarray) -> dict:
    M = as_matrix(M, square=False)
    rows, cols = M.shape
    data = [[float(z.real), float(z.imag)] for z in M.ravel()]
    return {"rows": rows, "cols": cols, "data": data}


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"rows", "cols", "data": [[re, im], ...]}`` (row-major)."""
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise BadMatrix(f"malformed matrix object: {exc}") from exc
    if rows < 0 or cols < 0 or len(data) != rows * cols:
        raise BadMatrix(f"rows*cols = {rows * cols} but {len(data)} entries given")
    try:
        arr = np.array(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise BadMatrix(f"matrix entries must be [re, im] pairs: {exc}") from exc
    if arr.size and arr.shape != (rows * cols, 2):
        raise BadMatrix("matrix entries must be [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise BadMatrix("matrix has non-finite entries")
    if arr.size == 0:
        return np.zeros((rows, cols), dtype=np.complex128)
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)
