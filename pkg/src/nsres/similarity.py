"""Similarity to self-adjoint resolutions, spectra comparison and dilation.

In finite dimensions the metric ``G = sum_k D_k^* D_k`` is positive definite
for any resolution of the identity, it satisfies ``G D_k = D_k^* G`` and
``T = G^{-1/2}`` turns the increments into orthogonal projections
``E_k = T^{-1} D_k T``.  This is the constructive counterpart of Mackey's
similarity theorem used throughout the harness.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .errors import DimensionMismatch, NegativeJump, NotDefinite, NotMonotone
from .linalg import (adjoint, as_matrix, general_eig, herm_eig, inverse, matrix_to_json,
                     op_norm, psd_sqrt, rel_tol)
from .operators import build_B
from .resolution import GeneralizedStepResolution, StepResolution, from_similarity

__all__ = [
    "NaimarkDilation", "SimilarityModel", "SpectraMatch", "Verdict", "intertwines",
    "metric_from_resolution", "naimark_dilate", "orthogonalize", "pseudo_sqrt",
    "spectra_compare", "theorem319_roundtrip",
]


@dataclass(frozen=True)
class SimilarityModel:
    T: np.ndarray
    T_inv: np.ndarray
    E_increments: np.ndarray
    jumps: np.ndarray
    G: np.ndarray
    kappa: float

    def A(self) -> np.ndarray:
        """Self-adjoint operator ``sum lam_k E_k``."""
        A = np.einsum("k,kij->ij", self.jumps.astype(np.complex128), self.E_increments)
        return 0.5 * (A + adjoint(A))

    def reconstruction_residual(self, X: StepResolution) -> float:
        """``max_k ||X_k - T (E_1 + ... + E_k) T^{-1}||``."""
        EP = np.cumsum(self.E_increments, axis=0)
        return max(op_norm(Xk - self.T @ Ek @ self.T_inv) for Xk, Ek in zip(X.partials, EP))

    def projection_residual(self) -> float:
        """Worst deviation of the E_k from an orthogonal resolution of I."""
        E = _kernels.as_kernel_input(self.E_increments)
        m, n = E.shape[0], E.shape[1]
        EH = np.conj(np.swapaxes(E, -1, -2))
        # pair products use the Frobenius norm, an upper bound on the spectral one
        target = np.where(np.eye(m, dtype=bool), np.arange(m)[:, None], -1)
        pairs = _kernels.pair_product_residuals(E, target)
        return max(op_norm(E.sum(axis=0) - np.eye(n)),
                   float(np.linalg.norm(E - EH, ord=2, axis=(-2, -1)).max()),
                   float(pairs.max()))

    def metric_residual(self, X: StepResolution) -> float:
        return max(op_norm(self.G @ D - adjoint(D) @ self.G) for D in X.increments)

    def to_json(self) -> dict:
        return {
            "T": matrix_to_json(self.T),
            "G": matrix_to_json(self.G),
            "jumps": [float(x) for x in self.jumps],
            "E_increments": [matrix_to_json(E) for E in self.E_increments],
        }


def metric_from_resolution(X: StepResolution) -> np.ndarray:
    """``G = sum_k D_k^* D_k`` (Hermitian positive definite)."""
    D = X.increments
    G = np.einsum("kji,kjl->il", D.conj(), D)
    G = 0.5 * (G + adjoint(G))
    w = np.linalg.eigvalsh(G)
    if w[0] <= 1e-12 * max(w[-1], 0.0) or w[-1] <= 0.0:
        raise NotDefinite(f"metric has eigenvalue {w[0]:.3e}; the family is not a resolution of I")
    return G


def orthogonalize(X: StepResolution) -> SimilarityModel:
    """Recover ``T = G^{-1/2}`` and orthogonal increments with ``D_k = T E_k T^{-1}``."""
    G = metric_from_resolution(X)
    Gh = psd_sqrt(G)
    T, kappa = inverse(Gh)
    E = Gh @ X.increments @ T
    return SimilarityModel(T=T, T_inv=Gh, E_increments=E, jumps=X.jumps.copy(), G=G, kappa=kappa)


def intertwines(T, A, B, tol: float = 1e-10) -> bool:
    """Whether ``B T = T A`` relative to ``||B|| ||T|| + ||T|| ||A||``."""
    T, A, B = (np.asarray(M, dtype=np.complex128) for M in (T, A, B))
    if not (T.ndim == A.ndim == B.ndim == 2) or not (T.shape == A.shape == B.shape) \
            or T.shape[0] != T.shape[1]:
        raise DimensionMismatch(f"shapes {T.shape}, {A.shape}, {B.shape}")
    nT = op_norm(T)
    scale = op_norm(B) * nT + nT * op_norm(A)
    return op_norm(B @ T - T @ A) <= rel_tol(tol, scale)


@dataclass
class SpectraMatch:
    pairs: list
    max_distance: float
    clusters: list = field(default_factory=list)
    multiplicity_agree: bool = True
    contains: bool = True

    def to_json(self) -> dict:
        return {
            "max_distance": self.max_distance,
            "multiplicity_agree": self.multiplicity_agree,
            "contains": self.contains,
            "clusters": [{"center": [c.real, c.imag], "m_A": a, "m_B": b}
                         for c, a, b in self.clusters],
        }


def _clusters(ev: np.ndarray, radius: float) -> list:
    centers: list = []
    for z in ev:
        for c in centers:
            if abs(z - c[0]) <= radius:
                c[1] += 1
                break
        else:
            centers.append([z, 1])
    return centers


def spectra_compare(A, B, radius: float = 1e-7) -> SpectraMatch:
    """Optimally pair the eigenvalues of ``A`` and ``B`` and compare multiplicities.

    Pairing minimizes the summed distance (Hungarian algorithm).  Eigenvalues
    of ``A`` are clustered with radius ``radius * max(1, spectral radius)``; for
    each cluster the number of eigenvalues of ``B`` within the same radius is
    reported.  ``contains`` is the point-spectrum inclusion with multiplicity
    (``m_A <= m_B`` on every cluster of ``A``).
    """
    a, b = general_eig(A), general_eig(B)
    if a.size != b.size:
        raise DimensionMismatch(f"{a.size} vs {b.size} eigenvalues")
    if a.size == 0:
        return SpectraMatch([], 0.0)
    cost = np.abs(a[:, None] - b[None, :])
    ri, ci = linear_sum_assignment(cost)
    pairs = [(complex(a[i]), complex(b[j])) for i, j in zip(ri, ci)]
    dmax = float(cost[ri, ci].max())
    rad = radius * max(1.0, float(np.max(np.abs(np.concatenate([a, b])))))
    clusters = []
    for c, mA in _clusters(a, rad):
        mB = int(np.sum(np.abs(b - c) <= rad))
        clusters.append((complex(c), int(mA), mB))
    agree = all(mA == mB for _, mA, mB in clusters) and \
        sum(mB for _, _, mB in clusters) == b.size
    contains = all(mA <= mB for _, mA, mB in clusters)
    return SpectraMatch(pairs, dmax, clusters, agree, contains)


@dataclass(frozen=True)
class Verdict:
    claim_id: str
    residual: float
    bound: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"claim_id": self.claim_id, "residual": self.residual,
                "bound": self.bound, "pass": self.passed, **self.details}


def theorem319_roundtrip(E_increments, jumps, T, rel: float = 1e-10,
                         spectrum_tol: float = 1e-8) -> Verdict:
    """``B = sum lam_k T E_k T^{-1}`` equals ``T A T^{-1}`` with ``A = sum lam_k E_k``.

    Also orthogonalizes the generated family and checks that the recovered
    self-adjoint ``A'`` has the spectrum of ``B``.
    """
    T = as_matrix(T)
    X = from_similarity(E_increments, jumps, T)
    B = build_B(X)
    E = np.asarray(E_increments, dtype=np.complex128)
    lam = np.asarray(jumps, dtype=np.float64)
    A = np.einsum("k,kij->ij", lam.astype(np.complex128), E)
    Tinv, kappa = inverse(T)
    residual = op_norm(B - T @ A @ Tinv)
    lam_max = float(np.max(np.abs(lam))) if lam.size else 0.0
    bound = rel_tol(rel, kappa * lam_max)
    model = orthogonalize(X)
    match = spectra_compare(model.A(), B)
    ranks = [int(round(np.trace(Ek).real)) for Ek in E]
    scale = max(1.0, lam_max)
    passed = residual <= bound and match.max_distance <= spectrum_tol * scale \
        and match.multiplicity_agree
    return Verdict("thm319", residual, bound, passed, {
        "kappa": kappa,
        "spectrum_distance": match.max_distance,
        "multiplicity_agree": match.multiplicity_agree,
        "ranks": ranks,
        "reconstruction": model.reconstruction_residual(X),
    })


def pseudo_sqrt(X: StepResolution) -> np.ndarray:
    """Square root ``B_2 = T A^{1/2} T^{-1}`` of ``B = sum lam_k D_k`` for jumps >= 0."""
    if np.any(X.jumps < -1e-12):
        raise NegativeJump(f"smallest jump {X.jumps.min():.3e} is negative")
    model = orthogonalize(X)
    lam = np.clip(model.jumps, 0.0, None)
    A = np.einsum("k,kij->ij", lam.astype(np.complex128), model.E_increments)
    return model.T @ psd_sqrt(0.5 * (A + adjoint(A))) @ model.T_inv


@dataclass(frozen=True)
class NaimarkDilation:
    """Isometry ``V`` with ``V^* E_k V = dF_k`` for block projections ``E_k``."""

    V: np.ndarray
    blocks: tuple
    jumps: np.ndarray

    @property
    def big_dim(self) -> int:
        return self.V.shape[0]

    def block_projection(self, k: int) -> np.ndarray:
        s = self.blocks[k]
        E = np.zeros((self.big_dim, self.big_dim), dtype=np.complex128)
        idx = np.arange(s.start, s.stop)
        E[idx, idx] = 1.0
        return E

    def compress(self, k: int) -> np.ndarray:
        """``V^* (E_1 + ... + E_k) V``, the dilated family compressed at jump k."""
        rows = slice(0, self.blocks[k].stop)
        return adjoint(self.V[rows]) @ self.V[rows]

    def dilated_resolution(self) -> StepResolution:
        """Orthogonal block resolution on the big space (empty blocks dropped)."""
        keep = [k for k, s in enumerate(self.blocks) if s.stop > s.start]
        return StepResolution(self.jumps[keep], [self.block_projection(k) for k in keep])

    def isometry_residual(self) -> float:
        return op_norm(adjoint(self.V) @ self.V - np.eye(self.V.shape[1]))


def naimark_dilate(GF: GeneralizedStepResolution, psd_tol: float = 1e-10) -> NaimarkDilation:
    """Dilate a POVM step family to orthogonal block projections.

    Block ``k`` is ``diag(sqrt(w)) U^*`` restricted to the positive eigenvalues
    ``w`` of ``dF_k``, so the big space has dimension ``sum rank(dF_k)``.
    """
    blocks_mats = []
    for k, Dk in enumerate(GF.increments):
        w, U = herm_eig(Dk)
        if w[0] < -psd_tol:
            raise NotMonotone(f"increment {k} has eigenvalue {w[0]:.3e}")
        keep = w > rel_tol(1e-12, max(float(w[-1]), 0.0))
        blocks_mats.append(np.sqrt(w[keep])[:, None] * adjoint(U[:, keep]))
    slices, start = [], 0
    for C in blocks_mats:
        slices.append(slice(start, start + C.shape[0]))
        start += C.shape[0]
    V = np.vstack(blocks_mats)
    return NaimarkDilation(V, tuple(slices), GF.jumps.copy())
