"""Finite-jump resolutions of the identity.

A :class:`StepResolution` is a right-continuous step family

    X(lam) = sum_{k : lam_k <= lam} D_k

built from idempotent increments ``D_k`` that annihilate each other and sum to
the identity.  The increments need not be self-adjoint.  Constructors, the
axiom checks and the Gram families ``F = X^* X`` and ``Phi = F^{1/2}`` live
here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import BadResolution, BadSpectralFamily, ComplexAlpha
from .linalg import adjoint, as_matrix, inner, inverse, op_norm, psd_sqrt, rel_tol

__all__ = [
    "AxiomEntry", "AxiomReport", "BiorthogonalSystem", "GeneralizedStepResolution",
    "StepResolution", "adjoint_resolution", "check_axioms", "evaluate",
    "F_family", "F_star_family", "from_biorthogonal", "from_similarity", "gamma",
    "lemma_f_residuals", "phi_family", "variation",
]


def _hermitize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def _check_jumps(jumps) -> np.ndarray:
    lam = np.asarray(jumps, dtype=np.float64).ravel()
    if lam.size == 0:
        raise BadResolution("a step family needs at least one jump")
    if not np.all(np.isfinite(lam)):
        raise BadResolution("jump points must be finite")
    if np.any(np.diff(lam) <= 0):
        raise BadResolution("jump points must be strictly increasing")
    return lam


def _stack(mats, n: Optional[int] = None) -> np.ndarray:
    D = np.array([as_matrix(M) for M in mats], dtype=np.complex128)
    if D.ndim != 3:
        raise BadResolution("increments must be a list of square matrices")
    if n is not None and D.shape[1] != n:
        raise BadResolution(f"increments are {D.shape[1]}x{D.shape[1]}, expected {n}x{n}")
    return D


class StepResolution:
    """Resolution of the identity with finitely many jumps.

    Construction only checks shapes, finiteness and jump ordering so that
    deliberately broken families can still be studied; call :meth:`validate`
    (or :func:`check_axioms`) for the algebraic invariants.
    """

    def __init__(self, jumps: Sequence[float], increments):
        self.jumps = _check_jumps(jumps)
        self.increments = _stack(increments)
        if self.increments.shape[0] != self.jumps.size:
            raise BadResolution(
                f"{self.jumps.size} jumps but {self.increments.shape[0]} increments")
        self.dim = self.increments.shape[1]
        self.partials = np.cumsum(self.increments, axis=0)
        self.jumps.flags.writeable = False
        self.increments.flags.writeable = False
        self.partials.flags.writeable = False

    @property
    def m(self) -> int:
        return self.jumps.size

    def __repr__(self) -> str:
        return f"StepResolution(dim={self.dim}, jumps={self.jumps.tolist()})"

    def __call__(self, lam: float) -> np.ndarray:
        return evaluate(self, lam)

    def is_self_adjoint(self, tol: float = 1e-10) -> bool:
        return all(op_norm(D - adjoint(D)) <= rel_tol(tol, 1.0 + op_norm(D))
                   for D in self.increments)

    def validate(self, tol: float = 1e-10) -> None:
        """Raise :class:`BadResolution` if an invariant fails beyond ``tol``."""
        report = check_axioms(self, tol=tol, scale=1.0 + gamma(self) ** 2)
        bad = [e for e in report.entries if not e.holds]
        if bad:
            desc = ", ".join(f"{e.axiom_id} (residual {e.max_residual:.3e})" for e in bad)
            raise BadResolution(f"family violates: {desc}")

    def to_json(self) -> dict:
        from .linalg import matrix_to_json
        return {
            "dim": self.dim,
            "jumps": [float(x) for x in self.jumps],
            "increments": [matrix_to_json(D) for D in self.increments],
        }

    @classmethod
    def from_json(cls, obj: dict, force: bool = False, tol: float = 1e-10) -> "StepResolution":
        from .linalg import matrix_from_json
        try:
            dim, jumps, incs = int(obj["dim"]), obj["jumps"], obj["increments"]
        except (KeyError, TypeError, ValueError) as exc:
            raise BadResolution(f"malformed resolution object: {exc}") from exc
        X = cls(jumps, [matrix_from_json(M) for M in incs])
        if X.dim != dim:
            raise BadResolution(f"declared dim {dim} but increments are {X.dim}x{X.dim}")
        if not force:
            X.validate(tol)
        return X


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Dual bases: columns of ``basis`` are phi_k, columns of ``dual`` are psi_k.

    ``dual = (basis^{-1})^*`` so that ``<phi_i, psi_j> = delta_ij``.
    """

    basis: np.ndarray
    dual: np.ndarray
    alphas: np.ndarray
    cond: float

    @classmethod
    def from_basis(cls, basis, alphas) -> "BiorthogonalSystem":
        M = as_matrix(basis)
        Minv, kappa = inverse(M)
        a = np.asarray(alphas, dtype=np.complex128).ravel()
        if a.size != M.shape[0]:
            raise ValueError(f"need {M.shape[0]} alphas, got {a.size}")
        return cls(M, adjoint(Minv), a, kappa)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def R(self, k: int) -> np.ndarray:
        """Rank-one idempotent ``psi_k phi_k^*``."""
        return np.outer(self.dual[:, k], np.conj(self.basis[:, k]))

    def L(self, k: int) -> np.ndarray:
        """``R_k^* = phi_k psi_k^*``."""
        return np.outer(self.basis[:, k], np.conj(self.dual[:, k]))

    def S(self) -> np.ndarray:
        return (self.dual * self.alphas) @ adjoint(self.basis)

    def biorthogonality_residual(self) -> float:
        return op_norm(adjoint(self.dual) @ self.basis - np.eye(self.dim))


@dataclass(frozen=True)
class AxiomEntry:
    axiom_id: str
    holds: bool
    max_residual: float
    tolerance: float
    witness: Optional[dict] = None
    value: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom_id, "holds": self.holds,
            "max_residual": self.max_residual, "tolerance": self.tolerance,
            "witness": self.witness, "value": self.value,
        }


@dataclass
class AxiomReport:
    entries: list = field(default_factory=list)
    scale: float = 1.0

    @property
    def holds(self) -> bool:
        return all(e.holds for e in self.entries)

    @property
    def max_residual(self) -> float:
        return max((e.max_residual for e in self.entries), default=0.0)

    def __getitem__(self, axiom_id: str) -> AxiomEntry:
        for e in self.entries:
            if e.axiom_id == axiom_id:
                return e
        raise KeyError(axiom_id)

    def add(self, axiom_id, residual, tol, witness=None, value=None):
        residual = float(residual)
        self.entries.append(AxiomEntry(axiom_id, residual <= tol, residual, tol, witness, value))

    def to_json(self) -> dict:
        return {"holds": self.holds, "scale": self.scale,
                "entries": [e.to_json() for e in self.entries]}


class GeneralizedStepResolution:
    """Step family of Hermitian operators summing to the identity.

    ``monotone`` records whether every increment is positive semidefinite,
    i.e. whether the increments form a POVM.
    """

    def __init__(self, jumps, increments, psd_tol: float = 1e-10):
        self.jumps = _check_jumps(jumps)
        self.increments = _hermitize(_stack(increments))
        if self.increments.shape[0] != self.jumps.size:
            raise BadResolution("jump / increment count mismatch")
        self.dim = self.increments.shape[1]
        self.partials = np.cumsum(self.increments, axis=0)
        self.min_eigenvalues = np.array(
            [np.linalg.eigvalsh(Dk)[0] for Dk in self.increments])
        self.monotone = bool(np.all(self.min_eigenvalues >= -psd_tol))

    @property
    def m(self) -> int:
        return self.jumps.size

    def __call__(self, lam: float) -> np.ndarray:
        k = int(np.searchsorted(self.jumps, lam, side="right"))
        if k == 0:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        if k == self.m:
            return np.eye(self.dim, dtype=np.complex128)
        return self.partials[k - 1].copy()

    def interval(self, a: float, b: float) -> np.ndarray:
        """Measure of the half-open interval ``(a, b]``."""
        return self(b) - self(a)

    def atoms(self, xi) -> np.ndarray:
        """Point masses ``<dF_k xi, xi>`` of the scalar measure of ``xi``."""
        xi = np.asarray(xi, dtype=np.complex128)
        return np.einsum("i,kij,j->k", xi.conj(), self.increments, xi).real

    def sum_residual(self) -> float:
        return op_norm(self.partials[-1] - np.eye(self.dim))


# ------------------------------------------------------------------ builders

def _check_orthogonal_family(E: np.ndarray, tol: float = 1e-10) -> None:
    n = E.shape[1]
    for k, Ek in enumerate(E):
        if op_norm(Ek - adjoint(Ek)) > tol:
            raise BadSpectralFamily(f"E[{k}] is not Hermitian")
    target = np.where(np.eye(E.shape[0], dtype=bool), np.arange(E.shape[0])[:, None], -1)
    R = _kernels.pair_product_residuals(_kernels.as_kernel_input(E), target)
    if R.max(initial=0.0) > tol * max(1, n):
        j, k = np.unravel_index(np.argmax(R), R.shape)
        raise BadSpectralFamily(f"E[{j}] E[{k}] residual {R[j, k]:.3e}")
    if op_norm(E.sum(axis=0) - np.eye(n)) > tol * E.shape[0]:
        raise BadSpectralFamily("projections do not sum to the identity")


def from_similarity(E_increments, jumps, T) -> StepResolution:
    """Conjugate an orthogonal resolution: ``D_k = T E_k T^{-1}``."""
    E = _stack(E_increments)
    _check_orthogonal_family(E)
    T = as_matrix(T)
    Tinv, _ = inverse(T)
    D = T @ E @ Tinv
    return StepResolution(jumps, D)


def from_biorthogonal(system: BiorthogonalSystem, tie_tol: Optional[float] = None) -> StepResolution:
    """Spectral family of ``S = sum alpha_k psi_k phi_k^*``.

    Eigenvalues are ordered by value and those within ``tie_tol`` of their
    neighbour are merged into one jump whose increment is the sum of the
    corresponding ``R_k``.
    """
    a = system.alphas
    if np.any(np.abs(a.imag) > 1e-12):
        raise ComplexAlpha("alphas must be real")
    a = a.real
    if tie_tol is None:
        tie_tol = 1e-9 * max(float(np.max(np.abs(a))), 1.0)
    order = np.argsort(a, kind="stable")
    groups: list[list[int]] = []
    for k in order:
        if groups and a[k] - a[groups[-1][-1]] <= tie_tol:
            groups[-1].append(int(k))
        else:
            groups.append([int(k)])
    jumps = [float(np.mean(a[g])) for g in groups]
    incs = [system.dual[:, g] @ adjoint(system.basis[:, g]) for g in groups]
    return StepResolution(jumps, incs)


# ---------------------------------------------------------------- evaluation

def evaluate(X: StepResolution, lam: float) -> np.ndarray:
    """``X(lam)``: zero below the first jump, identity from the last one on."""
    k = int(np.searchsorted(X.jumps, lam, side="right"))
    if k == 0:
        return np.zeros((X.dim, X.dim), dtype=np.complex128)
    if k == X.m:
        return np.eye(X.dim, dtype=np.complex128)
    return X.partials[k - 1].copy()


def gamma(X: StepResolution) -> float:
    """``sup_lam ||X(lam)||``, attained at a jump."""
    return max(1.0, max(op_norm(P) for P in X.partials[:-1])) if X.m > 1 else 1.0


def _witness_vector(R: np.ndarray) -> list:
    _, _, Vh = np.linalg.svd(R)
    v = np.conj(Vh[0])
    return [[float(z.real), float(z.imag)] for z in v]


def check_axioms(X: StepResolution, tol: float = 1e-10, scale: Optional[float] = None) -> AxiomReport:
    """Residuals for qs1-qs4 plus idempotency and increment orthogonality.

    Every residual is compared with ``tol * scale``; ``scale`` defaults to
    ``gamma(X)**2``.  A failing entry carries a witness: the jump pair and the
    top right singular vector of the offending residual matrix.
    """
    g = gamma(X)
    if scale is None:
        scale = g * g
    thr = rel_tol(tol, scale)
    rep = AxiomReport(scale=float(scale))
    m, n = X.m, X.dim
    P = _kernels.as_kernel_input(X.partials)
    rep.add("qs1", 0.0, thr, value=g)

    idx = np.arange(m)
    R = _kernels.pair_product_residuals(P, np.minimum.outer(idx, idx))
    off = R.copy()
    np.fill_diagonal(off, 0.0)
    j, k = np.unravel_index(np.argmax(off), off.shape)
    w = None
    if off[j, k] > thr:
        w = {"lambda": float(X.jumps[j]), "mu": float(X.jumps[k]),
             "vector": _witness_vector(P[j] @ P[k] - P[min(j, k)])}
    rep.add("qs2", off[j, k], thr, w)

    d = np.diagonal(R)
    k = int(np.argmax(d))
    w = None
    if d[k] > thr:
        w = {"lambda": float(X.jumps[k]), "vector": _witness_vector(P[k] @ P[k] - P[k])}
    rep.add("idempotency", d[k], thr, w)

    D = _kernels.as_kernel_input(X.increments)
    target = np.where(np.eye(m, dtype=bool), idx[:, None], -1)
    RD = _kernels.pair_product_residuals(D, target)
    j, k = np.unravel_index(np.argmax(RD), RD.shape)
    w = None
    if RD[j, k] > thr:
        w = {"lambda": float(X.jumps[j]), "mu": float(X.jumps[k]),
             "vector": _witness_vector(D[j] @ D[k] - (D[k] if j == k else 0))}
    rep.add("increments", RD[j, k], thr, w)

    rep.add("qs3", op_norm(X.partials[-1] - np.eye(n)), thr)
    rep.add("qs4", 0.0, thr)
    return rep


def adjoint_resolution(X: StepResolution) -> StepResolution:
    return StepResolution(X.jumps, np.conj(np.swapaxes(X.increments, -1, -2)))


# --------------------------------------------------------- Gram-type families

def _gram_increments(P: np.ndarray, star: bool) -> np.ndarray:
    PH = np.conj(np.swapaxes(P, -1, -2))
    G = P @ PH if star else PH @ P
    G = _hermitize(G)
    G[-1] = np.eye(P.shape[1])
    return np.diff(G, axis=0, prepend=np.zeros_like(G[:1]))


def F_family(X: StepResolution) -> GeneralizedStepResolution:
    """Increments of ``F(lam) = X(lam)^* X(lam)``."""
    return GeneralizedStepResolution(X.jumps, _gram_increments(X.partials, star=False))


def F_star_family(X: StepResolution) -> GeneralizedStepResolution:
    """Increments of ``F_*(lam) = X(lam) X(lam)^*``."""
    return GeneralizedStepResolution(X.jumps, _gram_increments(X.partials, star=True))


def phi_family(X: StepResolution) -> GeneralizedStepResolution:
    """Increments of ``Phi(lam) = F(lam)^{1/2}``."""
    F = F_family(X)
    roots = np.array([psd_sqrt(Fk) for Fk in F.partials])
    roots[-1] = np.eye(X.dim)
    return GeneralizedStepResolution(X.jumps, np.diff(roots, axis=0, prepend=np.zeros_like(roots[:1])))


def lemma_f_residuals(X: StepResolution, tol: float = 1e-9, scale: Optional[float] = None) -> AxiomReport:
    """Residuals of the F-identities that follow algebraically from qs2.

    f1: ``X(mu)^* F(lam) X(mu) = F(lam)``; f2: ``X(mu)^* F(lam) = F(lam) =
    F(lam) X(mu)`` for ``lam <= mu``; f3: the three-case formula for
    ``(X(b) - X(a))^* F(lam) (X(b) - X(a))``, checked over every index triple
    with ``X_0 = 0`` prepended.
    """
    if scale is None:
        scale = gamma(X) ** 3
    thr = rel_tol(tol, scale)
    rep = AxiomReport(scale=float(scale))
    P = _kernels.as_kernel_input(X.partials)
    PH = np.conj(np.swapaxes(P, -1, -2))
    F = _kernels.as_kernel_input(PH @ P)
    r1, r2a, r2b = _kernels.f_pair_residuals(P, F)
    for name, r in (("f1", r1), ("f2", np.maximum(r2a, r2b))):
        j, k = np.unravel_index(np.argmax(r), r.shape)
        w = {"lambda": float(X.jumps[j]), "mu": float(X.jumps[k])} if r[j, k] > thr else None
        rep.add(name, r[j, k], thr, w)
    zero = np.zeros((1, X.dim, X.dim), dtype=np.complex128)
    P0 = np.ascontiguousarray(np.concatenate([zero, P]))
    F0 = np.ascontiguousarray(np.concatenate([zero, F]))
    r3 = _kernels.three_case_residuals(P0, F0)
    i, j, l = np.unravel_index(np.argmax(r3), r3.shape)
    w = None
    if r3[i, j, l] > thr:
        w = {"a_index": int(i), "b_index": int(j), "lambda_index": int(l)}
    rep.add("f3", r3[i, j, l], thr, w)
    return rep


def variation(X: StepResolution, xi, eta) -> tuple[float, float]:
    """Total variation of ``lam -> <X(lam) xi, eta>`` and its Cauchy-Schwarz bound.

    For a step family the jump partition is the finest relevant one, so the
    variation is ``sum_k |<D_k xi, eta>|`` and the bound
    ``(sum ||D_k xi||^2)^{1/2} (sum ||D_k^* eta||^2)^{1/2}`` dominates it.
    """
    xi = np.asarray(xi, dtype=np.complex128)
    eta = np.asarray(eta, dtype=np.complex128)
    Dx = X.increments @ xi
    Dse = np.conj(np.swapaxes(X.increments, -1, -2)) @ eta
    total = float(sum(abs(inner(v, eta)) for v in Dx))
    bound = float(np.sqrt(np.sum(np.abs(Dx) ** 2)) * np.sqrt(np.sum(np.abs(Dse) ** 2)))
    return total, bound
