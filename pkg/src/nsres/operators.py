"""The three operators attached to one step resolution.

For a step family every Stieltjes integral is a finite sum over the jumps:

* ``B   = sum lam_k D_k``        (integral against X itself)
* ``T_X = sum lam_k dF_k``       (integral against F = X^* X)
* ``S_X = sum lam_k dPhi_k``     (integral against Phi = F^{1/2})

``T_X`` and ``S_X`` are Hermitian; ``B`` generally is not.  All three agree
when the family is self-adjoint.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ZeroVector
from .linalg import general_eig, matrix_to_json, op_norm
from .resolution import F_family, StepResolution, gamma, phi_family

__all__ = [
    "OperatorTriple", "QuadraticMoment", "SUMMARY_FIELDS", "TripleSummary",
    "build_B", "build_SX", "build_TX", "build_triple", "frame_defect",
    "gap_cross_term_oracle", "norm_identity_gap", "quadratic_moment",
    "summaries_to_csv", "triple_summary",
]


def _weighted_sum(lam: np.ndarray, incs: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", lam.astype(np.complex128), incs)


def build_B(X: StepResolution) -> np.ndarray:
    return _weighted_sum(X.jumps, X.increments)


def build_TX(X: StepResolution) -> np.ndarray:
    T = _weighted_sum(X.jumps, F_family(X).increments)
    return 0.5 * (T + T.conj().T)


def build_SX(X: StepResolution) -> np.ndarray:
    S = _weighted_sum(X.jumps, phi_family(X).increments)
    return 0.5 * (S + S.conj().T)


@dataclass(frozen=True)
class OperatorTriple:
    B: np.ndarray
    T_X: np.ndarray
    S_X: np.ndarray
    source: StepResolution

    def to_json(self) -> dict:
        return {"B": matrix_to_json(self.B), "T_X": matrix_to_json(self.T_X),
                "S_X": matrix_to_json(self.S_X)}


def build_triple(X: StepResolution) -> OperatorTriple:
    return OperatorTriple(build_B(X), build_TX(X), build_SX(X), X)


class QuadraticMoment(NamedTuple):
    value: float
    monotone: bool


def quadratic_moment(X: StepResolution, xi) -> QuadraticMoment:
    """``sum lam_k^2 <dF_k xi, xi>``.

    Negative values are possible (and returned unchanged) when the F-family
    is not monotone.
    """
    F = F_family(X)
    atoms = F.atoms(xi)
    return QuadraticMoment(float(np.sum(X.jumps ** 2 * atoms)), F.monotone)


def norm_identity_gap(X: StepResolution, xi) -> float:
    """``||B xi||^2 - sum lam_k^2 <dF_k xi, xi>`` (signed)."""
    xi = np.asarray(xi, dtype=np.complex128)
    Bx = build_B(X) @ xi
    return float(np.vdot(Bx, Bx).real) - quadratic_moment(X, xi).value


def gap_cross_term_oracle(X: StepResolution, xi) -> float:
    """Independent expansion of :func:`norm_identity_gap` from the vectors
    ``D_k xi`` and ``X_k xi`` alone (no B, no F)."""
    xi = np.asarray(xi, dtype=np.complex128)
    V = _kernels.as_kernel_input(X.increments @ xi)
    W = np.zeros((X.m + 1, X.dim), dtype=np.complex128)
    for k in range(X.m):
        W[k + 1] = W[k] + V[k]
    return float(_kernels.cross_term_gap(V, W, np.ascontiguousarray(X.jumps)))


def frame_defect(X: StepResolution, eta) -> float:
    """``sum_k ||D_k eta||^2 / ||eta||^2``; at most 1 for orthogonal increments."""
    eta = np.asarray(eta, dtype=np.complex128)
    nn = float(np.vdot(eta, eta).real)
    if nn == 0.0:
        raise ZeroVector("frame_defect needs a nonzero vector")
    return float(np.sum(np.abs(X.increments @ eta) ** 2) / nn)


SUMMARY_FIELDS = ("dist_B_TX", "dist_B_SX", "dist_TX_SX", "comm_B_TX", "comm_B_SX",
                  "spec_B", "spec_TX", "spec_SX", "gamma", "kappa")


def _cplx_list(ev) -> list:
    return [[float(z.real), float(z.imag)] for z in ev]


@dataclass(frozen=True)
class TripleSummary:
    dist_B_TX: float
    dist_B_SX: float
    dist_TX_SX: float
    comm_B_TX: float
    comm_B_SX: float
    spec_B: np.ndarray
    spec_TX: np.ndarray
    spec_SX: np.ndarray
    gamma: float
    kappa: float

    @property
    def distances(self) -> tuple[float, float, float]:
        return self.dist_B_TX, self.dist_B_SX, self.dist_TX_SX

    def to_json(self) -> dict:
        out = {}
        for name in SUMMARY_FIELDS:
            v = getattr(self, name)
            out[name] = _cplx_list(v) if name.startswith("spec_") else float(v)
        return out


def triple_summary(X: StepResolution) -> TripleSummary:
    """Distances, commutators and spectra of ``B``, ``T_X``, ``S_X``.

    ``kappa`` is the condition number of the canonical similarity
    ``T = G^{-1/2}`` recovered by :func:`nsres.similarity.orthogonalize`.
    """
    from .similarity import orthogonalize

    B, TX, SX = build_B(X), build_TX(X), build_SX(X)
    model = orthogonalize(X)
    return TripleSummary(
        dist_B_TX=op_norm(B - TX),
        dist_B_SX=op_norm(B - SX),
        dist_TX_SX=op_norm(TX - SX),
        comm_B_TX=op_norm(B @ TX - TX @ B),
        comm_B_SX=op_norm(B @ SX - SX @ B),
        spec_B=general_eig(B),
        spec_TX=np.linalg.eigvalsh(TX).astype(np.complex128),
        spec_SX=np.linalg.eigvalsh(SX).astype(np.complex128),
        gamma=gamma(X),
        kappa=model.kappa,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def summaries_to_csv(rows, extra_fields=()) -> str:
    """Flatten summaries to CSV; spectra become ``;``-joined sorted real parts.

    ``rows`` is an iterable of ``(extra: dict, summary: TripleSummary)``.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(extra_fields) + list(SUMMARY_FIELDS))
    for extra, s in rows:
        line = [extra.get(f, "") if not isinstance(extra.get(f), float) else _fmt(extra[f])
                for f in extra_fields]
        for name in SUMMARY_FIELDS:
            v = getattr(s, name)
            if name.startswith("spec_"):
                line.append(";".join(_fmt(x) for x in np.sort(np.real(v))))
            else:
                line.append(_fmt(v))
        w.writerow(line)
    return buf.getvalue()
