"""Claim registry evaluated on random ensembles and fixed fixtures.

Each claim is a function ``Instance -> Outcome``.  :func:`run_claim` evaluates
the canonical 2x2 fixture first and then ``cfg.trials`` random instances, and
folds the outcomes into a three-valued :class:`ClaimReport`:

* ``HOLDS``         the statement holds as written on every instance;
* ``HOLDS_SCALED``  it fails as written but its gamma-scaled form holds;
* ``FAILS``         a counterexample was found (the smallest one is kept).

Reports are deterministic: trial ``i`` is generated from ``seed ^ i`` and the
JSON serialization sorts keys.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import spearmanr

from .errors import Singular, UnknownClaim
from .linalg import (adjoint, general_eig, haar_unitary, inverse, matrix_from_json,
                     matrix_to_json, op_norm, psd_sqrt, random_invertible, rel_tol)
from .operators import (build_B, frame_defect, gap_cross_term_oracle, norm_identity_gap,
                        triple_summary)
from .resolution import (BiorthogonalSystem, F_family, StepResolution, adjoint_resolution,
                         check_axioms, from_biorthogonal, from_similarity, gamma,
                         lemma_f_residuals, variation)
from .similarity import orthogonalize, pseudo_sqrt, theorem319_roundtrip

__all__ = [
    "CLAIMS", "ClaimReport", "EnsembleConfig", "ExploreTable", "Instance", "Outcome",
    "canonical_instance", "continuation_sweep", "evaluate_claim", "generate_instance",
    "holder_profile", "replay_counterexample", "run_claim", "sqrt_continuity_probe",
    "triple_explore",
]

HOLDS, HOLDS_SCALED, FAILS = "HOLDS", "HOLDS_SCALED", "FAILS"
SPECTRUM_KINDS = ("real", "positive", "clustered")
CONSTRUCTIONS = ("similarity", "biorthogonal")


def _vec_json(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).ravel()]


def _vec_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=np.float64).reshape(-1, 2)
    return a[:, 0] + 1j * a[:, 1]


@dataclass(frozen=True)
class EnsembleConfig:
    n: int = 4
    m: int = 3
    trials: int = 20
    seed: int = 0
    kappa_max: float = 10.0
    spectrum_kind: str = "real"
    construction: str = "similarity"
    probes: int = 20
    tol_scale: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.trials < 1 or self.probes < 1:
            raise ValueError("n, m, trials and probes must all be >= 1")
        if not self.kappa_max >= 1.0:
            raise ValueError("kappa_max must be >= 1")
        if self.spectrum_kind not in SPECTRUM_KINDS:
            raise ValueError(f"spectrum_kind must be one of {SPECTRUM_KINDS}")
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"construction must be one of {CONSTRUCTIONS}")
        if not self.tol_scale > 0:
            raise ValueError("tol_scale must be positive")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class Instance:
    """A step resolution together with a similarity that produced it."""

    label: str
    X: StepResolution
    T: np.ndarray
    E: np.ndarray
    kappa: float
    probes: np.ndarray
    seed: Optional[int] = None

    @property
    def size(self) -> tuple[int, int]:
        return self.X.dim, self.X.m

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "seed": self.seed,
            "resolution": self.X.to_json(),
            "T": matrix_to_json(self.T),
            "E_increments": [matrix_to_json(E) for E in self.E],
            "kappa": self.kappa,
            "probes": [_vec_json(p) for p in self.probes],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Instance":
        X = StepResolution.from_json(obj["resolution"], force=True)
        return cls(
            label=obj["label"], X=X, T=matrix_from_json(obj["T"]),
            E=np.array([matrix_from_json(E) for E in obj["E_increments"]]),
            kappa=float(obj["kappa"]),
            probes=np.array([_vec_from_json(p) for p in obj["probes"]]),
            seed=obj.get("seed"),
        )

    @classmethod
    def from_resolution(cls, X: StepResolution, probes: int = 20, seed: int = 0,
                        label: str = "input") -> "Instance":
        """Wrap an arbitrary family, recovering its similarity by orthogonalization."""
        model = orthogonalize(X)
        return cls(label, X, model.T, model.E_increments, model.kappa,
                   _unit_probes(np.random.default_rng(seed), X.dim, probes), seed)


def _unit_probes(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    Z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def canonical_instance() -> Instance:
    """The 2x2 family ``D_1 = [[1, 1], [0, 0]]`` with jumps (1, 2)."""
    T = np.array([[1, -1], [0, 1]], dtype=np.complex128)
    E = np.array([np.diag([1, 0]), np.diag([0, 1])], dtype=np.complex128)
    X = from_similarity(E, [1.0, 2.0], T)
    probes = np.array([[1, 0], [0, 1], [1, 1]], dtype=np.complex128)
    _, kappa = inverse(T)
    return Instance("fixture:canonical", X, T, E, kappa, probes)


def _draw_jumps(rng: np.random.Generator, m: int, kind: str) -> np.ndarray:
    while True:
        if kind == "real":
            lam = rng.uniform(-2.0, 2.0, m)
        elif kind == "positive":
            lam = rng.uniform(0.1, 4.0, m)
        else:
            centers = rng.uniform(-2.0, 2.0, max(1, m // 3))
            lam = centers[rng.integers(0, centers.size, m)] + rng.uniform(-1e-4, 1e-4, m)
        lam = np.sort(lam)
        if np.all(np.diff(lam) > 1e-7):
            return lam


def _draw_ranks(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    if m <= n:
        cuts = np.sort(rng.choice(np.arange(1, n), size=m - 1, replace=False))
        return np.diff(np.concatenate([[0], cuts, [n]]))
    ranks = np.zeros(m, dtype=int)
    ranks[rng.choice(m, size=n, replace=False)] = 1
    return ranks


def generate_instance(cfg: EnsembleConfig, trial: int) -> Instance:
    seed = int(cfg.seed) ^ int(trial)
    rng = np.random.default_rng(seed)
    n, m = cfg.n, cfg.m
    lam = _draw_jumps(rng, m, cfg.spectrum_kind)
    ranks = _draw_ranks(rng, n, m)
    bounds = np.concatenate([[0], np.cumsum(ranks)])
    t_seed = int(rng.integers(0, 2 ** 62))
    label = f"trial:{trial}"
    if cfg.construction == "similarity":
        Q = haar_unitary(rng, n)
        E = np.array([Q[:, a:b] @ adjoint(Q[:, a:b]) for a, b in zip(bounds[:-1], bounds[1:])])
        T = random_invertible(t_seed, n, cfg.kappa_max)
        X = from_similarity(E, lam, T)
    else:
        M = random_invertible(t_seed, n, cfg.kappa_max)
        alphas = np.repeat(lam, ranks)
        system = BiorthogonalSystem.from_basis(M, alphas)
        X = from_biorthogonal(system, tie_tol=1e-12)
        T = system.dual
        present = [k for k in range(m) if ranks[k] > 0]
        E = np.array([np.diag((np.arange(n) >= bounds[k]) & (np.arange(n) < bounds[k + 1]))
                      .astype(np.complex128) for k in present])
    _, kappa = inverse(T)
    probes = _unit_probes(rng, n, cfg.probes)
    return Instance(label, X, T, E, kappa, probes, seed)


# ------------------------------------------------------------------ outcomes

@dataclass
class Outcome:
    residual: float
    tol: float
    ok: Optional[bool] = None
    scaled_residual: Optional[float] = None
    scaled_tol: Optional[float] = None
    scale: float = 1.0
    witness: dict = field(default_factory=dict)
    scaled_ok: Optional[bool] = None

    def __post_init__(self):
        if self.ok is None:
            self.ok = bool(self.residual <= self.tol)
        if self.scaled_residual is not None and self.scaled_ok is None:
            self.scaled_ok = bool(self.scaled_residual <= self.scaled_tol)


def _family_partials(X: StepResolution) -> np.ndarray:
    """Partial sums with the last one replaced by the exact identity."""
    P = X.partials.copy()
    P[-1] = np.eye(X.dim)
    return P


def _axioms_outcome(X: StepResolution, kappa: float, ts: float) -> Outcome:
    rep = check_axioms(X, tol=1e-10 * ts, scale=kappa ** 2)
    worst = max(rep.entries, key=lambda e: e.max_residual - e.tolerance)
    w = {"axiom": worst.axiom_id}
    if worst.witness:
        w.update(worst.witness)
    return Outcome(rep.max_residual, rel_tol(1e-10 * ts, kappa ** 2), ok=rep.holds,
                   scale=kappa ** 2, witness=w)


def claim_qs_axioms(inst: Instance, ts: float) -> Outcome:
    return _axioms_outcome(inst.X, inst.kappa, ts)


def claim_star_closure(inst: Instance, ts: float) -> Outcome:
    return _axioms_outcome(adjoint_resolution(inst.X), inst.kappa, ts)


def _monotonicity(inst: Instance, ts: float, scaled: bool) -> Outcome:
    X = inst.X
    g = gamma(X)
    P = _family_partials(X)
    xs = inst.probes
    norms = np.linalg.norm(np.einsum("kij,pj->kpi", P, xs), axis=2)
    norms = norms / np.linalg.norm(xs, axis=1)[None, :]
    m = X.m
    tol = rel_tol(1e-10 * ts, g)
    best = (-math.inf, None)
    best_s = -math.inf
    for j in range(m):
        for k in range(j + 1, m):
            d = norms[j] - norms[k]
            p = int(np.argmax(d))
            if d[p] > best[0]:
                best = (float(d[p]), (j, k, p))
            best_s = max(best_s, float(np.max(norms[j] - g * norms[k])))
    r = max(best[0], 0.0)
    w = {}
    if best[1] is not None:
        j, k, p = best[1]
        w = {"lambda": float(X.jumps[j]), "mu": float(X.jumps[k]), "xi": _vec_json(xs[p]),
             "norm_lambda": float(norms[j, p]), "norm_mu": float(norms[k, p])}
    if not scaled:
        return Outcome(r, tol, witness=w)
    return Outcome(r, tol, scaled_residual=max(best_s, 0.0), scaled_tol=tol, scale=g, witness=w)


def claim_lemma310_strict(inst: Instance, ts: float) -> Outcome:
    return _monotonicity(inst, ts, scaled=False)


def claim_lemma310_scaled(inst: Instance, ts: float) -> Outcome:
    return _monotonicity(inst, ts, scaled=True)


def _fs_residuals(X: StepResolution, g2: float) -> dict:
    P = _family_partials(X)
    F = np.einsum("kji,kjl->kil", P.conj(), P)
    F = 0.5 * (F + np.conj(np.swapaxes(F, -1, -2)))
    m = X.m
    out = {"fs1": max(0.0, max(op_norm(Fk) for Fk in F) - 1.0),
           "fs1_scaled": max(0.0, max(op_norm(Fk) for Fk in F) - g2),
           "fs2": 0.0, "fs2_scaled": 0.0, "fs2_pair": None}
    for j in range(m):
        for k in range(j + 1, m):
            lo = -np.linalg.eigvalsh(F[k] - F[j])[0]
            if lo > out["fs2"]:
                out["fs2"], out["fs2_pair"] = float(lo), (j, k)
            out["fs2_scaled"] = max(out["fs2_scaled"], float(-np.linalg.eigvalsh(g2 * F[k] - F[j])[0]))
    Pm = X.partials[-1]
    out["fs3"] = op_norm(adjoint(Pm) @ Pm - np.eye(X.dim))
    out["fs4"] = 0.0
    return out


def claim_fs2_strict(inst: Instance, ts: float) -> Outcome:
    g = gamma(inst.X)
    r = _fs_residuals(inst.X, g * g)
    w = {}
    if r["fs2_pair"] is not None:
        j, k = r["fs2_pair"]
        w = {"lambda": float(inst.X.jumps[j]), "mu": float(inst.X.jumps[k]),
             "min_eigenvalue": -r["fs2"]}
    return Outcome(r["fs2"], rel_tol(1e-10 * ts, 1.0 + g * g), witness=w)


def claim_fs_suite(inst: Instance, ts: float) -> Outcome:
    g = gamma(inst.X)
    g2 = g * g
    r = _fs_residuals(inst.X, g2)
    tol = rel_tol(1e-10 * ts, (1.0 + g2) * inst.kappa ** 2)
    strict = max(r["fs1"], r["fs2"], r["fs3"], r["fs4"])
    scaled = max(r["fs1_scaled"], r["fs2_scaled"], r["fs3"], r["fs4"])
    w = {k: r[k] for k in ("fs1", "fs2", "fs3", "fs4", "fs1_scaled", "fs2_scaled")}
    return Outcome(strict, tol, scaled_residual=scaled, scaled_tol=tol, scale=g2, witness=w)


def claim_f_identities(inst: Instance, ts: float) -> Outcome:
    scale = inst.kappa ** 3
    rep = lemma_f_residuals(inst.X, tol=1e-9 * ts, scale=scale)
    worst = max(rep.entries, key=lambda e: e.max_residual)
    w = {"identity": worst.axiom_id}
    if worst.witness:
        w.update(worst.witness)
    return Outcome(rep.max_residual, rel_tol(1e-9 * ts, scale), ok=rep.holds, scale=scale, witness=w)


def claim_bv_bound(inst: Instance, ts: float) -> Outcome:
    xs = inst.probes
    g = gamma(inst.X)
    worst, w, beyond = 0.0, {}, 0
    for p in range(len(xs)):
        xi, eta = xs[p], xs[(p + 1) % len(xs)]
        total, bound = variation(inst.X, xi, eta)
        nrm = float(np.linalg.norm(xi) * np.linalg.norm(eta))
        if total > nrm * (1 + 1e-12):
            beyond += 1
        r = (total - bound) / nrm
        if r > worst or not w:
            worst = max(r, worst)
            w = {"xi": _vec_json(xi), "eta": _vec_json(eta), "total_variation": total,
                 "bound": bound}
    w["exceeds_end_to_end_bound"] = beyond
    return Outcome(max(worst, 0.0), rel_tol(1e-10 * ts, g * g), witness=w)


def claim_frame_bound(inst: Instance, ts: float) -> Outcome:
    best, w = -math.inf, {}
    for eta in inst.probes:
        ratio = frame_defect(inst.X, eta)
        if ratio > best:
            best, w = ratio, {"eta": _vec_json(eta), "ratio": ratio}
    return Outcome(max(best - 1.0, 0.0), rel_tol(1e-10 * ts, 1.0), witness=w)


def claim_norm_identity(inst: Instance, ts: float) -> Outcome:
    lam_max = float(np.max(np.abs(inst.X.jumps)))
    best, w, tol = -1.0, {}, 0.0
    oracle_err = 0.0
    for xi in inst.probes:
        gap = norm_identity_gap(inst.X, xi)
        oracle = gap_cross_term_oracle(inst.X, xi)
        nx = float(np.vdot(xi, xi).real)
        scale = (1.0 + lam_max) ** 2 * nx
        oracle_err = max(oracle_err, abs(gap - oracle) / scale)
        tol = max(tol, rel_tol(1e-9 * ts, scale))
        if abs(gap) > best:
            best, w = abs(gap), {"xi": _vec_json(xi), "gap": gap, "oracle": oracle}
    w["oracle_max_relative_error"] = oracle_err
    return Outcome(best, tol, witness=w)


def claim_thm319(inst: Instance, ts: float) -> Outcome:
    v = theorem319_roundtrip(inst.E, inst.X.jumps, inst.T, rel=1e-10 * ts,
                             spectrum_tol=1e-8 * ts)
    return Outcome(v.residual, v.bound, ok=v.passed, scale=v.details["kappa"], witness=v.to_json())


def _positive_shift(X: StepResolution) -> StepResolution:
    if X.jumps.min() >= 0:
        return X
    return StepResolution(X.jumps - X.jumps.min() + 1.0, X.increments)


def _match_sorted(a: np.ndarray, b: np.ndarray) -> float:
    from scipy.optimize import linear_sum_assignment
    cost = np.abs(a[:, None] - b[None, :])
    ri, ci = linear_sum_assignment(cost)
    return float(cost[ri, ci].max()) if a.size else 0.0


def claim_cor321(inst: Instance, ts: float) -> Outcome:
    X = _positive_shift(inst.X)
    model = orthogonalize(X)
    B = build_B(X)
    B2 = pseudo_sqrt(X)
    lam_max = float(X.jumps.max())
    kG = model.kappa ** 2
    residual = op_norm(B2 @ B2 - B)
    tol = rel_tol(1e-8 * ts, kG * lam_max)
    ranks = [int(round(np.trace(D).real)) for D in X.increments]
    roots = np.repeat(np.sqrt(X.jumps), ranks).astype(np.complex128)
    sig = general_eig(B2)
    d_roots = _match_sorted(sig, roots)
    d_sq = _match_sorted(sig ** 2, general_eig(B))
    spec_tol = 1e-7 * ts * max(1.0, lam_max)
    ok = residual <= tol and d_roots <= spec_tol and d_sq <= spec_tol
    return Outcome(residual, tol, ok=ok, scale=kG, witness={
        "sqrt_spectrum_distance": d_roots, "squared_spectrum_distance": d_sq,
        "shifted": bool(inst.X.jumps.min() < 0)})


def claim_triple_question(inst: Instance, ts: float) -> Outcome:
    """The one settled part of the question: at T = I the three operators coincide."""
    X0 = from_similarity(inst.E, inst.X.jumps, np.eye(inst.X.dim))
    s0 = triple_summary(X0)
    s1 = triple_summary(inst.X)
    lam_max = float(np.max(np.abs(inst.X.jumps)))
    r = sum(s0.distances)
    return Outcome(r, rel_tol(1e-9 * ts, 1.0 + lam_max), witness={
        "dist_B_TX": s1.dist_B_TX, "dist_B_SX": s1.dist_B_SX, "dist_TX_SX": s1.dist_TX_SX,
        "gamma": s1.gamma})


@dataclass(frozen=True)
class ClaimSpec:
    func: Callable[[Instance, float], Outcome]
    kind: str  # "invariant" or "diagnostic"
    description: str


CLAIMS: dict[str, ClaimSpec] = {
    "qs-axioms": ClaimSpec(claim_qs_axioms, "invariant",
                           "idempotency, ordered products, boundary values"),
    "star-closure": ClaimSpec(claim_star_closure, "invariant",
                              "the adjoint family is a resolution of the identity"),
    "lemma310-strict": ClaimSpec(claim_lemma310_strict, "diagnostic",
                                 "||X(lam) xi|| <= ||X(mu) xi|| for lam <= mu"),
    "lemma310-scaled": ClaimSpec(claim_lemma310_scaled, "invariant",
                                 "||X(lam) xi|| <= gamma ||X(mu) xi|| for lam <= mu"),
    "fs2-strict": ClaimSpec(claim_fs2_strict, "diagnostic", "F(lam) <= F(mu) for lam <= mu"),
    "fs-suite": ClaimSpec(claim_fs_suite, "invariant",
                          "fs1-fs4 for F = X^*X, gamma^2-scaled where needed"),
    "f-identities": ClaimSpec(claim_f_identities, "invariant",
                              "F-identities implied by the product rule"),
    "bv-bound": ClaimSpec(claim_bv_bound, "invariant",
                          "variation bounded by the Cauchy-Schwarz intermediate"),
    "frame-bound": ClaimSpec(claim_frame_bound, "diagnostic", "sum ||X(Delta_k) eta||^2 <= ||eta||^2"),
    "norm-identity": ClaimSpec(claim_norm_identity, "diagnostic",
                               "||B xi||^2 = int lam^2 d<F(lam) xi, xi>"),
    "thm319": ClaimSpec(claim_thm319, "invariant", "B = T A T^{-1} and spectra agree"),
    "cor321": ClaimSpec(claim_cor321, "invariant", "B_2^2 = B with sigma(B_2) = sqrt(jumps)"),
    "sqrt-continuity": ClaimSpec(None, "invariant",  # type: ignore[arg-type]
                                 "Holder-1/2 continuity of the PSD square root"),
    "triple-question": ClaimSpec(claim_triple_question, "diagnostic",
                                 "B, T_X, S_X coincide in the self-adjoint limit"),
}


def claim_kind(claim_id: str) -> str:
    if claim_id not in CLAIMS:
        raise UnknownClaim(claim_id)
    return CLAIMS[claim_id].kind


@dataclass
class ClaimReport:
    claim: str
    status: str
    trials: int
    max_residual: float
    scale: float
    counterexample: Optional[dict]
    config: dict
    fixtures: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "claim": self.claim, "status": self.status, "trials": self.trials,
            "fixtures": self.fixtures, "max_residual": self.max_residual,
            "scale": self.scale, "counterexample": self.counterexample,
            "config": self.config, "details": self.details,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, allow_nan=False)


def evaluate_claim(claim_id: str, inst: Instance, tol_scale: float = 1.0) -> Outcome:
    if claim_id not in CLAIMS or CLAIMS[claim_id].func is None:
        raise UnknownClaim(claim_id)
    return CLAIMS[claim_id].func(inst, tol_scale)


def _counterexample(claim_id: str, inst: Instance, o: Outcome, scaled: bool) -> dict:
    return {
        "claim": claim_id,
        "form": "scaled" if scaled else "strict",
        "residual": o.scaled_residual if scaled else o.residual,
        "tolerance": o.scaled_tol if scaled else o.tol,
        "witness": o.witness,
        "instance": inst.to_json(),
    }


def fold_outcomes(claim_id: str, pairs, cfg_json: dict, trials: int, fixtures: int) -> ClaimReport:
    """Fold ``(Instance, Outcome)`` pairs into a report.

    The counterexample is the violating instance of smallest ``(dim, jumps)``;
    ties go to the instance met first.
    """
    pairs = list(pairs)
    strict_ok = all(o.ok for _, o in pairs)
    has_scaled = all(o.scaled_residual is not None for _, o in pairs)
    if strict_ok:
        status = HOLDS
        max_res = max(o.residual for _, o in pairs)
        scale = max(o.scale for _, o in pairs)
        cex = None
    elif has_scaled and all(o.scaled_ok for _, o in pairs):
        status = HOLDS_SCALED
        max_res = max(o.scaled_residual for _, o in pairs)
        scale = max(o.scale for _, o in pairs)
        cex = None
    else:
        status = FAILS
        scaled = has_scaled
        bad = [(i, o) for i, o in pairs if not (o.scaled_ok if scaled else o.ok)]
        max_res = max((o.scaled_residual if scaled else o.residual) for _, o in bad)
        scale = max(o.scale for _, o in pairs)
        inst, o = min(bad, key=lambda io: io[0].size)
        cex = _counterexample(claim_id, inst, o, scaled)
    return ClaimReport(claim_id, status, trials, float(max_res), float(scale), cex,
                       cfg_json, fixtures)


def run_claim(claim_id: str, cfg: EnsembleConfig,
              instances: Optional[list] = None) -> ClaimReport:
    """Evaluate a claim on the canonical fixture and ``cfg.trials`` random instances.

    ``instances`` replaces the fixture and the random ensemble when given.
    """
    if claim_id not in CLAIMS:
        raise UnknownClaim(claim_id)
    if claim_id == "sqrt-continuity":
        return sqrt_continuity_probe(M_bound=cfg.kappa_max, path_steps=max(8, 4 * cfg.m),
                                     seed=cfg.seed, n=cfg.n, paths=cfg.trials,
                                     tol_scale=cfg.tol_scale)
    if instances is None:
        insts = [canonical_instance()]
        fixtures = 1
        insts += [generate_instance(cfg, t) for t in range(cfg.trials)]
        trials = cfg.trials
    else:
        insts, fixtures, trials = list(instances), 0, len(instances)
    func = CLAIMS[claim_id].func
    pairs = [(inst, func(inst, cfg.tol_scale)) for inst in insts]
    return fold_outcomes(claim_id, pairs, cfg.to_json(), trials, fixtures)


def replay_counterexample(cex: dict, tol_scale: float = 1.0) -> Outcome:
    """Re-evaluate a stored counterexample from its serialized instance."""
    inst = Instance.from_json(cex["instance"])
    return evaluate_claim(cex["claim"], inst, tol_scale)


# ------------------------------------------------------ square-root continuity

def holder_profile(path: Callable[[float], np.ndarray], path_steps: int, levels: int,
                   xi: np.ndarray, C: float) -> dict:
    """Moduli of ``t -> sqrt(K(t))`` on nested uniform grids over ``[0, 1]``.

    Returns the worst ratio ``||(sqrt K_{i+1} - sqrt K_i) xi|| / (C ||dK||^{1/2} ||xi||)``
    over all grids, the operator-norm modulus per grid, and the empirical
    exponent (smallest log-log slope between consecutive grids, ``None`` for
    a constant path).
    """
    omegas, deltas, worst = [], [], 0.0
    nx = float(np.linalg.norm(xi))
    for lev in range(levels):
        N = path_steps * 2 ** lev
        ts = np.linspace(0.0, 1.0, N + 1)
        Ks = [path(t) for t in ts]
        roots = [psd_sqrt(K) for K in Ks]
        om, de = 0.0, 0.0
        for i in range(N):
            dK = op_norm(Ks[i + 1] - Ks[i])
            dR = roots[i + 1] - roots[i]
            om = max(om, op_norm(dR))
            de = max(de, dK)
            lhs = float(np.linalg.norm(dR @ xi))
            if lhs > 0:
                rhs = C * math.sqrt(dK) * nx
                worst = max(worst, lhs / rhs if rhs > 0 else math.inf)
        omegas.append(om)
        deltas.append(de)
    slopes = []
    for a in range(levels - 1):
        if omegas[a] > 0 and omegas[a + 1] > 0 and deltas[a] > deltas[a + 1] > 0:
            slopes.append(math.log(omegas[a] / omegas[a + 1]) / math.log(deltas[a] / deltas[a + 1]))
    return {"worst_ratio": worst, "moduli": omegas, "steps": deltas,
            "exponent": min(slopes) if slopes else None}


def _random_psd(rng: np.random.Generator, n: int, rank: int, norm: float) -> np.ndarray:
    Z = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    K = Z @ adjoint(Z)
    return norm * K / op_norm(K)


def sqrt_continuity_probe(M_bound: float, path_steps: int, seed: int, n: int = 8,
                          paths: int = 4, levels: int = 4,
                          tol_scale: float = 1.0) -> ClaimReport:
    """Check ``||(sqrt K(s) - sqrt K(t)) xi|| <= C ||K(s) - K(t)||^{1/2} ||xi||`` on paths.

    Paths: the fixture ``M diag(t, 1)`` and segments from a rank-deficient
    PSD matrix to a full-rank one, all with norm at most ``M_bound``.
    ``C = 2 max(1, M_bound)^{1/4}`` (the sharp constant is 1).
    """
    if not M_bound > 0:
        raise ValueError("M_bound must be positive")
    C = 2.0 * max(1.0, M_bound) ** 0.25
    rng = np.random.default_rng(seed)
    cases = [("fixture:diag", lambda t: M_bound * np.diag([t, 1.0]).astype(np.complex128),
              np.array([1.0, 1.0], dtype=np.complex128), None)]
    for p in range(paths):
        A = _random_psd(rng, n, max(1, n // 2), M_bound * rng.uniform(0.2, 1.0))
        Bm = _random_psd(rng, n, n, M_bound * rng.uniform(0.2, 1.0))
        xi = _unit_probes(rng, n, 1)[0]
        cases.append((f"path:{p}", (lambda A, Bm: lambda t: (1 - t) * A + t * Bm)(A, Bm), xi,
                      (A, Bm)))
    worst_ratio, min_exp, bad = 0.0, math.inf, None
    threshold = 0.5 - 0.05 * tol_scale
    for label, path, xi, ends in cases:
        prof = holder_profile(path, path_steps, levels, xi, C)
        worst_ratio = max(worst_ratio, prof["worst_ratio"])
        e = prof["exponent"]
        if e is not None:
            min_exp = min(min_exp, e)
        failed = prof["worst_ratio"] > 1.0 or (e is not None and e < threshold)
        if failed and bad is None:
            bad = {"claim": "sqrt-continuity", "label": label, "seed": seed,
                   "residual": prof["worst_ratio"], "exponent": e,
                   "endpoints": None if ends is None else [matrix_to_json(M) for M in ends],
                   "xi": _vec_json(xi)}
    status = FAILS if bad is not None else HOLDS
    cfg = {"M_bound": M_bound, "path_steps": path_steps, "seed": seed, "n": n,
           "paths": paths, "levels": levels, "tol_scale": tol_scale}
    return ClaimReport("sqrt-continuity", status, paths, float(worst_ratio), C, bad, cfg,
                       fixtures=1, details={"holder_exponent": None if math.isinf(min_exp)
                                            else float(min_exp)})


# ------------------------------------------------------------- exploration

def _gap_stats(X: StepResolution, probes: np.ndarray) -> dict:
    gaps = np.array([norm_identity_gap(X, xi) for xi in probes])
    return {"gap_mean": float(gaps.mean()), "gap_max_abs": float(np.abs(gaps).max()),
            "gap_min": float(gaps.min())}


def continuation_sweep(inst: Instance, ts) -> list:
    """Rows along ``T(t) = I + t (T - I)``; at ``t = 0`` the family is self-adjoint."""
    rows = []
    n = inst.X.dim
    for t in ts:
        Tt = np.eye(n) + t * (inst.T - np.eye(n))
        try:
            Xt = from_similarity(inst.E, inst.X.jumps, Tt)
        except Singular:
            continue
        s = triple_summary(Xt)
        rows.append(({"t": float(t), **_gap_stats(Xt, inst.probes)}, s))
    return rows


@dataclass
class ExploreTable:
    rows: list
    sweep: list
    spearman: Optional[float]

    def to_json(self) -> dict:
        def conv(rs):
            return [{**extra, **s.to_json()} for extra, s in rs]
        return {"rows": conv(self.rows), "sweep": conv(self.sweep),
                "spearman_dist_TX_SX_vs_gamma": self.spearman}


def triple_explore(cfg: EnsembleConfig, sweep_ts=None, sweep_trial: int = 0,
                   include_canonical: bool = True) -> ExploreTable:
    """Per-trial triple summaries, a continuation sweep, and one rank correlation."""
    rows = []
    insts = [canonical_instance()] if include_canonical else []
    insts += [generate_instance(cfg, t) for t in range(cfg.trials)]
    for inst in insts:
        s = triple_summary(inst.X)
        rows.append(({"trial": inst.label, "kappa_T": float(inst.kappa),
                      **_gap_stats(inst.X, inst.probes)}, s))
    if sweep_ts is None:
        sweep_ts = np.linspace(0.0, 1.0, 11)
    sweep = continuation_sweep(generate_instance(cfg, sweep_trial), sweep_ts)
    d = [s.dist_TX_SX for _, s in rows]
    g = [s.gamma - 1.0 for _, s in rows]
    rho = None
    if len(rows) > 2 and np.ptp(d) > 0 and np.ptp(g) > 0:
        rho = float(spearmanr(d, g).statistic)
    return ExploreTable(rows, sweep, rho)
