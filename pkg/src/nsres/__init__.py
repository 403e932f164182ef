"""Finite-dimensional toolkit for non-self-adjoint resolutions of the identity."""
from ._kernels import BACKEND
from .errors import *  # noqa: F401,F403
from .linalg import (adjoint, general_eig, herm_eig, inverse, op_norm, psd_sqrt,
                     random_invertible)
from .operators import (build_B, build_SX, build_TX, build_triple, frame_defect,
                        gap_cross_term_oracle, norm_identity_gap, quadratic_moment,
                        triple_summary)
from .resolution import (BiorthogonalSystem, GeneralizedStepResolution, StepResolution,
                         adjoint_resolution, check_axioms, evaluate, F_family, F_star_family,
                         from_biorthogonal, from_similarity, gamma, lemma_f_residuals,
                         phi_family, variation)
from .similarity import (intertwines, metric_from_resolution, naimark_dilate, orthogonalize,
                         pseudo_sqrt, spectra_compare, theorem319_roundtrip)

__version__ = "0.1.0"
