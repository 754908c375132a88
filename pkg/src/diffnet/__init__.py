"""diffnet: joint estimation of multiple differential brain networks.

Pipeline: per-subject sparse precision estimation, Fisher-transformed edge
features, jointly penalized logistic regression across datasets, and
bootstrap-ensemble support recovery, plus a matching simulation harness.
"""

from ._cd import BACKEND as kernel_backend
from .clime import ClimeConfig, clime_solve, sample_covariance, select_lambda_dens
from .ensemble import run_ensemble, stratified_bootstrap, threshold_support
from .features import (EdgeIndexMap, edge_features, features_from_scan,
                       fisher_transform, partial_correlation)
from .metrics import pr_curve, score_support, select_tau_max_tpr_tdr
from .sgmcp import (CoefficientFit, FitOptions, GridSpec, JointDesign,
                    PenaltyParams, cross_validate, fit, lambda1_max,
                    lambda2_max, mcp, negative_log_likelihood, penalty_total,
                    predict, sis_screen)
from .simulate import (StudyDesign, SubjectScan, ar_covariance,
                       generate_hub_graph, generate_small_world,
                       generate_study, make_pair, sample_matrix_normal,
                       whiten)

__version__ = "0.1.0"
