"""Bootstrap-ensemble support recovery.

Resamples each dataset's classes with replacement, refits the penalized
joint regression on every replicate at fixed penalty levels, and averages
the nonzero-coefficient indicators into an edge-weight matrix.  Edges with
weight above a threshold form the recovered differential networks.
"""

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from . import _rng
from .sgmcp import FitOptions, JointDesign, cross_validate, fit


class EnsembleError(RuntimeError):
    """Too many bootstrap replicates failed to fit."""


@dataclass
class EdgeWeightMatrix:
    """Per-edge, per-dataset inclusion frequencies over the replicates.

    psi is (d, M) in [0, 1]; psi * n_replicates is integer-valued.  `pairs`
    labels the d rows with (i, j) node pairs when known.
    """

    psi: np.ndarray
    n_replicates: int
    pairs: tuple | None = None
    n_failed: int = 0


@dataclass
class SupportSet:
    """Thresholded supports: one edge set per dataset."""

    edges: list       # list (per dataset) of sets of (i, j) pairs
    tau: float


def stratified_bootstrap(design, rng):
    """Resample each dataset's classes with replacement, sizes preserved."""
    row_indices = []
    for z in design.labels:
        rows = []
        for cls in (1, 0):
            idx = np.where(z == cls)[0]
            if idx.size == 0:
                raise ValueError("cannot bootstrap an empty class")
            rows.append(idx[rng.integers(0, idx.size, size=idx.size)])
        row_indices.append(np.concatenate(rows))
    return design.subset(row_indices)


def _one_replicate(design, params, seed, b, opts, cv_spec, cv_folds):
    rng = _rng.stream(seed, _rng.BOOTSTRAP, b)
    replicate = stratified_bootstrap(design, rng)
    try:
        if cv_spec is not None:
            params = cross_validate(replicate, cv_spec, folds=cv_folds,
                                    seed=seed + b, opts=opts).params
        result = fit(replicate, params, opts)
    except Exception:
        return None
    return result.theta_beta != 0.0


def run_ensemble(design, params, n_replicates=100, seed=0,
                 opts=FitOptions(), n_jobs=1, cv_spec=None, cv_folds=5,
                 max_failed_fraction=0.1):
    """Edge-weight matrix from `n_replicates` bootstrap refits.

    Penalty levels are held fixed across replicates (tune once on the
    original data); pass `cv_spec` to re-tune inside every replicate
    instead.  Replicates use independent keyed random streams, so the
    result is identical for any `n_jobs`.  Failed replicate fits are
    skipped and reported; more than `max_failed_fraction` of them is an
    error.
    """
    if n_replicates < 1:
        raise ValueError("need at least one replicate")
    indicators = Parallel(n_jobs=n_jobs)(
        delayed(_one_replicate)(design, params, seed, b, opts,
                                cv_spec, cv_folds)
        for b in range(n_replicates)
    )
    kept = [ind for ind in indicators if ind is not None]
    n_failed = n_replicates - len(kept)
    if n_failed > max_failed_fraction * n_replicates:
        raise EnsembleError(
            f"{n_failed} of {n_replicates} replicate fits failed"
        )
    psi = np.mean(kept, axis=0)
    return EdgeWeightMatrix(psi=psi, n_replicates=len(kept),
                            pairs=design.pairs, n_failed=n_failed)


def threshold_support(weights, tau=0.5):
    """Edges whose inclusion frequency exceeds tau, per dataset."""
    if not (0.0 <= tau < 1.0):
        raise ValueError("tau must lie in [0, 1)")
    d, m_count = weights.psi.shape
    pairs = weights.pairs or tuple(range(d))
    edges = []
    for m in range(m_count):
        hits = np.nonzero(weights.psi[:, m] > tau)[0]
        edges.append({pairs[k] for k in hits})
    return SupportSet(edges=edges, tau=float(tau))
