"""Replication-level drivers tying the pipeline stages together.

One replication is: simulate (or load) a study, whiten, estimate per-scan
precision, build Fisher edge features, tune the joint penalty by
cross-validation, run the bootstrap ensemble, and score the recovered
supports against the ground truth.  The separate-estimation baseline runs
the same machinery per dataset with the group penalty disabled.
"""

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from . import metrics, simulate, studyio
from .ensemble import EdgeWeightMatrix, run_ensemble, threshold_support
from .features import EdgeIndexMap, features_from_scan
from .sgmcp import (FitOptions, GridSpec, JointDesign, cross_validate,
                    _grid_pairs)

JOINT = "joint"
SEPARATE = "separate"


def whitening_matrix_lookup(manifest, q):
    """Per-group temporal covariances from a manifest, or None."""
    if manifest is None or "temporal" not in manifest:
        return None
    temporal = manifest["temporal"]
    return {
        simulate.GROUP_CASE: simulate.ar_covariance(q, temporal["case_rho"]),
        simulate.GROUP_CONTROL: simulate.ar_covariance(
            q, temporal["control_rho"]),
    }


def _one_subject(scan, sigma_t_by_group, clime_config, index_map):
    if sigma_t_by_group is not None:
        sigma_t = sigma_t_by_group[scan.group]
    else:
        rho = studyio.estimate_ar_parameter(scan.data)
        sigma_t = simulate.ar_covariance(scan.data.shape[1], rho)
    white = simulate.SubjectScan(
        data=simulate.whiten(scan.data, sigma_t),
        group=scan.group,
        dataset_id=scan.dataset_id,
        confounders=scan.confounders,
    )
    return features_from_scan(white, clime_config, index_map)


def build_design(scans, clime_config, sigma_t_by_group=None, n_jobs=1):
    """Whiten every scan, estimate precisions, and assemble a JointDesign.

    `sigma_t_by_group` maps group labels to known temporal covariances
    (simulated studies); when None, an AR(1) parameter is estimated per
    subject from lag-1 autocorrelation.
    """
    p = scans[0][0].data.shape[0]
    index_map = EdgeIndexMap(p)
    flat = [scan for subjects in scans for scan in subjects]
    vectors = Parallel(n_jobs=n_jobs)(
        delayed(_one_subject)(scan, sigma_t_by_group, clime_config, index_map)
        for scan in flat
    )
    by_dataset = {}
    for scan, vec in zip(flat, vectors):
        by_dataset.setdefault(scan.dataset_id, []).append((scan, vec))
    features, confounders, labels = [], [], []
    for dataset_id in sorted(by_dataset):
        entries = by_dataset[dataset_id]
        features.append(np.array([vec.w for _, vec in entries]))
        confounders.append(np.array(
            [np.asarray(scan.confounders, dtype=float) for scan, _ in entries]
        ).reshape(len(entries), -1))
        labels.append(np.array(
            [1 if scan.group == simulate.GROUP_CASE else 0
             for scan, _ in entries]
        ))
    return JointDesign(features, confounders, labels, pairs=index_map.pairs)


def _grid_spec(cfg):
    return GridSpec(n_lambda1=cfg.n_lambda1, n_lambda2=cfg.n_lambda2,
                    lo=cfg.grid_lo, gammas=(cfg.gamma,))


def _separate_grid_spec(cfg):
    # group penalty off: search lambda2 only, comparably sized grid
    n_l2 = min(12, cfg.n_lambda1 * cfg.n_lambda2)
    return GridSpec(n_lambda1=1, n_lambda2=n_l2,
                    lo=cfg.grid_lo, gammas=(cfg.gamma,), pairs=None)


@dataclass
class MethodRun:
    method: str
    weights: object            # EdgeWeightMatrix
    params: list               # PenaltyParams per fit (one, or one per dataset)


def run_joint(design, cfg, seed):
    """Tune once on the full design, then bootstrap-ensemble at the tuned
    penalty."""
    opts = FitOptions(max_iter=cfg.max_iter)
    cv = cross_validate(design, _grid_spec(cfg), folds=cfg.cv_folds,
                        seed=seed, opts=opts)
    weights = run_ensemble(design, cv.params, n_replicates=cfg.n_bootstrap,
                           seed=seed, opts=opts, n_jobs=cfg.threads)
    return MethodRun(method=JOINT, weights=weights, params=[cv.params])


def run_separate(design, cfg, seed):
    """Baseline: per-dataset fits with the group penalty disabled."""
    opts = FitOptions(max_iter=cfg.max_iter)
    columns, params = [], []
    spec = _separate_grid_spec(cfg)
    n_replicates = cfg.n_bootstrap
    for m in range(design.n_datasets):
        single = JointDesign(
            features=[design.features[m]],
            confounders=[design.confounders[m]],
            labels=[design.labels[m]],
            pairs=design.pairs,
        )
        l2_pairs = tuple((0.0, l2) for (_, l2)
                         in _grid_pairs(single, spec, opts))
        cv = cross_validate(single, GridSpec(pairs=l2_pairs,
                                             gammas=(cfg.gamma,)),
                            folds=cfg.cv_folds, seed=seed + 1000 * (m + 1),
                            opts=opts)
        weights = run_ensemble(single, cv.params, n_replicates=n_replicates,
                               seed=seed + 1000 * (m + 1), opts=opts,
                               n_jobs=cfg.threads)
        n_replicates = min(n_replicates, weights.n_replicates)
        columns.append(weights.psi[:, 0])
        params.append(cv.params)
    merged = EdgeWeightMatrix(psi=np.column_stack(columns),
                              n_replicates=n_replicates, pairs=design.pairs)
    return MethodRun(method=SEPARATE, weights=merged, params=params)


def score_run(run, truth, p, tau=0.5, select_tau=True):
    """Per-dataset recovery scores at tau (or at the TPR+TDR-optimal tau)."""
    weights = run.weights
    rows = []
    for m, truth_edges in enumerate(truth):
        psi_col = weights.psi[:, m]
        if select_tau:
            tau_m = metrics.select_tau_max_tpr_tdr(
                psi_col, weights.pairs, truth_edges, weights.n_replicates, p)
        else:
            tau_m = tau
        support = threshold_support(weights, tau_m).edges[m]
        score = metrics.score_support(truth_edges, support, p)
        rows.append({
            "method": run.method,
            "dataset": m + 1,
            "tau": tau_m,
            "tpr": score.tpr,
            "tnr": score.tnr,
            "tdr": score.tdr,
        })
    return rows


def run_replication(cfg, rep_index, with_baseline=None):
    """Simulate and evaluate one replication; returns score rows."""
    if with_baseline is None:
        with_baseline = cfg.with_baseline
    design_seed = cfg.seed + 7919 * rep_index
    study = cfg.study_design(seed=design_seed)
    scans, pairs = simulate.generate_study(study)
    truth = [pair.differential_edges() for pair in pairs]
    lookup = {
        simulate.GROUP_CASE: simulate.ar_covariance(
            cfg.q, cfg.temporal_rho_case),
        simulate.GROUP_CONTROL: simulate.ar_covariance(
            cfg.q, cfg.temporal_rho_control),
    }
    design = build_design(scans, cfg.clime_config(), lookup,
                          n_jobs=cfg.threads)
    rows = []
    joint = run_joint(design, cfg, seed=design_seed)
    rows += score_run(joint, truth, cfg.p, cfg.tau, cfg.select_tau)
    if with_baseline:
        separate = run_separate(design, cfg, seed=design_seed)
        rows += score_run(separate, truth, cfg.p, cfg.tau, cfg.select_tau)
    for row in rows:
        row["replication"] = rep_index
    return rows


def summarize(rows):
    """Mean rates per (method, dataset) over replications."""
    keys = sorted({(r["method"], r["dataset"]) for r in rows})
    out = []
    for method, dataset in keys:
        chunk = [r for r in rows
                 if r["method"] == method and r["dataset"] == dataset]

        def mean_rate(name):
            vals = [r[name] for r in chunk if r[name] is not None]
            return float(np.mean(vals)) if vals else None

        out.append({
            "method": method,
            "dataset": dataset,
            "tpr": mean_rate("tpr"),
            "tnr": mean_rate("tnr"),
            "tdr": mean_rate("tdr"),
            "n": len(chunk),
        })
    return out
