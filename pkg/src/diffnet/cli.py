"""Command-line driver.

Subcommands mirror the pipeline stages:

    simulate   write study directories (scans + manifest) per replication
    features   per-subject precision estimation -> feature CSVs
    fit        cross-validated joint fit -> fit.json
    ensemble   bootstrap ensemble -> psi.csv + support.csv
    evaluate   score supports against the manifest ground truth
    pipeline   all stages in memory, with summary tables

Every subcommand takes --config (TOML), --seed, --threads, --out; the
DIFFNET_THREADS environment variable overrides the thread count.  Stage
failures exit nonzero after printing a JSON error record to stderr.
"""

import argparse
import glob
import json
import os
import sys
import warnings

import numpy as np

from . import config as config_mod
from . import experiment, metrics, simulate, studyio
from .ensemble import run_ensemble, threshold_support
from .sgmcp import (FitOptions, GridSpec, JointDesign, cross_validate,
                    fit, fit_to_json, sis_screen)


def _load_config(args):
    cfg = config_mod.load(args.config) if args.config \
        else config_mod.ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    env_threads = os.environ.get("DIFFNET_THREADS")
    if env_threads:
        overrides["threads"] = int(env_threads)
    elif args.threads is not None:
        overrides["threads"] = args.threads
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        base = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
        base.update(overrides)
        cfg = config_mod.from_dict(base)
    return cfg


def _rep_dirs(root):
    if os.path.exists(os.path.join(root, studyio.MANIFEST_NAME)):
        return [root]
    reps = sorted(glob.glob(os.path.join(root, "rep_*")))
    if not reps:
        raise FileNotFoundError(f"no study found under {root}")
    return reps


def cmd_simulate(cfg, args):
    os.makedirs(cfg.out_dir, exist_ok=True)
    for rep in range(cfg.replications):
        design = cfg.study_design(seed=cfg.seed + 7919 * rep)
        scans, pairs = simulate.generate_study(design)
        rep_dir = os.path.join(cfg.out_dir, f"rep_{rep:03d}")
        studyio.write_study(rep_dir, design, scans, pairs)
        print(f"wrote {rep_dir}")
    return 0


def _design_from_study(rep_dir, cfg):
    manifest = studyio.read_manifest(rep_dir)
    if manifest is None:
        warnings.warn(
            f"{rep_dir} has no manifest; whitening with estimated AR(1)",
            stacklevel=2,
        )
        scans = _scan_fallback(rep_dir)
        lookup = None
    else:
        scans = studyio.load_scans(rep_dir, manifest)
        lookup = experiment.whitening_matrix_lookup(
            manifest, scans[0][0].data.shape[1])
    return experiment.build_design(scans, cfg.clime_config(), lookup,
                                   n_jobs=cfg.threads)


def _scan_fallback(rep_dir):
    """Directory convention when no manifest exists:
    dataset_*/<group>_<idx>.csv."""
    scans = []
    for sub in sorted(glob.glob(os.path.join(rep_dir, "dataset_*"))):
        dataset_id = int(sub.rsplit("_", 1)[1])
        subjects = []
        for path in sorted(glob.glob(os.path.join(sub, "*.csv"))):
            group = os.path.basename(path).rsplit("_", 1)[0]
            subjects.append(simulate.SubjectScan(
                data=studyio.read_scan(path), group=group,
                dataset_id=dataset_id,
            ))
        scans.append(subjects)
    if not scans:
        raise FileNotFoundError(f"no dataset_* directories in {rep_dir}")
    return scans


def cmd_features(cfg, args):
    for rep_dir in _rep_dirs(args.study):
        design = _design_from_study(rep_dir, cfg)
        out_dir = os.path.join(rep_dir, "features")
        os.makedirs(out_dir, exist_ok=True)
        for m in range(design.n_datasets):
            path = os.path.join(out_dir, f"dataset_{m + 1:02d}.csv")
            studyio.write_features(path, m + 1, design.labels[m],
                                   design.confounders[m], design.features[m],
                                   design.pairs)
        print(f"wrote features under {out_dir}")
    return 0


def _design_from_features(rep_dir):
    paths = sorted(glob.glob(os.path.join(rep_dir, "features",
                                          "dataset_*.csv")))
    if not paths:
        raise FileNotFoundError(
            f"no feature CSVs under {rep_dir}; run `features` first"
        )
    features, confounders, labels, pairs = [], [], [], None
    for path in paths:
        _, z, q, w, pr = studyio.read_features(path)
        features.append(w)
        confounders.append(q)
        labels.append(z)
        pairs = pr
    return JointDesign(features, confounders, labels, pairs=pairs)


def _tune_and_fit(design, cfg):
    opts = FitOptions(max_iter=cfg.max_iter)
    if cfg.sis_keep and cfg.sis_keep < design.n_features:
        _, design = sis_screen(design, cfg.sis_keep)
    spec = GridSpec(n_lambda1=cfg.n_lambda1, n_lambda2=cfg.n_lambda2,
                    lo=cfg.grid_lo, gammas=(cfg.gamma,))
    cv = cross_validate(design, spec, folds=cfg.cv_folds, seed=cfg.seed,
                        opts=opts)
    return design, cv, opts


def cmd_fit(cfg, args):
    for rep_dir in _rep_dirs(args.study):
        design, cv, opts = _tune_and_fit(_design_from_features(rep_dir), cfg)
        result = fit(design, cv.params, opts)
        path = os.path.join(rep_dir, "fit.json")
        fit_to_json(result, path)
        print(f"wrote {path} (lambda1={cv.params.lambda1:.6g}, "
              f"lambda2={cv.params.lambda2:.6g}, converged={result.converged})")
    return 0


def cmd_ensemble(cfg, args):
    for rep_dir in _rep_dirs(args.study):
        design, cv, opts = _tune_and_fit(_design_from_features(rep_dir), cfg)
        weights = run_ensemble(design, cv.params,
                               n_replicates=cfg.n_bootstrap, seed=cfg.seed,
                               opts=opts, n_jobs=cfg.threads)
        psi_path = os.path.join(rep_dir, "psi.csv")
        _write_psi(psi_path, weights)
        support = threshold_support(weights, cfg.tau)
        sup_path = os.path.join(rep_dir, "support.csv")
        with open(sup_path, "w") as fh:
            fh.write("dataset,i,j\n")
            for m, edges in enumerate(support.edges):
                for (i, j) in sorted(edges):
                    fh.write(f"{m + 1},{i},{j}\n")
        print(f"wrote {psi_path} and {sup_path} "
              f"(B={weights.n_replicates}, tau={cfg.tau})")
    return 0


def _write_psi(path, weights):
    m_count = weights.psi.shape[1]
    with open(path, "w") as fh:
        fh.write("edge," + ",".join(str(m + 1) for m in range(m_count)) + "\n")
        for k, (i, j) in enumerate(weights.pairs):
            cells = ",".join(f"{v:.17g}" for v in weights.psi[k])
            fh.write(f"{i}_{j},{cells}\n")


def _read_psi(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    pairs = tuple(tuple(int(v) for v in r[0].split("_")) for r in rows)
    psi = np.array([[float(v) for v in r[1:]] for r in rows])
    return pairs, psi, len(header) - 1


def cmd_evaluate(cfg, args):
    rows = []
    for rep_dir in _rep_dirs(args.study):
        manifest = studyio.read_manifest(rep_dir)
        truth = studyio.truth_edges(manifest) if manifest else None
        if truth is None:
            raise ValueError(
                f"{rep_dir} has no ground truth; evaluate is only available "
                "for simulated studies"
            )
        psi_path = os.path.join(rep_dir, "psi.csv")
        pairs, psi, _ = _read_psi(psi_path)
        p = manifest["design"]["p"]
        # infer the replicate count from the psi resolution
        diffs = psi[psi > 0]
        b = int(round(1.0 / diffs.min())) if diffs.size else 1
        for m in range(psi.shape[1]):
            if cfg.select_tau:
                tau = metrics.select_tau_max_tpr_tdr(
                    psi[:, m], pairs, truth[m], b, p)
            else:
                tau = cfg.tau
            est = {pair for pair, v in zip(pairs, psi[:, m]) if v > tau}
            score = metrics.score_support(truth[m], est, p)
            rows.append({"method": "joint", "dataset": m + 1,
                         "rep": rep_dir, "tau": tau, "tpr": score.tpr,
                         "tnr": score.tnr, "tdr": score.tdr})
            curve = metrics.pr_curve(psi[:, m], pairs, truth[m], b, p)
            curve_path = os.path.join(rep_dir, f"pr_dataset_{m + 1:02d}.csv")
            with open(curve_path, "w") as fh:
                fh.write("tau,recall,precision\n")
                for pt in curve:
                    rec = "" if pt.recall is None else f"{pt.recall:.6g}"
                    prec = "" if pt.precision is None else f"{pt.precision:.6g}"
                    fh.write(f"{pt.tau:.6g},{rec},{prec}\n")
    _write_scores(os.path.join(cfg.out_dir, "scores.csv"), rows)
    print(metrics.format_summary_table(rows))
    return 0


def _write_scores(path, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write("method,dataset,replication,tau,tpr,tnr,tdr\n")
        for r in rows:
            def fmt(v):
                return "" if v is None else f"{v:.6g}"
            fh.write(f"{r['method']},{r['dataset']},"
                     f"{r.get('replication', r.get('rep', ''))},"
                     f"{fmt(r['tau'])},{fmt(r['tpr'])},{fmt(r['tnr'])},"
                     f"{fmt(r['tdr'])}\n")


def cmd_pipeline(cfg, args):
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows = []
    for rep in range(cfg.replications):
        rows += experiment.run_replication(cfg, rep)
        print(f"replication {rep + 1}/{cfg.replications} done")
    _write_scores(os.path.join(cfg.out_dir, "scores.csv"), rows)
    summary = experiment.summarize(rows)
    table = metrics.format_summary_table(summary)
    with open(os.path.join(cfg.out_dir, "summary.txt"), "w") as fh:
        fh.write(table + "\n")
    print(table)
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "features": cmd_features,
    "fit": cmd_fit,
    "ensemble": cmd_ensemble,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="diffnet",
        description="joint differential-network estimation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in _COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__)
        p.add_argument("--config", help="TOML experiment configuration")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--threads", type=int, help="worker count")
        p.add_argument("--out", help="output directory")
        if name in ("features", "fit", "ensemble", "evaluate"):
            p.add_argument("study", help="study directory (or one rep dir)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg, args)
    except Exception as exc:  # stage failure: machine-readable record
        record = {"stage": args.command, "type": type(exc).__name__,
                  "error": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
