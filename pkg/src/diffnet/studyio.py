"""Study directory format: scan CSVs plus a JSON manifest.

Layout of one replication directory:

    rep_000/
      manifest.json
      dataset_01/case_000.csv, ..., control_029.csv
      dataset_02/...

Scan files are headerless numeric CSVs, p rows by q columns.  The manifest
records the design parameters, the seed, per-scan group labels and
confounders, the temporal AR parameters used (so features can whiten with
the exact temporal covariance), and the ground-truth differential edges
per dataset when the study is simulated.
"""

import json
import os

import numpy as np

from . import simulate

MANIFEST_NAME = "manifest.json"


def write_scan(path, data):
    np.savetxt(path, data, delimiter=",", fmt="%.17g")


def read_scan(path):
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ValueError(f"malformed scan file {path}: {exc}") from exc
    if not np.all(np.isfinite(data)):
        raise ValueError(f"malformed scan file {path}: non-finite entries")
    return data


def write_study(directory, design, scans, pairs=None):
    """Materialize one replication: scan files plus manifest."""
    os.makedirs(directory, exist_ok=True)
    datasets = []
    for m, subjects in enumerate(scans):
        sub = f"dataset_{m + 1:02d}"
        os.makedirs(os.path.join(directory, sub), exist_ok=True)
        counters = {simulate.GROUP_CASE: 0, simulate.GROUP_CONTROL: 0}
        entries = []
        for scan in subjects:
            idx = counters[scan.group]
            counters[scan.group] += 1
            name = f"{scan.group}_{idx:03d}.csv"
            write_scan(os.path.join(directory, sub, name), scan.data)
            entries.append({
                "file": f"{sub}/{name}",
                "group": scan.group,
                "confounders": np.asarray(scan.confounders).tolist(),
            })
        record = {"id": m + 1, "scans": entries}
        if pairs is not None:
            record["truth_edges"] = sorted(
                list(e) for e in pairs[m].differential_edges()
            )
        datasets.append(record)

    manifest = {
        "design": {
            "M": design.M, "p": design.p, "q": design.q,
            "n_case": design.n_case, "n_control": design.n_control,
            "rho_list": list(design.rho_list),
            "structure": design.structure,
            "seed": design.seed,
            "share_base": design.share_base,
            "hub_groups": design.hub_groups,
            "sw_neighbors": design.sw_neighbors,
            "sw_rewire_prob": design.sw_rewire_prob,
        },
        "temporal": {
            "case_rho": design.temporal_rho_case,
            "control_rho": design.temporal_rho_control,
        },
        "datasets": datasets,
    }
    with open(os.path.join(directory, MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return manifest


def read_manifest(directory):
    path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        return json.load(fh)


def load_scans(directory, manifest):
    """Scans per dataset in manifest order, as SubjectScan objects."""
    scans = []
    for record in manifest["datasets"]:
        subjects = []
        for entry in record["scans"]:
            data = read_scan(os.path.join(directory, entry["file"]))
            subjects.append(simulate.SubjectScan(
                data=data,
                group=entry["group"],
                dataset_id=record["id"],
                confounders=np.asarray(entry.get("confounders", []),
                                       dtype=float),
            ))
        scans.append(subjects)
    return scans


def truth_edges(manifest):
    """Per-dataset ground-truth edge sets, or None for real data."""
    out = []
    for record in manifest["datasets"]:
        if "truth_edges" not in record:
            return None
        out.append({(int(i), int(j)) for i, j in record["truth_edges"]})
    return out


def estimate_ar_parameter(data, cap=0.95):
    """Lag-1 autocorrelation of the row-demeaned scan, for whitening real
    data without a known temporal covariance."""
    centered = data - data.mean(axis=1, keepdims=True)
    num = (centered[:, :-1] * centered[:, 1:]).sum()
    den = (centered ** 2).sum()
    if den <= 0:
        return 0.0
    return float(np.clip(num / den, -cap, cap))


# ---------------------------------------------------------------------------
# feature tables (one CSV per dataset: subjects x edge features)


def write_features(path, dataset_id, labels, confounders, features, pairs):
    """Feature CSV: group, dataset, confounders, then one column per edge."""
    n, n_conf = confounders.shape
    header = (["group", "dataset"]
              + [f"conf_{i + 1}" for i in range(n_conf)]
              + [f"{i}_{j}" for (i, j) in pairs])
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(n):
            group = (simulate.GROUP_CASE if labels[k] == 1
                     else simulate.GROUP_CONTROL)
            cells = [group, str(dataset_id)]
            cells += [f"{v:.17g}" for v in confounders[k]]
            cells += [f"{v:.17g}" for v in features[k]]
            fh.write(",".join(cells) + "\n")


def read_features(path):
    """Inverse of write_features; returns (dataset_id, labels, confounders,
    features, pairs)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    n_conf = sum(1 for name in header if name.startswith("conf_"))
    pair_names = header[2 + n_conf:]
    pairs = tuple(tuple(int(v) for v in name.split("_")) for name in pair_names)
    labels = np.array([1 if r[0] == simulate.GROUP_CASE else 0 for r in rows])
    dataset_id = int(rows[0][1]) if rows else 0
    confounders = np.array(
        [[float(v) for v in r[2:2 + n_conf]] for r in rows]
    ).reshape(len(rows), n_conf)
    features = np.array([[float(v) for v in r[2 + n_conf:]] for r in rows])
    return dataset_id, labels, confounders, features, pairs
