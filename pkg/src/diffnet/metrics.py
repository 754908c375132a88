"""Support-recovery scoring: TPR/TNR/TDR, precision-recall curves, and
threshold selection.

All edge sets are sets of 1-based pairs (i, j) with i < j, scored over the
d = p(p-1)/2 upper-triangular positions.  A rate whose denominator is zero
is reported as None (explicitly undefined), never as NaN.
"""

from dataclasses import dataclass
from typing import NamedTuple


class MetricsError(ValueError):
    """Raised when a score is requested that is undefined for the inputs."""


class PRPoint(NamedTuple):
    tau: float
    recall: float          # TPR; None when truth is empty
    precision: float       # TDR; None when nothing is selected


@dataclass(frozen=True)
class RecoveryScore:
    """Counts and rates of a recovered edge set against the truth.

    Rates are None when their denominator is zero.
    """

    tp: int
    fp: int
    tn: int
    fn: int
    tpr: float | None
    tnr: float | None
    tdr: float | None


def _check_pairs(pairs, p, name):
    for (i, j) in pairs:
        if not (1 <= i < j <= p):
            raise MetricsError(f"{name} contains invalid pair {(i, j)} for p={p}")


def score_support(truth, estimate, p):
    """Score an estimated edge set against the true one.

    Parameters
    ----------
    truth, estimate : iterable of (i, j) pairs, 1-based, i < j.
    p : node count; the universe has p(p-1)/2 positions.

    Returns
    -------
    RecoveryScore with counts and TPR/TNR/TDR (None where undefined).
    """
    truth = set(truth)
    estimate = set(estimate)
    _check_pairs(truth, p, "truth")
    _check_pairs(estimate, p, "estimate")
    d = p * (p - 1) // 2
    tp = len(truth & estimate)
    fp = len(estimate - truth)
    fn = len(truth - estimate)
    tn = d - tp - fp - fn
    tpr = tp / (tp + fn) if (tp + fn) > 0 else None
    tnr = tn / (tn + fp) if (tn + fp) > 0 else None
    tdr = tp / (tp + fp) if (tp + fp) > 0 else None
    return RecoveryScore(tp=tp, fp=fp, tn=tn, fn=fn, tpr=tpr, tnr=tnr, tdr=tdr)


def _tau_grid(n_replicates):
    return [k / n_replicates for k in range(n_replicates)]


def pr_curve(psi_column, pairs, truth, n_replicates, p):
    """Precision-recall points over the bootstrap threshold grid.

    Parameters
    ----------
    psi_column : sequence of inclusion frequencies, one per edge position.
    pairs : the (i, j) pair for each position of `psi_column`.
    truth : true edge set.
    n_replicates : B; the grid is tau in {0, 1/B, ..., (B-1)/B}.
    p : node count.

    Returns
    -------
    list of PRPoint, one per grid tau.  Recall is non-increasing in tau.
    """
    if len(psi_column) != len(pairs):
        raise MetricsError("psi_column and pairs length mismatch")
    points = []
    for tau in _tau_grid(n_replicates):
        est = {pair for pair, w in zip(pairs, psi_column) if w > tau}
        s = score_support(truth, est, p)
        points.append(PRPoint(tau=tau, recall=s.tpr, precision=s.tdr))
    return points


def select_tau_max_tpr_tdr(psi_column, pairs, truth, n_replicates, p):
    """Pick the grid threshold maximizing TPR + TDR; ties go to larger tau.

    Raises MetricsError when TPR + TDR is undefined at every grid point
    (e.g. empty truth).
    """
    best_tau = None
    best_val = -1.0
    for point in pr_curve(psi_column, pairs, truth, n_replicates, p):
        if point.recall is None or point.precision is None:
            continue
        val = point.recall + point.precision
        if val >= best_val:  # >= so ties move to larger tau
            best_val = val
            best_tau = point.tau
    if best_tau is None:
        raise MetricsError("TPR + TDR undefined at every threshold")
    return best_tau


def format_summary_table(rows):
    """Render per-method, per-dataset rates as an aligned text table.

    `rows` is a list of dicts with keys: method, dataset, tpr, tnr, tdr
    (rates as fractions or None).  Rates print as percentages.
    """

    def pct(x):
        return "  n/a" if x is None else f"{100.0 * x:5.1f}"

    lines = [f"{'Method':<14}{'Dataset':>8}{'TPR':>8}{'TNR':>8}{'TDR':>8}"]
    for r in rows:
        lines.append(
            f"{r['method']:<14}{r['dataset']:>8}"
            f"{pct(r['tpr']):>8}{pct(r['tnr']):>8}{pct(r['tdr']):>8}"
        )
    return "\n".join(lines)
