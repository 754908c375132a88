"""Pure-Python coordinate-descent kernel (fallback backend).

Same contract as the compiled kernel in `_cdfast`: cyclic sweeps over rows
of the coefficient matrix for the weighted-least-squares subproblem, with
the two-level (elementwise, then group) thresholding update.  The working
residual and coefficients are modified in place.
"""

import numpy as np

NAME = "python"


def _mcp_weight(t, lam, gamma):
    """Derivative of the minimax concave penalty at |t| >= 0."""
    w = lam - t / gamma
    return w if w > 0.0 else 0.0


def cd_sweeps(w_feat, starts, res, weights, beta, hrow, invn,
              lam1g, gamma1, lam2, gamma2, tol, max_sweeps, rows):
    """Run coordinate-descent sweeps until the max coefficient change < tol.

    Parameters
    ----------
    w_feat : (N, d) float64, Fortran order; feature rows stacked by dataset.
    starts : (M+1,) int64 block offsets into the N samples.
    res : (N,) float64 working residual, scaled by the sample weights
        (equals weights * (working response - linear predictor)); updated
        in place.
    weights : (N,) float64 per-sample curvature weights.
    beta : (d, M) float64 coefficients, updated in place.
    hrow : (d,) per-row curvature bound; rows with hrow <= 0 are skipped.
    invn : 1 / N.
    lam1g, gamma1 : group penalty scale (sqrt(M) * lambda1) and concavity.
    lam2, gamma2 : elementwise penalty scale and concavity.
    rows : int64 indices of the coefficient rows to sweep.

    Returns
    -------
    (sweeps_run, last_max_change)
    """
    n_sets = beta.shape[1]
    znew = np.zeros(n_sets)
    max_change = np.inf
    sweeps = 0
    while sweeps < max_sweeps and max_change >= tol:
        sweeps += 1
        max_change = 0.0
        for l in rows:
            h = hrow[l]
            if h <= 0.0:
                continue
            col = w_feat[:, l]
            norm_old_sq = 0.0
            norm_new_sq = 0.0
            for m in range(n_sets):
                b0 = beta[l, m]
                a, b = starts[m], starts[m + 1]
                z = b0 + invn * float(col[a:b] @ res[a:b]) / h
                thr = _mcp_weight(abs(b0), lam2, gamma2) / h
                mag = abs(z) - thr
                znew[m] = (mag if z > 0.0 else -mag) if mag > 0.0 else 0.0
                norm_old_sq += b0 * b0
                norm_new_sq += znew[m] * znew[m]
            gwt = _mcp_weight(np.sqrt(norm_old_sq), lam1g, gamma1)
            if norm_new_sq > 0.0:
                scale = 1.0 - (gwt / h) / np.sqrt(norm_new_sq)
                if scale < 0.0:
                    scale = 0.0
            else:
                scale = 0.0
            for m in range(n_sets):
                new = scale * znew[m]
                delta = new - beta[l, m]
                if delta != 0.0:
                    a, b = starts[m], starts[m + 1]
                    res[a:b] -= delta * col[a:b] * weights[a:b]
                    beta[l, m] = new
                    if abs(delta) > max_change:
                        max_change = abs(delta)
    return sweeps, max_change
