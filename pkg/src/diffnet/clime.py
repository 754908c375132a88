"""Per-subject sparse precision estimation.

The estimator solves, column by column, the constrained-L1 program

    min ||w||_1   s.t.   ||sigma_hat @ w - e_j||_inf <= lam,

assembles the columns, and symmetrizes by keeping the smaller-magnitude
member of each off-diagonal pair.  The tuning parameter is chosen on a
grid so that the achieved partial-correlation edge density is closest to a
target level (0.5 by default).
"""

from dataclasses import dataclass, field

import numpy as np

from ._lp import LPSolverError, solve_l1_inf_batch

# cap on instances per stacked solve: n * p^2 doubles of workspace
_BATCH_DOUBLES = 8e6


class ClimeSolverError(LPSolverError):
    """A column program failed (infeasible or not converged)."""

    def __init__(self, columns, lam):
        self.columns = list(columns)
        self.lam = lam
        super().__init__(
            f"precision column solve failed at lam={lam:g} "
            f"for column(s) {self.columns}"
        )


@dataclass(frozen=True)
class ClimeConfig:
    """Settings for per-subject precision estimation and tuning."""

    target_density: float = 0.5
    grid_size: int = 20
    grid_lo: float = 0.01      # grid spans [grid_lo, grid_hi] * max|sigma_hat|
    grid_hi: float = 1.0
    zero_tol: float = 1e-8
    solver_tol: float = 1e-9
    fixed_lambda: float | None = None   # bypass tuning when set


@dataclass
class ClimeSolution:
    """Symmetrized precision estimate for one subject at one lambda.

    `feasibility_gap` is the max-norm residual of the column solves before
    symmetrization (symmetrization only shrinks magnitudes).
    """

    omega: np.ndarray
    lam: float
    feasibility_gap: float


@dataclass
class TuningResult:
    """Density-matching tuning trace over a decreasing lambda grid.

    `densities[i]` is None when the solve at `lambda_grid[i]` failed.
    """

    lambda_grid: np.ndarray
    densities: list
    chosen: int
    solution: ClimeSolution = field(repr=False)


def sample_covariance(x):
    """Spatial sample covariance of a p x q scan (columns are time points)."""
    x = np.asarray(x, dtype=float)
    p, q = x.shape
    if q < 2:
        raise ValueError("need at least two time points")
    centered = x - x.mean(axis=1, keepdims=True)
    return centered @ centered.T / (q - 1)


def _symmetrize_min(b):
    """Keep the smaller-magnitude entry of each off-diagonal pair.

    Ties keep the upper-triangular (i < j) entry, applied to both positions.
    """
    upper = np.triu_indices(b.shape[0], k=1)
    up, lo = b[upper], b.T[upper]
    vals = np.where(np.abs(up) <= np.abs(lo), up, lo)
    out = np.zeros_like(b)
    out[upper] = vals
    out = out + out.T
    out[np.diag_indices(b.shape[0])] = np.diag(b)
    return out


def _truncate_noise(omega):
    """Zero out entries below the interior-point noise floor.

    Interior solutions carry O(tolerance) dust in positions that a vertex
    solution has exactly zero; it sits orders of magnitude below any real
    edge weight.
    """
    floor = 1e-7 * (1.0 + np.abs(omega).max())
    out = omega.copy()
    out[np.abs(out) < floor] = 0.0
    return out


def _solve_batch(sigma_hat, targets, lams, tol, accept_factor=10.0):
    cap = max(1, int(_BATCH_DOUBLES / max(sigma_hat.shape[0] ** 2, 1)))
    outs, oks, infs = [], [], []
    for lo in range(0, targets.shape[0], cap):
        hi = lo + cap
        w, info = solve_l1_inf_batch(
            sigma_hat, targets[lo:hi], lams[lo:hi], tol=tol,
            accept_factor=accept_factor,
        )
        outs.append(w)
        oks.append(info.converged)
        infs.append(info.infeasible)
    return np.concatenate(outs), np.concatenate(oks), np.concatenate(infs)


def clime_solve(sigma_hat, lam, solver_tol=1e-9):
    """Estimate a symmetric sparse precision matrix at a fixed lambda.

    Raises ClimeSolverError naming the failing column(s) when any column
    program cannot be solved.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    if lam <= 0:
        raise ValueError("lam must be positive")
    p = sigma_hat.shape[0]
    if sigma_hat.shape != (p, p) or not np.allclose(sigma_hat, sigma_hat.T):
        raise ValueError("sigma_hat must be square and symmetric")

    cols, ok, _ = _solve_batch(sigma_hat, np.eye(p), np.full(p, float(lam)),
                               solver_tol)
    if not ok.all():
        raise ClimeSolverError(np.where(~ok)[0], lam)
    raw = cols.T  # column j of the estimate is the j-th instance solution
    gap = np.abs(sigma_hat @ raw - np.eye(p)).max()
    omega = _truncate_noise(_symmetrize_min(raw))
    return ClimeSolution(omega=omega, lam=float(lam),
                         feasibility_gap=float(gap))


def default_lambda_grid(sigma_hat, config=ClimeConfig()):
    """Decreasing log-spaced grid scaled by the covariance magnitude."""
    top = np.abs(np.asarray(sigma_hat)).max()
    if top <= 0:
        raise ValueError("sigma_hat has no signal")
    return np.geomspace(config.grid_hi * top, config.grid_lo * top,
                        config.grid_size)


def edge_density(omega, zero_tol=1e-8):
    """Fraction of off-diagonal pairs with |partial correlation| > zero_tol.

    Returns None when the diagonal is not strictly positive (the scaled
    matrix is undefined there).
    """
    diag = np.diag(omega)
    if np.any(diag <= 0):
        return None
    inv_root = 1.0 / np.sqrt(diag)
    r = omega * inv_root[:, None] * inv_root[None, :]
    upper = np.triu_indices(omega.shape[0], k=1)
    return float(np.mean(np.abs(r[upper]) > zero_tol))


def select_lambda_dens(sigma_hat, config=ClimeConfig(), grid=None):
    """Tune lambda so the achieved edge density is closest to the target.

    Works down the decreasing grid in stacked chunks and stops early once
    the density has clearly overshot the target (density grows as lambda
    shrinks, so deeper values cannot match better); skipped entries report
    density None, like failed (infeasible) ones.  Ties in the density
    match go to the larger (sparser) lambda.  Raises ClimeSolverError when
    every grid value fails.
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    p = sigma_hat.shape[0]
    if grid is None:
        grid = default_lambda_grid(sigma_hat, config)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be nonempty and positive")
    if np.any(np.diff(grid) >= 0):
        raise ValueError("grid must be strictly decreasing")

    eye = np.eye(p)
    densities = [None] * grid.size
    candidates = []
    chunk = 4
    for lo in range(0, grid.size, chunk):
        part = grid[lo:lo + chunk]
        targets = np.tile(eye, (part.size, 1))
        lams = np.repeat(part, p)
        # the tuning path tolerates loosely certified columns: the
        # min-magnitude symmetrization repairs one-sided noise, and a
        # skipped lambda only shifts the density match
        cols, ok, infeasible = _solve_batch(
            sigma_hat, targets, lams, config.solver_tol, accept_factor=1e3
        )
        stop = False
        for i, lam in enumerate(part):
            if infeasible[i * p:(i + 1) * p].any():
                # feasibility shrinks with lambda: the rest of the grid
                # is infeasible too
                stop = True
            if not ok[i * p:(i + 1) * p].all():
                continue
            raw = cols[i * p:(i + 1) * p].T
            omega = _truncate_noise(_symmetrize_min(raw))
            dens = edge_density(omega, config.zero_tol)
            densities[lo + i] = dens
            if dens is not None:
                candidates.append((lo + i, lam, raw, omega, dens))
                if dens >= config.target_density + 0.2:
                    stop = True
        if stop:
            break
    if not candidates:
        raise ClimeSolverError(range(p), float(grid[-1]))

    # grid is decreasing, so the first minimizer is the largest lambda
    best = min(candidates, key=lambda c: abs(c[4] - config.target_density))
    i, lam, raw, omega, _ = best
    gap = np.abs(sigma_hat @ raw - eye).max()
    solution = ClimeSolution(omega=omega, lam=float(lam),
                             feasibility_gap=float(gap))
    return TuningResult(lambda_grid=grid, densities=densities, chosen=i,
                        solution=solution)


def estimate_precision(x, config=ClimeConfig()):
    """Covariance + tuned (or fixed-lambda) precision estimate for one scan."""
    sigma_hat = sample_covariance(x)
    if config.fixed_lambda is not None:
        return clime_solve(sigma_hat, config.fixed_lambda, config.solver_tol)
    return select_lambda_dens(sigma_hat, config).solution
