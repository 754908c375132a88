"""Batched interior-point solver for the constrained-L1 column programs.

Each instance is the linear program

    min ||w||_1   subject to   ||sigma @ w - target||_inf <= lam

written with auxiliary bound variables t >= |w| as

    min c'x  over x = (w, t),  A x <= b,  with
    A rows:  w - t,  -w - t,  sigma @ w,  -sigma @ w
    b      =  0,      0,       lam + target,  lam - target
    c      = (0, 1).

All instances share the constraint blocks (only the right-hand side
differs), so a whole grid of (column, lambda) programs runs as one stacked
predictor-corrector iteration.  The solver uses the homogeneous self-dual
embedding: every residual contracts at the common step rate, and
infeasible instances (singular `sigma` at small `lam`) are certified
through the tau/kappa pair instead of diverging.  The normal equations
reduce to one p x p SPD system per instance via a Schur complement on the
bound block.

Nearly degenerate programs (lam close to the feasibility threshold) hit a
floating-point accuracy floor around 1e-7 in the dual residual; the solver
tracks the best iterate seen and accepts it within `accept_factor * tol`.
"""

from dataclasses import dataclass

import numpy as np

_TINY = 1e-300
_MU_FLOOR = 1e-17


class LPSolverError(RuntimeError):
    """An instance failed to converge."""


@dataclass
class LPInfo:
    converged: np.ndarray      # (n,) bool
    infeasible: np.ndarray     # (n,) bool: certified primal-infeasible
    iterations: int
    error: np.ndarray          # (n,) best max(pinf, dinf, gap) seen


def _constraint_apply(sig, w, t):
    """Stack A x for the four row blocks."""
    sw = w @ sig
    return np.concatenate([w - t, -w - t, sw, -sw], axis=1)


def _adjoint_apply(sig, z, p):
    """A^T z, returned as its w block and t block."""
    z1, z2, z3, z4 = (z[:, i * p:(i + 1) * p] for i in range(4))
    return z1 - z2 + (z3 - z4) @ sig, -z1 - z2


def _max_step(*pairs):
    """Largest common step keeping every v + a*dv nonnegative (capped)."""
    best = None
    with np.errstate(divide="ignore", invalid="ignore"):
        for v, dv in pairs:
            ratios = np.where(dv < 0, -v / dv, np.inf)
            cur = ratios.min(axis=1) if ratios.ndim == 2 else ratios
            best = cur if best is None else np.minimum(best, cur)
    return np.minimum(best, 10.0)


class _Newton:
    """Solves the reduced step equations for one iteration.

    The normal matrix M = A' diag(z/s) A over x = (w, t) is eliminated to a
    p x p Schur system on the w block; the stacked factor data is reused
    for the shared direction u and both Mehrotra directions.
    """

    def __init__(self, sig, dinv, p):
        self.sig = sig
        self.p = p
        d1, d2, d3, d4 = (dinv[:, i * p:(i + 1) * p] for i in range(4))
        self.dsum = d1 + d2
        self.ratio = (d2 - d1) / self.dsum
        self.dd = d2 - d1
        schur = (sig[None, :, :] * (d3 + d4)[:, None, :]) @ sig
        bound = 4.0 * d1 * d2 / self.dsum
        diag_idx = np.arange(p)
        reg = 1e-12 * (1.0 + schur[:, diag_idx, diag_idx].max(
            axis=1, keepdims=True))
        schur[:, diag_idx, diag_idx] += bound + reg
        self.schur = schur

    def solve(self, rhs_w, rhs_t):
        """Solve M dx = rhs; returns (dw, dt, ok_mask).

        Singular instances (diverging infeasible programs) get zero
        directions and a False mask entry instead of failing the batch.
        """
        rhs = rhs_w - self.ratio * rhs_t
        try:
            dw = np.linalg.solve(self.schur, rhs[:, :, None])[:, :, 0]
            ok = None
        except np.linalg.LinAlgError:
            n = self.schur.shape[0]
            dw = np.zeros_like(rhs)
            ok = np.ones(n, dtype=bool)
            for i in range(n):
                try:
                    dw[i] = np.linalg.solve(self.schur[i], rhs[i])
                except np.linalg.LinAlgError:
                    ok[i] = False
        dt = (rhs_t - self.dd * dw) / self.dsum
        return dw, dt, ok


def solve_l1_inf_batch(sigma, targets, lams, tol=1e-8, max_iter=100,
                       accept_factor=10.0):
    """Solve the batched programs; returns (w, LPInfo).

    Parameters
    ----------
    sigma : (p, p) symmetric matrix shared by every instance.
    targets : (n, p) right-hand-side vectors (unit vectors for precision
        columns).
    lams : (n,) positive residual bounds.
    tol : target for max(primal, dual, gap) relative errors.
    accept_factor : degenerate instances stuck at the accuracy floor are
        still accepted within accept_factor * tol.
    """
    sigma = np.asarray(sigma, dtype=float)
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    lams = np.asarray(lams, dtype=float).reshape(-1)
    n, p = targets.shape
    if sigma.shape != (p, p):
        raise ValueError("sigma shape does not match targets")
    if lams.shape != (n,) or np.any(lams <= 0):
        raise ValueError("need one positive lam per instance")

    scale = np.abs(sigma).max()
    if scale == 0.0 or not np.isfinite(scale):
        raise ValueError("sigma must be finite and nonzero")
    sig = sigma / scale

    lam_col = lams[:, None]
    b = np.concatenate(
        [np.zeros((n, 2 * p)), lam_col + targets, lam_col - targets], axis=1
    )
    m_rows = 4 * p

    # homogeneous start: complementary pairs at one
    w = np.zeros((n, p))
    t = np.ones((n, p))
    s = np.ones((n, m_rows))
    z = np.ones((n, m_rows))
    tau = np.ones(n)
    kap = np.ones(n)

    converged = np.zeros(n, dtype=bool)
    infeasible = np.zeros(n, dtype=bool)
    best_err = np.full(n, np.inf)
    w_out, t_out = w.copy(), t.copy()
    b_scale = 1.0 + np.abs(b).max(axis=1)

    active = np.arange(n)
    it = 0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        while active.size and it < max_iter:
            it += 1
            wa, ta = w[active], t[active]
            sa, za, ba = s[active], z[active], b[active]
            taua, kapa = tau[active], kap[active]

            # residuals of the self-dual system
            at_w, at_t = _adjoint_apply(sig, za, p)
            rx_w = -at_w                              # c_w = 0
            rx_t = -at_t - taua[:, None]              # c_t = 1
            rz = _constraint_apply(sig, wa, ta) - ba * taua[:, None] + sa
            obj_p = ta.sum(axis=1)                    # c'x
            obj_d = (ba * za).sum(axis=1)             # b'z
            rt = obj_p + obj_d + kapa
            mua = ((sa * za).sum(axis=1) + taua * kapa) / (m_rows + 1)

            # errors of the tau-scaled candidate; the dual residual is
            # relative to the dual magnitude (degenerate programs have
            # large multipliers)
            cur_pinf = np.abs(rz).max(axis=1) / taua / b_scale[active]
            cur_dinf = np.maximum(np.abs(rx_w).max(axis=1),
                                  np.abs(rx_t).max(axis=1)) / taua \
                / (2.0 + za.max(axis=1) / taua)
            gap = (sa * za).sum(axis=1) / taua ** 2 / m_rows \
                / (1.0 + np.abs(obj_p / taua))
            err = np.maximum(np.maximum(cur_pinf, cur_dinf), gap)

            better = err < best_err[active]
            if better.any():
                hit = active[better]
                best_err[hit] = err[better]
                w_out[hit] = wa[better] / taua[better][:, None]
                t_out[hit] = ta[better] / taua[better][:, None]

            done = best_err[active] < tol
            # tau -> 0 with kappa bounded away certifies infeasibility
            infeas = (taua < 1e-10) | ((mua < 1e-12) & (taua < 1e-4 * kapa))
            # at the numerical floor nothing further can improve
            floored = (mua < _MU_FLOOR) | ~np.isfinite(mua) \
                | (za.max(axis=1) / np.maximum(sa.min(axis=1), _TINY) > 1e18)
            drop = done | infeas | floored
            if drop.any():
                accept = drop & (best_err[active] < accept_factor * tol)
                converged[active[accept]] = True
                infeasible[active[infeas & ~accept]] = True
                active = active[~drop]
                if not active.size:
                    break
                keep = ~drop
                wa, ta, sa, za, ba = (a[keep] for a in (wa, ta, sa, za, ba))
                taua, kapa = taua[keep], kapa[keep]
                rx_w, rx_t, rz, rt = (a[keep] for a in (rx_w, rx_t, rz, rt))
                mua, cur_pinf, cur_dinf = mua[keep], cur_pinf[keep], cur_dinf[keep]

            dinv = za / np.maximum(sa, _TINY)
            nt = _Newton(sig, dinv, p)
            singular = np.zeros(active.size, dtype=bool)

            # direction shared by both solves: u = M^-1 (A' D^-1 b - c)
            ab_w, ab_t = _adjoint_apply(sig, dinv * ba, p)
            u_w, u_t, ok = nt.solve(ab_w, ab_t - 1.0)
            if ok is not None:
                singular |= ~ok
            au = _constraint_apply(sig, u_w, u_t)
            uz = dinv * (au - ba)
            bracket = (u_t.sum(axis=1) + (ba * uz).sum(axis=1)
                       - kapa / np.maximum(taua, _TINY))

            def direction(rc, rck):
                q2 = -rz - rc / np.maximum(za, _TINY)
                aq_w, aq_t = _adjoint_apply(sig, dinv * q2, p)
                v_w, v_t, ok = nt.solve(aq_w + rx_w, aq_t + rx_t)
                av = _constraint_apply(sig, v_w, v_t)
                vz = dinv * (av - q2)
                num = (rt + v_t.sum(axis=1) + (ba * vz).sum(axis=1)
                       + rck / np.maximum(taua, _TINY))
                dtau = -num / bracket
                dw = dtau[:, None] * u_w + v_w
                dt = dtau[:, None] * u_t + v_t
                dz = dtau[:, None] * uz + vz
                ds = (rc - sa * dz) / np.maximum(za, _TINY)
                dkap = (rck - kapa * dtau) / np.maximum(taua, _TINY)
                return dw, dt, ds, dz, dtau, dkap, ok

            dw_a, dt_a, ds_a, dz_a, dtau_a, dkap_a, ok = \
                direction(-sa * za, -taua * kapa)
            if ok is not None:
                singular |= ~ok
            alpha = np.minimum(
                _max_step((sa, ds_a), (za, dz_a), (taua, dtau_a),
                          (kapa, dkap_a)),
                1.0,
            )
            mu_aff = (((sa + alpha[:, None] * ds_a)
                       * (za + alpha[:, None] * dz_a)).sum(axis=1)
                      + (taua + alpha * dtau_a) * (kapa + alpha * dkap_a)) \
                / (m_rows + 1)
            gamma = np.clip((mu_aff / np.maximum(mua, _TINY)) ** 3, 1e-8, 1.0)
            # keep the gap from racing ahead of the residuals, which leaves
            # degenerate instances thrashing in float noise
            lagging = (mua < 0.01 * np.maximum(cur_pinf, cur_dinf)) \
                & (taua > 0.01 * kapa)
            gamma = np.where(lagging, np.maximum(gamma, 0.9), gamma)

            dw, dt, ds, dz, dtau, dkap, ok = direction(
                gamma[:, None] * mua[:, None] - sa * za - ds_a * dz_a,
                gamma * mua - taua * kapa - dtau_a * dkap_a,
            )
            if ok is not None:
                singular |= ~ok
            frac = np.where(mua < 1e-8, 0.9999, 0.99)

            def step_len(ds, dz, dtau, dkap):
                return np.minimum(
                    frac * _max_step((sa, ds), (za, dz), (taua, dtau),
                                     (kapa, dkap)),
                    1.0,
                )

            alpha = step_len(ds, dz, dtau, dkap)
            # extra centrality correctors: push outlier complementarity
            # products toward the center, which unblocks short steps on
            # degenerate instances
            for _ in range(2):
                if alpha.min() > 0.8:
                    break
                a_try = np.minimum(1.2 * alpha + 0.1, 1.0)[:, None]
                prod = (sa + a_try * ds) * (za + a_try * dz)
                target = np.clip(prod, 0.1 * gamma[:, None] * mua[:, None],
                                 10.0 * gamma[:, None] * mua[:, None]) - prod
                prod_tk = (taua + a_try[:, 0] * dtau) \
                    * (kapa + a_try[:, 0] * dkap)
                target_tk = np.clip(prod_tk, 0.1 * gamma * mua,
                                    10.0 * gamma * mua) - prod_tk
                dw2, dt2, ds2, dz2, dtau2, dkap2, ok = direction(
                    gamma[:, None] * mua[:, None] - sa * za - ds_a * dz_a
                    + target,
                    gamma * mua - taua * kapa - dtau_a * dkap_a + target_tk,
                )
                if ok is not None:
                    singular |= ~ok
                alpha2 = step_len(ds2, dz2, dtau2, dkap2)
                gain = alpha2 > 1.01 * alpha
                if not gain.any():
                    break
                for cur, new in ((dw, dw2), (dt, dt2), (ds, ds2), (dz, dz2)):
                    cur[gain] = new[gain]
                dtau[gain], dkap[gain] = dtau2[gain], dkap2[gain]
                alpha = np.where(gain, alpha2, alpha)

            alpha = alpha[:, None]
            alpha[singular] = 0.0  # evicted below; do not move them

            w[active] = wa + alpha * dw
            t[active] = ta + alpha * dt
            s[active] = np.maximum(sa + alpha * ds, _TINY)
            z[active] = np.maximum(za + alpha * dz, _TINY)
            tau[active] = np.maximum(taua + alpha[:, 0] * dtau, _TINY)
            kap[active] = np.maximum(kapa + alpha[:, 0] * dkap, _TINY)

            if singular.any():
                # near-optimal iterates are accepted; the rest report failed
                accept = singular & (best_err[active] < accept_factor * tol)
                converged[active[accept]] = True
                active = active[~singular]

    if active.size:
        # iteration budget exhausted: accept near-misses
        accept = best_err[active] < accept_factor * tol
        converged[active[accept]] = True

    info = LPInfo(converged=converged, infeasible=infeasible, iterations=it,
                  error=best_err)
    return w_out / scale, info
