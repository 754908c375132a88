import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_logit_design(seed, n_datasets=3, n=40, d=4, n_conf=1,
                        signal=0.4):
    """Random JointDesign with a mild (usually non-separable) signal."""
    from diffnet.sgmcp import JointDesign

    r = np.random.default_rng(seed)
    feats, confs, labs = [], [], []
    for _ in range(n_datasets):
        w = r.standard_normal((n, d))
        q = r.standard_normal((n, n_conf))
        u = w @ r.normal(0.0, signal, d) + 0.3 * q.sum(axis=1)
        z = (r.random(n) < 1.0 / (1.0 + np.exp(-u))).astype(int)
        if z.min() == z.max():
            z[0] = 1 - z[0]
        feats.append(w)
        confs.append(q)
        labs.append(z)
    return JointDesign(feats, confs, labs)


def newton_logistic_oracle(x_mat, z, max_iter=300, tol=1e-12):
    """Damped-Newton logistic regression on an explicit design matrix."""
    n = len(z)
    coef = np.zeros(x_mat.shape[1])
    for _ in range(max_iter):
        u = x_mat @ coef
        pr = 1.0 / (1.0 + np.exp(-np.clip(u, -500, 500)))
        grad = x_mat.T @ (pr - z) / n
        if np.abs(grad).max() < tol:
            break
        hess = (x_mat * (pr * (1 - pr))[:, None]).T @ x_mat / n
        hess[np.diag_indices_from(hess)] += 1e-12
        step = np.linalg.solve(hess, grad)
        loss0 = np.mean(np.logaddexp(0.0, u) - z * u)
        alpha = 1.0
        while alpha > 1e-12:
            cand = coef - alpha * step
            u_c = x_mat @ cand
            if np.mean(np.logaddexp(0.0, u_c) - z * u_c) <= loss0 + 1e-15:
                coef = cand
                break
            alpha *= 0.5
        else:
            break
    return coef
