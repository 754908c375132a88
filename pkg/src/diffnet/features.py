"""Edge features: scaled precision entries, Fisher-transformed, vectorized.

A p x p symmetric estimate becomes a length d = p(p-1)/2 feature vector in
row-major upper-triangular order: (1,2), (1,3), ..., (1,p), (2,3), ...
"""

from dataclasses import dataclass

import numpy as np

from .clime import ClimeConfig, estimate_precision

_CLAMP = 1.0 - 1e-6


class EdgeIndexMap:
    """Bijection between feature positions and 1-based node pairs (i < j)."""

    def __init__(self, p):
        if p < 2:
            raise ValueError("need at least two nodes")
        self.p = p
        rows, cols = np.triu_indices(p, k=1)
        self._rows, self._cols = rows, cols
        self.pairs = tuple(zip((rows + 1).tolist(), (cols + 1).tolist()))
        self._pos = {pair: k for k, pair in enumerate(self.pairs)}

    def __len__(self):
        return len(self.pairs)

    def position(self, pair):
        return self._pos[pair]

    def pair(self, position):
        return self.pairs[position]

    def vectorize(self, matrix):
        """Extract the upper triangle of a symmetric matrix in pair order."""
        return np.asarray(matrix)[self._rows, self._cols]

    def labels(self):
        """Column labels 'i_j' for CSV export."""
        return [f"{i}_{j}" for (i, j) in self.pairs]


@dataclass(frozen=True)
class EdgeFeatureVector:
    w: np.ndarray
    index_map: EdgeIndexMap
    group: str
    dataset_id: int


def partial_correlation(omega):
    """Scale a precision-type matrix by its diagonal: D^-1/2 omega D^-1/2.

    Applied literally, so entries can leave [-1, 1] when `omega` is not
    positive definite; callers clamp before the Fisher transform.
    """
    omega = np.asarray(omega, dtype=float)
    diag = np.diag(omega)
    if np.any(diag <= 0):
        raise ValueError("diagonal must be strictly positive")
    inv_root = 1.0 / np.sqrt(diag)
    return omega * inv_root[:, None] * inv_root[None, :]


def fisher_transform(r):
    """Variance-stabilizing map 0.5 * log((1 + r) / (1 - r)); odd in r."""
    r = np.asarray(r, dtype=float)
    if np.any(np.isnan(r)):
        raise ValueError("NaN correlation")
    if np.any(np.abs(r) >= 1.0):
        raise ValueError("|r| must be < 1; clamp near-singular estimates")
    return 0.5 * np.log1p(r) - 0.5 * np.log1p(-r)


def edge_features(omega, index_map=None):
    """Fisher-transformed scaled-precision features of one estimate.

    Off-diagonal scaled entries are clamped to +/-(1 - 1e-6) so that
    near-singular estimates cannot produce infinities.
    """
    p = omega.shape[0]
    if index_map is None:
        index_map = EdgeIndexMap(p)
    r = index_map.vectorize(partial_correlation(omega))
    return fisher_transform(np.clip(r, -_CLAMP, _CLAMP))


def features_from_scan(scan, config=ClimeConfig(), index_map=None):
    """Full per-subject pipeline: covariance, tuned precision, edge features.

    The scan is used as-is; apply whitening beforehand when the temporal
    covariance is known or estimated.
    """
    if index_map is None:
        index_map = EdgeIndexMap(scan.data.shape[0])
    solution = estimate_precision(scan.data, config)
    return EdgeFeatureVector(
        w=edge_features(solution.omega, index_map),
        index_map=index_map,
        group=scan.group,
        dataset_id=scan.dataset_id,
    )
