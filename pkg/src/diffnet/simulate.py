"""Ground-truth generators for the simulation harness.

Builds hub / small-world graph skeletons, fills them into precision-matrix
pairs whose difference has a controlled support, and draws matrix-normal
scans with autoregressive temporal correlation.  All generators are pure
functions of their parameters and the design seed.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _rng

GROUP_CASE = "case"
GROUP_CONTROL = "control"

_PD_EIG_TOL = 1e-10


@dataclass(frozen=True)
class GraphStructure:
    """Undirected graph on nodes 1..p given as a set of (i, j) pairs, i < j."""

    p: int
    edges: frozenset
    kind: str

    def __post_init__(self):
        for (i, j) in self.edges:
            if not (1 <= i < j <= self.p):
                raise ValueError(f"edge {(i, j)} out of range for p={self.p}")

    @property
    def n_edges(self):
        return len(self.edges)


@dataclass(frozen=True)
class PrecisionPair:
    """Case/control spatial precision matrices and their difference.

    `flip_set` holds the sign-flipped positions (both orientations, i != j);
    the off-diagonal support of `delta` is exactly its i < j half.
    """

    omega_x: np.ndarray
    omega_y: np.ndarray
    delta: np.ndarray
    flip_set: frozenset
    rho: float

    def differential_edges(self):
        """Ground-truth edge set {(i, j): delta_ij != 0, i < j}, 1-based."""
        p = self.delta.shape[0]
        return {
            (i + 1, j + 1)
            for i in range(p)
            for j in range(i + 1, p)
            if self.delta[i, j] != 0.0
        }


@dataclass(frozen=True)
class SubjectScan:
    """One spatial x temporal observation with its group and dataset labels."""

    data: np.ndarray           # p x q
    group: str                 # GROUP_CASE or GROUP_CONTROL
    dataset_id: int            # 1-based dataset index
    confounders: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.group not in (GROUP_CASE, GROUP_CONTROL):
            raise ValueError(f"unknown group {self.group!r}")
        if self.data.ndim != 2 or self.data.shape[1] < 2:
            raise ValueError("scan must be a p x q matrix with q >= 2")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("scan contains non-finite entries")


@dataclass(frozen=True)
class StudyDesign:
    """Parameters of one simulated multi-dataset study."""

    M: int
    p: int
    q: int
    n_case: int
    n_control: int
    rho_list: tuple
    structure: str = "hub"               # "hub" or "small_world"
    temporal_rho_case: float = 0.5
    temporal_rho_control: float = 0.6
    seed: int = 0
    share_base: bool = True              # one base graph/fill for all datasets
    hub_groups: int = 5
    sw_neighbors: int = 10
    sw_rewire_prob: float = 0.05

    def __post_init__(self):
        if min(self.M, self.p, self.q, self.n_case, self.n_control) <= 0:
            raise ValueError("all counts must be positive")
        if len(self.rho_list) != self.M:
            raise ValueError("rho_list length must equal M")
        if not all(0.0 < r <= 1.0 for r in self.rho_list):
            raise ValueError("rho values must lie in (0, 1]")
        if self.structure not in ("hub", "small_world"):
            raise ValueError(f"unknown structure {self.structure!r}")


def ar_covariance(q, rho):
    """AR(1) correlation matrix: entry (i, j) equals rho^|i-j|."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if abs(rho) >= 1.0:
        raise ValueError("|rho| must be < 1")
    idx = np.arange(q)
    return rho ** np.abs(idx[:, None] - idx[None, :]) if rho != 0.0 else np.eye(q)


def _blocks(p, n_groups):
    size = p // n_groups
    bounds = [m * size for m in range(n_groups)] + [p]
    return [list(range(bounds[m], bounds[m + 1])) for m in range(n_groups)]


def generate_hub_graph(p, n_groups, rng):
    """Partition 1..p into n_groups blocks, each a star around one hub node.

    When n_groups does not divide p the remainder nodes join the last block.
    The hub of each block is drawn uniformly from its members.
    """
    if n_groups > p or n_groups < 1:
        raise ValueError("need 1 <= n_groups <= p")
    edges = set()
    for block in _blocks(p, n_groups):
        hub = block[int(rng.integers(len(block)))]
        for node in block:
            if node != hub:
                edges.add((min(hub, node) + 1, max(hub, node) + 1))
    return GraphStructure(p=p, edges=frozenset(edges), kind="hub")


def generate_small_world(p, neighbors, rewire_prob, rng):
    """Watts-Strogatz graph: ring lattice with random rewiring.

    Each node starts joined to its `neighbors` nearest ring neighbors; every
    lattice edge (u, v) is then rewired to (u, w) with probability
    `rewire_prob`, w drawn uniformly among non-self, non-duplicate targets.
    The edge count stays p * neighbors / 2.
    """
    if neighbors >= p:
        raise ValueError("neighbors must be < p")
    if neighbors < 2 or neighbors % 2 != 0:
        raise ValueError("neighbors must be even and >= 2")
    if not (0.0 <= rewire_prob <= 1.0):
        raise ValueError("rewire_prob must lie in [0, 1]")
    edges = set()
    for shift in range(1, neighbors // 2 + 1):
        for u in range(p):
            v = (u + shift) % p
            edges.add((min(u, v), max(u, v)))
    for shift in range(1, neighbors // 2 + 1):
        for u in range(p):
            v = (u + shift) % p
            if rng.random() >= rewire_prob:
                continue
            old = (min(u, v), max(u, v))
            if old not in edges:
                continue  # already rewired away by an earlier pass
            degree_u = sum(1 for e in edges if u in e)
            if degree_u >= p - 1:
                continue  # saturated node: keep the lattice edge
            while True:
                w = int(rng.integers(p))
                if w == u:
                    continue
                new = (min(u, w), max(u, w))
                if new not in edges:
                    break
            edges.remove(old)
            edges.add(new)
    return GraphStructure(
        p=p, edges=frozenset((i + 1, j + 1) for (i, j) in edges), kind="small_world"
    )


def fill_precision(graph, rng):
    """Fill graph edges with symmetric random weights, zero elsewhere.

    Magnitudes are uniform on [0.3, 0.5]; each edge's sign is +/- with
    probability 1/2.  The diagonal is left at zero (the positive-definite
    shift happens in make_pair).
    """
    p = graph.p
    omega = np.zeros((p, p))
    for (i, j) in sorted(graph.edges):
        magnitude = rng.uniform(0.3, 0.5)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        omega[i - 1, j - 1] = omega[j - 1, i - 1] = sign * magnitude
    return omega


def make_pair(omega_base, rho):
    """Derive a case/control precision pair by sign-flipping a corner block.

    Entries (i, j) with both indices <= floor(rho * p), i != j, and a nonzero
    base value form the flip set; negating them gives the control matrix.
    Both matrices are then shifted by (|smallest eigenvalue| + 0.5) * I
    independently, and delta is their exact difference.
    """
    omega_base = np.asarray(omega_base, dtype=float)
    p = omega_base.shape[0]
    if omega_base.shape != (p, p) or not np.allclose(omega_base, omega_base.T):
        raise ValueError("omega_base must be square and symmetric")
    if np.any(np.diag(omega_base) != 0.0):
        raise ValueError("omega_base must have a zero diagonal")
    if rho * p < 2:
        warnings.warn("rho * p < 2: the flip set may be empty", stacklevel=2)
    # eps guard: rho * p may sit just below an integer in floating point
    bound = math.floor(rho * p + 1e-9)

    flip = set()
    omega_y = omega_base.copy()
    for i in range(min(bound, p)):
        for j in range(min(bound, p)):
            if i != j and omega_base[i, j] != 0.0:
                flip.add((i + 1, j + 1))
                omega_y[i, j] = -omega_base[i, j]

    def _shift(a):
        lam_min = np.linalg.eigvalsh(a)[0]
        return a + (abs(lam_min) + 0.5) * np.eye(p)

    omega_x = _shift(omega_base)
    omega_y = _shift(omega_y)
    return PrecisionPair(
        omega_x=omega_x,
        omega_y=omega_y,
        delta=omega_x - omega_y,
        flip_set=frozenset(flip),
        rho=float(rho),
    )


def _spd_factor(sigma, name):
    try:
        return np.linalg.cholesky(np.asarray(sigma, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} is not symmetric positive definite") from exc


def sample_matrix_normal(mean, sigma_s, sigma_t, rng):
    """Draw one p x q matrix-normal sample.

    Returns mean + A Z B^T with A A^T = sigma_s, B B^T = sigma_t and Z a
    matrix of i.i.d. standard normals, so vec(sample) has covariance
    sigma_t (x) sigma_s.
    """
    mean = np.asarray(mean, dtype=float)
    a = _spd_factor(sigma_s, "sigma_s")
    b = _spd_factor(sigma_t, "sigma_t")
    z = rng.standard_normal(mean.shape)
    return mean + a @ z @ b.T


def inverse_sqrt_spd(sigma, tol=1e-12):
    """Symmetric inverse square root of an SPD matrix via eigendecomposition."""
    sigma = np.asarray(sigma, dtype=float)
    vals, vecs = np.linalg.eigh(sigma)
    if vals[0] <= tol * max(vals[-1], 1.0):
        raise ValueError("matrix is not positive definite")
    return (vecs / np.sqrt(vals)) @ vecs.T


def whiten(x, sigma_t):
    """Remove temporal correlation: returns x @ sigma_t^{-1/2} (symmetric root)."""
    return np.asarray(x, dtype=float) @ inverse_sqrt_spd(sigma_t)


def _base_structure(design, dataset_index):
    """Graph + filled base precision for one dataset (shared or per-dataset)."""
    key = 0 if design.share_base else dataset_index
    graph_rng = _rng.stream(design.seed, _rng.GRAPH, key)
    if design.structure == "hub":
        graph = generate_hub_graph(design.p, design.hub_groups, graph_rng)
    else:
        graph = generate_small_world(
            design.p, design.sw_neighbors, design.sw_rewire_prob, graph_rng
        )
    fill_rng = _rng.stream(design.seed, _rng.FILL, key)
    return graph, fill_precision(graph, fill_rng)


def generate_study(design):
    """Materialize a full study: scans per dataset plus ground-truth pairs.

    Returns (scans, pairs) where scans is a list of M lists of SubjectScan
    (cases first, then controls) and pairs the per-dataset PrecisionPair.
    Deterministic given the design seed; each subject has its own keyed
    random stream, so generation order does not matter.
    """
    sigma_t_case = ar_covariance(design.q, design.temporal_rho_case)
    sigma_t_control = ar_covariance(design.q, design.temporal_rho_control)
    zero_mean = np.zeros((design.p, design.q))

    scans, pairs = [], []
    shared = _base_structure(design, 0) if design.share_base else None
    for m in range(design.M):
        _, omega_base = shared if design.share_base else _base_structure(design, m)
        pair = make_pair(omega_base, design.rho_list[m])
        pairs.append(pair)
        sigma_s_case = np.linalg.inv(pair.omega_x)
        sigma_s_control = np.linalg.inv(pair.omega_y)
        subjects = []
        for group_code, group, n, sig_s, sig_t in (
            (0, GROUP_CASE, design.n_case, sigma_s_case, sigma_t_case),
            (1, GROUP_CONTROL, design.n_control, sigma_s_control, sigma_t_control),
        ):
            for idx in range(n):
                rng = _rng.stream(design.seed, _rng.SCAN, m, group_code, idx)
                data = sample_matrix_normal(zero_mean, sig_s, sig_t, rng)
                subjects.append(
                    SubjectScan(data=data, group=group, dataset_id=m + 1)
                )
        scans.append(subjects)
    return scans, pairs
