"""Graphs, configurations, frameworks and the first-order geometry on them.

Vertices are 0-based indices ``0..v-1`` throughout the Python API; the text
document format in :mod:`unirigid.document` maps human labels onto them.
Edges are stored normalized as ``(i, j)`` with ``i < j`` and sorted
lexicographically, and that order is the row order of the rigidity matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import orthogonal_procrustes
from scipy.spatial.distance import pdist

from .errors import DegenerateSpan, DimensionMismatch, IncompatibleDistances, InvalidInput

Edge = tuple[int, int]


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds.

    ``zero_rel`` decides when a singular value or eigenvalue counts as zero,
    relative to the largest one. ``geom_abs`` is the absolute tolerance used
    for coordinate, distance and residual agreement.
    """

    zero_rel: float = 1e-9
    geom_abs: float = 1e-8

    def __post_init__(self):
        for name in ("zero_rel", "geom_abs"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise InvalidInput(f"{name} must lie in (0, 1), got {value!r}")


DEFAULT_TOL = Tolerances()


def normalize_edge(i: int, j: int) -> Edge:
    i, j = int(i), int(j)
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    v: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if int(self.v) != self.v or self.v < 1:
            raise InvalidInput(f"vertex count must be a positive integer, got {self.v!r}")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise InvalidInput(f"self-loop at vertex {i}")
            e = normalize_edge(i, j)
            if not (0 <= e[0] and e[1] < self.v):
                raise InvalidInput(f"edge {e} has an endpoint outside 0..{self.v - 1}")
            if e in seen:
                raise InvalidInput(f"duplicate edge {e}")
            seen.add(e)
        object.__setattr__(self, "v", int(self.v))
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @classmethod
    def complete(cls, v: int) -> "Graph":
        return cls(v, tuple(combinations(range(v), 2)))

    @property
    def e(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: k for k, e in enumerate(self.edges)}

    def has_edge(self, i: int, j: int) -> bool:
        return normalize_edge(i, j) in self.edge_index

    def is_complete(self) -> bool:
        return self.e == self.v * (self.v - 1) // 2

    def with_edges(self, extra: Iterable[Edge]) -> "Graph":
        return Graph(self.v, self.edges + tuple(normalize_edge(*e) for e in extra))

    def without_edges(self, removed: Iterable[Edge]) -> "Graph":
        drop = {normalize_edge(*e) for e in removed}
        return Graph(self.v, tuple(e for e in self.edges if e not in drop))

    def neighbors(self, i: int) -> list[int]:
        return [b if a == i else a for a, b in self.edges if i in (a, b)]


@dataclass(frozen=True, eq=False)
class Configuration:
    """``v`` points in R^d stored as a read-only ``(v, d)`` array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 1 or pts.shape[0] < 1:
            raise InvalidInput(f"points must be a non-empty (v, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInput("configuration contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def v(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def bordered(self) -> np.ndarray:
        """The (d+1) x v matrix of coordinates with a row of ones appended."""
        return np.vstack([self.points.T, np.ones(self.v)])


@dataclass(frozen=True, eq=False)
class Framework:
    graph: Graph
    config: Configuration

    def __post_init__(self):
        if not isinstance(self.config, Configuration):
            object.__setattr__(self, "config", Configuration(self.config))
        if self.graph.v != self.config.v:
            raise DimensionMismatch(
                f"graph has {self.graph.v} vertices but configuration has {self.config.v} points"
            )

    @property
    def v(self) -> int:
        return self.graph.v

    @property
    def d(self) -> int:
        return self.config.d

    @property
    def points(self) -> np.ndarray:
        return self.config.points

    def with_graph(self, graph: Graph) -> "Framework":
        return Framework(graph, self.config)


@dataclass(frozen=True, eq=False)
class RigidityMatrix:
    matrix: np.ndarray
    edge_order: tuple[Edge, ...]
    d: int

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]


def numerical_rank(singular_values: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> int:
    """Count singular values above ``zero_rel`` times the largest one."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0:
        return 0
    smax = float(np.max(s))
    if smax == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.zero_rel * smax))


def edge_function(fw: Framework) -> np.ndarray:
    """Half squared edge lengths, in edge order."""
    if fw.graph.e == 0:
        return np.zeros(0)
    idx = np.array(fw.graph.edges)
    diff = fw.points[idx[:, 0]] - fw.points[idx[:, 1]]
    return 0.5 * np.einsum("ij,ij->i", diff, diff)


def edge_row(points: np.ndarray, i: int, j: int) -> np.ndarray:
    """Rigidity-matrix row of edge {i, j}: p_i - p_j at block i, p_j - p_i at block j."""
    v, d = points.shape
    row = np.zeros(v * d)
    delta = points[i] - points[j]
    row[i * d:(i + 1) * d] = delta
    row[j * d:(j + 1) * d] = -delta
    return row


def rigidity_matrix(fw: Framework) -> RigidityMatrix:
    v, d = fw.v, fw.d
    m = np.zeros((fw.graph.e, v * d))
    for k, (i, j) in enumerate(fw.graph.edges):
        delta = fw.points[i] - fw.points[j]
        m[k, i * d:(i + 1) * d] = delta
        m[k, j * d:(j + 1) * d] = -delta
    return RigidityMatrix(m, fw.graph.edges, d)


def _bordered_subsets_full_rank(bordered: np.ndarray, subsets: np.ndarray, tol: Tolerances) -> bool:
    # bordered: (d+1, v); subsets: (m, d+1) vertex index array
    chunk = 20000
    for start in range(0, len(subsets), chunk):
        sub = subsets[start:start + chunk]
        mats = np.transpose(bordered[:, sub], (1, 0, 2))
        s = np.linalg.svd(mats, compute_uv=False)
        if np.any(s[:, -1] <= tol.zero_rel * s[:, 0]):
            return False
    return True


def is_general_position(cfg: Configuration, tol: Tolerances = DEFAULT_TOL,
                        containing: int | None = None) -> bool:
    """Whether every d+1 of the points are affinely independent.

    The test runs over all (d+1)-column submatrices of the bordered matrix.
    With ``containing`` set, only subsets that include that vertex are checked
    (useful when the rest is already known to be in general position).
    With at most d points there is nothing to check and the answer is True.
    """
    if not isinstance(cfg, Configuration):
        cfg = Configuration(cfg)
    v, d = cfg.v, cfg.d
    if v <= d:
        return True
    if containing is None:
        subsets = np.array(list(combinations(range(v), d + 1)), dtype=int)
    else:
        others = [i for i in range(v) if i != containing]
        subsets = np.array([(containing,) + c for c in combinations(others, d)], dtype=int)
    return _bordered_subsets_full_rank(cfg.bordered(), subsets, tol)


def affine_rank(cfg: Configuration, tol: Tolerances = DEFAULT_TOL) -> int:
    """Rank of the bordered matrix, i.e. affine span dimension + 1."""
    return numerical_rank(np.linalg.svd(cfg.bordered(), compute_uv=False), tol)


def _require_full_span(fw: Framework, tol: Tolerances) -> None:
    if affine_rank(fw.config, tol) < fw.d + 1:
        raise DegenerateSpan(f"configuration does not affinely span R^{fw.d}")


def trivial_dimension(d: int) -> int:
    """Dimension of the Euclidean motion group: d translations plus d(d-1)/2 rotations."""
    return d * (d + 1) // 2


def rigidity_rank(fw: Framework, tol: Tolerances = DEFAULT_TOL) -> int:
    m = rigidity_matrix(fw).matrix
    if m.size == 0:
        return 0
    return numerical_rank(np.linalg.svd(m, compute_uv=False), tol)


def infinitesimal_rigidity(fw: Framework, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether rank(df) equals vd - d(d+1)/2."""
    _require_full_span(fw, tol)
    return rigidity_rank(fw, tol) == fw.v * fw.d - trivial_dimension(fw.d)


def trivial_flexes(points: np.ndarray) -> np.ndarray:
    """Columns spanning the translations and infinitesimal rotations at ``points``.

    Shape ``(v*d, d(d+1)/2)``; not orthonormalized.
    """
    v, d = points.shape
    cols = []
    for a in range(d):
        q = np.zeros((v, d))
        q[:, a] = 1.0
        cols.append(q.ravel())
    for a, b in combinations(range(d), 2):
        q = np.zeros((v, d))
        q[:, a] = -points[:, b]
        q[:, b] = points[:, a]
        cols.append(q.ravel())
    return np.column_stack(cols)


def _orthonormal_range(m: np.ndarray, tol: Tolerances) -> np.ndarray:
    if m.size == 0:
        return np.zeros((m.shape[0], 0))
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, :numerical_rank(s, tol)]


def _null_space(m: np.ndarray, tol: Tolerances) -> np.ndarray:
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    return vt[numerical_rank(s, tol):].T


def nontrivial_flex_space(fw: Framework, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns, length v*d) of flexes orthogonal to rigid motions.

    Empty (zero columns) exactly when the framework is infinitesimally rigid.
    """
    _require_full_span(fw, tol)
    kernel = _null_space(rigidity_matrix(fw).matrix, tol)
    trivial = _orthonormal_range(trivial_flexes(fw.points), tol)
    residual = kernel - trivial @ (trivial.T @ kernel)
    expected = kernel.shape[1] - trivial.shape[1]
    if expected <= 0:
        return np.zeros((fw.v * fw.d, 0))
    u, _, _ = np.linalg.svd(residual, full_matrices=False)
    return u[:, :expected]


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Condensed vector of all pairwise distances (scipy ``pdist`` order)."""
    return pdist(np.asarray(points, dtype=float))


def are_equivalent(fw1: Framework, fw2: Framework, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Same graph and all edge lengths agree within ``geom_abs``."""
    if fw1.graph != fw2.graph:
        return False
    l1 = np.sqrt(2.0 * edge_function(fw1))
    l2 = np.sqrt(2.0 * edge_function(fw2))
    return bool(np.all(np.abs(l1 - l2) <= tol.geom_abs))


def are_congruent(cfg1: Configuration, cfg2: Configuration, tol: Tolerances = DEFAULT_TOL) -> bool:
    """All pairwise distances agree within ``geom_abs``."""
    if cfg1.v != cfg2.v:
        return False
    return bool(np.all(np.abs(pairwise_distances(cfg1.points) - pairwise_distances(cfg2.points))
                       <= tol.geom_abs))


def align_onto(targets: np.ndarray, moving: Framework, vertices: Sequence[int],
               tol: Tolerances = DEFAULT_TOL) -> Framework:
    """Rigidly move ``moving`` so that ``vertices[k]`` lands on ``targets[k]``.

    Least-squares optimal orthogonal transform plus translation; reflections
    are allowed.
    """
    targets = np.asarray(targets, dtype=float)
    idx = list(vertices)
    if len(idx) < 1:
        raise InvalidInput("alignment needs at least one corresponding vertex")
    if targets.shape != (len(idx), moving.d):
        raise DimensionMismatch(f"targets shape {targets.shape} does not match {len(idx)} x {moving.d}")
    src = moving.points[idx]
    gap = np.abs(pairwise_distances(src) - pairwise_distances(targets))
    if gap.size and gap.max() > tol.geom_abs:
        raise IncompatibleDistances(
            f"corresponding pairwise distances differ by up to {gap.max():.3e} (> {tol.geom_abs:g})"
        )
    src_mean = src.mean(axis=0)
    dst_mean = targets.mean(axis=0)
    rot, _ = orthogonal_procrustes(src - src_mean, targets - dst_mean)
    moved = (moving.points - src_mean) @ rot + dst_mean
    miss = np.linalg.norm(moved[idx] - targets, axis=1).max()
    if miss > tol.geom_abs:
        raise IncompatibleDistances(f"alignment leaves a residual of {miss:.3e}")
    return Framework(moving.graph, Configuration(moved))
