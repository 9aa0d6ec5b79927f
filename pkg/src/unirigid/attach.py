"""Attachments of two frameworks and the stress matrices that certify them.

Index layout of an attachment: A's vertices keep their indices ``0..v_A-1``;
B's non-shared vertices follow in B's own order. Shared vertices therefore
carry A's indices, and an edge between shared vertices can be named by the
same pair in A and in the attachment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    DEFAULT_TOL,
    Configuration,
    Edge,
    Framework,
    Graph,
    Tolerances,
    align_onto,
    edge_function,
    edge_row,
    infinitesimal_rigidity,
    is_general_position,
    normalize_edge,
    pairwise_distances,
    rigidity_matrix,
)
from .errors import (
    DegenerateReflection,
    DimensionMismatch,
    EdgeAlreadyPresent,
    InvalidInput,
    NotEnoughSharedVertices,
    NotInfinitesimallyRigid,
    PreconditionFailed,
    ResidualTooLarge,
    UncertifiedInput,
)
from .stress import (
    StressMatrix,
    _property_violations,
    affine_kernel_basis,
    psd_combine,
    psd_nullity,
    spectral_norm,
)


@dataclass(frozen=True)
class AttachmentSpec:
    """Vertex correspondences ``(vertex in A, vertex in B)``."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        side_a = [a for a, _ in pairs]
        side_b = [b for _, b in pairs]
        if len(set(side_a)) != len(side_a):
            raise InvalidInput("a vertex of A appears twice in the shared-vertex list")
        if len(set(side_b)) != len(side_b):
            raise InvalidInput("a vertex of B appears twice in the shared-vertex list")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def a_vertices(self) -> list[int]:
        return [a for a, _ in self.pairs]

    @property
    def b_vertices(self) -> list[int]:
        return [b for _, b in self.pairs]


@dataclass(frozen=True, eq=False)
class Attachment:
    framework: Framework
    index_map_a: tuple[int, ...]
    index_map_b: tuple[int, ...]
    shared_indices: tuple[int, ...]
    spec: AttachmentSpec
    source_a: Framework
    source_b: Framework  # B after rigid alignment onto A

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def d(self) -> int:
        return self.framework.d


@dataclass(frozen=True)
class EdgeReduction:
    """Edges (in attachment indices) to drop; each must come from B only."""

    removed_edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        edges = tuple(normalize_edge(i, j) for i, j in self.removed_edges)
        if len(set(edges)) != len(edges):
            raise InvalidInput("duplicate edge in reduction")
        object.__setattr__(self, "removed_edges", edges)

    @property
    def k(self) -> int:
        return len(self.removed_edges)


def attach(fw_a: Framework, fw_b: Framework, spec: AttachmentSpec,
           tol: Tolerances = DEFAULT_TOL) -> Attachment:
    """Rigidly align B onto A at the shared vertices and merge them."""
    if fw_a.d != fw_b.d:
        raise DimensionMismatch(f"frameworks live in R^{fw_a.d} and R^{fw_b.d}")
    if spec.n < 1:
        raise InvalidInput("attachment needs at least one shared vertex")
    for a, b in spec.pairs:
        if not (0 <= a < fw_a.v and 0 <= b < fw_b.v):
            raise InvalidInput(f"pair ({a}, {b}) is out of range")
    if spec.n >= fw_a.v or spec.n >= fw_b.v:
        raise InvalidInput("shared vertices must be a proper subset of both frameworks")

    aligned_b = align_onto(fw_a.points[spec.a_vertices], fw_b, spec.b_vertices, tol)
    shared_b = dict(zip(spec.b_vertices, spec.a_vertices))
    map_b = []
    next_index = fw_a.v
    for b in range(fw_b.v):
        if b in shared_b:
            map_b.append(shared_b[b])
        else:
            map_b.append(next_index)
            next_index += 1
    b_only = [b for b in range(fw_b.v) if b not in shared_b]
    points = np.vstack([fw_a.points, aligned_b.points[b_only]])
    edges = set(fw_a.graph.edges)
    edges.update(normalize_edge(map_b[i], map_b[j]) for i, j in fw_b.graph.edges)
    framework = Framework(Graph(next_index, tuple(edges)), Configuration(points))
    return Attachment(
        framework=framework,
        index_map_a=tuple(range(fw_a.v)),
        index_map_b=tuple(map_b),
        shared_indices=tuple(spec.a_vertices),
        spec=spec,
        source_a=fw_a,
        source_b=aligned_b,
    )


def check_attachment_rigidity_condition(att: Attachment) -> bool:
    """True iff at least d+1 vertices are shared."""
    return att.n >= att.d + 1


def embed(omega, index_map: Sequence[int], v: int) -> np.ndarray:
    """Zero-pad a stress matrix into the ``v x v`` attachment index space."""
    om = omega.omega if isinstance(omega, StressMatrix) else np.asarray(omega, dtype=float)
    out = np.zeros((v, v))
    idx = np.asarray(index_map, dtype=int)
    out[np.ix_(idx, idx)] += om
    return out


def _require_certified(sm: StressMatrix, fw: Framework, tol: Tolerances, label: str) -> None:
    om = sm.omega if isinstance(sm, StressMatrix) else np.asarray(sm, dtype=float)
    if om.shape != (fw.v, fw.v):
        raise DimensionMismatch(f"stress matrix for {label} is {om.shape}, expected {(fw.v, fw.v)}")
    problems, _ = _property_violations(om, fw, tol)
    report = psd_nullity(om, tol)
    if not report.is_psd:
        problems.append("not-psd")
    if report.nullity != fw.d + 1:
        problems.append(f"nullity {report.nullity} != {fw.d + 1}")
    if not is_general_position(fw.config, tol):
        problems.append("general-position")
    if problems:
        raise UncertifiedInput(f"input {label} is not certified: {', '.join(problems)}")


def _require_shared(att: Attachment) -> None:
    if not check_attachment_rigidity_condition(att):
        raise NotEnoughSharedVertices(
            f"{att.n} shared vertices; the attachment needs n >= d+1 = {att.d + 1}"
        )


def combined_stress(att: Attachment, sm_a: StressMatrix, sm_b: StressMatrix,
                    tol: Tolerances = DEFAULT_TOL) -> StressMatrix:
    """Sum of the zero-padded stress matrices of A and B (shared block overlaps)."""
    _require_shared(att)
    _require_certified(sm_a, att.source_a, tol, "A")
    _require_certified(sm_b, att.source_b, tol, "B")
    v = att.framework.v
    om = embed(sm_a, att.index_map_a, v) + embed(sm_b, att.index_map_b, v)
    return StressMatrix(att.framework.graph, om)


def combined_stress_via_merge(att: Attachment, sm_a: StressMatrix, sm_b: StressMatrix,
                              tol: Tolerances = DEFAULT_TOL) -> StressMatrix:
    """Same matrix as :func:`combined_stress`, reached by merging coinciding vertices.

    Only the first d+1 pairs are treated as shared; the remaining pairs start
    out as distinct coinciding vertices. Each is then merged into its A
    counterpart with an elementary congruence ``R Ω R^T`` (add the copy's row
    and column onto the original's) followed by deleting the copy.
    """
    _require_shared(att)
    d = att.d
    if att.n <= d + 1:
        raise PreconditionFailed("merge path needs more than d+1 shared vertices")
    _require_certified(sm_a, att.source_a, tol, "A")
    _require_certified(sm_b, att.source_b, tol, "B")

    v_a, v_b = att.source_a.v, att.source_b.v
    glued = dict((b, a) for a, b in att.spec.pairs[:d + 1])
    coinciding = att.spec.pairs[d + 1:]
    map_b, copy_of = [], {}
    next_index = v_a
    for b in range(v_b):
        if b in glued:
            map_b.append(glued[b])
        else:
            map_b.append(next_index)
            copy_of[b] = next_index
            next_index += 1
    size = next_index
    om = embed(sm_a, range(v_a), size) + embed(sm_b, map_b, size)

    # positions[k] = current row of intermediate index k (None once deleted)
    positions: list[int | None] = list(range(size))
    for a, b in coinciding:
        keep, drop = positions[a], positions[copy_of[b]]
        r = np.eye(om.shape[0])
        r[keep, drop] = 1.0
        om = r @ om @ r.T
        om = np.delete(np.delete(om, drop, axis=0), drop, axis=1)
        positions[copy_of[b]] = None
        positions = [p if p is None or p < drop else p - 1 for p in positions]
    return StressMatrix(att.framework.graph, 0.5 * (om + om.T))


def counter_stress(fw_a: Framework, additions: Iterable[tuple[Edge, float]],
                   tol: Tolerances = DEFAULT_TOL) -> StressMatrix:
    """Stress matrix on A plus the added edges, carrying ``-w1`` on each added edge.

    For each added edge with target ``w1`` solves ``df^T w = rho * w1`` in the
    minimum-norm least-squares sense, where ``rho`` is the rigidity-matrix row
    of the added edge; the stress vector ``(w, -w1)`` is then in equilibrium on
    A with that edge added. The per-edge matrices are summed.
    """
    additions = [(normalize_edge(*e), float(w1)) for e, w1 in additions]
    for (i, j), _ in additions:
        if not (0 <= i < fw_a.v and 0 <= j < fw_a.v):
            raise InvalidInput(f"edge ({i}, {j}) is not between vertices of A")
        if fw_a.graph.has_edge(i, j):
            raise EdgeAlreadyPresent(f"edge ({i}, {j}) is already an edge of A")
    if len({e for e, _ in additions}) != len(additions):
        raise InvalidInput("an edge is listed twice")
    if not infinitesimal_rigidity(fw_a, tol):
        raise NotInfinitesimallyRigid("counter stresses need an infinitesimally rigid framework")

    graph = fw_a.graph.with_edges(e for e, _ in additions)
    v = fw_a.v
    om = np.zeros((v, v))
    if not additions:
        return StressMatrix(graph, om)
    dft = rigidity_matrix(fw_a).matrix.T
    edges = np.array(fw_a.graph.edges)
    for (i, j), w1 in additions:
        rhs = edge_row(fw_a.points, i, j) * w1
        w, *_ = np.linalg.lstsq(dft, rhs, rcond=None)
        residual = float(np.linalg.norm(dft @ w - rhs))
        if residual > tol.geom_abs * float(np.linalg.norm(rhs)):
            raise ResidualTooLarge(f"no stress with -w1 on ({i}, {j}); residual {residual:.3e}")
        part = np.zeros((v, v))
        if len(edges):
            part[edges[:, 0], edges[:, 1]] = w
            part[edges[:, 1], edges[:, 0]] = w
        part[i, j] = part[j, i] = -w1
        part[np.diag_indices(v)] = -part.sum(axis=1)
        om += part
    return StressMatrix(graph, om)


def _reduction_in_a_and_b(att: Attachment, reduction: EdgeReduction) -> list[tuple[Edge, Edge]]:
    shared = set(att.shared_indices)
    to_b = {c: b for b, c in enumerate(att.index_map_b)}
    out = []
    for i, j in reduction.removed_edges:
        if i not in shared or j not in shared:
            raise PreconditionFailed(f"edge ({i}, {j}) is not between shared vertices")
        if att.source_a.graph.has_edge(i, j):
            raise EdgeAlreadyPresent(f"edge ({i}, {j}) is inherited from A as well")
        bi, bj = to_b[i], to_b[j]
        if not att.source_b.graph.has_edge(bi, bj):
            raise PreconditionFailed(f"edge ({i}, {j}) is not an edge of B")
        out.append(((i, j), normalize_edge(bi, bj)))
    return out


def edge_reduced_stress(att: Attachment, sm_a: StressMatrix, sm_b: StressMatrix,
                        reduction: EdgeReduction, tol: Tolerances = DEFAULT_TOL,
                        c_rule: str = "weyl") -> tuple[float, StressMatrix, Framework]:
    """Stress for the attachment with B-only shared edges removed.

    Builds ``c*Ω_A + Ω_AK + Ω_B`` (all zero-padded), where ``Ω_AK`` cancels
    B's stress on every removed edge and ``c`` keeps ``c*Ω_A + Ω_AK`` PSD of
    nullity d+1 (``c_rule`` is passed to :func:`psd_combine`). Returns
    ``(c, stress, reduced framework)``; the stress entries at removed edges
    vanish up to rounding.
    """
    _require_shared(att)
    _require_certified(sm_a, att.source_a, tol, "A")
    _require_certified(sm_b, att.source_b, tol, "B")
    pairs = _reduction_in_a_and_b(att, reduction)
    v = att.framework.v
    om_b = sm_b.omega if isinstance(sm_b, StressMatrix) else np.asarray(sm_b)
    om_a = sm_a.omega if isinstance(sm_a, StressMatrix) else np.asarray(sm_a)
    if pairs:
        additions = [(ea, om_b[eb]) for ea, eb in pairs]
        om_ak = counter_stress(att.source_a, additions, tol)
        c, kept = psd_combine(om_a, om_ak.omega, tol, kernel=affine_kernel_basis(att.source_a),
                               c_rule=c_rule)
    else:
        c, kept = 1.0, om_a
    om = embed(kept, att.index_map_a, v) + embed(om_b, att.index_map_b, v)
    norm = spectral_norm(om)
    for (i, j), _ in pairs:
        if abs(om[i, j]) > tol.geom_abs * norm:
            raise ResidualTooLarge(f"stress on removed edge ({i}, {j}) is {om[i, j]:.3e}, not ~0")
    reduced = att.framework.with_graph(att.framework.graph.without_edges(reduction.removed_edges))
    return c, StressMatrix(reduced.graph, om), reduced


def max_distance_discrepancy(p: np.ndarray, q: np.ndarray) -> float:
    """Largest change of any pairwise distance between two configurations."""
    gap = np.abs(pairwise_distances(p) - pairwise_distances(q))
    return float(gap.max()) if gap.size else 0.0


def reflection_counterexample(att: Attachment, tol: Tolerances = DEFAULT_TOL) -> Framework:
    """Equivalent, non-congruent framework for an attachment sharing at most d vertices.

    Reflects every B-only vertex across a hyperplane through the shared
    vertices. Edge lengths survive because every edge lies within A or
    within B; some A-only/B-only distance changes unless B sits on the mirror.
    """
    d = att.d
    if att.n > d:
        raise PreconditionFailed(f"{att.n} shared vertices; a mirror exists only for n <= d = {d}")
    pts = att.framework.points
    shared = pts[list(att.shared_indices)]
    origin = shared[0]
    directions = shared[1:] - origin
    if directions.size:
        _, s, vt = np.linalg.svd(directions, full_matrices=True)
        rank = int(np.count_nonzero(s > tol.zero_rel * max(float(s[0]), 1.0)))
        normals = vt[rank:]
    else:
        normals = np.eye(d)
    b_only = np.arange(att.source_a.v, att.framework.v)

    best, best_gap = None, -1.0
    for u in normals:
        moved = pts.copy()
        offset = (moved[b_only] - origin) @ u
        moved[b_only] -= 2.0 * np.outer(offset, u)
        gap = max_distance_discrepancy(pts, moved)
        if gap > best_gap:
            best, best_gap = moved, gap
    candidate = Framework(att.framework.graph, Configuration(best))
    stretch = np.abs(np.sqrt(2 * edge_function(candidate)) - np.sqrt(2 * edge_function(att.framework)))
    if stretch.size and stretch.max() > tol.geom_abs:
        raise DegenerateReflection(f"reflection changes an edge length by {stretch.max():.3e}")
    if best_gap <= tol.geom_abs:
        raise DegenerateReflection("every mirror through the shared vertices leaves all distances unchanged")
    return candidate
