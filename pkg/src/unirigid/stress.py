"""Equilibrium stresses, stress matrices and universal-rigidity certificates.

Sign convention: the off-diagonal entry of a stress matrix at edge {i, j} is
the edge stress w_ij, and each diagonal entry is minus the sum of the
off-diagonal entries in its row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from .core import (
    DEFAULT_TOL,
    Framework,
    Graph,
    Tolerances,
    is_general_position,
    numerical_rank,
    rigidity_matrix,
)
from .errors import (
    DimensionMismatch,
    InvalidInput,
    KernelNotContained,
    NotComplete,
    NotGeneralPosition,
    NotPSD,
    PreconditionFailed,
    TooFewVertices,
)

PROPERTY_TAGS = ("property(1)", "property(2)", "property(3)", "property(4)")
NOT_PSD = "not-psd"
WRONG_NULLITY = "nullity"
NOT_GENERAL_POSITION = "general-position"


@dataclass(frozen=True, eq=False)
class StressVector:
    graph: Graph
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float).ravel()
        if w.shape != (self.graph.e,):
            raise DimensionMismatch(f"stress vector has {w.size} entries for {self.graph.e} edges")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True, eq=False)
class StressMatrix:
    """A symmetric v x v matrix tied to a graph's sparsity pattern.

    Construction does not validate the stress-matrix properties; use
    :func:`verify_stress_matrix` for that.
    """

    graph: Graph
    omega: np.ndarray

    def __post_init__(self):
        om = np.array(self.omega, dtype=float)
        if om.shape != (self.graph.v, self.graph.v):
            raise DimensionMismatch(f"matrix shape {om.shape} does not match {self.graph.v} vertices")
        om.setflags(write=False)
        object.__setattr__(self, "omega", om)

    @property
    def v(self) -> int:
        return self.graph.v

    def edge_stresses(self) -> np.ndarray:
        """Off-diagonal entries in edge order."""
        if self.graph.e == 0:
            return np.zeros(0)
        idx = np.array(self.graph.edges)
        return self.omega[idx[:, 0], idx[:, 1]].copy()

    def scaled(self, alpha: float) -> "StressMatrix":
        return StressMatrix(self.graph, alpha * self.omega)


@dataclass(frozen=True)
class Certificate:
    reasons: tuple[str, ...]
    eigenvalues: tuple[float, ...]
    nullity: int
    tolerances: Tolerances = DEFAULT_TOL
    details: dict = field(default_factory=dict, compare=False)

    @property
    def certified(self) -> bool:
        return not self.reasons

    @property
    def verdict(self) -> str:
        return "Certified" if self.certified else "NotCertified"

    def __bool__(self) -> bool:
        return self.certified


class PSDReport(NamedTuple):
    is_psd: bool
    nullity: int
    eigenvalues: np.ndarray


MatrixLike = Union[StressMatrix, np.ndarray]


def _as_array(m: MatrixLike) -> np.ndarray:
    return m.omega if isinstance(m, StressMatrix) else np.asarray(m, dtype=float)


def spectral_norm(m: MatrixLike) -> float:
    a = _as_array(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def stress_space_basis(fw: Framework, tol: Tolerances = DEFAULT_TOL) -> list[StressVector]:
    """Orthonormal basis of ker(df^T), one sign-normalized vector per dimension."""
    df = rigidity_matrix(fw).matrix
    e = fw.graph.e
    if e == 0:
        return []
    u, s, _ = np.linalg.svd(df, full_matrices=True)
    rank = numerical_rank(s, tol)
    basis = []
    for k in range(rank, e):
        w = u[:, k].copy()
        nz = np.flatnonzero(np.abs(w) > tol.geom_abs)
        if nz.size and w[nz[0]] < 0:
            w = -w
        basis.append(StressVector(fw.graph, w))
    return basis


def equilibrium_residual(fw: Framework, w: np.ndarray) -> np.ndarray:
    """Per-vertex vector sum_j w_ij (p_i - p_j), shaped (v, d)."""
    df = rigidity_matrix(fw).matrix
    return (df.T @ np.asarray(w, dtype=float)).reshape(fw.v, fw.d)


def stress_vector_to_matrix(sv: StressVector) -> StressMatrix:
    v = sv.graph.v
    om = np.zeros((v, v))
    for (i, j), w in zip(sv.graph.edges, sv.w):
        om[i, j] = om[j, i] = w
    om[np.diag_indices(v)] = -om.sum(axis=1)
    return StressMatrix(sv.graph, om)


def prune_to_graph(sm: MatrixLike, graph: Graph) -> StressMatrix:
    """Zero every off-diagonal entry outside ``graph`` and rebuild the diagonal from row sums."""
    om = np.array(_as_array(sm), dtype=float)
    om = 0.5 * (om + om.T)
    mask = np.zeros_like(om, dtype=bool)
    if graph.e:
        idx = np.array(graph.edges)
        mask[idx[:, 0], idx[:, 1]] = True
        mask[idx[:, 1], idx[:, 0]] = True
    om[~mask] = 0.0
    om[np.diag_indices(graph.v)] = -om.sum(axis=1)
    return StressMatrix(graph, om)


def psd_nullity(m: MatrixLike, tol: Tolerances = DEFAULT_TOL) -> PSDReport:
    """PSD verdict, numerical nullity and ascending eigenvalues of a symmetric matrix."""
    a = _as_array(m)
    a = 0.5 * (a + a.T)
    if a.size == 0:
        return PSDReport(True, 0, np.zeros(0))
    lam = np.linalg.eigvalsh(a)
    scale = float(np.max(np.abs(lam)))
    if scale == 0.0:
        return PSDReport(True, a.shape[0], lam)
    cut = tol.zero_rel * scale
    return PSDReport(bool(lam[0] >= -cut), int(np.count_nonzero(np.abs(lam) <= cut)), lam)


def numerical_kernel(m: MatrixLike, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal eigenvectors (columns) whose eigenvalues count as zero."""
    a = _as_array(m)
    a = 0.5 * (a + a.T)
    lam, vecs = np.linalg.eigh(a)
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    if scale == 0.0:
        return np.eye(a.shape[0])
    return vecs[:, np.abs(lam) <= tol.zero_rel * scale]


def _property_violations(om: np.ndarray, fw: Framework, tol: Tolerances) -> tuple[list[str], dict]:
    scale = spectral_norm(om)
    cut = tol.geom_abs * scale
    v = fw.v
    off_pattern = ~np.eye(v, dtype=bool)
    if fw.graph.e:
        idx = np.array(fw.graph.edges)
        off_pattern[idx[:, 0], idx[:, 1]] = False
        off_pattern[idx[:, 1], idx[:, 0]] = False
    pscale = max(1.0, float(np.max(np.abs(fw.points))))
    measured = {
        "property(1)": float(np.max(np.abs(om - om.T))),
        "property(2)": float(np.max(np.abs(om[off_pattern]), initial=0.0)),
        "property(3)": float(np.max(np.abs(om.sum(axis=1)))),
        "property(4)": float(np.max(np.linalg.norm(om @ fw.points, axis=1))),
    }
    limits = {tag: cut for tag in PROPERTY_TAGS}
    limits["property(4)"] = cut * pscale
    failed = [tag for tag in PROPERTY_TAGS if measured[tag] > limits[tag]]
    return failed, {"residuals": measured, "limits": limits}


def verify_stress_matrix(sm: StressMatrix, fw: Framework, tol: Tolerances = DEFAULT_TOL) -> Certificate:
    """Check the four defining properties of a stress matrix against ``fw``.

    Each residual is compared to ``geom_abs`` times the spectral norm of the
    matrix (times the coordinate scale for the equilibrium property), so the
    verdict is invariant under positive scaling.
    """
    om = _as_array(sm)
    if om.shape != (fw.v, fw.v):
        raise DimensionMismatch(f"stress matrix is {om.shape}, framework has {fw.v} vertices")
    failed, details = _property_violations(om, fw, tol)
    report = psd_nullity(om, tol)
    return Certificate(tuple(failed), tuple(map(float, report.eigenvalues)), report.nullity, tol, details)


def certify_universal_rigidity(fw: Framework, sm: StressMatrix,
                               tol: Tolerances = DEFAULT_TOL) -> Certificate:
    """General position + stress-matrix properties + PSD with nullity d+1."""
    d = fw.d
    if fw.v < d + 2:
        raise TooFewVertices(f"need at least d+2 = {d + 2} vertices, got {fw.v}")
    om = _as_array(sm)
    if om.shape != (fw.v, fw.v):
        raise DimensionMismatch(f"stress matrix is {om.shape}, framework has {fw.v} vertices")
    reasons = []
    if not is_general_position(fw.config, tol):
        reasons.append(NOT_GENERAL_POSITION)
    failed, details = _property_violations(om, fw, tol)
    reasons.extend(failed)
    report = psd_nullity(om, tol)
    if not report.is_psd:
        reasons.append(NOT_PSD)
    if report.nullity != d + 1:
        reasons.append(WRONG_NULLITY)
    details["expected_nullity"] = d + 1
    return Certificate(tuple(reasons), tuple(map(float, report.eigenvalues)), report.nullity, tol, details)


def affine_kernel_basis(fw: Framework) -> np.ndarray:
    """Columns: the d coordinate projections of the configuration and the ones vector."""
    return fw.config.bordered().T


def _subspace_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Largest residual of projecting orthonormal columns ``a`` onto span(``b``)."""
    if a.shape[1] == 0:
        return 0.0
    r = a - b @ (b.T @ a)
    return float(np.linalg.norm(r, 2))


def kernel_basis_check(sm: StressMatrix, fw: Framework, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ker(Omega) is spanned by the coordinate projections and the ones vector."""
    kern = numerical_kernel(sm, tol)
    if kern.shape[1] != fw.d + 1:
        raise PreconditionFailed(f"nullity is {kern.shape[1]}, expected {fw.d + 1}")
    q, _ = np.linalg.qr(affine_kernel_basis(fw))
    return max(_subspace_gap(q, kern), _subspace_gap(kern, q)) <= tol.geom_abs


def diagonalizing_basis(sm: StressMatrix, fw: Framework,
                        tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Invertible S with S^-1 Omega S diagonal.

    The first d+1 columns of S are the coordinate projections and the ones
    vector; the rest are eigenvectors of the positive eigenvalues. Returns
    ``(S, eigenvalues)`` with the eigenvalues aligned to the columns of S.
    """
    om = _as_array(sm)
    lam, vecs = np.linalg.eigh(0.5 * (om + om.T))
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    positive = lam > tol.zero_rel * scale
    s = np.column_stack([affine_kernel_basis(fw), vecs[:, positive]])
    diag = np.concatenate([np.zeros(fw.d + 1), lam[positive]])
    return s, diag


def complete_graph_stress(fw: Framework, tol: Tolerances = DEFAULT_TOL) -> StressMatrix:
    """Certified stress for a complete framework in general position.

    The orthogonal projector onto the complement of the row space of the
    bordered coordinate matrix: PSD, nullity d+1, and it annihilates both the
    ones vector and every coordinate projection.
    """
    if not fw.graph.is_complete():
        raise NotComplete("complete_graph_stress needs a complete graph")
    if fw.v < fw.d + 1:
        raise NotGeneralPosition(f"need at least d+1 = {fw.d + 1} points, got {fw.v}")
    if not is_general_position(fw.config, tol):
        raise NotGeneralPosition("configuration is not in general position")
    if fw.v == fw.d + 1:
        return StressMatrix(fw.graph, np.zeros((fw.v, fw.v)))
    q, _ = np.linalg.qr(affine_kernel_basis(fw))
    om = np.eye(fw.v) - q @ q.T
    return StressMatrix(fw.graph, 0.5 * (om + om.T))


C_RULES = ("weyl", "tight")


def _tight_constant(a1: np.ndarray, a2: np.ndarray, tol: Tolerances) -> float:
    # smallest c with c*a1 + a2 PSD is -min eig of L^-1/2 U^T a2 U L^-1/2 on range(a1)
    lam, vecs = np.linalg.eigh(0.5 * (a1 + a1.T))
    positive = lam > tol.zero_rel * float(np.max(np.abs(lam)))
    u, root = vecs[:, positive], np.sqrt(lam[positive])
    m = (u.T @ a2 @ u) / np.outer(root, root)
    threshold = -float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])
    return 2.0 * threshold if threshold > 0.0 else 1.0


def psd_combine(omega1: MatrixLike, omega2: MatrixLike, tol: Tolerances = DEFAULT_TOL,
                kernel: np.ndarray | None = None, c_rule: str = "weyl") -> tuple[float, MatrixLike]:
    """Return ``(c, c*omega1 + omega2)``, PSD with the nullity of ``omega1``.

    Requires ``omega1`` PSD and ``ker(omega1) ⊆ ker(omega2)``. With the
    default ``c_rule="weyl"``, ``c = 2 * ||omega2||_2 / lambda_min_positive(omega1)``
    (the Weyl perturbation bound), or 1 when ``omega2`` vanishes.
    ``c_rule="tight"`` uses twice the exact threshold below which positivity
    fails; it keeps the combination far better conditioned when the step is
    repeated many times.

    ``kernel`` may supply a known basis of ``ker(omega1)`` (columns) for the
    containment check; otherwise the numerical eigen-kernel is used, which
    loses accuracy as ``omega1`` becomes ill-conditioned. When both inputs are
    :class:`StressMatrix` the result carries the union of their edge sets.
    """
    if c_rule not in C_RULES:
        raise InvalidInput(f"c_rule must be one of {C_RULES}, got {c_rule!r}")
    a1, a2 = _as_array(omega1), _as_array(omega2)
    if a1.shape != a2.shape:
        raise DimensionMismatch(f"shapes {a1.shape} and {a2.shape} differ")
    report = psd_nullity(a1, tol)
    if not report.is_psd:
        raise NotPSD(f"first matrix has eigenvalue {report.eigenvalues[0]:.3e}")
    norm2 = spectral_norm(a2)
    if kernel is None:
        kern = numerical_kernel(a1, tol)
    else:
        kern, _ = np.linalg.qr(np.asarray(kernel, dtype=float))
    if norm2 > 0.0 and kern.shape[1]:
        leak = float(np.linalg.norm(a2 @ kern, 2))
        if leak > tol.geom_abs * norm2:
            raise KernelNotContained(f"second matrix maps ker of the first to norm {leak:.3e}")
    if norm2 == 0.0:
        c = 1.0
    elif kern.shape[1] == a1.shape[0] or report.nullity == a1.shape[0]:
        raise KernelNotContained("first matrix is zero but the second is not")
    elif c_rule == "tight":
        c = _tight_constant(a1, a2, tol)
    else:
        lam = report.eigenvalues
        positive = lam[lam > tol.zero_rel * float(np.max(np.abs(lam)))]
        c = 2.0 * norm2 / float(positive[0])
    combined = c * a1 + a2
    if isinstance(omega1, StressMatrix) and isinstance(omega2, StressMatrix):
        graph = omega1.graph.with_edges(e for e in omega2.graph.edges if not omega1.graph.has_edge(*e))
        return c, StressMatrix(graph, combined)
    return c, combined
