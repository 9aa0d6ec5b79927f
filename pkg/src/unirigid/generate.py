"""Random general-position sampling and (d+1)-lateration frameworks.

A lateration framework is grown one vertex at a time. Each step attaches a
complete framework on the new vertex and its d+1 chosen neighbours, sharing
the neighbours, and then drops the neighbour-neighbour edges the current
framework did not already have. The certified stress matrix is carried
through every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .attach import AttachmentSpec, EdgeReduction, attach, edge_reduced_stress
from .core import (
    DEFAULT_TOL,
    Configuration,
    Framework,
    Graph,
    Tolerances,
    is_general_position,
    normalize_edge,
)
from .errors import (
    CertificationFailed,
    ExhaustedRetries,
    GeneralPositionFailure,
    InvalidInput,
    RigidityError,
)
from .stress import StressMatrix, certify_universal_rigidity, complete_graph_stress, prune_to_graph

RETRY_BUDGET = 100


def sample_general_position(v: int, d: int, seed: int | np.random.Generator,
                            tol: Tolerances = DEFAULT_TOL) -> Configuration:
    """``v`` points uniform in [0, 1]^d, resampled until in general position."""
    if v < 1 or d < 1:
        raise InvalidInput(f"need v >= 1 and d >= 1, got v={v}, d={d}")
    rng = np.random.default_rng(seed)
    for _ in range(RETRY_BUDGET):
        cfg = Configuration(rng.uniform(0.0, 1.0, size=(v, d)))
        if is_general_position(cfg, tol):
            return cfg
    raise ExhaustedRetries(f"no general-position sample in {RETRY_BUDGET} tries")


@dataclass(frozen=True)
class LaterationPlan:
    """Combinatorics of a lateration graph.

    Vertices ``0..d`` form the seed clique; ``attach_order[k]`` lists the d+1
    earlier neighbours of vertex ``d + 1 + k``.
    """

    d: int
    v: int
    seed: int
    attach_order: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.d < 1 or self.v < self.d + 1:
            raise InvalidInput(f"need d >= 1 and v >= d+1, got d={self.d}, v={self.v}")
        order = tuple(tuple(int(x) for x in nbrs) for nbrs in self.attach_order)
        if len(order) != self.v - self.d - 1:
            raise InvalidInput(f"expected {self.v - self.d - 1} neighbour lists, got {len(order)}")
        for k, nbrs in enumerate(order):
            new = self.d + 1 + k
            if len(nbrs) != self.d + 1 or len(set(nbrs)) != len(nbrs):
                raise InvalidInput(f"vertex {new} needs {self.d + 1} distinct neighbours, got {nbrs}")
            if not all(0 <= x < new for x in nbrs):
                raise InvalidInput(f"vertex {new} may only connect to earlier vertices, got {nbrs}")
        object.__setattr__(self, "attach_order", order)

    @classmethod
    def random(cls, d: int, v: int, seed: int) -> "LaterationPlan":
        if d < 1 or v < d + 1:
            raise InvalidInput(f"need d >= 1 and v >= d+1, got d={d}, v={v}")
        rng = np.random.default_rng([seed, 0])
        order = []
        for new in range(d + 1, v):
            order.append(tuple(sorted(int(x) for x in rng.choice(new, size=d + 1, replace=False))))
        return cls(d, v, seed, tuple(order))

    def graph(self) -> Graph:
        edges = list(combinations(range(self.d + 1), 2))
        for k, nbrs in enumerate(self.attach_order):
            edges.extend((x, self.d + 1 + k) for x in nbrs)
        return Graph(self.v, tuple(edges))


def lateration_edge_count(d: int, v: int) -> int:
    return (d + 1) * d // 2 + (v - d - 1) * (d + 1)


def is_lateration_graph(graph: Graph, d: int) -> bool:
    """Check the lateration structure under the given vertex order."""
    if graph.v < d + 1:
        return False
    for i, j in combinations(range(d + 1), 2):
        if not graph.has_edge(i, j):
            return False
    for new in range(d + 1, graph.v):
        nbrs = graph.neighbors(new)
        if len([x for x in nbrs if x < new]) != d + 1:
            return False
    return graph.e == lateration_edge_count(d, graph.v)


def _new_point(rng: np.random.Generator, anchors: np.ndarray) -> np.ndarray:
    lo, hi = anchors.min(axis=0), anchors.max(axis=0)
    pad = 0.25 * (hi - lo)  # 50% total inflation of the bounding box
    return rng.uniform(lo - pad, hi + pad)


@dataclass
class LaterationStep:
    framework: Framework
    stress: StressMatrix
    c: float
    removed: tuple


def lateration_steps(plan: LaterationPlan, tol: Tolerances = DEFAULT_TOL,
                     seed_points: np.ndarray | None = None, c_rule: str = "tight"):
    """Yield a :class:`LaterationStep` for the seed simplex and after every added vertex.

    ``c_rule`` defaults to ``"tight"``: with the Weyl constant the condition
    number of the carried stress roughly doubles per step, and d=3 frameworks
    near 20 vertices stop certifying at the default zero threshold.
    """
    d = plan.d
    rng = np.random.default_rng([plan.seed, 1])
    if seed_points is None:
        seed_cfg = sample_general_position(d + 1, d, rng, tol)
    else:
        seed_cfg = Configuration(seed_points)
        if seed_cfg.v != d + 1 or seed_cfg.d != d:
            raise InvalidInput(f"seed points must be a ({d + 1}, {d}) array")
        if not is_general_position(seed_cfg, tol):
            raise InvalidInput("seed points are not affinely independent")
    fw = Framework(Graph.complete(d + 1), seed_cfg)
    sm = complete_graph_stress(fw, tol)
    yield LaterationStep(fw, sm, 1.0, ())

    for nbrs in plan.attach_order:
        nbrs = list(nbrs)
        last_error: Exception | None = None
        for _ in range(RETRY_BUDGET):
            p_new = _new_point(rng, fw.points[nbrs])
            trial = Configuration(np.vstack([fw.points, p_new]))
            if not is_general_position(trial, tol, containing=fw.v):
                continue
            try:
                step = _extend(fw, sm, nbrs, p_new, tol, c_rule)
            except RigidityError as exc:
                last_error = exc
                continue
            fw, sm = step.framework, step.stress
            yield step
            break
        else:
            raise GeneralPositionFailure(
                f"could not place vertex {fw.v} within {RETRY_BUDGET} tries"
                + (f" (last error: {last_error})" if last_error else "")
            )


def _extend(fw: Framework, sm: StressMatrix, nbrs: list[int], p_new: np.ndarray,
            tol: Tolerances, c_rule: str) -> LaterationStep:
    d = fw.d
    local = Framework(Graph.complete(d + 2), Configuration(np.vstack([fw.points[nbrs], p_new])))
    local_sm = complete_graph_stress(local, tol)
    if fw.v == d + 1:
        # The seed simplex is entirely shared, so the attachment is the clique itself.
        perm = np.argsort(nbrs + [d + 1])
        out_fw = Framework(Graph.complete(d + 2), Configuration(local.points[perm]))
        out_sm = StressMatrix(out_fw.graph, local_sm.omega[np.ix_(perm, perm)])
        removed = ()
        c = 1.0
    else:
        spec = AttachmentSpec(tuple((a, b) for b, a in enumerate(nbrs)))
        att = attach(fw, local, spec, tol)
        removed = tuple(normalize_edge(a, b) for a, b in combinations(nbrs, 2)
                        if not fw.graph.has_edge(a, b))
        c, raw, out_fw = edge_reduced_stress(att, sm, local_sm, EdgeReduction(removed), tol,
                                                    c_rule)
        out_sm = prune_to_graph(raw, out_fw.graph)
    cert = certify_universal_rigidity(out_fw, out_sm, tol)
    if not cert.certified:
        raise CertificationFailed(cert)
    return LaterationStep(out_fw, out_sm, c, removed)


def generate_lateration(plan: LaterationPlan, tol: Tolerances = DEFAULT_TOL,
                        seed_points: np.ndarray | None = None,
                        c_rule: str = "tight") -> tuple[Framework, StressMatrix]:
    """Grow the lateration framework described by ``plan`` with a certified stress.

    ``seed_points`` optionally fixes the coordinates of the seed simplex.
    """
    step = None
    for step in lateration_steps(plan, tol, seed_points, c_rule):
        pass
    return step.framework, step.stress


def compose_certified(fw_a: Framework, sm_a: StressMatrix, fw_b: Framework, sm_b: StressMatrix,
                      spec: AttachmentSpec, reduction: EdgeReduction | Sequence = (),
                      tol: Tolerances = DEFAULT_TOL, c_rule: str = "weyl"
                      ) -> tuple[Framework, StressMatrix]:
    """Attach, drop the requested B-only shared edges, and certify the result.

    Raises :class:`CertificationFailed` with the certificate when the
    resulting stress does not certify universal rigidity.
    """
    if not isinstance(reduction, EdgeReduction):
        reduction = EdgeReduction(tuple(reduction))
    att = attach(fw_a, fw_b, spec, tol)
    _, raw, reduced = edge_reduced_stress(att, sm_a, sm_b, reduction, tol, c_rule)
    sm = prune_to_graph(raw, reduced.graph)
    cert = certify_universal_rigidity(reduced, sm, tol)
    if not cert.certified:
        raise CertificationFailed(cert)
    return reduced, sm
