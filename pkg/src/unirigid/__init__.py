"""Universal rigidity certificates for bar-joint frameworks built by attachment."""

from .attach import (
    Attachment,
    AttachmentSpec,
    EdgeReduction,
    attach,
    combined_stress,
    combined_stress_via_merge,
    counter_stress,
    edge_reduced_stress,
    reflection_counterexample,
)
from .core import (
    DEFAULT_TOL,
    Configuration,
    Framework,
    Graph,
    Tolerances,
    infinitesimal_rigidity,
    is_general_position,
    nontrivial_flex_space,
    rigidity_matrix,
)
from .errors import RigidityError
from .generate import LaterationPlan, compose_certified, generate_lateration, sample_general_position
from .stress import (
    Certificate,
    StressMatrix,
    StressVector,
    certify_universal_rigidity,
    complete_graph_stress,
    psd_combine,
    stress_space_basis,
)

__all__ = [name for name in dir() if not name.startswith("_")]
