"""Linear port-Hamiltonian DAE structures, realizations, simulation and transfer functions."""
from __future__ import annotations

__version__ = "0.1.0"

from .exceptions import (
    ConditionViolation,
    DimensionError,
    InconsistentInput,
    InfeasibleConstraints,
    NotMaximalMonotone,
    PhsError,
    PreconditionFailed,
    SingularResolvent,
    SingularStepPencil,
)
from .linalg_core import (
    Tolerance,
    column_basis,
    left_annihilator,
    psd_cone_check,
    psd_rank_factor,
    skew_symmetric_split,
    subspace_equal,
)
from .monotone_ops import compose, defect_spaces, embed_as_graph, split_dirac_resistive
from .phdae import (
    DescriptorRealization,
    PhDaeDLR,
    PhDaeML,
    StructuredRealization,
    admissible_set,
    dlr_to_ml,
    hamiltonian,
    hamiltonian_augmented,
    ml_to_dlr,
    realize,
    realize_dlr,
    realize_ml_annihilator,
    realize_ml_structured,
)
from .simulate import Scenario, Trajectory, consistent_init, energy_audit, integrate
from .structures import (
    LinearStructure,
    PairingLayout,
    classify,
    dirac_from_kernel,
    graph_structure,
    image_rep,
    kernel_rep,
    lagrange_from_PS,
    monotone_from_image,
)
from .transfer import (
    ExplicitSystem,
    eliminate_multipliers,
    positive_real_sample_check,
    transfer_eval,
)

__all__ = [
    "ConditionViolation",
    "DescriptorRealization",
    "DimensionError",
    "ExplicitSystem",
    "InconsistentInput",
    "InfeasibleConstraints",
    "LinearStructure",
    "NotMaximalMonotone",
    "PairingLayout",
    "PhDaeDLR",
    "PhDaeML",
    "PhsError",
    "PreconditionFailed",
    "Scenario",
    "SingularResolvent",
    "SingularStepPencil",
    "StructuredRealization",
    "Tolerance",
    "Trajectory",
    "admissible_set",
    "classify",
    "column_basis",
    "compose",
    "consistent_init",
    "defect_spaces",
    "dirac_from_kernel",
    "dlr_to_ml",
    "eliminate_multipliers",
    "embed_as_graph",
    "energy_audit",
    "graph_structure",
    "hamiltonian",
    "hamiltonian_augmented",
    "image_rep",
    "integrate",
    "kernel_rep",
    "lagrange_from_PS",
    "left_annihilator",
    "ml_to_dlr",
    "monotone_from_image",
    "positive_real_sample_check",
    "psd_cone_check",
    "psd_rank_factor",
    "realize",
    "realize_dlr",
    "realize_ml_annihilator",
    "realize_ml_structured",
    "skew_symmetric_split",
    "split_dirac_resistive",
    "subspace_equal",
    "transfer_eval",
]
