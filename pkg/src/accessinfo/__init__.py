"""Ancilla-model measurement simulation and accessible-information bounds."""

from .bounds import (
    BoundReport,
    OptimizerConfig,
    chi_range,
    general_inequality,
    holevo_chi,
    optimize_accessible_info,
    verify_kholevo,
)
from .core import (
    Ensemble,
    Layout,
    MultipartiteState,
    StateError,
    assemble_xq,
    kron,
    partial_trace,
    random_density,
    random_unitary,
    validate_density,
)
from .entropy import (
    conditional_mutual,
    diagonal_mutual_shannon,
    mutual,
    shannon,
    subset_entropy,
    venn2,
    venn3,
    von_neumann,
)
from .measurement import (
    Povm,
    ProjectiveMeasurement,
    apply_measurement,
    build_u_qa,
    decohere_ancilla,
    extracted_info,
    neumark_dilate,
    reduce_xa,
    residual_info,
    sequential_measure,
)

__version__ = "0.1.0"
