"""Symmetries of Hamiltonian systems on symplectic, cosymplectic, contact and cocontact charts."""

from .errors import (
    DegenerateHamiltonianError,
    DomainError,
    HamsymError,
    IntegrationPathError,
    NoReebError,
    ParseError,
    SamplingExhaustedError,
    UnknownIdentifierError,
    UnsupportedGeometryError,
)
from .expr import Expr, differentiate, evaluate, to_text
from .flow import (
    FlowMap,
    Trajectory,
    canonoid_flow_check,
    flow_map,
    integrate,
    integrate_system,
    monitor,
    pullback_residual,
)
from .geometry import (
    Chart,
    Geometry,
    OneForm,
    TwoForm,
    VectorField,
    bracket,
    contract,
    evolution_field,
    exterior_derivative,
    hamiltonian_vector_field,
    lie_bracket,
    lie_derivative,
    parse_field,
    reeb,
    structure,
    wedge,
)
from .parser import parse
from .sampling import SampleDomain, equal_on_samples
from .symmetry import (
    ClassificationReport,
    HamiltonianSystem,
    Tolerances,
    check_scaling_primitive,
    classify,
    is_canonoid_generator,
    is_constant_of_motion,
    is_dissipated_quantity,
    is_dynamical_symmetry,
    is_hamiltonian_field,
    is_infinitesimal_symmetry,
    noether_check,
    noether_field_check,
    scaling_degree,
)

__version__ = "0.1.0"
