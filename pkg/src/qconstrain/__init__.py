"""Constrained unitary dynamics on projective quantum state space.

Core objects: Hermitian observables and unit-norm pure states
(:mod:`qconstrain.geometry`), two constraint engines built on operator-level
bracket identities (:mod:`qconstrain.constraints`), coordinate charts and the
induced symplectic structure (:mod:`qconstrain.charts`), an adaptive
integrator with conservation diagnostics (:mod:`qconstrain.integrate`), and
a registry of built-in spin models (:mod:`qconstrain.models`).
"""

from .charts import (
    Chart,
    finite_difference_gradient,
    induced_symplectic_matrix,
    projective_chart,
    projective_coords,
)
from .constraints import (
    ChartFunctionConstraint,
    Constraint,
    ConstraintSet,
    ExpectationConstraint,
    MultiplierSolution,
    gauge_fix,
    m_matrix,
    metric_constrained_field,
    metric_multipliers,
    omega_matrix,
    state_real_coords,
    symplectic_constrained_field,
    symplectic_multipliers,
)
from .errors import (
    BasisError,
    ChartSingularity,
    DimensionError,
    DriftAbort,
    EvaluationError,
    FieldError,
    InvalidCoordinates,
    InvalidInput,
    ProjectionFailure,
    QconstrainError,
    SingularConstraintMatrix,
    StepLimit,
)
from .geometry import (
    ActionAngleCoords,
    HermitianOperator,
    PureState,
    TangentVector,
    action_angle_coords,
    action_angle_state,
    commutator_bracket,
    covariance_bracket,
    directional_derivative,
    expectation,
    fs_distance,
    gradient_vector_field,
    hamiltonian_vector_field,
)
from .integrate import (
    FixedPoint,
    IntegratorOptions,
    Trajectory,
    find_fixed_points,
    integrate,
    project_to_surface,
)
from .models import (
    REGISTRY,
    BlochCoords,
    Example1Params,
    TwoSphereCoords,
    bloch_coords,
    bloch_state,
    concurrence_surrogate,
    example1_field,
    example2_constraint_value,
    example2_field,
    heisenberg_hamiltonian,
    identity,
    kron,
    pair_bloch_coords,
    pauli,
    product_state,
    separability_constraints,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
