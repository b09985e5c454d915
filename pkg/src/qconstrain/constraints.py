"""Symplectic and metric constraint engines.

Both engines modify the Schrodinger flow ``X_H`` so that a set of constraint
functions stays constant:

* symplectic: ``X_H + sum_i lambda_i X_i`` where ``X_i`` is the Schrodinger
  flow of constraint i.  The multipliers solve ``omega @ lam = -b`` with
  ``omega`` the antisymmetric matrix of constraint commutator brackets and
  ``b_i`` the commutator bracket of constraint i with H.  Requires an even
  number of constraints (an odd antisymmetric matrix is always singular)
  and conserves energy exactly.
* metric: ``X_H - sum_i lambda_i Y_i`` where ``Y_i`` is the gradient flow of
  constraint i; multipliers solve ``M @ lam = b`` with ``M`` the covariance
  matrix of the constraints.  Works for any N but need not conserve energy.

Constraints come in two kinds.  Expectation constraints conserve ``<op>``;
their bracket rows are exact operator identities.  Chart-function constraints
are scalar functions of the gauge-fixed amplitude coordinates (largest-
modulus amplitude rotated real nonnegative); their differential is either
supplied analytically or taken by central differences along a tangent basis.
Every constraint exposes its differential through a tangent-space gradient
representer ``Y`` with ``dPhi(V) = 4 Re<Y|V>``, which is exactly the
gradient flow vector for expectation constraints, so both kinds run through
the same linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidInput, SingularConstraintMatrix
from .geometry import (
    HermitianOperator,
    PureState,
    TangentVector,
    commutator_bracket,
    covariance_bracket,
    expectation,
    gradient_vector_field,
    hamiltonian_vector_field,
)

# A pairing matrix is declared singular when its smallest singular value
# falls below SINGULAR_RTOL times its largest (scale-relative, robust across
# models) or when the whole matrix is numerically zero (SINGULAR_FLOOR,
# needed because a 1x1 matrix always has condition one: a single constraint
# evaluated at an eigenstate has zero variance and must still be rejected).
SINGULAR_RTOL = 1e-10
SINGULAR_FLOOR = 1e-12

FD_STEP = 1e-6


def gauge_fix(amplitudes: np.ndarray) -> np.ndarray:
    """Rotate the largest-modulus amplitude to be real nonnegative.

    Ties break toward the lowest index, so the result is a canonical
    representative of the ray wherever the largest modulus is unique.
    """
    c = np.asarray(amplitudes, dtype=complex)
    m = int(np.argmax(np.abs(c)))
    phase = c[m] / abs(c[m])
    return c * phase.conjugate()


def state_real_coords(x: PureState) -> np.ndarray:
    """Interleaved (Re, Im) coordinates of the gauge-fixed representative."""
    c = gauge_fix(x.amplitudes)
    out = np.empty(2 * c.size)
    out[0::2] = c.real
    out[1::2] = c.imag
    return out


def tangent_basis(x: PureState) -> list[np.ndarray]:
    """Complex orthonormal basis of the tangent space at ``x``.

    Together with their ``i`` multiples these span the real tangent space.
    """
    d = x.dim
    anchor = int(np.argmax(np.abs(x.amplitudes)))
    cols = [x.amplitudes] + [np.eye(d)[j] for j in range(d) if j != anchor]
    q, _ = np.linalg.qr(np.array(cols, dtype=complex).T)
    return [q[:, k] for k in range(1, d)]


class Constraint:
    """Scalar function on state space whose value the engines hold fixed."""

    label: str = "phi"

    def value(self, x: PureState) -> float:
        raise NotImplementedError

    def gradient_field(self, x: PureState) -> TangentVector:
        """Tangent representer Y with ``dPhi(V) = 4 Re<Y|V>`` for tangent V."""
        raise NotImplementedError

    def with_target(self, target: float) -> "Constraint":
        """Copy whose ``value`` is shifted to vanish at the given target."""
        raise NotImplementedError


class ExpectationConstraint(Constraint):
    """Conservation of an observable: ``Phi(x) = <op> - target``."""

    def __init__(self, operator: HermitianOperator, target: float = 0.0, label: str | None = None):
        spectrum = operator.eigenvalues()
        if not (spectrum[0] - 1e-9 <= target <= spectrum[-1] + 1e-9):
            raise InvalidInput(
                f"target {target} lies outside the spectral range "
                f"[{spectrum[0]:.6g}, {spectrum[-1]:.6g}]"
            )
        self.operator = operator
        self.target = float(target)
        self.label = label or "expectation"

    @property
    def dim(self) -> int:
        return self.operator.dim

    def value(self, x: PureState) -> float:
        return expectation(self.operator, x) - self.target

    def gradient_field(self, x: PureState) -> TangentVector:
        return gradient_vector_field(self.operator, x)

    def with_target(self, target: float) -> "ExpectationConstraint":
        return ExpectationConstraint(self.operator, target, self.label)


class ChartFunctionConstraint(Constraint):
    """Constraint given by a function of the gauge-fixed real coordinates.

    ``func`` maps the interleaved (Re, Im) coordinates of the gauge-fixed
    representative to a real value.  ``differential(amplitudes, v)``, when
    supplied, must return the derivative of the function along the tangent
    direction ``v`` at the normalized amplitude vector; otherwise central
    differences with step ``fd_step`` are used.
    """

    def __init__(self, func, dim: int, differential=None, target: float = 0.0,
                 label: str = "chart", fd_step: float = FD_STEP):
        self.func = func
        self.dim = int(dim)
        self.differential = differential
        self.target = float(target)
        self.label = label
        self.fd_step = fd_step

    def value(self, x: PureState) -> float:
        return float(self.func(state_real_coords(x))) - self.target

    def _fd_differential(self, amps: np.ndarray, v: np.ndarray) -> float:
        h = self.fd_step
        plus = amps + h * v
        minus = amps - h * v
        fp = self.func(state_real_coords(PureState(plus)))
        fm = self.func(state_real_coords(PureState(minus)))
        return (fp - fm) / (2.0 * h)

    def gradient_field(self, x: PureState) -> TangentVector:
        diff = self.differential or self._fd_differential
        amps = x.amplitudes
        y = np.zeros(x.dim, dtype=complex)
        for u in tangent_basis(x):
            y += 0.25 * diff(amps, u) * u
            y += 0.25 * diff(amps, 1j * u) * (1j * u)
        # project out any residual component along the base state
        y -= amps * (amps.conj() @ y)
        return TangentVector(x, y)

    def with_target(self, target: float) -> "ChartFunctionConstraint":
        return ChartFunctionConstraint(
            self.func, self.dim, self.differential, target, self.label, self.fd_step
        )


class ConstraintSet:
    """Ordered collection of constraints sharing one state dimension."""

    def __init__(self, constraints):
        constraints = list(constraints)
        if not constraints:
            raise InvalidInput("a constraint set needs at least one constraint")
        dims = {c.dim for c in constraints}
        if len(dims) > 1:
            raise DimensionError(f"constraints disagree on dimension: {dims}")
        self.constraints = constraints

    @property
    def n(self) -> int:
        return len(self.constraints)

    @property
    def dim(self) -> int:
        return self.constraints[0].dim

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.constraints]

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return self.n

    def values(self, x: PureState) -> np.ndarray:
        return np.array([c.value(x) for c in self.constraints])

    def offset_to(self, x: PureState) -> "ConstraintSet":
        """Shift targets so every constraint vanishes at ``x``.

        The engines conserve whatever value a constraint has initially, so
        re-anchoring the targets makes any start state admissible.
        """
        return ConstraintSet(
            [c.with_target(c.target + c.value(x)) for c in self.constraints]
        )

    def gradient_fields(self, x: PureState) -> list[TangentVector]:
        return [c.gradient_field(x) for c in self.constraints]


@dataclass(frozen=True)
class MultiplierSolution:
    """Lagrange multipliers plus the pairing matrix they were solved from."""

    lambdas: np.ndarray
    matrix_used: np.ndarray
    condition_estimate: float


def _pairing_entry(ci, cj, x, ys, i, j, kind):
    # Expectation pairs reuse the exact operator brackets; everything else
    # contracts the gradient representers.
    exp_pair = isinstance(ci, ExpectationConstraint) and isinstance(cj, ExpectationConstraint)
    if kind == "omega":
        if exp_pair:
            return commutator_bracket(ci.operator, cj.operator, x)
        return 8.0 * np.imag(ys[i].components.conj() @ ys[j].components)
    if exp_pair:
        return covariance_bracket(ci.operator, cj.operator, x)
    return 4.0 * np.real(ys[i].components.conj() @ ys[j].components)


def _pairing_matrix(cs: ConstraintSet, x: PureState, kind: str, ys=None) -> np.ndarray:
    if ys is None:
        ys = cs.gradient_fields(x)
    n = cs.n
    mat = np.zeros((n, n))
    for i, ci in enumerate(cs):
        for j, cj in enumerate(cs):
            if kind == "omega" and j <= i:
                continue
            mat[i, j] = _pairing_entry(ci, cj, x, ys, i, j, kind)
    if kind == "omega":
        mat = mat - mat.T
    else:
        mat = (mat + mat.T) / 2.0
    return mat


def omega_matrix(cs: ConstraintSet, x: PureState) -> np.ndarray:
    """Antisymmetric matrix of pairwise commutator brackets of the constraints."""
    return _pairing_matrix(cs, x, "omega")


def m_matrix(cs: ConstraintSet, x: PureState) -> np.ndarray:
    """Symmetric positive-semidefinite covariance matrix of the constraints."""
    return _pairing_matrix(cs, x, "metric")


def _hamiltonian_brackets(ys, xh) -> np.ndarray:
    """b_i = dPhi_i(X_H), the commutator bracket of constraint i with H."""
    return np.array([4.0 * np.real(y.components.conj() @ xh.components) for y in ys])


def _solve(matrix: np.ndarray, rhs: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] <= SINGULAR_FLOOR or sv[-1] < SINGULAR_RTOL * sv[0]:
        raise SingularConstraintMatrix(
            f"{what} matrix is singular (singular values {sv})",
            condition_estimate=float("inf"),
        )
    cond = float(sv[0] / sv[-1])
    return np.linalg.solve(matrix, rhs), cond


def symplectic_multipliers(cs: ConstraintSet, h: HermitianOperator,
                           x: PureState) -> MultiplierSolution:
    """Multipliers of the symplectic engine; requires an even constraint count."""
    if cs.n % 2 == 1:
        raise SingularConstraintMatrix(
            f"symplectic engine needs an even number of constraints, got {cs.n}; "
            "the antisymmetric pairing matrix of an odd set is always singular"
        )
    ys = cs.gradient_fields(x)
    xh = hamiltonian_vector_field(h, x)
    omega = _pairing_matrix(cs, x, "omega", ys)
    b = _hamiltonian_brackets(ys, xh)
    lam, cond = _solve(omega, -b, "constraint commutator")
    return MultiplierSolution(lambdas=lam, matrix_used=omega, condition_estimate=cond)


def metric_multipliers(cs: ConstraintSet, h: HermitianOperator,
                       x: PureState) -> MultiplierSolution:
    """Multipliers of the metric engine; needs the covariance matrix invertible."""
    ys = cs.gradient_fields(x)
    xh = hamiltonian_vector_field(h, x)
    m = _pairing_matrix(cs, x, "metric", ys)
    b = _hamiltonian_brackets(ys, xh)
    lam, cond = _solve(m, b, "constraint covariance")
    return MultiplierSolution(lambdas=lam, matrix_used=m, condition_estimate=cond)


def symplectic_constrained_field(cs: ConstraintSet, h: HermitianOperator, x: PureState,
                                 max_condition: float | None = None) -> TangentVector:
    """Schrodinger flow of H plus multiplier-weighted constraint flows.

    The derivative of every constraint along the result vanishes, and so does
    the derivative of ``<H>`` (antisymmetry of the pairing).
    """
    if cs.n % 2 == 1:
        raise SingularConstraintMatrix(
            f"symplectic engine needs an even number of constraints, got {cs.n}"
        )
    ys = cs.gradient_fields(x)
    xh = hamiltonian_vector_field(h, x)
    omega = _pairing_matrix(cs, x, "omega", ys)
    b = _hamiltonian_brackets(ys, xh)
    lam, cond = _solve(omega, -b, "constraint commutator")
    if max_condition is not None and cond > max_condition:
        raise SingularConstraintMatrix(
            f"constraint commutator matrix condition {cond:.3g} exceeds {max_condition:.3g}",
            condition_estimate=cond,
        )
    v = xh.components.copy()
    for li, yi in zip(lam, ys):
        v += li * (-2j * yi.components)  # Schrodinger flow of constraint i
    return TangentVector(x, v)


def metric_constrained_field(cs: ConstraintSet, h: HermitianOperator, x: PureState,
                             max_condition: float | None = None) -> TangentVector:
    """Schrodinger flow of H with its component along the constraint gradients removed."""
    ys = cs.gradient_fields(x)
    xh = hamiltonian_vector_field(h, x)
    m = _pairing_matrix(cs, x, "metric", ys)
    b = _hamiltonian_brackets(ys, xh)
    lam, cond = _solve(m, b, "constraint covariance")
    if max_condition is not None and cond > max_condition:
        raise SingularConstraintMatrix(
            f"constraint covariance matrix condition {cond:.3g} exceeds {max_condition:.3g}",
            condition_estimate=cond,
        )
    v = xh.components.copy()
    for li, yi in zip(lam, ys):
        v -= li * yi.components
    return TangentVector(x, v)


def constraint_derivative(c: Constraint, v: TangentVector) -> float:
    """Derivative of the constraint value along a tangent vector."""
    y = c.gradient_field(v.base)
    return float(4.0 * np.real(y.components.conj() @ v.components))
