"""States, observables, and the bracket geometry of projective state space.

A pure state is stored as a unit-norm complex vector; physically it stands
for the whole ray through that vector, and every operation here is invariant
under multiplication of the representative by a unit-modulus phase.  Tangent
vectors to the ray space are complex vectors orthogonal to their base state.

Two brackets encode the geometry through operator identities instead of
explicit coordinate tensors:

* ``commutator_bracket(F, G, x) = -i<[F, G]>`` is the symplectic pairing:
  it equals the derivative of ``<F>`` along the Schrodinger flow generated
  by ``G``.
* ``covariance_bracket(F, G, x) = Re<FG> - <F><G>`` is the metric pairing:
  it equals the derivative of ``<F>`` along the gradient flow of ``G``.

The matching flows are ``hamiltonian_vector_field(H, x) = -i(H - <H>)|x>``
and ``gradient_vector_field(F, x) = (F - <F>)|x> / 2``.  These normalization
choices are pinned by the requirement that the metric-constrained engine in
:mod:`qconstrain.constraints` agrees with the closed-form single-spin model
in :mod:`qconstrain.models`; see the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisError, DimensionError, InvalidCoordinates, InvalidInput

HERMITIAN_ATOL = 1e-10
TANGENT_ATOL = 1e-10


class HermitianOperator:
    """Dense Hermitian matrix representing an observable or Hamiltonian.

    Inputs within ``1e-10`` of Hermitian are symmetrized to ``(A + A^H)/2``;
    anything farther off is rejected, since a silently non-Hermitian matrix
    corrupts every bracket built on it.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 2:
            raise DimensionError("operators act on dimension >= 2")
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_ATOL:
            raise InvalidInput("matrix is not Hermitian within 1e-10")
        a = (a + a.conj().T) / 2.0
        a.setflags(write=False)
        self._entries = a

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def __add__(self, other):
        return HermitianOperator(self._entries + other.entries)

    def __sub__(self, other):
        return HermitianOperator(self._entries - other.entries)

    def __mul__(self, scalar):
        return HermitianOperator(self._entries * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return HermitianOperator(-self._entries)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._entries)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class PureState:
    """Unit-norm complex vector chosen as the representative of a ray."""

    __slots__ = ("_amplitudes",)

    def __init__(self, amplitudes):
        a = np.array(amplitudes, dtype=complex).ravel()
        if a.size < 2:
            raise DimensionError("states live in dimension >= 2")
        n = np.linalg.norm(a)
        if not np.isfinite(n) or n == 0.0:
            raise InvalidInput("state vector must be nonzero and finite")
        a = a / n
        a.setflags(write=False)
        self._amplitudes = a

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def dim(self) -> int:
        return self._amplitudes.size

    def overlap(self, other: "PureState") -> complex:
        """Inner product ``<self|other>``."""
        _check_dims(self.dim, other.dim)
        return complex(self._amplitudes.conj() @ other._amplitudes)

    def __repr__(self):
        return f"PureState(dim={self.dim})"


class TangentVector:
    """Velocity on the ray space: a complex vector orthogonal to its base."""

    __slots__ = ("base", "components")

    def __init__(self, base: PureState, components):
        c = np.array(components, dtype=complex).ravel()
        if c.size != base.dim:
            raise DimensionError("tangent components must match the base dimension")
        if abs(base.amplitudes.conj() @ c) > TANGENT_ATOL * max(1.0, np.linalg.norm(c)):
            raise InvalidInput("components are not orthogonal to the base state")
        c.setflags(write=False)
        self.base = base
        self.components = c

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def __add__(self, other: "TangentVector"):
        if other.base is not self.base and not np.allclose(
            other.base.amplitudes, self.base.amplitudes, atol=1e-12
        ):
            raise InvalidInput("cannot add tangent vectors at different base points")
        return TangentVector(self.base, self.components + other.components)

    def __mul__(self, scalar):
        return TangentVector(self.base, self.components * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return TangentVector(self.base, -self.components)

    def __repr__(self):
        return f"TangentVector(dim={self.base.dim}, norm={self.norm():.3e})"


def _check_dims(*dims):
    if len(set(dims)) > 1:
        raise DimensionError(f"dimension mismatch: {dims}")


def expectation(op: HermitianOperator, x: PureState) -> float:
    """Expectation value ``<x|op|x>`` (the representative is unit norm)."""
    _check_dims(op.dim, x.dim)
    v = x.amplitudes.conj() @ (op.entries @ x.amplitudes)
    return float(v.real)


def commutator_bracket(f: HermitianOperator, g: HermitianOperator, x: PureState) -> float:
    """Symplectic pairing ``-i<[f, g]>``, evaluated as ``2 Im<fg>``."""
    _check_dims(f.dim, g.dim, x.dim)
    w = x.amplitudes.conj() @ (f.entries @ (g.entries @ x.amplitudes))
    return float(2.0 * w.imag)


def covariance_bracket(f: HermitianOperator, g: HermitianOperator, x: PureState) -> float:
    """Metric pairing: symmetrized covariance ``<{f,g}>/2 - <f><g>``."""
    _check_dims(f.dim, g.dim, x.dim)
    w = x.amplitudes.conj() @ (f.entries @ (g.entries @ x.amplitudes))
    return float(w.real - expectation(f, x) * expectation(g, x))


def hamiltonian_vector_field(h: HermitianOperator, x: PureState) -> TangentVector:
    """Schrodinger flow direction ``-i(h - <h>)|x>``.

    For every observable F the derivative of ``<F>`` along this vector is
    ``commutator_bracket(F, h, x)``; eigenvectors of ``h`` are fixed points.
    """
    _check_dims(h.dim, x.dim)
    mean = expectation(h, x)
    return TangentVector(x, -1j * (h.entries @ x.amplitudes - mean * x.amplitudes))


def gradient_vector_field(f: HermitianOperator, x: PureState) -> TangentVector:
    """Metric gradient of the expectation of ``f``: ``(f - <f>)|x> / 2``.

    For every observable G the derivative of ``<G>`` along this vector is
    ``covariance_bracket(G, f, x)``.
    """
    _check_dims(f.dim, x.dim)
    mean = expectation(f, x)
    return TangentVector(x, 0.5 * (f.entries @ x.amplitudes - mean * x.amplitudes))


def directional_derivative(f: HermitianOperator, v: TangentVector) -> float:
    """Derivative of ``<f>`` along the tangent vector ``v``: ``2 Re<x|f|v>``."""
    _check_dims(f.dim, v.base.dim)
    return float(2.0 * np.real(v.base.amplitudes.conj() @ (f.entries @ v.components)))


def fs_distance(x: PureState, y: PureState) -> float:
    """Geodesic distance ``arccos|<x|y>|``, in ``[0, pi/2]``."""
    _check_dims(x.dim, y.dim)
    return float(np.arccos(np.clip(abs(x.overlap(y)), 0.0, 1.0)))


@dataclass(frozen=True)
class ActionAngleCoords:
    """Energy-basis action-angle coordinates.

    ``p`` holds the populations of the first ``n`` basis states (the
    remaining population sits on the reference state ``n+1``); ``q`` holds
    the phases, in radians, relative to the reference state.
    """

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if p.ndim != 1 or q.shape != p.shape:
            raise InvalidCoordinates("p and q must be 1-d arrays of equal length")
        if np.any(p < 0.0):
            raise InvalidCoordinates("populations must be nonnegative")
        if p.sum() > 1.0 + 1e-12:
            raise InvalidCoordinates("populations must sum to at most 1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.p.size


def _check_orthonormal(basis):
    mat = np.array([b.amplitudes for b in basis])
    gram = mat.conj() @ mat.T
    if np.max(np.abs(gram - np.eye(len(basis)))) > 1e-10:
        raise BasisError("basis vectors are not orthonormal within 1e-10")


def action_angle_state(coords: ActionAngleCoords, basis) -> PureState:
    """Assemble ``sum_i sqrt(p_i) e^{-i q_i} |b_i> + sqrt(1 - sum p) |b_{n+1}>``."""
    if len(basis) != coords.n + 1:
        raise BasisError(f"need {coords.n + 1} basis states, got {len(basis)}")
    _check_dims(*[b.dim for b in basis])
    _check_orthonormal(basis)
    rest = 1.0 - coords.p.sum()
    amps = np.zeros(basis[0].dim, dtype=complex)
    for pi, qi, b in zip(coords.p, coords.q, basis):
        amps += np.sqrt(pi) * np.exp(-1j * qi) * b.amplitudes
    amps += np.sqrt(max(rest, 0.0)) * basis[-1].amplitudes
    return PureState(amps)


def action_angle_coords(x: PureState, basis) -> ActionAngleCoords:
    """Read action-angle coordinates of ``x`` off an orthonormal basis.

    Phases are measured relative to the last basis state, so the result is
    independent of the representative's global phase.  The reference
    amplitude must be nonzero.
    """
    _check_dims(x.dim, *[b.dim for b in basis])
    _check_orthonormal(basis)
    c = np.array([b.amplitudes.conj() @ x.amplitudes for b in basis])
    if abs(c[-1]) < 1e-12:
        raise InvalidCoordinates("reference amplitude vanishes; coordinates undefined")
    p = np.abs(c[:-1]) ** 2
    q = np.mod(np.angle(c[-1]) - np.angle(c[:-1]), 2.0 * np.pi)
    return ActionAngleCoords(p=p, q=q)
