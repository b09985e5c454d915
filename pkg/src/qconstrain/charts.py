"""Real-coordinate charts on projective state space.

A chart wraps a smooth embedding ``coords -> PureState`` and derives from it
the coordinate expressions of the metric and symplectic structures.  With
``e_a`` the tangent-projected partial derivatives of the embedding, the
conventions that reproduce the operator brackets of :mod:`qconstrain.geometry`
are::

    g_ab     = 4 Re<e_a|e_b>        (metric, lower indices)
    omega_ab = 2 Im<e_a|e_b>        (symplectic form, lower indices)

with inverses satisfying ``g_ab g^bc = delta`` and
``omega_ab omega^bc = -delta``.  Contracting chart gradients of two
expectation functions with ``omega^ab`` / ``g^ab`` then matches
``commutator_bracket`` / ``covariance_bracket``.
"""

from __future__ import annotations

import numpy as np

from .errors import ChartSingularity, EvaluationError, SingularConstraintMatrix
from .geometry import HermitianOperator, PureState, TangentVector, expectation

DEFAULT_FD_STEP = 1e-6


def _fd_steps(coords: np.ndarray, step: float | None) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    if step is not None:
        return np.full(coords.shape, float(step))
    return DEFAULT_FD_STEP * np.maximum(1.0, np.abs(coords))


def finite_difference_gradient(f, coords, step: float | None = None) -> np.ndarray:
    """Central-difference gradient of a scalar function of real coordinates.

    The default per-coordinate step is ``1e-6 * max(1, |coord|)``, balancing
    truncation against round-off at double precision; the error is O(step^2).
    """
    coords = np.asarray(coords, dtype=float)
    steps = _fd_steps(coords, step)
    grad = np.empty(coords.size)
    for a in range(coords.size):
        e = np.zeros(coords.size)
        e[a] = steps[a]
        fp, fm = f(coords + e), f(coords - e)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise EvaluationError(f"function returned a non-finite value near {coords}")
        grad[a] = (fp - fm) / (2.0 * steps[a])
    return grad


class Chart:
    """Coordinate patch defined by a smooth embedding into state space."""

    def __init__(self, dim_coords: int, embed, name: str = "chart",
                 fd_step: float | None = None):
        self.dim_coords = int(dim_coords)
        self._embed = embed
        self.name = name
        self.fd_step = fd_step

    def state(self, coords) -> PureState:
        return self._embed(np.asarray(coords, dtype=float))

    def frame(self, coords) -> np.ndarray:
        """Tangent-projected partial derivatives of the embedding.

        Returns a ``dim x dim_coords`` complex matrix whose columns are the
        coordinate directions as tangent vectors at the embedded state.
        Raises :class:`ChartSingularity` when the columns do not span a
        ``dim_coords``-dimensional real subspace.
        """
        coords = np.asarray(coords, dtype=float)
        x = self.state(coords).amplitudes
        steps = _fd_steps(coords, self.fd_step)
        cols = np.empty((x.size, self.dim_coords), dtype=complex)
        for a in range(self.dim_coords):
            e = np.zeros(self.dim_coords)
            e[a] = steps[a]
            d = (self.state(coords + e).amplitudes - self.state(coords - e).amplitudes)
            d /= 2.0 * steps[a]
            cols[:, a] = d - x * (x.conj() @ d)
        stacked = np.vstack([cols.real, cols.imag])
        if np.linalg.matrix_rank(stacked, tol=1e-9) < self.dim_coords:
            raise ChartSingularity(f"{self.name}: frame is rank-deficient at {coords}")
        return cols

    def metric_matrix(self, coords) -> np.ndarray:
        """Fubini-Study metric in chart coordinates (lower indices)."""
        e = self.frame(coords)
        return 4.0 * np.real(e.conj().T @ e)

    def omega_matrix(self, coords) -> np.ndarray:
        """Symplectic form in chart coordinates (lower indices)."""
        e = self.frame(coords)
        return 2.0 * np.imag(e.conj().T @ e)

    def metric_inverse(self, coords) -> np.ndarray:
        return np.linalg.inv(self.metric_matrix(coords))

    def omega_inverse(self, coords) -> np.ndarray:
        """Inverse symplectic structure, with ``omega_ab omega^bc = -delta``."""
        low = self.omega_matrix(coords)
        try:
            inv = np.linalg.inv(low)
        except np.linalg.LinAlgError as exc:
            raise ChartSingularity(f"{self.name}: symplectic form singular") from exc
        w = -inv
        return (w - w.T) / 2.0

    def expectation_function(self, op: HermitianOperator):
        """Pull an observable's expectation back to a function of coordinates."""
        def f(coords):
            return expectation(op, self.state(coords))
        return f

    def pullback(self, constraint):
        """Pull a constraint's value function back to chart coordinates."""
        def f(coords):
            return constraint.value(self.state(coords))
        return f

    def gradient(self, f, coords) -> np.ndarray:
        return finite_difference_gradient(f, coords, self.fd_step)

    def coordinate_velocity(self, coords, tangent) -> np.ndarray:
        """Express a tangent vector at ``embed(coords)`` in coordinate velocities.

        Solves the real least-squares system over the frame; for charts of a
        submanifold the tangent must lie in the frame's span for the result
        to be meaningful.
        """
        if isinstance(tangent, TangentVector):
            tangent = tangent.components
        cols = self.frame(coords)
        a = np.vstack([cols.real, cols.imag])
        rhs = np.concatenate([np.real(tangent), np.imag(tangent)])
        sol, _, rank, _ = np.linalg.lstsq(a, rhs, rcond=None)
        if rank < self.dim_coords:
            raise ChartSingularity(f"{self.name}: frame is rank-deficient at {coords}")
        return sol


def induced_symplectic_matrix(chart: Chart, cs, coords) -> np.ndarray:
    """Inverse symplectic structure induced on the constraint level set.

    Equal to the unconstrained ``omega^ab`` plus a correction built from the
    chart gradients of the constraints; the result is antisymmetric and
    annihilates every constraint gradient, so the constrained flow is just
    this matrix contracted with the ordinary gradient of the Hamiltonian.
    Passing ``cs=None`` returns the unconstrained matrix (test hook).
    """
    coords = np.asarray(coords, dtype=float)
    w = chart.omega_inverse(coords)
    if cs is None:
        return w
    grads = np.column_stack([chart.gradient(chart.pullback(c), coords) for c in cs])
    u = w @ grads
    pairing = grads.T @ w @ grads
    pairing = (pairing - pairing.T) / 2.0
    sv = np.linalg.svd(pairing, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < 1e-10 * sv[0]:
        raise SingularConstraintMatrix(
            f"constraint pairing matrix singular at {coords} (singular values {sv})"
        )
    correction = u @ np.linalg.solve(pairing, u.T)
    full = w + correction
    return (full - full.T) / 2.0


def projective_chart(dim: int, anchor: int = 0, name: str | None = None) -> Chart:
    """Full chart of the ray space: all amplitudes except a real anchor.

    Coordinates are the interleaved (Re, Im) parts of the non-anchor
    amplitudes; the anchor amplitude is the positive real root fixing the
    norm.  Valid while the non-anchor populations sum below one.
    """
    def embed(coords):
        c = np.zeros(dim, dtype=complex)
        others = [j for j in range(dim) if j != anchor]
        total = 0.0
        for k, j in enumerate(others):
            c[j] = coords[2 * k] + 1j * coords[2 * k + 1]
            total += abs(c[j]) ** 2
        if total >= 1.0 - 1e-12:
            raise ChartSingularity(
                f"projective chart anchored at {anchor} undefined: populations sum to {total:.6g}"
            )
        c[anchor] = np.sqrt(1.0 - total)
        return PureState(c)

    return Chart(2 * (dim - 1), embed, name or f"projective-{dim}-anchor{anchor}")


def projective_coords(x: PureState, anchor: int | None = None) -> tuple[np.ndarray, int]:
    """Coordinates of a state in the projective chart anchored at its largest amplitude.

    Returns ``(coords, anchor)``; pass the anchor back to
    :func:`projective_chart` to build the matching chart.
    """
    c = x.amplitudes
    if anchor is None:
        anchor = int(np.argmax(np.abs(c)))
    if abs(c[anchor]) < 1e-12:
        raise ChartSingularity(f"anchor amplitude {anchor} vanishes")
    c = c * np.exp(-1j * np.angle(c[anchor]))
    others = [j for j in range(x.dim) if j != anchor]
    coords = np.empty(2 * (x.dim - 1))
    for k, j in enumerate(others):
        coords[2 * k] = c[j].real
        coords[2 * k + 1] = c[j].imag
    return coords, anchor
