import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


# ---------------------------------------------------------------------------
# Independent oracles.  These deliberately avoid the package code paths:
# single-spin quantities go through the density matrix rho = (I + n.sigma)/2
# and explicit trace algebra, states and operators are built from raw numpy.
# ---------------------------------------------------------------------------

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def bloch_vector(theta, phi):
    return np.array([
        np.sin(theta) * np.cos(phi),
        np.sin(theta) * np.sin(phi),
        np.cos(theta),
    ])


def bloch_density(theta, phi):
    n = bloch_vector(theta, phi)
    return 0.5 * (I2 + n[0] * SX + n[1] * SY + n[2] * SZ)


def oracle_expectation(op, theta, phi):
    """Tr(rho A) for a Bloch state, via the density matrix."""
    return float(np.real(np.trace(bloch_density(theta, phi) @ op)))


def oracle_commutator_pairing(a, b, theta, phi):
    """-i Tr(rho [A, B])."""
    rho = bloch_density(theta, phi)
    return float(np.real(-1j * np.trace(rho @ (a @ b - b @ a))))


def oracle_covariance_pairing(a, b, theta, phi):
    """Tr(rho {A,B})/2 - Tr(rho A) Tr(rho B)."""
    rho = bloch_density(theta, phi)
    sym = 0.5 * np.real(np.trace(rho @ (a @ b + b @ a)))
    return float(sym - np.real(np.trace(rho @ a)) * np.real(np.trace(rho @ b)))


def random_state_vector(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2.0


def numeric_directional_derivative(value_fn, amps, direction, h=1e-7):
    """Central difference of a state function along a tangent direction."""
    plus = amps + h * direction
    minus = amps - h * direction
    return (value_fn(plus / np.linalg.norm(plus)) - value_fn(minus / np.linalg.norm(minus))) / (2 * h)
