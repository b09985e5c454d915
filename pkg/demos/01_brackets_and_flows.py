"""Tour of the core geometry: states, brackets, and the two vector fields.

Every quantity on the ray space is an expectation value, and its evolution
under any flow is a bracket.  This script shows the two brackets side by
side, checks their duality with the flows numerically, and finishes with
the exactly solvable free evolution in action-angle coordinates.
"""

import numpy as np

from qconstrain import (
    ActionAngleCoords,
    HermitianOperator,
    IntegratorOptions,
    PureState,
    action_angle_coords,
    action_angle_state,
    commutator_bracket,
    covariance_bracket,
    directional_derivative,
    expectation,
    gradient_vector_field,
    hamiltonian_vector_field,
    integrate,
)
from qconstrain.models import bloch_state, pauli

theta, phi = np.pi / 3, np.pi / 5
x = bloch_state(theta, phi)
sx, sy, sz = pauli("x"), pauli("y"), pauli("z")

print("Bloch state at (theta, phi) =", (round(theta, 4), round(phi, 4)))
print(f"  <sx> = {expectation(sx, x):+.6f}   (sin(theta)cos(phi) = {np.sin(theta)*np.cos(phi):+.6f})")
print(f"  <sy> = {expectation(sy, x):+.6f}   (sin(theta)sin(phi) = {np.sin(theta)*np.sin(phi):+.6f})")
print(f"  <sz> = {expectation(sz, x):+.6f}   (cos(theta)         = {np.cos(theta):+.6f})")

print("\nThe commutator bracket is the rate of change under Schrodinger flow:")
v = hamiltonian_vector_field(sz, x)
print(f"  d<sx>/dt along the sz flow = {directional_derivative(sx, v):+.6f}")
print(f"  commutator_bracket(sx, sz) = {commutator_bracket(sx, sz, x):+.6f}")

print("\nThe covariance bracket is the rate of change under gradient flow:")
w = gradient_vector_field(sx, x)
print(f"  d<sx>/dt along its own gradient = {directional_derivative(sx, w):+.6f}")
print(f"  covariance_bracket(sx, sx)      = {covariance_bracket(sx, sx, x):+.6f}")
print("  (this is just the variance of sx in the state)")

print("\nEigenstates are exactly the stationary points of the flow:")
up = PureState([1, 0])
print(f"  |flow| at the sz eigenstate = {hamiltonian_vector_field(sz, up).norm():.2e}")

print("\nFree evolution in action-angle coordinates q(t) = q(0) + rate * t:")
energies = np.array([1.2, 0.4, -0.3, -1.1])
h = HermitianOperator(np.diag(energies))
eye = np.eye(4)
basis = [PureState(eye[:, k]) for k in range(4)]
coords0 = ActionAngleCoords(p=np.array([0.3, 0.2, 0.1]), q=np.array([0.5, 1.0, 1.5]))
x0 = action_angle_state(coords0, basis)

flow = lambda y: hamiltonian_vector_field(h, PureState(y)).components
traj = integrate(flow, x0.amplitudes, IntegratorOptions(
    t_end=4.0, rel_tol=1e-11, abs_tol=1e-13, renormalize=True))

rates = energies[:3] - energies[3]
final = action_angle_coords(PureState(traj.points[-1]), basis)
predicted = np.mod(coords0.q + rates * traj.times[-1], 2 * np.pi)
print(f"  populations kept constant to {np.max(np.abs(final.p - coords0.p)):.2e}")
print(f"  angles at t=4: integrated {np.round(final.q, 8)}")
print(f"                 predicted  {np.round(predicted, 8)}")
