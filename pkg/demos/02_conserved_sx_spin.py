"""Single spin precessing under sz while <sx> is held constant.

Unconstrained precession rotates the Bloch vector rigidly about the z axis.
Forcing <sx> to stay at its initial value (the metric engine removes the
gradient component of the flow) bends the motion onto circles about the x
axis instead, and the sphere decomposes into four non-interacting quarters
whose trajectories all slide toward fixed points on the equator.

Run with --plot to save a vector-field portrait (needs matplotlib).
"""

import argparse

import numpy as np

from qconstrain import (
    ConstraintSet,
    ExpectationConstraint,
    IntegratorOptions,
    PureState,
    expectation,
    find_fixed_points,
    integrate,
    metric_constrained_field,
)
from qconstrain.models import (
    _push_bloch_velocity,
    bloch_state,
    example2_field,
    pauli,
    sphere_merge_embedding,
    sphere_residual,
    wrap_sphere_coords,
)

parser = argparse.ArgumentParser()
parser.add_argument("--plot", action="store_true", help="save a field portrait PNG")
args = parser.parse_args()

print("Generic metric engine vs the closed-form angle equations at one point:")
th, ph = 0.9, 2.3
x = bloch_state(th, ph)
cs = ConstraintSet([ExpectationConstraint(pauli("x"), expectation(pauli("x"), x))])
engine = _push_bloch_velocity(x, metric_constrained_field(cs, pauli("z"), x))
closed = example2_field([th, ph])
print(f"  engine      (theta', phi') = ({engine[0]:+.10f}, {engine[1]:+.10f})")
print(f"  closed form (theta', phi') = ({closed[0]:+.10f}, {closed[1]:+.10f})")

print("\nIntegrating the closed-form flow for t = 30 from (0.3, 0.2):")
traj = integrate(example2_field, np.array([0.3, 0.2]),
                 IntegratorOptions(t_end=30.0, rel_tol=1e-10, abs_tol=1e-12))
sx = np.sin(traj.points[:, 0]) * np.cos(traj.points[:, 1])
print(f"  <sx> drift over the whole run: {np.max(np.abs(sx - sx[0])):.2e}")
print(f"  final angle from the equator:  {abs(traj.points[-1][0] - np.pi/2):.2e}")

print("\nScanning a 40x40 grid for fixed points:")
thetas = np.linspace(0.0, np.pi, 40)
phis = np.linspace(0.0, 2 * np.pi, 40, endpoint=False)
seeds = np.array([[t, p] for t in thetas for p in phis])
spacing = max(np.pi / 39, 2 * np.pi / 40)
points = find_fixed_points(example2_field, seeds, 1e-10,
                           residual_fn=sphere_residual,
                           embed_fn=sphere_merge_embedding,
                           normalize_fn=wrap_sphere_coords, max_move=spacing)
eq = sum(1 for p in points if abs(p.coords[0] - np.pi / 2) <= 1e-6)
print(f"  {len(points)} fixed points: {eq} on the equator, "
      f"{len(points) - eq} on the phi = pi/2 and 3pi/2 meridians (and poles)")

if args.plot:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    tt, pp = np.meshgrid(np.linspace(0.15, np.pi - 0.15, 24),
                         np.linspace(0.0, 2 * np.pi, 36, endpoint=False))
    u = np.zeros_like(tt)
    v = np.zeros_like(tt)
    mask = np.zeros_like(tt, dtype=bool)
    for i in range(tt.shape[0]):
        for j in range(tt.shape[1]):
            try:
                vel = example2_field([tt[i, j], pp[i, j]])
                v[i, j], u[i, j] = vel[0], vel[1] * np.sin(tt[i, j])
            except Exception:
                mask[i, j] = True
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.quiver(pp[~mask], tt[~mask], u[~mask], v[~mask], angles="xy")
    ax.axhline(np.pi / 2, color="tab:red", lw=1.5, label="equatorial fixed points")
    for mph in (np.pi / 2, 3 * np.pi / 2):
        ax.axvline(mph, color="tab:orange", lw=1.5)
    ax.set_xlabel("phi")
    ax.set_ylabel("theta")
    ax.invert_yaxis()
    ax.legend(loc="upper right")
    ax.set_title("constrained single-spin field; quarters do not mix")
    fig.tight_layout()
    fig.savefig("conserved_sx_field.png", dpi=150)
    print("\nwrote conserved_sx_field.png")
