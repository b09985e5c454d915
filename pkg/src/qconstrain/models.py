"""Built-in physical systems and the model registry.

Two families ship with the package, each in a closed-form ODE realization
and an operator-level realization driven by the generic constraint engines:

* ``example1``: a pair of coupled spin-1/2 particles constrained to remain
  disentangled, viewed on the product of two spheres.  The closed-form
  variant integrates four coupled angle ODEs with free rates
  ``(omega1, omega2, omega3)``; the operator variant pairs an isotropic
  exchange-plus-field Hamiltonian with the algebraic disentanglement
  constraints and the symplectic engine.
* ``example2``: a single spin-1/2 precessing under ``sigma_z`` while the
  expectation of ``sigma_x`` is held constant by the metric engine.  The
  closed-form variant is the corresponding pair of angle ODEs on the Bloch
  sphere.

``free-spin`` (unconstrained precession) completes the registry as the
exactly solvable baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    ChartFunctionConstraint,
    ConstraintSet,
    ExpectationConstraint,
    gauge_fix,
    metric_constrained_field,
    symplectic_constrained_field,
)
from .errors import ChartSingularity, InvalidCoordinates, InvalidInput
from .geometry import HermitianOperator, PureState, expectation, hamiltonian_vector_field

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

SIN_FLOOR = 1e-12


def pauli(axis: str) -> HermitianOperator:
    """Pauli matrix along ``'x'``, ``'y'`` or ``'z'``."""
    if axis not in _PAULI:
        raise InvalidInput(f"unknown Pauli axis {axis!r}")
    return HermitianOperator(_PAULI[axis])


def identity(dim: int = 2) -> HermitianOperator:
    return HermitianOperator(np.eye(dim, dtype=complex))


def kron(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    """Kronecker product; the result acts on the tensor-product space."""
    return HermitianOperator(np.kron(a.entries, b.entries))


def heisenberg_hamiltonian(j: float, b: float, coupling=None) -> HermitianOperator:
    """Two-spin Hamiltonian ``-J sum_k s_k (x) s_k - B (s_z (x) 1 + 1 (x) s_z)``.

    The exchange term is the isotropic dot-product coupling by default; pass
    a real 3x3 ``coupling`` matrix ``K`` to use ``sum_kl K_kl s_k (x) s_l``
    instead.
    """
    axes = ("x", "y", "z")
    if coupling is None:
        coupling = np.eye(3)
    coupling = np.asarray(coupling, dtype=float)
    if coupling.shape != (3, 3):
        raise InvalidInput("coupling must be a 3x3 real matrix")
    h = np.zeros((4, 4), dtype=complex)
    for k, ak in enumerate(axes):
        for l, al in enumerate(axes):
            if coupling[k, l] != 0.0:
                h += coupling[k, l] * np.kron(_PAULI[ak], _PAULI[al])
    h *= -float(j)
    eye = np.eye(2)
    h -= float(b) * (np.kron(_PAULI["z"], eye) + np.kron(eye, _PAULI["z"]))
    return HermitianOperator(h)


@dataclass(frozen=True)
class BlochCoords:
    """Spherical angles on one Bloch sphere; exact poles are excluded."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 < self.theta < np.pi):
            raise InvalidCoordinates(f"theta={self.theta} outside the open interval (0, pi)")
        object.__setattr__(self, "phi", float(np.mod(self.phi, 2.0 * np.pi)))


@dataclass(frozen=True)
class TwoSphereCoords:
    """Angles on the product of two Bloch spheres."""

    theta1: float
    phi1: float
    theta2: float
    phi2: float

    def __post_init__(self):
        for name in ("theta1", "theta2"):
            v = getattr(self, name)
            if not (0.0 < v < np.pi):
                raise InvalidCoordinates(f"{name}={v} outside the open interval (0, pi)")
        for name in ("phi1", "phi2"):
            object.__setattr__(self, name, float(np.mod(getattr(self, name), 2.0 * np.pi)))


@dataclass(frozen=True)
class Example1Params:
    """Free rates of the coupled-sphere ODE set, plus optional operator couplings."""

    omega1: float = 1.0
    omega2: float = 2.0
    omega3: float = 3.0
    j: float | None = None
    b: float | None = None

    def __post_init__(self):
        for name in ("omega1", "omega2", "omega3"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidInput(f"{name} must be finite")


def bloch_state(theta: float, phi: float) -> PureState:
    """Bloch embedding ``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``."""
    return PureState([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])


def bloch_coords(x: PureState) -> np.ndarray:
    """Spherical angles of a single-spin state, ``phi`` wrapped to [0, 2pi)."""
    sx = expectation(pauli("x"), x)
    sy = expectation(pauli("y"), x)
    sz = expectation(pauli("z"), x)
    theta = float(np.arccos(np.clip(sz, -1.0, 1.0)))
    phi = float(np.mod(np.arctan2(sy, sx), 2.0 * np.pi))
    return np.array([theta, phi])


def product_state(theta1, phi1=None, theta2=None, phi2=None) -> PureState:
    """Tensor product of two Bloch states; accepts four floats or a 4-vector."""
    if phi1 is None:
        theta1, phi1, theta2, phi2 = np.asarray(theta1, dtype=float)
    a = bloch_state(theta1, phi1).amplitudes
    b = bloch_state(theta2, phi2).amplitudes
    return PureState(np.kron(a, b))


def pair_bloch_coords(x: PureState) -> np.ndarray:
    """Per-spin spherical angles of a (separable) two-spin state.

    Uses the reduced single-spin expectations, so it is exact on product
    states and a best effort nearby.
    """
    eye = identity(2)
    out = []
    for which in (0, 1):
        vec = []
        for axis in ("x", "y", "z"):
            op = kron(pauli(axis), eye) if which == 0 else kron(eye, pauli(axis))
            vec.append(expectation(op, x))
        vec = np.array(vec)
        r = np.linalg.norm(vec)
        if r < 1e-9:
            raise ChartSingularity("reduced spin direction undefined (maximally mixed factor)")
        vec = vec / r
        theta = float(np.arccos(np.clip(vec[2], -1.0, 1.0)))
        phi = float(np.mod(np.arctan2(vec[1], vec[0]), 2.0 * np.pi))
        out.extend([theta, phi])
    return np.array(out)


def concurrence_surrogate(x: PureState) -> complex:
    """Gauge-fixed ``c0*c3 - c1*c2``; zero exactly on product states."""
    if x.dim != 4:
        raise InvalidInput("defined for two-spin states (dimension 4)")
    c = gauge_fix(x.amplitudes)
    return complex(c[0] * c[3] - c[1] * c[2])


def _surrogate_differential(part: complex):
    """Analytic differential of Re/Im of the gauge-fixed surrogate.

    ``part`` is 1 for the real part and -1j for the imaginary part.  The
    gauge phase contributes through the anchor amplitude; the formula is the
    chain rule through ``e^{-2i arg(c_m)} (c0 c3 - c1 c2)`` and is valid
    wherever the largest-modulus amplitude is unique.
    """

    def diff(amps: np.ndarray, v: np.ndarray) -> float:
        m = int(np.argmax(np.abs(amps)))
        g = np.exp(-2j * np.angle(amps[m]))
        s = amps[0] * amps[3] - amps[1] * amps[2]
        sprime = v[0] * amps[3] + amps[0] * v[3] - v[1] * amps[2] - amps[1] * v[2]
        gauge = -2j * np.imag(v[m] / amps[m]) * s
        return float(np.real(part * g * (sprime + gauge)))

    return diff


def separability_constraints() -> ConstraintSet:
    """Algebraic constraints whose joint zero set is the product states.

    Real and imaginary parts of the gauge-fixed surrogate ``c0 c3 - c1 c2``;
    neither is individually phase-invariant on raw amplitudes, which is why
    both are evaluated in the gauge-fixed chart.
    """

    def make(part, label):
        def func(real_coords):
            c = real_coords[0::2] + 1j * real_coords[1::2]
            s = c[0] * c[3] - c[1] * c[2]
            return float(np.real(part * s))

        return ChartFunctionConstraint(
            func, dim=4, differential=_surrogate_differential(part), label=label
        )

    return ConstraintSet([make(1.0, "re_surrogate"), make(-1j, "im_surrogate")])


def example1_field(coords, params: Example1Params) -> np.ndarray:
    """Closed-form velocities ``(theta1', phi1', theta2', phi2')`` of the coupled pair.

    The phi rates divide by ``sin(theta1) sin(theta2)``; points too close to
    either pole raise :class:`ChartSingularity`.
    """
    th1, ph1, th2, ph2 = np.asarray(coords, dtype=float)
    w1, w2, w3 = params.omega1, params.omega2, params.omega3
    s1, s2 = np.sin(th1), np.sin(th2)
    if abs(s1) < SIN_FLOOR or abs(s2) < SIN_FLOOR:
        raise ChartSingularity("coupled-pair field undefined at a sphere pole")
    c1, c2 = np.cos(th1), np.cos(th2)
    dphi = ph1 - ph2
    th1_dot = np.sin(dphi) * s2 * ((w1 - w2) * c1 + w2 - w3)
    th2_dot = np.sin(dphi) * s1 * ((w2 - w1) * c2 - w2 + w3)
    cross = np.cos(dphi) / (s1 * s2)
    ph1_dot = 0.5 * (
        -w1
        + (w2 - w1 / 2.0) * c2
        + (1.5 * w1 - w2 - 2.0 * w3) * c1
        + cross * (2.0 * (w3 - w2) * s1 ** 2 * c2 + (w1 - w2) * (c1 ** 2 - c2 ** 2))
    )
    ph2_dot = 0.5 * (
        -w1
        + (w2 - w1 / 2.0) * c1
        + (1.5 * w1 - w2 - 2.0 * w3) * c2
        + cross * (2.0 * (w3 - w2) * c1 * s2 ** 2 - (w1 - w2) * (c1 ** 2 - c2 ** 2))
    )
    return np.array([th1_dot, ph1_dot, th2_dot, ph2_dot])


def example2_field(coords) -> np.ndarray:
    """Closed-form velocities ``(theta', phi')`` of the single constrained spin.

    The common denominator ``1 - sin^2(theta) cos^2(phi)`` vanishes where the
    conserved x-expectation reaches +-1; those points raise
    :class:`ChartSingularity`.
    """
    th, ph = np.asarray(coords, dtype=float)[:2]
    denom = 1.0 - np.sin(th) ** 2 * np.cos(ph) ** 2
    if denom < SIN_FLOOR:
        raise ChartSingularity("constrained-spin field undefined at the +-x poles")
    th_dot = 0.5 * np.sin(2.0 * th) * np.sin(2.0 * ph) / denom
    ph_dot = 2.0 * np.cos(th) ** 2 * np.cos(ph) ** 2 / denom
    return np.array([th_dot, ph_dot])


def example2_constraint_value(coords) -> float:
    """Conserved x-expectation ``sin(theta) cos(phi)`` in sphere coordinates."""
    th, ph = np.asarray(coords, dtype=float)[:2]
    return float(np.sin(th) * np.cos(ph))


def sphere_residual(coords, velocity) -> np.ndarray:
    """Physical velocity components on a product of unit spheres.

    Coordinate rates ``(theta', phi')`` per sphere become
    ``(theta', sin(theta) phi')`` so the norm is chart-independent and the
    polar ``phi`` rate cannot fake or mask a fixed point.
    """
    coords = np.asarray(coords, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    out = velocity.copy()
    for k in range(0, coords.size, 2):
        out[k + 1] = np.sin(coords[k]) * velocity[k + 1]
    return out


def sphere_merge_embedding(coords) -> np.ndarray:
    """Cartesian embedding of sphere coordinates, for merge distances."""
    coords = np.asarray(coords, dtype=float)
    pts = []
    for k in range(0, coords.size, 2):
        th, ph = coords[k], coords[k + 1]
        pts.extend([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    return np.array(pts)


def wrap_sphere_coords(coords) -> np.ndarray:
    """Canonicalize angles: theta into [0, pi] (reflecting phi), phi into [0, 2pi)."""
    coords = np.array(coords, dtype=float)
    for k in range(0, coords.size, 2):
        th = np.mod(coords[k], 2.0 * np.pi)
        ph = coords[k + 1]
        if th > np.pi:
            th = 2.0 * np.pi - th
            ph = ph + np.pi
        coords[k] = th
        coords[k + 1] = np.mod(ph, 2.0 * np.pi)
    return coords


@dataclass(frozen=True)
class ModelSpec:
    """Model metadata: identifier, coordinate names, parameter schema, engines."""

    model_id: str
    description: str
    kind: str  # "closed-form" or "operator"
    coord_names: tuple
    default_params: dict = field(default_factory=dict)
    engines: tuple = ("closed-form",)
    needs_partner: bool = False

    @property
    def coord_dim(self) -> int:
        return len(self.coord_names)

    def params_with_defaults(self, params: dict | None) -> dict:
        merged = dict(self.default_params)
        for key, value in (params or {}).items():
            if key not in self.default_params:
                raise InvalidInput(f"unknown parameter {key!r} for model {self.model_id}")
            merged[key] = float(value)
        return merged


class _Entry:
    def __init__(self, spec: ModelSpec, *, ode_flow=None, hamiltonian=None,
                 constraints=None, embed=None, project=None, diagnostics=None,
                 default_engine=None):
        self.spec = spec
        self._ode_flow = ode_flow
        self._hamiltonian = hamiltonian
        self._constraints = constraints
        self.embed = embed
        self.project = project
        self._diagnostics = diagnostics or (lambda params: [])
        self.default_engine = default_engine or spec.engines[0]

    @property
    def model_id(self):
        return self.spec.model_id

    def ode_flow(self, params: dict):
        if self._ode_flow is None:
            raise InvalidInput(f"model {self.model_id} has no closed-form field")
        return self._ode_flow(params)

    def hamiltonian(self, params: dict) -> HermitianOperator:
        if self._hamiltonian is None:
            raise InvalidInput(f"model {self.model_id} has no operator realization")
        return self._hamiltonian(params)

    def constraints(self, params: dict) -> ConstraintSet | None:
        if self._constraints is None:
            return None
        return self._constraints(params)

    def diagnostics(self, params: dict):
        """List of ``(name, fn(coords) -> float)`` diagnostic columns."""
        return self._diagnostics(params)

    def state_flow(self, params: dict, engine: str, x0: PureState, max_condition=1e6):
        """Complex-amplitude flow for operator-engine integration."""
        h = self.hamiltonian(params)
        cs = self.constraints(params)
        if cs is not None:
            cs = cs.offset_to(x0)

        if engine == "symplectic":
            def flow(amps):
                x = PureState(amps)
                return symplectic_constrained_field(cs, h, x, max_condition=max_condition).components
        elif engine == "metric":
            def flow(amps):
                x = PureState(amps)
                return metric_constrained_field(cs, h, x, max_condition=max_condition).components
        else:
            raise InvalidInput(f"engine {engine!r} is not an operator engine")
        return flow, h, cs

    def grid_flow(self, params: dict, engine: str | None, partner=None):
        """Two-angle field on the primary sphere for grid sampling.

        For coupled-pair models the partner fixes the second sphere's point;
        the returned callable maps ``(theta, phi)`` to ``(theta', phi')``.
        """
        engine = engine or self.default_engine
        if self.spec.needs_partner:
            if partner is None:
                raise InvalidInput(f"model {self.model_id} requires partner coordinates")
            p_th, p_ph = float(partner[0]), float(partner[1])
            if self.spec.kind == "closed-form":
                flow4 = self.ode_flow(params)

                def node_flow(node):
                    vel = flow4(np.array([node[0], node[1], p_th, p_ph]))
                    return vel[:2]
            else:
                h = self.hamiltonian(params)
                base_cs = self.constraints(params)

                def node_flow(node):
                    x = product_state(node[0], node[1], p_th, p_ph)
                    cs = base_cs.offset_to(x)
                    if engine == "metric":
                        v = metric_constrained_field(cs, h, x, max_condition=1e6)
                    else:
                        v = symplectic_constrained_field(cs, h, x, max_condition=1e6)
                    return _push_pair_velocity(x, v)[:2]

            return node_flow
        if self.spec.kind == "closed-form":
            return self.ode_flow(params)
        h = self.hamiltonian(params)
        base_cs = self.constraints(params)

        def node_flow(node):
            x = bloch_state(node[0], node[1])
            if base_cs is None:
                v = hamiltonian_vector_field(h, x)
            else:
                cs = base_cs.offset_to(x)
                if engine == "symplectic":
                    v = symplectic_constrained_field(cs, h, x, max_condition=1e6)
                else:
                    v = metric_constrained_field(cs, h, x, max_condition=1e6)
            return _push_bloch_velocity(x, v)

        return node_flow


def _push_bloch_velocity(x: PureState, v) -> np.ndarray:
    """Angle rates of a single-spin tangent vector via the expectation chain rule.

    With ``theta = arccos<s_z>`` and ``phi = atan2(<s_y>, <s_x>)``:
    ``theta' = -<s_z>'/sin(theta)`` and
    ``phi' = (<s_x><s_y>' - <s_y><s_x>')/sin^2(theta)``.
    """
    sx, sy, sz = (expectation(pauli(a), x) for a in ("x", "y", "z"))
    dsx, dsy, dsz = (
        2.0 * np.real(x.amplitudes.conj() @ (pauli(a).entries @ v.components))
        for a in ("x", "y", "z")
    )
    sin_th = np.sqrt(max(1.0 - sz * sz, 0.0))
    if sin_th < SIN_FLOOR:
        raise ChartSingularity("angle rates undefined at a sphere pole")
    th_dot = -dsz / sin_th
    ph_dot = (sx * dsy - sy * dsx) / sin_th ** 2
    return np.array([th_dot, ph_dot])


def _push_pair_velocity(x: PureState, v) -> np.ndarray:
    """Angle rates on both spheres from the reduced-spin chain rule."""
    eye = identity(2)
    out = []
    for which in (0, 1):
        ops = [kron(pauli(a), eye) if which == 0 else kron(eye, pauli(a)) for a in ("x", "y", "z")]
        s = np.array([expectation(op, x) for op in ops])
        ds = np.array([
            2.0 * np.real(x.amplitudes.conj() @ (op.entries @ v.components)) for op in ops
        ])
        sz = s[2]
        sin_th = np.sqrt(max(1.0 - sz * sz, 0.0))
        if sin_th < SIN_FLOOR:
            raise ChartSingularity("angle rates undefined at a sphere pole")
        th_dot = -ds[2] / sin_th
        ph_dot = (ds[1] * (s[0] / sin_th) - ds[0] * (s[1] / sin_th)) / sin_th
        out.extend([th_dot, ph_dot])
    return np.array(out)


def _example2_diagnostics(params):
    return [
        ("sx", lambda coords: example2_constraint_value(coords)),
        ("energy", lambda coords: float(np.cos(coords[0]))),
    ]


def _free_spin_diagnostics(params):
    return [("energy", lambda coords: float(np.cos(coords[0])))]


def build_registry() -> dict:
    """Construct the model registry keyed by model identifier."""
    entries = []

    ex1_params = {"omega1": 1.0, "omega2": 2.0, "omega3": 3.0}
    entries.append(_Entry(
        ModelSpec(
            model_id="example1-ode",
            description="Coupled spin pair held disentangled: closed-form angle ODEs "
                        "on the product of two spheres with free rates omega1..3",
            kind="closed-form",
            coord_names=("theta1", "phi1", "theta2", "phi2"),
            default_params=ex1_params,
            engines=("closed-form",),
            needs_partner=True,
        ),
        ode_flow=lambda params: (
            lambda coords: example1_field(coords, Example1Params(
                params["omega1"], params["omega2"], params["omega3"]))
        ),
        embed=lambda coords: product_state(coords),
        project=pair_bloch_coords,
    ))

    entries.append(_Entry(
        ModelSpec(
            model_id="example1-operator",
            description="Coupled spin pair held disentangled: exchange-plus-field "
                        "Hamiltonian with algebraic disentanglement constraints, "
                        "driven by the symplectic engine",
            kind="operator",
            coord_names=("theta1", "phi1", "theta2", "phi2"),
            default_params={"j": 1.0, "b": 0.7},
            engines=("symplectic", "metric"),
            needs_partner=True,
        ),
        hamiltonian=lambda params: heisenberg_hamiltonian(params["j"], params["b"]),
        constraints=lambda params: separability_constraints(),
        embed=lambda coords: product_state(coords),
        project=pair_bloch_coords,
        default_engine="symplectic",
    ))

    entries.append(_Entry(
        ModelSpec(
            model_id="example2-ode",
            description="Single spin precessing under sigma_z with <sigma_x> held "
                        "constant: closed-form angle ODEs on the Bloch sphere",
            kind="closed-form",
            coord_names=("theta", "phi"),
            default_params={},
            engines=("closed-form",),
        ),
        ode_flow=lambda params: example2_field,
        embed=lambda coords: bloch_state(coords[0], coords[1]),
        project=bloch_coords,
        diagnostics=_example2_diagnostics,
    ))

    entries.append(_Entry(
        ModelSpec(
            model_id="example2-operator",
            description="Single spin precessing under sigma_z with <sigma_x> held "
                        "constant by the metric engine",
            kind="operator",
            coord_names=("theta", "phi"),
            default_params={},
            engines=("metric",),
        ),
        hamiltonian=lambda params: pauli("z"),
        constraints=lambda params: ConstraintSet(
            [ExpectationConstraint(pauli("x"), 0.0, label="sx")]
        ),
        embed=lambda coords: bloch_state(coords[0], coords[1]),
        project=bloch_coords,
        default_engine="metric",
    ))

    entries.append(_Entry(
        ModelSpec(
            model_id="free-spin",
            description="Unconstrained spin precession about the z axis "
                        "(exactly solvable baseline)",
            kind="closed-form",
            coord_names=("theta", "phi"),
            default_params={},
            engines=("closed-form",),
        ),
        ode_flow=lambda params: (lambda coords: np.array([0.0, 2.0])),
        embed=lambda coords: bloch_state(coords[0], coords[1]),
        project=bloch_coords,
        diagnostics=_free_spin_diagnostics,
    ))

    return {e.model_id: e for e in entries}


REGISTRY = build_registry()




def bloch_chart(fd_step: float | None = None):
    """Two-angle chart of the single-spin state space."""
    from .charts import Chart

    return Chart(2, lambda c: bloch_state(c[0], c[1]), name="bloch", fd_step=fd_step)


def product_sphere_chart(fd_step: float | None = None):
    """Four-angle chart of the disentangled surface inside the two-spin space."""
    from .charts import Chart

    return Chart(4, product_state, name="product-spheres", fd_step=fd_step)
