"""Adaptive and fixed-step integration of state- and coordinate-space flows.

The default method is an embedded Dormand-Prince 5(4) pair with PI-free
step control; a classic fixed-step RK4 is available for convergence studies.
Both operate on plain numpy vectors, real or complex, so the same code
integrates gauge-fixed coordinates and raw state amplitudes.

Constrained fields can fail mid-flow near singular configurations of the
constraint pairing matrix.  Failed stage evaluations trigger step-halving
retries (up to 10) before the integration aborts with :class:`FieldError`
carrying the last good trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .constraints import ConstraintSet, m_matrix
from .errors import (
    ChartSingularity,
    DriftAbort,
    FieldError,
    InvalidInput,
    ProjectionFailure,
    SingularConstraintMatrix,
    StepLimit,
)
from .geometry import PureState

# Dormand-Prince 5(4) coefficients.  The last weight row is the embedded
# fourth-order solution used for error control; the first stage of the next
# step reuses the last stage of the accepted one (FSAL).
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_DP_ERR = _DP_B5 - _DP_B4

_RETRYABLE = (SingularConstraintMatrix, ChartSingularity)
MAX_SINGULAR_RETRIES = 10


@dataclass
class IntegratorOptions:
    """Integration controls.

    ``method`` is ``"rk45"`` (adaptive, default) or ``"rk4"`` (fixed step,
    requires ``step``).  ``renormalize`` rescales the solution vector to unit
    norm after every accepted step; flows on state space preserve the norm
    analytically, so this only removes numerical drift.
    """

    t_end: float
    method: str = "rk45"
    step: float | None = None
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_steps: int = 100_000
    renormalize: bool = False
    drift_abort_threshold: float | None = None

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise InvalidInput(f"unknown method {self.method!r}")
        if self.method == "rk4" and (self.step is None or self.step <= 0):
            raise InvalidInput("rk4 requires a positive step")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise InvalidInput("tolerances must be positive")
        if self.max_steps < 1:
            raise InvalidInput("max_steps must be at least 1")
        if self.t_end < 0:
            raise InvalidInput("t_end must be nonnegative")


@dataclass
class Trajectory:
    """Time-stamped solution samples plus conservation diagnostics."""

    times: np.ndarray
    points: np.ndarray
    monitors: dict = field(default_factory=dict)
    energy: np.ndarray | None = None

    @property
    def drift(self) -> dict:
        """Max deviation of each monitored quantity from its initial value."""
        return {
            name: float(np.max(np.abs(series - series[0])))
            for name, series in self.monitors.items()
        }

    def __len__(self):
        return len(self.times)


class _Recorder:
    def __init__(self, monitors, energy_fn, threshold):
        self.monitor_fns = list(monitors or [])
        self.energy_fn = energy_fn
        self.threshold = threshold
        self.times = []
        self.points = []
        self.series = {name: [] for name, _ in self.monitor_fns}
        self.energy = [] if energy_fn else None
        self.initial = {}

    def record(self, t, y):
        self.times.append(t)
        self.points.append(np.array(y))
        for name, fn in self.monitor_fns:
            v = float(fn(y))
            if name not in self.initial:
                self.initial[name] = v
            self.series[name].append(v)
            if self.threshold is not None and abs(v - self.initial[name]) > self.threshold:
                raise DriftAbort(
                    f"monitor {name!r} drifted {abs(v - self.initial[name]):.3e} "
                    f"beyond threshold {self.threshold:.3e} at t={t:.6g}",
                    trajectory=self.build(),
                )
        if self.energy is not None:
            self.energy.append(float(self.energy_fn(y)))

    def build(self) -> Trajectory:
        return Trajectory(
            times=np.array(self.times),
            points=np.array(self.points),
            monitors={k: np.array(v) for k, v in self.series.items()},
            energy=None if self.energy is None else np.array(self.energy),
        )


def _error_norm(err, y_old, y_new, rel_tol, abs_tol):
    scale = abs_tol + rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _postprocess(y, opts, projector):
    if opts.renormalize:
        y = y / np.linalg.norm(y)
    if projector is not None:
        y = projector(y)
    return y


def integrate(flow, y0, opts: IntegratorOptions, monitors=None, energy_fn=None,
              projector=None) -> Trajectory:
    """Integrate ``dy/dt = flow(y)`` from ``t=0`` to ``opts.t_end``.

    ``monitors`` is a list of ``(name, fn)`` pairs evaluated at every accepted
    step; their drift relative to the start is recorded and, when
    ``opts.drift_abort_threshold`` is set, enforced.  ``energy_fn`` records an
    energy series.  ``projector``, when given, maps each accepted solution
    vector back onto the constraint surface (off by default: the constrained
    flows are tangent to the surface by construction).
    """
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    rec = _Recorder(monitors, energy_fn, opts.drift_abort_threshold)
    rec.record(0.0, y)
    if opts.t_end == 0.0:
        return rec.build()
    if opts.method == "rk4":
        return _run_rk4(flow, y, opts, rec, projector)
    return _run_rk45(flow, y, opts, rec, projector)


def _eval_flow(flow, y, t):
    try:
        return np.asarray(flow(y))
    except _RETRYABLE as exc:
        raise _StageFailure(exc, t) from exc


class _StageFailure(Exception):
    def __init__(self, cause, t):
        self.cause = cause
        self.t = t


def _run_rk4(flow, y, opts, rec, projector):
    t = 0.0
    h = opts.step
    steps = 0
    while t < opts.t_end - 1e-15:
        hh = min(h, opts.t_end - t)
        if steps >= opts.max_steps:
            raise StepLimit(
                f"max_steps={opts.max_steps} exhausted at t={t:.6g}", trajectory=rec.build()
            )
        try:
            k1 = _eval_flow(flow, y, t)
            k2 = _eval_flow(flow, y + hh / 2 * k1, t)
            k3 = _eval_flow(flow, y + hh / 2 * k2, t)
            k4 = _eval_flow(flow, y + hh * k3, t)
        except _StageFailure as sf:
            raise FieldError(
                f"field evaluation failed at t={t:.6g}: {sf.cause}", trajectory=rec.build()
            ) from sf.cause
        y = _postprocess(y + hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4), opts, projector)
        t += hh
        steps += 1
        rec.record(t, y)
    return rec.build()


def _initial_step(f0, y, opts):
    speed = np.linalg.norm(f0)
    size = max(np.linalg.norm(y), 1.0)
    h = 0.01 * size / max(speed, 1e-8)
    return min(h, opts.t_end)


def _run_rk45(flow, y, opts, rec, projector):
    t = 0.0
    try:
        k1 = np.asarray(flow(y))
    except _RETRYABLE as exc:
        raise FieldError(f"field evaluation failed at t=0: {exc}", trajectory=rec.build()) from exc
    h = _initial_step(k1, y, opts)
    steps = 0
    singular_retries = 0
    while t < opts.t_end - 1e-15:
        if steps >= opts.max_steps:
            raise StepLimit(
                f"max_steps={opts.max_steps} exhausted at t={t:.6g}", trajectory=rec.build()
            )
        if h < 1e-14 * max(1.0, abs(opts.t_end)):
            raise StepLimit(f"step size underflow at t={t:.6g}", trajectory=rec.build())
        h = min(h, opts.t_end - t)
        ks = [k1]
        try:
            for i in range(1, 7):
                yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
                ks.append(_eval_flow(flow, yi, t))
        except _StageFailure as sf:
            singular_retries += 1
            if singular_retries > MAX_SINGULAR_RETRIES:
                raise FieldError(
                    f"field evaluation kept failing near t={t:.6g}: {sf.cause}",
                    trajectory=rec.build(),
                ) from sf.cause
            h /= 2.0
            continue
        y_new = yi  # stage 7 state is the fifth-order solution (b row == a[6])
        err = h * sum(e * k for e, k in zip(_DP_ERR, ks))
        norm = _error_norm(err, y, y_new, opts.rel_tol, opts.abs_tol)
        if norm <= 1.0:
            t += h
            touched = opts.renormalize or projector is not None
            y = _postprocess(y_new, opts, projector)
            if touched:
                try:
                    k1 = np.asarray(flow(y))
                except _RETRYABLE as exc:
                    raise FieldError(
                        f"field evaluation failed at accepted point t={t:.6g}: {exc}",
                        trajectory=rec.build(),
                    ) from exc
            else:
                k1 = ks[6]
            singular_retries = 0
            steps += 1
            rec.record(t, y)
        factor = 0.9 * (norm ** -0.2 if norm > 0 else 5.0)
        h *= min(5.0, max(0.2, factor))
    return rec.build()


@dataclass(frozen=True)
class FixedPoint:
    coords: np.ndarray
    residual: float
    classification: str | None = None


def _classify(flow, coords, threshold=1e-6, fd_eps=1e-6):
    n = coords.size
    jac = np.empty((n, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = fd_eps
        jac[:, a] = (np.asarray(flow(coords + e)) - np.asarray(flow(coords - e))) / (2 * fd_eps)
    reals = np.real(np.linalg.eigvals(jac))
    neg = np.any(reals < -threshold)
    pos = np.any(reals > threshold)
    if not neg and not pos:
        return "neutral"
    if neg and not pos:
        return "attracting"
    if pos and not neg:
        return "repelling"
    return "mixed"


def find_fixed_points(flow, seeds, residual_tol, *, residual_fn=None, refine=True,
                      merge_distance=1e-6, embed_fn=None, classify=False,
                      normalize_fn=None, max_move=None) -> list[FixedPoint]:
    """Locate zeros of a coordinate vector field from a set of seed points.

    Each seed is refined by damped least squares on the residual vector and
    kept when the refined residual norm is at or below ``residual_tol``.
    Survivors are deduplicated by merging points closer than
    ``merge_distance`` (smallest residual wins; ties keep the first found).

    ``residual_fn(coords, velocity)`` maps a field value to the residual
    vector (defaults to the velocity itself); models use it to measure
    physical speed so chart artifacts like polar coordinate rates do not
    mask or fake zeros.  ``embed_fn`` maps coordinates to the space in which
    merge distances are measured; ``normalize_fn`` canonicalizes refined
    coordinates (e.g. wraps angles).  ``max_move``, when set, boxes the
    refinement to stay within that coordinate distance of its seed: on
    zero-residual curves an unconstrained refiner is free to slide along
    the curve and collapse the whole set onto a few points, while the boxed
    version keeps each seed reporting its local piece so the set stays
    resolved.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    if seeds.size == 0:
        raise InvalidInput("empty fixed-point search set")
    if residual_fn is None:
        residual_fn = lambda coords, vel: np.asarray(vel)
    if embed_fn is None:
        embed_fn = lambda coords: coords
    if normalize_fn is None:
        normalize_fn = lambda coords: coords

    def residual_vec(coords):
        try:
            return np.asarray(residual_fn(coords, flow(coords)), dtype=float)
        except _RETRYABLE:
            return np.full(seeds.shape[1], 1e6)

    candidates = []
    for idx, seed in enumerate(seeds):
        point = seed
        if refine:
            try:
                if max_move is not None:
                    sol = scipy.optimize.least_squares(
                        residual_vec, seed, method="trf",
                        bounds=(seed - max_move, seed + max_move),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400,
                    )
                else:
                    sol = scipy.optimize.least_squares(
                        residual_vec, seed, method="lm",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400,
                    )
                point = sol.x
            except Exception:
                point = seed
        point = np.asarray(normalize_fn(point), dtype=float)
        res = float(np.linalg.norm(residual_vec(point)))
        if np.isfinite(res) and res <= residual_tol:
            candidates.append((res, idx, point))

    candidates.sort(key=lambda c: (c[0], c[1]))
    kept = []
    kept_embedded = []
    for res, _, point in candidates:
        emb = np.asarray(embed_fn(point), dtype=float)
        if any(np.linalg.norm(emb - other) < merge_distance for other in kept_embedded):
            continue
        cls = _classify(flow, point) if classify else None
        kept.append(FixedPoint(coords=point, residual=res, classification=cls))
        kept_embedded.append(emb)
    return kept


def project_to_surface(x: PureState, cs: ConstraintSet, max_iters: int = 12,
                       tol: float = 1e-12) -> PureState:
    """Newton-project a state back onto the constraint surface.

    Each iteration moves along the constraint gradient directions by the
    multipliers solving the covariance system, so the displacement is of the
    order of the initial constraint violation.  Intended for small numerical
    drift; far off the surface the iteration may legitimately fail.
    """
    current = x
    for _ in range(max_iters):
        vals = cs.values(current)
        if np.max(np.abs(vals)) <= tol:
            return current
        ys = cs.gradient_fields(current)
        m = m_matrix(cs, current)
        try:
            sv = np.linalg.svd(m, compute_uv=False)
            if sv[0] == 0.0 or sv[-1] < 1e-12 * sv[0]:
                raise ProjectionFailure("constraint covariance matrix singular during projection")
            coeff = np.linalg.solve(m, vals)
        except np.linalg.LinAlgError as exc:
            raise ProjectionFailure(f"projection linear solve failed: {exc}") from exc
        amps = current.amplitudes.copy()
        for ci, yi in zip(coeff, ys):
            amps = amps - ci * yi.components
        current = PureState(amps)
    vals = cs.values(current)
    if np.max(np.abs(vals)) <= tol:
        return current
    raise ProjectionFailure(
        f"no convergence after {max_iters} iterations; residual {np.max(np.abs(vals)):.3e}"
    )
