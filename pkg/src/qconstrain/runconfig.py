"""Run configuration, simulation driver, and trajectory export.

One validator serves the CLI (config file plus flag overrides) and the HTTP
service (request bodies), so both surfaces accept the same JSON document:

.. code-block:: json

    {
      "model": "example2-ode",
      "engine": "closed-form",
      "params": {},
      "initial": [0.3, 0.2],
      "t_end": 20.0,
      "rel_tol": 1e-9,
      "abs_tol": 1e-11,
      "max_steps": 100000
    }

CSV rows carry ``t``, the coordinates, the model's constraint diagnostics,
and energy, all at 17 significant digits; JSON mirrors the rows and adds
metadata (engine, tolerances, drift summary).  Data rows never contain
timestamps, so identical configs give byte-identical CSV.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSet
from .errors import (
    DriftAbort,
    FieldError,
    InvalidInput,
    SingularConstraintMatrix,
    StepLimit,
)
from .geometry import PureState, expectation
from .gridfield import SCHEMA_VERSION, canonical_json
from .integrate import IntegratorOptions, Trajectory, integrate

ENGINES = ("closed-form", "symplectic", "metric")


@dataclass
class RunConfig:
    model_id: str
    engine: str
    params: dict
    initial: np.ndarray | None
    initial_state: PureState | None
    t_end: float
    rel_tol: float
    abs_tol: float
    max_steps: int
    out: str | None = None
    fmt: str = "csv"


def validate_config(doc: dict, registry) -> RunConfig:
    """Check a config document against the registry; raises on any problem.

    Engine/model compatibility is enforced here: in particular the
    symplectic engine refuses models with an odd constraint count before any
    integration starts.
    """
    if not isinstance(doc, dict):
        raise InvalidInput("config must be a JSON object")
    known = {"model", "engine", "params", "initial", "initial_state", "t_end",
             "rel_tol", "abs_tol", "tol", "max_steps", "out", "format"}
    unknown = set(doc) - known
    if unknown:
        raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
    model_id = doc.get("model")
    if model_id not in registry:
        raise InvalidInput(f"unknown model {model_id!r}; known: {sorted(registry)}")
    entry = registry[model_id]
    params = entry.spec.params_with_defaults(doc.get("params"))

    engine = doc.get("engine", entry.default_engine)
    if engine not in ENGINES:
        raise InvalidInput(f"unknown engine {engine!r}; known: {ENGINES}")
    if engine == "closed-form" and entry.spec.kind != "closed-form":
        raise InvalidInput(f"model {model_id} has no closed-form field")
    if engine in ("symplectic", "metric") and entry.spec.kind != "operator":
        raise InvalidInput(f"model {model_id} is closed-form; pick an operator model "
                           f"for engine {engine!r}")
    if engine == "symplectic":
        cs = entry.constraints(params)
        n = 0 if cs is None else cs.n
        if n % 2 == 1:
            raise SingularConstraintMatrix(
                f"symplectic engine needs an even number of constraints; "
                f"model {model_id} has {n}"
            )

    initial = doc.get("initial")
    initial_state = doc.get("initial_state")
    if initial is None and initial_state is None:
        raise InvalidInput("config needs 'initial' coordinates or an 'initial_state'")
    state = None
    coords = None
    if initial_state is not None:
        try:
            amps = np.array([complex(re, im) for re, im in initial_state])
        except (TypeError, ValueError) as exc:
            raise InvalidInput("initial_state must be a list of [re, im] pairs") from exc
        state = PureState(amps)
    if initial is not None:
        coords = np.asarray(initial, dtype=float)
        if coords.size != entry.spec.coord_dim:
            raise InvalidInput(
                f"model {model_id} expects {entry.spec.coord_dim} coordinates "
                f"{entry.spec.coord_names}, got {coords.size}"
            )

    t_end = float(doc.get("t_end", 10.0))
    if t_end < 0:
        raise InvalidInput("t_end must be nonnegative")
    tol = doc.get("tol")
    rel_tol = float(doc.get("rel_tol", tol if tol is not None else 1e-9))
    abs_tol = float(doc.get("abs_tol", rel_tol * 1e-2))
    max_steps = int(doc.get("max_steps", 100_000))
    if rel_tol <= 0 or abs_tol <= 0:
        raise InvalidInput("tolerances must be positive")
    if max_steps < 1:
        raise InvalidInput("max_steps must be at least 1")
    fmt = doc.get("format", "csv")
    if fmt not in ("csv", "json", "both"):
        raise InvalidInput("format must be one of csv, json, both")

    return RunConfig(
        model_id=model_id, engine=engine, params=params, initial=coords,
        initial_state=state, t_end=t_end, rel_tol=rel_tol, abs_tol=abs_tol,
        max_steps=max_steps, out=doc.get("out"), fmt=fmt,
    )


@dataclass
class SimulationResult:
    """Coordinate-space trajectory rows plus diagnostics, ready for export."""

    config: RunConfig
    times: np.ndarray
    coords: np.ndarray
    columns: list
    diagnostics: dict
    drift: dict
    partial: bool = False
    failure: str | None = None


def _closed_form_run(entry, config: RunConfig) -> SimulationResult:
    flow = entry.ode_flow(config.params)
    diag = entry.diagnostics(config.params)
    opts = IntegratorOptions(
        t_end=config.t_end, rel_tol=config.rel_tol, abs_tol=config.abs_tol,
        max_steps=config.max_steps,
    )
    monitors = list(diag)
    partial = False
    failure = None
    try:
        traj = integrate(flow, config.initial, opts, monitors=monitors)
    except (DriftAbort, FieldError, StepLimit) as exc:
        traj = exc.trajectory
        partial = True
        failure = f"{type(exc).__name__}: {exc}"
        if traj is None or len(traj) == 0:
            raise
    return SimulationResult(
        config=config, times=traj.times, coords=traj.points,
        columns=[name for name, _ in diag], diagnostics=traj.monitors,
        drift=traj.drift, partial=partial, failure=failure,
    )


def _operator_run(entry, config: RunConfig) -> SimulationResult:
    if config.initial_state is not None:
        x0 = config.initial_state
    else:
        x0 = entry.embed(config.initial)
    flow, h, cs = entry.state_flow(config.params, config.engine, x0)
    monitors = []
    if cs is not None:
        for k, c in enumerate(cs):
            monitors.append(
                (c.label, (lambda cc: lambda y: cc.value(PureState(y)) + cc.target)(c))
            )
    energy_fn = lambda y: expectation(h, PureState(y))
    opts = IntegratorOptions(
        t_end=config.t_end, rel_tol=config.rel_tol, abs_tol=config.abs_tol,
        max_steps=config.max_steps, renormalize=True,
    )
    partial = False
    failure = None
    try:
        traj = integrate(flow, x0.amplitudes, opts, monitors=monitors, energy_fn=energy_fn)
    except (DriftAbort, FieldError, StepLimit) as exc:
        traj = exc.trajectory
        partial = True
        failure = f"{type(exc).__name__}: {exc}"
        if traj is None or len(traj) == 0:
            raise
    coords = np.array([entry.project(PureState(p)) for p in traj.points])
    diagnostics = dict(traj.monitors)
    columns = list(diagnostics.keys())
    if traj.energy is not None:
        diagnostics["energy"] = traj.energy
        columns.append("energy")
    return SimulationResult(
        config=config, times=traj.times, coords=coords, columns=columns,
        diagnostics=diagnostics, drift=traj.drift, partial=partial, failure=failure,
    )


def run_simulation(config: RunConfig, registry) -> SimulationResult:
    entry = registry[config.model_id]
    if config.engine == "closed-form":
        if config.initial is None:
            raise InvalidInput("closed-form runs need 'initial' coordinates")
        return _closed_form_run(entry, config)
    return _operator_run(entry, config)


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def result_csv(result: SimulationResult, registry) -> str:
    """CSV text: t, coordinates, diagnostic columns; 17 significant digits."""
    entry = registry[result.config.model_id]
    header = ["t", *entry.spec.coord_names, *result.columns]
    lines = [",".join(header)]
    for i, t in enumerate(result.times):
        row = [_fmt17(t)]
        row.extend(_fmt17(v) for v in result.coords[i])
        row.extend(_fmt17(result.diagnostics[name][i]) for name in result.columns)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def result_json_dict(result: SimulationResult, registry, created_at: str | None = None) -> dict:
    entry = registry[result.config.model_id]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "model": result.config.model_id,
        "engine": result.config.engine,
        "params": {k: float(v) for k, v in sorted(result.config.params.items())},
        "coord_names": list(entry.spec.coord_names),
        "times": [float(t) for t in result.times],
        "points": [[float(v) for v in row] for row in result.coords],
        "diagnostics": {
            name: [float(v) for v in series] for name, series in result.diagnostics.items()
        },
        "metadata": {
            "integrator": {
                "method": "rk45",
                "rel_tol": result.config.rel_tol,
                "abs_tol": result.config.abs_tol,
                "max_steps": result.config.max_steps,
                "t_end": result.config.t_end,
            },
            "drift": {k: float(v) for k, v in sorted(result.drift.items())},
            "partial": result.partial,
            "failure": result.failure,
        },
    }
    if created_at is not None:
        doc["metadata"]["created_at"] = created_at
    return doc


def trajectory_from_json(text: str) -> Trajectory:
    """Re-import an exported trajectory document (floats round-trip exactly)."""
    doc = json.loads(text)
    return Trajectory(
        times=np.array(doc["times"], dtype=float),
        points=np.array(doc["points"], dtype=float),
        monitors={k: np.array(v, dtype=float) for k, v in doc["diagnostics"].items()},
    )


def export_result(result: SimulationResult, registry, out: str, fmt: str,
                  created_at: str | None = None) -> list:
    """Write CSV/JSON files next to the given stem; returns the paths written."""
    paths = []
    if fmt in ("csv", "both"):
        path = out if out.endswith(".csv") else out + ".csv"
        with open(path, "w") as fh:
            fh.write(result_csv(result, registry))
        paths.append(path)
    if fmt in ("json", "both"):
        path = out if out.endswith(".json") else out + ".json"
        with open(path, "w") as fh:
            fh.write(canonical_json(result_json_dict(result, registry, created_at)))
        paths.append(path)
    return paths
