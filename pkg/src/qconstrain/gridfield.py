"""Vector-field grid sampling and its canonical JSON form.

Grids cover ``theta`` in ``[pi/36, pi - pi/36]`` (inclusive linspace, to
skirt the coordinate poles) and ``phi`` in ``[0, 2pi)`` (endpoint
exclusive), sampled theta-major.  Nodes where the field is singular are
masked and omitted from the sample list; the output never contains NaN.
The JSON serialization is canonical (fixed key order, shortest round-trip
floats) so identical requests produce byte-identical payloads.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ChartSingularity, InvalidInput, SingularConstraintMatrix

SCHEMA_VERSION = 1
THETA_MARGIN = np.pi / 36.0


def grid_axes(theta_count: int, phi_count: int) -> tuple[np.ndarray, np.ndarray]:
    if theta_count < 2 or phi_count < 1:
        raise InvalidInput("grid needs at least 2 theta and 1 phi values")
    thetas = np.linspace(THETA_MARGIN, np.pi - THETA_MARGIN, theta_count)
    phis = np.linspace(0.0, 2.0 * np.pi, phi_count, endpoint=False)
    return thetas, phis


def sample_field_grid(entry, params: dict | None, theta_count: int, phi_count: int,
                      partner=None, engine: str | None = None) -> dict:
    """Sample a model's two-angle field on the standard grid.

    ``entry`` is a registry entry; ``partner`` fixes the second sphere for
    coupled-pair models.  Returns a JSON-ready dict.
    """
    params = entry.spec.params_with_defaults(params)
    flow = entry.grid_flow(params, engine, partner=partner)
    thetas, phis = grid_axes(theta_count, phi_count)
    samples = []
    singular = []
    for i, th in enumerate(thetas):
        for j, ph in enumerate(phis):
            try:
                vel = np.asarray(flow(np.array([th, ph])), dtype=float)
            except (ChartSingularity, SingularConstraintMatrix):
                singular.append([i, j])
                continue
            if not np.all(np.isfinite(vel)):
                singular.append([i, j])
                continue
            samples.append({
                "theta": float(th),
                "phi": float(ph),
                "theta_dot": float(vel[0]),
                "phi_dot": float(vel[1]),
            })
    grid = {
        "schema_version": SCHEMA_VERSION,
        "model": entry.model_id,
        "params": {k: float(v) for k, v in sorted(params.items())},
        "engine": engine or entry.default_engine,
        "partner": None if partner is None else {
            "theta": float(partner[0]), "phi": float(partner[1]),
        },
        "grid": {
            "theta_count": int(theta_count),
            "phi_count": int(phi_count),
            "theta_min": float(thetas[0]),
            "theta_max": float(thetas[-1]),
            "phi_min": 0.0,
            "phi_max": float(2.0 * np.pi),
            "phi_endpoint": False,
            "ordering": "theta-major",
        },
        "samples": samples,
        "singular_mask": singular,
    }
    return grid


def canonical_json(obj) -> str:
    """Deterministic JSON text: fixed key order, shortest round-trip floats."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"
