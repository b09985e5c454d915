"""HTTP surface for the explorer UI and scripted clients.

Endpoints (all JSON, ``schema_version`` 1):

* ``GET /health`` -- liveness probe.
* ``GET /models`` -- registry listing with parameter schemas.
* ``POST /field`` -- vector-field grid; body mirrors the CLI ``field`` flags.
* ``POST /trajectory`` -- simulation; body is the run-config document.

Error mapping: malformed JSON or failed validation is 400, unknown model is
404, singular-configuration errors are 422.  Every error body carries a
machine-readable ``code`` (the exception class name).  The registry is
read-only after startup and request handling is pure computation, so
concurrent requests do not interfere.
"""

from __future__ import annotations

import datetime

from fastapi import FastAPI, Request, Response

from .errors import (
    ChartSingularity,
    InvalidInput,
    QconstrainError,
    SingularConstraintMatrix,
)
from .gridfield import SCHEMA_VERSION, canonical_json, sample_field_grid
from .models import REGISTRY
from .runconfig import result_json_dict, run_simulation, validate_config


def _json_response(obj, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(obj), status_code=status_code,
        media_type="application/json",
    )


def _error(status: int, code: str, message: str) -> Response:
    return _json_response(
        {"schema_version": SCHEMA_VERSION, "code": code, "message": message},
        status_code=status,
    )


async def _read_json(request: Request):
    try:
        return await request.json()
    except Exception as exc:
        raise InvalidInput(f"malformed JSON body: {exc}") from exc


def create_app(registry=None) -> FastAPI:
    registry = registry or REGISTRY
    app = FastAPI(title="qconstrain", version="0.1.0")

    @app.get("/health")
    def health():
        return _json_response({"status": "ok"})

    @app.get("/models")
    def models():
        listing = []
        for entry in registry.values():
            spec = entry.spec
            listing.append({
                "id": spec.model_id,
                "description": spec.description,
                "kind": spec.kind,
                "coord_names": list(spec.coord_names),
                "coord_dim": spec.coord_dim,
                "params": {k: float(v) for k, v in sorted(spec.default_params.items())},
                "engines": list(spec.engines),
                "default_engine": entry.default_engine,
                "needs_partner": spec.needs_partner,
            })
        return _json_response({"schema_version": SCHEMA_VERSION, "models": listing})

    @app.post("/field")
    async def field(request: Request):
        try:
            body = await _read_json(request)
            if not isinstance(body, dict):
                raise InvalidInput("request body must be a JSON object")
            model_id = body.get("model")
            if model_id not in registry:
                return _error(404, "UnknownModel", f"unknown model {model_id!r}")
            entry = registry[model_id]
            grid_spec = body.get("grid") or {}
            theta_count = int(grid_spec.get("theta_count", 24))
            phi_count = int(grid_spec.get("phi_count", 24))
            partner = None
            if body.get("partner") is not None:
                p = body["partner"]
                partner = [float(p["theta"]), float(p["phi"])]
            if entry.spec.needs_partner and partner is None:
                raise InvalidInput(f"model {model_id} requires partner coordinates")
            grid = sample_field_grid(
                entry, body.get("params"), theta_count, phi_count,
                partner=partner, engine=body.get("engine"),
            )
            return _json_response(grid)
        except (SingularConstraintMatrix, ChartSingularity) as exc:
            return _error(422, type(exc).__name__, str(exc))
        except InvalidInput as exc:
            return _error(400, type(exc).__name__, str(exc))
        except QconstrainError as exc:
            return _error(422, type(exc).__name__, str(exc))

    @app.post("/trajectory")
    async def trajectory(request: Request):
        try:
            body = await _read_json(request)
            if not isinstance(body, dict):
                raise InvalidInput("request body must be a JSON object")
            if body.get("model") not in registry:
                return _error(404, "UnknownModel", f"unknown model {body.get('model')!r}")
            body = dict(body)
            body.pop("out", None)  # the service never writes files
            config = validate_config(body, registry)
            result = run_simulation(config, registry)
            created = datetime.datetime.now(datetime.timezone.utc).isoformat()
            return _json_response(result_json_dict(result, registry, created_at=created))
        except (SingularConstraintMatrix, ChartSingularity) as exc:
            return _error(422, type(exc).__name__, str(exc))
        except InvalidInput as exc:
            return _error(400, type(exc).__name__, str(exc))
        except QconstrainError as exc:
            return _error(422, type(exc).__name__, str(exc))

    return app
