"""Command-line interface: simulate, field, fixed-points, serve.

Configuration may come from a JSON file (``--config``) with individual flags
overriding file values.  Exit codes: 0 success, 2 validation failure,
3 runtime failure (drift abort, singular field, step limit) with partial
output flagged in the metadata.  Set ``QCONSTRAIN_LOG`` to control verbosity.
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import os
import sys

import numpy as np

from .errors import InvalidInput, QconstrainError, SingularConstraintMatrix
from .gridfield import canonical_json, grid_axes, sample_field_grid
from .integrate import find_fixed_points
from .models import (
    REGISTRY,
    sphere_merge_embedding,
    sphere_residual,
    wrap_sphere_coords,
)
from .runconfig import export_result, run_simulation, validate_config

log = logging.getLogger("qconstrain")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or []:
        for item in pair.split(","):
            if not item:
                continue
            if "=" not in item:
                raise InvalidInput(f"--params expects key=value, got {item!r}")
            key, value = item.split("=", 1)
            params[key.strip()] = float(value)
    return params


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise InvalidInput("config file must contain a JSON object")
    return doc


def _merged_config(args) -> dict:
    """Config-file values with CLI flags layered on top."""
    doc = _load_config(args.config)
    if args.model:
        doc["model"] = args.model
    if args.params:
        doc.setdefault("params", {}).update(_parse_params(args.params))
    if args.engine:
        doc["engine"] = args.engine
    if args.t_end is not None:
        doc["t_end"] = args.t_end
    if args.tol is not None:
        doc["tol"] = args.tol
    if args.initial is not None:
        doc["initial"] = [float(v) for v in args.initial.split(",")]
    if args.out:
        doc["out"] = args.out
    if args.format:
        doc["format"] = args.format
    return doc


def cmd_simulate(args) -> int:
    doc = _merged_config(args)
    config = validate_config(doc, REGISTRY)
    result = run_simulation(config, REGISTRY)
    out = config.out or f"{config.model_id}-trajectory"
    created = datetime.datetime.now(datetime.timezone.utc).isoformat()
    paths = export_result(result, REGISTRY, out, config.fmt, created_at=created)
    for p in paths:
        log.info("wrote %s", p)
        print(p)
    if result.partial:
        print(f"partial output: {result.failure}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_field(args) -> int:
    if args.model not in REGISTRY:
        raise InvalidInput(f"unknown model {args.model!r}; known: {sorted(REGISTRY)}")
    entry = REGISTRY[args.model]
    params = _parse_params(args.params)
    partner = None
    if args.partner:
        partner = [float(v) for v in args.partner.split(",")]
        if len(partner) != 2:
            raise InvalidInput("--partner expects theta,phi")
    if entry.spec.needs_partner and partner is None:
        raise InvalidInput(f"model {args.model} requires --partner theta,phi")
    grid = sample_field_grid(
        entry, params, args.theta_count, args.phi_count,
        partner=partner, engine=args.engine,
    )
    text = canonical_json(grid)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_fixed_points(args) -> int:
    if args.model not in REGISTRY:
        raise InvalidInput(f"unknown model {args.model!r}; known: {sorted(REGISTRY)}")
    entry = REGISTRY[args.model]
    params = entry.spec.params_with_defaults(_parse_params(args.params))
    partner = None
    if args.partner:
        partner = [float(v) for v in args.partner.split(",")]
    if entry.spec.needs_partner:
        if partner is None:
            raise InvalidInput(f"model {args.model} requires --partner theta,phi")
        flow = entry.grid_flow(params, args.engine, partner=partner)
        dim = 2
    elif entry.spec.coord_dim == 2:
        flow = entry.grid_flow(params, args.engine)
        dim = 2
    else:
        flow = entry.ode_flow(params)
        dim = entry.spec.coord_dim

    thetas = np.linspace(0.0, np.pi, args.seed_count)
    phis = np.linspace(0.0, 2.0 * np.pi, args.seed_count, endpoint=False)
    if dim == 2:
        seeds = np.array([[th, ph] for th in thetas for ph in phis])
    else:
        raise InvalidInput("fixed-point scan supports two-angle fields; "
                           "fix the partner sphere for coupled models")
    spacing = max(np.pi / max(args.seed_count - 1, 1), 2.0 * np.pi / args.seed_count)
    points = find_fixed_points(
        flow, seeds, args.residual_tol,
        residual_fn=sphere_residual, embed_fn=sphere_merge_embedding,
        normalize_fn=wrap_sphere_coords, classify=True, max_move=spacing,
    )
    doc = {
        "schema_version": 1,
        "model": args.model,
        "params": {k: float(v) for k, v in sorted(params.items())},
        "residual_tol": args.residual_tol,
        "seed_grid": [args.seed_count, args.seed_count],
        "fixed_points": [
            {
                "coords": [float(v) for v in p.coords],
                "residual": p.residual,
                "classification": p.classification,
            }
            for p in points
        ],
    }
    text = canonical_json(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app()
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qconstrain",
        description="Constrained quantum dynamics: simulate flows, sample vector-field "
                    "grids, locate fixed points, serve the explorer API.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model identifier (see `qconstrain field --help`)")
    common.add_argument("--params", action="append",
                        help="model parameters as key=val[,key=val...]; repeatable")
    common.add_argument("--engine", choices=["closed-form", "symplectic", "metric"],
                        help="which realization drives the flow")

    sim = sub.add_parser("simulate", parents=[common], help="integrate a trajectory")
    sim.add_argument("--config", help="JSON config file; flags override its values")
    sim.add_argument("--initial", help="comma-separated initial coordinates")
    sim.add_argument("--t-end", dest="t_end", type=float)
    sim.add_argument("--tol", type=float, help="relative tolerance (absolute = tol/100)")
    sim.add_argument("--out", help="output stem or filename")
    sim.add_argument("--format", choices=["csv", "json", "both"])
    sim.set_defaults(func=cmd_simulate)

    fld = sub.add_parser("field", parents=[common], help="sample a vector-field grid")
    fld.add_argument("--partner", help="theta,phi of the partner sphere (coupled models)")
    fld.add_argument("--theta-count", type=int, default=24)
    fld.add_argument("--phi-count", type=int, default=24)
    fld.add_argument("--out", help="write JSON here instead of stdout")
    fld.set_defaults(func=cmd_field)

    fps = sub.add_parser("fixed-points", parents=[common], help="scan for fixed points")
    fps.add_argument("--partner", help="theta,phi of the partner sphere (coupled models)")
    fps.add_argument("--seed-count", type=int, default=50, help="seeds per angle axis")
    fps.add_argument("--residual-tol", type=float, default=1e-10)
    fps.add_argument("--out", help="write JSON here instead of stdout")
    fps.set_defaults(func=cmd_fixed_points)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--port", type=int, default=8077)
    srv.add_argument("--host", default="127.0.0.1")
    srv.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("QCONSTRAIN_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInput, SingularConstraintMatrix) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QconstrainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
