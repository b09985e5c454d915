"""Walk through the HTTP API the explorer UI consumes.

Uses the in-process test client, so no server needs to be running; start a
real one with `qconstrain serve --port 8077` and replace the client with
plain HTTP requests to get identical bytes.
"""

import numpy as np
from fastapi.testclient import TestClient

from qconstrain.service import create_app

client = TestClient(create_app())

print("GET /health ->", client.get("/health").json())

print("\nGET /models ->")
for model in client.get("/models").json()["models"]:
    engines = "/".join(model["engines"])
    print(f"  {model['id']:<20} {engines:<18} coords {model['coord_names']}")

print("\nPOST /field (coupled pair, partner on the equator):")
resp = client.post("/field", json={
    "model": "example1-ode",
    "params": {"omega1": 1, "omega2": 2, "omega3": 3},
    "grid": {"theta_count": 6, "phi_count": 6},
    "partner": {"theta": np.pi / 2, "phi": np.pi / 2},
})
grid = resp.json()
print(f"  {len(grid['samples'])} samples, {len(grid['singular_mask'])} masked; first:")
print("  ", grid["samples"][0])

print("\nPOST /trajectory (single spin with conserved <sx>):")
resp = client.post("/trajectory", json={
    "model": "example2-operator", "engine": "metric",
    "initial": [0.3, 0.2], "t_end": 15.0,
})
doc = resp.json()
sx = np.array(doc["diagnostics"]["sx"])
print(f"  {len(doc['times'])} samples; <sx> drift {np.max(np.abs(sx - sx[0])):.2e}; "
      f"final angles {tuple(round(v, 4) for v in doc['points'][-1])}")

print("\nError surfaces carry machine-readable codes:")
resp = client.post("/trajectory", json={
    "model": "example2-operator", "engine": "symplectic", "initial": [0.4, 0.2],
})
print(f"  symplectic engine on a single constraint -> {resp.status_code} "
      f"{resp.json()['code']}")
resp = client.post("/field", json={"model": "not-a-model"})
print(f"  unknown model -> {resp.status_code} {resp.json()['code']}")
