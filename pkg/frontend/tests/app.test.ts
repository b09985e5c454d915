import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ExplorerApp } from "../src/app.js";
import { FieldRequest, TrajectoryResponse } from "../src/types.js";

const GRID_FIXTURE = readFileSync(
  join(__dirname, "fixtures", "coupled_pair_grid24_partner_eq_090.json"),
  "utf-8",
);
const TRAJECTORY_FIXTURE = readFileSync(
  join(__dirname, "fixtures", "trajectory_example2.json"),
  "utf-8",
);

const MODELS_BODY = JSON.stringify({
  schema_version: 1,
  models: [
    {
      id: "example1-ode", description: "coupled pair", kind: "closed-form",
      coord_names: ["theta1", "phi1", "theta2", "phi2"], coord_dim: 4,
      params: { omega1: 1, omega2: 2, omega3: 3 },
      engines: ["closed-form"], default_engine: "closed-form", needs_partner: true,
    },
    {
      id: "example2-ode", description: "constrained spin", kind: "closed-form",
      coord_names: ["theta", "phi"], coord_dim: 2, params: {},
      engines: ["closed-form"], default_engine: "closed-form", needs_partner: false,
    },
  ],
});

function makeApp() {
  const log: { url: string; body?: unknown }[] = [];
  const fetchImpl = (url: string, init?: RequestInit) => {
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    log.push({ url, body });
    let payload = "";
    if (url.endsWith("/models")) payload = MODELS_BODY;
    else if (url.endsWith("/field")) payload = GRID_FIXTURE;
    else if (url.endsWith("/trajectory")) payload = TRAJECTORY_FIXTURE;
    return Promise.resolve(new Response(payload, { status: 200 }));
  };
  const readout = { textContent: "" };
  const status = { textContent: "" };
  const badge = { textContent: "" };
  const app = new ExplorerApp(new ApiClient("http://test", fetchImpl), {
    panes: [null, null],
    modelSelect: null,
    readout: readout as unknown as HTMLElement,
    status: status as unknown as HTMLElement,
    badge: badge as unknown as HTMLElement,
  });
  return { app, log, readout, status, badge };
}

async function settle() {
  for (let i = 0; i < 8; i++) await Promise.resolve();
}

describe("explorer app", () => {
  it("loads models and requests the coupled-pair field with a partner", async () => {
    const { app, log, status } = makeApp();
    await app.start();
    await settle();
    const fieldCalls = log.filter((c) => c.url.endsWith("/field"));
    expect(fieldCalls.length).toBe(1);
    const body = fieldCalls[0].body as FieldRequest;
    expect(body.model).toBe("example1-ode");
    expect(body.partner).toBeDefined();
    // the full fixture payload reached the glyph layer untouched
    expect(status.textContent).toContain("576 glyphs");
  });

  it("partner move triggers a field refresh carrying the new coordinates", async () => {
    const { app, log } = makeApp();
    await app.start();
    await settle();
    app.onPartnerMoved({ theta: 1.1, phi: 2.2 });
    // the refresh is throttled to 10/s; wait out the trailing dispatch
    await new Promise((resolve) => setTimeout(resolve, 150));
    await settle();
    const fieldCalls = log.filter((c) => c.url.endsWith("/field"));
    expect(fieldCalls.length).toBe(2);
    const body = fieldCalls[1].body as FieldRequest;
    expect(body.partner?.theta).toBeCloseTo(1.1, 12);
    expect(body.partner?.phi).toBeCloseTo(2.2, 12);
  });

  it("readout shows backend diagnostic numbers verbatim", async () => {
    const { app, readout } = makeApp();
    const trajectory: TrajectoryResponse = JSON.parse(TRAJECTORY_FIXTURE);
    const entry = app.state.addTrajectory(trajectory);
    app.renderReadout(entry.id, trajectory.diagnostics, 0);
    // string equality with the served number: displayed values are not
    // recomputed client-side
    expect(readout.textContent).toContain(`sx = ${trajectory.diagnostics.sx[0]}`);
    expect(readout.textContent).toContain(`energy = ${trajectory.diagnostics.energy[0]}`);
  });

  it("served trajectory keeps its constraint constant and ends on the equator", () => {
    const trajectory: TrajectoryResponse = JSON.parse(TRAJECTORY_FIXTURE);
    const sx = trajectory.diagnostics.sx;
    const spread = Math.max(...sx) - Math.min(...sx);
    expect(spread).toBeLessThan(1e-6);
    const finalTheta = trajectory.points[trajectory.points.length - 1][0];
    expect(Math.abs(finalTheta - Math.PI / 2)).toBeLessThan(1e-3);
  });

  it("badges stale data when the network fails and recovers on retry", async () => {
    let failures = 1;
    const fetchImpl = (url: string) => {
      if (url.endsWith("/models")) {
        return Promise.resolve(new Response(MODELS_BODY, { status: 200 }));
      }
      if (failures > 0) {
        failures -= 1;
        return Promise.reject(new Error("offline"));
      }
      return Promise.resolve(new Response(GRID_FIXTURE, { status: 200 }));
    };
    const badge = { textContent: "" };
    const app = new ExplorerApp(new ApiClient("http://test", fetchImpl), {
      panes: [null, null], modelSelect: null, readout: null,
      status: null, badge: badge as unknown as HTMLElement,
    });
    await app.start();
    await settle();
    expect(app.state.staleData).toBe(true);
    expect(badge.textContent).toContain("stale");
    // the scheduled retry succeeds and clears the badge
    await new Promise((resolve) => setTimeout(resolve, 600));
    await settle();
    expect(app.state.staleData).toBe(false);
    expect(badge.textContent).toBe("");
  });
});
