/** Explorer wiring: model picker, linked sphere panes, trajectory playback.
 *
 * The coupled-pair models show two panes; dragging on one sphere moves the
 * "partner" point for the other pane's field, refreshed through the
 * throttled sender (at most 10 requests per second, latest drag wins).
 * Clicking seeds a trajectory; the readout panel prints backend diagnostic
 * values only.
 */

import { ApiClient, ApiError } from "./api.js";
import { SphereView } from "./sphereView.js";
import { ViewState } from "./state.js";
import { createThrottledSender } from "./throttle.js";
import { FieldGrid, FieldRequest, ModelInfo, SphereCoords } from "./types.js";

const MAX_FIELD_REQUESTS_PER_SECOND = 10;
const RETRY_BACKOFF_MS = [500, 1000, 2000, 4000];

export class ExplorerApp {
  readonly state = new ViewState();
  private views: SphereView[] = [];
  private retryLevel = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly dom: {
      panes: (HTMLElement | null)[];
      modelSelect: HTMLSelectElement | null;
      readout: HTMLElement | null;
      status: HTMLElement | null;
      badge: HTMLElement | null;
    },
  ) {}

  private fieldSender = createThrottledSender<FieldRequest, { value: FieldGrid; rawText: string }>({
    maxPerSecond: MAX_FIELD_REQUESTS_PER_SECOND,
    send: (req) => this.api.postField(req),
    onResult: (_req, result) => {
      this.state.staleData = false;
      this.retryLevel = 0;
      this.setBadge("");
      this.views[0]?.renderGrid(result.value);
    },
    onError: (req, error) => {
      if (error instanceof ApiError && error.status === 422) {
        this.setStatus(`singular configuration: ${error.code}`);
        return;
      }
      this.state.staleData = true;
      this.setBadge("stale data - retrying");
      const delay = RETRY_BACKOFF_MS[Math.min(this.retryLevel++, RETRY_BACKOFF_MS.length - 1)];
      setTimeout(() => this.fieldSender.request(req), delay);
    },
  });

  async start() {
    const models = await this.api.getModels();
    this.populateModelPicker(models.value.models);
    const first = models.value.models.find((m) => m.id === "example1-ode")
      ?? models.value.models[0];
    this.selectModel(first);
  }

  private populateModelPicker(models: ModelInfo[]) {
    const select = this.dom.modelSelect;
    if (!select) return;
    select.innerHTML = "";
    for (const model of models) {
      const option = document.createElement("option");
      option.value = model.id;
      option.textContent = `${model.id} - ${model.description}`;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      const chosen = models.find((m) => m.id === select.value);
      if (chosen) this.selectModel(chosen);
    });
  }

  selectModel(model: ModelInfo) {
    this.state.selectModel(model);
    const paneCount = model.needs_partner ? 2 : 1;
    this.views = [];
    for (let i = 0; i < paneCount; i++) {
      const container = this.dom.panes[i] ?? null;
      if (container) container.innerHTML = "";
      const view = new SphereView(container, (text) => this.setStatus(text));
      this.views.push(view);
      if (i === 0) {
        view.onDrag((theta, phi) => this.seedFromPane(theta, phi));
      } else {
        view.onDrag((theta, phi) => this.onPartnerMoved({ theta, phi }));
      }
    }
    if (model.needs_partner) {
      this.views[1]?.renderPartnerMarker(this.state.partner.theta, this.state.partner.phi);
    }
    this.refreshField();
  }

  /** Drag on the partner sphere: clamp, mark, and refresh pane 1's field. */
  onPartnerMoved(coords: SphereCoords) {
    const clamped = this.state.movePartner(coords);
    this.views[1]?.renderPartnerMarker(clamped.theta, clamped.phi);
    this.refreshField();
  }

  refreshField() {
    const model = this.state.model;
    if (!model) return;
    const request: FieldRequest = {
      model: model.id,
      params: this.state.params,
      grid: {
        theta_count: this.state.gridResolution,
        phi_count: this.state.gridResolution,
      },
    };
    if (model.needs_partner) request.partner = this.state.partner;
    this.fieldSender.request(request);
  }

  /** Click on the main sphere: seed and animate a trajectory there. */
  async seedFromPane(theta: number, phi: number) {
    const model = this.state.model;
    if (!model) return;
    const initial = model.needs_partner
      ? [theta, phi, this.state.partner.theta, this.state.partner.phi]
      : [theta, phi];
    try {
      const result = await this.api.postTrajectory({
        model: model.id,
        params: this.state.params,
        initial,
        t_end: 30,
      });
      const entry = this.state.addTrajectory(result.value);
      this.state.play();
      this.renderReadout(entry.id, result.value.diagnostics, 0);
      this.animate(entry.id);
    } catch (error) {
      if (error instanceof ApiError) {
        this.setStatus(`trajectory failed: ${error.status} ${error.code}`);
      } else {
        this.setStatus(`trajectory failed: ${error}`);
      }
    }
  }

  private animate(entryId: number) {
    if (typeof requestAnimationFrame === "undefined") return; // headless tests
    let last: number | null = null;
    const step = (timestamp: number) => {
      const entry = this.state.trajectories.find((t) => t.id === entryId);
      if (!entry) return;
      if (last !== null) this.state.tick((timestamp - last) / 1000);
      last = timestamp;
      const index = this.state.sampleIndex(entry);
      this.views[0]?.renderPath(entry.data, index);
      this.renderReadout(entry.id, entry.data.diagnostics, index);
      this.views.forEach((v) => v.draw());
      if (this.state.isPlaying) requestAnimationFrame(step);
    };
    requestAnimationFrame(step);
  }

  /** Readout lines are backend numbers verbatim; no recomputation here. */
  renderReadout(id: number, diagnostics: Record<string, number[]>, index: number) {
    if (!this.dom.readout) return;
    const lines = Object.entries(diagnostics).map(
      ([name, series]) => `${name} = ${series[Math.min(index, series.length - 1)]}`,
    );
    this.dom.readout.textContent = `trajectory ${id}: ${lines.join(", ")}`;
  }

  private setStatus(text: string) {
    if (this.dom.status) this.dom.status.textContent = text;
  }

  private setBadge(text: string) {
    if (this.dom.badge) this.dom.badge.textContent = text;
  }
}

export function mount(baseUrl: string) {
  const app = new ExplorerApp(new ApiClient(baseUrl), {
    panes: [document.getElementById("pane-1"), document.getElementById("pane-2")],
    modelSelect: document.getElementById("model-select") as HTMLSelectElement | null,
    readout: document.getElementById("readout"),
    status: document.getElementById("status"),
    badge: document.getElementById("badge"),
  });
  void app.start();
  return app;
}
