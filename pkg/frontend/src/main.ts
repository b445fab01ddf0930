/** Browser wiring: DOM events in, rendered views out. */

import { ApiClient } from "./api.js";
import { DashboardController } from "./controller.js";
import {
  renderErrorBanner,
  renderEvaluationTable,
  renderForecastChart,
  renderModelOptions,
  renderSnapshot,
} from "./render.js";

const POLL_INTERVAL_MS = 15 * 60 * 1000;

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

export async function bootstrap(baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  const controller = new DashboardController(api);

  const chart = byId("forecast-chart");
  const snapshot = byId("snapshot");
  const evaluation = byId("evaluation");
  const selector = byId("model-select") as HTMLSelectElement;
  const horizon = byId("horizon-input") as HTMLInputElement;
  const clamp = byId("clamp-input") as HTMLInputElement;
  const refresh = byId("refresh-button") as HTMLButtonElement;

  controller.onUpdate((state) => {
    if (state.error) {
      chart.innerHTML = renderErrorBanner(state.error);
      snapshot.innerHTML = "";
      return;
    }
    const points = state.lastFetched ?? [];
    chart.innerHTML = renderForecastChart(points);
    snapshot.innerHTML = renderSnapshot(points, state.selectedModelId ?? "");
  });

  selector.addEventListener("change", () => void controller.selectModel(selector.value));
  horizon.addEventListener("change", () => {
    const hours = Math.min(168, Math.max(1, Number(horizon.value) || 24));
    horizon.value = String(hours);
    void controller.setHorizon(hours);
  });
  clamp.addEventListener("change", () => void controller.setClamp(clamp.checked));
  refresh.addEventListener("click", () => void controller.refresh());

  async function loadEvaluation(): Promise<void> {
    try {
      evaluation.innerHTML = renderEvaluationTable(await api.evaluation());
    } catch (err) {
      evaluation.innerHTML = renderErrorBanner(
        `Evaluation report unavailable: ${err instanceof Error ? err.message : err}`,
      );
      evaluation
        .querySelector('[data-action="retry"]')
        ?.addEventListener("click", () => void loadEvaluation());
    }
  }

  await controller.start();
  selector.innerHTML = renderModelOptions(
    controller.availableModels(),
    controller.state.selectedModelId,
  );
  await loadEvaluation();

  setInterval(() => void controller.refresh(), POLL_INTERVAL_MS);
}

declare global {
  interface Window {
    HELIOCAST_BASE_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("forecast-chart")) {
  const base = window.HELIOCAST_BASE_URL ?? "http://127.0.0.1:8000";
  void bootstrap(base);
}
