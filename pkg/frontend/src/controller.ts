/** View state and fetch orchestration.
 *
 * Every user action (model select, horizon change, clamp toggle, manual
 * refresh) maps to exactly one forecast refetch; an in-flight request is
 * aborted when a new action arrives so stale responses never land.
 */

import { ApiClient, ForecastPoint, ModelInfo } from "./api.js";

export interface ViewState {
  selectedModelId: string | null;
  horizonHours: number;
  clamp: boolean;
  lastFetched: ForecastPoint[] | null;
  error: string | null;
}

export type Listener = (state: ViewState) => void;

export class DashboardController {
  readonly state: ViewState = {
    selectedModelId: null,
    horizonHours: 24,
    clamp: false,
    lastFetched: null,
    error: null,
  };

  private models: ModelInfo[] = [];
  private inflight: AbortController | null = null;
  private listener: Listener = () => {};

  constructor(private readonly api: ApiClient) {}

  onUpdate(listener: Listener): void {
    this.listener = listener;
  }

  availableModels(): ModelInfo[] {
    return this.models;
  }

  /** Load the model list and select the first entry (one refetch). */
  async start(): Promise<void> {
    this.models = await this.api.models();
    if (this.models.length === 0) {
      this.state.error = "No trained models in the store.";
      this.listener(this.state);
      return;
    }
    await this.selectModel(this.models[0].model_id);
  }

  async selectModel(modelId: string): Promise<void> {
    this.state.selectedModelId = modelId;
    await this.refetch();
  }

  async setHorizon(hours: number): Promise<void> {
    this.state.horizonHours = hours;
    await this.refetch();
  }

  async setClamp(clamp: boolean): Promise<void> {
    this.state.clamp = clamp;
    await this.refetch();
  }

  async refresh(): Promise<void> {
    await this.refetch();
  }

  private async refetch(): Promise<void> {
    if (this.state.selectedModelId === null) {
      return;
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const points = await this.api.forecast(
        this.state.selectedModelId,
        this.state.horizonHours,
        this.state.clamp,
        controller.signal,
      );
      if (controller !== this.inflight) {
        return; // superseded by a newer action
      }
      this.state.lastFetched = points;
      this.state.error = null;
    } catch (err) {
      if (controller !== this.inflight || (err instanceof DOMException && err.name === "AbortError")) {
        return;
      }
      this.state.error = err instanceof Error ? err.message : String(err);
    }
    this.listener(this.state);
  }
}
