/** Pure HTML/SVG renderers: state in, markup out. Keeping these as
 * string functions makes every view testable without a DOM. */

import type { EvaluationReport, ForecastPoint } from "./api.js";

const CHART_WIDTH = 720;
const CHART_HEIGHT = 320;
const MARGIN = { top: 16, right: 16, bottom: 36, left: 56 };
const DOT_MIN = 3;
const DOT_MAX = 10;

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Dot radius grows monotonically with temperature (the chart's second
 * encoded variable); a flat series gets the midpoint radius. */
export function temperatureRadius(temperature: number, min: number, max: number): number {
  if (max <= min) {
    return (DOT_MIN + DOT_MAX) / 2;
  }
  return DOT_MIN + ((temperature - min) / (max - min)) * (DOT_MAX - DOT_MIN);
}

export function renderEmptyState(message: string): string {
  return `<div class="empty-state">${escapeHtml(message)}</div>`;
}

export function renderErrorBanner(message: string): string {
  return (
    `<div class="error-banner" role="alert">${escapeHtml(message)} ` +
    `<button type="button" data-action="retry">Retry</button></div>`
  );
}

export function renderSnapshot(points: ForecastPoint[], modelId: string): string {
  if (points.length === 0) {
    return renderEmptyState("No forecast available yet.");
  }
  const now = points[0];
  const when = new Date(now.timestamp);
  const hour = now.timestamp.slice(11, 16);
  return `<div class="snapshot-card">
  <div class="snapshot-title">Next hour (${escapeHtml(hour)}, ${when.toDateString()})</div>
  <div class="snapshot-value">${now.predicted_wm2.toFixed(1)} W/m²</div>
  <div class="snapshot-temp">${now.temperature_k.toFixed(2)} K</div>
  <div class="snapshot-model">model: ${escapeHtml(modelId)}</div>
</div>`;
}

export function renderForecastChart(points: ForecastPoint[]): string {
  if (points.length === 0) {
    return renderEmptyState("No forecast points to draw.");
  }
  const plotW = CHART_WIDTH - MARGIN.left - MARGIN.right;
  const plotH = CHART_HEIGHT - MARGIN.top - MARGIN.bottom;
  const values = points.map((p) => p.predicted_wm2);
  const temps = points.map((p) => p.temperature_k);
  const yMin = Math.min(0, ...values);
  const yMax = Math.max(1, ...values);
  const tMin = Math.min(...temps);
  const tMax = Math.max(...temps);

  const x = (i: number) =>
    MARGIN.left + (points.length === 1 ? plotW / 2 : (i / (points.length - 1)) * plotW);
  const y = (v: number) => MARGIN.top + plotH - ((v - yMin) / (yMax - yMin)) * plotH;

  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${x(i).toFixed(1)},${y(p.predicted_wm2).toFixed(1)}`)
    .join(" ");

  const circles = points
    .map((p, i) => {
      const r = temperatureRadius(p.temperature_k, tMin, tMax);
      const hour = p.timestamp.slice(11, 16);
      return (
        `<circle class="forecast-dot" cx="${x(i).toFixed(1)}" cy="${y(p.predicted_wm2).toFixed(1)}" ` +
        `r="${r.toFixed(2)}" data-temperature="${p.temperature_k}">` +
        `<title>${hour}: ${p.predicted_wm2.toFixed(1)} W/m² at ${p.temperature_k.toFixed(2)} K</title>` +
        `</circle>`
      );
    })
    .join("\n    ");

  const hourLabels = points
    .filter((_, i) => i % Math.max(1, Math.floor(points.length / 8)) === 0)
    .map((p) => {
      const i = points.indexOf(p);
      return `<text class="axis-label" x="${x(i).toFixed(1)}" y="${CHART_HEIGHT - 8}" text-anchor="middle">${p.timestamp.slice(11, 13)}h</text>`;
    })
    .join("\n    ");

  return `<svg viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}" class="forecast-chart" role="img" aria-label="Predicted irradiance by hour">
  <line class="axis" x1="${MARGIN.left}" y1="${y(0).toFixed(1)}" x2="${CHART_WIDTH - MARGIN.right}" y2="${y(0).toFixed(1)}"/>
  <text class="axis-label" x="12" y="${MARGIN.top + 8}">W/m²</text>
  <path class="forecast-line" d="${path}" fill="none"/>
    ${circles}
    ${hourLabels}
</svg>`;
}

function cell(value: number | null | undefined, digits: number): string {
  if (value === null || value === undefined) {
    return "n/a";
  }
  return value.toFixed(digits);
}

/** Index of the row to highlight: lowest RMSE among scored rows, first
 * row winning exact ties. */
export function bestRowIndex(report: EvaluationReport): number {
  let best = -1;
  for (let i = 0; i < report.rows.length; i++) {
    const metrics = report.rows[i].metrics;
    if (!metrics) continue;
    if (best === -1 || metrics.rmse < report.rows[best].metrics!.rmse) {
      best = i;
    }
  }
  return best;
}

export function renderEvaluationTable(report: EvaluationReport): string {
  if (report.rows.length === 0) {
    return renderEmptyState("The evaluation report has no rows.");
  }
  const best = bestRowIndex(report);
  const body = report.rows
    .map((row, i) => {
      const classes = [i === best ? "best-row" : "", row.failed ? "failed-row" : ""]
        .filter(Boolean)
        .join(" ");
      if (!row.metrics) {
        return `<tr class="${classes}"><td>${escapeHtml(row.display_name)}</td><td colspan="4">failed: ${escapeHtml(row.error ?? "unknown")}</td></tr>`;
      }
      const m = row.metrics;
      return (
        `<tr class="${classes}"><td>${escapeHtml(row.display_name)}</td>` +
        `<td>${cell(m.mse, 2)}</td><td>${cell(m.rmse, 2)}</td>` +
        `<td>${cell(m.mae, 2)}</td><td>${cell(m.r2, 4)}</td></tr>`
      );
    })
    .join("\n    ");
  const footnotes = report.footnotes
    .map((note, i) => `<li>[${i + 1}] ${escapeHtml(note)}</li>`)
    .join("\n    ");
  return `<table class="evaluation-table">
  <thead><tr><th>Model</th><th>MSE</th><th>RMSE</th><th>MAE</th><th>R²</th></tr></thead>
  <tbody>
    ${body}
  </tbody>
</table>
<div class="split-description">${escapeHtml(report.split_description)}</div>
<ul class="footnotes">
    ${footnotes}
</ul>`;
}

export function renderModelOptions(
  models: { model_id: string; display_name?: string }[],
  selected: string | null,
): string {
  return models
    .map((m) => {
      const chosen = m.model_id === selected ? " selected" : "";
      const label = m.display_name && m.display_name !== m.model_id
        ? `${m.model_id} (${m.display_name})`
        : m.model_id;
      return `<option value="${escapeHtml(m.model_id)}"${chosen}>${escapeHtml(label)}</option>`;
    })
    .join("\n");
}
