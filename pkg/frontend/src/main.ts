// DOM bootstrap: wires the store to the page, renders trends and the
// recommendation modal, and forwards operator decisions.

import { SessionConsole } from "./console.js";
import { HttpTransport } from "./transport.js";
import { drawContour, drawOverlay, drawTrend } from "./charts.js";
import { TREND_KEYS, type SessionView, type TrendKey } from "./store.js";
import {
  contourModel,
  formatSimClock,
  predictionOverlay,
  rankedTableRows,
  reportRows,
} from "./view.js";

const TREND_LABELS: Record<TrendKey, string> = {
  pfcl_dtd: "Peak fuel centerline (diagnosed), degC",
  peak_clad_dtd: "Peak cladding (diagnosed), degC",
  core_power: "Core power, W",
  core_outlet_flow: "Core outlet flow, kg/s",
  pump_torque_1: "Pump 1 torque, N*m",
  pump_torque_2: "Pump 2 torque, N*m",
  upper_plenum_temp: "Upper plenum, degC",
  hp_plenum_temp: "HP plenum, degC",
  lp_plenum_temp: "LP plenum, degC",
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function buildTrendCanvases(): Record<TrendKey, HTMLCanvasElement> {
  const grid = el<HTMLDivElement>("trend-grid");
  const out = {} as Record<TrendKey, HTMLCanvasElement>;
  for (const key of TREND_KEYS) {
    const cell = document.createElement("div");
    cell.className = "trend-cell";
    const label = document.createElement("div");
    label.className = "trend-label";
    label.textContent = TREND_LABELS[key];
    const canvas = document.createElement("canvas");
    canvas.width = 320;
    canvas.height = 110;
    cell.append(label, canvas);
    grid.append(cell);
    out[key] = canvas;
  }
  return out;
}

function render(view: SessionView, canvases: Record<TrendKey, HTMLCanvasElement>,
                selected: { index: number | null }): void {
  el("phase-badge").textContent = view.phase;
  el("phase-badge").dataset.phase = view.phase;
  const paused =
    view.phase === "PausedForRecommendation" || view.phase === "AwaitingDecision";
  el("sim-clock").textContent = `sim ${formatSimClock(view.simTime, paused)}`;
  el("wall-clock").textContent = `wall ${new Date().toLocaleTimeString()}`;
  el("connection-banner").hidden = view.connection !== "reconnecting";
  el("alarm-banner").hidden = !view.alarm;
  if (view.scramReason) {
    el("alarm-banner").textContent = `ALARM: ${view.scramReason}`;
  }
  for (const key of TREND_KEYS) {
    drawTrend(canvases[key], view.trends[key],
              key === "pfcl_dtd" ? "#d07000" : "#2b7de9",
              key === "pfcl_dtd" ? 685 : undefined);
  }
  const reportsEl = el<HTMLTableSectionElement>("report-rows");
  reportsEl.innerHTML = "";
  for (const row of reportRows(view.reports)) {
    const tr = document.createElement("tr");
    tr.className = row.overLimit ? "over-limit" : "";
    tr.innerHTML =
      `<td>${row.tCk}s</td><td>${row.zetaPower}</td>` +
      `<td>${row.zetaPfcl}</td><td>${row.verdict}</td>`;
    reportsEl.append(tr);
  }
  renderModal(view, selected);
}

function renderModal(view: SessionView, selected: { index: number | null }): void {
  const modal = el<HTMLDivElement>("recommendation-modal");
  const showModal = view.canDecide && view.recommendation !== null;
  modal.hidden = !showModal;
  if (!view.recommendation) return;
  const rec = view.recommendation;
  if (selected.index === null) selected.index = rec.chosen_index;
  const tbody = el<HTMLTableSectionElement>("ranked-rows");
  tbody.innerHTML = "";
  for (const row of rankedTableRows(rec)) {
    const tr = document.createElement("tr");
    tr.className =
      (row.highlighted ? "top-candidate " : "") +
      (row.candidateIndex === selected.index ? "selected" : "");
    tr.innerHTML =
      `<td>${row.tau2End}</td><td>${row.tTrip}</td><td>${row.total}</td>` +
      `<td>${row.pfcl}</td><td>${row.power}</td><td>${row.torque}</td>`;
    tr.onclick = () => {
      selected.index = row.candidateIndex;
      renderModal(view, selected);
    };
    tbody.append(tr);
  }
  drawContour(el<HTMLCanvasElement>("contour-canvas") as HTMLCanvasElement,
              contourModel(rec));
  const overlay = predictionOverlay(rec, selected.index!);
  if (overlay) {
    drawOverlay(el<HTMLCanvasElement>("overlay-canvas") as HTMLCanvasElement,
                overlay);
  }
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("server") ?? "";
  const sessionId = params.get("session");
  if (!sessionId) {
    el("connection-banner").hidden = false;
    el("connection-banner").textContent =
      "missing ?session=<id> (and optional &server=<url>)";
    return;
  }
  const console_ = new SessionConsole(new HttpTransport(base), sessionId);
  const canvases = buildTrendCanvases();
  const selected: { index: number | null } = { index: null };
  console_.store.subscribe((view) => render(view, canvases, selected));

  el<HTMLButtonElement>("btn-accept").onclick = () =>
    void console_.submitDecision({ action: "accept" }).catch(alertError);
  el<HTMLButtonElement>("btn-override").onclick = () =>
    void console_
      .submitDecision({ action: "override", candidateIndex: selected.index })
      .catch(alertError);
  el<HTMLButtonElement>("btn-scram").onclick = () => {
    if (window.confirm("Send SCRAM? This shuts the reactor down.")) {
      void console_
        .submitDecision({ action: "scram", confirmed: true })
        .catch(alertError);
    }
  };
  await console_.connect();
}

function alertError(e: unknown): void {
  el("connection-banner").hidden = false;
  el("connection-banner").textContent = `decision failed: ${String(e)}`;
}

void boot();
