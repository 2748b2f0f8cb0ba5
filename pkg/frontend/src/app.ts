/** Explorer wiring: brush-linked scatter/gaze plot, heatmap gradient controls,
 * cluster overlays.  All analysis happens server-side; this file only
 * requests, filters, and displays. */

import {
  ApiError,
  ClusterModelDto,
  FixationDto,
  GazekitClient,
  SweepEntryDto,
  filterByOnset,
} from "./api.js";
import { RequestSequencer } from "./net.js";
import {
  ViewState,
  gradientProblem,
  normalizeBrush,
  parseState,
  serializeState,
} from "./state.js";

/** Assignment palette; mirrors the server's overlay colors. */
export const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export class ExplorerApp {
  state: ViewState;
  fixations: FixationDto[] = [];
  cluster: { model: ClusterModelDto; table: SweepEntryDto[] | null } | null = null;
  private seq = new RequestSequencer();

  constructor(readonly client: GazekitClient) {
    this.state = parseState(location.hash);
  }

  // --- lifecycle -------------------------------------------------------------

  async init(): Promise<void> {
    this.bindControls();
    const ids = await this.client.recordings();
    const select = el<HTMLSelectElement>("recording-select");
    select.innerHTML = "";
    for (const id of ids) {
      const opt = document.createElement("option");
      opt.value = opt.textContent = id;
      select.appendChild(opt);
    }
    if (!this.state.recording || !ids.includes(this.state.recording)) {
      this.state.recording = ids[0] ?? null;
    }
    if (this.state.recording) select.value = this.state.recording;
    this.reflectControls();
    await this.loadRecording();
  }

  private bindControls(): void {
    el<HTMLSelectElement>("recording-select").addEventListener("change", (ev) => {
      this.state.recording = (ev.target as HTMLSelectElement).value;
      this.state.brush = null;
      this.cluster = null;
      void this.loadRecording();
    });
    el("apply-gradient").addEventListener("click", () => {
      void this.setGradient(
        el<HTMLInputElement>("low").value.trim(),
        el<HTMLInputElement>("high").value.trim(),
      );
    });
    el("apply-brush").addEventListener("click", () => {
      const t0 = Number(el<HTMLInputElement>("brush-t0").value);
      const t1 = Number(el<HTMLInputElement>("brush-t1").value);
      if (Number.isFinite(t0) && Number.isFinite(t1)) void this.brush(t0, t1);
    });
    el("clear-brush").addEventListener("click", () => void this.clearBrush());
    el("overlay-k").addEventListener("click", () => {
      const k = Number(el<HTMLInputElement>("cluster-k").value);
      if (Number.isFinite(k) && k >= 1) void this.toggleClusters({ mode: "k", k });
    });
    el("run-sweep").addEventListener("click", () => {
      const [a, b] = el<HTMLInputElement>("sweep-range").value.split("..").map(Number);
      if (Number.isFinite(a) && Number.isFinite(b)) {
        void this.toggleClusters({ mode: "sweep", kMin: a, kMax: b });
      }
    });
    el("clear-clusters").addEventListener("click", () => {
      this.state.cluster = { mode: "off" };
      this.cluster = null;
      el("xb-table").innerHTML = "";
      this.syncUrl();
      void this.refreshScatter();
    });
    this.bindTimeline();
    for (const name of ["scatter", "gazeplot", "heatmap"] as const) {
      el<HTMLInputElement>(`show-${name}`).addEventListener("change", (ev) => {
        this.state.layers[name] = (ev.target as HTMLInputElement).checked;
        el(`${name}-panel`).style.display = this.state.layers[name] ? "" : "none";
        this.syncUrl();
      });
    }
  }

  private bindTimeline(): void {
    const strip = el("timeline");
    let dragStart: number | null = null;
    const fraction = (ev: PointerEvent) => {
      const rect = strip.getBoundingClientRect();
      return Math.min(Math.max((ev.clientX - rect.left) / rect.width, 0), 1);
    };
    strip.addEventListener("pointerdown", (ev) => {
      dragStart = fraction(ev);
      strip.setPointerCapture(ev.pointerId);
    });
    strip.addEventListener("pointerup", (ev) => {
      if (dragStart === null) return;
      const span = this.onsetSpan();
      const a = dragStart * span;
      const b = fraction(ev) * span;
      dragStart = null;
      void this.brush(Math.round(a), Math.round(b));
    });
  }

  private onsetSpan(): number {
    return this.fixations.length
      ? Math.max(...this.fixations.map((f) => f.onset_ms))
      : 0;
  }

  private async loadRecording(): Promise<void> {
    if (!this.state.recording) return;
    try {
      const resp = await this.client.fixations(this.state.recording);
      this.fixations = resp.fixations;
      this.setStatus(`${resp.count} fixations`);
    } catch (err) {
      this.surfaceError(err);
      return;
    }
    this.syncUrl();
    await Promise.all([this.refreshScatter(), this.refreshGazeplot(), this.refreshHeatmap()]);
    if (this.state.cluster.mode !== "off") await this.toggleClusters(this.state.cluster);
  }

  // --- spec operations ---------------------------------------------------------

  /** Re-request both linked views with the (auto-normalized) window. */
  async brush(t0: number, t1: number): Promise<void> {
    this.state.brush = normalizeBrush(t0, t1);
    this.reflectControls();
    this.syncUrl();
    await Promise.all([this.refreshScatter(), this.refreshGazeplot()]);
    this.drawBrushRegion();
  }

  async clearBrush(): Promise<void> {
    this.state.brush = null;
    this.reflectControls();
    this.syncUrl();
    await Promise.all([this.refreshScatter(), this.refreshGazeplot()]);
    this.drawBrushRegion();
  }

  /** Validate the text boxes; on success refetch gradient-consuming layers. */
  async setGradient(low: string, high: string): Promise<void> {
    const problem = gradientProblem(low, high);
    const errorBox = el("gradient-error");
    if (problem) {
      errorBox.textContent = `${problem}: expected 6 hex digits`;
      return; // no request dispatched
    }
    errorBox.textContent = "";
    this.state.low = low.toLowerCase();
    this.state.high = high.toLowerCase();
    this.reflectControls();
    this.syncUrl();
    await Promise.all([this.refreshHeatmap(), this.refreshScatter()]);
  }

  /** Request a (cached) cluster analysis and overlay centers/assignments. */
  async toggleClusters(mode: ViewState["cluster"]): Promise<void> {
    if (!this.state.recording || mode.mode === "off") return;
    this.state.cluster = mode;
    this.syncUrl();
    const params: Record<string, unknown> =
      mode.mode === "k" ? { k: mode.k } : { sweep: [mode.kMin, mode.kMax] };
    try {
      const job = await this.client.analyze(this.state.recording, "cluster", params);
      if (job.status === "failed" && job.error) {
        this.setStatus(`${job.error.code}: ${job.error.message}`);
        return;
      }
      this.cluster = { model: job.result.model, table: job.result.table };
      this.renderXbTable();
      this.applyOverlay();
      this.setStatus(`cluster k=${this.cluster.model.k} ready (job ${job.id})`);
    } catch (err) {
      this.surfaceError(err);
    }
  }

  // --- view refresh --------------------------------------------------------------

  private layerQuery() {
    return {
      window: this.state.brush
        ? ([this.state.brush.t0, this.state.brush.t1] as [number, number])
        : undefined,
      low: this.state.low,
      high: this.state.high,
    };
  }

  async refreshScatter(): Promise<void> {
    if (!this.state.recording) return;
    const seq = this.seq.begin("scatter");
    const url = this.client.layerUrl(this.state.recording, "scatter", this.layerQuery());
    try {
      const text = await this.client.fetchText(url);
      if (!this.seq.isCurrent("scatter", seq)) return; // stale response dropped
      el("scatter").innerHTML = text;
      this.applyOverlay();
    } catch (err) {
      this.surfaceError(err);
    }
  }

  async refreshGazeplot(): Promise<void> {
    if (!this.state.recording) return;
    const seq = this.seq.begin("gazeplot");
    const url = this.client.layerUrl(this.state.recording, "gazeplot", this.layerQuery());
    try {
      const text = await this.client.fetchText(url);
      if (!this.seq.isCurrent("gazeplot", seq)) return;
      el("gazeplot").innerHTML = text;
    } catch (err) {
      this.surfaceError(err);
    }
  }

  async refreshHeatmap(): Promise<void> {
    if (!this.state.recording) return;
    el<HTMLImageElement>("heatmap").src = this.client.layerUrl(
      this.state.recording, "heatmap", { low: this.state.low, high: this.state.high },
    );
  }

  /** Recolor scatter markers by hard assignment and draw center crosses. */
  private applyOverlay(): void {
    if (!this.cluster) return;
    const svg = el("scatter").querySelector("svg");
    if (!svg) return;
    const visible = filterByOnset(
      this.fixations,
      this.state.brush ? [this.state.brush.t0, this.state.brush.t1] : null,
    );
    const fullIndex = new Map(this.fixations.map((f, i) => [f, i]));
    const circles = svg.querySelectorAll("circle");
    const labels = this.cluster.model.labels;
    circles.forEach((circle, i) => {
      const fixation = visible[i];
      if (!fixation) return;
      const label = labels[fullIndex.get(fixation)!];
      circle.setAttribute("fill", PALETTE[label % PALETTE.length]);
    });
    for (const [mx, my] of this.cluster.model.means) {
      const s = 8;
      const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
      path.setAttribute(
        "d",
        `M ${mx - s} ${my - s} L ${mx + s} ${my + s} M ${mx - s} ${my + s} L ${mx + s} ${my - s}`,
      );
      path.setAttribute("stroke", "#000000");
      path.setAttribute("stroke-width", "3");
      path.setAttribute("fill", "none");
      svg.appendChild(path);
    }
  }

  private renderXbTable(): void {
    const host = el("xb-table");
    if (!this.cluster?.table) {
      host.innerHTML = "";
      return;
    }
    const best = this.cluster.model.k;
    const rows = this.cluster.table
      .map((entry) => {
        const xb = entry.xb === null ? `failed: ${entry.error}` : entry.xb.toPrecision(6);
        const cls = entry.k === best ? ' class="argmin"' : "";
        return `<tr${cls}><td>${entry.k}</td><td>${xb}</td></tr>`;
      })
      .join("");
    host.innerHTML =
      `<table><caption>xb by k (argmin k=${best})</caption>` +
      `<thead><tr><th>k</th><th>xb</th></tr></thead><tbody>${rows}</tbody></table>`;
  }

  private drawBrushRegion(): void {
    const strip = el("timeline");
    const span = this.onsetSpan();
    const region = el("timeline-region");
    if (!this.state.brush || span === 0) {
      region.style.display = "none";
      return;
    }
    region.style.display = "block";
    region.style.left = `${(this.state.brush.t0 / span) * 100}%`;
    region.style.width = `${((this.state.brush.t1 - this.state.brush.t0) / span) * 100}%`;
    strip.title = `brush ${this.state.brush.t0}..${this.state.brush.t1} ms`;
  }

  // --- plumbing ---------------------------------------------------------------

  private reflectControls(): void {
    el<HTMLInputElement>("low").value = this.state.low;
    el<HTMLInputElement>("high").value = this.state.high;
    el("low-swatch").style.background = `#${this.state.low}`;
    el("high-swatch").style.background = `#${this.state.high}`;
    el<HTMLInputElement>("brush-t0").value = this.state.brush ? String(this.state.brush.t0) : "";
    el<HTMLInputElement>("brush-t1").value = this.state.brush ? String(this.state.brush.t1) : "";
    for (const name of ["scatter", "gazeplot", "heatmap"] as const) {
      el<HTMLInputElement>(`show-${name}`).checked = this.state.layers[name];
      el(`${name}-panel`).style.display = this.state.layers[name] ? "" : "none";
    }
  }

  private syncUrl(): void {
    history.replaceState(null, "", `#${serializeState(this.state)}`);
  }

  private setStatus(text: string): void {
    el("status").textContent = text;
  }

  private surfaceError(err: unknown): void {
    if (err instanceof ApiError) {
      this.setStatus(`${err.detail.code}: ${err.detail.message}`);
    } else {
      this.setStatus(String(err));
    }
  }
}
