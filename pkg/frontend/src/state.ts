/** View state: what the explorer shows, fully reconstructable from the URL. */

export interface BrushSelection {
  t0: number;
  t1: number;
}

export type ClusterMode =
  | { mode: "off" }
  | { mode: "k"; k: number }
  | { mode: "sweep"; kMin: number; kMax: number };

export interface ViewState {
  recording: string | null;
  /** Gradient endpoints as 6-hex-digit text-box values (no '#'). */
  low: string;
  high: string;
  brush: BrushSelection | null;
  layers: { scatter: boolean; gazeplot: boolean; heatmap: boolean };
  cluster: ClusterMode;
}

export const DEFAULT_LOW = "00ff00";
export const DEFAULT_HIGH = "ff0000";

export function defaultState(): ViewState {
  return {
    recording: null,
    low: DEFAULT_LOW,
    high: DEFAULT_HIGH,
    brush: null,
    layers: { scatter: true, gazeplot: true, heatmap: true },
    cluster: { mode: "off" },
  };
}

/** Inverted ranges are swapped, never an error. */
export function normalizeBrush(t0: number, t1: number): BrushSelection {
  return t0 <= t1 ? { t0, t1 } : { t0: t1, t1: t0 };
}

export function isValidHex(value: string): boolean {
  return /^[0-9a-fA-F]{6}$/.test(value);
}

/**
 * Validate gradient text-box values before dispatch.  Returns the field
 * name of the first invalid box, or null when both are acceptable.
 */
export function gradientProblem(low: string, high: string): "low" | "high" | null {
  if (!isValidHex(low)) return "low";
  if (!isValidHex(high)) return "high";
  return null;
}

export function serializeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.recording) params.set("r", state.recording);
  if (state.low.toLowerCase() !== DEFAULT_LOW) params.set("low", state.low.toLowerCase());
  if (state.high.toLowerCase() !== DEFAULT_HIGH) params.set("high", state.high.toLowerCase());
  if (state.brush) params.set("w", `${state.brush.t0},${state.brush.t1}`);
  const hidden = (Object.keys(state.layers) as (keyof ViewState["layers"])[])
    .filter((k) => !state.layers[k])
    .join(",");
  if (hidden) params.set("hide", hidden);
  if (state.cluster.mode === "k") params.set("k", String(state.cluster.k));
  if (state.cluster.mode === "sweep") {
    params.set("sweep", `${state.cluster.kMin}..${state.cluster.kMax}`);
  }
  return params.toString();
}

export function parseState(query: string): ViewState {
  const state = defaultState();
  const params = new URLSearchParams(query.replace(/^#/, ""));
  state.recording = params.get("r");
  const low = params.get("low");
  const high = params.get("high");
  if (low && isValidHex(low)) state.low = low.toLowerCase();
  if (high && isValidHex(high)) state.high = high.toLowerCase();
  const w = params.get("w");
  if (w) {
    const [a, b] = w.split(",").map(Number);
    if (Number.isFinite(a) && Number.isFinite(b)) state.brush = normalizeBrush(a, b);
  }
  for (const name of (params.get("hide") ?? "").split(",")) {
    if (name === "scatter" || name === "gazeplot" || name === "heatmap") {
      state.layers[name] = false;
    }
  }
  const k = params.get("k");
  const sweep = params.get("sweep");
  if (k && Number.isFinite(Number(k))) {
    state.cluster = { mode: "k", k: Number(k) };
  } else if (sweep) {
    const [a, b] = sweep.split("..").map(Number);
    if (Number.isFinite(a) && Number.isFinite(b)) {
      state.cluster = { mode: "sweep", kMin: a, kMax: b };
    }
  }
  return state;
}
