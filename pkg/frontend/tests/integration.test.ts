/** Linked-view and gradient acceptance against a live gazekit service.
 * Spawns `python3 -m gazekit.cli serve` on a scratch workspace. */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, FixationDto, GazekitClient, filterByOnset } from "../src/api.js";
import { gradientProblem } from "../src/state.js";
import { extractMarkers, markerKeySet, sameKeySets } from "../src/svg.js";

const PORT = 8841;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let client: GazekitClient;
let rid: string;
let fixations: FixationDto[];

function syntheticLog(): string {
  const segments: [number, number][] = [
    [100, 100], [900, 600], [683, 384], [1200, 200], [300, 650], [640, 90],
  ];
  const rows = ["t_ms,x_px,y_px,valid"];
  let t = 0;
  for (const [cx, cy] of segments) {
    for (let i = 0; i < 30; i++) {
      rows.push(`${t},${cx},${cy},1`);
      t += 10;
    }
  }
  return rows.join("\n") + "\n";
}

beforeAll(async () => {
  const workspace = mkdtempSync(join(tmpdir(), "gazekit-ui-ws-"));
  server = spawn(
    "python3",
    ["-m", "gazekit.cli", "serve", "--workspace", workspace, "--port", String(PORT)],
    { stdio: "ignore" },
  );
  let ready = false;
  for (let i = 0; i < 200 && !ready; i++) {
    try {
      ready = (await fetch(`${BASE}/`)).ok;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 100));
    }
  }
  if (!ready) throw new Error("gazekit service did not come up");
  client = new GazekitClient(BASE);
  rid = await client.upload(syntheticLog(), { width: 1366, height: 768 });
  fixations = (await client.fixations(rid)).fixations;
}, 60_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("linked views", () => {
  it("has the fixture fixations", () => {
    expect(fixations).toHaveLength(6);
  });

  it("scatter and gaze plot show identical marker sets equal to the onset filter, over 10 scripted brush ranges", async () => {
    const maxOnset = Math.max(...fixations.map((f) => f.onset_ms));
    const half = Math.floor(maxOnset / 2);
    const windows: [number, number][] = [
      [0, maxOnset],                                        // full span
      [0, half],                                            // first half
      [half, maxOnset],                                     // second half
      [0, 0],                                               // zero width at first onset
      [fixations[1].onset_ms, fixations[1].onset_ms],       // zero width mid-stream
      [maxOnset + 1000, maxOnset + 2000],                   // outside all onsets
      [fixations[2].onset_ms, fixations[4].onset_ms],       // interior slice
      [0, fixations[0].onset_ms],                           // just the first
      [123, 456],                                           // unaligned bounds
      [Math.floor(maxOnset / 3), Math.floor((2 * maxOnset) / 3)],
    ];
    expect(windows).toHaveLength(10);
    for (const window of windows) {
      const scatterSvg = await client.fetchText(client.layerUrl(rid, "scatter", { window }));
      const gazeplotSvg = await client.fetchText(client.layerUrl(rid, "gazeplot", { window }));
      const scatterSet = markerKeySet(extractMarkers(scatterSvg));
      const gazeplotSet = markerKeySet(extractMarkers(gazeplotSvg));
      expect(sameKeySets(scatterSet, gazeplotSet), `views differ for ${window}`).toBe(true);
      const expected = markerKeySet(filterByOnset(fixations, window));
      expect(sameKeySets(scatterSet, expected), `filter differs for ${window}`).toBe(true);
    }
  }, 60_000);

  it("full-span brush equals the unbrushed view byte for byte", async () => {
    const maxOnset = Math.max(...fixations.map((f) => f.onset_ms));
    const brushed = await client.fetchText(
      client.layerUrl(rid, "scatter", { window: [0, maxOnset] }),
    );
    const plain = await client.fetchText(client.layerUrl(rid, "scatter"));
    expect(brushed).toBe(plain);
  });
});

describe("gradient controls", () => {
  it("text-box override round-trips into the fetched heatmap bytes", async () => {
    const low = "0000ff";
    const high = "ffff00";
    expect(gradientProblem(low, high)).toBeNull(); // boxes validate before dispatch
    const overridden = await client.fetchBytes(client.layerUrl(rid, "heatmap", { low, high }));
    const defaults = await client.fetchBytes(client.layerUrl(rid, "heatmap"));
    expect(Buffer.from(overridden).equals(Buffer.from(defaults))).toBe(false);
    const refetched = await client.fetchBytes(
      `${BASE}/recordings/${rid}/layers/heatmap?low=${low}&high=${high}`,
    );
    expect(Buffer.from(overridden).equals(Buffer.from(refetched))).toBe(true);
  });

  it("invalid hex is caught client-side, no request needed", () => {
    expect(gradientProblem("GGGGGG", "ff0000")).toBe("low");
    expect(gradientProblem("00ff00", "12345")).toBe("high");
  });
});

describe("cluster overlay contract", () => {
  it("repeated analysis requests return the cached job", async () => {
    const first = await client.analyze(rid, "cluster", { k: 3 });
    const second = await client.analyze(rid, "cluster", { k: 3 });
    expect(first.status).toBe("done");
    expect(second.id).toBe(first.id);
    expect(second.result.model.means).toEqual(first.result.model.means);
  });

  it("sweep returns an xb-by-k table with exactly one argmin", async () => {
    const job = await client.analyze(rid, "cluster", { sweep: [2, 6], seed: 1, restarts: 2 });
    expect(job.status).toBe("done");
    const table = job.result.table as { k: number; xb: number | null }[];
    expect(table.map((e) => e.k)).toEqual([2, 3, 4, 5, 6]);
    const best = job.result.model.k;
    expect(table.filter((e) => e.k === best)).toHaveLength(1);
  });

  it("server errors surface verbatim codes", async () => {
    const job = await client.analyze(rid, "cluster", { k: 500 });
    expect(job.status).toBe("failed");
    expect(job.error?.code).toBe("TooFewPoints");

    await expect(
      client.fetchText(`${BASE}/recordings/${rid}/layers/scatter?window=9,2`),
    ).rejects.toSatisfy((err: unknown) => (err as ApiError).detail.code === "BadWindow");
  });
});
