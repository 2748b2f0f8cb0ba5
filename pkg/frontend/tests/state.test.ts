import { describe, expect, it } from "vitest";

import {
  defaultState,
  gradientProblem,
  isValidHex,
  normalizeBrush,
  parseState,
  serializeState,
} from "../src/state.js";

describe("brush normalization", () => {
  it("keeps ordered ranges", () => {
    expect(normalizeBrush(10, 20)).toEqual({ t0: 10, t1: 20 });
  });

  it("swaps inverted ranges instead of erroring", () => {
    expect(normalizeBrush(500, 100)).toEqual({ t0: 100, t1: 500 });
  });

  it("accepts zero-width ranges", () => {
    expect(normalizeBrush(42, 42)).toEqual({ t0: 42, t1: 42 });
  });
});

describe("gradient validation", () => {
  it("accepts 6 hex digits either case", () => {
    expect(isValidHex("00ff00")).toBe(true);
    expect(isValidHex("A1B2C3")).toBe(true);
  });

  it("rejects malformed values", () => {
    for (const bad of ["GGGGGG", "12345", "1234567", "", "#00ff00"]) {
      expect(isValidHex(bad)).toBe(false);
    }
  });

  it("names the first offending field", () => {
    expect(gradientProblem("GGGGGG", "ff0000")).toBe("low");
    expect(gradientProblem("00ff00", "12345")).toBe("high");
    expect(gradientProblem("00ff00", "ff0000")).toBeNull();
  });
});

describe("view state URL round trip", () => {
  it("defaults serialize to an empty string", () => {
    expect(serializeState(defaultState())).toBe("");
  });

  it("round-trips a fully populated state", () => {
    const state = defaultState();
    state.recording = "r000007";
    state.low = "0000ff";
    state.high = "ffff00";
    state.brush = { t0: 120, t1: 980 };
    state.layers.gazeplot = false;
    state.cluster = { mode: "sweep", kMin: 2, kMax: 8 };
    expect(parseState(serializeState(state))).toEqual(state);
  });

  it("round-trips a fixed-k overlay", () => {
    const state = defaultState();
    state.recording = "r000001";
    state.cluster = { mode: "k", k: 4 };
    expect(parseState(serializeState(state))).toEqual(state);
  });

  it("ignores invalid gradient values in the URL", () => {
    const state = parseState("low=nothex&high=ff0000");
    expect(state.low).toBe("00ff00");
    expect(state.high).toBe("ff0000");
  });

  it("normalizes inverted windows from the URL", () => {
    expect(parseState("w=900,100").brush).toEqual({ t0: 100, t1: 900 });
  });

  it("parses with or without a leading hash", () => {
    expect(parseState("#r=abc").recording).toBe("abc");
    expect(parseState("r=abc").recording).toBe("abc");
  });
});
