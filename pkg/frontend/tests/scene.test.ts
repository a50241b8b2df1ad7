import { describe, expect, it } from "vitest";

import { categoryColor, PALETTE, topCategory } from "../src/colors";
import { FrameMessage, NEVER_REPORTED } from "../src/protocol";
import { buildCharts, buildMapScene, buildSensorStrip } from "../src/scene";
import { ClientSessionState } from "../src/state";
import { csvRows, done, frames, hello, messages } from "./fixture";

function playAll(): ClientSessionState {
  const state = new ClientSessionState();
  for (const msg of messages) state.apply(msg);
  return state;
}

// the recorded session drives past several objects; pick a frame that
// saw more than one category at once
function busiestFrame(): FrameMessage {
  let best = frames[0];
  for (const frame of frames) {
    if (frame.detections.length > best.detections.length) best = frame;
  }
  return best;
}

describe("map scene", () => {
  it("draws one box per detection, colored by top-level category", () => {
    const state = new ClientSessionState();
    state.apply(hello);
    const frame = busiestFrame();
    state.apply(frame);
    const scene = buildMapScene(state);
    expect(scene.boxes.length).toBe(frame.detections.length);
    expect(scene.boxes.length).toBeGreaterThanOrEqual(2);
    const colors = new Set(scene.boxes.map((b) => b.color));
    const categories = new Set(
      frame.detections.map((d) => topCategory(d.label, hello.taxonomy))
    );
    expect(colors.size).toBe(categories.size);
    expect(categories.size).toBeGreaterThanOrEqual(2);
    for (const box of scene.boxes) {
      expect(PALETTE).toContain(box.color);
    }
  });

  it("converts detection geometry from meters to cells", () => {
    const state = new ClientSessionState();
    state.apply(hello);
    const frame = busiestFrame();
    state.apply(frame);
    const scene = buildMapScene(state);
    const det = frame.detections[0];
    expect(scene.boxes[0].cx).toBeCloseTo(det.centroid[0] / hello.resolution, 9);
    expect(scene.boxes[0].w).toBeCloseTo(det.bbox[0] / hello.resolution, 9);
  });

  it("exposes exactly the reported raster, nothing else", () => {
    const state = playAll();
    const scene = buildMapScene(state);
    expect(scene.cells).toBe(state.raster);
    expect(scene.width * scene.height).toBe(scene.cells.length);
    let dark = 0;
    for (const cell of scene.cells) if (cell === NEVER_REPORTED) dark++;
    expect(dark).toBeGreaterThan(0); // unexplored corners stay dark
  });

  it("reports the same color for a category every time", () => {
    const a = categoryColor("plant", hello.taxonomy);
    const b = categoryColor("plant", hello.taxonomy);
    expect(a).toBe(b);
  });
});

describe("sensor strip", () => {
  const BEAMS = 180;

  function synthetic(ranges: number[], detections: FrameMessage["detections"]) {
    const state = new ClientSessionState();
    state.apply(hello);
    state.apply({
      type: "frame",
      t: 0.1,
      epoch: hello.epoch,
      pose: [0, 0, 0],
      deltas: [],
      lidar: ranges,
      detections,
      metrics: [],
    });
    return buildSensorStrip(state);
  }

  it("puts a dead-ahead detection in the center column", () => {
    const strip = synthetic(new Array(BEAMS).fill(4.0), [
      {
        object_id: 1,
        label: "plant",
        category_chain: ["plant"],
        centroid: [1.0, 0.0],
        bbox: [0.2, 0.2],
        confidence: 0.9,
        num_points: 10,
        timestamp: 0.1,
      },
    ]);
    expect(strip.labels.length).toBe(1);
    expect(strip.labels[0].column).toBe(Math.round(0.5 * (BEAMS - 1)));
  });

  it("raises columns where returns are close", () => {
    const ranges = new Array(BEAMS).fill(5.0);
    for (let k = 80; k < 100; k++) ranges[k] = 1.0;
    const strip = synthetic(ranges, []);
    expect(strip.columns.length).toBe(BEAMS);
    // beams 80..99 land in mirrored columns 80..99 for a centered fan
    for (let c = 0; c < BEAMS; c++) {
      if (c >= 80 && c < 100) {
        expect(strip.columns[c]).toBeCloseTo(0.8, 9);
      } else {
        expect(strip.columns[c]).toBe(0);
      }
    }
  });

  it("flattens when every beam reads the same", () => {
    const strip = synthetic(new Array(BEAMS).fill(2.5), []);
    for (const h of strip.columns) expect(h).toBe(0);
  });

  it("handles the recorded frames without leaving [0,1]", () => {
    const state = new ClientSessionState();
    state.apply(hello);
    for (const frame of frames) {
      state.apply(frame);
      const strip = buildSensorStrip(state);
      for (const h of strip.columns) {
        expect(h).toBeGreaterThanOrEqual(0);
        expect(h).toBeLessThanOrEqual(1);
      }
      for (const label of strip.labels) {
        expect(label.column).toBeGreaterThanOrEqual(0);
        expect(label.column).toBeLessThan(strip.columns.length);
      }
    }
  });
});

describe("charts", () => {
  it("builds one chart per advertised metric", () => {
    const state = playAll();
    const charts = buildCharts(state);
    expect(charts.map((c) => c.name)).toEqual(hello.metrics);
    for (const chart of charts) {
      expect(chart.t.length).toBe(chart.v.length);
      expect(chart.t.length).toBeGreaterThan(2);
    }
  });

  it("keeps the conveyed dominance: cori never exceeds ori", () => {
    const state = playAll();
    const charts = new Map(buildCharts(state).map((c) => [c.name, c]));
    const ori = charts.get("ori")!;
    const cori = charts.get("cori")!;
    expect(cori.t).toEqual(ori.t);
    for (let i = 0; i < ori.t.length; i++) {
      expect(cori.v[i]).toBeLessThanOrEqual(ori.v[i]);
    }
  });

  it("matches the session csv after done", () => {
    const state = playAll();
    const charts = new Map(buildCharts(state).map((c) => [c.name, c]));
    const rows = csvRows();
    expect(rows.length).toBeGreaterThan(0);
    for (const row of rows) {
      const chart = charts.get(row.metric)!;
      const i = chart.t.findIndex((t) => Math.abs(t - row.t) < 1e-9);
      expect(i).toBeGreaterThanOrEqual(0);
      expect(Math.abs(chart.v[i] - row.value)).toBeLessThan(5e-7);
    }
  });

  it("carries the final report values once done arrives", () => {
    const state = playAll();
    for (const chart of buildCharts(state)) {
      expect(chart.final).toBe(done.finals[chart.name]);
    }
  });
});
