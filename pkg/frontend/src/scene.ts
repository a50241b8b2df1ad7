// Pure scene builders: turn client state into paintable primitives.
// The canvas painters in render.ts consume these; tests assert on them
// directly so rendering logic stays verifiable without a DOM.

import { categoryColor } from "./colors";
import {
  CELL_FREE,
  CELL_OCCUPIED,
  CELL_UNKNOWN,
  NEVER_REPORTED,
} from "./protocol";
import { ClientSessionState, MetricSeries } from "./state";

export const CELL_COLORS: Record<number, string> = {
  [NEVER_REPORTED]: "#10131a", // never reported: darkest
  [CELL_UNKNOWN]: "#1c2230",
  [CELL_FREE]: "#cfd8dc",
  [CELL_OCCUPIED]: "#263238",
};

export interface ObjectBox {
  cx: number; // cell coordinates, fractional
  cy: number;
  w: number; // cells
  h: number;
  label: string;
  color: string;
  confidence: number;
}

export interface MapScene {
  width: number;
  height: number;
  cells: Uint8Array;
  robot: { cx: number; cy: number; theta: number } | null;
  boxes: ObjectBox[];
}

export function buildMapScene(state: ClientSessionState): MapScene {
  const hello = state.hello;
  if (!hello) {
    return { width: 0, height: 0, cells: new Uint8Array(0), robot: null, boxes: [] };
  }
  const res = hello.resolution;
  const boxes = state.detections.map((d) => ({
    cx: d.centroid[0] / res,
    cy: d.centroid[1] / res,
    w: d.bbox[0] / res,
    h: d.bbox[1] / res,
    label: d.label,
    color: categoryColor(d.label, hello.taxonomy),
    confidence: d.confidence,
  }));
  return {
    width: hello.width,
    height: hello.height,
    cells: state.raster,
    robot: {
      cx: state.pose[0] / res,
      cy: state.pose[1] / res,
      theta: state.pose[2],
    },
    boxes,
  };
}

export interface StripLabel {
  text: string;
  column: number;
  confidence: number;
}

export interface SensorStrip {
  columns: number[]; // one height per beam in [0,1], left = bearing +fov/2
  labels: StripLabel[];
}

const LIDAR_FOV = 2 * Math.PI; // beams are heading-centered across this fan

function wrapAngle(a: number): number {
  while (a > Math.PI) a -= 2 * Math.PI;
  while (a < -Math.PI) a += 2 * Math.PI;
  return a;
}

// beam k points at relative bearing fov*(k/(n-1) - 1/2); the strip draws
// left-to-right from +fov/2 down to -fov/2 so forward sits center
export function buildSensorStrip(state: ClientSessionState): SensorStrip {
  const ranges = state.lidar;
  const n = ranges.length;
  if (n === 0) return { columns: [], labels: [] };
  const maxRange = Math.max(...ranges);
  const columns = new Array<number>(n);
  for (let c = 0; c < n; c++) {
    const r = ranges[n - 1 - c];
    columns[c] = maxRange > 0 ? Math.max(0, 1 - r / maxRange) : 0;
  }
  const [px, py, theta] = state.pose;
  const labels = state.detections.map((d) => {
    const bearing = wrapAngle(
      Math.atan2(d.centroid[1] - py, d.centroid[0] - px) - theta
    );
    const frac = 0.5 - bearing / LIDAR_FOV;
    return {
      text: d.label,
      column: Math.round(frac * (n - 1)),
      confidence: d.confidence,
    };
  });
  return { columns, labels };
}

export interface Chart {
  name: string;
  t: number[];
  v: number[];
  final: number | null;
}

export function buildCharts(state: ClientSessionState): Chart[] {
  const names = state.hello ? state.hello.metrics : [];
  return names.map((name) => {
    const series: MetricSeries = state.series.get(name) ?? { t: [], v: [] };
    return {
      name,
      t: series.t.slice(),
      v: series.v.slice(),
      final: state.done ? state.done.finals[name] ?? null : null,
    };
  });
}
