// Wire protocol spoken by the benchmark's live session server.
// One full-duplex socket: the server pushes hello/frame/done, the client
// sends cmd_vel/set_goal/reset/start.

export interface Taxonomy {
  root: string;
  parent: Record<string, string>;
}

export interface HelloMessage {
  type: "hello";
  world: string;
  width: number;
  height: number;
  resolution: number;
  taxonomy: Taxonomy;
  metrics: string[];
  dt: number;
  policy: string;
  v_max: number;
  omega_max: number;
  epoch: number;
}

export interface Detection {
  object_id: number;
  label: string;
  category_chain: string[];
  centroid: [number, number];
  bbox: [number, number];
  confidence: number;
  num_points: number;
  timestamp: number;
}

export interface MetricSample {
  t: number;
  name: string;
  value: number;
}

// deltas are [start, length, value] runs over the row-major known grid
export type DeltaRun = [number, number, number];

export interface FrameMessage {
  type: "frame";
  t: number;
  epoch: number;
  pose: [number, number, number];
  deltas: DeltaRun[];
  lidar: number[];
  detections: Detection[];
  metrics: MetricSample[];
}

export interface DoneMessage {
  type: "done";
  t: number;
  report: string | null;
  finals: Record<string, number>;
}

export type ServerMessage = HelloMessage | FrameMessage | DoneMessage;

// known-grid cell values; 255 marks cells the server never reported
export const CELL_UNKNOWN = 0;
export const CELL_FREE = 1;
export const CELL_OCCUPIED = 2;
export const NEVER_REPORTED = 255;
