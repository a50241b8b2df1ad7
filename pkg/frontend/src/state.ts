// Client-side session state: everything the cockpit may render.
// The raster holds only cells the server has reported in frame deltas, so
// the groundtruth map is never reconstructable from client state.

import {
  Detection,
  DoneMessage,
  FrameMessage,
  HelloMessage,
  MetricSample,
  NEVER_REPORTED,
  ServerMessage,
} from "./protocol";

export interface MetricSeries {
  t: number[];
  v: number[];
}

export class ClientSessionState {
  hello: HelloMessage | null = null;
  raster = new Uint8Array(0);
  pose: [number, number, number] = [0, 0, 0];
  lidar: number[] = [];
  detections: Detection[] = [];
  series = new Map<string, MetricSeries>();
  epoch = 0;
  t = 0;
  done: DoneMessage | null = null;
  connected = false;

  apply(msg: ServerMessage): void {
    if (msg.type === "hello") {
      this.applyHello(msg);
    } else if (msg.type === "frame") {
      this.applyFrame(msg);
    } else if (msg.type === "done") {
      this.done = msg;
    }
  }

  private applyHello(msg: HelloMessage): void {
    const sameSession = this.hello !== null && msg.epoch === this.epoch;
    this.hello = msg;
    this.epoch = msg.epoch;
    // a fresh blank raster either way; on reconnect the server's first
    // frame replays every cell it has ever sent, restoring the view
    this.raster = new Uint8Array(msg.width * msg.height).fill(NEVER_REPORTED);
    this.detections = [];
    this.done = null;
    if (!sameSession) {
      this.series = new Map(msg.metrics.map((m) => [m, { t: [], v: [] }]));
      this.t = 0;
    }
  }

  private applyFrame(msg: FrameMessage): void {
    if (this.hello === null) return;
    if (msg.epoch !== this.epoch) {
      // server reset; the frame carries the full grid, start clean
      this.epoch = msg.epoch;
      this.raster.fill(NEVER_REPORTED);
      for (const name of this.series.keys()) {
        this.series.set(name, { t: [], v: [] });
      }
    }
    for (const [start, length, value] of msg.deltas) {
      this.raster.fill(value, start, start + length);
    }
    this.pose = msg.pose;
    this.lidar = msg.lidar;
    this.detections = msg.detections;
    this.t = msg.t;
    for (const sample of msg.metrics) {
      this.appendSample(sample);
    }
  }

  private appendSample(sample: MetricSample): void {
    const series = this.series.get(sample.name);
    if (!series) return;
    const last = series.t.length - 1;
    if (last >= 0 && sample.t <= series.t[last]) return; // duplicate echo
    series.t.push(sample.t);
    series.v.push(sample.value);
  }
}
