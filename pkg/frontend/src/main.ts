// Cockpit wiring: one socket, one state buffer, a render loop decoupled
// from message handling. Server address comes from ?server=... or the
// form field.

import { SessionClient } from "./client";
import { DriveController } from "./controls";
import { buildCharts, buildMapScene, buildSensorStrip } from "./scene";
import { paintChart, paintMap, paintStrip } from "./render";

const CELL_PX = 4;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function ctx2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  return ctx;
}

const client = new SessionClient();
let drive: DriveController | null = null;
let dirty = true;
client.onChange = () => {
  dirty = true;
  const hello = client.state.hello;
  if (hello && drive === null) {
    drive = new DriveController(
      (msg) => client.send(msg),
      hello.v_max,
      hello.omega_max
    );
    drive.start();
  }
  if (drive) drive.enabled = client.state.connected;
  banner.textContent = client.state.connected
    ? client.state.done
      ? `session finished at t=${client.state.done.t.toFixed(1)} s`
      : `connected: ${hello ? hello.world : "..."}`
    : "disconnected: controls disabled";
  banner.className = client.state.connected ? "ok" : "down";
};

const banner = el<HTMLDivElement>("banner");
const mapCanvas = el<HTMLCanvasElement>("map");
const stripCanvas = el<HTMLCanvasElement>("strip");
const chartsDiv = el<HTMLDivElement>("charts");
const confToggle = el<HTMLInputElement>("show-confidence");
const addressInput = el<HTMLInputElement>("server-address");
const chartCanvases = new Map<string, HTMLCanvasElement>();

function chartCanvas(name: string): HTMLCanvasElement {
  let canvas = chartCanvases.get(name);
  if (!canvas) {
    canvas = document.createElement("canvas");
    canvas.width = 320;
    canvas.height = 120;
    chartsDiv.appendChild(canvas);
    chartCanvases.set(name, canvas);
  }
  return canvas;
}

function render(): void {
  if (dirty && client.state.hello) {
    dirty = false;
    const show = confToggle.checked;
    paintMap(ctx2d(mapCanvas), buildMapScene(client.state), CELL_PX, show);
    paintStrip(ctx2d(stripCanvas), buildSensorStrip(client.state), show);
    for (const chart of buildCharts(client.state)) {
      paintChart(ctx2d(chartCanvas(chart.name)), chart);
    }
  }
  requestAnimationFrame(render);
}

window.addEventListener("keydown", (ev) => {
  if (drive && !ev.repeat) drive.keydown(ev.code);
});
window.addEventListener("keyup", (ev) => {
  if (drive) drive.keyup(ev.code);
});
confToggle.addEventListener("change", () => {
  dirty = true;
});

mapCanvas.addEventListener("click", (ev) => {
  const hello = client.state.hello;
  if (!hello || !drive) return;
  const rect = mapCanvas.getBoundingClientRect();
  const col = (ev.clientX - rect.left) / CELL_PX;
  const rowFromTop = (ev.clientY - rect.top) / CELL_PX;
  const x = col * hello.resolution;
  const y = (hello.height - rowFromTop) * hello.resolution;
  drive.clickGoal(x, y);
});

el<HTMLButtonElement>("connect").addEventListener("click", () => {
  client.connect(addressInput.value);
});
el<HTMLButtonElement>("reset").addEventListener("click", () => {
  client.reset();
});

const params = new URLSearchParams(window.location.search);
addressInput.value = params.get("server") ?? "ws://127.0.0.1:8765/ws";
if (params.get("server")) client.connect(addressInput.value);
requestAnimationFrame(render);
