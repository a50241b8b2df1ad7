// Canvas painters for the three views. All decisions about what to draw
// live in scene.ts; these functions only rasterize.

import { CELL_COLORS, Chart, MapScene, SensorStrip } from "./scene";

export function paintMap(
  ctx: CanvasRenderingContext2D,
  scene: MapScene,
  cellPx: number,
  showConfidence: boolean
): void {
  const { width, height } = scene;
  ctx.canvas.width = width * cellPx;
  ctx.canvas.height = height * cellPx;
  // world y grows upward; canvas y grows downward
  const toPx = (cx: number, cy: number): [number, number] => [
    cx * cellPx,
    (height - cy) * cellPx,
  ];
  for (let row = 0; row < height; row++) {
    for (let col = 0; col < width; col++) {
      ctx.fillStyle =
        CELL_COLORS[scene.cells[row * width + col]] ?? CELL_COLORS[255];
      ctx.fillRect(col * cellPx, (height - 1 - row) * cellPx, cellPx, cellPx);
    }
  }
  ctx.font = `${Math.max(10, 2 * cellPx)}px sans-serif`;
  ctx.textBaseline = "bottom";
  for (const box of scene.boxes) {
    const [x, y] = toPx(box.cx - box.w / 2, box.cy + box.h / 2);
    ctx.strokeStyle = box.color;
    ctx.lineWidth = 2;
    ctx.strokeRect(x, y, box.w * cellPx, box.h * cellPx);
    ctx.fillStyle = box.color;
    const text = showConfidence
      ? `${box.label} ${box.confidence.toFixed(2)}`
      : box.label;
    ctx.fillText(text, x, y - 2);
  }
  if (scene.robot) {
    const { cx, cy, theta } = scene.robot;
    const [x, y] = toPx(cx, cy);
    const r = Math.max(4, 3 * cellPx);
    ctx.fillStyle = "#ff5252";
    ctx.beginPath();
    ctx.moveTo(x + r * Math.cos(theta), y - r * Math.sin(theta));
    ctx.lineTo(
      x + r * 0.6 * Math.cos(theta + 2.5),
      y - r * 0.6 * Math.sin(theta + 2.5)
    );
    ctx.lineTo(
      x + r * 0.6 * Math.cos(theta - 2.5),
      y - r * 0.6 * Math.sin(theta - 2.5)
    );
    ctx.closePath();
    ctx.fill();
  }
}

export function paintStrip(
  ctx: CanvasRenderingContext2D,
  strip: SensorStrip,
  showConfidence: boolean
): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  ctx.fillStyle = "#10131a";
  ctx.fillRect(0, 0, w, h);
  const n = strip.columns.length;
  if (n === 0) return;
  const colW = w / n;
  ctx.fillStyle = "#90a4ae";
  for (let c = 0; c < n; c++) {
    const colH = Math.max(2, strip.columns[c] * h);
    ctx.fillRect(c * colW, h - colH, Math.ceil(colW), colH);
  }
  ctx.fillStyle = "#ffe082";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  for (const label of strip.labels) {
    const text = showConfidence
      ? `${label.text} ${label.confidence.toFixed(2)}`
      : label.text;
    ctx.fillText(text, (label.column + 0.5) * colW, 14);
  }
  ctx.textAlign = "left";
}

export function paintChart(ctx: CanvasRenderingContext2D, chart: Chart): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  const padL = 28;
  const padB = 16;
  ctx.fillStyle = "#171b24";
  ctx.fillRect(0, 0, w, h);
  ctx.strokeStyle = "#3a4252";
  ctx.strokeRect(padL, 4, w - padL - 4, h - padB - 4);
  ctx.fillStyle = "#aab4c4";
  ctx.font = "11px sans-serif";
  ctx.fillText(chart.name, padL + 4, 14);
  ctx.fillText("1", 8, 12);
  ctx.fillText("0", 8, h - padB);
  const tMax = chart.t.length > 0 ? Math.max(chart.t[chart.t.length - 1], 1) : 1;
  const toX = (t: number) => padL + (t / tMax) * (w - padL - 8);
  const toY = (v: number) => 4 + (1 - v) * (h - padB - 8);
  ctx.strokeStyle = "#4fc3f7";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  chart.t.forEach((t, i) => {
    const x = toX(t);
    const y = toY(chart.v[i]);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
  if (chart.final !== null) {
    ctx.fillStyle = "#ffe082";
    ctx.fillText(`final ${chart.final.toFixed(4)}`, w - 90, 14);
  }
}
