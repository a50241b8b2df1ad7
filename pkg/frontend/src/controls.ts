// Keyboard/mouse teleoperation: held arrow/WASD keys stream cmd_vel at
// 10 Hz, releasing everything sends a single zero command (the server's
// dead-man stop covers lost packets), map clicks send set_goal. All
// outbound traffic passes one rate limiter capped at 20 msg/s.

export type SendFn = (msg: object) => void;

const TICK_MS = 100; // 10 Hz command stream while driving
const MIN_GAP_MS = 50; // global outbound cap: 20 msg/s

const FORWARD = new Set(["ArrowUp", "KeyW"]);
const BACKWARD = new Set(["ArrowDown", "KeyS"]);
const LEFT = new Set(["ArrowLeft", "KeyA"]);
const RIGHT = new Set(["ArrowRight", "KeyD"]);

export class DriveController {
  private held = new Set<string>();
  private wasDriving = false;
  private lastSendMs = -Infinity;
  private timer: ReturnType<typeof setInterval> | null = null;
  enabled = true;

  constructor(
    private send: SendFn,
    private vMax: number,
    private omegaMax: number,
    private now: () => number = () => Date.now()
  ) {}

  start(): void {
    if (this.timer === null) {
      this.timer = setInterval(() => this.tick(), TICK_MS);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    this.held.clear();
    this.wasDriving = false;
  }

  keydown(code: string): void {
    if (FORWARD.has(code) || BACKWARD.has(code) || LEFT.has(code) || RIGHT.has(code)) {
      this.held.add(code);
    }
  }

  keyup(code: string): void {
    this.held.delete(code);
  }

  private command(): { v: number; omega: number } {
    let v = 0;
    let omega = 0;
    for (const code of this.held) {
      if (FORWARD.has(code)) v += this.vMax;
      if (BACKWARD.has(code)) v -= this.vMax;
      if (LEFT.has(code)) omega += this.omegaMax;
      if (RIGHT.has(code)) omega -= this.omegaMax;
    }
    return {
      v: Math.max(-this.vMax, Math.min(this.vMax, v)),
      omega: Math.max(-this.omegaMax, Math.min(this.omegaMax, omega)),
    };
  }

  tick(): void {
    if (!this.enabled) return;
    if (this.held.size > 0) {
      this.emit({ type: "cmd_vel", ...this.command() });
      this.wasDriving = true;
    } else if (this.wasDriving) {
      this.emit({ type: "cmd_vel", v: 0, omega: 0 });
      this.wasDriving = false;
    }
  }

  clickGoal(x: number, y: number): void {
    if (!this.enabled) return;
    this.emit({ type: "set_goal", x, y });
  }

  private emit(msg: object): void {
    const t = this.now();
    if (t - this.lastSendMs < MIN_GAP_MS) return;
    this.lastSendMs = t;
    this.send(msg);
  }
}
