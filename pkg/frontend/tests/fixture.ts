// Loader for the recorded wire-protocol session used across the tests.
// The fixture was captured from a real lockstep session: hello, sync
// frame, 85 driven frames, finishing frame and done, plus the CSV the
// server persisted for the same run.

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import {
  DoneMessage,
  FrameMessage,
  HelloMessage,
  ServerMessage,
} from "../src/protocol";

interface Fixture {
  messages: ServerMessage[];
  csv: string;
}

const path = fileURLToPath(new URL("./fixtures/session.json", import.meta.url));
const fixture: Fixture = JSON.parse(readFileSync(path, "utf-8"));

export const messages = fixture.messages;
export const csvText = fixture.csv;
export const hello = messages[0] as HelloMessage;
export const frames = messages.filter(
  (m): m is FrameMessage => m.type === "frame"
);
export const done = messages[messages.length - 1] as DoneMessage;

export interface CsvRow {
  t: number;
  metric: string;
  value: number;
}

export function csvRows(): CsvRow[] {
  const [header, ...lines] = csvText.trim().split("\n");
  if (header !== "t,metric,value") throw new Error("unexpected csv header");
  return lines.map((line) => {
    const [t, metric, value] = line.split(",");
    return { t: Number(t), metric, value: Number(value) };
  });
}
