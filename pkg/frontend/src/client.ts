// Socket lifecycle around the session state: connect, dispatch inbound
// messages, flag disconnects so controls can disable themselves.

import { ServerMessage } from "./protocol";
import { ClientSessionState } from "./state";

export class SessionClient {
  state = new ClientSessionState();
  onChange: () => void = () => {};
  private ws: WebSocket | null = null;

  connect(url: string): void {
    this.disconnect();
    const ws = new WebSocket(url);
    this.ws = ws;
    ws.onopen = () => {
      this.state.connected = true;
      ws.send(JSON.stringify({ type: "start" }));
      this.onChange();
    };
    ws.onmessage = (ev: MessageEvent) => {
      try {
        const msg = JSON.parse(ev.data as string) as ServerMessage;
        this.state.apply(msg);
      } catch (err) {
        console.error("unreadable server message", err);
        return;
      }
      this.onChange();
    };
    ws.onclose = () => {
      if (this.ws === ws) {
        this.state.connected = false;
        this.onChange();
      }
    };
    ws.onerror = () => ws.close();
  }

  disconnect(): void {
    if (this.ws) {
      const ws = this.ws;
      this.ws = null;
      ws.close();
    }
    this.state.connected = false;
  }

  send(msg: object): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }

  reset(): void {
    this.send({ type: "reset" });
    this.send({ type: "start" });
  }
}
