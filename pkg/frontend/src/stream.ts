/** WebSocket session stream: binary frames + JSON control channel.
 *
 * Incoming traffic lands in a queue drained once per animation frame;
 * binary frames never block rendering (only the latest pending frame is
 * kept). Connection loss triggers reconnects with exponential backoff;
 * frame number gaps are tolerated by design. */

import { decodeFrame, PositionFrame } from "./frames";

export interface Drained {
  frame: PositionFrame | null;
  messages: any[];
}

export type WebSocketFactory = (url: string) => WebSocket;

const BACKOFF_BASE_MS = 500;
const BACKOFF_MAX_MS = 8000;

export function backoffDelay(attempt: number): number {
  return Math.min(BACKOFF_MAX_MS, BACKOFF_BASE_MS * 2 ** attempt);
}

export class SessionStream {
  private ws: WebSocket | null = null;
  private latestFrame: PositionFrame | null = null;
  private messages: any[] = [];
  private closed = false;
  private attempts = 0;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  public state: "connecting" | "open" | "retrying" | "closed" = "connecting";

  constructor(
    private url: string,
    private onStateChange: (state: string) => void = () => {},
    private factory: WebSocketFactory = (u) => new WebSocket(u),
  ) {}

  connect(): void {
    if (this.closed) return;
    this.state = "connecting";
    this.onStateChange(this.state);
    const ws = this.factory(this.url);
    ws.binaryType = "arraybuffer";
    ws.onopen = () => {
      this.attempts = 0;
      this.state = "open";
      this.onStateChange(this.state);
    };
    ws.onmessage = (ev: MessageEvent) => {
      if (typeof ev.data === "string") {
        this.messages.push(JSON.parse(ev.data));
      } else {
        this.latestFrame = decodeFrame(ev.data as ArrayBuffer);
      }
    };
    ws.onclose = () => {
      this.ws = null;
      if (this.closed) return;
      this.state = "retrying";
      this.onStateChange(this.state);
      const delay = backoffDelay(this.attempts++);
      this.reconnectTimer = setTimeout(() => this.connect(), delay);
    };
    ws.onerror = () => {
      try {
        ws.close();
      } catch {
        /* already closing */
      }
    };
    this.ws = ws;
  }

  /** Latest pending frame plus all queued JSON messages. */
  drain(): Drained {
    const out = { frame: this.latestFrame, messages: this.messages };
    this.latestFrame = null;
    this.messages = [];
    return out;
  }

  send(msg: object): boolean {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    this.state = "closed";
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    if (this.ws) this.ws.close();
    this.onStateChange(this.state);
  }
}
