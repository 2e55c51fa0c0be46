/**
 * Protocol client for the control service.
 *
 * Pure I/O layer: HTTP for commands and queries, one WebSocket for the
 * snapshot stream. The fetch and WebSocket implementations are injected so
 * the same client runs in the browser and under node tests.
 */

import type {
  ControlAck,
  InterventionSpec,
  SessionStatus,
  SnapshotMessage,
  StreamMessage,
} from "./protocol.js";

export interface SocketLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event: unknown) => void) | null;
  onerror: ((event: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;
export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(public status: number, public detail: string) {
    super(`service error ${status}: ${detail}`);
  }
}

export interface StreamHandle {
  close(): void;
}

export class SessionClient {
  private fetchImpl: FetchLike;
  private socketFactory: SocketFactory;

  constructor(
    public baseUrl: string,
    options: { fetchImpl?: FetchLike; socketFactory?: SocketFactory } = {},
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = options.fetchImpl ?? ((url, init) => fetch(url, init));
    this.socketFactory =
      options.socketFactory ??
      ((url) => new WebSocket(url) as unknown as SocketLike);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        /* plain-text error body */
      }
      throw new ServiceError(response.status, String(detail));
    }
    return JSON.parse(text) as T;
  }

  createSession(scenario: string | object, seed?: number): Promise<SnapshotMessage & { session: string }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(seed === undefined ? { scenario } : { scenario, seed }),
    });
  }

  status(session: string): Promise<SessionStatus> {
    return this.request(`/sessions/${session}`);
  }

  control(session: string, body: object): Promise<ControlAck> {
    return this.request(`/sessions/${session}/control`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  step(session: string, ticks = 1): Promise<ControlAck> {
    return this.control(session, { command: "step", ticks });
  }

  play(session: string, ticksPerSecond = 2): Promise<ControlAck> {
    return this.control(session, { command: "play", ticks_per_second: ticksPerSecond });
  }

  pause(session: string): Promise<ControlAck> {
    return this.control(session, { command: "pause" });
  }

  intervene(session: string, intervention: InterventionSpec): Promise<ControlAck> {
    return this.control(session, { command: "intervene", intervention });
  }

  latestSnapshot(session: string): Promise<SnapshotMessage> {
    return this.request(`/sessions/${session}/snapshot`);
  }

  async eventLog(session: string): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${session}/events`);
    if (!response.ok) {
      throw new ServiceError(response.status, await response.text());
    }
    return response.text();
  }

  /** Open the snapshot stream; the server sends the current snapshot first. */
  connectStream(
    session: string,
    onMessage: (message: StreamMessage) => void,
    onClose?: () => void,
  ): StreamHandle {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const socket = this.socketFactory(`${wsBase}/sessions/${session}/stream`);
    socket.onmessage = (event) => {
      onMessage(JSON.parse(String(event.data)) as StreamMessage);
    };
    socket.onclose = () => onClose?.();
    socket.onerror = () => onClose?.();
    return { close: () => socket.close() };
  }
}
