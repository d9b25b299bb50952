// Server access behind a small interface so tests can replay recorded
// fixtures without a live backend.

import type {
  DecisionBody,
  DecisionOutcome,
  DiscrepancyPayload,
  RecommendationPayload,
  StatePayload,
  StreamEvent,
} from "./types.js";

export interface HttpError {
  status: number;
  detail: string;
}

export function isHttpError(e: unknown): e is HttpError {
  return typeof e === "object" && e !== null && "status" in e;
}

export type StreamHandler = (ev: StreamEvent) => void;

export interface StreamHandle {
  close(): void;
}

export interface Transport {
  getState(sessionId: string): Promise<StatePayload>;
  getRecommendation(sessionId: string): Promise<RecommendationPayload>;
  getDiscrepancy(sessionId: string): Promise<DiscrepancyPayload>;
  postDecision(sessionId: string, body: DecisionBody): Promise<DecisionOutcome>;
  openStream(
    sessionId: string,
    since: number,
    onEvent: StreamHandler,
    onDrop: () => void,
  ): StreamHandle;
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      detail = body.detail ?? detail;
    } catch {
      // keep statusText
    }
    throw { status: resp.status, detail } satisfies HttpError;
  }
  return (await resp.json()) as T;
}

export class HttpTransport implements Transport {
  constructor(private base: string) {
    this.base = base.replace(/\/$/, "");
  }

  getState(id: string): Promise<StatePayload> {
    return fetch(`${this.base}/sessions/${id}/state`).then((r) =>
      asJson<StatePayload>(r),
    );
  }

  getRecommendation(id: string): Promise<RecommendationPayload> {
    return fetch(`${this.base}/sessions/${id}/recommendation`).then((r) =>
      asJson<RecommendationPayload>(r),
    );
  }

  getDiscrepancy(id: string): Promise<DiscrepancyPayload> {
    return fetch(`${this.base}/sessions/${id}/discrepancy`).then((r) =>
      asJson<DiscrepancyPayload>(r),
    );
  }

  postDecision(id: string, body: DecisionBody): Promise<DecisionOutcome> {
    return fetch(`${this.base}/sessions/${id}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => asJson<DecisionOutcome>(r));
  }

  openStream(
    id: string,
    since: number,
    onEvent: StreamHandler,
    onDrop: () => void,
  ): StreamHandle {
    const es = new EventSource(
      `${this.base}/sessions/${id}/events?since=${since}`,
    );
    for (const kind of ["state", "phase", "end"] as const) {
      es.addEventListener(kind, (e: MessageEvent) => {
        try {
          onEvent({ kind, data: JSON.parse(e.data) } as StreamEvent);
        } catch {
          // malformed frame; resync will repair
        }
      });
    }
    es.onerror = () => onDrop();
    return { close: () => es.close() };
  }
}
