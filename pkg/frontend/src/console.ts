// Session client: stream subscription with reconnect/resync, recommendation
// retrieval, and guarded decision submission with an idempotency key.

import { SessionStore } from "./store.js";
import { isHttpError, type StreamHandle, type Transport } from "./transport.js";
import type {
  DecisionAction,
  DecisionOutcome,
  RecommendationPayload,
} from "./types.js";

export interface DecisionIntent {
  action: DecisionAction;
  candidateIndex?: number | null;
  /** scram must be confirmed by the operator dialog before submission */
  confirmed?: boolean;
}

export interface ConsoleOptions {
  /** backoff schedule in ms between reconnect attempts */
  backoffMs?: number[];
  sleep?: (ms: number) => Promise<void>;
  makeRequestId?: () => string;
}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

let requestCounter = 0;

export class SessionConsole {
  readonly store = new SessionStore();
  private stream: StreamHandle | null = null;
  private eventCursor = 0;
  private backoff: number[];
  private sleep: (ms: number) => Promise<void>;
  private makeRequestId: () => string;
  private inflight: Promise<DecisionOutcome> | null = null;
  private requestId: string | null = null;
  private closed = false;

  constructor(
    private transport: Transport,
    private sessionId: string,
    options: ConsoleOptions = {},
  ) {
    this.backoff = options.backoffMs ?? [250, 500, 1000, 2000, 5000];
    this.sleep = options.sleep ?? defaultSleep;
    this.makeRequestId =
      options.makeRequestId ?? (() => `req-${Date.now()}-${requestCounter++}`);
  }

  /** Subscribe to the event stream and resync from the state endpoint. */
  async connect(): Promise<void> {
    await this.resync();
    this.openStream();
  }

  close(): void {
    this.closed = true;
    this.stream?.close();
  }

  private openStream(): void {
    this.stream?.close();
    this.stream = this.transport.openStream(
      this.sessionId,
      this.eventCursor,
      (ev) => {
        this.eventCursor += 1;
        this.store.dispatch({ type: "stream_event", event: ev });
        if (ev.kind === "phase" && ev.data.phase === "AwaitingDecision") {
          void this.refreshRecommendation();
        }
        if (ev.kind === "phase" && ev.data.phase === "Checking") {
          void this.refreshDiscrepancy();
        }
        if (ev.kind === "end") {
          void this.refreshDiscrepancy();
          this.stream?.close();
        }
      },
      () => void this.handleDrop(),
    );
    this.store.dispatch({ type: "connection", state: "live" });
  }

  private async handleDrop(): Promise<void> {
    if (this.closed || this.store.current().finished) return;
    this.store.dispatch({ type: "connection", state: "reconnecting" });
    for (const delay of this.backoff) {
      await this.sleep(delay);
      if (this.closed) return;
      try {
        await this.resync();
        this.openStream();
        return;
      } catch {
        // keep backing off
      }
    }
    // final attempt failed; surface the banner state and stop
  }

  /** Pull the authoritative snapshot; marks the next trend sample as resync. */
  async resync(): Promise<void> {
    const state = await this.transport.getState(this.sessionId);
    this.store.dispatch({ type: "state_snapshot", payload: state });
    if (
      state.phase === "AwaitingDecision" ||
      state.phase === "Executing" ||
      state.finished
    ) {
      await this.refreshRecommendation().catch(() => undefined);
    }
    await this.refreshDiscrepancy().catch(() => undefined);
  }

  async refreshRecommendation(): Promise<RecommendationPayload | null> {
    try {
      const rec = await this.transport.getRecommendation(this.sessionId);
      this.store.dispatch({ type: "recommendation", payload: rec });
      return rec;
    } catch (e) {
      if (isHttpError(e) && e.status === 404) return null;
      throw e;
    }
  }

  async refreshDiscrepancy(): Promise<void> {
    const d = await this.transport.getDiscrepancy(this.sessionId);
    this.store.dispatch({ type: "discrepancy", reports: d.reports });
  }

  /**
   * Submit an operator decision. Duplicate calls while one is in flight (a
   * double click) coalesce onto the same request; a 409 conflict triggers a
   * resync instead of a blind retry; network failures retry with the same
   * idempotency key.
   */
  async submitDecision(intent: DecisionIntent): Promise<DecisionOutcome> {
    const view = this.store.current();
    if (!view.canDecide && !view.decisionRecorded) {
      throw new Error(`decision controls are disabled in phase ${view.phase}`);
    }
    if (intent.action === "scram" && !intent.confirmed) {
      throw new Error("scram requires operator confirmation");
    }
    if (this.inflight) return this.inflight;
    this.requestId = this.requestId ?? this.makeRequestId();
    this.inflight = this.postWithRetry(intent);
    try {
      return await this.inflight;
    } finally {
      this.inflight = null;
    }
  }

  private async postWithRetry(intent: DecisionIntent): Promise<DecisionOutcome> {
    const body = {
      action: intent.action,
      candidate_index: intent.candidateIndex ?? null,
      request_id: this.requestId!,
    };
    let lastError: unknown = null;
    for (let attempt = 0; attempt < 3; attempt++) {
      try {
        const outcome = await this.transport.postDecision(this.sessionId, body);
        this.store.dispatch({
          type: "decision_recorded",
          phase: outcome.phase,
        });
        return outcome;
      } catch (e) {
        lastError = e;
        if (isHttpError(e) && e.status === 409) {
          await this.resync();
          throw e;
        }
        if (isHttpError(e)) throw e; // 400/404: not retryable
        await this.sleep(100); // network hiccup: same request id again
      }
    }
    throw lastError;
  }
}
