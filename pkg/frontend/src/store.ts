// Session view-state: a reducer fed solely by API payloads through a single
// dispatch queue. Rendering layers subscribe; they never compute rewards,
// rankings, or verdicts themselves.

import type {
  DiscrepancyReportPayload,
  LatestReadings,
  PhaseName,
  RecommendationPayload,
  StatePayload,
  StreamEvent,
} from "./types.js";

export const TREND_CAPACITY = 600;

export const TREND_KEYS = [
  "pfcl_dtd",
  "peak_clad_dtd",
  "core_power",
  "core_outlet_flow",
  "pump_torque_1",
  "pump_torque_2",
  "upper_plenum_temp",
  "hp_plenum_temp",
  "lp_plenum_temp",
] as const;

export type TrendKey = (typeof TREND_KEYS)[number];

export interface TrendPoint {
  t: number;
  value: number;
  /** first sample after a stream drop; charts draw a gap before it */
  resync: boolean;
}

export class TrendBuffer {
  private points: TrendPoint[] = [];

  push(point: TrendPoint): void {
    this.points.push(point);
    if (this.points.length > TREND_CAPACITY) {
      this.points.splice(0, this.points.length - TREND_CAPACITY);
    }
  }

  values(): readonly TrendPoint[] {
    return this.points;
  }

  get length(): number {
    return this.points.length;
  }

  last(): TrendPoint | undefined {
    return this.points[this.points.length - 1];
  }
}

export type ConnectionState = "connecting" | "live" | "reconnecting";

export interface SessionView {
  phase: PhaseName;
  simTime: number;
  connection: ConnectionState;
  trends: Record<TrendKey, TrendBuffer>;
  latestReport: DiscrepancyReportPayload | null;
  reports: DiscrepancyReportPayload[];
  alarm: boolean;
  recommendation: RecommendationPayload | null;
  canDecide: boolean;
  finished: boolean;
  scramReason: string | null;
  decisionRecorded: boolean;
}

export type Action =
  | { type: "stream_event"; event: StreamEvent }
  | { type: "state_snapshot"; payload: StatePayload }
  | { type: "recommendation"; payload: RecommendationPayload }
  | { type: "discrepancy"; reports: DiscrepancyReportPayload[] }
  | { type: "connection"; state: ConnectionState }
  | { type: "decision_recorded"; phase: PhaseName };

export type Listener = (view: SessionView) => void;

function emptyView(): SessionView {
  const trends = {} as Record<TrendKey, TrendBuffer>;
  for (const key of TREND_KEYS) trends[key] = new TrendBuffer();
  return {
    phase: "Monitoring",
    simTime: 0,
    connection: "connecting",
    trends,
    latestReport: null,
    reports: [],
    alarm: false,
    recommendation: null,
    canDecide: false,
    finished: false,
    scramReason: null,
    decisionRecorded: false,
  };
}

export class SessionStore {
  private view = emptyView();
  private listeners: Listener[] = [];
  private queue: Action[] = [];
  private draining = false;
  private pendingResyncMark = false;

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  current(): SessionView {
    return this.view;
  }

  /** All updates funnel through here; actions apply strictly in order. */
  dispatch(action: Action): void {
    this.queue.push(action);
    if (this.draining) return;
    this.draining = true;
    while (this.queue.length > 0) {
      const next = this.queue.shift()!;
      this.reduce(next);
      for (const l of this.listeners) l(this.view);
    }
    this.draining = false;
  }

  private pushSample(time: number, readings: Partial<LatestReadings>): void {
    const resync = this.pendingResyncMark;
    this.pendingResyncMark = false;
    for (const key of TREND_KEYS) {
      const value = readings[key];
      if (typeof value === "number") {
        this.view.trends[key].push({ t: time, value, resync });
      }
    }
  }

  private applyReports(reports: DiscrepancyReportPayload[]): void {
    this.view.reports = reports;
    this.view.latestReport = reports[reports.length - 1] ?? null;
    const over = reports.some(
      (r) =>
        r.verdict === "Scram" || Math.max(r.zeta_power, r.zeta_pfcl) > r.limit,
    );
    if (over) this.view.alarm = true;
  }

  private setPhase(phase: PhaseName): void {
    this.view.phase = phase;
    this.view.canDecide =
      phase === "AwaitingDecision" && !this.view.decisionRecorded;
    if (phase === "Completed" || phase === "Scrammed") {
      this.view.finished = true;
    }
  }

  private reduce(action: Action): void {
    switch (action.type) {
      case "stream_event": {
        const ev = action.event;
        if (ev.kind === "state") {
          const { phase, ...readings } = ev.data;
          this.setPhase(phase);
          const t = (readings as LatestReadings).time ?? this.view.simTime + 1;
          this.view.simTime = t;
          this.pushSample(t, readings as LatestReadings);
        } else if (ev.kind === "phase") {
          this.setPhase(ev.data.phase);
          this.view.simTime = ev.data.sim_time;
        } else {
          this.setPhase(ev.data.phase);
        }
        break;
      }
      case "state_snapshot": {
        const s = action.payload;
        this.setPhase(s.phase);
        this.view.simTime = s.sim_time;
        if (s.alarm) this.view.alarm = true;
        this.view.scramReason = s.scram_reason;
        if (s.finished) this.view.finished = true;
        this.pushSample(s.latest.time ?? s.sim_time, s.latest);
        break;
      }
      case "recommendation":
        this.view.recommendation = action.payload;
        break;
      case "discrepancy":
        this.applyReports(action.reports);
        break;
      case "connection":
        this.view.connection = action.state;
        if (action.state === "reconnecting") {
          // next accepted sample carries the gap marker
          this.pendingResyncMark = true;
        }
        break;
      case "decision_recorded":
        this.view.decisionRecorded = true;
        // The stream is the phase authority; the outcome's phase only moves
        // the view forward out of the decision pause, never backwards.
        if (
          this.view.phase === "AwaitingDecision" ||
          this.view.phase === "PausedForRecommendation"
        ) {
          this.setPhase(action.phase);
        } else {
          this.view.canDecide = false;
        }
        break;
    }
  }
}
