import { describe, expect, it } from "vitest";
import { SessionStore, TREND_CAPACITY } from "../src/store.js";
import type { DiscrepancyReportPayload, StreamEvent } from "../src/types.js";

function stateEvent(t: number, pfcl = 605.8): StreamEvent {
  return {
    kind: "state",
    data: {
      phase: "Monitoring",
      time: t,
      pfcl_dtd: pfcl,
      peak_clad_dtd: 487.9,
      core_power: 6.0e7,
      core_outlet_flow: 469.8,
      pump_torque_1: 636.57,
      pump_torque_2: 636.57,
      upper_plenum_temp: 443.1,
      hp_plenum_temp: 344.4,
      lp_plenum_temp: 344.4,
      ihx_power: 6.0e7,
    },
  };
}

function report(zetaPfcl: number, verdict: "Continue" | "Scram" = "Continue"):
    DiscrepancyReportPayload {
  return {
    t_ck: 100,
    zeta_power: 0.01,
    zeta_pfcl: zetaPfcl,
    rmse_power: 1,
    rmse_pfcl: 1,
    limit: 0.1,
    verdict,
  };
}

describe("trend buffers", () => {
  it("append samples from state events", () => {
    const store = new SessionStore();
    store.dispatch({ type: "stream_event", event: stateEvent(0) });
    store.dispatch({ type: "stream_event", event: stateEvent(1, 606.1) });
    const trend = store.current().trends.pfcl_dtd;
    expect(trend.length).toBe(2);
    expect(trend.last()!.value).toBeCloseTo(606.1);
  });

  it("enforce the bounded ring of recent samples", () => {
    const store = new SessionStore();
    for (let t = 0; t < TREND_CAPACITY + 50; t++) {
      store.dispatch({ type: "stream_event", event: stateEvent(t) });
    }
    const trend = store.current().trends.core_power;
    expect(trend.length).toBe(TREND_CAPACITY);
    expect(trend.values()[0].t).toBe(50);
  });

  it("mark the first sample after a reconnect", () => {
    const store = new SessionStore();
    store.dispatch({ type: "stream_event", event: stateEvent(0) });
    store.dispatch({ type: "connection", state: "reconnecting" });
    store.dispatch({ type: "connection", state: "live" });
    store.dispatch({ type: "stream_event", event: stateEvent(5) });
    const pts = store.current().trends.pfcl_dtd.values();
    expect(pts[0].resync).toBe(false);
    expect(pts[1].resync).toBe(true);
  });
});

describe("alarms", () => {
  it("raises within the same dispatch when a factor exceeds the limit", () => {
    const store = new SessionStore();
    let alarmSeenDuringNotification = false;
    store.subscribe((view) => {
      if (view.latestReport && view.latestReport.zeta_pfcl > 0.1) {
        alarmSeenDuringNotification = view.alarm;
      }
    });
    store.dispatch({ type: "discrepancy", reports: [report(0.12)] });
    expect(alarmSeenDuringNotification).toBe(true);
    expect(store.current().alarm).toBe(true);
  });

  it("stays quiet for in-limit reports", () => {
    const store = new SessionStore();
    store.dispatch({ type: "discrepancy", reports: [report(0.05)] });
    expect(store.current().alarm).toBe(false);
  });

  it("raises on a scram verdict regardless of magnitude", () => {
    const store = new SessionStore();
    store.dispatch({ type: "discrepancy", reports: [report(0.01, "Scram")] });
    expect(store.current().alarm).toBe(true);
  });
});

describe("phase guards", () => {
  it("only AwaitingDecision enables decisions", () => {
    const store = new SessionStore();
    expect(store.current().canDecide).toBe(false);
    store.dispatch({
      type: "stream_event",
      event: { kind: "phase", data: { phase: "AwaitingDecision", sim_time: 20 } },
    });
    expect(store.current().canDecide).toBe(true);
    store.dispatch({ type: "decision_recorded", phase: "Executing" });
    expect(store.current().canDecide).toBe(false);
  });

  it("terminal phases mark the view finished", () => {
    const store = new SessionStore();
    store.dispatch({
      type: "stream_event",
      event: { kind: "end", data: { phase: "Scrammed" } },
    });
    expect(store.current().finished).toBe(true);
  });
});

describe("dispatch queue", () => {
  it("applies re-entrant dispatches strictly in order", () => {
    const store = new SessionStore();
    const seen: number[] = [];
    let fired = false;
    store.subscribe((view) => {
      seen.push(view.trends.pfcl_dtd.length);
      if (!fired) {
        fired = true;
        store.dispatch({ type: "stream_event", event: stateEvent(1) });
      }
    });
    store.dispatch({ type: "stream_event", event: stateEvent(0) });
    expect(seen).toEqual([1, 2]);
  });
});
