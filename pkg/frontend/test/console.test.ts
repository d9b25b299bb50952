// Console behavior against the recorded-fixture server: verbatim rendering,
// phase guards, idempotent decisions, reconnect handling, transcript parity.

import { describe, expect, it } from "vitest";
import { SessionConsole } from "../src/console.js";
import { rankedTableRows, predictionOverlay, contourModel } from "../src/view.js";
import { FixtureTransport, loadFixture, settle } from "./fixture_transport.js";
import { isHttpError } from "../src/transport.js";
import type { PhaseName } from "../src/types.js";

const noSleep = async () => undefined;

function makeConsole(transport: FixtureTransport): SessionConsole {
  return new SessionConsole(transport, "fixture", {
    sleep: noSleep,
    backoffMs: [1, 1, 1],
    makeRequestId: () => "test-request",
  });
}

describe("rendering server values verbatim", () => {
  it("ranked table preserves the server order exactly", async () => {
    const fx = loadFixture();
    const transport = new FixtureTransport();
    const console_ = makeConsole(transport);
    await console_.connect();
    await settle();
    const rec = console_.store.current().recommendation;
    expect(rec).not.toBeNull();
    const rows = rankedTableRows(rec!);
    expect(rows.map((r) => r.candidateIndex)).toEqual(
      fx.engine_transcript.ranked_order,
    );
    expect(rows[0].highlighted).toBe(true);
    expect(rows.filter((r) => r.highlighted)).toHaveLength(1);
    console_.close();
  });

  it("reward grid dimensions match the candidate grid", async () => {
    const fx = loadFixture();
    const model = contourModel(fx.recommendation);
    const nCells = model.z.flat().filter((v) => v !== null).length;
    expect(nCells).toBe(fx.recommendation.ranked.length);
    expect(model.y.length * model.x.length).toBeGreaterThanOrEqual(nCells);
  });

  it("prediction overlay exposes the safety limit", () => {
    const fx = loadFixture();
    const overlay = predictionOverlay(
      fx.recommendation,
      fx.recommendation.chosen_index,
    );
    expect(overlay).not.toBeNull();
    expect(overlay!.limit).toBe(685.0);
    expect(overlay!.times.length).toBe(overlay!.pfcl.length);
  });
});

describe("scripted full-session drive", () => {
  it("matches the engine transcript", async () => {
    const fx = loadFixture();
    const transport = new FixtureTransport();
    const console_ = makeConsole(transport);
    const phases: PhaseName[] = [];
    console_.store.subscribe((view) => {
      if (phases[phases.length - 1] !== view.phase) phases.push(view.phase);
    });
    await console_.connect();
    await settle();
    expect(console_.store.current().phase).toBe("AwaitingDecision");
    const outcome = await console_.submitDecision({ action: "accept" });
    expect(outcome.recorded.action).toBe("accept");
    await settle(60);
    const view = console_.store.current();
    expect(view.phase).toBe(fx.engine_transcript.final_phase);
    expect(view.finished).toBe(true);
    for (const phase of fx.engine_transcript.phase_sequence) {
      expect(phases).toContain(phase as PhaseName);
    }
    // discrepancy factors rendered verbatim from the server payload
    expect(view.reports.map((r) => r.zeta_pfcl)).toEqual(
      fx.engine_transcript.reports.map((r) => r.zeta_pfcl),
    );
    expect(view.alarm).toBe(false);
    console_.close();
  });
});

describe("decision guards and idempotency", () => {
  it("refuses decisions outside AwaitingDecision", async () => {
    const transport = new FixtureTransport();
    const console_ = makeConsole(transport);
    await expect(
      console_.submitDecision({ action: "accept" }),
    ).rejects.toThrow(/disabled in phase/);
    expect(transport.postLog).toHaveLength(0);
  });

  it("requires confirmation for scram", async () => {
    const transport = new FixtureTransport();
    const console_ = makeConsole(transport);
    await console_.connect();
    await settle();
    await expect(
      console_.submitDecision({ action: "scram" }),
    ).rejects.toThrow(/confirmation/);
    expect(transport.postLog).toHaveLength(0);
    console_.close();
  });

  it("coalesces a double click into one post", async () => {
    const transport = new FixtureTransport();
    const console_ = makeConsole(transport);
    await console_.connect();
    await settle();
    const [a, b] = await Promise.all([
      console_.submitDecision({ action: "accept" }),
      console_.submitDecision({ action: "accept" }),
    ]);
    expect(transport.postLog).toHaveLength(1);
    expect(a).toEqual(b);
    console_.close();
  });

  it("override carries the exact candidate parameters", async () => {
    const fx = loadFixture();
    const transport = new FixtureTransport();
    const console_ = makeConsole(transport);
    await console_.connect();
    await settle();
    const second = fx.recommendation.ranked[1];
    await console_.submitDecision({
      action: "override",
      candidateIndex: second.candidate_index,
    });
    expect(transport.postLog[0]).toMatchObject({
      action: "override",
      candidate_index: second.candidate_index,
      request_id: "test-request",
    });
    console_.close();
  });

  it("retries a network failure with the same idempotency key", async () => {
    const transport = new FixtureTransport({ failPostsBefore: 1 });
    const console_ = makeConsole(transport);
    await console_.connect();
    await settle();
    const outcome = await console_.submitDecision({ action: "accept" });
    expect(outcome.phase).toBeDefined();
    expect(transport.postLog).toHaveLength(1);
    expect(transport.postLog[0].request_id).toBe("test-request");
    console_.close();
  });

  it("resyncs on 409 instead of retrying blindly", async () => {
    const transport = new FixtureTransport({ conflictDecisions: true });
    const console_ = makeConsole(transport);
    await console_.connect();
    await settle();
    const statesBefore = transport.stateCalls.length;
    await expect(
      console_.submitDecision({ action: "accept" }),
    ).rejects.toSatisfy((e: unknown) => isHttpError(e) && e.status === 409);
    expect(transport.stateCalls.length).toBeGreaterThan(statesBefore);
    expect(transport.postLog).toHaveLength(0);
    console_.close();
  });
});

describe("stream resilience", () => {
  it("reconnects after a drop and marks the trend gap", async () => {
    const transport = new FixtureTransport({ dropAfter: 10 });
    const console_ = makeConsole(transport);
    await console_.connect();
    await settle(40);
    const view = console_.store.current();
    expect(view.phase).toBe("AwaitingDecision");
    const pts = view.trends.pfcl_dtd.values();
    expect(pts.some((p) => p.resync)).toBe(true);
    console_.close();
  });

  it("two consoles on one session render identical views", async () => {
    const t1 = new FixtureTransport();
    const t2 = new FixtureTransport();
    const c1 = makeConsole(t1);
    const c2 = makeConsole(t2);
    await c1.connect();
    await c2.connect();
    await settle();
    const v1 = c1.store.current();
    const v2 = c2.store.current();
    expect(v1.phase).toBe(v2.phase);
    expect(v1.trends.pfcl_dtd.length).toBe(v2.trends.pfcl_dtd.length);
    expect(v1.trends.pfcl_dtd.last()!.value).toBe(
      v2.trends.pfcl_dtd.last()!.value,
    );
    c1.close();
    c2.close();
  });
});

describe("alarm rendering", () => {
  it("raises within one notification when a report exceeds the limit", () => {
    const transport = new FixtureTransport();
    const console_ = makeConsole(transport);
    let seenOnNotify = false;
    console_.store.subscribe((view) => {
      if (view.latestReport) seenOnNotify = view.alarm;
    });
    console_.store.dispatch({
      type: "discrepancy",
      reports: [
        {
          t_ck: 100,
          zeta_power: 0.2,
          zeta_pfcl: 0.01,
          rmse_power: 1,
          rmse_pfcl: 1,
          limit: 0.1,
          verdict: "Scram",
        },
      ],
    });
    expect(seenOnNotify).toBe(true);
  });
});
