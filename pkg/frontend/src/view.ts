// Pure view-model builders: server payloads in, render-ready rows out.
// The order of the ranked table always matches the server ranking.

import type {
  DiscrepancyReportPayload,
  RecommendationPayload,
} from "./types.js";

export interface RankedRow {
  candidateIndex: number;
  tau2End: string;
  tTrip: string;
  total: string;
  pfcl: string;
  power: string;
  torque: string;
  highlighted: boolean;
}

export function rankedTableRows(rec: RecommendationPayload): RankedRow[] {
  return rec.ranked.map((c) => ({
    candidateIndex: c.candidate_index,
    tau2End: c.tau2_end.toFixed(2),
    tTrip: c.t_trip.toFixed(1),
    total: c.total_reward.toFixed(1),
    pfcl: c.pfcl_reward.toFixed(1),
    power: c.power_reward.toFixed(1),
    torque: c.torque_reward.toFixed(1),
    highlighted: c.candidate_index === rec.chosen_index,
  }));
}

export interface ContourModel {
  x: number[]; // t_trip axis
  y: number[]; // tau2_end axis
  z: (number | null)[][];
  zMin: number;
  zMax: number;
}

export function contourModel(rec: RecommendationPayload): ContourModel {
  const g = rec.reward_grid;
  let zMin = Infinity;
  let zMax = -Infinity;
  for (const row of g.totals) {
    for (const v of row) {
      if (v === null) continue;
      zMin = Math.min(zMin, v);
      zMax = Math.max(zMax, v);
    }
  }
  return { x: g.t_trip_values, y: g.tau2_values, z: g.totals, zMin, zMax };
}

export interface OverlayModel {
  times: number[];
  pfcl: number[];
  limit: number;
  exceedsLimit: boolean;
}

export function predictionOverlay(
  rec: RecommendationPayload,
  candidateIndex: number,
): OverlayModel | null {
  const series = rec.predictions[String(candidateIndex)];
  if (!series) return null;
  const limit = rec.pfcl_limit;
  return {
    times: series.times,
    pfcl: series.pfcl_temp,
    limit,
    exceedsLimit: series.pfcl_temp.some((v) => v > limit),
  };
}

export interface ReportRow {
  tCk: string;
  zetaPower: string;
  zetaPfcl: string;
  verdict: string;
  overLimit: boolean;
}

export function reportRows(reports: DiscrepancyReportPayload[]): ReportRow[] {
  return reports.map((r) => ({
    tCk: `${r.t_ck}`,
    zetaPower: `${(100 * r.zeta_power).toFixed(2)}%`,
    zetaPfcl: `${(100 * r.zeta_pfcl).toFixed(2)}%`,
    verdict: r.verdict,
    overLimit: Math.max(r.zeta_power, r.zeta_pfcl) > r.limit,
  }));
}

export function formatSimClock(simTime: number, paused: boolean): string {
  const mm = Math.floor(simTime / 60);
  const ss = Math.floor(simTime % 60);
  const clock = `${String(mm).padStart(2, "0")}:${String(ss).padStart(2, "0")}`;
  return paused ? `${clock} (sim frozen)` : clock;
}
