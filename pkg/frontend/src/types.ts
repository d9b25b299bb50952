// API payload types, schema version 1. The server owns these shapes; the
// console renders them verbatim and never recomputes rewards or verdicts.

export type PhaseName =
  | "Monitoring"
  | "PausedForRecommendation"
  | "AwaitingDecision"
  | "Executing"
  | "Checking"
  | "Completed"
  | "Scrammed";

export interface LatestReadings {
  core_power: number;
  pfcl_dtd: number;
  pfcl_true?: number;
  core_outlet_flow: number;
  pump_torque_1: number;
  pump_torque_2: number;
  upper_plenum_temp: number;
  hp_plenum_temp: number;
  lp_plenum_temp: number;
  peak_clad_dtd: number;
  ihx_power: number;
  time?: number;
}

export interface StatePayload {
  schema_version: number;
  phase: PhaseName;
  sim_time: number;
  scrammed: boolean;
  latest: LatestReadings;
  alarm: boolean;
  finished: boolean;
  error: string | null;
  scram_reason: string | null;
}

export interface RankedCandidate {
  candidate_index: number;
  tau2_end: number;
  t_trip: number;
  total_reward: number;
  pfcl_reward: number;
  power_reward: number;
  torque_reward: number;
}

export interface RewardGrid {
  tau2_values: number[];
  t_trip_values: number[];
  totals: (number | null)[][];
}

export interface PredictedSeries {
  times: number[];
  pfcl_temp: number[];
  core_power: number[];
}

export interface RecommendationPayload {
  schema_version: number;
  t_rcmd: number;
  ranked: RankedCandidate[];
  chosen_index: number;
  reward_grid: RewardGrid;
  pfcl_limit: number;
  predictions: Record<string, PredictedSeries>;
}

export interface DiscrepancyReportPayload {
  t_ck: number;
  zeta_power: number;
  zeta_pfcl: number;
  rmse_power: number;
  rmse_pfcl: number;
  limit: number;
  verdict: "Continue" | "Scram";
}

export interface DiscrepancyPayload {
  schema_version: number;
  reports: DiscrepancyReportPayload[];
}

export type StreamEvent =
  | { kind: "state"; data: { phase: PhaseName } & LatestReadings }
  | { kind: "phase"; data: { phase: PhaseName; sim_time: number } }
  | { kind: "end"; data: { phase: PhaseName } };

export type DecisionAction = "accept" | "override" | "scram";

export interface DecisionBody {
  action: DecisionAction;
  candidate_index?: number | null;
  request_id?: string;
}

export interface DecisionOutcome {
  schema_version: number;
  recorded: { action: DecisionAction; candidate_index: number | null };
  phase: PhaseName;
}
