/** Wire types for the control service. Mirrors docs/protocol.md. */

export interface ZoneCounts {
  susceptible: number;
  infected: number;
  recovered: number;
  dead: number;
  immune: number;
}

export interface SnapshotBody {
  tick: number;
  zones: Record<string, ZoneCounts>;
  totals: ZoneCounts;
  awareness: { unaware: number; rumor: number; informed: number };
  epicenter: string | null;
  infections_by_channel: Record<string, number>;
  restricted_zones: string[];
}

export interface AppliedIntervention {
  type: "intervention_applied";
  tick: number;
  intervention: InterventionSpec;
  detail: Record<string, unknown>;
}

export interface SnapshotMessage {
  type: "snapshot";
  session: string;
  tick: number;
  mode: string;
  finished: boolean;
  snapshot: SnapshotBody;
  r0: { first_generation: number | null; weighted: number | null };
  applied_interventions: AppliedIntervention[];
  notable_events: Array<Record<string, unknown>>;
}

export interface FinishedMessage {
  type: "finished";
  session: string;
  tick: number;
}

export type StreamMessage = SnapshotMessage | FinishedMessage;

export type InterventionSpec =
  | { kind: "warning"; audience: "global" | string[]; accuracy_hint?: number }
  | { kind: "area_restriction"; zones: string[] }
  | { kind: "lift_restriction"; zones: string[] }
  | {
      kind: "cure_quest";
      uptake_probability_per_tick: number;
      efficacy: number;
      grants_immunity: boolean;
      requires_cure_sensitive_stage: boolean;
    }
  | { kind: "symptom_mask"; uptake_probability_per_tick: number }
  | { kind: "temporary_cure"; uptake_probability_per_tick: number; efficacy: number }
  | { kind: "hotfix"; channel: string; new_beta: number };

export interface SessionStatus {
  session: string;
  scenario: string;
  tick: number;
  mode: string;
  finished: boolean;
  ticks_per_second: number;
}

export interface ControlAck {
  ok: boolean;
  command: string;
  ticks_done?: number;
  applies_at_tick?: number;
  tick?: number;
}
