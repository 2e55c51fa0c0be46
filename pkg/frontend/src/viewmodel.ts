/**
 * Dashboard state as a pure fold over stream messages.
 *
 * The view model renders only what the server sent: epidemic curves, the
 * zone heatmap, the R0 panel, and the channel breakdown all come straight
 * from snapshot messages; the only local computation is display aggregation
 * (deltas between consecutive snapshots for the event feed).
 */

import type { InterventionSpec, SnapshotMessage } from "./protocol.js";

export interface ZoneView {
  id: string;
  susceptible: number;
  infected: number;
  recovered: number;
  dead: number;
  prevalence: number;
  restricted: boolean;
  isEpicenter: boolean;
}

export type FeedKind =
  | "warning"
  | "rumor"
  | "intervention"
  | "first-case"
  | "death"
  | "mutation"
  | "rejected";

export interface FeedEntry {
  tick: number;
  kind: FeedKind;
  text: string;
}

export interface PendingIntervention {
  localId: number;
  intervention: InterventionSpec;
  status: "pending" | "applied" | "rejected";
  appliedTick?: number;
  reason?: string;
}

export interface Curves {
  ticks: number[];
  susceptible: number[];
  infected: number[];
  recovered: number[];
  dead: number[];
}

export interface ViewModel {
  session: string | null;
  tick: number;
  mode: string;
  finished: boolean;
  stale: boolean;
  zones: ZoneView[];
  curves: Curves;
  r0: { firstGeneration: number | null; weighted: number | null };
  channelBreakdown: Array<{ channel: string; count: number }>;
  awareness: { unaware: number; rumor: number; informed: number };
  feed: FeedEntry[];
  pending: PendingIntervention[];
}

export function emptyViewModel(): ViewModel {
  return {
    session: null,
    tick: -1,
    mode: "paused",
    finished: false,
    stale: false,
    zones: [],
    curves: { ticks: [], susceptible: [], infected: [], recovered: [], dead: [] },
    r0: { firstGeneration: null, weighted: null },
    channelBreakdown: [],
    awareness: { unaware: 0, rumor: 0, informed: 0 },
    feed: [],
    pending: [],
  };
}

const FEED_LIMIT = 200;

function pushFeed(feed: FeedEntry[], entry: FeedEntry): FeedEntry[] {
  const next = [...feed, entry];
  return next.length > FEED_LIMIT ? next.slice(next.length - FEED_LIMIT) : next;
}

function sameIntervention(a: InterventionSpec, b: InterventionSpec): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

/** Fold one snapshot message into the model; pure, returns a new model. */
export function applySnapshot(vm: ViewModel, message: SnapshotMessage): ViewModel {
  const snap = message.snapshot;
  const zones: ZoneView[] = Object.entries(snap.zones)
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([id, counts]) => {
      const living = counts.susceptible + counts.infected + counts.recovered;
      return {
        id,
        susceptible: counts.susceptible,
        infected: counts.infected,
        recovered: counts.recovered,
        dead: counts.dead,
        prevalence: living > 0 ? counts.infected / living : 0,
        restricted: snap.restricted_zones.includes(id),
        isEpicenter: snap.epicenter === id,
      };
    });

  let feed = vm.feed;
  // Rumor surges: display aggregation of the awareness counter delta.
  const rumorDelta = snap.awareness.rumor - vm.awareness.rumor;
  if (vm.tick >= 0 && rumorDelta > 0) {
    feed = pushFeed(feed, {
      tick: message.tick,
      kind: "rumor",
      text: `rumors spreading: ${rumorDelta} avatars picked one up`,
    });
  }
  let pending = vm.pending;
  for (const applied of message.applied_interventions) {
    const kind = applied.intervention.kind;
    feed = pushFeed(feed, {
      tick: applied.tick,
      kind: kind === "warning" ? "warning" : "intervention",
      text:
        kind === "warning"
          ? `developer warning broadcast (${JSON.stringify(applied.intervention.audience ?? "global")})`
          : `${kind} applied`,
    });
    // Confirm the first matching optimistic marker.
    const index = pending.findIndex(
      (p) => p.status === "pending" && sameIntervention(p.intervention, applied.intervention),
    );
    if (index >= 0) {
      pending = pending.map((p, i) =>
        i === index ? { ...p, status: "applied", appliedTick: applied.tick } : p,
      );
    }
  }
  for (const event of message.notable_events) {
    const type = event["type"];
    if (type === "death") {
      feed = pushFeed(feed, { tick: message.tick, kind: "death", text: `avatar ${event["avatar"]} died in ${event["zone"]}` });
    } else if (type === "mutation") {
      feed = pushFeed(feed, { tick: message.tick, kind: "mutation", text: `the plague mutated: ${event["variant"]}` });
    } else if (type === "infect" && event["first_case_in_zone"]) {
      feed = pushFeed(feed, { tick: message.tick, kind: "first-case", text: `first case in ${event["zone"]}` });
    } else if (type === "intervention_rejected") {
      feed = pushFeed(feed, { tick: message.tick, kind: "rejected", text: `intervention rejected: ${JSON.stringify(event["errors"])}` });
    }
  }

  return {
    session: message.session,
    tick: message.tick,
    mode: message.mode,
    finished: message.finished,
    stale: false,
    zones,
    curves: {
      ticks: [...vm.curves.ticks, message.tick],
      susceptible: [...vm.curves.susceptible, snap.totals.susceptible],
      infected: [...vm.curves.infected, snap.totals.infected],
      recovered: [...vm.curves.recovered, snap.totals.recovered],
      dead: [...vm.curves.dead, snap.totals.dead],
    },
    r0: { firstGeneration: message.r0.first_generation, weighted: message.r0.weighted },
    channelBreakdown: Object.entries(snap.infections_by_channel)
      .sort(([a], [b]) => (a < b ? -1 : 1))
      .map(([channel, count]) => ({ channel, count })),
    awareness: { ...snap.awareness },
    feed,
    pending,
  };
}

let nextLocalId = 1;

/** Optimistic pending marker for an intervention just submitted. */
export function markPending(vm: ViewModel, intervention: InterventionSpec): ViewModel {
  return {
    ...vm,
    pending: [
      ...vm.pending,
      { localId: nextLocalId++, intervention, status: "pending" },
    ],
  };
}

/** Server rejected the submission: surface the reason, nothing applied. */
export function markRejected(vm: ViewModel, intervention: InterventionSpec, reason: string): ViewModel {
  const index = vm.pending.findIndex(
    (p) => p.status === "pending" && sameIntervention(p.intervention, intervention),
  );
  const pending =
    index >= 0
      ? vm.pending.map((p, i) => (i === index ? { ...p, status: "rejected" as const, reason } : p))
      : vm.pending;
  return {
    ...vm,
    pending,
    feed: pushFeed(vm.feed, { tick: vm.tick, kind: "rejected", text: `rejected: ${reason}` }),
  };
}

export function markStale(vm: ViewModel): ViewModel {
  return { ...vm, stale: true };
}

/** Client-side form validation; the server is still the authority. */
export function validateInterventionForm(intervention: InterventionSpec): string | null {
  if (intervention.kind === "area_restriction" || intervention.kind === "lift_restriction") {
    if (!intervention.zones || intervention.zones.length === 0) {
      return "zone set must not be empty";
    }
  }
  if (intervention.kind === "warning" && Array.isArray(intervention.audience) && intervention.audience.length === 0) {
    return "audience must be 'global' or a nonempty zone list";
  }
  if (intervention.kind === "hotfix" && (intervention.new_beta < 0 || intervention.new_beta > 1)) {
    return "new beta must lie in [0, 1]";
  }
  return null;
}
