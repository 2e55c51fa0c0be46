/** Browser entry point: wire the client, the fold, and the renderers. */

import { SessionClient, ServiceError, StreamHandle } from "./client.js";
import { LayoutEdge, layoutZones, Point } from "./layout.js";
import type { InterventionSpec, SnapshotMessage } from "./protocol.js";
import { drawCurves, drawHeatmap, renderPanels } from "./render.js";
import {
  applySnapshot,
  emptyViewModel,
  markPending,
  markRejected,
  markStale,
  validateInterventionForm,
  ViewModel,
} from "./viewmodel.js";

let vm: ViewModel = emptyViewModel();
let client: SessionClient | null = null;
let session: string | null = null;
let stream: StreamHandle | null = null;
let positions: Record<string, Point> = {};
let edges: LayoutEdge[] = [];

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function redraw(): void {
  drawHeatmap($("heatmap") as HTMLCanvasElement, vm, positions, edges);
  drawCurves($("curves") as HTMLCanvasElement, vm);
  renderPanels(document, vm);
}

function rebuildLayout(message: SnapshotMessage): void {
  const zoneIds = Object.keys(message.snapshot.zones);
  // Adjacency is not in the snapshot; approximate edges by chaining sorted
  // ids when unknown. The server world is available via scenario files for
  // richer deployments; the layout only needs stability, which the seed gives.
  if (edges.length === 0) {
    const sorted = [...zoneIds].sort();
    edges = sorted.slice(1).map((id, i) => ({ a: sorted[i], b: id }));
  }
  positions = layoutZones(zoneIds, edges, 7);
}

function attachStream(): void {
  if (!client || !session) return;
  stream?.close();
  stream = client.connectStream(
    session,
    (message) => {
      if (message.type === "snapshot") {
        if (Object.keys(positions).length === 0) rebuildLayout(message);
        vm = applySnapshot(vm, message);
        redraw();
      }
    },
    () => {
      vm = markStale(vm);
      redraw();
      // visible stale indicator stays until a reconnect succeeds
      setTimeout(() => attachStream(), 1000);
    },
  );
}

async function connect(): Promise<void> {
  const base = ($("base-url") as HTMLInputElement).value;
  client = new SessionClient(base);
  const scenario = ($("scenario") as HTMLInputElement).value || "gray-plague";
  const seedText = ($("seed") as HTMLInputElement).value;
  const existing = ($("session-id") as HTMLInputElement).value.trim();
  vm = emptyViewModel();
  positions = {};
  edges = [];
  if (existing) {
    session = existing;
  } else {
    const created = await client.createSession(scenario, seedText ? Number(seedText) : undefined);
    session = created.session;
    ($("session-id") as HTMLInputElement).value = session;
    vm = applySnapshot(vm, created);
    rebuildLayout(created);
  }
  attachStream();
  redraw();
}

function currentIntervention(): InterventionSpec {
  const kind = ($("iv-kind") as HTMLSelectElement).value;
  const zones = ($("iv-zones") as HTMLInputElement).value
    .split(",")
    .map((z) => z.trim())
    .filter(Boolean);
  const p = Number(($("iv-probability") as HTMLInputElement).value || "0.5");
  const efficacy = Number(($("iv-efficacy") as HTMLInputElement).value || "1");
  switch (kind) {
    case "warning":
      return { kind, audience: zones.length ? zones : "global", accuracy_hint: 1.0 };
    case "area_restriction":
      return { kind, zones };
    case "lift_restriction":
      return { kind, zones };
    case "cure_quest":
      return {
        kind,
        uptake_probability_per_tick: p,
        efficacy,
        grants_immunity: ($("iv-immunity") as HTMLInputElement).checked,
        requires_cure_sensitive_stage: false,
      };
    case "symptom_mask":
      return { kind, uptake_probability_per_tick: p };
    case "temporary_cure":
      return { kind, uptake_probability_per_tick: p, efficacy };
    default:
      return { kind: "hotfix", channel: ($("iv-channel") as HTMLInputElement).value, new_beta: p };
  }
}

async function issueIntervention(): Promise<void> {
  if (!client || !session) return;
  const intervention = currentIntervention();
  const problem = validateInterventionForm(intervention);
  const errorBox = $("iv-error");
  if (problem) {
    errorBox.textContent = problem; // blocked client-side
    return;
  }
  errorBox.textContent = "";
  vm = markPending(vm, intervention);
  redraw();
  try {
    await client.intervene(session, intervention);
  } catch (error) {
    const reason = error instanceof ServiceError ? error.detail : String(error);
    vm = markRejected(vm, intervention, reason);
    redraw();
  }
}

function wire(): void {
  $("connect").addEventListener("click", () => void connect());
  $("step").addEventListener("click", () => void (client && session && client.step(session, 1)));
  $("step5").addEventListener("click", () => void (client && session && client.step(session, 5)));
  $("play").addEventListener("click", () => void (client && session && client.play(session, 4)));
  $("pause").addEventListener("click", () => void (client && session && client.pause(session)));
  $("issue").addEventListener("click", () => void issueIntervention());
  $("warn-all").addEventListener("click", () => {
    if (!client || !session) return;
    const iv: InterventionSpec = { kind: "warning", audience: "global", accuracy_hint: 1.0 };
    vm = markPending(vm, iv);
    redraw();
    void client.intervene(session, iv).catch((error) => {
      vm = markRejected(vm, iv, error instanceof ServiceError ? error.detail : String(error));
      redraw();
    });
  });
}

window.addEventListener("DOMContentLoaded", wire);
