/**
 * Round-trip against a live control service (the Python package must be
 * installed). Spawns the server once for all cases here.
 */

import assert from "node:assert/strict";
import { spawn, ChildProcess } from "node:child_process";
import { after, before, test } from "node:test";
import WebSocket from "ws";

import { SessionClient, SocketLike } from "../src/client.js";
import type { SnapshotMessage, StreamMessage } from "../src/protocol.js";
import { applySnapshot, emptyViewModel, markPending } from "../src/viewmodel.js";

// A random high port avoids collisions with orphaned servers from
// interrupted runs; SIGKILL on teardown guarantees the child dies.
const PORT = 8700 + (process.pid % 800);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

function client(): SessionClient {
  return new SessionClient(BASE, {
    socketFactory: (url) => new WebSocket(url) as unknown as SocketLike,
  });
}

async function waitForServer(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (server.exitCode !== null) {
      throw new Error(`service exited early with code ${server.exitCode}`);
    }
    try {
      const response = await fetch(`${BASE}/sessions/nosuch`);
      if (response.status === 404) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("service did not come up");
}

before(async () => {
  server = spawn("python3", ["-m", "plaguesim.cli", "serve", "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForServer();
});

after(() => {
  server.kill("SIGKILL");
});

function collectStream(c: SessionClient, session: string) {
  const messages: SnapshotMessage[] = [];
  const handle = c.connectStream(session, (m: StreamMessage) => {
    if (m.type === "snapshot") messages.push(m);
  });
  return { messages, handle };
}

async function until(predicate: () => boolean, timeoutMs = 10_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((r) => setTimeout(r, 25));
  }
  throw new Error("condition not met in time");
}

test("live session: global warning shows informed = living in the next snapshot", async () => {
  const c = client();
  const created = await c.createSession("gray-plague", 5);
  const session = created.session;
  let vm = applySnapshot(emptyViewModel(), created);
  const { messages, handle } = collectStream(c, session);
  await until(() => messages.length >= 1); // current snapshot first

  await c.step(session, 3);
  await until(() => messages.length >= 4);

  const warning = { kind: "warning" as const, audience: "global" as const, accuracy_hint: 1.0 };
  vm = markPending(vm, warning);
  await c.intervene(session, warning);
  await c.step(session, 1);
  await until(() => messages.some((m) => m.tick === 4));

  for (const m of messages) {
    vm = applySnapshot(vm, m);
  }
  const next = messages.find((m) => m.tick === 4)!;
  const totals = next.snapshot.totals;
  const living = totals.susceptible + totals.infected + totals.recovered;
  assert.equal(next.snapshot.awareness.informed, living);
  // the optimistic marker is confirmed with its application tick
  const marker = vm.pending.find((p) => p.intervention.kind === "warning")!;
  assert.equal(marker.status, "applied");
  assert.equal(marker.appliedTick, 4);
  handle.close();
});

test("live session: disconnecting the console leaves the run untouched", async () => {
  const c = client();
  const watched = (await c.createSession("gray-plague", 9)).session;
  const paired = (await c.createSession("gray-plague", 9)).session;

  // Drive the watched session with a console attached, then drop it mid-run.
  const { messages, handle } = collectStream(c, watched);
  await until(() => messages.length >= 1); // console attached and receiving
  await c.step(watched, 6);
  await until(() => messages.some((m) => m.tick === 6));
  handle.close(); // console disconnects mid-run
  await c.step(watched, 36);

  // The paired session runs headless with the same commands.
  await c.step(paired, 6);
  await c.step(paired, 36);

  const logA = await c.eventLog(watched);
  const logB = await c.eventLog(paired);
  assert.ok(logA.length > 1000);
  assert.equal(logA, logB);
});
