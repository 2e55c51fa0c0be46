import assert from "node:assert/strict";
import { test } from "node:test";

import { layoutZones, mulberry32 } from "../src/layout.js";

const ZONES = ["capital", "harbor", "meadow", "darkwood", "mountpass", "ruins", "swamp", "frontier"];
const EDGES = [
  { a: "capital", b: "meadow" },
  { a: "capital", b: "darkwood" },
  { a: "capital", b: "harbor" },
  { a: "harbor", b: "swamp" },
  { a: "harbor", b: "meadow" },
  { a: "meadow", b: "mountpass" },
  { a: "darkwood", b: "ruins" },
  { a: "mountpass", b: "ruins" },
  { a: "mountpass", b: "frontier" },
  { a: "swamp", b: "frontier" },
];

test("prng is deterministic", () => {
  const a = mulberry32(42);
  const b = mulberry32(42);
  for (let i = 0; i < 100; i++) {
    assert.equal(a(), b());
  }
});

test("layout is stable for the same seed", () => {
  const first = layoutZones(ZONES, EDGES, 7);
  const second = layoutZones(ZONES, EDGES, 7);
  assert.deepEqual(first, second);
});

test("layout changes with the seed but keeps all zones", () => {
  const a = layoutZones(ZONES, EDGES, 1);
  const b = layoutZones(ZONES, EDGES, 2);
  assert.deepEqual(Object.keys(a).sort(), [...ZONES].sort());
  assert.notDeepEqual(a, b);
});

test("positions stay inside the unit viewport", () => {
  const positions = layoutZones(ZONES, EDGES, 7);
  for (const p of Object.values(positions)) {
    assert.ok(p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1);
  }
});

test("zones do not collapse onto each other", () => {
  const positions = layoutZones(ZONES, EDGES, 7);
  const points = Object.values(positions);
  for (let i = 0; i < points.length; i++) {
    for (let j = i + 1; j < points.length; j++) {
      const d = Math.hypot(points[i].x - points[j].x, points[i].y - points[j].y);
      assert.ok(d > 0.02, `zones ${i} and ${j} overlap (d=${d})`);
    }
  }
});

test("degenerate worlds are centered", () => {
  assert.deepEqual(layoutZones(["only"], [], 3), { only: { x: 0.5, y: 0.5 } });
  assert.deepEqual(layoutZones([], [], 3), {});
});
