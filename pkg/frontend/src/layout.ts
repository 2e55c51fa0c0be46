/**
 * Force-directed layout for the zone heatmap.
 *
 * The worlds are abstract graphs, not maps, so positions are synthesized:
 * spring forces along edges, inverse-square repulsion between all pairs,
 * seeded initial placement so the same world always lands the same way.
 */

export interface LayoutEdge {
  a: string;
  b: string;
}

export interface Point {
  x: number;
  y: number;
}

/** Deterministic 32-bit PRNG (mulberry32). */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function layoutZones(
  zoneIds: string[],
  edges: LayoutEdge[],
  seed = 1,
  iterations = 300,
): Record<string, Point> {
  const ids = [...zoneIds].sort();
  const rng = mulberry32(seed);
  const pos = new Map<string, Point>();
  for (const id of ids) {
    pos.set(id, { x: rng(), y: rng() });
  }
  if (ids.length <= 1) {
    for (const id of ids) pos.set(id, { x: 0.5, y: 0.5 });
    return Object.fromEntries(pos);
  }
  const adjacency = edges
    .filter((e) => pos.has(e.a) && pos.has(e.b) && e.a !== e.b)
    .map((e) => (e.a < e.b ? e : { a: e.b, b: e.a }));

  const spring = 0.25; // rest length in unit space
  const kSpring = 0.08;
  const kRepel = 0.012;
  for (let step = 0; step < iterations; step++) {
    const force = new Map<string, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const p = pos.get(ids[i])!;
        const q = pos.get(ids[j])!;
        let dx = p.x - q.x;
        let dy = p.y - q.y;
        const d2 = Math.max(dx * dx + dy * dy, 1e-6);
        const d = Math.sqrt(d2);
        const f = kRepel / d2;
        dx /= d;
        dy /= d;
        force.get(ids[i])!.x += f * dx;
        force.get(ids[i])!.y += f * dy;
        force.get(ids[j])!.x -= f * dx;
        force.get(ids[j])!.y -= f * dy;
      }
    }
    for (const { a, b } of adjacency) {
      const p = pos.get(a)!;
      const q = pos.get(b)!;
      let dx = q.x - p.x;
      let dy = q.y - p.y;
      const d = Math.max(Math.hypot(dx, dy), 1e-6);
      const f = kSpring * (d - spring);
      dx /= d;
      dy /= d;
      force.get(a)!.x += f * dx;
      force.get(a)!.y += f * dy;
      force.get(b)!.x -= f * dx;
      force.get(b)!.y -= f * dy;
    }
    const cooling = 1 - step / iterations;
    for (const id of ids) {
      const p = pos.get(id)!;
      const f = force.get(id)!;
      p.x += Math.max(-0.05, Math.min(0.05, f.x)) * cooling;
      p.y += Math.max(-0.05, Math.min(0.05, f.y)) * cooling;
    }
  }
  // Normalize into [0.05, 0.95] with aspect preserved-ish.
  const xs = ids.map((id) => pos.get(id)!.x);
  const ys = ids.map((id) => pos.get(id)!.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const out: Record<string, Point> = {};
  for (const id of ids) {
    const p = pos.get(id)!;
    out[id] = {
      x: 0.05 + (0.9 * (p.x - minX)) / spanX,
      y: 0.05 + (0.9 * (p.y - minY)) / spanY,
    };
  }
  return out;
}
