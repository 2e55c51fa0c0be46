/** Canvas + DOM rendering of the view model. Browser-only module. */

import type { LayoutEdge, Point } from "./layout.js";
import type { ViewModel } from "./viewmodel.js";

function heatColor(prevalence: number): string {
  // green -> yellow -> red as prevalence rises
  const p = Math.max(0, Math.min(1, prevalence));
  const hue = 120 * (1 - p);
  return `hsl(${hue}, 85%, 45%)`;
}

export function drawHeatmap(
  canvas: HTMLCanvasElement,
  vm: ViewModel,
  positions: Record<string, Point>,
  edges: LayoutEdge[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#4a4a58";
  ctx.lineWidth = 1;
  for (const { a, b } of edges) {
    const p = positions[a];
    const q = positions[b];
    if (!p || !q) continue;
    ctx.beginPath();
    ctx.moveTo(p.x * width, p.y * height);
    ctx.lineTo(q.x * width, q.y * height);
    ctx.stroke();
  }
  for (const zone of vm.zones) {
    const p = positions[zone.id];
    if (!p) continue;
    const living = zone.susceptible + zone.infected + zone.recovered;
    const radius = 8 + Math.sqrt(living + zone.dead) * 1.6;
    const x = p.x * width;
    const y = p.y * height;
    ctx.beginPath();
    ctx.fillStyle = heatColor(zone.prevalence);
    ctx.arc(x, y, radius, 0, Math.PI * 2);
    ctx.fill();
    if (zone.restricted) {
      ctx.beginPath();
      ctx.strokeStyle = "#ff3b30";
      ctx.lineWidth = 3;
      ctx.setLineDash([5, 3]);
      ctx.arc(x, y, radius + 4, 0, Math.PI * 2);
      ctx.stroke();
      ctx.setLineDash([]);
    }
    if (zone.isEpicenter) {
      ctx.fillStyle = "#ffffff";
      ctx.font = "bold 14px sans-serif";
      ctx.fillText("✸", x - 5, y + 5);
    }
    ctx.fillStyle = "#e8e8f0";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(`${zone.id} (${zone.infected})`, x, y + radius + 12);
    ctx.textAlign = "start";
  }
}

const CURVE_COLORS: Record<string, string> = {
  susceptible: "#4d9de0",
  infected: "#e15554",
  recovered: "#3bb273",
  dead: "#7768ae",
};

export function drawCurves(canvas: HTMLCanvasElement, vm: ViewModel): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const ticks = vm.curves.ticks;
  if (ticks.length === 0) return;
  const maxTick = Math.max(ticks[ticks.length - 1], 1);
  const population = Math.max(
    1,
    vm.curves.susceptible[0] + vm.curves.infected[0] + vm.curves.recovered[0] + vm.curves.dead[0],
  );
  for (const series of ["susceptible", "infected", "recovered", "dead"] as const) {
    const values = vm.curves[series];
    ctx.beginPath();
    ctx.strokeStyle = CURVE_COLORS[series];
    ctx.lineWidth = 2;
    values.forEach((v, i) => {
      const x = (ticks[i] / maxTick) * (width - 20) + 10;
      const y = height - 15 - (v / population) * (height - 30);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
}

function fmt(value: number | null): string {
  return value === null ? "–" : value.toFixed(3);
}

export function renderPanels(root: Document, vm: ViewModel): void {
  const set = (id: string, text: string) => {
    const el = root.getElementById(id);
    if (el) el.textContent = text;
  };
  set("tick", String(vm.tick));
  set("mode", vm.finished ? "finished" : vm.mode);
  set("r0-first", fmt(vm.r0.firstGeneration));
  set("r0-weighted", fmt(vm.r0.weighted));
  set(
    "awareness",
    `unaware ${vm.awareness.unaware} / rumor ${vm.awareness.rumor} / informed ${vm.awareness.informed}`,
  );
  const stale = root.getElementById("stale");
  if (stale) stale.style.display = vm.stale ? "inline" : "none";

  const channels = root.getElementById("channels");
  if (channels) {
    channels.innerHTML = "";
    for (const { channel, count } of vm.channelBreakdown) {
      const row = root.createElement("tr");
      row.innerHTML = `<td>${channel}</td><td>${count}</td>`;
      channels.appendChild(row);
    }
  }
  const feed = root.getElementById("feed");
  if (feed) {
    feed.innerHTML = "";
    for (const entry of [...vm.feed].reverse().slice(0, 40)) {
      const li = root.createElement("li");
      li.className = `feed-${entry.kind}`;
      li.textContent = `t${entry.tick} · ${entry.text}`;
      feed.appendChild(li);
    }
  }
  const pending = root.getElementById("pending");
  if (pending) {
    pending.innerHTML = "";
    for (const p of [...vm.pending].reverse().slice(0, 10)) {
      const li = root.createElement("li");
      li.className = `pending-${p.status}`;
      const suffix =
        p.status === "applied"
          ? ` (applied at tick ${p.appliedTick})`
          : p.status === "rejected"
            ? ` (rejected: ${p.reason})`
            : " (pending…)";
      li.textContent = `${p.intervention.kind}${suffix}`;
      pending.appendChild(li);
    }
  }
}
