import init, { phase_scan, field_grid, gradient_marginal } from "./pkg/sos_ggm_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const PALETTE = ["#ddd", "#9ecae1", "#4292c6", "#08519c", "#fdae6b", "#e6550d", "#a63603", "#54278f"];

function call(fn, out, ...args) {
  const v = JSON.parse(fn(...args));
  if (v.error) {
    out.textContent = v.error;
    out.className = "error";
    return null;
  }
  out.className = "";
  return v;
}

// Sizes the canvas to its CSS box and returns a context plus the plot area.
function surface(canvas) {
  const ratio = window.devicePixelRatio || 1;
  canvas.width = canvas.clientWidth * ratio;
  canvas.height = canvas.clientHeight * ratio;
  const ctx = canvas.getContext("2d");
  ctx.scale(ratio, ratio);
  ctx.clearRect(0, 0, canvas.clientWidth, canvas.clientHeight);
  ctx.font = "12px system-ui, sans-serif";
  const box = { left: 48, top: 12, right: canvas.clientWidth - 12, bottom: canvas.clientHeight - 32 };
  return { ctx, box };
}

function axes(ctx, box, [x0, x1], [y0, y1], xLabel, yLabel, yTicks) {
  const sx = (x) => box.left + ((x - x0) / (x1 - x0)) * (box.right - box.left);
  const sy = (y) => box.bottom - ((y - y0) / (y1 - y0)) * (box.bottom - box.top);
  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.beginPath();
  ctx.moveTo(box.left, box.top);
  ctx.lineTo(box.left, box.bottom);
  ctx.lineTo(box.right, box.bottom);
  ctx.stroke();
  ctx.textAlign = "center";
  for (let i = 0; i <= 5; i++) {
    const x = x0 + ((x1 - x0) * i) / 5;
    ctx.fillText(x.toFixed(2), sx(x), box.bottom + 14);
  }
  ctx.fillText(xLabel, (box.left + box.right) / 2, box.bottom + 28);
  ctx.textAlign = "right";
  for (const y of yTicks) ctx.fillText(String(y), box.left - 6, sy(y) + 4);
  ctx.save();
  ctx.translate(12, (box.top + box.bottom) / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.textAlign = "center";
  ctx.fillText(yLabel, 0, 0);
  ctx.restore();
  return { sx, sy };
}

function runScan() {
  const out = $("scan-out");
  const v = call(phase_scan, out, num("scan-k"), num("scan-min"), num("scan-max"), num("scan-steps"));
  if (!v) return;
  const pts = v.points;
  const maxN = Math.max(...pts.map((p) => p.n_total));
  const { ctx, box } = surface($("scan-plot"));
  const ticks = Array.from({ length: maxN + 2 }, (_, i) => i);
  const { sx, sy } = axes(ctx, box, [pts[0].tau, pts[pts.length - 1].tau], [0, maxN + 1], "τ", "solutions", ticks);
  ctx.strokeStyle = "#08519c";
  ctx.lineWidth = 2;
  ctx.beginPath();
  pts.forEach((p, i) => {
    if (i === 0) ctx.moveTo(sx(p.tau), sy(p.n_total));
    else {
      ctx.lineTo(sx(p.tau), sy(pts[i - 1].n_total));
      ctx.lineTo(sx(p.tau), sy(p.n_total));
    }
  });
  ctx.stroke();
  ctx.fillStyle = "#e6550d";
  for (const e of v.exceptional) {
    ctx.beginPath();
    ctx.arc(sx(e.tau), sy(e.count), 4, 0, 2 * Math.PI);
    ctx.fill();
  }
  const lines = v.transitions.map((t) => `transition at τ = ${t.tau.toFixed(6)}: ${t.left} → ${t.right}`);
  for (const e of v.exceptional) lines.push(`exceptional point τ = ${e.tau.toFixed(6)}: ${e.count} solutions`);
  out.textContent = lines.join("\n") || "count is constant on this range";
}

function runGrid() {
  const out = $("grid-out");
  const steps = num("grid-steps");
  const v = call(field_grid, out, num("grid-tmin"), num("grid-tmax"), num("grid-hmin"), num("grid-hmax"), steps);
  if (!v) return;
  const { ctx, box } = surface($("grid-plot"));
  const [t0, t1] = [v.taus[0], v.taus[v.taus.length - 1]];
  const [h0, h1] = [v.hs[0], v.hs[v.hs.length - 1]];
  const hTicks = [0, 1, 2, 3, 4].map((i) => Number((h0 + ((h1 - h0) * i) / 4).toFixed(2)));
  const { sx, sy } = axes(ctx, box, [t0, t1], [h0, h1], "τ", "h", hTicks);
  const cw = (box.right - box.left) / Math.max(v.taus.length - 1, 1);
  const ch = (box.bottom - box.top) / Math.max(v.hs.length - 1, 1);
  for (const p of v.points) {
    ctx.fillStyle = PALETTE[Math.min(p.n_total, PALETTE.length - 1)];
    ctx.fillRect(sx(p.tau) - cw / 2, sy(p.h) - ch / 2, cw + 0.5, ch + 0.5);
  }
  ctx.lineWidth = 1.5;
  for (const [key, colour] of [["h_lower", "#000"], ["h_upper", "#b00"]]) {
    ctx.strokeStyle = colour;
    ctx.beginPath();
    let pen = false;
    for (const c of v.curves) {
      const h = c[key];
      if (h === null || h < h0 || h > h1) {
        pen = false;
        continue;
      }
      if (pen) ctx.lineTo(sx(c.tau), sy(h));
      else ctx.moveTo(sx(c.tau), sy(h));
      pen = true;
    }
    ctx.stroke();
  }
  const legend = PALETTE.map((_, n) => n).filter((n) => v.points.some((p) => p.n_total === n));
  out.textContent =
    `solutions per cell: ${legend.join(", ")} (darker is more)\n` +
    `black curve h = 4/τ, red curve h = τ³/(8(τ² − 8))\n` +
    `largest count on the grid: ${v.max_total} unordered, ${v.max_ordered} ordered`;
}

function runGradient() {
  const out = $("grad-out");
  const m = num("grad-m");
  const v = call(gradient_marginal, out, num("grad-k"), num("grad-tau"), num("grad-index"), m, num("grad-pin"));
  if (!v) return;
  const { ctx, box } = surface($("grad-plot"));
  const pMax = Math.max(...v.marginal);
  const ticks = [0, pMax / 2, pMax].map((y) => Number(y.toPrecision(2)));
  const { sx, sy } = axes(ctx, box, [-m - 0.5, m + 0.5], [0, pMax * 1.05], "gradient ζ", "probability", ticks);
  const w = (0.8 * (box.right - box.left)) / (2 * m + 1);
  ctx.fillStyle = "#4292c6";
  v.marginal.forEach((p, i) => {
    const zeta = i - m;
    ctx.fillRect(sx(zeta) - w / 2, sy(p), w, box.bottom - sy(p));
  });
  const rows = v.solutions.map(
    (s, i) => `${i === v.index ? "→" : " "} ${i}: a = ${s.a.toPrecision(10)}, b = ${s.b.toPrecision(10)}${s.equal ? " (equal)" : ""}`,
  );
  out.textContent = rows.join("\n");
}

await init();
$("scan-run").addEventListener("click", runScan);
$("grid-run").addEventListener("click", runGrid);
$("grad-run").addEventListener("click", runGradient);
runScan();
runGrid();
runGradient();
