import init, { symbolTable, evolve, norms } from "./pkg/padic_pme_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const int = (id) => Math.trunc(num(id));
const fmt = (x) => (x === null ? "-" : Math.abs(x) >= 1e-3 && Math.abs(x) < 1e4 ? x.toFixed(6) : x.toExponential(4));

function fail(out, e) {
  out.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = String(e.message ?? e);
  out.appendChild(p);
}

function table(rows, header) {
  const t = document.createElement("table");
  const head = t.insertRow();
  for (const h of header) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  for (const r of rows) {
    const tr = t.insertRow();
    for (const c of r) tr.insertCell().textContent = typeof c === "number" ? fmt(c) : c;
  }
  return t;
}

// Minimal plotting: axes box, optional log scale, polylines and dots.
function plot(canvas, series, { logY = false, logX = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 60, R = 10, T = 10, B = 30;
  ctx.clearRect(0, 0, W, H);
  const tx = (x) => (logX ? Math.log10(x) : x);
  const ty = (y) => (logY ? Math.log10(y) : y);
  const pts = series.flatMap((s) => s.points).filter(([x, y]) => isFinite(tx(x)) && isFinite(ty(y)));
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => tx(p[0]))), Math.max(...pts.map((p) => tx(p[0])))];
  let [y0, y1] = [Math.min(...pts.map((p) => ty(p[1]))), Math.max(...pts.map((p) => ty(p[1])))];
  if (x1 === x0) { x0 -= 1; x1 += 1; }
  if (y1 === y0) { y0 -= 1; y1 += 1; }
  const pad = 0.05 * (y1 - y0);
  y0 -= pad; y1 += pad;
  const X = (x) => L + ((tx(x) - x0) / (x1 - x0)) * (W - L - R);
  const Y = (y) => H - B - ((ty(y) - y0) / (y1 - y0)) * (H - T - B);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  const lab = (v, log) => (log ? "1e" + v.toFixed(1) : fmt(v));
  ctx.fillText(lab(y1, logY), 2, T + 10);
  ctx.fillText(lab(y0, logY), 2, H - B);
  ctx.fillText(lab(x0, logX), L, H - 12);
  ctx.fillText(lab(x1, logX), W - R - 60, H - 12);
  ctx.fillText(xLabel, W / 2 - 20, H - 4);
  ctx.save();
  ctx.translate(12, H / 2 + 20);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, 0, 0);
  ctx.restore();
  let legend = T + 14;
  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    const ok = s.points.filter(([x, y]) => isFinite(tx(x)) && isFinite(ty(y)));
    if (s.dots) {
      for (const [x, y] of ok) ctx.fillRect(X(x) - 2, Y(y) - 2, 4, 4);
    } else {
      ctx.beginPath();
      ok.forEach(([x, y], i) => (i ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y))));
      ctx.stroke();
    }
    if (s.name) {
      ctx.fillText(s.name, W - R - 150, legend);
      legend += 14;
    }
  }
}

function runSymbol() {
  const out = $("sy-out");
  try {
    const v = JSON.parse(symbolTable(int("sy-p"), int("sy-n"), int("sy-k"), num("sy-alpha")));
    const t = v.table;
    out.innerHTML = "";
    out.appendChild(
      table(
        t.candidates.map((c, i) => [c, t.formulas[i], t.max_gaps[i], t.matching.includes(c) ? "yes" : "no"]),
        ["candidate", "formula", "max gap", "matches"],
      ),
    );
    const p = document.createElement("p");
    p.textContent = `${v.cells} cells, lambda_0 = ${fmt(v.lambda0)}`;
    out.appendChild(p);
    const rows = t.rows.filter((r) => r.b > 0);
    const colors = ["#1b7", "#c60", "#46c"];
    plot(
      $("sy-plot"),
      [
        { name: "brute force", color: "#000", dots: true, points: rows.map((r) => [r.dual_norm, r.brute]) },
        ...t.candidates.map((c, i) => ({
          name: c,
          color: colors[i],
          points: [...rows].sort((a, b) => a.dual_norm - b.dual_norm).map((r) => [r.dual_norm, r.predicted[i]]),
        })),
      ],
      { logX: true, logY: true, xLabel: "||xi||", yLabel: "symbol" },
    );
  } catch (e) {
    fail(out, e);
  }
}

let trajectory = null;

function drawFrame() {
  if (!trajectory) return;
  const n = int("ev-frame");
  const v = trajectory;
  const shown = [0, n];
  plot(
    $("ev-profile"),
    shown.map((k, i) => ({
      name: `t = ${fmt(v.times[k])}`,
      color: i ? "#c33" : "#bbb",
      points: v.order.map((a, j) => [j, v.states[k][a]]),
    })),
    { xLabel: "cells in tree order", yLabel: "u" },
  );
}

function runEvolve() {
  const out = $("ev-out");
  try {
    const v = JSON.parse(
      evolve(int("ev-p"), int("ev-n"), int("ev-k"), num("ev-alpha"), num("ev-m"), num("ev-tau"), num("ev-t"),
        $("ev-gen").value, int("ev-seed")),
    );
    trajectory = v;
    const last = v.times.length - 1;
    out.textContent =
      `${v.cells} cells, ${last} steps, Newton iterations per step at most ${Math.max(...v.newton_iters)}` +
      (v.failure ? `; stopped early: ${v.failure}` : "");
    if (v.failure) out.className = "err";
    else out.className = "";
    $("ev-frame").max = last;
    $("ev-frame").value = last;
    drawFrame();
    plot(
      $("ev-energy"),
      [
        { name: "||u||_-1", color: "#36c", points: v.times.map((t, i) => [t, v.hminus1[i]]) },
        { name: "Psi(u)", color: "#c63", points: v.times.map((t, i) => [t, v.psi[i]]) },
      ],
      { logY: true, xLabel: "t" },
    );
  } catch (e) {
    trajectory = null;
    fail(out, e);
  }
}

function runNorms() {
  const out = $("no-out");
  try {
    const v = JSON.parse(
      norms(int("no-p"), int("no-n"), int("no-k"), num("no-alpha"), num("no-s"), $("no-gen").value, int("no-seed")),
    );
    out.innerHTML = "";
    const n = v.norms;
    out.appendChild(
      table(
        [
          ["L2", n.l2],
          ["H^alpha", n.h_alpha],
          ["AGS (pairs)", n.ags],
          ["AGS (multiplier)", n.ags_via_multiplier],
          ["H1", n.h1],
          ["H-1", n.hminus1],
        ],
        ["norm", "value"],
      ),
    );
    if (v.envelope && v.ratios) {
      const e = v.envelope;
      const b = [e.h_alpha_over_ags, e.ags_over_h1, e.h_alpha_over_h1];
      const names = ["H^alpha / (L2 + AGS)", "(L2 + AGS) / H1", "H^alpha / H1"];
      out.appendChild(
        table(names.map((name, i) => [name, b[i].lower, v.ratios[i], b[i].upper]), ["ratio", "lower", "value", "upper"]),
      );
    }
    const xs = v.sandwich.map((s) => s.dual_norm);
    const flat = (c) => [[Math.min(...xs), c], [Math.max(...xs), c]];
    plot(
      $("no-plot"),
      [
        { name: "A_s(xi) / ||xi||^2s", color: "#000", dots: true, points: v.sandwich.map((s) => [s.dual_norm, s.scaled]) },
        { name: `C1 = ${fmt(v.c1)}`, color: "#c33", points: flat(v.c1) },
        { name: `C2 = ${fmt(v.c2)}`, color: "#36c", points: flat(v.c2) },
      ],
      { logX: true, xLabel: "||xi||" },
    );
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("sy-run").onclick = runSymbol;
$("ev-run").onclick = runEvolve;
$("no-run").onclick = runNorms;
$("ev-frame").oninput = drawFrame;
runSymbol();
runEvolve();
runNorms();
