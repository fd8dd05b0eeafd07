import init, { extremal_curve, tg_convergence, hardy_gap_scan } from "./pkg/opineq_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// series: [{ label, color, xs, ys, dashed }]
function plot(canvas, series, { logX = false, xLabel = "", zeroLine = false } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 64, R = 150, T = 14, B = 34;
  ctx.clearRect(0, 0, W, H);
  const fx = logX ? Math.log2 : (x) => x;
  const xs = series.flatMap((s) => s.xs.map(fx));
  const ys = series.flatMap((s) => s.ys).filter(Number.isFinite);
  if (zeroLine) ys.push(0);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const pad = 0.05 * (y1 - y0);
  y0 -= pad; y1 += pad;
  const px = (x) => L + ((fx(x) - x0) / (x1 - x0 || 1)) * (W - L - R);
  const py = (y) => T + (1 - (y - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#999"; ctx.fillStyle = "#444"; ctx.font = "11px sans-serif"; ctx.lineWidth = 1;
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  for (let i = 0; i <= 4; i++) {
    const y = y0 + (i / 4) * (y1 - y0);
    ctx.fillText(y.toPrecision(4), 4, py(y) + 4);
    const x = x0 + (i / 4) * (x1 - x0);
    ctx.fillText((logX ? 2 ** x : x).toPrecision(3), L + (i / 4) * (W - L - R) - 10, H - B + 16);
  }
  ctx.fillText(xLabel, (W - R) / 2, H - 4);
  if (zeroLine && y0 < 0 && y1 > 0) {
    ctx.strokeStyle = "#c66"; ctx.setLineDash([3, 3]);
    ctx.beginPath(); ctx.moveTo(L, py(0)); ctx.lineTo(W - R, py(0)); ctx.stroke();
    ctx.setLineDash([]);
  }
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color; ctx.lineWidth = 2; ctx.setLineDash(s.dashed ? [6, 4] : []);
    ctx.beginPath();
    s.xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.ys[i])) : ctx.moveTo(px(x), py(s.ys[i]))));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, W - R + 10, T + 14 + 16 * k);
  });
}

function guard(outId, fn) {
  try {
    $(outId).className = "out";
    fn();
  } catch (e) {
    $(outId).className = "out err";
    $(outId).textContent = String(e.message ?? e);
  }
}

function runExtremal() {
  guard("ex-out", () => {
    const pts = JSON.parse(extremal_curve(num("ex-pmin"), num("ex-pmax"), num("ex-steps"), num("ex-n")));
    const xs = pts.map((q) => q.p);
    plot($("ex-plot"), [
      { label: "ratio at N", color: "#1565c0", xs, ys: pts.map((q) => q.ratio) },
      { label: "(p/(p-1))^p", color: "#333", xs, ys: pts.map((q) => q.constant), dashed: true },
    ], { xLabel: "p" });
    const worst = Math.max(...pts.map((q) => q.ratio / q.constant));
    $("ex-out").textContent = `largest ratio / constant on the grid: ${worst.toFixed(6)}`;
  });
}

function runTg() {
  guard("tg-out", () => {
    const v = JSON.parse(tg_convergence(num("tg-seed"), num("tg-terms"), num("tg-dim"), num("tg-k")));
    const xs = v.points.map((q) => q.p);
    const series = [{ label: "Tr M_p", color: "#2e7d32", xs, ys: v.points.map((q) => q.trace) }];
    if (v.logexp !== null) series.push({ label: "log-exp value", color: "#333", xs, ys: xs.map(() => v.logexp), dashed: true });
    plot($("tg-plot"), series, { logX: true, xLabel: "p (log scale)" });
    const err = v.logexp === null ? "" : `, relative gap ${(Math.abs(v.limit - v.logexp) / v.logexp).toExponential(2)}`;
    $("tg-out").textContent = `Tr M_p at p = 2^${num("tg-k")}: ${v.limit.toPrecision(12)}; log-exp: ${v.logexp?.toPrecision(12) ?? "undefined"}${err}`;
  });
}

function runGap() {
  guard("gap-out", () => {
    const pts = JSON.parse(hardy_gap_scan(num("gap-seed"), num("gap-dim"), num("gap-n"), num("gap-rank"), num("gap-pmin"), num("gap-pmax"), 120));
    const xs = pts.map((q) => q.p);
    plot($("gap-plot"), [
      { label: "Loewner gap", color: "#6a1b9a", xs, ys: pts.map((q) => q.loewner) },
      { label: "trace gap", color: "#ef6c00", xs, ys: pts.map((q) => q.trace) },
    ], { xLabel: "p", zeroLine: true });
    const neg = pts.filter((q) => q.loewner < -1e-8);
    $("gap-out").textContent = neg.length
      ? `Loewner gap negative for p in [${neg[0].p.toFixed(3)}, ${neg[neg.length - 1].p.toFixed(3)}] (min ${Math.min(...neg.map((q) => q.loewner)).toExponential(3)})`
      : `Loewner gap nonnegative on the grid (min ${Math.min(...pts.map((q) => q.loewner)).toExponential(3)})`;
  });
}

await init();
$("ex-run").onclick = runExtremal;
$("tg-run").onclick = runTg;
$("gap-run").onclick = runGap;
runExtremal();
runTg();
runGap();
