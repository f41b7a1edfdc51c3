import init, { direction_probabilities, walk_trace, run_metrics } from "./pkg/mobgrid_web.js";

const LABELS = ["B", "R", "Fr", "F", "Fl", "L"];
const $ = (id) => document.getElementById(id);

function drawProbabilities(sigma) {
  const canvas = $("probs");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const p = direction_probabilities(sigma);
  if (!p) return;
  const barWidth = canvas.width / p.length;
  const top = 20;
  const height = canvas.height - top - 30;
  p.forEach((value, k) => {
    const h = value * height;
    const x = k * barWidth + 10;
    ctx.fillStyle = "#3b6ea5";
    ctx.fillRect(x, top + height - h, barWidth - 20, h);
    ctx.fillStyle = "#222";
    ctx.fillText(LABELS[k], x + (barWidth - 20) / 2 - 4, canvas.height - 12);
    ctx.fillText(value.toFixed(4), x, top + height - h - 4);
  });
}

function axialToPixel(q, r, size) {
  return [size * Math.sqrt(3) * (q + r / 2), size * 1.5 * r];
}

function drawTrace() {
  const canvas = $("trace");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const cells = walk_trace(Number($("sigma").value), Number($("steps").value), Number($("walk-seed").value));
  if (cells.length === 0) return;

  const points = [];
  for (let i = 0; i < cells.length; i += 2) points.push(axialToPixel(cells[i], cells[i + 1], 1));
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const span = Math.max(Math.max(...xs) - Math.min(...xs), Math.max(...ys) - Math.min(...ys), 1);
  const scale = (canvas.width - 40) / span;
  const cx = (Math.max(...xs) + Math.min(...xs)) / 2;
  const cy = (Math.max(...ys) + Math.min(...ys)) / 2;
  const map = ([x, y]) => [canvas.width / 2 + (x - cx) * scale, canvas.height / 2 + (y - cy) * scale];

  ctx.strokeStyle = "#3b6ea5";
  ctx.beginPath();
  points.map(map).forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.stroke();
  const [sx, sy] = map(points[0]);
  const [ex, ey] = map(points[points.length - 1]);
  ctx.fillStyle = "#2a8a2a";
  ctx.fillRect(sx - 4, sy - 4, 8, 8);
  ctx.fillStyle = "#b03030";
  ctx.fillRect(ex - 4, ey - 4, 8, 8);
}

function showRun() {
  const m = run_metrics(Number($("population").value), Number($("mf").value), Number($("run-seed").value));
  const table = $("metrics");
  if (m.length === 0) {
    table.innerHTML = "<tr><td>invalid parameters</td></tr>";
    return;
  }
  const rows = [
    ["mean execution time (s)", Number.isNaN(m[0]) ? "n/a" : m[0].toFixed(3)],
    ["task failure rate", m[1].toFixed(4)],
    ["location updates", m[2].toFixed(0)],
    ["bandwidth utilization", m[3].toFixed(6)],
    ["jobs completed", `${m[4]} / ${m[5]}`],
  ];
  table.innerHTML = rows.map(([k, v]) => `<tr><th>${k}</th><td>${v}</td></tr>`).join("");
}

await init();
$("sigma").addEventListener("input", (e) => {
  $("sigma-value").textContent = e.target.value;
  drawProbabilities(Number(e.target.value));
});
$("walk").addEventListener("click", drawTrace);
$("run").addEventListener("click", showRun);
drawProbabilities(30);
drawTrace();
showRun();
