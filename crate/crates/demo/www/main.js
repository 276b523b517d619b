import init, { sceneView, pdpSeries, tvtfView } from "./pkg/scatterec_demo.js";

const $ = (id) => document.getElementById(id);
const params = () => [$("layout").value, $("vtd").value, Number($("seed").value) >>> 0];
const link = () => Number($("link").value);
const snapshot = () => Number($("snapshot").value);

function guard(f) {
  try {
    $("status").textContent = "";
    f();
  } catch (e) {
    $("status").textContent = String(e);
  }
}

function drawScene() {
  const v = JSON.parse(sceneView(...params(), snapshot(), link()));
  const c = $("bev").getContext("2d");
  const W = c.canvas.width;
  const cx = (v.tx[0] + v.rx[0]) / 2, cy = (v.tx[1] + v.rx[1]) / 2;
  const half = Math.max(40, Math.hypot(v.tx[0] - v.rx[0], v.tx[1] - v.rx[1]) * 0.8);
  const s = W / (2 * half);
  const px = (x, y) => [(x - cx) * s + W / 2, W / 2 - (y - cy) * s];
  const poly = (pts) => {
    c.beginPath();
    pts.forEach(([x, y], i) => (i ? c.lineTo : c.moveTo).call(c, ...px(x, y)));
    c.closePath();
  };
  c.clearRect(0, 0, W, W);
  for (const o of v.objects) {
    poly(o.footprint);
    c.fillStyle = o.kind === "tree" ? "#cfe3c8" : o.kind === "building" ? "#ddd" : "#e8e0d0";
    c.fill();
  }
  c.fillStyle = "#555";
  for (const [x, y] of v.points) {
    const [a, b] = px(x, y);
    c.fillRect(a, b, 1, 1);
  }
  for (const k of v.clusters) {
    poly(k.footprint);
    c.strokeStyle = k.dynamic ? "#e07b00" : "#2a6fdb";
    c.lineWidth = k.truth > 0 ? 2.5 : 0.8;
    c.stroke();
  }
  c.fillStyle = "#d00";
  for (const [x, y] of v.scatterers) {
    const [a, b] = px(x, y);
    c.beginPath();
    c.arc(a, b, 3, 0, 2 * Math.PI);
    c.fill();
  }
  c.strokeStyle = v.los_blocked ? "#d00" : "#0a0";
  c.setLineDash([4, 4]);
  c.beginPath();
  c.moveTo(...px(v.tx[0], v.tx[1]));
  c.lineTo(...px(v.rx[0], v.rx[1]));
  c.stroke();
  c.setLineDash([]);
  c.fillStyle = "#000";
  c.fillText("Tx", ...px(v.tx[0], v.tx[1]));
  c.fillText("Rx", ...px(v.rx[0], v.rx[1]));
}

function colour(db) {
  const t = Math.min(1, Math.max(0, (db + 40) / 40));
  return `hsl(${240 - 240 * t}, 90%, ${15 + 45 * t}%)`;
}

function drawPdp() {
  const v = JSON.parse(pdpSeries(...params(), link(), 100));
  const c = $("pdp").getContext("2d");
  const { width: W, height: H } = c.canvas;
  c.fillStyle = "#000";
  c.fillRect(0, 0, W, H);
  if (!v.frames.length) return;
  const bins = Math.min(200, Math.max(...v.frames.map((f) => f.powers_db.length)));
  const dx = W / 100, dy = H / bins;
  for (const f of v.frames) {
    f.powers_db.slice(0, bins).forEach((db, k) => {
      if (db <= -119) return;
      c.fillStyle = colour(db);
      c.fillRect(f.snapshot * dx, H - (k + 1) * dy, Math.ceil(dx), Math.ceil(dy));
    });
  }
}

function drawTvtf() {
  const chi = Number($("chi").value);
  $("chiLabel").textContent = chi.toFixed(1);
  const v = JSON.parse(tvtfView(...params(), link(), snapshot(), chi, 256));
  const c = $("tvtf").getContext("2d");
  const { width: W, height: H } = c.canvas;
  c.clearRect(0, 0, W, H);
  const lo = Math.min(...v.mag_db), hi = Math.max(...v.mag_db);
  const span = Math.max(hi - lo, 1);
  c.strokeStyle = "#2a6fdb";
  c.beginPath();
  v.mag_db.forEach((m, i) => {
    const x = (i / (v.mag_db.length - 1)) * W;
    const y = H - 10 - ((m - lo) / span) * (H - 20);
    i ? c.lineTo(x, y) : c.moveTo(x, y);
  });
  c.stroke();
  c.fillStyle = "#000";
  c.fillText(`${hi.toFixed(1)} dB`, 4, 12);
  c.fillText(`${lo.toFixed(1)} dB   (${v.paths} paths)`, 4, H - 2);
}

await init();
const refresh = () => guard(() => { drawScene(); drawTvtf(); });
for (const id of ["layout", "vtd", "seed", "link"]) $(id).addEventListener("change", refresh);
$("snapshot").addEventListener("input", () => {
  $("snapLabel").textContent = snapshot();
  refresh();
});
$("chi").addEventListener("input", () => guard(drawTvtf));
$("pdpBtn").addEventListener("click", () => guard(drawPdp));
refresh();
