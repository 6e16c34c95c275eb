// Build the bindings into ./pkg first (see the README), then serve this directory.
import init, { DemoWorld, frame_sweep, ring_path } from "./pkg/relay_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"];

let world = null;
let hello = null;
let timer = null;

function show(el, text, isError = false) {
  el.textContent = text;
  el.className = isError ? "err" : "";
}

function newWorld() {
  stop();
  world = new DemoWorld(JSON.stringify({ seed: Number($("seed").value) }), 0);
  world.set_autopilot($("autopilot").checked);
  hello = JSON.parse(world.hello());
  const box = $("ue-buttons");
  box.replaceChildren();
  for (let ue = 0; ue < hello.n_ues; ue++) {
    const b = document.createElement("button");
    b.textContent = ue;
    b.style.color = COLORS[ue % COLORS.length];
    b.onclick = () => world.select(ue);
    box.append(b);
  }
  draw(JSON.parse(world.snapshot()));
}

function stop() {
  clearInterval(timer);
  timer = null;
  $("play").textContent = "Play";
}

function play() {
  if (timer) return stop();
  const eps = Math.max(1, Number($("eps").value));
  // At high rates run several events per timer tick instead of a faster timer.
  const interval = Math.max(16, 1000 / eps);
  const batch = Math.max(1, Math.round((eps * interval) / 1000));
  timer = setInterval(() => {
    draw(JSON.parse(world.step(batch)));
    if (world.finished()) stop();
  }, interval);
  $("play").textContent = "Pause";
}

// Sector s spans angles [(s-1), s) * 2pi/S from +x, counter-clockwise; canvas y points down.
function sectorAngle(sector, sectors) {
  return -((sector - 0.5) / sectors) * 2 * Math.PI;
}

function draw(state) {
  const c = $("ring");
  const g = c.getContext("2d");
  const cx = c.width / 2, cy = c.height / 2, r = 170;
  const S = hello.sectors;
  g.clearRect(0, 0, c.width, c.height);

  g.strokeStyle = "#ddd";
  for (let s = 0; s < S; s++) {
    const a = -(s / S) * 2 * Math.PI;
    g.beginPath();
    g.moveTo(cx, cy);
    g.lineTo(cx + r * Math.cos(a), cy + r * Math.sin(a));
    g.stroke();
  }
  g.beginPath();
  g.arc(cx, cy, r, 0, 2 * Math.PI);
  g.stroke();

  // UEs sit at their true positions; queue bars grow outward from each one.
  const scale = r / Math.max(...state.ue_positions.map((p) => Math.hypot(p[0], p[1])), 1);
  state.ue_positions.forEach(([x, y], ue) => {
    const px = cx + x * scale * 0.85, py = cy - y * scale * 0.85;
    g.fillStyle = COLORS[ue % COLORS.length];
    g.beginPath();
    g.arc(px, py, ue === state.active_ue ? 8 : 5, 0, 2 * Math.PI);
    g.fill();
    const h = (40 * state.q[ue]) / state.queue_limit;
    g.fillRect(px + 10, py - h, 6, h);
    g.fillText(`${ue}: ${state.q[ue]}`, px + 18, py);
  });

  const a = sectorAngle(state.uav_sector, S);
  g.fillStyle = "#000";
  g.beginPath();
  g.arc(cx + (r + 14) * Math.cos(a), cy + (r + 14) * Math.sin(a), 7, 0, 2 * Math.PI);
  g.fill();

  show(
    $("state"),
    [
      `frame     ${state.frame}`,
      `event     ${state.event}`,
      `clock     ${state.clock.toFixed(1)} s`,
      `serving   UE ${state.active_ue}`,
      `UAV       sector ${state.uav_sector}`,
      `battery   ${state.battery.toFixed(0)} J`,
      `drops     ${state.drops_cumulative.join(" ")}`,
      `queues    ${state.q.join(" ")}`,
      world.finished() ? "finished" : "",
    ].join("\n"),
  );
}

function sweep() {
  let result;
  try {
    const cfg = JSON.stringify({ events_per_frame: Number($("sw-events").value) });
    result = JSON.parse(frame_sweep(cfg, Number($("sw-frames").value), Number($("sw-delta").value)));
  } catch (e) {
    return show($("sweep-out"), String(e.message ?? e), true);
  }
  const key = $("sw-metric").value;
  const ys = result.frames.map((f) => f[key]);
  const c = $("chart");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const max = Math.max(...ys, 1e-9);
  const w = c.width / ys.length;
  g.fillStyle = "#1f77b4";
  ys.forEach((y, i) => {
    const h = ((c.height - 20) * y) / max;
    g.fillRect(i * w + 1, c.height - h, Math.max(1, w - 2), h);
  });
  g.fillStyle = "#000";
  g.fillText(`max ${max.toPrecision(4)}`, 4, 12);
  const total = (k) => result.frames.reduce((s, f) => s + f[k], 0);
  show(
    $("sweep-out"),
    [
      `frames      ${result.frames.length}${result.truncated ? " (battery ran out)" : ""}`,
      `drops       ${total("drops")}`,
      `delivered   ${total("delivered")}`,
      `energy      ${total("energy").toFixed(0)} J`,
      `battery     ${result.battery_left.toFixed(0)} / ${result.battery_initial.toFixed(0)} J`,
    ].join("\n"),
  );
}

function path() {
  try {
    const p = JSON.parse(ring_path(Number($("rp-s").value), Number($("rp-uav").value), Number($("rp-target").value)));
    const moves = ["clockwise", "counter-clockwise", "hover"];
    show(
      $("path-out"),
      [
        `distance   ${p.distance} of at most ${p.max_distance}`,
        `alpha      ${p.alpha.toFixed(4)}`,
        `first move ${moves[p.first_move]}`,
        `path       ${p.path.join(" -> ")}`,
      ].join("\n"),
    );
  } catch (e) {
    show($("path-out"), String(e.message ?? e), true);
  }
}

await init();
$("play").onclick = play;
$("reset").onclick = newWorld;
$("autopilot").onchange = (e) => world.set_autopilot(e.target.checked);
$("sweep").onclick = sweep;
$("sw-metric").onchange = sweep;
$("path").onclick = path;
newWorld();
path();
