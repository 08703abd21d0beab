import init, { occlusion_levels, motion_summary, fdr_curve, ratio_grid } from "./pkg/motcom_web.js";

const $ = (id) => document.getElementById(id);

function report(err) {
  $("error").textContent = err ? String(err.message ?? err) : "";
}

function pointer(canvas, ev) {
  const r = canvas.getBoundingClientRect();
  return { x: ev.clientX - r.left, y: ev.clientY - r.top };
}

function draggable(canvas, hit, move, redraw) {
  let grab = null;
  canvas.addEventListener("pointerdown", (ev) => {
    grab = hit(pointer(canvas, ev));
    if (grab) canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointermove", (ev) => {
    if (!grab) return;
    move(grab, pointer(canvas, ev));
    redraw();
  });
  canvas.addEventListener("pointerup", () => { grab = null; });
}

const colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];

function occlusionDemo() {
  const canvas = $("occ");
  const ctx = canvas.getContext("2d");
  const boxes = [
    { l: 60, t: 40, w: 90, h: 180 },
    { l: 120, t: 80, w: 80, h: 170 },
    { l: 260, t: 60, w: 100, h: 140 },
    { l: 300, t: 120, w: 70, h: 160 },
  ];
  const draw = () => {
    let levels;
    try {
      levels = occlusion_levels(new Float64Array(boxes.flatMap((b) => [b.l, b.t, b.w, b.h])));
      report();
    } catch (e) { report(e); return; }
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const order = boxes.map((b, i) => i).sort((a, b) => boxes[a].t + boxes[a].h - boxes[b].t - boxes[b].h);
    for (const i of order) {
      const b = boxes[i];
      ctx.fillStyle = colors[i] + "aa";
      ctx.fillRect(b.l, b.t, b.w, b.h);
      ctx.strokeStyle = colors[i];
      ctx.strokeRect(b.l, b.t, b.w, b.h);
      ctx.fillStyle = "#000";
      ctx.fillText(`${i + 1}`, b.l + 4, b.t + 12);
    }
    const mean = levels.reduce((a, v) => a + v, 0) / levels.length;
    $("occ-out").textContent =
      Array.from(levels, (v, i) => `box ${i + 1}  occlusion ${v.toFixed(3)}`).join("\n") +
      `\n\nframe mean ${mean.toFixed(3)}`;
  };
  draggable(canvas,
    (p) => {
      for (let i = boxes.length - 1; i >= 0; i--) {
        const b = boxes[i];
        if (p.x >= b.l && p.x <= b.l + b.w && p.y >= b.t && p.y <= b.t + b.h) return { i, dx: p.x - b.l, dy: p.y - b.t };
      }
      return null;
    },
    (g, p) => { boxes[g.i].l = p.x - g.dx; boxes[g.i].t = p.y - g.dy; },
    draw);
  draw();
}

function motionDemo() {
  const canvas = $("mot");
  const ctx = canvas.getContext("2d");
  let points = [[40, 160], [90, 160], [140, 160], [190, 150], [230, 110], [250, 60]];
  const size = () => Number($("mot-size").value);
  const draw = () => {
    $("mot-size-v").textContent = `${size()} px`;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = "#999";
    points.forEach(([x, y]) => ctx.strokeRect(x - size() / 2, y - size() / 2, size(), size()));
    ctx.strokeStyle = "#1f77b4";
    ctx.beginPath();
    points.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
    ctx.stroke();
    points.forEach(([x, y]) => { ctx.beginPath(); ctx.arc(x, y, 3, 0, 7); ctx.fill(); });
    if (points.length < 2) {
      $("mot-out").textContent = "add at least two points";
      return;
    }
    try {
      const s = motion_summary(new Float64Array(points.flat()), size(), 1);
      report();
      $("mot-out").textContent =
        Array.from(s.ratios, (r, i) => `step ${i + 1}  error/size ${r.toFixed(3)}`).join("\n") +
        `\n\nmean ${s.mean_relative_error.toFixed(4)}\nMCOM ${s.mcom.toFixed(4)}`;
      s.free();
    } catch (e) { report(e); }
  };
  canvas.addEventListener("click", (ev) => {
    const p = pointer(canvas, ev);
    points.push([p.x, p.y]);
    draw();
  });
  $("mot-clear").addEventListener("click", () => { points = []; draw(); });
  $("mot-size").addEventListener("input", draw);
  draw();
}

function visualDemo() {
  const canvas = $("vis");
  const plot = $("fdr");
  const ctx = canvas.getContext("2d");
  const pctx = plot.getContext("2d");
  const grid = ratio_grid();
  const target = [160, 160];
  const next = [[210, 170], [120, 110], [150, 240], [260, 80]];
  const draw = () => {
    let curve;
    try {
      curve = fdr_curve(new Float64Array(target), new Float64Array(next.flat()), 0);
      report();
    } catch (e) { report(e); return; }
    const dist = next.map(([x, y]) => Math.hypot(x - target[0], y - target[1]));
    const dnn = Math.min(...dist);
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    for (const r of [0, 1]) {
      ctx.strokeStyle = r ? "#ccc" : "#888";
      ctx.beginPath();
      ctx.arc(target[0], target[1], dnn * (1 + r), 0, 7);
      ctx.stroke();
    }
    ctx.fillStyle = "#000";
    ctx.beginPath(); ctx.arc(target[0], target[1], 6, 0, 7); ctx.fill();
    next.forEach(([x, y], i) => {
      ctx.strokeStyle = i === 0 ? "#2ca02c" : "#d62728";
      ctx.lineWidth = 3;
      ctx.beginPath(); ctx.arc(x, y, 7, 0, 7); ctx.stroke();
      ctx.lineWidth = 1;
    });

    const [w, h, m] = [plot.width, plot.height, 36];
    pctx.clearRect(0, 0, w, h);
    pctx.strokeStyle = "#000";
    pctx.strokeRect(m, m / 2, w - 1.5 * m, h - 1.5 * m);
    pctx.fillStyle = "#000";
    pctx.fillText("r", w / 2, h - 8);
    pctx.fillText("FDR", 4, h / 2);
    pctx.fillText("0", m - 10, h - m + 4);
    pctx.fillText("1", m - 10, m / 2 + 4);
    pctx.strokeStyle = "#1f77b4";
    pctx.beginPath();
    grid.forEach((r, i) => {
      const x = m + r * (w - 1.5 * m);
      const y = h - m - curve[i] * (h - 1.5 * m);
      i ? pctx.lineTo(x, y) : pctx.moveTo(x, y);
    });
    pctx.stroke();
    const mean = curve.reduce((a, v) => a + v, 0) / curve.length;
    $("vis-out").textContent =
      `nearest distance ${dnn.toFixed(1)}\ntrue match ${dist[0].toFixed(1)}\n\n` +
      `FDR at r=0.5  ${curve[49].toFixed(3)}\nFDR at r=1.0  ${curve[99].toFixed(3)}\nmean over r   ${mean.toFixed(4)}`;
  };
  draggable(canvas,
    (p) => {
      const all = [target, ...next];
      const i = all.findIndex(([x, y]) => Math.hypot(x - p.x, y - p.y) < 10);
      return i < 0 ? null : { pt: all[i] };
    },
    (g, p) => { g.pt[0] = p.x; g.pt[1] = p.y; },
    draw);
  draw();
}

await init();
occlusionDemo();
motionDemo();
visualDemo();
