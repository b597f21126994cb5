import init, { zero_chain, region_grid, band_geometry } from "./pkg/quasizero_web.js";

const REGION_COLORS = [
  [221, 221, 221],
  [253, 233, 184],
  [207, 227, 247],
  [246, 208, 207],
];

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const canvas = $("plot");
const ctx = canvas.getContext("2d");
let zeros = [];

function view() {
  return { reLo: num("relo"), reHi: num("rehi"), imLo: num("imlo"), imHi: num("imhi") };
}

function toPixel(v, re, im) {
  const x = ((re - v.reLo) / (v.reHi - v.reLo)) * canvas.width;
  const y = ((v.imHi - im) / (v.imHi - v.imLo)) * canvas.height;
  return [x, y];
}

function toPlane(v, x, y) {
  return [v.reLo + (x / canvas.width) * (v.reHi - v.reLo), v.imHi - (y / canvas.height) * (v.imHi - v.imLo)];
}

function drawRegions(f, v) {
  const w = canvas.width, h = canvas.height;
  const codes = region_grid(f.k, f.aRe, f.aIm, 1, num("h"), num("radius"), v.reLo, v.reHi, v.imLo, v.imHi, w, h);
  const img = ctx.createImageData(w, h);
  for (let i = 0; i < codes.length; i++) {
    const c = REGION_COLORS[codes[i]];
    img.data.set([c[0], c[1], c[2], 255], 4 * i);
  }
  ctx.putImageData(img, 0, 0);
}

function drawBand(f, v) {
  const imMax = Math.max(Math.abs(v.imLo), Math.abs(v.imHi));
  const band = JSON.parse(band_geometry(f.k, f.aRe, f.aIm, num("h"), 1, imMax, 400));
  ctx.strokeStyle = "#a66f00";
  ctx.lineWidth = 1.5;
  for (const curve of band.curves) {
    ctx.beginPath();
    curve.points.forEach(([re, im], i) => {
      const [x, y] = toPixel(v, re, im);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
  ctx.strokeStyle = "rgba(120, 80, 0, 0.5)";
  ctx.lineWidth = 1;
  for (const cell of band.cells) {
    ctx.beginPath();
    cell.corners.forEach(([re, im], i) => {
      const [x, y] = toPixel(v, re, im);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    });
    ctx.closePath();
    ctx.stroke();
  }
  return band.cells.length;
}

function drawZeros(f, v) {
  const imMax = Math.max(Math.abs(v.imLo), Math.abs(v.imHi));
  const nuMax = Math.max(1, Math.ceil(imMax / (2 * Math.PI)) + 1);
  const data = JSON.parse(zero_chain(f.k, f.aRe, f.aIm, nuMax, true));
  zeros = [];
  for (const p of data.chain) {
    const [gx, gy] = toPixel(v, p.guess[0], p.guess[1]);
    ctx.strokeStyle = "#c33";
    ctx.beginPath();
    ctx.arc(gx, gy, 5, 0, 2 * Math.PI);
    ctx.stroke();
    zeros.push({ label: `nu=${p.nu}`, re: p.zero[0], im: p.zero[1] });
  }
  for (const [re, im] of data.small) {
    zeros.push({ label: "small", re, im });
  }
  ctx.fillStyle = "#000";
  for (const z of zeros) {
    const [x, y] = toPixel(v, z.re, z.im);
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  return data;
}

function draw() {
  const f = { k: num("k"), aRe: num("are"), aIm: num("aim") };
  const v = view();
  const status = [];
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const t0 = performance.now();
  try {
    if ($("showRegions").checked) drawRegions(f, v);
    if ($("showBand").checked) status.push(`${drawBand(f, v)} band cells`);
    if ($("showZeros").checked) {
      const data = drawZeros(f, v);
      status.push(`${data.chain.length} chain zeros (|nu| >= ${data.nu_min}), ${data.small.length} small zeros`);
    }
    status.push(`drawn in ${(performance.now() - t0).toFixed(0)} ms`);
  } catch (err) {
    status.push(`error: ${err}`);
  }
  $("status").textContent = status.join("\n");
}

canvas.addEventListener("mousemove", (ev) => {
  const v = view();
  const rect = canvas.getBoundingClientRect();
  const [re, im] = toPlane(v, ev.clientX - rect.left, ev.clientY - rect.top);
  let nearest = null;
  for (const z of zeros) {
    const d = Math.hypot(z.re - re, z.im - im);
    if (!nearest || d < nearest.d) nearest = { ...z, d };
  }
  const pos = `z = ${re.toFixed(3)} ${im < 0 ? "-" : "+"} ${Math.abs(im).toFixed(3)}i`;
  const hit = nearest && nearest.d < 2 ? `   ${nearest.label}: ${nearest.re.toPrecision(12)} + ${nearest.im.toPrecision(12)}i` : "";
  canvas.title = pos + hit;
});

$("draw").addEventListener("click", draw);
for (const id of ["k", "are", "aim", "h", "radius"]) {
  $(id).addEventListener("change", draw);
}

await init();
draw();
