import init, { ber_curves, lambda_curve, snr_density, simulate_ber }
  from "../pkg/ancdm_wasm.js";

const SNR_MIN = 10, SNR_MAX = 40;

function axes(canvas, xlim, ylim, opts) {
  const ctx = canvas.getContext("2d");
  const m = { l: 64, r: 16, t: 12, b: 40 };
  const w = canvas.width - m.l - m.r, h = canvas.height - m.t - m.b;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const xs = x => m.l + w * (tx(x) - tx(xlim[0])) / (tx(xlim[1]) - tx(xlim[0]));
  const ys = y => m.t + h * (1 - (ty(y) - ty(ylim[0])) / (ty(ylim[1]) - ty(ylim[0])));
  function tx(v) { return opts.logx ? Math.log10(v) : v; }
  function ty(v) { return opts.logy ? Math.log10(v) : v; }

  ctx.strokeStyle = "#888"; ctx.fillStyle = "#888";
  ctx.font = "12px system-ui"; ctx.lineWidth = 1;
  ctx.strokeRect(m.l, m.t, w, h);
  const xticks = opts.xticks ?? 6;
  for (let i = 0; i <= xticks; i++) {
    const v = opts.logx
      ? Math.pow(10, tx(xlim[0]) + i * (tx(xlim[1]) - tx(xlim[0])) / xticks)
      : xlim[0] + i * (xlim[1] - xlim[0]) / xticks;
    const px = xs(v);
    ctx.beginPath(); ctx.moveTo(px, m.t + h); ctx.lineTo(px, m.t + h + 4); ctx.stroke();
    ctx.textAlign = "center";
    ctx.fillText(opts.logx ? v.toPrecision(2) : v.toFixed(0), px, m.t + h + 16);
  }
  if (opts.logy) {
    const lo = Math.ceil(ty(ylim[0])), hi = Math.floor(ty(ylim[1]));
    for (let e = lo; e <= hi; e++) {
      const py = ys(Math.pow(10, e));
      ctx.beginPath(); ctx.moveTo(m.l - 4, py); ctx.lineTo(m.l, py); ctx.stroke();
      ctx.textAlign = "right";
      ctx.fillText("1e" + e, m.l - 7, py + 4);
      ctx.save(); ctx.strokeStyle = "#8882";
      ctx.beginPath(); ctx.moveTo(m.l, py); ctx.lineTo(m.l + w, py); ctx.stroke();
      ctx.restore();
    }
  } else {
    for (let i = 0; i <= 4; i++) {
      const v = ylim[0] + i * (ylim[1] - ylim[0]) / 4;
      const py = ys(v);
      ctx.textAlign = "right";
      ctx.fillText(v.toPrecision(2), m.l - 7, py + 4);
    }
  }
  ctx.textAlign = "center";
  ctx.fillText(opts.xlabel, m.l + w / 2, canvas.height - 6);
  ctx.save();
  ctx.translate(14, m.t + h / 2); ctx.rotate(-Math.PI / 2);
  ctx.fillText(opts.ylabel, 0, 0);
  ctx.restore();
  return { ctx, xs, ys, xlim, ylim };
}

function line(ax, x, y, color, dash = []) {
  const { ctx, xs, ys } = ax;
  ctx.strokeStyle = color; ctx.lineWidth = 1.8; ctx.setLineDash(dash);
  ctx.beginPath();
  let pen = false;
  for (let i = 0; i < x.length; i++) {
    if (y[i] == null || y[i] <= 0) { pen = false; continue; }
    const px = xs(x[i]), py = ys(Math.max(y[i], ax.ylim[0]));
    pen ? ctx.lineTo(px, py) : ctx.moveTo(px, py);
    pen = true;
  }
  ctx.stroke(); ctx.setLineDash([]);
}

function dots(ax, x, y, color) {
  const { ctx, xs, ys } = ax;
  ctx.fillStyle = color;
  for (let i = 0; i < x.length; i++) {
    if (y[i] == null || y[i] <= 0) continue;
    ctx.beginPath();
    ctx.arc(xs(x[i]), ys(Math.max(y[i], ax.ylim[0])), 3.5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function legend(ax, entries) {
  const { ctx } = ax;
  let y = 26;
  ctx.font = "12px system-ui"; ctx.textAlign = "left";
  for (const [label, color] of entries) {
    ctx.fillStyle = color;
    ctx.fillRect(76, y - 8, 18, 3);
    ctx.fillStyle = "#888";
    ctx.fillText(label, 100, y - 2);
    y += 16;
  }
}

let simCache = null;

function drawBer() {
  const mode = document.getElementById("mode").value;
  const lambda = mode === "optimal" ? 0.5 : 1.0;
  const data = JSON.parse(ber_curves(lambda, SNR_MIN, SNR_MAX, 120));
  const ax = axes(document.getElementById("ber"), [SNR_MIN, SNR_MAX], [1e-5, 1], {
    logy: true, xlabel: "per-source SNR psi_s (dB)", ylabel: "bit error rate",
  });
  line(ax, data.snr_db, data.asymptotic, "#d33", [6, 4]);
  line(ax, data.snr_db, data.numeric, "#36c");
  const entries = [["high-SNR closed form", "#d33"], ["numeric integral", "#36c"]];
  if (simCache && simCache.mode === mode) {
    dots(ax, simCache.snr_db, simCache.differential, "#093");
    dots(ax, simCache.snr_db, simCache.genie, "#c90");
    dots(ax, simCache.snr_db, simCache.coherent, "#909");
    entries.push(["sim: differential", "#093"], ["sim: genie", "#c90"], ["sim: coherent", "#909"]);
  }
  legend(ax, entries);
}

function drawLambda() {
  const exp = parseFloat(document.getElementById("n0").value);
  document.getElementById("n0v").textContent = exp.toFixed(1);
  const data = JSON.parse(lambda_curve(Math.pow(10, exp), 3.0, 160));
  const lo = Math.min(...data.ber), hi = Math.max(...data.ber);
  const ax = axes(document.getElementById("lambda"), [0.05, 20], [lo / 1.5, hi * 1.5], {
    logx: true, logy: true, xticks: 5,
    xlabel: "power ratio lambda = p_s / p_r", ylabel: "high-SNR BER",
  });
  line(ax, data.lambda, data.ber, "#36c");
  const bmin = Math.min(...data.ber);
  dots(ax, [data.optimal_lambda], [bmin], "#d33");
  legend(ax, [["asymptotic BER under 2p_s + p_r = p", "#36c"],
              ["optimum at lambda = 0.5", "#d33"]]);
}

function drawPdf() {
  const snr = parseFloat(document.getElementById("snr").value);
  const lam = Math.pow(10, parseFloat(document.getElementById("lam").value));
  document.getElementById("snrv").textContent = snr.toFixed(0);
  document.getElementById("lamv").textContent = lam.toFixed(2);
  const data = JSON.parse(snr_density(lam, snr, 240));
  const peak = Math.max(...data.pdf, ...data.approx);
  const ax = axes(document.getElementById("pdf"), [0, data.x[data.x.length - 1]], [0, peak * 1.1], {
    xlabel: "instantaneous differential SNR", ylabel: "density", xticks: 6,
  });
  line(ax, data.x, data.pdf, "#36c");
  line(ax, data.x, data.approx, "#d33", [6, 4]);
  legend(ax, [["exact density", "#36c"], ["exponential approximation", "#d33"]]);
}

async function main() {
  await init();
  drawBer();
  drawLambda();
  drawPdf();
  document.getElementById("mode").addEventListener("change", () => { simCache = null; drawBer(); });
  document.getElementById("n0").addEventListener("input", drawLambda);
  document.getElementById("snr").addEventListener("input", drawPdf);
  document.getElementById("lam").addEventListener("input", drawPdf);
  document.getElementById("simulate").addEventListener("click", () => {
    const mode = document.getElementById("mode").value;
    const status = document.getElementById("status");
    status.textContent = "simulating…";
    // let the status paint before the synchronous wasm call
    setTimeout(() => {
      const t0 = performance.now();
      const out = JSON.parse(simulate_ber(mode, 12, 36, 9, 42, 2_000_000));
      simCache = { mode, ...out };
      status.textContent = `done in ${((performance.now() - t0) / 1000).toFixed(1)} s`;
      drawBer();
    }, 30);
  });
}

main();
