/** DOM rendering: recommendation card, feedback controls, metric charts.
 * Every displayed figure is server-sourced; this file only formats. */
import { polylinePoints, markerXs, rollingMean } from "./charts.js";
import { retrainMarkers, summarize } from "./state.js";
const SPEC = { width: 560, height: 120, yMin: 0, yMax: 1, tail: 300 };
const REWARD_SPEC = { ...SPEC, yMin: -1, yMax: 1 };
function el(tag, cls, text) {
    const node = document.createElement(tag);
    if (cls)
        node.className = cls;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
export function renderRecommendation(root, rec) {
    root.replaceChildren();
    const card = el("div", "card");
    card.appendChild(el("h2", undefined, `Recommendation — scenario ${rec.scenario_id}`));
    const gauge = el("div", "gauge");
    const scorePct = (rec.score * 100).toFixed(1);
    const thrPct = (rec.threshold * 100).toFixed(0);
    gauge.innerHTML =
        `<div class="gauge-bar"><div class="gauge-fill" style="width:${scorePct}%"></div>` +
            `<div class="gauge-threshold" style="left:${thrPct}%"></div></div>` +
            `<div class="gauge-label">score ${rec.score.toFixed(3)} vs threshold ${rec.threshold.toFixed(1)}</div>`;
    card.appendChild(gauge);
    const feats = el("div", "features");
    rec.features.forEach((v, i) => {
        const row = el("div", "feature-row");
        row.appendChild(el("span", "feature-name", `f${i}`));
        const bar = el("div", "feature-bar");
        const fill = el("div", "feature-fill");
        fill.style.width = `${(v * 100).toFixed(1)}%`;
        bar.appendChild(fill);
        row.appendChild(bar);
        row.appendChild(el("span", "feature-val", v.toFixed(2)));
        feats.appendChild(row);
    });
    card.appendChild(feats);
    card.appendChild(el("p", "justification", rec.threshold_justification));
    card.appendChild(el("p", "spe", rec.spe_summary));
    const trace = el("ul", "trace");
    rec.explanation_trace.forEach((line) => trace.appendChild(el("li", undefined, line)));
    card.appendChild(trace);
    root.appendChild(card);
}
export function renderWaiting(root, message) {
    root.replaceChildren(el("p", "waiting", message));
}
export function renderSnapshot(root, snap) {
    const lines = [
        `episode ${snap.episode}: ${snap.kind} -> loss ${snap.loss.toFixed(2)}, ` +
            `score ${snap.score_before.toFixed(3)} -> ${snap.score_after.toFixed(3)}`,
        `smoothed reward ${snap.smoothed_reward.toFixed(3)}, fidelity ${snap.fidelity.toFixed(3)}` +
            (snap.retrain_fired ? " — RETRAIN FIRED" : ""),
    ];
    root.replaceChildren(...lines.map((t) => el("p", "snap-line", t)));
}
function chartSvg(series, spec, cls, markers, total) {
    const points = polylinePoints(series, spec);
    const marks = markerXs(markers, total, spec)
        .map((x) => `<line x1="${x.toFixed(1)}" y1="0" x2="${x.toFixed(1)}" ` +
        `y2="${spec.height}" class="marker"/>`)
        .join("");
    return `<svg viewBox="0 0 ${spec.width} ${spec.height}" class="chart ${cls}">` +
        `${marks}<polyline points="${points}" fill="none"/></svg>`;
}
export function renderCharts(root, store) {
    const markers = retrainMarkers(store);
    const total = store.episodes.length;
    const loss = store.episodes.map((e) => e.loss);
    const panels = [
        ["alignment loss (rolling mean, 20)", rollingMean(loss, 20), SPEC],
        ["smoothed reward", store.episodes.map((e) => e.smoothed_reward), REWARD_SPEC],
        ["selected threshold", store.episodes.map((e) => e.threshold), SPEC],
        ["monitoring fidelity", store.episodes.map((e) => e.fidelity), SPEC],
    ];
    root.replaceChildren();
    for (const [title, series, spec] of panels) {
        const panel = el("div", "panel");
        panel.appendChild(el("h3", undefined, title));
        panel.insertAdjacentHTML("beforeend", chartSvg(series, spec, "line", markers, total));
        root.appendChild(panel);
    }
    const s = summarize(store);
    const status = el("p", "status", s.episode === null
        ? "no episodes yet"
        : `episode ${s.episode} · loss ${s.loss?.toFixed(2)} · reward ${s.smoothedReward?.toFixed(3)} ` +
            `· τ ${s.threshold?.toFixed(1)} · fidelity ${s.fidelity?.toFixed(3)} · retrains ${s.retrains}`);
    root.appendChild(status);
}
