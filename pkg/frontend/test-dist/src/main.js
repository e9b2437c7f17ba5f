/** Console bootstrap: one request in flight, 1s metric polling, guarded
 * red-button. On NothingPending the UI resyncs via /api/next. */
import { ApiError, Client } from "./api.js";
import { emptyStore, merge } from "./state.js";
import { renderCharts, renderRecommendation, renderSnapshot, renderWaiting } from "./render.js";
const POLL_MS = 1000;
const client = new Client("");
let store = emptyStore();
let busy = false;
let armed = false; // red-button confirm step
const recRoot = () => document.getElementById("recommendation");
const chartRoot = () => document.getElementById("charts");
const snapRoot = () => document.getElementById("last-feedback");
const noticeRoot = () => document.getElementById("notice");
async function poll() {
    try {
        const page = await client.metrics(store.nextFrom);
        store = merge(store, page.episodes);
        renderCharts(chartRoot(), store);
    }
    catch {
        noticeRoot().textContent = "metrics poll failed; retrying";
    }
}
async function fetchNext() {
    try {
        const rec = await client.next();
        renderRecommendation(recRoot(), rec);
        noticeRoot().textContent = "";
    }
    catch (err) {
        if (err instanceof ApiError && err.code === "PendingFeedback") {
            noticeRoot().textContent = "recommendation already pending";
            return;
        }
        renderWaiting(recRoot(), `no recommendation available (${String(err)})`);
    }
}
function disarmRedButton() {
    armed = false;
    const btn = document.getElementById("btn-override");
    btn.classList.remove("armed");
    btn.textContent = "Override (red button)";
}
async function sendFeedback(kind) {
    if (busy) {
        return;
    }
    busy = true;
    try {
        const snap = await client.feedback(kind);
        renderSnapshot(snapRoot(), snap);
        await poll(); // exactly one new chart point per round-trip
        await fetchNext();
    }
    catch (err) {
        if (err instanceof ApiError && err.code === "NothingPending") {
            noticeRoot().textContent = "out of sync; resyncing";
            await fetchNext();
        }
        else {
            noticeRoot().textContent = String(err);
        }
    }
    finally {
        disarmRedButton();
        busy = false;
    }
}
function wireButtons() {
    document.getElementById("btn-like").addEventListener("click", () => sendFeedback("like"));
    document.getElementById("btn-neutral").addEventListener("click", () => sendFeedback("neutral"));
    document.getElementById("btn-skip").addEventListener("click", () => sendFeedback("skipped"));
    const red = document.getElementById("btn-override");
    red.addEventListener("click", () => {
        if (!armed) {
            armed = true;
            red.classList.add("armed");
            red.textContent = "Confirm override?";
            setTimeout(disarmRedButton, 4000);
            return;
        }
        void sendFeedback("override");
    });
    document.getElementById("btn-reset").addEventListener("click", async () => {
        await client.reset();
        store = emptyStore();
        renderCharts(chartRoot(), store);
        snapRoot().replaceChildren();
        await fetchNext();
    });
}
async function start() {
    wireButtons();
    const info = await client.session();
    document.getElementById("session-id").textContent =
        `session ${info.session_id} · config ${info.config_hash.slice(0, 12)}`;
    await poll(); // reload reconstructs charts from the log
    await fetchNext();
    setInterval(poll, POLL_MS);
}
document.addEventListener("DOMContentLoaded", () => { void start(); });
