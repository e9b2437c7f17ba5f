/** End-to-end acceptance against the real backend: a live server is spawned
 * and the console's client/state modules drive it exactly as the UI would.
 *
 * B1: one human Like produces exactly one new episode record and one new
 *     chart point within a poll interval (2s budget).
 * B2: sustained Overrides push the monitor window over its threshold, a
 *     retrain marker appears, and the session log passes the replay audit.
 */
import assert from "node:assert/strict";
import { after, before, test } from "node:test";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { Client } from "../src/api.js";
import { emptyStore, merge, retrainMarkers, type Store } from "../src/state.js";

const PORT = 8765 + (process.pid % 500);
const BASE = `http://localhost:${PORT}`;
const LOG_DIR = mkdtempSync(join(tmpdir(), "alignloop-console-"));
const LOG = join(LOG_DIR, "live.jsonl");

let server: ChildProcess;
const client = new Client(BASE);

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 50; i++) {
    try {
      await client.session();
      return;
    } catch {
      await new Promise((r) => setTimeout(r, 200));
    }
  }
  throw new Error("backend did not come up");
}

before(async () => {
  server = spawn("python3", [
    "-m", "alignloop.cli", "serve",
    "--port", String(PORT), "--seed", "7", "--log", LOG,
  ], { stdio: "ignore" });
  await waitForServer();
});

after(() => {
  server.kill("SIGINT");
});

test("B1: one Like yields exactly one record and one chart point in a poll", async () => {
  await client.next();
  // baseline after surfacing: auto-resolved skip episodes belong to /api/next
  let store: Store = emptyStore();
  store = merge(store, (await client.metrics(0)).episodes);
  const baseline = store.episodes.length;

  const started = Date.now();
  const snap = await client.feedback("like");
  assert.equal(snap.kind, "like");
  assert.equal(snap.loss, 0.0);

  // one poll round-trip, inside the 2s interval budget
  store = merge(store, (await client.metrics(store.nextFrom)).episodes);
  const elapsed = Date.now() - started;
  assert.ok(elapsed < 2000, `round-trip took ${elapsed}ms`);
  assert.equal(store.episodes.length, baseline + 1);
  const last = store.episodes[store.episodes.length - 1];
  assert.equal(last.kind, "like");
  assert.equal(last.loss, 0.0);
});

test("B2: sustained overrides fire a retrain marker and the log audits clean", async () => {
  let fired = false;
  for (let i = 0; i < 80 && !fired; i++) {
    await client.next();
    const snap = await client.feedback("override");
    fired = snap.retrain_fired;
  }
  assert.ok(fired, "no retrain after 80 overrides");

  let store: Store = emptyStore();
  store = merge(store, (await client.metrics(0)).episodes);
  assert.ok(retrainMarkers(store).length >= 1, "no marker in the chart data");

  const replayed = spawnSync("python3", ["-m", "alignloop.cli", "replay", "--log", LOG],
                             { encoding: "utf-8" });
  assert.equal(replayed.status, 0, replayed.stdout + replayed.stderr);
  assert.match(replayed.stdout, /audit: PASS/);
});

test("double submit: second call reports NothingPending and UI can resync", async () => {
  await client.next();
  await client.feedback("neutral");
  await assert.rejects(client.feedback("neutral"), /NothingPending/);
  const rec = await client.next();   // resync path
  assert.ok(rec.scenario_id);
  await client.feedback("skipped");
});
