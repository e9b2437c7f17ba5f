import assert from "node:assert/strict";
import { test } from "node:test";

import { emptyStore, merge, retrainMarkers, summarize } from "../src/state.js";
import type { EpisodePoint } from "../src/api.js";

function pt(episode: number, over: Partial<EpisodePoint> = {}): EpisodePoint {
  return {
    episode,
    loss: 0.3,
    smoothed_reward: 0.0,
    threshold: 0.7,
    fidelity: 1.0,
    kind: "skipped",
    retrain_fired: false,
    acted: false,
    ...over,
  };
}

test("merge appends new episodes and advances the cursor", () => {
  let store = emptyStore();
  store = merge(store, [pt(0), pt(1)]);
  assert.equal(store.episodes.length, 2);
  assert.equal(store.nextFrom, 2);
});

test("merge deduplicates overlapping pages", () => {
  let store = emptyStore();
  store = merge(store, [pt(0), pt(1), pt(2)]);
  store = merge(store, [pt(1), pt(2), pt(3)]);
  assert.deepEqual(store.episodes.map((e) => e.episode), [0, 1, 2, 3]);
  assert.equal(store.nextFrom, 4);
});

test("merge of empty page is identity", () => {
  const store = merge(emptyStore(), []);
  assert.equal(store.episodes.length, 0);
  assert.equal(store.nextFrom, 0);
});

test("summarize reads the latest point and counts retrains", () => {
  let store = emptyStore();
  store = merge(store, [
    pt(0, { loss: 0.5, acted: true, kind: "neutral" }),
    pt(1, { retrain_fired: true }),
    pt(2, { loss: 0.0, smoothed_reward: 0.2, fidelity: 0.9, threshold: 0.8 }),
  ]);
  const s = summarize(store);
  assert.equal(s.episode, 2);
  assert.equal(s.loss, 0.0);
  assert.equal(s.threshold, 0.8);
  assert.equal(s.retrains, 1);
  assert.equal(s.humanEpisodes, 1);
});

test("summarize on empty store is null-safe", () => {
  const s = summarize(emptyStore());
  assert.equal(s.episode, null);
  assert.equal(s.retrains, 0);
});

test("retrainMarkers lists firing episodes", () => {
  let store = emptyStore();
  store = merge(store, [pt(0), pt(1, { retrain_fired: true }), pt(2), pt(3, { retrain_fired: true })]);
  assert.deepEqual(retrainMarkers(store), [1, 3]);
});
