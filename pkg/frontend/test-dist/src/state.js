/** Pure session-state bookkeeping: episode accumulation and poll cursors.
 * Reloading the page rebuilds this store from /api/metrics alone. */
export function emptyStore() {
    return { episodes: [], nextFrom: 0 };
}
/** Merge a metrics page into the store, deduplicating by episode index.
 * Pages always arrive ordered; overlaps are dropped, gaps are impossible
 * because the cursor equals the episode count already held. */
export function merge(store, incoming) {
    if (incoming.length === 0) {
        return store;
    }
    const have = store.episodes.length === 0
        ? -1
        : store.episodes[store.episodes.length - 1].episode;
    const fresh = incoming.filter((e) => e.episode > have);
    const episodes = store.episodes.concat(fresh);
    return { episodes, nextFrom: episodes.length };
}
export function summarize(store) {
    const last = store.episodes[store.episodes.length - 1];
    return {
        episode: last ? last.episode : null,
        loss: last ? last.loss : null,
        smoothedReward: last ? last.smoothed_reward : null,
        threshold: last ? last.threshold : null,
        fidelity: last ? last.fidelity : null,
        retrains: store.episodes.filter((e) => e.retrain_fired).length,
        humanEpisodes: store.episodes.filter((e) => e.acted).length,
    };
}
/** Episode indices where a retrain fired (chart markers). */
export function retrainMarkers(store) {
    return store.episodes.filter((e) => e.retrain_fired).map((e) => e.episode);
}
