/** Chart geometry: pure functions from series to SVG fragments.
 * The only arithmetic the client performs is scaling for display. */
export function visibleSlice(series, tail) {
    if (!tail || series.length <= tail) {
        return series;
    }
    return series.slice(series.length - tail);
}
export function xScale(index, count, width) {
    if (count <= 1) {
        return 0;
    }
    return (index / (count - 1)) * width;
}
export function yScale(value, spec) {
    const span = spec.yMax - spec.yMin;
    const clamped = Math.min(spec.yMax, Math.max(spec.yMin, value));
    return spec.height - ((clamped - spec.yMin) / span) * spec.height;
}
/** SVG polyline "points" attribute for a numeric series. */
export function polylinePoints(series, spec) {
    const shown = visibleSlice(series, spec.tail);
    return shown
        .map((v, i) => `${xScale(i, shown.length, spec.width).toFixed(2)},${yScale(v, spec).toFixed(2)}`)
        .join(" ");
}
/** Vertical marker x-positions for episode indices (e.g. retrain events). */
export function markerXs(markers, total, spec) {
    const shown = Math.min(total, spec.tail ?? total);
    const offset = total - shown;
    return markers
        .filter((m) => m >= offset)
        .map((m) => xScale(m - offset, shown, spec.width));
}
/** Rolling mean over the trailing `window` points, one value per point. */
export function rollingMean(series, window) {
    const out = [];
    let acc = 0;
    for (let i = 0; i < series.length; i++) {
        acc += series[i];
        if (i >= window) {
            acc -= series[i - window];
        }
        out.push(acc / Math.min(i + 1, window));
    }
    return out;
}
