/** Chart geometry: pure functions from series to SVG fragments.
 * The only arithmetic the client performs is scaling for display. */

export interface ChartSpec {
  width: number;
  height: number;
  yMin: number;
  yMax: number;
  tail?: number;           // show at most this many trailing points
}

export function visibleSlice<T>(series: T[], tail?: number): T[] {
  if (!tail || series.length <= tail) {
    return series;
  }
  return series.slice(series.length - tail);
}

export function xScale(index: number, count: number, width: number): number {
  if (count <= 1) {
    return 0;
  }
  return (index / (count - 1)) * width;
}

export function yScale(value: number, spec: ChartSpec): number {
  const span = spec.yMax - spec.yMin;
  const clamped = Math.min(spec.yMax, Math.max(spec.yMin, value));
  return spec.height - ((clamped - spec.yMin) / span) * spec.height;
}

/** SVG polyline "points" attribute for a numeric series. */
export function polylinePoints(series: number[], spec: ChartSpec): string {
  const shown = visibleSlice(series, spec.tail);
  return shown
    .map((v, i) => `${xScale(i, shown.length, spec.width).toFixed(2)},${yScale(v, spec).toFixed(2)}`)
    .join(" ");
}

/** Vertical marker x-positions for episode indices (e.g. retrain events). */
export function markerXs(markers: number[], total: number, spec: ChartSpec): number[] {
  const shown = Math.min(total, spec.tail ?? total);
  const offset = total - shown;
  return markers
    .filter((m) => m >= offset)
    .map((m) => xScale(m - offset, shown, spec.width));
}

/** Rolling mean over the trailing `window` points, one value per point. */
export function rollingMean(series: number[], window: number): number[] {
  const out: number[] = [];
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
