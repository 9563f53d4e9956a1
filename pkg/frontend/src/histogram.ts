/** 256-bin histogram chart for the visualization pane. */

import type { HistogramDoc } from "./types.js";

export interface HistogramSeries {
  label: string;
  color: string;
  bins: number[];
}

export interface HistogramChartModel {
  series: HistogramSeries[];
  maxCount: number;
  total: number;
  binSums: number[];
}

const GRAY_COLORS = ["#555555"];
const RGB_COLORS = ["#d62728", "#2ca02c", "#1f77b4"];
const RGB_LABELS = ["red", "green", "blue"];

export function chartModel(doc: HistogramDoc): HistogramChartModel {
  const colors = doc.channels === 1 ? GRAY_COLORS : RGB_COLORS;
  const labels = doc.channels === 1 ? ["gray"] : RGB_LABELS;
  const series = doc.bins.map((bins, i) => ({
    label: labels[i] ?? `channel ${i}`,
    color: colors[i % colors.length],
    bins,
  }));
  const maxCount = Math.max(1, ...doc.bins.flat());
  const binSums = doc.bins.map((bins) => bins.reduce((a, b) => a + b, 0));
  return { series, maxCount, total: doc.total, binSums };
}

/** Draw overlaid per-channel bar series onto a 2d canvas. */
export function renderHistogram(canvas: HTMLCanvasElement, doc: HistogramDoc): void {
  const model = chartModel(doc);
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const barWidth = width / 256;
  ctx.globalAlpha = model.series.length > 1 ? 0.55 : 1.0;
  for (const series of model.series) {
    ctx.fillStyle = series.color;
    for (let v = 0; v < 256; v++) {
      const h = (series.bins[v] / model.maxCount) * (height - 14);
      if (h > 0) {
        ctx.fillRect(v * barWidth, height - h, Math.max(1, barWidth - 0.2), h);
      }
    }
  }
  ctx.globalAlpha = 1.0;
  ctx.fillStyle = "#333";
  ctx.font = "10px sans-serif";
  ctx.fillText(`${model.total} px`, 4, 10);
}
