// Hand-built SVG charts: a plain line chart with the predicted month
// highlighted in red, and signed horizontal bars for feature weights.

import type { FeatureWeight } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export interface LineChartData {
  labels: string[];
  values: number[];
  predictedLabel: string;
  predictedValue: number;
}

export function lineChart(data: LineChartData, width = 560, height = 240): SVGSVGElement {
  const svg = svgElement("svg", {
    width,
    height,
    class: "line-chart",
    viewBox: `0 0 ${width} ${height}`,
  });
  const margin = { top: 16, right: 24, bottom: 42, left: 46 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const all = [...data.values, data.predictedValue];
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  const span = hi - lo || 1;
  const n = data.values.length;

  const x = (i: number) => margin.left + (plotW * i) / n;
  const y = (v: number) => margin.top + plotH * (1 - (v - lo) / span);

  svg.appendChild(
    svgElement("line", {
      x1: margin.left,
      y1: margin.top + plotH,
      x2: width - margin.right,
      y2: margin.top + plotH,
      stroke: "#888",
    }),
  );

  const points = data.values.map((v, i) => `${x(i)},${y(v)}`).join(" ");
  svg.appendChild(
    svgElement("polyline", {
      points,
      fill: "none",
      stroke: "#36c",
      "stroke-width": 2,
      class: "history-line",
    }),
  );
  data.values.forEach((v, i) => {
    svg.appendChild(
      svgElement("circle", { cx: x(i), cy: y(v), r: 3, fill: "#36c" }),
    );
  });

  // dashed link into the predicted month, drawn distinctly in red
  const px = x(n);
  const py = y(data.predictedValue);
  svg.appendChild(
    svgElement("line", {
      x1: x(n - 1),
      y1: y(data.values[n - 1]),
      x2: px,
      y2: py,
      stroke: "#c22",
      "stroke-dasharray": "4 3",
    }),
  );
  svg.appendChild(
    svgElement("circle", {
      cx: px,
      cy: py,
      r: 5,
      fill: "#c22",
      class: "predicted-point",
    }),
  );

  data.labels.forEach((label, i) => {
    if (i % 2 !== 0 && i !== n - 1) return; // thin out tick labels
    const text = svgElement("text", {
      x: x(i),
      y: height - 8,
      "text-anchor": "middle",
      "font-size": 9,
      transform: `rotate(-30 ${x(i)} ${height - 8})`,
    });
    text.textContent = label;
    svg.appendChild(text);
  });
  const predictedTick = svgElement("text", {
    x: px,
    y: height - 8,
    "text-anchor": "middle",
    "font-size": 9,
    fill: "#c22",
    class: "predicted-tick",
    transform: `rotate(-30 ${px} ${height - 8})`,
  });
  predictedTick.textContent = data.predictedLabel;
  svg.appendChild(predictedTick);

  for (const v of [lo, hi]) {
    const text = svgElement("text", {
      x: margin.left - 6,
      y: y(v) + 3,
      "text-anchor": "end",
      "font-size": 9,
    });
    text.textContent = v.toFixed(1);
    svg.appendChild(text);
  }
  return svg;
}

export function coefficientChart(
  features: FeatureWeight[],
  width = 420,
  barHeight = 18,
): SVGSVGElement {
  const height = features.length * barHeight + 8;
  const svg = svgElement("svg", {
    width,
    height,
    class: "coef-chart",
    viewBox: `0 0 ${width} ${height}`,
  });
  const labelW = 72;
  const plotW = width - labelW - 60;
  const mid = labelW + plotW / 2;
  const top = Math.max(...features.map((f) => Math.abs(f.coefficient)), 1e-12);

  svg.appendChild(
    svgElement("line", { x1: mid, y1: 2, x2: mid, y2: height - 2, stroke: "#aaa" }),
  );
  features.forEach((feature, i) => {
    const yPos = 4 + i * barHeight;
    const w = (Math.abs(feature.coefficient) / top) * (plotW / 2);
    const positive = feature.coefficient >= 0;
    const bar = svgElement("rect", {
      x: positive ? mid : mid - w,
      y: yPos,
      width: Math.max(w, 0.5),
      height: barHeight - 5,
      fill: positive ? "#2a7" : "#c55",
      class: "coef-bar",
    });
    bar.setAttribute("data-feature", feature.feature_label);
    bar.setAttribute("data-coefficient", String(feature.coefficient));
    svg.appendChild(bar);

    const label = svgElement("text", {
      x: 2,
      y: yPos + barHeight - 8,
      "font-size": 10,
    });
    label.textContent = feature.feature_label;
    svg.appendChild(label);

    const value = svgElement("text", {
      x: positive ? mid + w + 4 : mid - w - 4,
      y: yPos + barHeight - 8,
      "font-size": 10,
      "text-anchor": positive ? "start" : "end",
    });
    value.textContent = feature.coefficient.toFixed(3);
    svg.appendChild(value);
  });
  return svg;
}
