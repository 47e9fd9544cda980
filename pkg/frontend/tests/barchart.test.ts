import { describe, expect, it } from "vitest";

import type { LabelStats } from "../src/api";
import { renderBarChart } from "../src/results";

describe("label statistics bar chart", () => {
  const stats: LabelStats = {
    Pastures: { count: 12, color: "#5ab55a" },
    Airports: { count: 3, color: "#d14b4b" },
    "Sea and ocean": { count: 7, color: "#3a6fd1" },
  };

  it("draws one bar per label with the payload count and color", () => {
    const container = document.createElement("div");
    renderBarChart(container, stats);
    const bars = [...container.querySelectorAll<SVGRectElement>("rect.bar")];
    expect(bars.length).toBe(3);
    for (const bar of bars) {
      const label = bar.dataset.label!;
      expect(Number(bar.dataset.count)).toBe(stats[label].count);
      expect(bar.getAttribute("fill")).toBe(stats[label].color);
    }
  });

  it("bar widths are proportional to counts", () => {
    const container = document.createElement("div");
    renderBarChart(container, stats);
    const byLabel = new Map(
      [...container.querySelectorAll<SVGRectElement>("rect.bar")].map((bar) => [
        bar.dataset.label!,
        Number(bar.getAttribute("width")),
      ]),
    );
    const pastures = byLabel.get("Pastures")!;
    const sea = byLabel.get("Sea and ocean")!;
    expect(sea / pastures).toBeCloseTo(7 / 12, 5);
  });

  it("empty stats produce an empty chart", () => {
    const container = document.createElement("div");
    renderBarChart(container, {});
    expect(container.querySelectorAll("rect.bar").length).toBe(0);
  });
});
