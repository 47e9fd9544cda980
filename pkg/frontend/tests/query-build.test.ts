import { beforeEach, describe, expect, it } from "vitest";

import { HierarchySchema, type HierarchyData } from "../src/api";
import { QueryPanel } from "../src/querypanel";
import hierarchyFixture from "./fixtures/hierarchy-response.json";

const hierarchy: HierarchyData = HierarchySchema.parse(hierarchyFixture);

const FOREST_LEAVES = ["Broad-leaved forest", "Coniferous forest", "Mixed forest"];

describe("query panel", () => {
  let panel: QueryPanel;

  beforeEach(() => {
    document.body.innerHTML = "";
    panel = new QueryPanel(document.body, hierarchy);
  });

  it("label switch starts on, meaning no label filtering", () => {
    const request = panel.buildQuery();
    expect(request.label_predicate).toEqual({ operator: "none", selected: [] });
  });

  it("selecting the level-2 Forest group expands to its three leaves", () => {
    panel.setLabelFiltering(true);
    panel.setOperator("some");
    panel.checkNode("Forest", 2);
    const request = panel.buildQuery();
    expect(request.label_predicate?.operator).toBe("some");
    expect(request.label_predicate?.selected).toEqual([...FOREST_LEAVES].sort());
  });

  it("level-1 selection covers every leaf underneath", () => {
    panel.setLabelFiltering(true);
    panel.setOperator("at_least_and_more");
    panel.checkNode("Water bodies", 1);
    const selected = panel.buildQuery().label_predicate?.selected ?? [];
    expect(selected).toContain("Sea and ocean");
    expect(selected).toContain("Water courses");
  });

  it("drawn rectangle equals typed rectangle, request for request", () => {
    const rect = {
      type: "rectangle" as const,
      min_lon: -9.3,
      min_lat: 36.8,
      max_lon: -8.4,
      max_lat: 37.4,
    };
    panel.setDrawnShape(rect);
    const drawn = panel.buildQuery();

    document.body.innerHTML = "";
    const typedPanel = new QueryPanel(document.body, hierarchy);
    const typeSelect = document.body.querySelector<HTMLSelectElement>(".shape-type")!;
    typeSelect.value = "rectangle";
    typeSelect.dispatchEvent(new Event("change"));
    for (const [field, value] of Object.entries(rect)) {
      if (field === "type") continue;
      const input = document.body.querySelector<HTMLInputElement>(`.coord-${field}`)!;
      input.value = String(value);
      input.dispatchEvent(new Event("input"));
    }
    const typed = typedPanel.buildQuery();
    expect(typed).toEqual(drawn);
  });

  it("season and satellite filters only appear when checked", () => {
    expect(panel.buildQuery().seasons).toBeUndefined();
    expect(panel.buildQuery().satellites).toBeUndefined();
    document.body.querySelector<HTMLInputElement>('.seasons input[value="summer"]')!.click();
    document.body.querySelector<HTMLInputElement>('.satellites input[value="S2"]')!.click();
    const request = panel.buildQuery();
    expect(request.seasons).toEqual(["summer"]);
    expect(request.satellites).toEqual(["S2"]);
  });

  it("render request flag carried through", () => {
    document.body.querySelector<HTMLInputElement>(".render-request")!.click();
    expect(panel.buildQuery().render).toBe(true);
  });
});
