import { beforeEach, describe, expect, it } from "vitest";

import {
  QueryResponseSchema,
  SimilarResponseSchema,
  type QueryResponse,
  type SimilarResponse,
} from "../src/api";
import { ResultPanel, type ResultActions } from "../src/results";
import { TabManager } from "../src/state";
import queryFixture from "./fixtures/query-response.json";
import similarFixture from "./fixtures/similar-response.json";

const queryResponse: QueryResponse = QueryResponseSchema.parse(queryFixture);
const similarResponse: SimilarResponse = SimilarResponseSchema.parse(similarFixture);

const noopActions: ResultActions = {
  onSimilar: () => {},
  onNavigate: () => {},
  onPinpoint: () => {},
  onDownloadZip: () => {},
  onAddToCart: () => {},
  onDownloadNames: () => {},
  onRenderToggle: () => {},
};

describe("tab manager", () => {
  it("starts with the primary patches/statistics pair", () => {
    const tabs = new TabManager();
    expect(tabs.tabs.map((t) => t.kind)).toEqual(["patches", "stats"]);
    expect(tabs.activeId).toBe("primary-patches");
  });

  it("each similarity search opens exactly two new tabs", () => {
    const tabs = new TabManager();
    tabs.openSimilarityPair("patch_007");
    expect(tabs.tabs.length).toBe(4);
    expect(tabs.tabs[2].kind).toBe("patches");
    expect(tabs.tabs[3].kind).toBe("stats");
    tabs.openSimilarityPair("patch_008");
    expect(tabs.tabs.length).toBe(6);
  });

  it("cannot close the primary pair", () => {
    const tabs = new TabManager();
    tabs.close("primary-patches");
    expect(tabs.tabs.length).toBe(2);
  });
});

describe("result panel", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("similarity opens two tabs with the query image displayed first", () => {
    const panel = new ResultPanel(document.body, noopActions);
    panel.showPrimary(queryResponse);
    const before = panel.tabs.tabs.length;
    const queryRecord = similarResponse.neighbors[0].record;
    panel.showSimilarity(queryRecord.patch_name, similarResponse, queryRecord);
    expect(panel.tabs.tabs.length).toBe(before + 2);

    const cards = [...document.body.querySelectorAll<HTMLElement>(".patch-card")];
    expect(cards.length).toBeGreaterThan(0);
    expect(cards[0].classList.contains("query-card")).toBe(true);
    expect(cards[0].dataset.name).toBe(queryRecord.patch_name);
  });

  it("render toggle is disabled when the server flags the 1000-image cap", () => {
    const overCap: QueryResponse = {
      ...queryResponse,
      total: 1400,
      render_enabled: false,
      render_over_cap: true,
      rendered: undefined,
    };
    const panel = new ResultPanel(document.body, noopActions);
    panel.showPrimary(overCap);
    const toggle = document.body.querySelector<HTMLInputElement>(".render-toggle")!;
    expect(toggle.disabled).toBe(true);
    expect(toggle.checked).toBe(false);
  });

  it("total count and page cards come straight from the response", () => {
    const panel = new ResultPanel(document.body, noopActions);
    panel.showPrimary(queryResponse);
    const total = document.body.querySelector<HTMLElement>(".total-count")!;
    expect(Number(total.dataset.total)).toBe(queryResponse.total);
    const cards = document.body.querySelectorAll(".patch-card");
    expect(cards.length).toBe(queryResponse.page.length);
  });

  it("five action buttons per card", () => {
    const panel = new ResultPanel(document.body, noopActions);
    panel.showPrimary(queryResponse);
    const card = document.body.querySelector(".patch-card")!;
    expect(card.querySelectorAll(".card-btn").length).toBe(5);
  });

  it("stats tab renders the bar chart of the response payload", () => {
    const panel = new ResultPanel(document.body, noopActions);
    panel.showPrimary(queryResponse);
    panel.tabs.activate("primary-stats");
    const bars = document.body.querySelectorAll("rect.bar");
    expect(bars.length).toBe(Object.keys(queryResponse.stats).length);
  });
});
