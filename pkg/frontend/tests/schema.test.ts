// Contract tests: recorded server responses must satisfy the client schemas,
// so every field the UI displays is provably present on the wire.

import { describe, expect, it } from "vitest";

import {
  HierarchySchema,
  QueryResponseSchema,
  SimilarResponseSchema,
} from "../src/api";
import hierarchyFixture from "./fixtures/hierarchy-response.json";
import queryFixture from "./fixtures/query-response.json";
import similarFixture from "./fixtures/similar-response.json";

describe("recorded response contracts", () => {
  it("query response parses and is internally consistent", () => {
    const parsed = QueryResponseSchema.parse(queryFixture);
    expect(parsed.page.length).toBeLessThanOrEqual(50);
    expect(parsed.total).toBeGreaterThanOrEqual(parsed.page.length === 50 ? 50 : 0);
    if (parsed.render_enabled) {
      expect(parsed.rendered).toBeDefined();
      expect(parsed.rendered!.length).toBe(parsed.page.length);
    }
    for (const record of parsed.page) {
      expect(record.bounds.min_lon).toBeLessThanOrEqual(record.bounds.max_lon);
      expect(record.bounds.min_lat).toBeLessThanOrEqual(record.bounds.max_lat);
      expect(record.labels.length).toBeGreaterThan(0);
    }
  });

  it("similar response parses with sorted distances", () => {
    const parsed = SimilarResponseSchema.parse(similarFixture);
    const distances = parsed.neighbors.map((n) => n.distance);
    expect([...distances].sort((a, b) => a - b)).toEqual(distances);
  });

  it("hierarchy response parses with a color per leaf", () => {
    const parsed = HierarchySchema.parse(hierarchyFixture);
    const leaves = parsed.levels.flatMap((l1) => l1.children.flatMap((l2) => l2.leaves));
    for (const leaf of leaves) {
      expect(parsed.colors[leaf]).toMatch(/^#[0-9a-f]{6}$/);
    }
  });

  it("rejects responses with missing fields", () => {
    expect(() => QueryResponseSchema.parse({ total: 3 })).toThrow();
    expect(() =>
      SimilarResponseSchema.parse({ query_ref: "x", neighbors: [{ patch_name: "y" }] }),
    ).toThrow();
  });
});
