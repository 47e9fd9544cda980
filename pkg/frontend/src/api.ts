// Typed client for the archive API. Every response is validated against the
// zod schemas below before any view code sees it, so the UI can only display
// values that actually came over the wire.

import { z } from "zod";

export const BoundsSchema = z.object({
  min_lon: z.number(),
  min_lat: z.number(),
  max_lon: z.number(),
  max_lat: z.number(),
});

export const PatchRecordSchema = z.object({
  patch_name: z.string(),
  bounds: BoundsSchema,
  labels: z.array(z.string()),
  acquisition_date: z.string(),
  season: z.enum(["winter", "spring", "summer", "autumn"]),
  satellite: z.enum(["S1", "S2"]),
  country: z.string(),
});

export const LabelStatsSchema = z.record(
  z.string(),
  z.object({
    count: z.number().int().nonnegative(),
    color: z.string().regex(/^#[0-9a-f]{6}$/),
  }),
);

export const RenderedRefSchema = z.object({
  patch_name: z.string(),
  url: z.string(),
  bounds: BoundsSchema,
});

export const QueryResponseSchema = z.object({
  total: z.number().int().nonnegative(),
  page: z.array(PatchRecordSchema),
  stats: LabelStatsSchema,
  render_enabled: z.boolean(),
  render_over_cap: z.boolean(),
  rendered: z.array(RenderedRefSchema).optional(),
});

export const NeighborSchema = z.object({
  patch_name: z.string(),
  distance: z.number().int().nonnegative(),
  record: PatchRecordSchema,
});

export const SimilarResponseSchema = z.object({
  query_ref: z.string(),
  neighbors: z.array(NeighborSchema),
  stats: LabelStatsSchema,
});

export const HierarchySchema = z.object({
  levels: z.array(
    z.object({
      name: z.string(),
      children: z.array(z.object({ name: z.string(), leaves: z.array(z.string()) })),
    }),
  ),
  colors: z.record(z.string(), z.string()),
});

export const CartSchema = z.object({ session: z.string(), names: z.array(z.string()) });

export type Bounds = z.infer<typeof BoundsSchema>;
export type PatchRecord = z.infer<typeof PatchRecordSchema>;
export type LabelStats = z.infer<typeof LabelStatsSchema>;
export type RenderedRef = z.infer<typeof RenderedRefSchema>;
export type QueryResponse = z.infer<typeof QueryResponseSchema>;
export type SimilarResponse = z.infer<typeof SimilarResponseSchema>;
export type HierarchyData = z.infer<typeof HierarchySchema>;

export type ShapeWire =
  | { type: "rectangle"; min_lon: number; min_lat: number; max_lon: number; max_lat: number }
  | { type: "circle"; center_lon: number; center_lat: number; radius_m: number }
  | { type: "polygon"; vertices: [number, number][] };

export type OperatorWire = "none" | "some" | "exactly" | "at_least_and_more";

export interface QueryRequest {
  shape?: ShapeWire;
  date_range?: { start: string; end: string };
  seasons?: string[];
  satellites?: string[];
  label_predicate?: { operator: OperatorWire; selected: string[] };
  page?: number;
  page_size?: number;
  render?: boolean;
}

export interface SimilarRequest {
  patch_name?: string;
  payload?: { features?: number[]; bands?: Record<string, number[][]> };
  radius?: number;
  k?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function expectOk(response: Response): Promise<Response> {
  if (!response.ok) {
    throw new ApiError(response.status, await response.text());
  }
  return response;
}

export class ApiClient {
  private inflightQuery: AbortController | null = null;

  constructor(readonly baseUrl: string = "") {}

  /** Submits a metadata query; a newer call aborts the one still in flight. */
  async query(request: QueryRequest): Promise<QueryResponse> {
    this.inflightQuery?.abort();
    const controller = new AbortController();
    this.inflightQuery = controller;
    const response = await expectOk(
      await fetch(`${this.baseUrl}/api/query`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
        signal: controller.signal,
      }),
    );
    if (this.inflightQuery === controller) {
      this.inflightQuery = null;
    }
    return QueryResponseSchema.parse(await response.json());
  }

  async similar(request: SimilarRequest): Promise<SimilarResponse> {
    const response = await expectOk(
      await fetch(`${this.baseUrl}/api/similar`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
      }),
    );
    return SimilarResponseSchema.parse(await response.json());
  }

  async hierarchy(): Promise<HierarchyData> {
    const response = await expectOk(await fetch(`${this.baseUrl}/api/hierarchy`));
    return HierarchySchema.parse(await response.json());
  }

  /** Plain-text names of the full match set for the same filters. */
  async queryNames(request: QueryRequest): Promise<string> {
    const params = new URLSearchParams({ filter: JSON.stringify(request) });
    const response = await expectOk(
      await fetch(`${this.baseUrl}/api/query/names?${params}`),
    );
    return response.text();
  }

  async cartAdd(session: string, names: string[]): Promise<number> {
    const response = await expectOk(
      await fetch(`${this.baseUrl}/api/cart/${encodeURIComponent(session)}/add`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ names }),
      }),
    );
    const body = (await response.json()) as { size: number };
    return body.size;
  }

  async cart(session: string): Promise<string[]> {
    const response = await expectOk(
      await fetch(`${this.baseUrl}/api/cart/${encodeURIComponent(session)}`),
    );
    return CartSchema.parse(await response.json()).names;
  }

  async feedback(text: string): Promise<void> {
    await expectOk(
      await fetch(`${this.baseUrl}/api/feedback`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text }),
      }),
    );
  }

  imageUrl(name: string, kind: "rendered" | "bands"): string {
    return `${this.baseUrl}/api/image/${encodeURIComponent(name)}?kind=${kind}`;
  }

  cartDownloadUrl(session: string): string {
    return `${this.baseUrl}/api/cart/${encodeURIComponent(session)}/download`;
  }
}
