// Application bootstrap: wires the query panel, map, and result panel
// against the archive API served from the same origin.

import { ApiClient, type PatchRecord, type QueryRequest } from "./api";
import { SlippyMap } from "./map";
import { QueryPanel } from "./querypanel";
import { FeedbackForm, ResultPanel } from "./results";
import { CartMirror } from "./state";

function downloadBlob(text: string, filename: string): void {
  const blob = new Blob([text], { type: "text/plain" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = filename;
  link.click();
  URL.revokeObjectURL(link.href);
}

export async function boot(rootElement: HTMLElement, baseUrl = ""): Promise<void> {
  const api = new ApiClient(baseUrl);
  const session = `web-${Math.random().toString(36).slice(2, 10)}`;
  const cart = new CartMirror();
  const hierarchy = await api.hierarchy();

  const layout = document.createElement("div");
  layout.className = "layout";
  rootElement.appendChild(layout);
  const left = document.createElement("aside");
  left.className = "left-pane";
  const center = document.createElement("main");
  center.className = "map-container";
  const right = document.createElement("aside");
  right.className = "right-pane";
  layout.append(left, center, right);

  const map = new SlippyMap(center, {
    width: center.clientWidth || 900,
    height: center.clientHeight || 700,
    centerLon: 10,
    centerLat: 51,
    zoom: 4,
  });

  let lastRequest: QueryRequest = {};
  const byName = new Map<string, PatchRecord>();

  const panel = new QueryPanel(left, hierarchy);
  const results = new ResultPanel(right, {
    onSimilar: async (name) => {
      const response = await api.similar({ patch_name: name });
      results.showSimilarity(name, response, byName.get(name) ?? null);
    },
    onNavigate: (record) => map.centerOn(record),
    onPinpoint: (name) => map.togglePin(name),
    onDownloadZip: (name) => {
      window.location.href = api.imageUrl(name, "bands");
    },
    onAddToCart: async (names) => {
      const size = await api.cartAdd(session, names.slice(0, 50));
      cart.update(await api.cart(session));
      results.updateCart(size);
    },
    onDownloadNames: async () => {
      downloadBlob(await api.queryNames(lastRequest), "patch-names.txt");
    },
    onRenderToggle: async (enabled) => {
      if (!enabled) {
        map.clearOverlays();
        return;
      }
      const response = await api.query({ ...lastRequest, render: true });
      map.setOverlays(response.rendered ?? []);
    },
  });
  new FeedbackForm(right).onSubmit = (text) => api.feedback(text);

  panel.onDrawRequest = (mode) => map.beginDraw(mode);
  map.onShapeDrawn = (shape) => panel.setDrawnShape(shape);
  map.onMarkerLocate = (name) => results.locate(name);

  panel.onSubmit = async (request) => {
    lastRequest = request;
    const response = await api.query(request);
    byName.clear();
    for (const record of response.page) {
      byName.set(record.patch_name, record);
    }
    results.showPrimary(response);
    map.setMarkers(response.page, hierarchy.colors);
    map.setOverlays(response.render_enabled ? response.rendered ?? [] : []);
  };
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app")!);
}
