// Self-contained slippy-map pane: tile layer from a configurable template
// URL, marker/cluster layer, RGB overlays, shape drawing, and a toggleable
// minimap. No external map library; everything renders into plain DOM and
// SVG so the pane works headless as well.

import type { Bounds, PatchRecord, RenderedRef, ShapeWire } from "./api";
import { CLUSTER_MAX_ZOOM, clusterMarkers, lonLatToWorld, worldToLonLat } from "./cluster";

export type DrawMode = "none" | "rectangle" | "circle" | "polygon";

export interface MapOptions {
  width?: number;
  height?: number;
  tileUrl?: string; // slippy template with {z}/{x}/{y}
  centerLon?: number;
  centerLat?: number;
  zoom?: number;
}

const DEFAULT_TILE_URL = "https://tile.openstreetmap.org/{z}/{x}/{y}.png";
const TILE_SIZE = 256;
const M_PER_DEG_LAT = (Math.PI * 6_371_000) / 180;

const SVG_NS = "http://www.w3.org/2000/svg";

interface MarkerView {
  record: PatchRecord;
  element: SVGCircleElement;
}

export class SlippyMap {
  readonly root: HTMLElement;
  readonly width: number;
  readonly height: number;
  tileUrl: string;
  centerLon: number;
  centerLat: number;
  zoom: number;

  onShapeDrawn: ((shape: ShapeWire) => void) | null = null;
  onMarkerLocate: ((name: string) => void) | null = null;

  private tilePane: HTMLDivElement;
  private overlayPane: HTMLDivElement;
  private svg: SVGSVGElement;
  private tooltip: HTMLDivElement;
  private popup: HTMLDivElement;
  private minimap: HTMLDivElement;
  private minimapVisible = true;

  private records: PatchRecord[] = [];
  private markerViews: MarkerView[] = [];
  private clusterBadges: SVGGElement[] = [];
  private pinned = new Set<string>();
  private labelColors: Record<string, string> = {};
  private overlays: RenderedRef[] = [];

  private drawMode: DrawMode = "none";
  private drawStart: { lon: number; lat: number } | null = null;
  private polygonDraft: [number, number][] = [];

  constructor(container: HTMLElement, options: MapOptions = {}) {
    this.width = options.width ?? 800;
    this.height = options.height ?? 600;
    this.tileUrl = options.tileUrl ?? DEFAULT_TILE_URL;
    this.centerLon = options.centerLon ?? 10.0;
    this.centerLat = options.centerLat ?? 51.0;
    this.zoom = options.zoom ?? 4;

    this.root = document.createElement("div");
    this.root.className = "map-pane";
    this.root.style.width = `${this.width}px`;
    this.root.style.height = `${this.height}px`;
    container.appendChild(this.root);

    this.tilePane = document.createElement("div");
    this.tilePane.className = "tile-pane";
    this.root.appendChild(this.tilePane);

    this.overlayPane = document.createElement("div");
    this.overlayPane.className = "overlay-pane";
    this.root.appendChild(this.overlayPane);

    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("class", "marker-layer");
    this.svg.setAttribute("width", String(this.width));
    this.svg.setAttribute("height", String(this.height));
    this.root.appendChild(this.svg);

    this.tooltip = document.createElement("div");
    this.tooltip.className = "map-tooltip hidden";
    this.root.appendChild(this.tooltip);

    this.popup = document.createElement("div");
    this.popup.className = "map-popup hidden";
    this.root.appendChild(this.popup);

    this.minimap = document.createElement("div");
    this.minimap.className = "minimap";
    this.root.appendChild(this.minimap);

    this.svg.addEventListener("mousedown", (ev) => this.handleMouseDown(ev));
    this.svg.addEventListener("mouseup", (ev) => this.handleMouseUp(ev));
    this.svg.addEventListener("dblclick", () => this.finishPolygon());
    this.root.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.setView(this.centerLon, this.centerLat, this.zoom + (ev.deltaY < 0 ? 1 : -1));
    });

    this.redraw();
  }

  // --- view state ------------------------------------------------------

  setView(lon: number, lat: number, zoom: number): void {
    this.centerLon = lon;
    this.centerLat = lat;
    this.zoom = Math.max(1, Math.min(18, zoom));
    this.redraw();
  }

  project(lon: number, lat: number): { x: number; y: number } {
    const world = lonLatToWorld(lon, lat, this.zoom);
    const center = lonLatToWorld(this.centerLon, this.centerLat, this.zoom);
    return {
      x: world.x - center.x + this.width / 2,
      y: world.y - center.y + this.height / 2,
    };
  }

  unproject(x: number, y: number): { lon: number; lat: number } {
    const center = lonLatToWorld(this.centerLon, this.centerLat, this.zoom);
    return worldToLonLat(center.x + x - this.width / 2, center.y + y - this.height / 2, this.zoom);
  }

  // --- markers ----------------------------------------------------------

  setMarkers(records: PatchRecord[], labelColors: Record<string, string> = {}): void {
    this.records = records;
    this.labelColors = labelColors;
    this.redraw();
  }

  markerCount(): number {
    return this.markerViews.length;
  }

  clusterBadgeTotal(): number {
    return this.clusterBadges.reduce(
      (acc, badge) => acc + Number(badge.dataset.count ?? "0"),
      0,
    );
  }

  displayedTotal(): number {
    return this.markerCount() + this.clusterBadgeTotal();
  }

  togglePin(name: string): void {
    if (this.pinned.has(name)) {
      this.pinned.delete(name);
    } else {
      this.pinned.add(name);
    }
    this.redraw();
  }

  pinnedNames(): string[] {
    return [...this.pinned].sort();
  }

  centerOn(record: PatchRecord): void {
    const lon = (record.bounds.min_lon + record.bounds.max_lon) / 2;
    const lat = (record.bounds.min_lat + record.bounds.max_lat) / 2;
    this.setView(lon, lat, Math.max(this.zoom, CLUSTER_MAX_ZOOM));
  }

  // --- overlays and minimap ----------------------------------------------

  setOverlays(refs: RenderedRef[]): void {
    this.overlays = refs;
    this.redrawOverlays();
  }

  clearOverlays(): void {
    this.setOverlays([]);
  }

  overlayCount(): number {
    return this.overlayPane.children.length;
  }

  toggleMinimap(): boolean {
    this.minimapVisible = !this.minimapVisible;
    this.minimap.classList.toggle("hidden", !this.minimapVisible);
    return this.minimapVisible;
  }

  // --- drawing ------------------------------------------------------------

  beginDraw(mode: DrawMode): void {
    this.drawMode = mode;
    this.drawStart = null;
    this.polygonDraft = [];
    this.root.classList.toggle("drawing", mode !== "none");
  }

  private eventLonLat(ev: MouseEvent): { lon: number; lat: number } {
    const rect = this.svg.getBoundingClientRect();
    return this.unproject(ev.clientX - rect.left, ev.clientY - rect.top);
  }

  private handleMouseDown(ev: MouseEvent): void {
    if (this.drawMode === "none") {
      return;
    }
    const at = this.eventLonLat(ev);
    if (this.drawMode === "polygon") {
      this.polygonDraft.push([at.lon, at.lat]);
      return;
    }
    this.drawStart = at;
  }

  private handleMouseUp(ev: MouseEvent): void {
    if (this.drawMode === "none" || this.drawMode === "polygon" || !this.drawStart) {
      return;
    }
    const start = this.drawStart;
    const end = this.eventLonLat(ev);
    this.drawStart = null;
    let shape: ShapeWire;
    if (this.drawMode === "rectangle") {
      shape = {
        type: "rectangle",
        min_lon: Math.min(start.lon, end.lon),
        min_lat: Math.min(start.lat, end.lat),
        max_lon: Math.max(start.lon, end.lon),
        max_lat: Math.max(start.lat, end.lat),
      };
    } else {
      shape = {
        type: "circle",
        center_lon: start.lon,
        center_lat: start.lat,
        radius_m: metersBetween(start.lon, start.lat, end.lon, end.lat),
      };
    }
    this.beginDraw("none");
    this.onShapeDrawn?.(shape);
  }

  private finishPolygon(): void {
    if (this.drawMode !== "polygon" || this.polygonDraft.length < 3) {
      return;
    }
    const vertices = this.polygonDraft;
    this.beginDraw("none");
    this.onShapeDrawn?.({ type: "polygon", vertices });
  }

  // --- rendering ------------------------------------------------------------

  private redraw(): void {
    this.renderTiles();
    this.renderMarkers();
    this.redrawOverlays();
    this.renderMinimap();
  }

  private tileSrc(z: number, x: number, y: number): string {
    const wrap = 2 ** z;
    const wrappedX = ((x % wrap) + wrap) % wrap;
    return this.tileUrl
      .replace("{z}", String(z))
      .replace("{x}", String(wrappedX))
      .replace("{y}", String(y));
  }

  private renderTiles(): void {
    this.tilePane.textContent = "";
    const center = lonLatToWorld(this.centerLon, this.centerLat, this.zoom);
    const left = center.x - this.width / 2;
    const top = center.y - this.height / 2;
    const firstX = Math.floor(left / TILE_SIZE);
    const firstY = Math.max(0, Math.floor(top / TILE_SIZE));
    const lastX = Math.floor((left + this.width) / TILE_SIZE);
    const lastY = Math.min(2 ** this.zoom - 1, Math.floor((top + this.height) / TILE_SIZE));
    for (let tx = firstX; tx <= lastX; tx++) {
      for (let ty = firstY; ty <= lastY; ty++) {
        const img = document.createElement("img");
        img.className = "tile";
        img.src = this.tileSrc(this.zoom, tx, ty);
        img.style.left = `${tx * TILE_SIZE - left}px`;
        img.style.top = `${ty * TILE_SIZE - top}px`;
        this.tilePane.appendChild(img);
      }
    }
  }

  private markerColor(record: PatchRecord): string {
    const first = record.labels[0];
    return (first && this.labelColors[first]) || "#2266cc";
  }

  private renderMarkers(): void {
    this.svg.textContent = "";
    this.markerViews = [];
    this.clusterBadges = [];
    const points = this.records.map((r) => ({
      name: r.patch_name,
      lon: (r.bounds.min_lon + r.bounds.max_lon) / 2,
      lat: (r.bounds.min_lat + r.bounds.max_lat) / 2,
    }));
    const byName = new Map(this.records.map((r) => [r.patch_name, r]));
    for (const cluster of clusterMarkers(points, this.zoom)) {
      if (cluster.members.length === 1) {
        const record = byName.get(cluster.members[0].name)!;
        this.addMarker(record, cluster.lon, cluster.lat);
      } else {
        this.addClusterBadge(cluster.lon, cluster.lat, cluster.members.length);
      }
    }
  }

  private addMarker(record: PatchRecord, lon: number, lat: number): void {
    const at = this.project(lon, lat);
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("class", "marker");
    circle.setAttribute("cx", String(at.x));
    circle.setAttribute("cy", String(at.y));
    circle.setAttribute("r", this.pinned.has(record.patch_name) ? "9" : "6");
    circle.setAttribute("fill", this.markerColor(record));
    circle.dataset.name = record.patch_name;
    if (this.pinned.has(record.patch_name)) {
      circle.classList.add("pinned");
    }
    circle.addEventListener("mouseenter", () => {
      circle.classList.add("hover");
      this.tooltip.textContent = record.labels.join(", ");
      this.tooltip.classList.remove("hidden");
      this.tooltip.style.left = `${at.x + 12}px`;
      this.tooltip.style.top = `${at.y - 12}px`;
    });
    circle.addEventListener("mouseleave", () => {
      circle.classList.remove("hover");
      this.tooltip.classList.add("hidden");
    });
    circle.addEventListener("click", () => this.openPopup(record, at.x, at.y));
    this.svg.appendChild(circle);
    this.markerViews.push({ record, element: circle });
  }

  private addClusterBadge(lon: number, lat: number, count: number): void {
    const at = this.project(lon, lat);
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "cluster");
    group.dataset.count = String(count);
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(at.x));
    circle.setAttribute("cy", String(at.y));
    circle.setAttribute("r", String(Math.min(24, 10 + Math.log10(count + 1) * 8)));
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(at.x));
    label.setAttribute("y", String(at.y + 4));
    label.setAttribute("text-anchor", "middle");
    label.textContent = String(count);
    group.appendChild(circle);
    group.appendChild(label);
    group.addEventListener("click", () => this.setView(lon, lat, this.zoom + 2));
    this.svg.appendChild(group);
    this.clusterBadges.push(group);
  }

  private openPopup(record: PatchRecord, x: number, y: number): void {
    this.popup.textContent = "";
    const title = document.createElement("strong");
    title.textContent = record.patch_name;
    const meta = document.createElement("div");
    meta.textContent =
      `${record.acquisition_date} · ${record.season} · ${record.satellite} · ${record.country}`;
    const locate = document.createElement("button");
    locate.className = "locate-btn";
    locate.textContent = "Show in results";
    locate.addEventListener("click", () => {
      this.popup.classList.add("hidden");
      this.onMarkerLocate?.(record.patch_name);
    });
    const close = document.createElement("button");
    close.className = "close-btn";
    close.textContent = "×";
    close.addEventListener("click", () => this.popup.classList.add("hidden"));
    this.popup.append(close, title, meta, locate);
    this.popup.style.left = `${x + 10}px`;
    this.popup.style.top = `${y + 10}px`;
    this.popup.classList.remove("hidden");
  }

  private redrawOverlays(): void {
    this.overlayPane.textContent = "";
    for (const ref of this.overlays) {
      const img = document.createElement("img");
      img.className = "rgb-overlay";
      img.src = ref.url;
      this.positionOverBounds(img, ref.bounds);
      this.overlayPane.appendChild(img);
    }
  }

  private positionOverBounds(el: HTMLElement, bounds: Bounds): void {
    const topLeft = this.project(bounds.min_lon, bounds.max_lat);
    const bottomRight = this.project(bounds.max_lon, bounds.min_lat);
    el.style.left = `${topLeft.x}px`;
    el.style.top = `${topLeft.y}px`;
    el.style.width = `${Math.max(2, bottomRight.x - topLeft.x)}px`;
    el.style.height = `${Math.max(2, bottomRight.y - topLeft.y)}px`;
  }

  private renderMinimap(): void {
    this.minimap.textContent = "";
    if (!this.minimapVisible) {
      return;
    }
    const zoom = Math.max(1, this.zoom - 4);
    const img = document.createElement("img");
    const world = lonLatToWorld(this.centerLon, this.centerLat, zoom);
    img.src = this.tileSrc(zoom, Math.floor(world.x / TILE_SIZE), Math.floor(world.y / TILE_SIZE));
    img.className = "tile";
    const box = document.createElement("div");
    box.className = "minimap-viewport";
    this.minimap.append(img, box);
  }
}

/** Approximate ground distance in the local equirectangular frame. */
export function metersBetween(
  lon1: number,
  lat1: number,
  lon2: number,
  lat2: number,
): number {
  const mLon = M_PER_DEG_LAT * Math.cos((lat1 * Math.PI) / 180);
  const dx = (lon2 - lon1) * mLon;
  const dy = (lat2 - lat1) * M_PER_DEG_LAT;
  return Math.hypot(dx, dy);
}
