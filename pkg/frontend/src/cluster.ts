// Marker clustering: zoomed-out views group nearby markers into cluster
// badges on a screen-space grid; zoomed-in views show individual markers.

export interface MarkerPoint {
  name: string;
  lon: number;
  lat: number;
}

export interface Cluster {
  lon: number;
  lat: number;
  members: MarkerPoint[];
}

// Cluster only when the viewport holds more than this many markers...
export const CLUSTER_MIN_MARKERS = 50;
// ...and the zoom level is below this.
export const CLUSTER_MAX_ZOOM = 10;

const TILE_SIZE = 256;

/** Web Mercator world-pixel coordinates at a zoom level. */
export function lonLatToWorld(lon: number, lat: number, zoom: number): { x: number; y: number } {
  const scale = TILE_SIZE * 2 ** zoom;
  const x = ((lon + 180) / 360) * scale;
  const clamped = Math.max(-85.05112878, Math.min(85.05112878, lat));
  const sin = Math.sin((clamped * Math.PI) / 180);
  const y = (0.5 - Math.log((1 + sin) / (1 - sin)) / (4 * Math.PI)) * scale;
  return { x, y };
}

export function worldToLonLat(x: number, y: number, zoom: number): { lon: number; lat: number } {
  const scale = TILE_SIZE * 2 ** zoom;
  const lon = (x / scale) * 360 - 180;
  const n = Math.PI - 2 * Math.PI * (y / scale);
  const lat = (180 / Math.PI) * Math.atan(0.5 * (Math.exp(n) - Math.exp(-n)));
  return { lon, lat };
}

/**
 * Groups markers into grid clusters. Every input marker lands in exactly one
 * cluster, so cluster sizes always sum to the marker count.
 */
export function clusterMarkers(
  points: MarkerPoint[],
  zoom: number,
  cellPx: number = 64,
): Cluster[] {
  if (zoom >= CLUSTER_MAX_ZOOM || points.length <= CLUSTER_MIN_MARKERS) {
    return points.map((p) => ({ lon: p.lon, lat: p.lat, members: [p] }));
  }
  const buckets = new Map<string, MarkerPoint[]>();
  for (const point of points) {
    const world = lonLatToWorld(point.lon, point.lat, zoom);
    const key = `${Math.floor(world.x / cellPx)}:${Math.floor(world.y / cellPx)}`;
    const bucket = buckets.get(key);
    if (bucket) {
      bucket.push(point);
    } else {
      buckets.set(key, [point]);
    }
  }
  const clusters: Cluster[] = [];
  for (const members of buckets.values()) {
    const lon = members.reduce((acc, m) => acc + m.lon, 0) / members.length;
    const lat = members.reduce((acc, m) => acc + m.lat, 0) / members.length;
    clusters.push({ lon, lat, members });
  }
  return clusters;
}
