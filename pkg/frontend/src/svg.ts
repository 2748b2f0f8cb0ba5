/** Helpers over the service's SVG layers (marker extraction, recoloring). */

export interface SvgMarker {
  cx: number;
  cy: number;
  r: number;
  fill: string;
}

const CIRCLE_RE = /<circle\s+cx="([-\d.]+)"\s+cy="([-\d.]+)"\s+r="([-\d.]+)"\s+fill="([^"]*)"/g;

/** All circles in a layer document, in document order. */
export function extractMarkers(svgText: string): SvgMarker[] {
  const markers: SvgMarker[] = [];
  for (const m of svgText.matchAll(CIRCLE_RE)) {
    markers.push({ cx: Number(m[1]), cy: Number(m[2]), r: Number(m[3]), fill: m[4] });
  }
  return markers;
}

/** Canonical position key used to compare marker sets across views. */
export function markerKey(m: { cx: number; cy: number }): string {
  return `${m.cx.toFixed(3)},${m.cy.toFixed(3)}`;
}

export function markerKeySet(markers: { cx: number; cy: number }[]): Set<string> {
  return new Set(markers.map(markerKey));
}

export function sameKeySets(a: Set<string>, b: Set<string>): boolean {
  if (a.size !== b.size) return false;
  for (const key of a) if (!b.has(key)) return false;
  return true;
}
