// Overlay boxes over the panel: prepared regions in green, preparation
// failures in red.  Geometry comes verbatim from service responses.

import type { DetectOut, RegionOut } from './types';

export type OverlayColor = 'green' | 'red';

export interface OverlayBox {
  x: number;
  y: number;
  width: number;
  height: number;
  color: OverlayColor;
  label: string;
}

export function regionOverlay(region: RegionOut): OverlayBox {
  const warnings = region.warnings.length ? ` (${region.warnings.join(', ')})` : '';
  return {
    x: region.square.x,
    y: region.square.y,
    width: region.square.side,
    height: region.square.side,
    color: 'green',
    label: `face ${region.face_index}${warnings}`,
  };
}

export function overlaysFromDetect(doc: DetectOut): OverlayBox[] {
  const boxes: OverlayBox[] = doc.regions.map(regionOverlay);
  for (const failure of doc.failures) {
    if (failure.hull === null) continue;
    boxes.push({
      x: failure.hull.x,
      y: failure.hull.y,
      width: failure.hull.width,
      height: failure.hull.height,
      color: 'red',
      label: failure.code,
    });
  }
  return boxes;
}
