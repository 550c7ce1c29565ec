/**
 * Legend construction: one row per payload feature, in payload order.
 * Colors come from the payload itself (the service assigns palette
 * position k to feature k), so the legend is correct by construction —
 * the page never reorders or recolors.
 */

import type { WarningPayload } from "./types.js";

export interface LegendRow {
  color: string;
  name: string;
  explanation: string;
  artifacts: string[];
  elementId: number;
}

export function buildLegend(payload: WarningPayload): LegendRow[] {
  return payload.features.map((feature) => ({
    color: feature.color,
    name: feature.name,
    explanation: feature.explanation,
    artifacts: [...feature.artifacts],
    elementId: feature.element_id,
  }));
}
