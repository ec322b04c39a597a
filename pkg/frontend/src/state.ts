/**
 * Client-local view state. Nothing here mutates twin data; all changes to
 * the twin go through the API client.
 */

import type { DisturbancePatch, LayerKind } from "./types.js";

export interface ViewState {
  selectedTick: number | null;
  layerToggles: Record<LayerKind, boolean>;
  selectedElements: string[];
  kpiWindow: { from: number; to: number } | null;
  pendingPatch: DisturbancePatch[];
  scenarioId: string | null;
  seed: number;
  horizon: number;
}

export function initialViewState(): ViewState {
  return {
    selectedTick: null,
    layerToggles: { material: true, information: true, financial: true },
    selectedElements: [],
    kpiWindow: null,
    pendingPatch: [],
    scenarioId: null,
    seed: 0,
    horizon: 10,
  };
}

export function toggleSelection(state: ViewState, elementId: string): void {
  const at = state.selectedElements.indexOf(elementId);
  if (at >= 0) state.selectedElements.splice(at, 1);
  else state.selectedElements.push(elementId);
}

export function addOutageToPatch(state: ViewState, target: string,
                                 isEdge: boolean, start: number,
                                 end: number | null): void {
  state.pendingPatch.push({
    target,
    kind: isEdge ? "edge_outage" : "node_outage",
    start,
    end,
  });
}

export function addCapacityScaleToPatch(state: ViewState, target: string,
                                        magnitude: number, start: number,
                                        end: number | null): void {
  state.pendingPatch.push({
    target, kind: "capacity_scale", start, end, magnitude,
  });
}
