/**
 * Interactive node-link view of a snapshot document.
 *
 * Nodes are colored by entity kind, edges by layer; hovering an element
 * shows its attributes (cost and transit time on lanes, state and bounds
 * on nodes); clicking an element selects it and seeds the what-if patch
 * builder. Layout is force-directed with a PRNG seeded from the snapshot
 * content, so the same snapshot always renders the same picture.
 */

import { clear, el, svgEl } from "./dom.js";
import { fmtFraction, fmtQuantity, fmtTick } from "./format.js";
import type { EdgeDoc, LayerKind, NodeDoc, SnapshotDoc } from "./types.js";
import type { ViewState } from "./state.js";

export const KIND_COLORS: Record<string, string> = {
  supplier: "#4e9a3d",
  manufacturer: "#b8762e",
  warehouse: "#3d6fae",
  distributor: "#8455b0",
  customer: "#c04a4a",
};

export const LAYER_COLORS: Record<LayerKind, string> = {
  material: "#7a7f87",
  information: "#4aa3c0",
  financial: "#c0a94a",
};

export interface GraphViewHooks {
  onSelect?: (elementId: string, isEdge: boolean) => void;
}

interface Point {
  x: number;
  y: number;
}

/** Deterministic PRNG (mulberry32) from a string key. */
function seededRandom(key: string): () => number {
  let h = 2166136261 >>> 0;
  for (const ch of key) {
    h = Math.imul(h ^ ch.charCodeAt(0), 16777619) >>> 0;
  }
  return () => {
    h = (h + 0x6d2b79f5) >>> 0;
    let t = h;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function layoutPositions(snapshot: SnapshotDoc, width: number,
                                height: number): Map<string, Point> {
  const positions = new Map<string, Point>();
  const rand = seededRandom(JSON.stringify({
    nodes: snapshot.nodes.map(n => n.id),
    edges: snapshot.edges.map(e => e.id),
  }));
  const pad = 40;
  for (const node of snapshot.nodes) {
    if (node.location) {
      positions.set(node.id, { x: node.location[0], y: node.location[1] });
    } else {
      positions.set(node.id, {
        x: pad + rand() * (width - 2 * pad),
        y: pad + rand() * (height - 2 * pad),
      });
    }
  }
  const located = snapshot.nodes.filter(n => n.location).length;
  if (located === snapshot.nodes.length && located > 0) {
    rescale(positions, width, height, pad);
    return positions;
  }
  // spring iterations: repulsion between all pairs, attraction along edges
  const ids = snapshot.nodes.map(n => n.id);
  for (let iter = 0; iter < 120; iter++) {
    const force = new Map<string, Point>(ids.map(id => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = positions.get(ids[i])!;
        const b = positions.get(ids[j])!;
        const dx = a.x - b.x, dy = a.y - b.y;
        const d2 = Math.max(25, dx * dx + dy * dy);
        const push = 2200 / d2;
        const d = Math.sqrt(d2);
        force.get(ids[i])!.x += (dx / d) * push;
        force.get(ids[i])!.y += (dy / d) * push;
        force.get(ids[j])!.x -= (dx / d) * push;
        force.get(ids[j])!.y -= (dy / d) * push;
      }
    }
    for (const edge of snapshot.edges) {
      const a = positions.get(edge.src);
      const b = positions.get(edge.dst);
      if (!a || !b) continue;
      const dx = b.x - a.x, dy = b.y - a.y;
      const d = Math.max(5, Math.sqrt(dx * dx + dy * dy));
      const pull = (d - 110) * 0.02;
      force.get(edge.src)!.x += (dx / d) * pull;
      force.get(edge.src)!.y += (dy / d) * pull;
      force.get(edge.dst)!.x -= (dx / d) * pull;
      force.get(edge.dst)!.y -= (dy / d) * pull;
    }
    const damping = 1 - iter / 140;
    for (const id of ids) {
      const p = positions.get(id)!;
      const f = force.get(id)!;
      p.x += Math.max(-12, Math.min(12, f.x)) * damping;
      p.y += Math.max(-12, Math.min(12, f.y)) * damping;
    }
  }
  rescale(positions, width, height, pad);
  return positions;
}

function rescale(positions: Map<string, Point>, width: number, height: number,
                 pad: number): void {
  const xs = [...positions.values()].map(p => p.x);
  const ys = [...positions.values()].map(p => p.y);
  const minX = Math.min(...xs), maxX = Math.max(...xs);
  const minY = Math.min(...ys), maxY = Math.max(...ys);
  const spanX = Math.max(1e-9, maxX - minX);
  const spanY = Math.max(1e-9, maxY - minY);
  for (const p of positions.values()) {
    p.x = pad + ((p.x - minX) / spanX) * (width - 2 * pad);
    p.y = pad + ((p.y - minY) / spanY) * (height - 2 * pad);
  }
}

export function nodeTooltip(node: NodeDoc): string {
  const parts = [`${node.label || node.id} (${node.kind})`,
                 `inventory ${fmtQuantity(node.state.inventory)}`,
                 `backlog ${fmtQuantity(node.state.backlog)}`];
  for (const [name, value] of Object.entries(node.attrs)) {
    parts.push(name === "reliability"
      ? `${name} ${fmtFraction(value)}`
      : `${name} ${fmtQuantity(value)}`);
  }
  return parts.join("\n");
}

export function edgeTooltip(edge: EdgeDoc): string {
  const w = edge.weights;
  return [
    `${edge.id}: ${edge.src} -> ${edge.dst} [${edge.layer}]`,
    `cost ${fmtQuantity(w.cost_per_unit)}/unit`,
    `transit ${fmtQuantity(w.transit_time)} ticks`,
    `capacity ${fmtQuantity(w.capacity)}/tick`,
    `reliability ${fmtFraction(w.reliability)}`,
    `carbon ${fmtQuantity(w.carbon_per_unit)} kg/unit`,
  ].join("\n");
}

export function renderGraphView(container: HTMLElement, snapshot: SnapshotDoc,
                                view: ViewState, hooks: GraphViewHooks = {},
                                width = 860, height = 520): void {
  clear(container);
  if (!snapshot.nodes.length) {
    container.append(el("div", {
      class: "empty-state",
      text: "No entities in this snapshot yet. Load a graph or pick a later tick.",
    }));
    return;
  }
  const header = el("div", { class: "panel-caption" }, [
    `tick ${fmtTick(snapshot.tick)}: ${snapshot.nodes.length} entities, `
    + `${snapshot.edges.length} links`,
  ]);
  container.append(header);

  const svg = svgEl("svg", {
    class: "graph-canvas",
    viewBox: `0 0 ${width} ${height}`,
    role: "img",
  });
  const positions = layoutPositions(snapshot, width, height);

  const shownEdges = snapshot.edges.filter(e => view.layerToggles[e.layer]);
  for (const edge of shownEdges) {
    const a = positions.get(edge.src);
    const b = positions.get(edge.dst);
    if (!a || !b) continue;
    const line = svgEl("line", {
      x1: String(a.x), y1: String(a.y), x2: String(b.x), y2: String(b.y),
      stroke: LAYER_COLORS[edge.layer],
      "stroke-width": view.selectedElements.includes(edge.id) ? "4" : "1.6",
      "data-edge": edge.id,
      class: "graph-edge",
    });
    const title = svgEl("title");
    title.textContent = edgeTooltip(edge);
    line.append(title);
    line.addEventListener("click", () => hooks.onSelect?.(edge.id, true));
    svg.append(line);
  }
  for (const node of snapshot.nodes) {
    const p = positions.get(node.id)!;
    const selected = view.selectedElements.includes(node.id);
    const circle = svgEl("circle", {
      cx: String(p.x), cy: String(p.y), r: selected ? "14" : "10",
      fill: KIND_COLORS[node.kind] ?? "#999",
      stroke: selected ? "#111" : "#fff",
      "stroke-width": "2",
      "data-node": node.id,
      class: "graph-node",
    });
    const title = svgEl("title");
    title.textContent = nodeTooltip(node);
    circle.append(title);
    circle.addEventListener("click", () => hooks.onSelect?.(node.id, false));
    svg.append(circle);
    const label = svgEl("text", {
      x: String(p.x + 13), y: String(p.y + 4), class: "graph-label",
    });
    label.textContent = node.id;
    svg.append(label);
  }
  container.append(svg);
}
