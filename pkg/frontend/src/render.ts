/** Pure SVG rendering of the visible graph.
 *
 * Node shapes follow the usual provenance layout convention (the same one
 * the DOT export uses): Entity = ellipse, Activity = box, Agent = house.
 * Placeholders render as dashed circles. Edges are labeled by kind.
 */

import { Positions } from "./layout.js";
import { EdgeEntry, NodeEntry, attrText } from "./types.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function shortLabel(node: NodeEntry): string {
  const name = node.attrs["name"] ?? node.attrs["filename"];
  const base = name !== undefined ? attrText(name) : node.id;
  return base.length > 18 ? base.slice(0, 15) + "…" : base;
}

function nodeShape(node: NodeEntry, x: number, y: number, selected: boolean): string {
  const cls = `node${selected ? " selected" : ""}`;
  const common = `class="${cls}" data-node-id="${esc(node.id)}"`;
  if (node.placeholder) {
    return `<circle ${common} cx="${x}" cy="${y}" r="16" stroke-dasharray="4 3"/>`;
  }
  switch (node.kind) {
    case "Entity":
      return `<ellipse ${common} data-kind="Entity" cx="${x}" cy="${y}" rx="30" ry="18"/>`;
    case "Activity":
      return `<rect ${common} data-kind="Activity" x="${x - 30}" y="${y - 16}" width="60" height="32"/>`;
    case "Agent": {
      const points = [
        [x - 26, y + 14],
        [x - 26, y - 6],
        [x, y - 20],
        [x + 26, y - 6],
        [x + 26, y + 14],
      ]
        .map(([px, py]) => `${px},${py}`)
        .join(" ");
      return `<polygon ${common} data-kind="Agent" points="${points}"/>`;
    }
    default:
      return `<circle ${common} cx="${x}" cy="${y}" r="16"/>`;
  }
}

export function renderSvg(
  nodes: NodeEntry[],
  edges: EdgeEntry[],
  positions: Positions,
  width: number,
  height: number,
  selection: string | null,
): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="22" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>`,
  ];
  for (const edge of edges) {
    const a = positions.get(edge.source);
    const b = positions.get(edge.target);
    if (!a || !b) continue;
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2;
    parts.push(
      `<g class="edge" data-edge-id="${esc(edge.id)}">` +
        `<line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" marker-end="url(#arrow)"/>` +
        `<text x="${mx}" y="${my - 4}" class="edge-label">${esc(edge.kind)}</text></g>`,
    );
  }
  for (const node of nodes) {
    const p = positions.get(node.id);
    if (!p) continue;
    parts.push(
      `<g class="node-group" data-node-id="${esc(node.id)}">` +
        nodeShape(node, p.x, p.y, node.id === selection) +
        `<text x="${p.x}" y="${p.y + 30}" class="node-label">${esc(shortLabel(node))}</text></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderNodeDetails(node: NodeEntry): string {
  const rows = Object.entries(node.attrs)
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([key, value]) => `<tr><td>${esc(key)}</td><td>${esc(attrText(value))}</td></tr>`)
    .join("");
  const kind = node.placeholder ? "placeholder (not yet ingested)" : node.kind ?? "unknown";
  return (
    `<h3>${esc(node.id)}</h3><p class="kind">${esc(kind)}</p>` +
    (rows ? `<table>${rows}</table>` : "<p>no attributes</p>")
  );
}
