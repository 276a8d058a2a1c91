/** View state and its pure operations.
 *
 * The explorer performs no graph computation of its own: every node and
 * edge in the state arrived inside a server payload, and the only local
 * operations are merging payloads (dedup by id), filtering what is
 * rendered, and tracking selection. The loaded element set never shrinks
 * except through an explicit reset.
 */

import { AttrValue, EdgeEntry, GraphPayload, NodeEntry, NodeKind, attrText } from "./types.js";

export const ALL_KINDS: NodeKind[] = ["Entity", "Activity", "Agent"];

export interface Filters {
  kinds: Set<NodeKind>;
  attrSubstring: string;
}

export interface ViewState {
  nodes: Map<string, NodeEntry>;
  edges: Map<string, EdgeEntry>;
  selection: string | null;
  filters: Filters;
  expandDepth: number;
  searchResults: string[];
  banner: string | null;
  notice: string | null;
  epoch: number;
}

export function createViewState(): ViewState {
  return {
    nodes: new Map(),
    edges: new Map(),
    selection: null,
    filters: { kinds: new Set(ALL_KINDS), attrSubstring: "" },
    expandDepth: 1,
    searchResults: [],
    banner: null,
    notice: null,
    epoch: 0,
  };
}

export interface MergeResult {
  addedNodes: number;
  addedEdges: number;
}

/** Fold a server payload into the loaded view. Dedup is by id; a real node
 * replaces a placeholder with the same id, never the other way around. */
export function mergePayload(state: ViewState, payload: GraphPayload): MergeResult {
  let addedNodes = 0;
  for (const node of payload.nodes) {
    const existing = state.nodes.get(node.id);
    if (existing === undefined) {
      state.nodes.set(node.id, node);
      addedNodes += 1;
    } else if (existing.placeholder && !node.placeholder) {
      state.nodes.set(node.id, node);
    } else if (!existing.placeholder && !node.placeholder) {
      state.nodes.set(node.id, { ...node, depth: node.depth ?? existing.depth });
    }
  }
  let addedEdges = 0;
  for (const edge of payload.edges) {
    if (!state.edges.has(edge.id)) addedEdges += 1;
    state.edges.set(edge.id, edge);
  }
  return { addedNodes, addedEdges };
}

function attrsMatch(attrs: Record<string, AttrValue>, needle: string): boolean {
  if (needle === "") return true;
  const lowered = needle.toLowerCase();
  return Object.values(attrs).some((value) => attrText(value).toLowerCase().includes(lowered));
}

/** Filter predicate for one node. Placeholders have no kind, so the kind
 * filter never hides them; a non-empty substring does (they carry no
 * attributes to match). */
export function nodePasses(filters: Filters, node: NodeEntry): boolean {
  if (!node.placeholder && node.kind !== null && !filters.kinds.has(node.kind)) {
    return false;
  }
  return attrsMatch(node.attrs, filters.attrSubstring);
}

export function visibleNodes(state: ViewState): NodeEntry[] {
  return [...state.nodes.values()].filter((node) => nodePasses(state.filters, node));
}

/** An edge renders only when both of its endpoints are visible. */
export function visibleEdges(state: ViewState): EdgeEntry[] {
  const shown = new Set(visibleNodes(state).map((node) => node.id));
  return [...state.edges.values()].filter(
    (edge) => shown.has(edge.source) && shown.has(edge.target),
  );
}

export function setFilters(state: ViewState, kinds: Iterable<NodeKind>, attrSubstring: string): void {
  state.filters = { kinds: new Set(kinds), attrSubstring };
}

export function clearFilters(state: ViewState): void {
  state.filters = { kinds: new Set(ALL_KINDS), attrSubstring: "" };
}

export function select(state: ViewState, id: string | null): void {
  state.selection = id !== null && state.nodes.has(id) ? id : null;
}

/** Drop everything loaded; bumps the epoch so in-flight fetches are stale. */
export function resetView(state: ViewState): void {
  state.nodes.clear();
  state.edges.clear();
  state.selection = null;
  state.searchResults = [];
  state.banner = null;
  state.notice = null;
  state.epoch += 1;
}
