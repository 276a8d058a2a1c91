/** Wire shapes of the query service (GraphPayload and friends). */

export type NodeKind = "Entity" | "Activity" | "Agent";

/** Attribute values: bare strings, or typed wrappers for the other variants. */
export type AttrValue = string | { $: number | boolean | string; type: "int" | "float" | "bool" };

export interface NodeEntry {
  id: string;
  kind: NodeKind | null;
  attrs: Record<string, AttrValue>;
  depth?: number;
  placeholder?: boolean;
}

export interface EdgeEntry {
  id: string;
  kind: string;
  source: string;
  target: string;
  attrs: Record<string, AttrValue>;
}

export interface GraphPayload {
  nodes: NodeEntry[];
  edges: EdgeEntry[];
}

export interface StatsPayload {
  nodes: number;
  edges: number;
  by_kind: Record<string, number>;
}

export type Direction = "ancestors" | "descendants";

/** Render an attribute value for display and substring filtering. */
export function attrText(value: AttrValue): string {
  if (typeof value === "string") return value;
  return String(value.$);
}

export function isGraphPayload(body: unknown): body is GraphPayload {
  if (typeof body !== "object" || body === null) return false;
  const candidate = body as Record<string, unknown>;
  return Array.isArray(candidate.nodes) && Array.isArray(candidate.edges);
}
