/** Controller tying the API client to the view state.
 *
 * Every mutation of the loaded graph goes through a server payload; a
 * failed or malformed fetch raises the error banner and leaves the state
 * untouched. Responses that resolve after a reset (stale epoch) are
 * discarded.
 */

import { ApiClient } from "./api.js";
import {
  ViewState,
  clearFilters,
  createViewState,
  mergePayload,
  resetView,
  select,
  setFilters,
} from "./state.js";
import { Direction, GraphPayload, NodeKind } from "./types.js";

export class ExplorerApp {
  readonly state: ViewState;

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (state: ViewState) => void = () => {},
  ) {
    this.state = createViewState();
  }

  private changed(): void {
    this.onChange(this.state);
  }

  private async guarded(action: () => Promise<void>): Promise<void> {
    const epoch = this.state.epoch;
    this.state.banner = null;
    this.state.notice = null;
    try {
      await action();
    } catch (err) {
      if (this.state.epoch === epoch) {
        this.state.banner = err instanceof Error ? err.message : String(err);
      }
    }
    this.changed();
  }

  /** Search nodes by attribute; results land in the view and in
   * `state.searchResults` for the clickable result list. */
  search(key: string, value: string, vtype: string = "text"): Promise<void> {
    return this.guarded(async () => {
      const epoch = this.state.epoch;
      const payload: GraphPayload = await this.api.search(key, value, vtype);
      if (this.state.epoch !== epoch) return; // superseded by reset
      if (payload.nodes.length === 0) {
        this.state.searchResults = [];
        this.state.notice = "no matching nodes";
        return;
      }
      mergePayload(this.state, payload);
      this.state.searchResults = payload.nodes.map((node) => node.id);
    });
  }

  /** Fetch one hop of lineage around a loaded node and merge it in. */
  expand(id: string, direction: Direction): Promise<void> {
    return this.guarded(async () => {
      if (!this.state.nodes.has(id)) {
        throw new Error(`node ${id} is not loaded`);
      }
      const epoch = this.state.epoch;
      const payload = await this.api.lineage(id, direction, this.state.expandDepth);
      if (this.state.epoch !== epoch) return;
      const { addedNodes, addedEdges } = mergePayload(this.state, payload);
      if (addedNodes === 0 && addedEdges === 0) {
        this.state.notice = `no more ${direction}`;
      }
    });
  }

  selectNode(id: string | null): void {
    select(this.state, id);
    this.changed();
  }

  setFilters(kinds: Iterable<NodeKind>, attrSubstring: string): void {
    setFilters(this.state, kinds, attrSubstring);
    this.changed();
  }

  clearFilters(): void {
    clearFilters(this.state);
    this.changed();
  }

  reset(): void {
    resetView(this.state);
    this.changed();
  }
}
