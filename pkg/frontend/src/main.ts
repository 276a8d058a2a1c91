/** Browser bootstrap: wires the controller to the DOM. */

import { ApiClient } from "./api.js";
import { ExplorerApp } from "./app.js";
import { layoutGraph, Positions } from "./layout.js";
import { renderNodeDetails, renderSvg } from "./render.js";
import { visibleEdges, visibleNodes, ALL_KINDS } from "./state.js";
import { NodeKind } from "./types.js";

const $ = <T extends HTMLElement>(selector: string): T => {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
};

let positions: Positions | undefined;

function currentKinds(): NodeKind[] {
  return ALL_KINDS.filter(
    (kind) => ($(`#kind-${kind.toLowerCase()}`) as unknown as HTMLInputElement).checked,
  );
}

function main(): void {
  const canvas = $("#canvas");
  const results = $("#results");
  const details = $("#details");
  const banner = $("#banner");
  const notice = $("#notice");

  const app = new ExplorerApp(new ApiClient(""), (state) => {
    banner.textContent = state.banner ?? "";
    banner.style.display = state.banner ? "block" : "none";
    notice.textContent = state.notice ?? "";
    notice.style.display = state.notice ? "block" : "none";

    results.innerHTML = state.searchResults
      .map((id) => `<li><button class="result" data-node-id="${id}">${id}</button></li>`)
      .join("");

    const nodes = visibleNodes(state);
    const edges = visibleEdges(state);
    const width = canvas.clientWidth || 900;
    const height = canvas.clientHeight || 600;
    positions = layoutGraph(nodes, edges, width, height, positions);
    canvas.innerHTML = renderSvg(nodes, edges, positions, width, height, state.selection);

    const selected = state.selection ? state.nodes.get(state.selection) : undefined;
    details.innerHTML = selected ? renderNodeDetails(selected) : "<p>nothing selected</p>";
  });

  $("#search-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const key = ($("#search-key") as unknown as HTMLInputElement).value.trim();
    const value = ($("#search-value") as unknown as HTMLInputElement).value;
    const vtype = ($("#search-vtype") as unknown as HTMLSelectElement).value;
    if (key) void app.search(key, value, vtype);
  });

  for (const kind of ALL_KINDS) {
    $(`#kind-${kind.toLowerCase()}`).addEventListener("change", () =>
      app.setFilters(currentKinds(), ($("#attr-filter") as unknown as HTMLInputElement).value),
    );
  }
  $("#attr-filter").addEventListener("input", () =>
    app.setFilters(currentKinds(), ($("#attr-filter") as unknown as HTMLInputElement).value),
  );
  $("#clear-filters").addEventListener("click", () => {
    ($("#attr-filter") as unknown as HTMLInputElement).value = "";
    for (const kind of ALL_KINDS) {
      ($(`#kind-${kind.toLowerCase()}`) as unknown as HTMLInputElement).checked = true;
    }
    app.clearFilters();
  });
  $("#reset").addEventListener("click", () => {
    positions = undefined;
    app.reset();
  });
  $("#expand-ancestors").addEventListener("click", () => {
    if (app.state.selection) void app.expand(app.state.selection, "ancestors");
  });
  $("#expand-descendants").addEventListener("click", () => {
    if (app.state.selection) void app.expand(app.state.selection, "descendants");
  });

  document.body.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("[data-node-id]");
    if (target) app.selectNode(target.getAttribute("data-node-id"));
  });

  app.reset();
}

document.addEventListener("DOMContentLoaded", main);
