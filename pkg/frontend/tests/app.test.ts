import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ExplorerApp } from "../src/app.js";
import { nodePasses, visibleEdges, visibleNodes } from "../src/state.js";
import { EdgeEntry, GraphPayload, NodeEntry } from "../src/types.js";

type Route = { match: (url: string) => boolean; body: unknown; status?: number };

/** Scripted stand-in for the query service. Records every payload served so
 * tests can assert the view is exactly the union of what the server sent. */
function mockServer(routes: Route[]) {
  const served: GraphPayload[] = [];
  const requests: string[] = [];
  const fetchFn = async (url: string): Promise<Response> => {
    requests.push(url);
    const route = routes.find((r) => r.match(url));
    if (!route) {
      return new Response(JSON.stringify({ error: `no route for ${url}` }), { status: 404 });
    }
    if ((route.status ?? 200) === 200 && isPayload(route.body)) {
      served.push(route.body);
    }
    return new Response(JSON.stringify(route.body), { status: route.status ?? 200 });
  };
  return { fetchFn, served, requests };
}

function isPayload(body: unknown): body is GraphPayload {
  return (
    typeof body === "object" &&
    body !== null &&
    Array.isArray((body as GraphPayload).nodes) &&
    Array.isArray((body as GraphPayload).edges)
  );
}

const entity = (id: string, attrs: Record<string, string> = {}, depth?: number): NodeEntry => ({
  id,
  kind: "Entity",
  attrs,
  ...(depth !== undefined ? { depth } : {}),
});

const wdf = (id: string, source: string, target: string): EdgeEntry => ({
  id,
  kind: "WasDerivedFrom",
  source,
  target,
  attrs: {},
});

/** Fixture mirroring a 3-hop pipeline chain m3 -> m2 -> m1 plus a photo node. */
function chainRoutes(): Route[] {
  return [
    {
      match: (url) => url.includes("/api/nodes?") && url.includes("IMG-0942.jpg"),
      body: { nodes: [entity("photo", { filename: "IMG-0942.jpg" })], edges: [] },
    },
    {
      match: (url) => url.includes("/api/nodes?") && url.includes("value=absent"),
      body: { nodes: [], edges: [] },
    },
    {
      match: (url) => url.includes("/api/nodes?") && url.includes("value=m3"),
      body: { nodes: [entity("m3", { stage: "3" })], edges: [] },
    },
    {
      match: (url) => url.includes("/m3/ancestors"),
      body: { nodes: [entity("m3", { stage: "3" }, 0), entity("m2", { stage: "2" }, 1)], edges: [wdf("d2", "m3", "m2")] },
    },
    {
      match: (url) => url.includes("/m2/ancestors"),
      body: { nodes: [entity("m2", { stage: "2" }, 0), entity("m1", { stage: "1" }, 1)], edges: [wdf("d1", "m2", "m1")] },
    },
    {
      match: (url) => url.includes("/m1/ancestors"),
      body: { nodes: [entity("m1", { stage: "1" }, 0)], edges: [] },
    },
  ];
}

function makeApp(routes: Route[]) {
  const server = mockServer(routes);
  const app = new ExplorerApp(new ApiClient("", server.fetchFn));
  return { app, server };
}

/** Independent union-of-payloads oracle (placeholder upgrade mirrors spec). */
function unionOfPayloads(served: GraphPayload[]): { nodeIds: Set<string>; edgeIds: Set<string> } {
  const nodeIds = new Set<string>();
  const edgeIds = new Set<string>();
  for (const payload of served) {
    payload.nodes.forEach((n) => nodeIds.add(n.id));
    payload.edges.forEach((e) => edgeIds.add(e.id));
  }
  return { nodeIds, edgeIds };
}

describe("search", () => {
  it("finds one result for the photo fixture and makes it selectable", async () => {
    const { app } = makeApp(chainRoutes());
    await app.search("filename", "IMG-0942.jpg");
    expect(app.state.searchResults).toEqual(["photo"]);
    expect(app.state.banner).toBeNull();
    app.selectNode("photo");
    expect(app.state.selection).toBe("photo");
  });

  it("shows an empty-result notice for absent values", async () => {
    const { app } = makeApp(chainRoutes());
    await app.search("filename", "absent");
    expect(app.state.searchResults).toEqual([]);
    expect(app.state.notice).toBe("no matching nodes");
    expect(app.state.nodes.size).toBe(0);
  });

  it("raises a banner and keeps state on a malformed reply", async () => {
    const { app } = makeApp([
      { match: (url) => url.includes("/api/nodes?"), body: { surprise: true } },
    ]);
    await app.search("k", "v");
    expect(app.state.banner).toMatch(/malformed/);
    expect(app.state.nodes.size).toBe(0);
  });

  it("raises a banner when the service is unreachable", async () => {
    const app = new ExplorerApp(
      new ApiClient("", async () => {
        throw new Error("ECONNREFUSED");
      }),
    );
    await app.search("k", "v");
    expect(app.state.banner).toMatch(/unreachable/);
    expect(app.state.nodes.size).toBe(0);
  });
});

describe("expand", () => {
  it("walks the chain one hop per click until exhausted", async () => {
    const { app } = makeApp(chainRoutes());
    await app.search("id", "m3");
    expect(app.state.nodes.size).toBe(1);

    await app.expand("m3", "ancestors");
    expect(app.state.nodes.size).toBe(2);
    expect(app.state.edges.size).toBe(1);

    await app.expand("m2", "ancestors");
    expect(app.state.nodes.size).toBe(3);
    expect(app.state.edges.size).toBe(2);
    expect([...app.state.edges.values()].every((e) => e.kind === "WasDerivedFrom")).toBe(true);

    await app.expand("m1", "ancestors");
    expect(app.state.nodes.size).toBe(3);
    expect(app.state.notice).toBe("no more ancestors");
  });

  it("is idempotent for an already-expanded node", async () => {
    const { app } = makeApp(chainRoutes());
    await app.search("id", "m3");
    await app.expand("m3", "ancestors");
    const nodesBefore = new Set(app.state.nodes.keys());
    const edgesBefore = new Set(app.state.edges.keys());
    await app.expand("m3", "ancestors");
    expect(new Set(app.state.nodes.keys())).toEqual(nodesBefore);
    expect(new Set(app.state.edges.keys())).toEqual(edgesBefore);
    expect(app.state.notice).toBe("no more ancestors");
  });

  it("keeps the prior view when a fetch fails", async () => {
    const routes = chainRoutes();
    routes.splice(3, 1, {
      match: (url) => url.includes("/m3/ancestors"),
      body: { error: "boom" },
      status: 500,
    });
    const { app } = makeApp(routes);
    await app.search("id", "m3");
    await app.expand("m3", "ancestors");
    expect(app.state.banner).toBe("boom");
    expect([...app.state.nodes.keys()]).toEqual(["m3"]);
    expect(app.state.edges.size).toBe(0);
  });

  it("refuses to expand a node that is not loaded", async () => {
    const { app, server } = makeApp(chainRoutes());
    await app.expand("m3", "ancestors");
    expect(app.state.banner).toMatch(/not loaded/);
    expect(server.requests).toEqual([]);
  });

  it("the loaded set is monotone across operations", async () => {
    const { app } = makeApp(chainRoutes());
    let lastSize = 0;
    for (const step of [
      () => app.search("id", "m3"),
      () => app.expand("m3", "ancestors"),
      () => app.expand("m2", "ancestors"),
      () => app.search("filename", "absent"),
      () => app.expand("m1", "ancestors"),
    ]) {
      await step();
      const size = app.state.nodes.size + app.state.edges.size;
      expect(size).toBeGreaterThanOrEqual(lastSize);
      lastSize = size;
    }
  });
});

describe("view = union of fetched payloads under filters", () => {
  it("never shows anything the server did not send, and shows exactly the union", async () => {
    const { app, server } = makeApp(chainRoutes());
    await app.search("filename", "IMG-0942.jpg");
    await app.search("id", "m3");
    await app.expand("m3", "ancestors");
    await app.expand("m2", "ancestors");

    const union = unionOfPayloads(server.served);
    expect(new Set(app.state.nodes.keys())).toEqual(union.nodeIds);
    expect(new Set(app.state.edges.keys())).toEqual(union.edgeIds);

    // under filters: visible = union elements passing the filter predicate
    app.setFilters(["Entity"], "2");
    const expectedVisible = [...app.state.nodes.values()]
      .filter((n) => union.nodeIds.has(n.id))
      .filter((n) => nodePasses(app.state.filters, n))
      .map((n) => n.id)
      .sort();
    expect(visibleNodes(app.state).map((n) => n.id).sort()).toEqual(expectedVisible);
    for (const edge of visibleEdges(app.state)) {
      expect(union.edgeIds.has(edge.id)).toBe(true);
    }

    app.clearFilters();
    expect(visibleNodes(app.state).length).toBe(union.nodeIds.size);
  });

  it("placeholder endpoints come from payloads too, flagged by the server", async () => {
    const { app } = makeApp([
      {
        match: (url) => url.includes("/x/ancestors"),
        body: {
          nodes: [entity("x", {}, 0), { id: "ghost", kind: null, attrs: {}, placeholder: true, depth: 1 }],
          edges: [wdf("d", "x", "ghost")],
        },
      },
      {
        match: (url) => url.includes("value=x"),
        body: { nodes: [entity("x")], edges: [] },
      },
    ]);
    await app.search("id", "x");
    await app.expand("x", "ancestors");
    const ghost = app.state.nodes.get("ghost");
    expect(ghost?.placeholder).toBe(true);
    expect(visibleEdges(app.state).map((e) => e.id)).toEqual(["d"]);
  });
});

describe("reset discards stale responses", () => {
  it("a fetch resolving after reset does not repopulate the view", async () => {
    let release: (() => void) | undefined;
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const fetchFn = async (url: string): Promise<Response> => {
      if (url.includes("/api/nodes?")) {
        await gate;
        return new Response(JSON.stringify({ nodes: [entity("late")], edges: [] }), { status: 200 });
      }
      return new Response(JSON.stringify({ error: "no route" }), { status: 404 });
    };
    const app = new ExplorerApp(new ApiClient("", fetchFn));
    const pending = app.search("k", "v");
    app.reset();
    release!();
    await pending;
    expect(app.state.nodes.size).toBe(0);
    expect(app.state.searchResults).toEqual([]);
  });
});
