// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { DendrogramPanel, leafOrder } from "../src/dendrogram_panel.js";
import { ScatterPanel } from "../src/scatter_panel.js";
import { SessionStore } from "../src/state.js";
import { TreePanel } from "../src/tree_panel.js";
import { FakeApi, sampleDendrogram } from "./helpers.js";

async function mountedPanels() {
  const fake = new FakeApi();
  const store = new SessionStore(fake.api());
  const treeEl = document.createElement("div");
  const scatterEl = document.createElement("div");
  const dendroEl = document.createElement("div");
  const tree = new TreePanel(treeEl, store);
  const scatter = new ScatterPanel(scatterEl, store);
  const dendro = new DendrogramPanel(dendroEl, store);
  await store.createSession("demo", { algorithm: "pddp", max_clusters: 2 });
  return { fake, store, treeEl, scatterEl, dendroEl, tree, scatter, dendro };
}

describe("TreePanel", () => {
  it("renders every node with clickable internals", async () => {
    const { treeEl } = await mountedPanels();
    const rows = treeEl.querySelectorAll(".tree-row");
    expect(rows.length).toBe(3);
    expect(treeEl.querySelectorAll(".tree-row.disabled").length).toBe(1);
  });

  it("disabled leaves do not trigger view requests when clicked", async () => {
    const { fake, treeEl } = await mountedPanels();
    const disabled = treeEl.querySelector(".tree-row.disabled") as HTMLElement;
    const before = fake.requests.length;
    disabled.click();
    await new Promise((r) => setTimeout(r, 5));
    expect(fake.requests.length).toBe(before);
  });

  it("selecting a viewable node loads its view", async () => {
    const { store, treeEl } = await mountedPanels();
    const row = treeEl.querySelector('[data-node-id="0"]') as HTMLElement;
    row.click();
    await new Promise((r) => setTimeout(r, 5));
    expect(store.state.view?.node_id).toBe(0);
  });

  it("flags manually edited nodes", async () => {
    const { store, treeEl } = await mountedPanels();
    const tree = store.state.tree!;
    tree.nodes[0].manual = true;
    store.subscribe(() => undefined);
    // re-render via a state change
    await store.selectNode(0);
    expect(treeEl.querySelectorAll(".manual-flag").length).toBe(1);
  });
});

describe("ScatterPanel", () => {
  it("colors points by the server's side assignment", async () => {
    const { store, scatterEl } = await mountedPanels();
    await store.selectNode(0);
    const sides = [...scatterEl.querySelectorAll("circle")].map((c) =>
      c.getAttribute("class"),
    );
    expect(sides).toEqual(["sample side-0", "sample side-0", "sample side-1", "sample side-1"]);
  });

  it("drag inside the range commits once on release", async () => {
    const { fake, store, scatter } = await mountedPanels();
    await store.selectNode(0);
    scatter.beginDrag();
    scatter.dragTo(0.3);
    scatter.dragTo(0.6);
    const committed = await scatter.release();
    expect(committed).toBe(true);
    const points = fake
      .splitRequests()
      .map((r) => JSON.parse(String(r.init?.body ?? "{}")).point);
    expect(points).toEqual([0.6]);
    expect(store.state.revision).toBe(1);
  });

  it("drag beyond the max score clamps and issues no request", async () => {
    const { fake, store, scatter } = await mountedPanels();
    await store.selectNode(0);
    scatter.beginDrag();
    scatter.dragTo(99.0);
    expect(scatter.linePosition).toBeLessThan(2.0);
    const committed = await scatter.release();
    expect(committed).toBe(false);
    expect(fake.splitRequests().length).toBe(0);
    // the line snaps back to the server's split point
    expect(scatter.linePosition).toBe(0.0);
  });

  it("shows a conflict banner on 409 without replaying", async () => {
    const { fake, store, scatter, scatterEl } = await mountedPanels();
    await store.selectNode(0);
    fake.failNextSplitWith = 409;
    scatter.beginDrag();
    scatter.dragTo(0.5);
    const committed = await scatter.release();
    expect(committed).toBe(false);
    expect(store.state.conflict).toBe(true);
    expect(scatterEl.querySelector(".status-banner.conflict")).toBeTruthy();
    expect(fake.splitRequests().length).toBe(1);
  });

  it("snaps back with a message on 422", async () => {
    const { fake, store, scatter, scatterEl } = await mountedPanels();
    await store.selectNode(0);
    fake.failNextSplitWith = 422;
    scatter.beginDrag();
    scatter.dragTo(1.5);
    await scatter.release();
    expect(scatter.linePosition).toBe(0.0);
    expect(scatterEl.querySelector(".status-banner.warning")?.textContent).toContain(
      "outside range",
    );
  });
});

describe("DendrogramPanel", () => {
  it("renders one bracket per linkage row and a strip cell per sample", async () => {
    const { dendroEl } = await mountedPanels();
    expect(dendroEl.querySelectorAll("path.merge").length).toBe(3);
    expect(dendroEl.querySelectorAll("rect.class-strip").length).toBe(4);
  });

  it("re-renders with the new revision after an edit", async () => {
    const { store, dendroEl } = await mountedPanels();
    await store.selectNode(0);
    await store.setSplit(0, 0.4);
    const svg = dendroEl.querySelector("svg.dendrogram");
    expect(svg?.getAttribute("data-revision")).toBe("1");
  });

  it("groups each cluster's samples contiguously", () => {
    const order = leafOrder(sampleDendrogram().linkage);
    expect(order).toEqual([0, 1, 2, 3]);
  });
});
