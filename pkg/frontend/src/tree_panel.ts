/** Collapsible binary-tree navigator.
 *
 * Node badges show size and criterion; manual-split nodes get a flag;
 * nodes without a projection (tiny infeasible leaves) render disabled and
 * are never requested.
 */

import type { SessionStore } from "./state.js";
import type { TreeDoc, TreeNode } from "./types.js";

export class TreePanel {
  private collapsed = new Set<number>();

  constructor(
    private root: HTMLElement,
    private store: SessionStore,
  ) {
    store.subscribe(() => this.render());
  }

  render() {
    const tree = this.store.state.tree;
    this.root.textContent = "";
    if (!tree) return;
    const byId = new Map(tree.nodes.map((n) => [n.id, n]));
    this.root.appendChild(this.renderNode(tree, byId, tree.root_id));
  }

  private renderNode(
    tree: TreeDoc,
    byId: Map<number, TreeNode>,
    nodeId: number,
  ): HTMLElement {
    const node = byId.get(nodeId)!;
    const doc = this.root.ownerDocument;
    const li = doc.createElement("div");
    li.className = "tree-node";

    const row = doc.createElement("div");
    row.className = "tree-row";
    row.dataset.nodeId = String(node.id);
    if (this.store.state.selectedNode === node.id) row.classList.add("selected");

    if (node.children) {
      const toggle = doc.createElement("button");
      toggle.className = "toggle";
      toggle.textContent = this.collapsed.has(node.id) ? "+" : "-";
      toggle.addEventListener("click", (event) => {
        event.stopPropagation();
        if (this.collapsed.has(node.id)) this.collapsed.delete(node.id);
        else this.collapsed.add(node.id);
        this.render();
      });
      row.appendChild(toggle);
    }

    const label = doc.createElement("span");
    label.className = "node-label";
    const criterion =
      node.criterion === null ? "" : ` crit=${node.criterion.toPrecision(3)}`;
    label.textContent = `#${node.id} n=${node.size}${criterion}`;
    row.appendChild(label);

    if (node.manual) {
      const flag = doc.createElement("span");
      flag.className = "manual-flag";
      flag.title = "manually edited split";
      flag.textContent = "⚑";
      row.appendChild(flag);
    }

    if (!node.viewable) {
      row.classList.add("disabled");
      row.title = "no projection (leaf below the minimum split size)";
    } else {
      row.addEventListener("click", () => {
        void this.store.selectNode(node.id);
      });
    }
    li.appendChild(row);

    if (node.children && !this.collapsed.has(node.id)) {
      const children = doc.createElement("div");
      children.className = "tree-children";
      for (const child of node.children) {
        children.appendChild(this.renderNode(tree, byId, child));
      }
      li.appendChild(children);
    }
    return li;
  }
}
