/** Dendrogram panel with class color strip, re-rendered after every edit.
 *
 * Layout follows the server's linkage rows verbatim: leaves in traversal
 * order of the merge tree, merges drawn at their encoded heights. The strip
 * colors samples by the dataset's class labels (when present) with the
 * shared palette; with no classes it falls back to the current cluster
 * labels, still server-computed.
 */

import { classColor } from "./palette.js";
import type { SessionStore } from "./state.js";
import type { DendrogramDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 540;
const HEIGHT = 300;
const MARGIN = 16;
const STRIP = 12;

export function leafOrder(linkage: DendrogramDoc["linkage"]): number[] {
  const n = linkage.length + 1;
  if (n === 1) return [0];
  const order: number[] = [];
  const stack = [2 * n - 2];
  while (stack.length) {
    const cluster = stack.pop()!;
    if (cluster < n) {
      order.push(cluster);
    } else {
      const [a, b] = linkage[cluster - n];
      stack.push(b, a);
    }
  }
  return order;
}

export class DendrogramPanel {
  constructor(
    private root: HTMLElement,
    private store: SessionStore,
  ) {
    store.subscribe(() => this.render());
  }

  render() {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    const dendro = this.store.state.dendrogram;
    if (!dendro || dendro.linkage.length === 0) return;

    const n = dendro.linkage.length + 1;
    const order = leafOrder(dendro.linkage);
    const plotW = WIDTH - 2 * MARGIN;
    const plotH = HEIGHT - 2 * MARGIN - STRIP;
    const maxHeight = Math.max(...dendro.linkage.map((row) => row[2])) || 1;

    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("width", String(WIDTH));
    svg.setAttribute("height", String(HEIGHT));
    svg.setAttribute("class", "dendrogram");
    svg.setAttribute("data-revision", String(dendro.revision));

    const xs = new Map<number, number>();
    const ysBottom = MARGIN + plotH;
    const ypos = new Map<number, number>();
    order.forEach((leaf, rank) => {
      xs.set(leaf, MARGIN + ((rank + 0.5) * plotW) / n);
      ypos.set(leaf, ysBottom);
    });

    dendro.linkage.forEach((row, index) => {
      const [a, b, height] = row;
      const xa = xs.get(a)!;
      const xb = xs.get(b)!;
      const ym = MARGIN + plotH * (1 - height / maxHeight);
      const path = doc.createElementNS(SVG_NS, "path");
      path.setAttribute(
        "d",
        `M ${xa.toFixed(1)} ${ypos.get(a)!.toFixed(1)} ` +
          `L ${xa.toFixed(1)} ${ym.toFixed(1)} ` +
          `L ${xb.toFixed(1)} ${ym.toFixed(1)} ` +
          `L ${xb.toFixed(1)} ${ypos.get(b)!.toFixed(1)}`,
      );
      path.setAttribute("class", "merge");
      svg.appendChild(path);
      xs.set(n + index, (xa + xb) / 2);
      ypos.set(n + index, ym);
    });

    const strip = dendro.class_labels ?? dendro.labels;
    const cell = plotW / n;
    order.forEach((leaf, rank) => {
      const rect = doc.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", (MARGIN + rank * cell).toFixed(1));
      rect.setAttribute("y", String(ysBottom + 3));
      rect.setAttribute("width", cell.toFixed(2));
      rect.setAttribute("height", String(STRIP - 4));
      rect.setAttribute("fill", classColor(strip[leaf]));
      rect.setAttribute("class", "class-strip");
      rect.setAttribute("data-sample", String(leaf));
      svg.appendChild(rect);
    });

    this.root.appendChild(svg);
  }
}
