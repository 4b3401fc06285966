/** 2-D node view with a draggable vertical split line.
 *
 * Point colors come straight from the server's side assignments. The line
 * is clamped to the open score range while dragging; releasing from a
 * position that was clamped (raw pointer outside the range) snaps the line
 * and issues no request. Commits happen on release only, through the
 * store's single-flight mutation queue.
 */

import { SIDE_COLORS } from "./palette.js";
import type { SessionStore } from "./state.js";
import type { ViewRecord } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 540;
const HEIGHT = 420;
const MARGIN = 30;

// keep the committed point strictly inside the open range
const RANGE_EPSILON = 1e-9;

export class ScatterPanel {
  /** Current line position in data coordinates, while dragging. */
  linePosition: number | null = null;
  dragging = false;
  private lastRawPosition: number | null = null;
  private view: ViewRecord | null = null;

  constructor(
    private root: HTMLElement,
    private store: SessionStore,
  ) {
    store.subscribe((state) => {
      this.view = state.view;
      if (!this.dragging) {
        this.linePosition = state.view?.split_point ?? null;
        this.render();
      }
    });
  }

  private xRange(): [number, number] {
    const view = this.view!;
    const xs = view.coords.map((c) => c[0]);
    return [Math.min(...xs), Math.max(...xs)];
  }

  private toPx(x: number, lo: number, hi: number): number {
    const span = hi - lo || 1;
    return MARGIN + ((x - lo) / span) * (WIDTH - 2 * MARGIN);
  }

  fromPx(px: number): number {
    const [lo, hi] = this.xRange();
    const span = hi - lo || 1;
    return lo + ((px - MARGIN) / (WIDTH - 2 * MARGIN)) * span;
  }

  /** Clamp a requested line position into the open score range. */
  clamp(x: number): number {
    const view = this.view!;
    const [lo, hi] = view.score_range;
    const inset = (hi - lo) * RANGE_EPSILON || RANGE_EPSILON;
    return Math.min(Math.max(x, lo + inset), hi - inset);
  }

  beginDrag() {
    if (!this.view) return;
    this.dragging = true;
    this.lastRawPosition = this.linePosition;
  }

  dragTo(dataX: number) {
    if (!this.dragging || !this.view) return;
    this.lastRawPosition = dataX;
    this.linePosition = this.clamp(dataX);
    this.render();
  }

  /** Release the drag; commits unless the raw position was out of range. */
  async release(): Promise<boolean> {
    if (!this.dragging || !this.view) return false;
    this.dragging = false;
    const [lo, hi] = this.view.score_range;
    const raw = this.lastRawPosition;
    if (raw === null) return false;
    if (!(raw > lo && raw < hi)) {
      // clamped client-side: snap the line, no request
      this.linePosition = this.view.split_point;
      this.render();
      return false;
    }
    const committed = await this.store.setSplit(this.view.node_id, raw);
    if (committed === null) {
      // 409/422 path: the store re-fetched or flagged; snap to the view
      this.linePosition = this.store.state.view?.split_point ?? null;
      this.render();
      return false;
    }
    return true;
  }

  render() {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";

    const banner = doc.createElement("div");
    banner.className = "status-banner";
    if (this.store.state.conflict) {
      banner.classList.add("conflict");
      banner.textContent =
        "edit conflict: the tree changed elsewhere; showing the latest state";
    } else if (this.store.state.lastError) {
      banner.classList.add("warning");
      banner.textContent = this.store.state.lastError;
    }
    this.root.appendChild(banner);

    const view = this.view;
    if (!view) {
      const empty = doc.createElement("p");
      empty.className = "empty-view";
      empty.textContent = "select a node with a projection to see its split";
      this.root.appendChild(empty);
      return;
    }

    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("width", String(WIDTH));
    svg.setAttribute("height", String(HEIGHT));
    svg.setAttribute("class", "scatter");

    const [xlo, xhi] = this.xRange();
    const ys = view.coords.map((c) => c[1]);
    const ylo = Math.min(...ys);
    const yhi = Math.max(...ys);
    const yspan = yhi - ylo || 1;

    view.coords.forEach((coord, index) => {
      const circle = doc.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", this.toPx(coord[0], xlo, xhi).toFixed(2));
      circle.setAttribute(
        "cy",
        (HEIGHT - MARGIN - ((coord[1] - ylo) / yspan) * (HEIGHT - 2 * MARGIN)).toFixed(2),
      );
      circle.setAttribute("r", "3");
      const side = view.side ? view.side[index] : 0;
      circle.setAttribute("fill", SIDE_COLORS[side]);
      circle.setAttribute("class", `sample side-${side}`);
      circle.setAttribute("data-sample", String(view.sample_indices[index]));
      svg.appendChild(circle);
    });

    if (this.linePosition !== null) {
      const line = doc.createElementNS(SVG_NS, "line");
      const px = this.toPx(this.linePosition, xlo, xhi);
      line.setAttribute("x1", px.toFixed(2));
      line.setAttribute("x2", px.toFixed(2));
      line.setAttribute("y1", String(MARGIN / 2));
      line.setAttribute("y2", String(HEIGHT - MARGIN / 2));
      line.setAttribute("class", "split-line");
      line.addEventListener("pointerdown", (event) => {
        event.preventDefault();
        this.beginDrag();
      });
      svg.appendChild(line);
    }

    svg.addEventListener("pointermove", (event) => {
      if (!this.dragging) return;
      const rect = (svg as unknown as { getBoundingClientRect(): DOMRect })
        .getBoundingClientRect();
      this.dragTo(this.fromPx(((event as PointerEvent).clientX ?? 0) - rect.left));
    });
    svg.addEventListener("pointerup", () => {
      void this.release();
    });

    const caption = doc.createElement("div");
    caption.className = "view-caption";
    caption.textContent =
      `node #${view.node_id} (n=${view.size}, rule=${view.rule_tag ?? "-"})` +
      ` revision ${this.store.state.revision}`;
    this.root.appendChild(svg);
    this.root.appendChild(caption);
  }
}
