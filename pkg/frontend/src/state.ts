/** Session store: the single mutable state behind all panels.
 *
 * Every mutation returns the full updated tree, so the store refreshes only
 * on user action (no polling). At most one split mutation is in flight per
 * session; drag releases arriving while one is pending coalesce to the most
 * recent point and are submitted after the response lands.
 */

import { RequestFailed, SessionApi } from "./api.js";
import type { DendrogramDoc, TreeDoc, TreeNode, ViewRecord } from "./types.js";

export interface StoreState {
  sessionId: string | null;
  revision: number;
  tree: TreeDoc | null;
  dendrogram: DendrogramDoc | null;
  selectedNode: number | null;
  view: ViewRecord | null;
  conflict: boolean;
  lastError: string | null;
}

type Listener = (state: StoreState) => void;

export class SessionStore {
  state: StoreState = {
    sessionId: null,
    revision: -1,
    tree: null,
    dendrogram: null,
    selectedNode: null,
    view: null,
    conflict: false,
    lastError: null,
  };

  private listeners: Listener[] = [];
  private inflight = false;
  private queued: { nodeId: number; point: number } | null = null;

  constructor(public api: SessionApi) {}

  subscribe(listener: Listener) {
    this.listeners.push(listener);
  }

  private emit() {
    for (const l of this.listeners) l(this.state);
  }

  private patch(partial: Partial<StoreState>) {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  nodeById(id: number): TreeNode | undefined {
    return this.state.tree?.nodes.find((n) => n.id === id);
  }

  async createSession(datasetId: string, config: Record<string, unknown>) {
    const created = await this.api.createSession(datasetId, config);
    this.patch({ sessionId: created.session_id, conflict: false, lastError: null });
    await this.refresh();
    return created;
  }

  async refresh() {
    if (!this.state.sessionId) return;
    const tree = await this.api.getTree(this.state.sessionId);
    const dendrogram = await this.api.getDendrogram(this.state.sessionId);
    this.patch({ tree, dendrogram, revision: tree.revision });
    if (this.state.selectedNode !== null) {
      await this.selectNode(this.state.selectedNode);
    }
  }

  async selectNode(nodeId: number) {
    if (!this.state.sessionId) return;
    const node = this.nodeById(nodeId);
    if (node && !node.viewable) {
      // tiny infeasible leaf: disabled in the UI, never requested
      this.patch({ selectedNode: nodeId, view: null });
      return;
    }
    try {
      const view = await this.api.getView(this.state.sessionId, nodeId);
      this.patch({ selectedNode: nodeId, view, lastError: null });
    } catch (err) {
      if (err instanceof RequestFailed && err.status === 409) {
        this.patch({ selectedNode: nodeId, view: null });
        return;
      }
      throw err;
    }
  }

  /** Commit a split edit; coalesces while a mutation is in flight. */
  async setSplit(nodeId: number, point: number): Promise<TreeDoc | null> {
    if (!this.state.sessionId) return null;
    if (this.inflight) {
      this.queued = { nodeId, point };
      return null;
    }
    this.inflight = true;
    try {
      const tree = await this.api.setSplit(
        this.state.sessionId,
        nodeId,
        point,
        this.state.revision,
      );
      const dendrogram = await this.api.getDendrogram(this.state.sessionId);
      this.patch({
        tree,
        dendrogram,
        revision: tree.revision,
        conflict: false,
        lastError: null,
      });
      if (this.state.selectedNode !== null) {
        await this.selectNode(this.state.selectedNode);
      }
      return tree;
    } catch (err) {
      if (err instanceof RequestFailed && err.status === 409) {
        // stale revision: show the conflict, re-fetch authoritative state,
        // and deliberately do not replay the edit
        this.patch({ conflict: true, lastError: err.message });
        this.queued = null;
        await this.refresh();
        return null;
      }
      if (err instanceof RequestFailed && err.status === 422) {
        this.patch({ lastError: err.message });
        return null;
      }
      throw err;
    } finally {
      this.inflight = false;
      if (this.queued) {
        const next = this.queued;
        this.queued = null;
        void this.setSplit(next.nodeId, next.point);
      }
    }
  }

  async reset() {
    if (!this.state.sessionId) return;
    const tree = await this.api.reset(this.state.sessionId);
    const dendrogram = await this.api.getDendrogram(this.state.sessionId);
    this.patch({
      tree,
      dendrogram,
      revision: tree.revision,
      conflict: false,
      lastError: null,
    });
  }

  acknowledgeConflict() {
    this.patch({ conflict: false });
  }
}
