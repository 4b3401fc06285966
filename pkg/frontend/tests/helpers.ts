/** Shared test fixtures: a canned two-node session served by a fake API. */

import { SessionApi } from "../src/api.js";
import type { DendrogramDoc, TreeDoc, ViewRecord } from "../src/types.js";

export function sampleTree(revision = 0): TreeDoc {
  return {
    revision,
    labels: [0, 0, 1, 1],
    labels_digest: "digest-r" + revision,
    n: 4,
    root_id: 0,
    split_order: [0],
    config: { algorithm: "pddp", max_clusters: 2 },
    nodes: [
      {
        id: 0,
        parent: null,
        children: [1, 2],
        depth: 0,
        size: 4,
        criterion: 10.0,
        feasible: true,
        rule_tag: "pddp",
        split_point: 0.0,
        manual: false,
        score_range: [-2.0, 2.0],
        viewable: true,
      },
      {
        id: 1,
        parent: 0,
        children: null,
        depth: 1,
        size: 2,
        criterion: null,
        feasible: false,
        rule_tag: "pddp",
        split_point: null,
        score_range: null,
        manual: false,
        viewable: false,
      },
      {
        id: 2,
        parent: 0,
        children: null,
        depth: 1,
        size: 2,
        criterion: 4.0,
        feasible: true,
        rule_tag: "pddp",
        split_point: 0.5,
        score_range: [-1.0, 1.0],
        manual: false,
        viewable: true,
      },
    ],
  };
}

export function sampleView(revision = 0): ViewRecord {
  return {
    node_id: 0,
    size: 4,
    depth: 0,
    rule_tag: "pddp",
    criterion: 10.0,
    feasible: true,
    split_point: 0.0,
    manual: false,
    score_range: [-2.0, 2.0],
    children: [1, 2],
    sample_indices: [0, 1, 2, 3],
    coords: [
      [-2.0, 0.1],
      [-1.0, -0.2],
      [1.0, 0.3],
      [2.0, -0.1],
    ],
    side: [0, 0, 1, 1],
    revision,
  };
}

export function sampleDendrogram(revision = 0): DendrogramDoc {
  return {
    revision,
    linkage: [
      [0, 1, 1, 2],
      [2, 3, 1, 2],
      [4, 5, 2, 4],
    ],
    labels: [0, 0, 1, 1],
    class_labels: [1, 1, 0, 0],
  };
}

export interface RecordedRequest {
  url: string;
  init?: RequestInit;
}

/** Fake fetch returning canned JSON per (method, path-pattern). */
export class FakeApi {
  requests: RecordedRequest[] = [];
  revision = 0;
  failNextSplitWith: number | null = null;

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    this.requests.push({ url, init });
    const method = init?.method ?? "GET";
    const respond = (status: number, body: unknown) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
      });

    if (method === "POST" && url.endsWith("/sessions")) {
      return respond(200, {
        session_id: "s1",
        revision: 0,
        summary: { node_count: 3, leaf_count: 2, labels_digest: "digest-r0" },
      });
    }
    if (url.endsWith("/tree")) {
      return respond(200, sampleTree(this.revision));
    }
    if (url.includes("/nodes/") && url.endsWith("/view")) {
      return respond(200, { ...sampleView(this.revision), revision: this.revision });
    }
    if (url.endsWith("/dendrogram")) {
      return respond(200, sampleDendrogram(this.revision));
    }
    if (url.includes("/split")) {
      if (this.failNextSplitWith !== null) {
        const status = this.failNextSplitWith;
        this.failNextSplitWith = null;
        return respond(status, {
          code: status === 409 ? "revision_conflict" : "point_out_of_range",
          message: status === 409 ? "stale revision" : "outside range",
        });
      }
      const body = JSON.parse(String(init?.body ?? "{}"));
      if (body.expected_revision !== this.revision) {
        return respond(409, {
          code: "revision_conflict",
          message: `expected ${body.expected_revision}, current ${this.revision}`,
        });
      }
      this.revision += 1;
      return respond(200, sampleTree(this.revision));
    }
    if (url.includes("/reset")) {
      this.revision += 1;
      return respond(200, sampleTree(this.revision));
    }
    return respond(404, { code: "unknown", message: url });
  };

  splitRequests(): RecordedRequest[] {
    return this.requests.filter((r) => r.url.includes("/split"));
  }

  api(): SessionApi {
    return new SessionApi("http://fake", this.fetch);
  }
}
