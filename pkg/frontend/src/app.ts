/** Application wiring: session form, panels, and the store. */

import { SessionApi } from "./api.js";
import { DendrogramPanel } from "./dendrogram_panel.js";
import { ScatterPanel } from "./scatter_panel.js";
import { SessionStore } from "./state.js";
import { TreePanel } from "./tree_panel.js";

const PRESETS: Record<string, Record<string, unknown>> = {
  "pddp (k=2)": { algorithm: "pddp", max_clusters: 2 },
  "pddp (k=3)": { algorithm: "pddp", max_clusters: 3 },
  "depddp (auto k)": { algorithm: "depddp" },
  "ipddp (k=3, trim 0.1)": { algorithm: "ipddp", max_clusters: 3, trim_fraction: 0.1 },
  "km_pddp (k=3)": { algorithm: "km_pddp", max_clusters: 3 },
  "bkm (k=3)": { algorithm: "bkm", max_clusters: 3 },
};

export function mountApp(root: HTMLElement, baseUrl = ""): SessionStore {
  const doc = root.ownerDocument;
  const api = new SessionApi(baseUrl);
  const store = new SessionStore(api);

  root.innerHTML = `
    <header>
      <h1>divclust split editor</h1>
      <form id="session-form">
        <input id="dataset-id" placeholder="dataset id" required />
        <select id="preset"></select>
        <button type="submit">start session</button>
        <button type="button" id="reset-session">reset</button>
        <span id="revision-indicator"></span>
      </form>
    </header>
    <main>
      <section id="tree-panel" class="panel"></section>
      <section id="scatter-panel" class="panel"></section>
      <section id="dendrogram-panel" class="panel"></section>
    </main>
  `;

  const preset = root.querySelector("#preset") as HTMLSelectElement;
  for (const name of Object.keys(PRESETS)) {
    const option = doc.createElement("option");
    option.value = name;
    option.textContent = name;
    preset.appendChild(option);
  }

  new TreePanel(root.querySelector("#tree-panel") as HTMLElement, store);
  new ScatterPanel(root.querySelector("#scatter-panel") as HTMLElement, store);
  new DendrogramPanel(root.querySelector("#dendrogram-panel") as HTMLElement, store);

  const indicator = root.querySelector("#revision-indicator") as HTMLElement;
  store.subscribe((state) => {
    indicator.textContent =
      state.sessionId === null
        ? ""
        : `session ${state.sessionId} @ revision ${state.revision}` +
          (state.conflict ? " (conflict)" : "");
  });

  const form = root.querySelector("#session-form") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const datasetId = (root.querySelector("#dataset-id") as HTMLInputElement).value;
    void store.createSession(datasetId, PRESETS[preset.value]);
  });
  (root.querySelector("#reset-session") as HTMLButtonElement).addEventListener(
    "click",
    () => void store.reset(),
  );

  return store;
}

declare global {
  interface Window {
    divclustStore?: SessionStore;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.divclustStore = mountApp(document.getElementById("app") as HTMLElement);
}
