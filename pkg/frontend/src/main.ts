import { ApiClient } from "./api.js";
import { StudioSession } from "./state.js";
import { StudioView } from "./view.js";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? (window as { PERCEPT_API?: string }).PERCEPT_API ?? "http://127.0.0.1:8080";
}

const api = new ApiClient(baseUrl());
const session = new StudioSession(api, window.localStorage);
const root = document.getElementById("studio");
if (!root) throw new Error("missing #studio mount point");

const view = new StudioView(session, root);
if (session.list().length === 0) {
  session.addVariant("variant 1");
}
view.render();

const statusEl = document.getElementById("service-status");
if (statusEl) {
  api
    .health()
    .then((h) => {
      statusEl.textContent = h.model_loaded ? "service ready" : "service up, model not loaded";
      statusEl.className = h.model_loaded ? "ok" : "warn";
    })
    .catch(() => {
      statusEl.textContent = "service unreachable";
      statusEl.className = "down";
    });
}
