// Bootstrap: read the study link's query parameters and mount the app.
// Links carry ?group=control or ?group=treatment (separate links per arm),
// optionally &participant=<id>&background=CS|NonCS.

import { ApiClient, Group } from "./api.js";
import { StudyApp } from "./app.js";

function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const app = new StudyApp(root, new ApiClient(""));

  const params = new URLSearchParams(window.location.search);
  const group = params.get("group");
  const participant = params.get("participant");
  if (group === "control" || group === "treatment") {
    void app.start(
      group as Group,
      participant ?? `anon-${Date.now().toString(36)}`,
      params.get("background") ?? "NonCS",
    );
  } else {
    app.renderJoin();
  }
}

boot();
