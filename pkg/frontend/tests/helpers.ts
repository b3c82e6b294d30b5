import { ApiClient } from "../src/api.js";
import { StudyApp } from "../src/app.js";

export const BASE = "http://127.0.0.1:8923";

export function mountApp(): { root: HTMLElement; app: StudyApp; api: ApiClient } {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  root.id = "app";
  document.body.appendChild(root);
  const api = new ApiClient(BASE);
  return { root, app: new StudyApp(root, api), api };
}

export function uniqueParticipant(prefix: string): string {
  return `${prefix}-${Date.now().toString(36)}-${Math.floor(Math.random() * 1e6)}`;
}

export function text(root: HTMLElement, selector: string): string {
  const node = root.querySelector(selector);
  return node?.textContent ?? "";
}

export async function waitFor(
  condition: () => boolean,
  timeoutMs = 5000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (condition()) return;
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
  throw new Error("condition not met within timeout");
}
