// Control/treatment parity: identically-seeded sessions must differ in the
// DOM only by the explanation panel and the feedback text.
import { describe, expect, test } from "vitest";
import type { Verdict } from "../src/api.js";
import { mountApp, uniqueParticipant } from "./helpers.js";

const WRONG_OF: Record<Verdict, Verdict> = {
  go_up: "go_down",
  remain_stable: "go_up",
  go_down: "remain_stable",
};

async function runSession(group: "control" | "treatment", seed: number) {
  const { root, app, api } = mountApp();
  await app.start(group, uniqueParticipant(group), "CS", seed);
  // answer question 1 incorrectly so feedback would be shown if present
  const payload = await api.round(app.sessionId, 1);
  const q1 = payload.questions[0];
  const verdict = (
    await api.whatIf(app.sessionId, q1.month_index, q1.direction, undefined, 1)
  ).verdict;
  await app.submitAnswer(1, WRONG_OF[verdict]);
  return { root, html: root.innerHTML, app, api };
}

describe("control vs treatment", () => {
  test("control DOM carries no coefficient bars, explanation panel or feedback text", async () => {
    const seed = 424242;
    const control = await runSession("control", seed);
    expect(control.root.querySelectorAll(".coef-bar")).toHaveLength(0);
    expect(control.root.querySelector(".explanation-panel")).toBeNull();
    expect(control.root.querySelector(".feedback-text")).toBeNull();
    expect(control.html).not.toContain("coefficient");
  }, 60_000);

  test("identically-seeded treatment session shows bars and feedback text", async () => {
    const seed = 424242;
    const treatment = await runSession("treatment", seed);
    expect(
      treatment.root.querySelectorAll(".coef-bar").length,
    ).toBeGreaterThan(0);
    expect(treatment.root.querySelector(".explanation-panel")).not.toBeNull();
    expect(treatment.root.querySelector(".feedback-text")).not.toBeNull();
    const rule = treatment.root.querySelector(".feedback-text")!.textContent!;
    expect(rule).toContain("positive weight");
  }, 60_000);

  test("stripping explanation and feedback makes the DOMs identical", async () => {
    const seed = 424242;
    const control = await runSession("control", seed);
    const controlHtml = control.html;
    const treatment = await runSession("treatment", seed);
    for (const selector of [".explanation-panel", ".feedback-text"]) {
      treatment.root.querySelectorAll(selector).forEach((node) => node.remove());
    }
    expect(treatment.root.innerHTML).toBe(controlHtml);
  }, 60_000);
});
