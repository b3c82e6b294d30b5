// Exercise flow: a scripted session answers all four rounds of two
// questions; the questionnaire button appears only after the eighth
// answer, and the displayed score matches the service's exported score.
import { describe, expect, test } from "vitest";
import type { Verdict } from "../src/api.js";
import { StudyApp } from "../src/app.js";
import { mountApp, text, uniqueParticipant, waitFor } from "./helpers.js";

const WRONG_OF: Record<Verdict, Verdict> = {
  go_up: "go_down",
  remain_stable: "go_up",
  go_down: "remain_stable",
};

function questionnaireHidden(root: HTMLElement): boolean {
  const button = root.querySelector("#questionnaire-btn") as HTMLButtonElement;
  return button.hidden;
}

describe("exercise flow", () => {
  test("4x2 scripted answers, questionnaire gating, exported score parity", async () => {
    const participant = uniqueParticipant("flow");
    const { root, app, api } = mountApp();
    await app.start("treatment", participant, "NonCS", 99);

    let answered = 0;
    for (let round = 1; round <= 4; round++) {
      const payload = await api.round(app.sessionId, round);
      for (const question of payload.questions) {
        expect(questionnaireHidden(root)).toBe(true); // not before the 8th
        const verdict = (
          await api.whatIf(
            app.sessionId,
            question.month_index,
            question.direction,
            undefined,
            round,
          )
        ).verdict;
        // rounds 1-2 answered correctly, rounds 3-4 deliberately wrong
        const choice = round <= 2 ? verdict : WRONG_OF[verdict];
        await app.submitAnswer(question.question, choice);
        answered++;
        expect(questionnaireHidden(root)).toBe(answered >= 8 ? false : true);
      }
      if (round < 4) {
        const next = root.querySelector("#next-round-btn") as HTMLButtonElement;
        expect(next.hidden).toBe(false);
        next.click();
        await waitFor(() =>
          text(root, ".round-label").includes(`Round ${round + 1}`),
        );
      }
    }

    const scoreLine = text(root, "#score-line");
    const shown = Number(scoreLine.match(/Score: (\d+)/)?.[1]);
    expect(shown).toBe(4); // two correct rounds

    const csv = await api.exportCsv();
    const row = csv
      .trim()
      .split("\n")
      .find((line) => line.startsWith(participant));
    expect(row).toBeDefined();
    const exportedScore = Number(row!.split(",")[3]);
    expect(exportedScore).toBe(shown);
  }, 120_000);

  test("double submission cannot double-count (idempotent by question key)", async () => {
    const { app, api } = mountApp();
    await app.start("control", uniqueParticipant("idem"), "NonCS", 7);
    await app.submitAnswer(1, "go_up");
    // a retried submit for the same question refreshes instead of recording
    await app.submitAnswer(1, "go_up");
    const summary = await api.sessionSummary(app.sessionId);
    expect(summary.answered_count).toBe(1);
  }, 60_000);

  test("questionnaire renders 13 questions and submits", async () => {
    const { root, app, api } = mountApp();
    await app.start("control", uniqueParticipant("quest"), "NonCS", 3);
    for (let round = 1; round <= 4; round++) {
      const payload = await api.round(app.sessionId, round);
      for (const question of payload.questions) {
        await app.submitAnswer(question.question, "go_up");
      }
      if (round < 4) await app.showRound(round + 1);
    }
    const button = root.querySelector("#questionnaire-btn") as HTMLButtonElement;
    expect(button.hidden).toBe(false);
    button.click();
    await waitFor(() => root.querySelector(".questionnaire-form") !== null);
    expect(root.querySelectorAll(".question-row")).toHaveLength(13);
    (root.querySelector("#questionnaire-submit") as HTMLButtonElement).click();
    await waitFor(() => root.querySelector(".screen-thanks") !== null);
  }, 120_000);
});

test("fetch failure shows a retry banner and no partial round", async () => {
  const { root, api } = mountApp();
  let failures = 1;
  const flaky = Object.create(api);
  flaky.round = (session: string, round: number) => {
    if (failures-- > 0) return Promise.reject(new Error("network down"));
    return api.round(session, round);
  };
  const app = new StudyApp(root, flaky);
  await app.start("control", uniqueParticipant("retry"), "NonCS", 13);
  expect(root.querySelector(".retry-banner")).not.toBeNull();
  expect(root.querySelector(".question-block")).toBeNull();
  (root.querySelector("#retry-btn") as HTMLButtonElement).click();
  await waitFor(() => root.querySelector(".question-block") !== null);
}, 60_000);
