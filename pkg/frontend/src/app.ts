// Single-page study app: join screen, four exercise rounds of two trend
// questions, treatment-only explanation panel, free what-if exploration,
// and the closing questionnaire. All verdicts come from the service.

import {
  ApiClient,
  ApiError,
  Direction,
  Group,
  RoundPayload,
  Verdict,
} from "./api.js";
import { coefficientChart, lineChart } from "./charts.js";

const VERDICT_TEXT: Record<Verdict, string> = {
  go_up: "Prediction goes up",
  remain_stable: "Prediction remains stable",
  go_down: "Prediction goes down",
};

const CHOICES: { value: Verdict; label: string }[] = [
  { value: "go_up", label: "Go up" },
  { value: "remain_stable", label: "Remain stable" },
  { value: "go_down", label: "Go down" },
];

interface QuestionnaireItem {
  id: string;
  category: string;
  text: string;
  kind: "likert" | "choice" | "text";
  options?: string[];
}

// 13 questions across four categories; answers are stored, not analysed.
export const QUESTIONNAIRE: QuestionnaireItem[] = [
  { id: "q1", category: "About you", text: "What is your age range?", kind: "choice", options: ["18-24", "25-34", "35-44", "45-54", "55+"] },
  { id: "q2", category: "About you", text: "Do you have a machine learning background?", kind: "choice", options: ["Yes", "No"] },
  { id: "q3", category: "About you", text: "How often do you work with charts or data?", kind: "likert" },
  { id: "q4", category: "System satisfaction and helpfulness", text: "How easy were the ideas of 'lag' and 'rolling window' to grasp?", kind: "likert" },
  { id: "q5", category: "System satisfaction and helpfulness", text: "How helpful were overview explanations for understanding the predictions?", kind: "likert" },
  { id: "q6", category: "System satisfaction and helpfulness", text: "Which explanation helped you more?", kind: "choice", options: ["Lag", "Rolling window", "Both", "Neither"] },
  { id: "q7", category: "System satisfaction and helpfulness", text: "How helpful was the interface while answering the exercises?", kind: "likert" },
  { id: "q8", category: "System satisfaction and helpfulness", text: "How satisfied are you with the overall experience?", kind: "likert" },
  { id: "q9", category: "Curiosity and trust", text: "I wanted to understand how the forecast was produced.", kind: "likert" },
  { id: "q10", category: "Curiosity and trust", text: "Explanations like these increase my confidence in AI systems.", kind: "likert" },
  { id: "q11", category: "Curiosity and trust", text: "Tools that explain model predictions are useful.", kind: "likert" },
  { id: "q12", category: "Overall feedback", text: "Would you use a tool like this again?", kind: "choice", options: ["Yes", "Maybe", "No"] },
  { id: "q13", category: "Overall feedback", text: "Anything else you would like to tell us?", kind: "text" },
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class StudyApp {
  private session = "";
  private group: Group = "control";
  private roundsTotal = 4;
  private questionsPerRound = 2;
  private score = 0;
  private answeredCount = 0;
  private finished = false;
  private payload: RoundPayload | null = null;
  private submitting = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  // -- entry points ------------------------------------------------------

  renderJoin(): void {
    this.root.replaceChildren();
    const panel = el("div", "screen-join");
    panel.appendChild(el("h1", "", "Forecast study"));
    const form = el("form", "join-form");

    const participant = el("input") as HTMLInputElement;
    participant.id = "join-participant";
    participant.placeholder = "Participant id";
    participant.required = true;

    const group = el("select") as HTMLSelectElement;
    group.id = "join-group";
    for (const value of ["control", "treatment"]) {
      const opt = el("option", "", value) as HTMLOptionElement;
      opt.value = value;
      group.appendChild(opt);
    }

    const background = el("select") as HTMLSelectElement;
    background.id = "join-background";
    for (const value of ["NonCS", "CS"]) {
      const opt = el("option", "", value) as HTMLOptionElement;
      opt.value = value;
      background.appendChild(opt);
    }

    const start = el("button", "", "Start") as HTMLButtonElement;
    start.id = "start-btn";
    start.type = "submit";

    form.append(participant, group, background, start);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.start(
        group.value as Group,
        participant.value || "anonymous",
        background.value,
      );
    });
    panel.appendChild(form);
    this.root.appendChild(panel);
  }

  async start(
    group: Group,
    participant: string,
    background = "NonCS",
    seed?: number,
  ): Promise<void> {
    const info = await this.api.createSession(group, participant, background, seed);
    this.session = info.session;
    this.group = info.group;
    this.roundsTotal = info.rounds_total;
    this.questionsPerRound = info.questions_per_round;
    this.score = 0;
    this.answeredCount = 0;
    this.finished = false;
    await this.showRound(1);
  }

  async resume(session: string): Promise<void> {
    const summary = await this.api.sessionSummary(session);
    this.session = summary.session;
    this.group = summary.group;
    this.roundsTotal = summary.rounds_total;
    this.questionsPerRound = summary.questions_per_round;
    this.score = summary.score;
    this.answeredCount = summary.answered_count;
    this.finished = summary.finished;
    await this.showRound(summary.current_round);
  }

  get sessionId(): string {
    return this.session;
  }

  // -- exercise screen ---------------------------------------------------

  async showRound(round: number): Promise<void> {
    try {
      this.payload = await this.api.round(this.session, round);
    } catch (error) {
      this.renderRetry(round, error);
      return;
    }
    this.renderExercise();
  }

  private renderRetry(round: number, error: unknown): void {
    // fetch failure: offer a retry, never a partially rendered round
    this.root.replaceChildren();
    const banner = el("div", "retry-banner");
    banner.appendChild(
      el("p", "retry-message", `Could not load round ${round}: ${String(error)}`),
    );
    const retry = el("button", "", "Retry") as HTMLButtonElement;
    retry.id = "retry-btn";
    retry.addEventListener("click", () => void this.showRound(round));
    banner.appendChild(retry);
    this.root.appendChild(banner);
  }

  private renderExercise(): void {
    const payload = this.payload;
    if (!payload) return;
    this.root.replaceChildren();
    const screen = el("div", "screen-exercise");

    const header = el("div", "header");
    header.appendChild(el("h1", "", "Time series forecasting"));
    header.appendChild(
      el(
        "p",
        "intro",
        "The red month is the one being predicted, based on the previous 12 months.",
      ),
    );
    screen.appendChild(header);

    const columns = el("div", "columns");

    // chart panel
    const forecastPanel = el("section", "forecast-panel");
    forecastPanel.appendChild(el("h2", "", "Forecast"));
    forecastPanel.appendChild(
      lineChart({
        labels: payload.window.labels,
        values: payload.window.values,
        predictedLabel: payload.predicted.label,
        predictedValue: payload.predicted.value,
      }),
    );
    forecastPanel.appendChild(
      el(
        "p",
        "predicted-label",
        `Predicted ${payload.predicted.label}: ${payload.predicted.value.toFixed(2)}`,
      ),
    );
    columns.appendChild(forecastPanel);

    // treatment-only explanation panel
    if (payload.explanation) {
      const explanationPanel = el("section", "explanation-panel");
      explanationPanel.appendChild(el("h2", "", "Why this prediction?"));
      explanationPanel.appendChild(coefficientChart(payload.explanation.features));
      explanationPanel.appendChild(
        el("p", "explanation-text", payload.explanation.text),
      );
      columns.appendChild(explanationPanel);
    }
    screen.appendChild(columns);

    // exercise panel
    const exercisePanel = el("section", "exercise-panel");
    exercisePanel.appendChild(el("h2", "", "Your exercises"));
    exercisePanel.appendChild(
      el("p", "round-label", `Round ${payload.round} of ${payload.rounds_total}`),
    );
    for (const question of payload.questions) {
      exercisePanel.appendChild(this.questionBlock(question.question));
    }
    const total = this.roundsTotal * this.questionsPerRound;
    const score = el("p", "score-line");
    score.id = "score-line";
    score.textContent = `Score: ${this.score} / ${total} (answered ${this.answeredCount} of ${total})`;
    exercisePanel.appendChild(score);

    const next = el("button", "next-round", "Next round") as HTMLButtonElement;
    next.id = "next-round-btn";
    next.hidden = !this.roundComplete() || payload.round >= this.roundsTotal;
    next.addEventListener("click", () => void this.showRound(payload.round + 1));
    exercisePanel.appendChild(next);

    const questionnaire = el(
      "button",
      "questionnaire",
      "Questionnaire",
    ) as HTMLButtonElement;
    questionnaire.id = "questionnaire-btn";
    questionnaire.hidden = !this.finished;
    questionnaire.addEventListener("click", () => this.renderQuestionnaire());
    exercisePanel.appendChild(questionnaire);

    screen.appendChild(exercisePanel);
    screen.appendChild(this.whatIfPanel());
    this.root.appendChild(screen);
  }

  private questionBlock(questionNo: number): HTMLElement {
    const payload = this.payload!;
    const info = payload.questions[questionNo - 1];
    const block = el("div", "question-block");
    block.setAttribute("data-question", String(questionNo));

    const verb = info.direction === "increase" ? "increased" : "decreased";
    block.appendChild(
      el(
        "p",
        "question-text",
        `If the value of ${info.month_label} was ${verb}, would the prediction go up, remain stable or go down?`,
      ),
    );

    const options = el("div", "options");
    for (const choice of CHOICES) {
      const button = el("button", "option", choice.label) as HTMLButtonElement;
      button.setAttribute("data-choice", choice.value);
      button.disabled = info.answered;
      button.addEventListener("click", () =>
        void this.submitAnswer(questionNo, choice.value),
      );
      options.appendChild(button);
    }
    block.appendChild(options);
    block.appendChild(el("p", "answer-status"));
    return block;
  }

  private roundComplete(): boolean {
    const payload = this.payload;
    return !!payload && payload.questions.every((q) => q.answered);
  }

  async submitAnswer(questionNo: number, choice: Verdict): Promise<void> {
    const payload = this.payload;
    if (!payload || this.submitting) return; // one in-flight submission only
    this.submitting = true;
    try {
      const result = await this.api.answer(
        this.session,
        payload.round,
        questionNo,
        choice,
      );
      this.score = result.score;
      this.answeredCount = result.answered_count;
      this.finished = result.finished;
      payload.questions[questionNo - 1].answered = true;
      this.renderExercise();
      const block = this.root.querySelector(
        `.question-block[data-question="${questionNo}"]`,
      );
      if (block) {
        const status = block.querySelector(".answer-status") as HTMLElement;
        status.textContent = result.correct ? "Correct" : "Incorrect";
        status.classList.add(result.correct ? "correct" : "incorrect");
        if (!result.correct && this.group === "treatment" && result.feedback) {
          block.appendChild(el("p", "feedback-text", result.feedback));
        }
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // already answered (e.g. a retried submit): refresh, never double-count
        await this.refresh();
        return;
      }
      throw error;
    } finally {
      this.submitting = false;
    }
  }

  private async refresh(): Promise<void> {
    const summary = await this.api.sessionSummary(this.session);
    this.score = summary.score;
    this.answeredCount = summary.answered_count;
    this.finished = summary.finished;
    await this.showRound(this.payload ? this.payload.round : summary.current_round);
  }

  // -- what-if panel -----------------------------------------------------

  private whatIfPanel(): HTMLElement {
    const payload = this.payload!;
    const panel = el("section", "whatif-panel");
    panel.appendChild(el("h2", "", "What if?"));
    panel.appendChild(
      el(
        "p",
        "whatif-help",
        "Pick a month, a direction and a magnitude, then see how the prediction reacts.",
      ),
    );

    const month = el("select") as HTMLSelectElement;
    month.id = "whatif-month";
    payload.window.labels.forEach((label, index) => {
      const opt = el("option", "", label) as HTMLOptionElement;
      opt.value = String(index); // only window months are selectable
      month.appendChild(opt);
    });

    const direction = el("select") as HTMLSelectElement;
    direction.id = "whatif-direction";
    for (const value of ["increase", "decrease"]) {
      const opt = el("option", "", value) as HTMLOptionElement;
      opt.value = value;
      direction.appendChild(opt);
    }

    const magnitude = el("input") as HTMLInputElement;
    magnitude.id = "whatif-delta";
    magnitude.type = "range";
    magnitude.min = "1";
    magnitude.max = "30";
    magnitude.value = "10";
    magnitude.title =
      "Percent of the window's value range. Tiny nudges land in the " +
      "'remain stable' band: the verdict only moves past a 0.5% threshold.";

    const run = el("button", "", "Run") as HTMLButtonElement;
    run.id = "whatif-run";

    const result = el("div", "whatif-result");
    result.appendChild(el("p", "whatif-verdict"));
    result.appendChild(el("p", "whatif-deltas"));

    run.addEventListener("click", () =>
      void this.runWhatIf(
        Number(month.value),
        direction.value as Direction,
        Number(magnitude.value),
      ),
    );

    const controls = el("div", "whatif-controls");
    controls.append(month, direction, magnitude, run);
    panel.append(controls, result);
    return panel;
  }

  async runWhatIf(
    monthIndex: number,
    direction: Direction,
    magnitudePercent: number,
  ): Promise<void> {
    const payload = this.payload!;
    // the slider is a percentage of the window's value range; the service
    // expects the delta on its scaled axis
    const range = payload.window.scaled_range || 1;
    const delta = (magnitudePercent / 100) * range;
    const outcome = await this.api.whatIf(
      this.session,
      monthIndex,
      direction,
      delta,
      payload.round,
    );
    const verdictEl = this.root.querySelector(".whatif-verdict") as HTMLElement;
    verdictEl.textContent = VERDICT_TEXT[outcome.verdict];
    verdictEl.setAttribute("data-verdict", outcome.verdict);
    const deltasEl = this.root.querySelector(".whatif-deltas") as HTMLElement;
    deltasEl.textContent =
      `Black box moved ${outcome.black_box_delta.toFixed(4)}; ` +
      `surrogate moved ${outcome.surrogate_delta.toFixed(4)}.`;
  }

  // -- questionnaire -----------------------------------------------------

  renderQuestionnaire(): void {
    this.root.replaceChildren();
    const screen = el("div", "screen-questionnaire");
    screen.appendChild(el("h1", "", "Questionnaire"));
    const form = el("form", "questionnaire-form");

    let currentCategory = "";
    for (const item of QUESTIONNAIRE) {
      if (item.category !== currentCategory) {
        currentCategory = item.category;
        form.appendChild(el("h2", "category", currentCategory));
      }
      const row = el("div", "question-row");
      row.setAttribute("data-id", item.id);
      row.appendChild(el("label", "", item.text));
      if (item.kind === "likert") {
        const scale = el("div", "likert");
        for (let i = 1; i <= 5; i++) {
          const lab = el("label", "", String(i));
          const radio = el("input") as HTMLInputElement;
          radio.type = "radio";
          radio.name = item.id;
          radio.value = String(i);
          lab.prepend(radio);
          scale.appendChild(lab);
        }
        row.appendChild(scale);
      } else if (item.kind === "choice") {
        const select = el("select") as HTMLSelectElement;
        select.name = item.id;
        for (const option of item.options ?? []) {
          const opt = el("option", "", option) as HTMLOptionElement;
          opt.value = option;
          select.appendChild(opt);
        }
        row.appendChild(select);
      } else {
        const area = el("textarea") as HTMLTextAreaElement;
        area.name = item.id;
        row.appendChild(area);
      }
      form.appendChild(row);
    }

    const submit = el("button", "", "Submit") as HTMLButtonElement;
    submit.id = "questionnaire-submit";
    submit.type = "submit";
    form.appendChild(submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const answers: Record<string, string> = {};
      const data = new FormData(form);
      data.forEach((value, key) => {
        answers[key] = String(value);
      });
      void this.api
        .submitQuestionnaire(this.session, answers)
        .then(() => this.renderThanks());
    });
    screen.appendChild(form);
    this.root.appendChild(screen);
  }

  private renderThanks(): void {
    this.root.replaceChildren();
    const screen = el("div", "screen-thanks");
    screen.appendChild(el("h1", "", "Thank you"));
    screen.appendChild(
      el("p", "", `Your final score was ${this.score}. You may close this tab.`),
    );
    this.root.appendChild(screen);
  }
}
