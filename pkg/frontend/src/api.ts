// Typed client for the study service. All verdicts and correctness come
// from the server; the UI never computes them locally.

export type Group = "control" | "treatment";
export type Verdict = "go_up" | "remain_stable" | "go_down";
export type Direction = "increase" | "decrease";

export interface SessionInfo {
  session: string;
  group: Group;
  rounds_total: number;
  questions_per_round: number;
}

export interface SessionSummary {
  session: string;
  group: Group;
  participant: string;
  background: string;
  rounds_total: number;
  questions_per_round: number;
  score: number;
  answered_count: number;
  finished: boolean;
  current_round: number;
}

export interface QuestionInfo {
  question: number;
  month_index: number;
  month_label: string;
  direction: Direction;
  answered: boolean;
}

export interface FeatureWeight {
  feature_label: string;
  coefficient: number;
  sign: string;
}

export interface ExplanationPayload {
  features: FeatureWeight[];
  text: string;
}

export interface RoundPayload {
  session: string;
  group: Group;
  round: number;
  rounds_total: number;
  window: { labels: string[]; values: number[]; scaled_range: number };
  predicted: { label: string; value: number };
  questions: QuestionInfo[];
  explanation?: ExplanationPayload;
}

export interface AnswerResult {
  correct: boolean;
  feedback: string;
  score: number;
  answered_count: number;
  finished: boolean;
}

export interface WhatIfResult {
  round: number;
  verdict: Verdict;
  black_box_delta: number;
  surrogate_delta: number;
  black_box_prediction: number;
  perturbed_prediction: number;
  epsilon: number;
  delta: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "unknown";
  let message = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
    else if (body.detail) message = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  createSession(
    group: Group,
    participant: string,
    background: string = "NonCS",
    seed?: number,
  ): Promise<SessionInfo> {
    return this.request<SessionInfo>("/api/session", {
      method: "POST",
      body: JSON.stringify({ group, participant, background, seed }),
    });
  }

  sessionSummary(session: string): Promise<SessionSummary> {
    return this.request<SessionSummary>(`/api/session/${session}`);
  }

  round(session: string, round: number): Promise<RoundPayload> {
    return this.request<RoundPayload>(`/api/session/${session}/round/${round}`);
  }

  answer(
    session: string,
    round: number,
    question: number,
    choice: Verdict,
  ): Promise<AnswerResult> {
    return this.request<AnswerResult>(`/api/session/${session}/answer`, {
      method: "POST",
      body: JSON.stringify({ round, question, choice }),
    });
  }

  whatIf(
    session: string,
    tIndex: number,
    direction: Direction,
    delta?: number,
    round?: number,
  ): Promise<WhatIfResult> {
    return this.request<WhatIfResult>("/api/whatif", {
      method: "POST",
      body: JSON.stringify({
        session,
        t_index: tIndex,
        direction,
        delta,
        round,
      }),
    });
  }

  submitQuestionnaire(
    session: string,
    answers: Record<string, string>,
  ): Promise<{ ok: boolean }> {
    return this.request<{ ok: boolean }>("/api/questionnaire", {
      method: "POST",
      body: JSON.stringify({ session, answers }),
    });
  }

  async exportCsv(): Promise<string> {
    const response = await fetch(this.base + "/api/export");
    if (!response.ok) {
      throw await parseError(response);
    }
    return response.text();
  }
}
