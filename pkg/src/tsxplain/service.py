"""HTTP service behind the what-if UI and the control/treatment exercises.

Sessions hold four pre-generated rounds of two trend questions each. The
treatment group's payloads carry the surrogate coefficients and the sign
rule text; the control group's never do. Every state change is appended
to a JSON-lines log so a restart replays the full study history.
"""

from __future__ import annotations

import csv
import io
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .errors import (
    ConfigurationError,
    ConflictError,
    ExplainError,
    IngestionError,
)
from .features import feature_family
from .forecasters import Forecaster, build_forecaster
from .perturbation import PerturbationConfig, derive_seed
from .series import NormalizationState, Series, fit_minmax
from .surrogate import (
    KernelConfig,
    SurrogateModel,
    explain_window,
    sign_rule_text,
    surrogate_predict,
)
from .synthetic import synthetic_series

__all__ = [
    "Question",
    "Round",
    "ExerciseSession",
    "StudyEngine",
    "create_app",
    "build_default_engine",
]

WINDOW_LENGTH = 12
ROUNDS = 4
QUESTIONS_PER_ROUND = 2
STABILITY_EPSILON_REL = 0.005  # "remain stable" band: 0.5% of |f(window)|
DELTA_FRACTION = 0.10  # default perturbation: 10% of the window's value range

Verdict = Literal["go_up", "remain_stable", "go_down"]
VERDICTS = ("go_up", "remain_stable", "go_down")


class NotFoundError(ExplainError):
    """Unknown session or round."""


@dataclass(frozen=True)
class Question:
    month_index: int  # 0-based position inside the displayed window
    direction: Literal["increase", "decrease"]


@dataclass(frozen=True)
class Round:
    window_end: int  # exclusive end index into the series
    questions: tuple[Question, ...]


@dataclass(frozen=True)
class AnswerRecord:
    round_no: int
    question_no: int
    choice: str
    correct: bool
    verdict: str
    feedback: str
    answered_at: float


@dataclass
class ExerciseSession:
    session_id: str
    group: Literal["control", "treatment"]
    participant: str
    background: Literal["CS", "NonCS"]
    seed: int
    created_at: float
    rounds: tuple[Round, ...]
    answers: dict[tuple[int, int], AnswerRecord] = field(default_factory=dict)

    @property
    def score(self) -> int:
        return sum(1 for record in self.answers.values() if record.correct)

    @property
    def finished(self) -> bool:
        return len(self.answers) >= ROUNDS * QUESTIONS_PER_ROUND

    def duration_seconds(self) -> float:
        if not self.answers:
            return 0.0
        last = max(record.answered_at for record in self.answers.values())
        return max(0.0, last - self.created_at)


class JsonlStore:
    """Append-only event log, one JSON document per line, single writer."""

    def __init__(self, path: Optional[Path]):
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._memory: list[dict] = []

    def append(self, record: dict) -> None:
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            self._memory.append(record)
            if self._path is not None:
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
                    fh.flush()

    def replay(self) -> list[dict]:
        if self._path is None or not self._path.exists():
            return list(self._memory)
        records = []
        with open(self._path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return records


def _generate_rounds(seed: int, min_end: int, n: int) -> tuple[Round, ...]:
    """Deterministic question plan for one session."""
    rng = np.random.default_rng(np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF))
    ends = sorted(
        int(e) for e in rng.choice(np.arange(min_end, n + 1), size=ROUNDS, replace=True)
    )
    rounds = []
    for end in ends:
        seen: set[tuple[int, str]] = set()
        questions = []
        while len(questions) < QUESTIONS_PER_ROUND:
            month = int(rng.integers(0, WINDOW_LENGTH))
            direction = "increase" if rng.integers(0, 2) == 0 else "decrease"
            if (month, direction) in seen:
                continue
            seen.add((month, direction))
            questions.append(Question(month_index=month, direction=direction))
        rounds.append(Round(window_end=end, questions=tuple(questions)))
    return tuple(rounds)


class StudyEngine:
    """All study behaviour behind the HTTP layer.

    Modelling runs on the min-max scale fitted on the training split;
    chart values are inverted back to original units for display.
    """

    def __init__(
        self,
        series: Series,
        forecaster: Forecaster,
        scaler: NormalizationState,
        store: JsonlStore,
        pcfg: PerturbationConfig | None = None,
        kcfg: KernelConfig | None = None,
        specs=None,
        train_length: int | None = None,
    ):
        n = len(series)
        if n < WINDOW_LENGTH + 2:
            raise ConfigurationError(
                f"series too short for {WINDOW_LENGTH}-month exercises"
            )
        self.series = series
        self.scaled = scaler.transform(series.values)
        self.scaler = scaler
        self.forecaster = forecaster
        self.store = store
        self.pcfg = pcfg or PerturbationConfig(
            block_length=5, block_swap=2, sample_count=1000, rng_seed=0
        )
        self.kcfg = kcfg or KernelConfig()
        self.specs = tuple(specs) if specs else tuple(
            feature_family("lag", WINDOW_LENGTH)
        )
        self.train_length = train_length if train_length is not None else n
        self._sessions: dict[str, ExerciseSession] = {}
        self._session_lock = threading.Lock()
        self._models: dict[tuple[str, int], SurrogateModel] = {}
        self._model_lock = threading.Lock()
        self._min_end = max(WINDOW_LENGTH, min(self.train_length, n - 1))
        self._replay()

    # -- persistence ------------------------------------------------------

    def _replay(self) -> None:
        for record in self.store.replay():
            if record.get("type") == "session":
                session = ExerciseSession(
                    session_id=record["session_id"],
                    group=record["group"],
                    participant=record["participant"],
                    background=record["background"],
                    seed=int(record["seed"]),
                    created_at=float(record["created_at"]),
                    rounds=_generate_rounds(
                        int(record["seed"]), self._min_end, len(self.series)
                    ),
                )
                self._sessions[session.session_id] = session
            elif record.get("type") == "answer":
                session = self._sessions.get(record["session_id"])
                if session is None:
                    continue
                key = (int(record["round"]), int(record["question"]))
                session.answers[key] = AnswerRecord(
                    round_no=key[0],
                    question_no=key[1],
                    choice=record["choice"],
                    correct=bool(record["correct"]),
                    verdict=record["verdict"],
                    feedback=record.get("feedback", ""),
                    answered_at=float(record["answered_at"]),
                )

    # -- sessions ---------------------------------------------------------

    def create_session(
        self,
        group: str,
        participant: str,
        background: str = "NonCS",
        seed: int | None = None,
    ) -> ExerciseSession:
        if group not in ("control", "treatment"):
            raise ConfigurationError(f"unknown group {group!r}")
        if seed is None:
            seed = int(uuid.uuid4().int & 0xFFFFFFFF)
        session = ExerciseSession(
            session_id=uuid.uuid4().hex,
            group=group,  # type: ignore[arg-type]
            participant=participant,
            background=background,  # type: ignore[arg-type]
            seed=int(seed),
            created_at=time.time(),
            rounds=_generate_rounds(int(seed), self._min_end, len(self.series)),
        )
        with self._session_lock:
            self._sessions[session.session_id] = session
        self.store.append(
            {
                "type": "session",
                "session_id": session.session_id,
                "group": session.group,
                "participant": session.participant,
                "background": session.background,
                "seed": session.seed,
                "created_at": session.created_at,
            }
        )
        return session

    def get_session(self, session_id: str) -> ExerciseSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return session

    # -- modelling --------------------------------------------------------

    def _window_values(self, round_obj: Round) -> np.ndarray:
        end = round_obj.window_end
        return self.scaled[end - WINDOW_LENGTH : end]

    def _surrogate_for(self, session: ExerciseSession, round_no: int) -> SurrogateModel:
        key = (session.session_id, round_no)
        with self._model_lock:
            model = self._models.get(key)
        if model is not None:
            return model
        round_obj = session.rounds[round_no - 1]
        cfg = self.pcfg.with_seed(derive_seed(session.seed, round_no))
        model, _ = explain_window(
            self._window_values(round_obj),
            self.forecaster,
            self.specs,
            cfg,
            self.kcfg,
        )
        with self._model_lock:
            self._models[key] = model
        return model

    def _round(self, session: ExerciseSession, round_no: int) -> Round:
        if not 1 <= round_no <= len(session.rounds):
            raise NotFoundError(f"round {round_no} out of range 1..{len(session.rounds)}")
        return session.rounds[round_no - 1]

    def whatif(
        self,
        session_id: str,
        t_index: int,
        direction: str,
        delta: float | None = None,
        round_no: int | None = None,
    ) -> dict:
        session = self.get_session(session_id)
        if round_no is None:
            round_no = self.current_round(session)
        round_obj = self._round(session, round_no)
        if not 0 <= t_index < WINDOW_LENGTH:
            raise ConfigurationError(
                f"month index {t_index} outside the displayed window"
            )
        if direction not in ("increase", "decrease"):
            raise ConfigurationError(f"unknown direction {direction!r}")
        window = self._window_values(round_obj)
        if delta is None:
            value_range = float(window.max() - window.min())
            delta = DELTA_FRACTION * (value_range if value_range > 0 else 1.0)
        if delta <= 0:
            raise ConfigurationError("perturbation magnitude must be positive")

        perturbed = window.copy()
        shift = delta if direction == "increase" else -delta
        perturbed[t_index] += shift

        f_base = float(self.forecaster.predict(window))
        f_new = float(self.forecaster.predict(perturbed))
        delta_f = f_new - f_base
        epsilon = STABILITY_EPSILON_REL * abs(f_base)
        if delta_f > epsilon:
            verdict: str = "go_up"
        elif delta_f < -epsilon:
            verdict = "go_down"
        else:
            verdict = "remain_stable"

        model = self._surrogate_for(session, round_no)
        g_base = surrogate_predict(model, window)
        g_new = surrogate_predict(model, perturbed)
        return {
            "round": round_no,
            "verdict": verdict,
            "black_box_delta": delta_f,
            "surrogate_delta": g_new - g_base,
            "black_box_prediction": f_base,
            "perturbed_prediction": f_new,
            "epsilon": epsilon,
            "delta": delta,
        }

    # -- exercise flow ----------------------------------------------------

    def current_round(self, session: ExerciseSession) -> int:
        for r in range(1, len(session.rounds) + 1):
            for qn in range(1, QUESTIONS_PER_ROUND + 1):
                if (r, qn) not in session.answers:
                    return r
        return len(session.rounds)

    def round_payload(self, session_id: str, round_no: int) -> dict:
        session = self.get_session(session_id)
        round_obj = self._round(session, round_no)
        end = round_obj.window_end
        stamps = self.series.timestamps[end - WINDOW_LENGTH : end]
        labels = [stamp.strftime("%b %Y") for stamp in stamps]
        display_values = self.series.values[end - WINDOW_LENGTH : end]
        window = self._window_values(round_obj)
        predicted_norm = float(self.forecaster.predict(window))
        last = stamps[-1]
        if last.month == 12:
            next_label = last.replace(year=last.year + 1, month=1)
        else:
            next_label = last.replace(month=last.month + 1)
        payload = {
            "session": session.session_id,
            "group": session.group,
            "round": round_no,
            "rounds_total": len(session.rounds),
            "window": {
                "labels": labels,
                "values": display_values.tolist(),
                # value range on the model's scaled axis; what-if deltas are
                # expressed in these units
                "scaled_range": float(window.max() - window.min()),
            },
            "predicted": {
                "label": next_label.strftime("%b %Y"),
                "value": self.scaler.invert_value(predicted_norm),
            },
            "questions": [
                {
                    "question": i + 1,
                    "month_index": q.month_index,
                    "month_label": labels[q.month_index],
                    "direction": q.direction,
                    "answered": (round_no, i + 1) in session.answers,
                }
                for i, q in enumerate(round_obj.questions)
            ],
        }
        if session.group == "treatment":
            model = self._surrogate_for(session, round_no)
            payload["explanation"] = {
                "features": [
                    {
                        "feature_label": spec.label,
                        "coefficient": float(coef),
                        "sign": "+" if coef > 0 else ("-" if coef < 0 else "0"),
                    }
                    for spec, coef in zip(
                        model.feature_specs, model.coefficients.tolist()
                    )
                ],
                "text": sign_rule_text(),
            }
        return payload

    def answer(
        self, session_id: str, round_no: int, question_no: int, choice: str
    ) -> dict:
        session = self.get_session(session_id)
        round_obj = self._round(session, round_no)
        if not 1 <= question_no <= len(round_obj.questions):
            raise NotFoundError(f"question {question_no} out of range")
        if choice not in VERDICTS:
            raise ConfigurationError(f"unknown choice {choice!r}")
        key = (round_no, question_no)
        question = round_obj.questions[question_no - 1]
        result = self.whatif(
            session_id,
            question.month_index,
            question.direction,
            delta=None,
            round_no=round_no,
        )
        verdict = result["verdict"]
        correct = choice == verdict
        feedback = sign_rule_text() if session.group == "treatment" else ""
        record = AnswerRecord(
            round_no=round_no,
            question_no=question_no,
            choice=choice,
            correct=correct,
            verdict=verdict,
            feedback=feedback,
            answered_at=time.time(),
        )
        with self._session_lock:  # conflict check and insert must be atomic
            if key in session.answers:
                raise ConflictError(
                    f"round {round_no} question {question_no} already answered"
                )
            session.answers[key] = record
        self.store.append(
            {
                "type": "answer",
                "session_id": session.session_id,
                "round": round_no,
                "question": question_no,
                "choice": choice,
                "correct": correct,
                "verdict": verdict,
                "feedback": feedback,
                "answered_at": record.answered_at,
            }
        )
        return {
            "correct": correct,
            "feedback": feedback,
            "score": session.score,
            "answered_count": len(session.answers),
            "finished": session.finished,
        }

    def record_questionnaire(self, session_id: str, answers: dict) -> None:
        session = self.get_session(session_id)
        self.store.append(
            {
                "type": "questionnaire",
                "session_id": session.session_id,
                "answers": answers,
                "submitted_at": time.time(),
            }
        )

    def export_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["participant", "group", "background", "score", "duration_seconds"])
        for session in self._sessions.values():
            writer.writerow(
                [
                    session.participant,
                    session.group,
                    session.background,
                    session.score,
                    f"{session.duration_seconds():.3f}",
                ]
            )
        return buf.getvalue()

    def session_summary(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        return {
            "session": session.session_id,
            "group": session.group,
            "participant": session.participant,
            "background": session.background,
            "rounds_total": len(session.rounds),
            "questions_per_round": QUESTIONS_PER_ROUND,
            "score": session.score,
            "answered_count": len(session.answers),
            "finished": session.finished,
            "current_round": self.current_round(session),
        }


def build_default_engine(
    series: Series | None = None,
    model_spec: str = "ar:3",
    store_path: Optional[Path] = None,
    pcfg: PerturbationConfig | None = None,
    kcfg: KernelConfig | None = None,
    seed: int = 0,
) -> StudyEngine:
    """Engine over a user series (or the synthetic benchmark by default).

    The scaler and the forecaster are fitted on the first 70% of the
    series; exercise windows are drawn from the remainder.
    """
    if series is None:
        series = synthetic_series(n=120, seed=seed)
    n = len(series)
    train_length = max(WINDOW_LENGTH + 2, int(n * 0.7))
    if train_length >= n:
        train_length = n - 1
    scaler = fit_minmax(series.values[:train_length])
    train_scaled = scaler.transform(series.values[:train_length])
    forecaster = build_forecaster(model_spec, train_scaled)
    if pcfg is None:
        pcfg = PerturbationConfig(
            block_length=5, block_swap=2, sample_count=1000, rng_seed=seed
        )
    return StudyEngine(
        series=series,
        forecaster=forecaster,
        scaler=scaler,
        store=JsonlStore(store_path),
        pcfg=pcfg,
        kcfg=kcfg,
        train_length=train_length,
    )


# -- HTTP layer -------------------------------------------------------------


class CreateSessionBody(BaseModel):
    group: Literal["control", "treatment"]
    participant: str = Field(min_length=1, max_length=200)
    background: Literal["CS", "NonCS"] = "NonCS"
    seed: int | None = None


class AnswerBody(BaseModel):
    round: int
    question: int
    choice: Literal["go_up", "remain_stable", "go_down"]


class WhatIfBody(BaseModel):
    session: str
    t_index: int
    direction: Literal["increase", "decrease"]
    delta: float | None = Field(default=None, gt=0)
    round: int | None = None


class QuestionnaireBody(BaseModel):
    session: str
    answers: dict[str, str | int]


def _error_status(exc: ExplainError) -> int:
    if isinstance(exc, NotFoundError):
        return 404
    if isinstance(exc, ConflictError):
        return 409
    if isinstance(exc, (ConfigurationError, IngestionError)):
        return 400
    return 500


def create_app(engine: StudyEngine, static_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="tsxplain study service")

    @app.exception_handler(ExplainError)
    async def _handle_explain_error(request: Request, exc: ExplainError):
        return JSONResponse(
            status_code=_error_status(exc),
            content={"code": type(exc).__name__, "message": str(exc)},
        )

    @app.post("/api/session")
    def create_session(body: CreateSessionBody):
        session = engine.create_session(
            body.group, body.participant, body.background, body.seed
        )
        return {
            "session": session.session_id,
            "group": session.group,
            "rounds_total": len(session.rounds),
            "questions_per_round": QUESTIONS_PER_ROUND,
        }

    @app.get("/api/session/{session_id}")
    def session_summary(session_id: str):
        return engine.session_summary(session_id)

    @app.get("/api/session/{session_id}/round/{round_no}")
    def round_payload(session_id: str, round_no: int):
        return engine.round_payload(session_id, round_no)

    @app.post("/api/session/{session_id}/answer")
    def answer(session_id: str, body: AnswerBody):
        return engine.answer(session_id, body.round, body.question, body.choice)

    @app.post("/api/whatif")
    def whatif(body: WhatIfBody):
        return engine.whatif(
            body.session, body.t_index, body.direction, body.delta, body.round
        )

    @app.post("/api/questionnaire")
    def questionnaire(body: QuestionnaireBody):
        engine.record_questionnaire(body.session, body.answers)
        return {"ok": True}

    @app.get("/api/export")
    def export():
        return PlainTextResponse(engine.export_csv(), media_type="text/csv")

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
