import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from tsxplain.forecasters import ARModel
from tsxplain.perturbation import PerturbationConfig
from tsxplain.series import fit_minmax
from tsxplain.service import (
    JsonlStore,
    StudyEngine,
    build_default_engine,
    create_app,
)
from tsxplain.synthetic import synthetic_series


def last_value_forecaster():
    return ARModel(coefficients=np.array([1.0]), intercept=0.0)


def make_engine(store_path=None, forecaster=None):
    series = synthetic_series(n=60, seed=11)
    scaler = fit_minmax(series.values[:40])
    return StudyEngine(
        series=series,
        forecaster=forecaster or last_value_forecaster(),
        scaler=scaler,
        store=JsonlStore(store_path),
        pcfg=PerturbationConfig(
            block_length=5, block_swap=2, sample_count=150, rng_seed=0
        ),
        train_length=40,
    )


@pytest.fixture()
def client():
    return TestClient(create_app(make_engine()))


def create_session(client, group, seed=1234, participant="p1", background="CS"):
    response = client.post(
        "/api/session",
        json={
            "group": group,
            "participant": participant,
            "background": background,
            "seed": seed,
        },
    )
    assert response.status_code == 200, response.text
    return response.json()


class TestSessions:
    def test_control_payloads_carry_no_explanation(self, client):
        session = create_session(client, "control")
        for round_no in range(1, 5):
            payload = client.get(
                f"/api/session/{session['session']}/round/{round_no}"
            ).json()
            assert "explanation" not in payload
            assert "coefficient" not in json.dumps(payload)

    def test_treatment_payload_has_features_and_rule_text(self, client):
        session = create_session(client, "treatment")
        payload = client.get(f"/api/session/{session['session']}/round/1").json()
        explanation = payload["explanation"]
        assert explanation["features"]
        first = explanation["features"][0]
        assert set(first) == {"feature_label", "coefficient", "sign"}
        assert "positive weight" in explanation["text"]

    def test_same_seed_same_questions(self, client):
        a = create_session(client, "control", seed=77)
        b = create_session(client, "treatment", seed=77, participant="p2")
        for round_no in range(1, 5):
            qa = client.get(f"/api/session/{a['session']}/round/{round_no}").json()
            qb = client.get(f"/api/session/{b['session']}/round/{round_no}").json()
            assert qa["questions"] == qb["questions"]
            assert qa["window"] == qb["window"]

    def test_control_treatment_differ_only_by_explanation(self, client):
        a = create_session(client, "control", seed=5)
        b = create_session(client, "treatment", seed=5, participant="p2")
        pa = client.get(f"/api/session/{a['session']}/round/1").json()
        pb = client.get(f"/api/session/{b['session']}/round/1").json()
        pb_copy = dict(pb)
        pb_copy.pop("explanation")
        for key in pb_copy:
            if key in ("group", "session"):
                continue
            assert pa[key] == pb_copy[key]

    def test_unknown_session_404(self, client):
        response = client.get("/api/session/nope/round/1")
        assert response.status_code == 404
        body = response.json()
        assert body["code"] == "NotFoundError"

    def test_invalid_group_rejected(self, client):
        response = client.post(
            "/api/session", json={"group": "other", "participant": "x"}
        )
        assert response.status_code == 422


class TestWhatIf:
    def test_last_month_increase_goes_up(self, client):
        session = create_session(client, "control")
        response = client.post(
            "/api/whatif",
            json={
                "session": session["session"],
                "t_index": 11,
                "direction": "increase",
                "round": 1,
            },
        )
        body = response.json()
        assert body["verdict"] == "go_up"
        assert body["black_box_delta"] > 0

    def test_first_month_increase_stays_stable(self, client):
        session = create_session(client, "control")
        body = client.post(
            "/api/whatif",
            json={
                "session": session["session"],
                "t_index": 0,
                "direction": "increase",
                "round": 1,
            },
        ).json()
        assert body["verdict"] == "remain_stable"
        assert body["black_box_delta"] == 0.0

    def test_last_month_decrease_goes_down(self, client):
        session = create_session(client, "control")
        body = client.post(
            "/api/whatif",
            json={
                "session": session["session"],
                "t_index": 11,
                "direction": "decrease",
                "round": 1,
            },
        ).json()
        assert body["verdict"] == "go_down"

    def test_zero_delta_rejected(self, client):
        session = create_session(client, "control")
        response = client.post(
            "/api/whatif",
            json={
                "session": session["session"],
                "t_index": 11,
                "direction": "increase",
                "delta": 0.0,
            },
        )
        assert response.status_code == 422  # body validation: delta must be > 0

    def test_month_outside_window_rejected(self, client):
        session = create_session(client, "control")
        response = client.post(
            "/api/whatif",
            json={
                "session": session["session"],
                "t_index": 12,
                "direction": "increase",
            },
        )
        assert response.status_code == 400

    def test_surrogate_delta_present(self, client):
        session = create_session(client, "treatment")
        body = client.post(
            "/api/whatif",
            json={
                "session": session["session"],
                "t_index": 11,
                "direction": "increase",
                "round": 1,
            },
        ).json()
        assert "surrogate_delta" in body


def answer_all(client, session_id, strategy="oracle"):
    """Answer every question; oracle strategy asks whatif first."""
    results = []
    for round_no in range(1, 5):
        payload = client.get(f"/api/session/{session_id}/round/{round_no}").json()
        for question in payload["questions"]:
            if strategy == "oracle":
                verdict = client.post(
                    "/api/whatif",
                    json={
                        "session": session_id,
                        "t_index": question["month_index"],
                        "direction": question["direction"],
                        "round": round_no,
                    },
                ).json()["verdict"]
            else:
                verdict = "go_up"
            response = client.post(
                f"/api/session/{session_id}/answer",
                json={
                    "round": round_no,
                    "question": question["question"],
                    "choice": verdict,
                },
            )
            assert response.status_code == 200, response.text
            results.append(response.json())
    return results


class TestAnswerFlow:
    def test_oracle_strategy_scores_eight(self, client):
        session = create_session(client, "control")
        results = answer_all(client, session["session"])
        assert results[-1]["score"] == 8
        assert results[-1]["finished"] is True

    def test_verdict_consistency_with_whatif(self, client):
        # correctness must equal the whatif verdict for the same perturbation
        session = create_session(client, "treatment")
        results = answer_all(client, session["session"], strategy="oracle")
        assert all(r["correct"] for r in results)

    def test_control_feedback_empty(self, client):
        session = create_session(client, "control")
        results = answer_all(client, session["session"])
        assert all(r["feedback"] == "" for r in results)

    def test_treatment_feedback_is_rule_text(self, client):
        session = create_session(client, "treatment")
        results = answer_all(client, session["session"], strategy="fixed")
        wrong = [r for r in results if not r["correct"]]
        assert wrong, "fixed go_up strategy should miss at least once"
        assert all("weight" in r["feedback"] for r in results)

    def test_double_answer_conflict(self, client):
        session = create_session(client, "control")
        payload = client.get(f"/api/session/{session['session']}/round/1").json()
        question = payload["questions"][0]
        body = {
            "round": 1,
            "question": question["question"],
            "choice": "go_up",
        }
        first = client.post(f"/api/session/{session['session']}/answer", json=body)
        assert first.status_code == 200
        second = client.post(f"/api/session/{session['session']}/answer", json=body)
        assert second.status_code == 409
        assert second.json()["code"] == "ConflictError"

    def test_score_matches_recomputation(self, client):
        session = create_session(client, "treatment")
        results = answer_all(client, session["session"], strategy="fixed")
        expected = sum(1 for r in results if r["correct"])
        summary = client.get(f"/api/session/{session['session']}").json()
        assert summary["score"] == expected


class TestExport:
    def test_empty_store_header_only(self, client):
        text = client.get("/api/export").text
        assert text.strip() == "participant,group,background,score,duration_seconds"

    def test_two_sessions_rows(self, client):
        s1 = create_session(client, "control", seed=1, participant="alice")
        s2 = create_session(client, "treatment", seed=2, participant="bob")
        answer_all(client, s1["session"])  # oracle: score 8
        lines = client.get("/api/export").text.strip().split("\n")
        assert len(lines) == 3
        rows = {line.split(",")[0]: line.split(",") for line in lines[1:]}
        assert rows["alice"][3] == "8"
        assert rows["bob"][3] == "0"

    def test_questionnaire_recorded(self, client):
        session = create_session(client, "control")
        response = client.post(
            "/api/questionnaire",
            json={"session": session["session"], "answers": {"q1": "agree"}},
        )
        assert response.json() == {"ok": True}


class TestPersistence:
    def test_replay_restores_sessions_and_answers(self, tmp_path):
        store = tmp_path / "study.jsonl"
        engine = make_engine(store_path=store)
        client = TestClient(create_app(engine))
        session = create_session(client, "treatment", seed=42)
        answer_all(client, session["session"])
        before = client.get("/api/export").text

        revived = make_engine(store_path=store)
        client2 = TestClient(create_app(revived))
        after = client2.get("/api/export").text
        assert after == before
        summary = client2.get(f"/api/session/{session['session']}").json()
        assert summary["score"] == 8
        assert summary["finished"] is True

    def test_export_history_superset(self, tmp_path):
        store = tmp_path / "study.jsonl"
        engine = make_engine(store_path=store)
        client = TestClient(create_app(engine))
        create_session(client, "control", seed=1, participant="one")
        first = set(client.get("/api/export").text.strip().split("\n"))
        create_session(client, "treatment", seed=2, participant="two")
        second = set(client.get("/api/export").text.strip().split("\n"))
        assert first <= second


def test_default_engine_builds_and_serves():
    engine = build_default_engine(
        pcfg=PerturbationConfig(
            block_length=5, block_swap=2, sample_count=120, rng_seed=0
        )
    )
    client = TestClient(create_app(engine))
    session = create_session(client, "treatment", seed=3)
    payload = client.get(f"/api/session/{session['session']}/round/1").json()
    assert len(payload["window"]["values"]) == 12
    assert payload["predicted"]["label"]
    assert len(payload["explanation"]["features"]) == 12
