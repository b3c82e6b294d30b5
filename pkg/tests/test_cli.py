import json

import numpy as np
import pytest

from tsxplain.cli import coefficient_svg, main
from tsxplain.series import load_csv


@pytest.fixture()
def synth_csv(tmp_path):
    path = tmp_path / "bench.csv"
    assert main(["synth", "--n", "90", "--seed", "5", "--output", str(path)]) == 0
    return path


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSynth:
    def test_writes_loadable_csv(self, synth_csv):
        series = load_csv(synth_csv)
        assert len(series) == 90

    def test_deterministic(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        main(["synth", "--seed", "9", "--output", str(a)])
        main(["synth", "--seed", "9", "--output", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestExplain:
    def base_argv(self, synth_csv, extra=()):
        return [
            "explain",
            "--input",
            str(synth_csv),
            "--model",
            "ar:1",
            "--features",
            "lag:1,lag:2",
            "--block-length",
            "5",
            "--block-swap",
            "2",
            "--samples",
            "120",
            "--seed",
            "42",
            *extra,
        ]

    def test_emits_explanation_json(self, synth_csv, capsys):
        code, out, _ = run(capsys, self.base_argv(synth_csv))
        assert code == 0
        payload = json.loads(out)
        labels = [f["feature_label"] for f in payload["features"]]
        assert labels == ["lag:1", "lag:2"]
        assert payload["perturbation"]["block_length"] == 5

    def test_byte_identical_rerun(self, synth_csv, tmp_path):
        out1 = tmp_path / "one.json"
        out2 = tmp_path / "two.json"
        main(self.base_argv(synth_csv, ("--output", str(out1))))
        main(self.base_argv(synth_csv, ("--output", str(out2))))
        assert out1.read_bytes() == out2.read_bytes()

    def test_svg_written(self, synth_csv, tmp_path, capsys):
        svg = tmp_path / "coef.svg"
        code, _, _ = run(capsys, self.base_argv(synth_csv, ("--svg", str(svg))))
        assert code == 0
        text = svg.read_text()
        assert text.startswith("<svg") and "rect" in text

    def test_env_seed_fallback(self, synth_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("TSFL_SEED", "77")
        argv = [
            "explain",
            "--input",
            str(synth_csv),
            "--model",
            "ar:1",
            "--features",
            "lag:1",
            "--samples",
            "100",
        ]
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        main(argv + ["--output", str(a)])
        main(argv + ["--output", str(b)])
        assert a.read_bytes() == b.read_bytes()
        assert json.loads(a.read_text())["perturbation"]["rng_seed"] == 77


class TestPerturb:
    def test_emits_sample_lines(self, synth_csv, capsys):
        code, out, _ = run(
            capsys,
            [
                "perturb",
                "--input",
                str(synth_csv),
                "--samples",
                "7",
                "--seed",
                "1",
            ],
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 7
        assert all(len(line.split(",")) == 12 for line in lines)


class TestFidelityCommands:
    def common(self, synth_csv):
        return [
            "--input",
            str(synth_csv),
            "--model",
            "ar:2",
            "--samples",
            "80",
            "--queries",
            "2",
            "--iterations",
            "1",
            "--seed",
            "3",
        ]

    def test_fidelity_json(self, synth_csv, capsys):
        code, out, _ = run(
            capsys, ["fidelity", *self.common(synth_csv), "--features", "lag:1,lag:2"]
        )
        assert code == 0
        payload = json.loads(out)
        assert {"mae", "rmse", "mape", "records"} <= set(payload)
        assert len(payload["records"]) == 2

    def test_grid_csv_shape(self, synth_csv, capsys):
        code, out, _ = run(capsys, ["grid", *self.common(synth_csv)])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "dataset,block_length,block_swap,family,MAE,RMSE,MAPE"
        assert len(lines) == 28  # 27 cells

    def test_grid_json_best_cells(self, synth_csv, capsys):
        code, out, _ = run(capsys, ["grid", *self.common(synth_csv), "--json"])
        assert code == 0
        payload = json.loads(out)
        assert len(payload["cells"]) == 27
        assert set(payload["best"]) == {"lag", "rw", "ew"}

    def test_ablation_rows(self, synth_csv, capsys):
        code, out, _ = run(capsys, ["ablation", *self.common(synth_csv)])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "dataset,family,kernel,MAE,RMSE,MAPE"
        assert len(lines) == 7  # 3 families x 2 arms


class TestAnalyze:
    def test_u_test_on_export(self, tmp_path, capsys):
        path = tmp_path / "export.csv"
        rows = ["participant,group,background,score,duration_seconds"]
        rng = np.random.default_rng(0)
        for i in range(12):
            rows.append(f"c{i},control,CS,{int(rng.integers(0, 5))},10.0")
            rows.append(f"t{i},treatment,CS,{int(rng.integers(4, 9))},10.0")
            rows.append(f"cn{i},control,NonCS,{int(rng.integers(0, 5))},10.0")
            rows.append(f"tn{i},treatment,NonCS,{int(rng.integers(4, 9))},10.0")
        path.write_text("\n".join(rows) + "\n")
        code, out, _ = run(capsys, ["analyze", "--input", str(path)])
        assert code == 0
        payload = json.loads(out)
        assert "U" in payload["overall"]
        assert payload["by_background"]["CS"]["n1"] == 12
        assert 0.0 <= payload["overall"]["p_value"] <= 1.0


class TestAnalyzeEndToEnd:
    def test_synthetic_sessions_match_pair_count_oracle(self, tmp_path, capsys):
        """Scripted study sessions, exported and analyzed; U checked
        against exhaustive pair counting over the score lists."""
        from fastapi.testclient import TestClient

        from tsxplain.forecasters import ARModel
        from tsxplain.perturbation import PerturbationConfig
        from tsxplain.series import fit_minmax
        from tsxplain.service import JsonlStore, StudyEngine, create_app
        from tsxplain.synthetic import synthetic_series

        series = synthetic_series(n=60, seed=11)
        engine = StudyEngine(
            series=series,
            forecaster=ARModel(coefficients=np.array([1.0]), intercept=0.0),
            scaler=fit_minmax(series.values[:40]),
            store=JsonlStore(None),
            pcfg=PerturbationConfig(
                block_length=5, block_swap=2, sample_count=120, rng_seed=0
            ),
            train_length=40,
        )
        client = TestClient(create_app(engine))

        wrong_of = {"go_up": "go_down", "remain_stable": "go_up", "go_down": "remain_stable"}

        def run_session(group, participant, target_score, seed):
            created = client.post(
                "/api/session",
                json={"group": group, "participant": participant,
                      "background": "CS", "seed": seed},
            ).json()
            sid = created["session"]
            correct_left = target_score
            for round_no in range(1, 5):
                payload = client.get(f"/api/session/{sid}/round/{round_no}").json()
                for q in payload["questions"]:
                    verdict = client.post(
                        "/api/whatif",
                        json={"session": sid, "t_index": q["month_index"],
                              "direction": q["direction"], "round": round_no},
                    ).json()["verdict"]
                    choice = verdict if correct_left > 0 else wrong_of[verdict]
                    if correct_left > 0:
                        correct_left -= 1
                    client.post(
                        f"/api/session/{sid}/answer",
                        json={"round": round_no, "question": q["question"],
                              "choice": choice},
                    )
            return target_score

        control_scores = [run_session("control", f"c{i}", s, 100 + i)
                          for i, s in enumerate([2, 3, 4])]
        treatment_scores = [run_session("treatment", f"t{i}", s, 200 + i)
                            for i, s in enumerate([6, 7, 8])]

        export_path = tmp_path / "export.csv"
        export_path.write_text(client.get("/api/export").text)

        code, out, _ = run(capsys, ["analyze", "--input", str(export_path)])
        assert code == 0
        payload = json.loads(out)

        u_brute = sum(
            1.0 if c > t else (0.5 if c == t else 0.0)
            for c in control_scores
            for t in treatment_scores
        )
        assert payload["by_background"]["CS"]["U"] == pytest.approx(u_brute)
        assert payload["overall"]["U"] == pytest.approx(u_brute)
        assert payload["by_background"]["CS"]["n1"] == 3


class TestErrorPaths:
    def test_unknown_flag_exits_one(self, capsys):
        code, _, err = run(capsys, ["explain", "--nope"])
        assert code == 1
        assert "usage" in err

    def test_unknown_subcommand_exits_one(self, capsys):
        code, _, err = run(capsys, ["frobnicate"])
        assert code == 1

    def test_missing_input_file_is_runtime_error(self, capsys):
        code, _, err = run(
            capsys, ["explain", "--input", "/nonexistent/x.csv", "--seed", "1"]
        )
        assert code == 2
        assert "error" in err

    def test_bad_model_spec_is_validation_error(self, synth_csv, capsys):
        code, _, err = run(
            capsys,
            ["explain", "--input", str(synth_csv), "--model", "mystery:3", "--seed", "1"],
        )
        assert code == 1

    def test_help_available_everywhere(self, capsys):
        for sub in ("explain", "perturb", "fidelity", "grid", "ablation",
                    "serve", "analyze", "synth"):
            code, out, _ = run(capsys, [sub, "--help"])
            assert code == 0
            assert "usage" in out


class TestConfigFile:
    def test_config_overrides_defaults(self, synth_csv, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"block_length": 4, "samples": 90}))
        code, out, _ = run(
            capsys,
            [
                "--config",
                str(config),
                "explain",
                "--input",
                str(synth_csv),
                "--features",
                "lag:1",
                "--seed",
                "2",
            ],
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["perturbation"]["block_length"] == 4
        assert payload["perturbation"]["sample_count"] == 90

    def test_explicit_flag_beats_config(self, synth_csv, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"block_length": 4}))
        code, out, _ = run(
            capsys,
            [
                "--config",
                str(config),
                "explain",
                "--input",
                str(synth_csv),
                "--features",
                "lag:1",
                "--block-length",
                "3",
                "--seed",
                "2",
            ],
        )
        assert code == 0
        assert json.loads(out)["perturbation"]["block_length"] == 3

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"blok_length": 4}))
        code, _, err = run(capsys, ["--config", str(config), "synth"])
        assert code == 1
        assert "blok_length" in err


def test_coefficient_svg_renders_positive_and_negative():
    svg = coefficient_svg(["lag:1", "lag:2"], [0.5, -0.25])
    assert svg.count("<rect") == 2
    assert "#2a7" in svg and "#c55" in svg
