import json
import shutil

import pytest
import yaml

from fassist.model_store import ModelStoreError, load_model
from fassist.pipeline import (
    PipelineError,
    load_config,
    run_pipeline,
    validate_config,
)

from conftest import data_file, mini_pipeline_config


class TestValidateConfig:

    def test_minimal_config(self):
        config = validate_config({
            "tasks": ["load", "train_translation", "evaluate"],
            "paths": {"corpus": "corpus.jsonl"},
        })
        assert config.tasks == ("load", "train_translation", "evaluate")
        assert config.seed == 13
        assert config.baseline is False
        assert config.split_spec().train_frac == 0.70

    def test_reranker_before_translation_names_both(self):
        with pytest.raises(PipelineError) as err:
            validate_config({"tasks": ["load", "train_reranker", "train_translation"]})
        assert "train_reranker" in str(err.value)
        assert "train_translation" in str(err.value)

    def test_unknown_setting_named(self):
        with pytest.raises(PipelineError) as err:
            validate_config({"tasks": ["load"], "foo": 1})
        assert "foo" in str(err.value)

    def test_unknown_nested_setting_named(self):
        with pytest.raises(PipelineError) as err:
            validate_config({"tasks": ["load"], "reranker": {"momentum": 0.9}})
        assert "momentum" in str(err.value)

    def test_unknown_task_named(self):
        with pytest.raises(PipelineError) as err:
            validate_config({"tasks": ["load", "deploy"]})
        assert "deploy" in str(err.value)

    def test_empty_tasks_rejected(self):
        with pytest.raises(PipelineError):
            validate_config({"tasks": []})

    def test_serve_requires_reranker(self):
        with pytest.raises(PipelineError) as err:
            validate_config({"tasks": ["load", "serve"]})
        assert "serve" in str(err.value)

    def test_split_needs_corpus_provider(self):
        with pytest.raises(PipelineError) as err:
            validate_config({"tasks": ["split"]})
        assert "split" in str(err.value)

    def test_unknown_system_rejected(self):
        with pytest.raises(PipelineError):
            validate_config({
                "tasks": ["load", "evaluate"],
                "evaluate": {"systems": ["oracle"]},
            })

    def test_baseline_systems(self):
        config = validate_config({"tasks": ["load"], "baseline": True})
        assert config.systems() == ["bow", "term_match", "translation"]

    def test_yaml_round_trip(self, tmp_path):
        raw = {
            "tasks": ["load", "evaluate"],
            "seed": 99,
            "paths": {"corpus": "c.jsonl"},
        }
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump(raw))
        config = load_config(path)
        assert config.seed == 99
        assert config.tasks == ("load", "evaluate")


class TestRunPipeline:

    def test_full_run_writes_model_and_report(self, tmp_path):
        config = mini_pipeline_config(
            tmp_path,
            tasks=[
                "load",
                "split",
                "train_translation",
                "build_phrases",
                "build_features",
                "train_reranker",
                "evaluate",
            ],
            epochs=2,
        )
        state = run_pipeline(config)
        model = load_model(config.paths["model"])
        assert model.project_name == "nltk-mini"
        assert len(model.weights) == len(model.index)
        report = json.loads((tmp_path / "report.json").read_text())
        systems = [row["system"] for row in report["systems"]]
        assert systems == ["bow", "term_match", "translation", "reranker"]
        assert (tmp_path / "report.txt").read_text().startswith("system")
        assert state.report is not None

    def test_rerun_byte_identical(self, tmp_path):
        blobs = []
        reports = []
        for name in ("first", "second"):
            out = tmp_path / name
            out.mkdir()
            config = mini_pipeline_config(out, epochs=2)
            run_pipeline(config)
            blobs.append((out / "model.json.gz").read_bytes())
        assert blobs[0] == blobs[1]

    def test_baseline_flag_drops_reranker(self, tmp_path):
        config = mini_pipeline_config(
            tmp_path,
            tasks=["load", "evaluate"],
            epochs=2,
            baseline=True,
        )
        run_pipeline(config)
        report = json.loads((tmp_path / "report.json").read_text())
        systems = [row["system"] for row in report["systems"]]
        assert systems == ["bow", "term_match", "translation"]

    def test_task_failure_names_task(self, tmp_path):
        config = validate_config({
            "tasks": ["load"],
            "paths": {"corpus": str(tmp_path / "missing.jsonl")},
        })
        with pytest.raises(PipelineError) as err:
            run_pipeline(config)
        assert "load" in str(err.value)

    def test_split_writes_parts(self, tmp_path):
        config = validate_config({
            "tasks": ["load", "split"],
            "paths": {
                "corpus": data_file("mini_corpus.jsonl"),
                "hierarchy": data_file("mini_hierarchy.jsonl"),
                "train_corpus": str(tmp_path / "train.jsonl"),
                "dev_corpus": str(tmp_path / "dev.jsonl"),
                "test_corpus": str(tmp_path / "test.jsonl"),
            },
        })
        state = run_pipeline(config)
        assert (tmp_path / "train.jsonl").exists()
        sizes = [len(part.pairs) for part in state.splits]
        assert sum(sizes) == 12
        assert sizes == [10, 1, 1]

    @pytest.mark.skipif(shutil.which("fassist-extract") is None,
                        reason="extractor tool not installed")
    def test_extract_task_runs_the_miner(self, tmp_path):
        repo = tmp_path / "repo" / "pkg"
        repo.mkdir(parents=True)
        (repo / "__init__.py").write_text(
            '"""Pkg."""\n\n\ndef ping(host):\n    """Send one probe to the host."""\n'
            "    return host\n",
            encoding="utf-8",
        )
        config = validate_config({
            "tasks": ["extract"],
            "project": "probe",
            "extract": {
                "repo": str(tmp_path / "repo"),
                "output": str(tmp_path / "c.jsonl"),
                "hierarchy_output": str(tmp_path / "h.jsonl"),
                "url_template": "https://x.test/{file}#L{line}",
            },
        })
        state = run_pipeline(config)
        assert state.corpus.project_name == "probe"
        assert state.corpus.source_url_template == "https://x.test/{file}#L{line}"
        assert [p.component.function_name for p in state.corpus.pairs] == ["ping"]
        assert (tmp_path / "h.jsonl").exists()


class TestModelStore:

    def test_version_rejected(self, tmp_path, mini_model):
        import gzip

        model_path = mini_model[0]
        payload = json.loads(gzip.open(model_path).read())
        payload["format_version"] = 99
        bad = tmp_path / "bad.json.gz"
        with gzip.open(bad, "wt") as handle:
            json.dump(payload, handle)
        with pytest.raises(ModelStoreError) as err:
            load_model(bad)
        assert "99" in str(err.value)

    def test_dimension_mismatch_rejected(self, tmp_path, mini_model):
        import gzip

        payload = json.loads(gzip.open(mini_model[0]).read())
        payload["weights"] = payload["weights"][:-1]
        bad = tmp_path / "bad.json.gz"
        with gzip.open(bad, "wt") as handle:
            json.dump(payload, handle)
        with pytest.raises(ModelStoreError):
            load_model(bad)

    def test_round_trip_preserves_tables(self, tmp_path, mini_model):
        model = load_model(mini_model[0])
        from fassist.model_store import save_model

        copy_path = tmp_path / "copy.json.gz"
        save_model(model, copy_path)
        again = load_model(copy_path)
        assert again.forward.probs == model.forward.probs
        assert again.phrase_table.phrases == model.phrase_table.phrases
        assert again.index.names == model.index.names
        assert (mini_model[0] != str(copy_path))
        assert open(mini_model[0], "rb").read() == open(copy_path, "rb").read()


class TestCli:

    def test_evaluate_command(self, tmp_path, capsys):
        from fassist.cli import main

        code = main([
            "evaluate",
            "--corpus", data_file("mini_corpus.jsonl"),
            "--hierarchy", data_file("mini_hierarchy.jsonl"),
            "--systems", "term_match",
            "--report-json", str(tmp_path / "r.json"),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "term_match" in out
        assert (tmp_path / "r.json").exists()

    def test_query_command(self, mini_model, capsys):
        from fassist.cli import main

        model_path, corpus_path, hierarchy_path = mini_model
        code = main([
            "query",
            "--model", model_path,
            "--corpus", corpus_path,
            "--hierarchy", hierarchy_path,
            "--text", "remove the node with the given address",
            "--k", "3",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "remove_by_address" in out

    def test_run_command_with_overrides(self, tmp_path, capsys):
        from fassist.cli import main

        config_path = tmp_path / "config.yaml"
        config_path.write_text(yaml.safe_dump({
            "tasks": ["load", "evaluate"],
            "seed": 13,
            "baseline": True,
            "paths": {
                "corpus": data_file("mini_corpus.jsonl"),
                "hierarchy": data_file("mini_hierarchy.jsonl"),
            },
            "reranker": {"pool_size": 6, "epochs": 1},
            "bow": {"pool_size": 6, "epochs": 1},
            "translation": {"iterations": 2},
        }))
        code = main([
            "run",
            "--config", str(config_path),
            "--report-json", str(tmp_path / "report.json"),
        ])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert [row["system"] for row in report["systems"]] == [
            "bow", "term_match", "translation",
        ]

    def test_invalid_config_is_an_error_exit(self, tmp_path, capsys):
        from fassist.cli import main

        config_path = tmp_path / "config.yaml"
        config_path.write_text(yaml.safe_dump({"tasks": ["load"], "foo": 1}))
        code = main(["run", "--config", str(config_path)])
        assert code == 1
        assert "foo" in capsys.readouterr().err
