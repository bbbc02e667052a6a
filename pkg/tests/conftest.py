import importlib.resources
import shutil

import pytest

from fassist.pipeline import run_pipeline, validate_config


def data_file(name: str) -> str:
    return str(importlib.resources.files("fassist") / "data" / name)


def mini_pipeline_config(out_dir, tasks=None, epochs=4, **extra):
    config = {
        "tasks": list(
            tasks
            or (
                "load",
                "train_translation",
                "build_phrases",
                "build_features",
                "train_reranker",
            )
        ),
        "project": "nltk-mini",
        "seed": 13,
        "paths": {
            "corpus": data_file("mini_corpus.jsonl"),
            "hierarchy": data_file("mini_hierarchy.jsonl"),
            "model": str(out_dir / "model.json.gz"),
            "report_json": str(out_dir / "report.json"),
            "report_table": str(out_dir / "report.txt"),
        },
        "translation": {"iterations": 6},
        "reranker": {"pool_size": 6, "epochs": epochs},
        "bow": {"pool_size": 6, "epochs": epochs},
    }
    config.update(extra)
    return validate_config(config)


@pytest.fixture(scope="session")
def mini_model(tmp_path_factory):
    """Train the bundled mini corpus once; yields (model_path, corpus_path, hierarchy_path)."""
    out_dir = tmp_path_factory.mktemp("mini-model")
    config = mini_pipeline_config(out_dir)
    run_pipeline(config)
    return (
        config.paths["model"],
        config.paths["corpus"],
        config.paths["hierarchy"],
    )


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {name}: {status}", flush=True)
