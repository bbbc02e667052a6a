"""Declarative task pipeline: validate a configuration, run tasks in order.

A run is described by an ordered task list plus per-task settings, read
from a YAML file or built in memory.  Tasks communicate through named
artifacts (corpus files, the model file, report files) and an in-memory
state object, and the whole run is a deterministic function of the
configuration and its input files.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import yaml

from .corpus import (
    ClassHierarchy,
    ComponentInventory,
    Corpus,
    SplitSpec,
    load_corpus,
    load_hierarchy,
    save_corpus,
    split_corpus,
)
from .evaluation import (
    SYSTEM_ORDER,
    format_report_table,
    run_experiment,
    save_report_json,
)
from .features import Featurizer, build_phrase_table
from .model_store import TrainedModel, save_model
from .reranker import RerankTrainConfig, train as train_reranker_weights
from .translation import (
    COMPONENT_GIVEN_TEXT,
    TEXT_GIVEN_COMPONENT,
    symmetrized_alignments,
    train_model1,
)

TASK_NAMES = (
    "extract",
    "load",
    "split",
    "train_translation",
    "build_phrases",
    "build_features",
    "train_reranker",
    "evaluate",
    "serve",
)

# tasks that put a corpus into the pipeline state
_CORPUS_PROVIDERS = ("extract", "load")

# per task, groups of prerequisite alternatives; each group needs at least
# one member earlier in the list, and groups are checked left to right so
# the reported gap is the earliest missing stage
_REQUIRES = {
    "split": (_CORPUS_PROVIDERS,),
    "train_translation": (_CORPUS_PROVIDERS,),
    "build_phrases": (_CORPUS_PROVIDERS, ("train_translation",)),
    "build_features": (_CORPUS_PROVIDERS, ("train_translation",), ("build_phrases",)),
    "train_reranker": (
        _CORPUS_PROVIDERS,
        ("train_translation",),
        ("build_phrases",),
        ("build_features",),
    ),
    "evaluate": (_CORPUS_PROVIDERS,),
    "serve": (("train_reranker",),),
}

_PATH_KEYS = (
    "corpus",
    "hierarchy",
    "model",
    "report_json",
    "report_table",
    "train_corpus",
    "dev_corpus",
    "test_corpus",
)

_SECTION_KEYS = {
    "split": ("train", "dev", "test"),
    "translation": ("iterations",),
    "phrases": ("max_len",),
    "reranker": ("pool_size", "epochs", "eta0", "l2", "shuffle_seed"),
    "bow": ("pool_size", "epochs", "eta0", "l2", "shuffle_seed"),
    "evaluate": ("systems",),
    "extract": ("repo", "output", "hierarchy_output", "url_template"),
    "serve": ("host", "port"),
}

_TOP_KEYS = ("tasks", "project", "seed", "baseline", "paths") + tuple(_SECTION_KEYS)


class PipelineError(ValueError):
    """Raised for invalid configuration or a failed task."""


@dataclass(frozen=True)
class PipelineConfig:
    tasks: tuple
    project: str = ""
    seed: int = 13
    baseline: bool = False
    paths: dict = field(default_factory=dict)
    split: dict = field(default_factory=dict)
    translation: dict = field(default_factory=dict)
    phrases: dict = field(default_factory=dict)
    reranker: dict = field(default_factory=dict)
    bow: dict = field(default_factory=dict)
    evaluate: dict = field(default_factory=dict)
    extract: dict = field(default_factory=dict)
    serve: dict = field(default_factory=dict)

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            seed=self.seed,
            train_frac=self.split.get("train", 0.70),
            dev_frac=self.split.get("dev", 0.15),
            test_frac=self.split.get("test", 0.15),
        )

    def rerank_cfg(self) -> RerankTrainConfig:
        return _train_cfg(self.reranker, self.seed)

    def bow_cfg(self) -> RerankTrainConfig:
        return _train_cfg(self.bow, self.seed)

    def systems(self) -> list:
        if self.baseline:
            return ["bow", "term_match", "translation"]
        chosen = self.evaluate.get("systems")
        return list(chosen) if chosen is not None else list(SYSTEM_ORDER)


def _train_cfg(section: dict, seed: int) -> RerankTrainConfig:
    return RerankTrainConfig(
        pool_size=section.get("pool_size", 100),
        epochs=section.get("epochs", 10),
        eta0=section.get("eta0", 0.1),
        l2=section.get("l2", 1e-5),
        shuffle_seed=section.get("shuffle_seed", seed + 84),
    )


def validate_config(raw: dict) -> PipelineConfig:
    """Check keys, task names, and dependency order; fill defaults."""
    if not isinstance(raw, dict):
        raise PipelineError("configuration must be a mapping")
    for key in raw:
        if key not in _TOP_KEYS:
            raise PipelineError(f"unknown setting {key!r}")

    tasks = raw.get("tasks")
    if not tasks or not isinstance(tasks, (list, tuple)):
        raise PipelineError("configuration needs a non-empty tasks list")
    for task in tasks:
        if task not in TASK_NAMES:
            raise PipelineError(f"unknown task {task!r}")
    for position, task in enumerate(tasks):
        earlier = set(tasks[:position])
        for alternatives in _REQUIRES.get(task, ()):
            if not earlier.intersection(alternatives):
                wanted = " or ".join(alternatives)
                raise PipelineError(
                    f"task {task!r} requires {wanted} earlier in the task list"
                )

    paths = dict(raw.get("paths") or {})
    for key in paths:
        if key not in _PATH_KEYS:
            raise PipelineError(f"unknown setting paths.{key!r}")

    sections = {}
    for name, allowed in _SECTION_KEYS.items():
        section = dict(raw.get(name) or {})
        for key in section:
            if key not in allowed:
                raise PipelineError(f"unknown setting {name}.{key!r}")
        sections[name] = section

    if "systems" in sections["evaluate"]:
        for system in sections["evaluate"]["systems"]:
            if system not in SYSTEM_ORDER:
                raise PipelineError(f"unknown setting evaluate.systems:{system!r}")

    return PipelineConfig(
        tasks=tuple(tasks),
        project=str(raw.get("project", "")),
        seed=int(raw.get("seed", 13)),
        baseline=bool(raw.get("baseline", False)),
        paths=paths,
        **sections,
    )


def load_config(path) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as handle:
        raw = yaml.safe_load(handle)
    return validate_config(raw if raw is not None else {})


@dataclass
class PipelineState:
    """Artifacts passed between tasks within one run."""

    corpus: Optional[Corpus] = None
    splits: Optional[tuple] = None
    forward: object = None
    reverse: object = None
    phrase_table: object = None
    featurizer: object = None
    weights: object = None
    rerank_log: object = None
    model_path: Optional[str] = None
    report: object = None


def _require(state_value, task: str, what: str):
    if state_value is None:
        raise PipelineError(f"task {task!r} ran before {what} was available")
    return state_value


def _task_extract(config: PipelineConfig, state: PipelineState) -> None:
    import subprocess

    repo = config.extract.get("repo")
    output = config.extract.get("output") or config.paths.get("corpus")
    hierarchy_out = config.extract.get("hierarchy_output") or config.paths.get("hierarchy")
    if not repo or not output or not hierarchy_out:
        raise PipelineError(
            "extract needs extract.repo plus corpus and hierarchy output paths"
        )
    command = [
        "fassist-extract",
        "--repo", str(repo),
        "--out-corpus", str(output),
        "--out-hierarchy", str(hierarchy_out),
    ]
    if config.project:
        command += ["--project", config.project]
    template = config.extract.get("url_template")
    if template:
        command += ["--url-template", str(template)]
    try:
        completed = subprocess.run(command, capture_output=True, text=True)
    except FileNotFoundError as exc:
        raise PipelineError(
            "the fassist-extract tool is not installed; "
            "install the extractor package or provide a corpus file and use the load task"
        ) from exc
    if completed.returncode != 0:
        raise PipelineError(
            f"fassist-extract failed: {completed.stderr.strip() or completed.stdout.strip()}"
        )
    state.corpus = _load_corpus_files(str(output), hierarchy_out, config)


def _load_corpus_files(corpus_path: str, hierarchy_path, config: PipelineConfig) -> Corpus:
    corpus = load_corpus(corpus_path)
    hierarchy = (
        load_hierarchy(hierarchy_path) if hierarchy_path else ClassHierarchy()
    )
    project = config.project or corpus.project_name
    return replace(corpus, hierarchy=hierarchy, project_name=project)


def _task_load(config: PipelineConfig, state: PipelineState) -> None:
    corpus_path = config.paths.get("corpus")
    if not corpus_path:
        raise PipelineError("load needs paths.corpus")
    state.corpus = _load_corpus_files(
        corpus_path, config.paths.get("hierarchy"), config
    )


def _task_split(config: PipelineConfig, state: PipelineState) -> None:
    corpus = _require(state.corpus, "split", "a corpus")
    state.splits = split_corpus(corpus, config.split_spec())
    names = ("train_corpus", "dev_corpus", "test_corpus")
    for name, part in zip(names, state.splits):
        target = config.paths.get(name)
        if target:
            save_corpus(part, target)


def _task_train_translation(config: PipelineConfig, state: PipelineState) -> None:
    corpus = _require(state.corpus, "train_translation", "a corpus")
    iterations = config.translation.get("iterations", 10)
    state.forward, _ = train_model1(
        corpus, direction=TEXT_GIVEN_COMPONENT, iterations=iterations
    )
    state.reverse, _ = train_model1(
        corpus, direction=COMPONENT_GIVEN_TEXT, iterations=iterations
    )


def _task_build_phrases(config: PipelineConfig, state: PipelineState) -> None:
    corpus = _require(state.corpus, "build_phrases", "a corpus")
    forward = _require(state.forward, "build_phrases", "translation tables")
    alignments = symmetrized_alignments(corpus, forward, state.reverse)
    state.phrase_table = build_phrase_table(
        corpus, alignments, max_len=config.phrases.get("max_len", 3)
    )


def _task_build_features(config: PipelineConfig, state: PipelineState) -> None:
    corpus = _require(state.corpus, "build_features", "a corpus")
    phrase_table = _require(state.phrase_table, "build_features", "a phrase table")
    state.featurizer = Featurizer(
        lex_table=state.forward,
        phrase_table=phrase_table,
        hierarchy=corpus.hierarchy,
        param_desc_lookup=Featurizer.param_lookup_from_corpus(corpus),
    )


def _task_train_reranker(config: PipelineConfig, state: PipelineState) -> None:
    corpus = _require(state.corpus, "train_reranker", "a corpus")
    featurizer = _require(state.featurizer, "train_reranker", "a featurizer")
    cfg = config.rerank_cfg()
    # hold out a seeded dev slice for epoch selection; pools and the
    # final weights still see the rest of the corpus
    train_part, dev_part, extra = split_corpus(corpus, config.split_spec())
    train_part = replace(
        train_part, pairs=train_part.pairs + extra.pairs
    )
    inventory = ComponentInventory.from_corpus(corpus)
    weights, log = train_reranker_weights(
        train_part, dev_part, state.forward, featurizer,
        cfg=cfg, inventory=inventory,
    )
    state.weights = weights
    state.rerank_log = log

    model_path = config.paths.get("model")
    if model_path:
        model = TrainedModel(
            forward=state.forward,
            reverse=state.reverse,
            phrase_table=state.phrase_table,
            index=featurizer.index,
            weights=weights,
            project_name=config.project or corpus.project_name,
            rerank_pool=cfg.pool_size,
        )
        save_model(model, model_path)
        state.model_path = model_path


def _task_evaluate(config: PipelineConfig, state: PipelineState) -> None:
    corpus = _require(state.corpus, "evaluate", "a corpus")
    report = run_experiment(
        corpus,
        spec=config.split_spec(),
        systems=config.systems(),
        em_iterations=config.translation.get("iterations", 10),
        rerank_cfg=config.rerank_cfg(),
        bow_cfg=config.bow_cfg(),
        max_phrase_len=config.phrases.get("max_len", 3),
    )
    state.report = report
    report_json = config.paths.get("report_json")
    if report_json:
        save_report_json(report, report_json)
    report_table = config.paths.get("report_table")
    if report_table:
        with open(report_table, "w", encoding="utf-8") as handle:
            handle.write(format_report_table(report))


def _task_serve(config: PipelineConfig, state: PipelineState) -> None:
    from .service import serve as serve_app

    corpus_path = config.paths.get("corpus")
    model_path = state.model_path or config.paths.get("model")
    if not model_path or not corpus_path:
        raise PipelineError("serve needs paths.model and paths.corpus")
    serve_app(
        model_path,
        corpus_path,
        hierarchy_path=config.paths.get("hierarchy"),
        host=config.serve.get("host", "127.0.0.1"),
        port=config.serve.get("port", 8000),
    )


_TASK_FUNCS = {
    "extract": _task_extract,
    "load": _task_load,
    "split": _task_split,
    "train_translation": _task_train_translation,
    "build_phrases": _task_build_phrases,
    "build_features": _task_build_features,
    "train_reranker": _task_train_reranker,
    "evaluate": _task_evaluate,
    "serve": _task_serve,
}


def run_pipeline(config: PipelineConfig) -> PipelineState:
    """Execute the configured tasks in order, halting on the first failure."""
    state = PipelineState()
    for task in config.tasks:
        try:
            _TASK_FUNCS[task](config, state)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(f"task {task!r} failed: {exc}") from exc
    return state
