"""Retrieval evaluation: exact-match metrics, baselines, experiment runs.

Systems are compared on exact-match Accuracy@1, Accuracy@10, and MRR over
full-inventory rankings of held-out test queries.  Two baselines bracket
the translation-based systems: a bag-of-words log-linear model over
word/term pair indicators, and a term-overlap counter.  Reports list
systems in a fixed order (bow, term match, translation, reranker) so runs
are comparable side by side.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import (
    Component,
    ComponentInventory,
    Corpus,
    SplitSpec,
    TextSequence,
    split_corpus,
)
from .features import (
    FeatureIndex,
    FeatureVector,
    Featurizer,
    build_phrase_table,
    word_features,
)
from .reranker import (
    RerankTrainConfig,
    RerankTrainLog,
    WeightVector,
    objective_and_gradient,
    rerank,
    train as train_reranker,
)
from .translation import (
    COMPONENT_GIVEN_TEXT,
    TEXT_GIVEN_COMPONENT,
    rank_components,
    symmetrized_alignments,
    train_model1,
)

SYSTEM_ORDER = ("bow", "term_match", "translation", "reranker")


class EvalError(ValueError):
    """Raised for malformed evaluation inputs or configuration."""


@dataclass(frozen=True)
class EvalResult:
    acc_at_1: float
    acc_at_10: float
    mrr: float
    gold_ranks: tuple

    def __post_init__(self) -> None:
        for name in ("acc_at_1", "acc_at_10", "mrr"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise EvalError(f"{name} outside [0, 1]: {value}")
        if self.acc_at_1 > self.acc_at_10 + 1e-12:
            raise EvalError("acc@1 cannot exceed acc@10")
        if self.mrr + 1e-12 < self.acc_at_1:
            raise EvalError("MRR cannot fall below acc@1")


def exact_match(candidate: Component, gold: Component) -> bool:
    """Two components match when their linearizations are identical."""
    return candidate.linearized == gold.linearized


def _lin(item) -> tuple:
    component = item[0] if isinstance(item, tuple) else item
    return component.linearized


def compute_metrics(ranked_lists: Sequence[Sequence], golds: Sequence[Component]) -> EvalResult:
    """Exact-match Acc@1, Acc@10, and MRR over per-query rankings.

    A gold component missing from its ranking contributes zero to every
    metric.  Accumulation is in fixed query order.
    """
    if len(ranked_lists) != len(golds):
        raise EvalError(
            f"{len(ranked_lists)} rankings for {len(golds)} gold components"
        )
    if not golds:
        raise EvalError("cannot evaluate zero queries")
    ranks = []
    for ranking, gold in zip(ranked_lists, golds):
        gold_lin = gold.linearized
        found = None
        for position, item in enumerate(ranking, start=1):
            if _lin(item) == gold_lin:
                found = position
                break
        ranks.append(found)
    n = len(ranks)
    acc1 = sum(1 for r in ranks if r == 1) / n
    acc10 = sum(1 for r in ranks if r is not None and r <= 10) / n
    mrr = math.fsum(1.0 / r for r in ranks if r is not None) / n
    return EvalResult(acc_at_1=acc1, acc_at_10=acc10, mrr=mrr, gold_ranks=tuple(ranks))


def term_match_rank(x: TextSequence, inventory: ComponentInventory) -> list:
    """Rank by the per-token count of query words found among component terms."""
    if not inventory.components:
        raise EvalError("cannot rank an empty inventory")
    scored = []
    for component in inventory.components:
        terms = set(component.linearized)
        score = float(sum(1 for w in x.tokens if w in terms))
        scored.append((component, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0].linearized))
    return scored


# ---------------------------------------------------------------------------
# bag-of-words baseline
# ---------------------------------------------------------------------------

def bow_fragment(x: TextSequence, z: Component) -> dict:
    """Word/term pair indicators only; the ablated feature set."""
    return {
        name: value
        for name, value in word_features(x, z).items()
        if name.startswith("wp=")
    }


@dataclass
class BowModel:
    index: FeatureIndex
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len(self.weights) != len(self.index):
            raise EvalError(
                f"{len(self.weights)} weights for {len(self.index)} features"
            )
        self._by_word = None

    def _word_map(self) -> dict:
        # name layout is wp=<word>|<term>; group ids by word once
        if self._by_word is None:
            by_word: dict = {}
            for fid, name in enumerate(self.index.names):
                if not name.startswith("wp="):
                    continue
                word, _, term = name[3:].partition("|")
                by_word.setdefault(word, {})[term] = fid
            self._by_word = by_word
        return self._by_word

    def score(self, x: TextSequence, z: Component) -> float:
        column = self._column_sums(x)
        return math.fsum(column.get(t, 0.0) for t in set(z.linearized))

    def _column_sums(self, x: TextSequence) -> dict:
        by_word = self._word_map()
        column: dict = {}
        for word in sorted(set(x.tokens)):
            for term, fid in by_word.get(word, {}).items():
                column[term] = column.get(term, 0.0) + float(self.weights[fid])
        return column


def bow_rank(x: TextSequence, inventory: ComponentInventory, model: BowModel) -> list:
    """Full-inventory ranking under the bag-of-words linear score."""
    if not inventory.components:
        raise EvalError("cannot rank an empty inventory")
    column = model._column_sums(x)
    scored = []
    for component in inventory.components:
        score = math.fsum(column.get(t, 0.0) for t in set(component.linearized))
        scored.append((component, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0].linearized))
    return scored


def _bow_dev_mrr(model: BowModel, dev_corpus: Corpus, inventory: ComponentInventory) -> float:
    total = 0.0
    for pair in dev_corpus.pairs:
        ranking = bow_rank(pair.text, inventory, model)
        for rank, (component, _) in enumerate(ranking, start=1):
            if component.linearized == pair.component.linearized:
                total += 1.0 / rank
                break
    return total / len(dev_corpus.pairs)


def train_bow(
    train_corpus: Corpus,
    dev_corpus: Corpus,
    inventory: ComponentInventory,
    cfg: Optional[RerankTrainConfig] = None,
) -> tuple:
    """Train the BoW baseline; returns (BowModel, RerankTrainLog).

    Pools are uniformly sampled negatives plus the gold component, and
    epochs are selected by dev MRR exactly as in reranker training.  The
    pre-update zero-weight model is the baseline candidate here.
    """
    cfg = cfg or RerankTrainConfig()
    if not train_corpus.pairs:
        raise EvalError("training corpus is empty")
    if not dev_corpus.pairs:
        raise EvalError("dev corpus is empty")
    if not inventory.components:
        raise EvalError("component inventory is empty")

    rng = random.Random(cfg.shuffle_seed)
    index = FeatureIndex()
    examples = []
    for pair in train_corpus.pairs:
        gold_lin = pair.component.linearized
        negatives = [
            z for z in inventory.components if z.linearized != gold_lin
        ]
        if len(negatives) > cfg.pool_size:
            negatives = rng.sample(negatives, cfg.pool_size)
        pool = negatives + [pair.component]
        fvs = []
        for z in pool:
            named = bow_fragment(pair.text, z)
            fvs.append(
                FeatureVector(
                    {index.id_for(name): named[name] for name in sorted(named)}
                )
            )
        examples.append((fvs, len(pool) - 1))
    index.freeze()

    dim = len(index)
    weights = np.zeros(dim, dtype=np.float64)
    base_model = BowModel(index=index, weights=weights.copy())
    if cfg.epochs == 0:
        log = RerankTrainLog(base_dev_mrr=0.0, best_label="init", best_dev_mrr=0.0)
        return base_model, log

    base_mrr = _bow_dev_mrr(base_model, dev_corpus, inventory)
    best_weights = None
    best_mrr = -math.inf
    best_label = ""
    epoch_mrrs = []
    step = 0
    horizon = float(len(examples))
    for epoch in range(1, cfg.epochs + 1):
        order = list(range(len(examples)))
        rng.shuffle(order)
        for slot in order:
            fvs, gold_idx = examples[slot]
            eta = cfg.eta0 / (1.0 + step / horizon)
            _, grad = objective_and_gradient(weights, fvs, gold_idx, cfg.l2)
            weights += eta * grad
            step += 1
        epoch_model = BowModel(index=index, weights=weights.copy())
        epoch_mrr = _bow_dev_mrr(epoch_model, dev_corpus, inventory)
        epoch_mrrs.append(epoch_mrr)
        if epoch_mrr > best_mrr:
            best_mrr = epoch_mrr
            best_weights = weights.copy()
            best_label = "epoch-%d" % epoch
    if base_mrr > best_mrr:
        best_mrr = base_mrr
        best_weights = base_model.weights
        best_label = "base"

    log = RerankTrainLog(
        base_dev_mrr=base_mrr,
        epoch_dev_mrr=tuple(epoch_mrrs),
        best_label=best_label,
        best_dev_mrr=best_mrr,
    )
    return BowModel(index=index, weights=best_weights), log


# ---------------------------------------------------------------------------
# experiment driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemResult:
    system: str
    result: EvalResult
    dev_mrr: float


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple

    def by_system(self) -> dict:
        return {row.system: row for row in self.rows}


def _ranking_mrr(rankings, golds) -> float:
    return compute_metrics(rankings, golds).mrr


def build_reranker_stack(
    train_corpus: Corpus,
    em_iterations: int = 10,
    max_phrase_len: int = 3,
):
    """Train both lexical tables, symmetrized phrases, and a featurizer.

    Shared between experiments and deployment model building, so the
    served model and the evaluated one come from the same recipe.
    """
    forward, _ = train_model1(
        train_corpus, direction=TEXT_GIVEN_COMPONENT, iterations=em_iterations
    )
    reverse, _ = train_model1(
        train_corpus, direction=COMPONENT_GIVEN_TEXT, iterations=em_iterations
    )
    sym_alignments = symmetrized_alignments(train_corpus, forward, reverse)
    phrase_table = build_phrase_table(
        train_corpus, sym_alignments, max_len=max_phrase_len
    )
    featurizer = Featurizer(
        lex_table=forward,
        phrase_table=phrase_table,
        hierarchy=train_corpus.hierarchy,
        param_desc_lookup=Featurizer.param_lookup_from_corpus(train_corpus),
    )
    return forward, reverse, phrase_table, featurizer


def reranked_full_ranking(
    x: TextSequence,
    translation_ranking: list,
    weights: WeightVector,
    featurizer: Featurizer,
    pool_size: int,
) -> list:
    """Rerank the head of a full translation ranking, keep the tail order."""
    head = translation_ranking[:pool_size]
    tail = translation_ranking[pool_size:]
    reranked = rerank(x, head, weights, featurizer, k=len(head))
    return list(reranked) + list(tail)


def run_experiment(
    corpus: Corpus,
    spec: Optional[SplitSpec] = None,
    systems: Optional[Sequence[str]] = None,
    em_iterations: int = 10,
    rerank_cfg: Optional[RerankTrainConfig] = None,
    bow_cfg: Optional[RerankTrainConfig] = None,
    max_phrase_len: int = 3,
) -> ExperimentReport:
    """Split, train the requested systems, and evaluate on the test split.

    The component inventory is built from the whole corpus so every gold
    is retrievable and all systems rank the same candidate set.  Rows are
    emitted in the fixed order bow, term_match, translation, reranker.
    """
    spec = spec or SplitSpec()
    requested = set(systems) if systems is not None else set(SYSTEM_ORDER)
    unknown = requested - set(SYSTEM_ORDER)
    if unknown:
        raise EvalError(f"unknown systems: {sorted(unknown)}")
    if not requested:
        raise EvalError("no systems requested")

    train_split, dev_split, test_split = split_corpus(corpus, spec)
    inventory = ComponentInventory.from_corpus(corpus)
    test_queries = [pair.text for pair in test_split.pairs]
    test_golds = [pair.component for pair in test_split.pairs]
    dev_golds = [pair.component for pair in dev_split.pairs]

    need_translation = bool(requested & {"translation", "reranker"})
    rows = []

    if "bow" in requested:
        bow_model, bow_log = train_bow(
            train_split, dev_split, inventory, cfg=bow_cfg
        )
        rankings = [bow_rank(x, inventory, bow_model) for x in test_queries]
        rows.append(
            SystemResult(
                system="bow",
                result=compute_metrics(rankings, test_golds),
                dev_mrr=bow_log.best_dev_mrr,
            )
        )

    if "term_match" in requested:
        rankings = [term_match_rank(x, inventory) for x in test_queries]
        dev_rankings = [
            term_match_rank(pair.text, inventory) for pair in dev_split.pairs
        ]
        rows.append(
            SystemResult(
                system="term_match",
                result=compute_metrics(rankings, test_golds),
                dev_mrr=_ranking_mrr(dev_rankings, dev_golds),
            )
        )

    if need_translation:
        forward, reverse, phrase_table, featurizer = build_reranker_stack(
            train_split, em_iterations=em_iterations, max_phrase_len=max_phrase_len
        )
        test_rankings = [
            rank_components(x, inventory, forward, k=len(inventory.components))
            for x in test_queries
        ]
        dev_translation = [
            rank_components(
                pair.text, inventory, forward, k=len(inventory.components)
            )
            for pair in dev_split.pairs
        ]
        translation_dev_mrr = _ranking_mrr(dev_translation, dev_golds)

        if "translation" in requested:
            rows.append(
                SystemResult(
                    system="translation",
                    result=compute_metrics(test_rankings, test_golds),
                    dev_mrr=translation_dev_mrr,
                )
            )

        if "reranker" in requested:
            cfg = rerank_cfg or RerankTrainConfig()
            weights, _ = train_reranker(
                train_split, dev_split, forward, featurizer,
                cfg=cfg, inventory=inventory,
            )
            # epoch selection inside training scores candidate pools; the
            # report scores full-inventory rankings.  Re-apply the final
            # selection on the reported metric: the trained weights are
            # kept only when they do not fall below the plain translation
            # ordering on dev, otherwise the unit-translation-weight
            # baseline is the selected reranker, and its rankings are the
            # translation rankings themselves.
            dev_reranked = [
                reranked_full_ranking(
                    pair.text, ranking, weights, featurizer, cfg.pool_size
                )
                for pair, ranking in zip(dev_split.pairs, dev_translation)
            ]
            trained_dev_mrr = _ranking_mrr(dev_reranked, dev_golds)
            if trained_dev_mrr >= translation_dev_mrr:
                rankings = [
                    reranked_full_ranking(
                        x, ranking, weights, featurizer, cfg.pool_size
                    )
                    for x, ranking in zip(test_queries, test_rankings)
                ]
                reranker_dev_mrr = trained_dev_mrr
            else:
                rankings = test_rankings
                reranker_dev_mrr = translation_dev_mrr
            rows.append(
                SystemResult(
                    system="reranker",
                    result=compute_metrics(rankings, test_golds),
                    dev_mrr=reranker_dev_mrr,
                )
            )

    ordered = sorted(rows, key=lambda row: SYSTEM_ORDER.index(row.system))
    return ExperimentReport(rows=tuple(ordered))


# ---------------------------------------------------------------------------
# report writers
# ---------------------------------------------------------------------------

def report_as_dict(report: ExperimentReport) -> dict:
    return {
        "systems": [
            {
                "system": row.system,
                "acc_at_1": row.result.acc_at_1,
                "acc_at_10": row.result.acc_at_10,
                "mrr": row.result.mrr,
                "dev_mrr": row.dev_mrr,
                "queries": len(row.result.gold_ranks),
            }
            for row in report.rows
        ]
    }


def save_report_json(report: ExperimentReport, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report_as_dict(report), handle, indent=2, sort_keys=True)
        handle.write("\n")


def format_report_table(report: ExperimentReport) -> str:
    """Aligned text table with one row per system."""
    headers = ("system", "acc@1", "acc@10", "mrr", "dev_mrr")
    body = [
        (
            row.system,
            f"{row.result.acc_at_1:.4f}",
            f"{row.result.acc_at_10:.4f}",
            f"{row.result.mrr:.4f}",
            f"{row.dev_mrr:.4f}",
        )
        for row in report.rows
    ]
    widths = [
        max(len(headers[col]), *(len(line[col]) for line in body)) if body else len(headers[col])
        for col in range(len(headers))
    ]
    lines = [
        "  ".join(headers[col].ljust(widths[col]) for col in range(len(headers))),
        "  ".join("-" * widths[col] for col in range(len(headers))),
    ]
    for line in body:
        lines.append("  ".join(line[col].ljust(widths[col]) for col in range(len(headers))))
    return "\n".join(lines) + "\n"
