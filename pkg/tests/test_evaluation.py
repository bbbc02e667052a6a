import json
import math
import random

import numpy as np
import pytest

from fassist.corpus import (
    Component,
    ComponentInventory,
    Corpus,
    Pair,
    SplitSpec,
    TextSequence,
)
from fassist.evaluation import (
    BowModel,
    EvalError,
    EvalResult,
    bow_fragment,
    bow_rank,
    compute_metrics,
    exact_match,
    format_report_table,
    report_as_dict,
    run_experiment,
    save_report_json,
    term_match_rank,
    train_bow,
)
from fassist.features import FeatureIndex
from fassist.reranker import RerankTrainConfig


def comp(fn, namespace=(), class_name=None, args=()):
    return Component(function_name=fn, namespace=tuple(namespace),
                     class_name=class_name, arg_names=tuple(args))


def text(*tokens):
    return TextSequence(tuple(tokens))


def pair_of(words, component):
    return Pair(text=TextSequence(tuple(words)), component=component)


class TestExactMatch:

    def test_identical(self):
        a = comp("add_arc", args=("head",))
        assert exact_match(a, comp("add_arc", args=("head",)))

    def test_different_args(self):
        assert not exact_match(comp("add_arc", args=("head",)),
                               comp("add_arc", args=("tail",)))

    def test_canonical_linearization(self):
        # different surface construction, same linearized sequence
        a = Component(function_name="trainHMM")
        b = Component(function_name="trainHMM")
        assert a.linearized == b.linearized
        assert exact_match(a, b)


# ---------------------------------------------------------------------------
# oracle: per-query recomputation from the metric definitions
# ---------------------------------------------------------------------------

def oracle_metrics(ranked_lists, golds):
    n = len(golds)
    acc1 = acc10 = 0
    rr_sum = 0.0
    for ranking, gold in zip(ranked_lists, golds):
        rank = None
        for pos, item in enumerate(ranking, start=1):
            cand = item[0] if isinstance(item, tuple) else item
            if cand.linearized == gold.linearized:
                rank = pos
                break
        if rank == 1:
            acc1 += 1
        if rank is not None and rank <= 10:
            acc10 += 1
        if rank is not None:
            rr_sum += 1.0 / rank
    return acc1 / n, acc10 / n, rr_sum / n


class TestComputeMetrics:

    def test_all_rank_one(self):
        golds = [comp("a"), comp("b")]
        rankings = [[comp("a"), comp("b")], [comp("b"), comp("a")]]
        result = compute_metrics(rankings, golds)
        assert (result.acc_at_1, result.acc_at_10, result.mrr) == (1.0, 1.0, 1.0)

    def test_hand_ranks_one_two_four(self):
        golds = [comp("g1"), comp("g2"), comp("g3")]
        fillers = [comp(f"f{i}") for i in range(6)]
        rankings = [
            [comp("g1")] + fillers[:3],
            [fillers[0], comp("g2"), fillers[1]],
            [fillers[0], fillers[1], fillers[2], comp("g3")],
        ]
        result = compute_metrics(rankings, golds)
        assert math.isclose(result.acc_at_1, 1 / 3)
        assert result.acc_at_10 == 1.0
        assert math.isclose(result.mrr, (1.0 + 0.5 + 0.25) / 3)
        assert result.gold_ranks == (1, 2, 4)

    def test_gold_never_retrieved(self):
        golds = [comp("gone")]
        rankings = [[comp("x"), comp("y")]]
        result = compute_metrics(rankings, golds)
        assert (result.acc_at_1, result.acc_at_10, result.mrr) == (0.0, 0.0, 0.0)
        assert result.gold_ranks == (None,)

    def test_matches_oracle_on_random_fixtures(self):
        rng = random.Random(41)
        pool = [comp(f"c{i}") for i in range(30)]
        for _ in range(100):
            n_queries = rng.randrange(1, 8)
            golds, rankings = [], []
            for _ in range(n_queries):
                gold = rng.choice(pool)
                golds.append(gold)
                depth = rng.randrange(1, 25)
                ranking = rng.sample(pool, depth)
                if rng.random() < 0.3 and gold not in ranking:
                    ranking.append(gold)
                rankings.append(ranking)
            result = compute_metrics(rankings, golds)
            acc1, acc10, mrr = oracle_metrics(rankings, golds)
            assert math.isclose(result.acc_at_1, acc1, abs_tol=1e-15)
            assert math.isclose(result.acc_at_10, acc10, abs_tol=1e-15)
            assert math.isclose(result.mrr, mrr, abs_tol=1e-12)
            assert result.acc_at_1 <= result.acc_at_10
            assert result.acc_at_1 <= result.mrr <= 1.0

    def test_length_mismatch(self):
        with pytest.raises(EvalError):
            compute_metrics([[comp("a")]], [comp("a"), comp("b")])

    def test_accepts_scored_tuples(self):
        golds = [comp("a")]
        rankings = [[(comp("b"), 0.9), (comp("a"), 0.5)]]
        assert compute_metrics(rankings, golds).gold_ranks == (2,)


class TestTermMatch:

    def _inventory(self):
        corpus = Corpus(pairs=(
            pair_of(["x"], comp("add_arc", namespace=("nltk",), args=("head",))),
            pair_of(["x"], comp("tokenize")),
            pair_of(["x"], comp("parse_tree")),
        ))
        return ComponentInventory.from_corpus(corpus)

    def test_figure_fixture(self):
        inventory = self._inventory()
        ranking = term_match_rank(text("add", "arc"), inventory)
        top, score = ranking[0]
        assert top.function_name == "add_arc"
        assert score == 2.0

    def test_disjoint_query_lexicographic(self):
        inventory = self._inventory()
        ranking = term_match_rank(text("zzz", "qqq"), inventory)
        assert all(score == 0.0 for _, score in ranking)
        lins = [z.linearized for z, _ in ranking]
        assert lins == sorted(lins)

    def test_duplicate_query_word_counts_twice(self):
        inventory = self._inventory()
        ranking = term_match_rank(text("arc", "arc"), inventory)
        top, score = ranking[0]
        assert top.function_name == "add_arc"
        assert score == 2.0

    def test_empty_inventory(self):
        with pytest.raises(EvalError):
            term_match_rank(text("a"), ComponentInventory(components=()))


class TestBow:

    def _fixture(self):
        train_corpus = Corpus(pairs=(
            pair_of(["use", "alpha"], comp("alpha")),
            pair_of(["use", "beta"], comp("beta")),
            pair_of(["call", "alpha"], comp("alpha")),
            pair_of(["call", "beta"], comp("beta")),
        ))
        dev_corpus = Corpus(pairs=(
            pair_of(["run", "alpha"], comp("alpha")),
            pair_of(["run", "beta"], comp("beta")),
        ))
        inventory = ComponentInventory.from_corpus(train_corpus)
        return train_corpus, dev_corpus, inventory

    def test_fragment_is_pairs_only(self):
        frag = bow_fragment(text("add", "arc"), comp("add_arc", args=("head",)))
        assert frag
        assert all(name.startswith("wp=") for name in frag)

    def test_zero_weights_lexicographic(self):
        _, _, inventory = self._fixture()
        index = FeatureIndex()
        index.freeze()
        model = BowModel(index=index, weights=np.zeros(1))
        ranking = bow_rank(text("use", "alpha"), inventory, model)
        lins = [z.linearized for z, _ in ranking]
        assert lins == sorted(lins)

    def test_learns_separable_fixture(self):
        train_corpus, dev_corpus, inventory = self._fixture()
        cfg = RerankTrainConfig(pool_size=2, epochs=8)
        model, log = train_bow(train_corpus, dev_corpus, inventory, cfg)
        ranking = bow_rank(text("run", "alpha"), inventory, model)
        assert ranking[0][0].linearized == ("alpha",)
        assert log.best_dev_mrr == 1.0

    def test_score_agrees_with_fragment_dot(self):
        train_corpus, dev_corpus, inventory = self._fixture()
        cfg = RerankTrainConfig(pool_size=2, epochs=2)
        model, _ = train_bow(train_corpus, dev_corpus, inventory, cfg)
        x = text("use", "alpha")
        for z in inventory.components:
            frag = bow_fragment(x, z)
            direct = sum(
                model.weights[model.index.id_for(name)] * value
                for name, value in frag.items()
            )
            assert math.isclose(model.score(x, z), direct, abs_tol=1e-12)

    def test_deterministic(self):
        outputs = []
        for _ in range(2):
            train_corpus, dev_corpus, inventory = self._fixture()
            cfg = RerankTrainConfig(pool_size=2, epochs=3)
            model, _ = train_bow(train_corpus, dev_corpus, inventory, cfg)
            outputs.append(model.weights)
        assert np.array_equal(outputs[0], outputs[1])


def toy_corpus(n=12):
    """Each query names its own gold's terms, so hand-ranking is unambiguous."""
    pairs = []
    for i in range(n):
        pairs.append(
            pair_of(["call", f"fn{i}", f"arg{i}"], comp(f"fn{i}", args=(f"arg{i}",)))
        )
    return Corpus(pairs=tuple(pairs))


class TestRunExperiment:

    def test_term_match_only_row(self):
        corpus = toy_corpus()
        report = run_experiment(corpus, SplitSpec(seed=5), systems=["term_match"])
        assert [row.system for row in report.rows] == ["term_match"]
        # every test query names its gold's tokens and nothing else, so
        # term match retrieves gold at rank 1 for every query
        result = report.rows[0].result
        assert result.acc_at_1 == 1.0
        assert result.mrr == 1.0

    def test_row_order_fixed(self):
        corpus = toy_corpus()
        cfg = RerankTrainConfig(pool_size=4, epochs=1)
        report = run_experiment(
            corpus,
            SplitSpec(seed=5),
            systems=["reranker", "bow", "translation", "term_match"],
            em_iterations=2,
            rerank_cfg=cfg,
            bow_cfg=cfg,
        )
        assert [row.system for row in report.rows] == [
            "bow", "term_match", "translation", "reranker",
        ]

    def test_deterministic_reports(self):
        corpus = toy_corpus()
        cfg = RerankTrainConfig(pool_size=4, epochs=2)
        reports = [
            report_as_dict(
                run_experiment(
                    corpus,
                    SplitSpec(seed=5),
                    systems=["translation", "reranker"],
                    em_iterations=2,
                    rerank_cfg=cfg,
                )
            )
            for _ in range(2)
        ]
        assert reports[0] == reports[1]

    def test_unknown_system_rejected(self):
        with pytest.raises(EvalError):
            run_experiment(toy_corpus(), systems=["oracle"])

    def test_report_files(self, tmp_path):
        corpus = toy_corpus()
        report = run_experiment(corpus, SplitSpec(seed=5), systems=["term_match"])
        out = tmp_path / "report.json"
        save_report_json(report, out)
        loaded = json.loads(out.read_text())
        assert loaded["systems"][0]["system"] == "term_match"
        assert loaded["systems"][0]["acc_at_1"] == 1.0
        table = format_report_table(report)
        lines = table.splitlines()
        assert lines[0].startswith("system")
        assert any(line.startswith("term_match") for line in lines)


class TestEvalResultInvariants:

    def test_acc1_above_acc10_rejected(self):
        with pytest.raises(EvalError):
            EvalResult(acc_at_1=0.9, acc_at_10=0.5, mrr=0.9, gold_ranks=())

    def test_out_of_range_rejected(self):
        with pytest.raises(EvalError):
            EvalResult(acc_at_1=1.2, acc_at_10=1.2, mrr=1.2, gold_ranks=())

    def test_mrr_below_acc1_rejected(self):
        with pytest.raises(EvalError):
            EvalResult(acc_at_1=0.5, acc_at_10=0.6, mrr=0.2, gold_ranks=())
