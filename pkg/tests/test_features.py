import itertools
import random

import pytest

from fassist.corpus import ClassHierarchy, Component, Corpus, Pair, TextSequence
from fassist.features import (
    GAP,
    TRANS_SCORE,
    FeatureIndex,
    FeatureVector,
    Featurizer,
    PhraseTable,
    build_phrase_table,
    doc_features,
    phrase_features,
    word_features,
    zone_terms,
)
from fassist.translation import NULL_TERM, TEXT_GIVEN_COMPONENT, LexTable, train_model1


def comp(fn, namespace=(), class_name=None, args=()):
    return Component(function_name=fn, namespace=tuple(namespace),
                     class_name=class_name, arg_names=tuple(args))


def text(*tokens):
    return TextSequence(tuple(tokens))


def pair_for(words, component):
    return Pair(text=TextSequence(tuple(words)), component=component)


# ---------------------------------------------------------------------------
# oracle: the textbook consistency predicate, checked pointwise
# ---------------------------------------------------------------------------

def consistent(box, links):
    j1, j2, i1, i2 = box
    inside = [(j, i) for j, i in links if j1 <= j <= j2 and i1 <= i <= i2]
    if not inside:
        return False
    for j, i in links:
        if j1 <= j <= j2 and not (i1 <= i <= i2):
            return False
        if i1 <= i <= i2 and not (j1 <= j <= j2):
            return False
    return True


def enumerate_consistent(n_text, n_comp, links, max_len):
    out = set()
    for j1 in range(n_text):
        for j2 in range(j1, min(j1 + max_len, n_text)):
            for i1 in range(n_comp):
                for i2 in range(i1, min(i1 + max_len, n_comp)):
                    if consistent((j1, j2, i1, i2), links):
                        out.add((j1, j2, i1, i2))
    return out


class TestPhraseExtraction:

    def test_single_link(self):
        corpus = Corpus(pairs=(pair_for(["removes"], comp("remove")),))
        table = build_phrase_table(corpus, [frozenset({(0, 0)})], max_len=2)
        assert table.phrases == {("removes",): {("remove",): 1}}
        assert table.gapped == {}

    def test_diagonal_two_by_two(self):
        corpus = Corpus(pairs=(pair_for(["adds", "arc"], comp("add", args=("arc",))),))
        links = frozenset({(0, 0), (1, 1)})
        table = build_phrase_table(corpus, [links], max_len=2)
        flat = {(tp, cp) for tp, row in table.phrases.items() for cp in row}
        assert flat == {
            (("adds",), ("add",)),
            (("arc",), ("arc",)),
            (("adds", "arc"), ("add", "arc")),
        }

    def test_no_links_no_phrases(self):
        corpus = Corpus(pairs=(pair_for(["stray", "words"], comp("other")),))
        table = build_phrase_table(corpus, [frozenset()], max_len=3)
        assert len(table) == 0

    def test_matches_enumeration_oracle(self):
        rng = random.Random(33)
        vocab = ["t0", "t1", "t2", "t3", "t4", "t5"]
        for _ in range(60):
            n_text = rng.randrange(1, 6)
            n_comp = rng.randrange(1, 6)
            words = [rng.choice(vocab) for _ in range(n_text)]
            terms = [f"u{i}" for i in range(n_comp)]
            links = frozenset(
                (rng.randrange(n_text), rng.randrange(n_comp))
                for _ in range(rng.randrange(0, n_text + 2))
            )
            corpus = Corpus(pairs=(
                pair_for(words, comp(terms[0], args=tuple(terms[1:]))),
            ))
            got = build_phrase_table(corpus, [links], max_len=3)
            expected = enumerate_consistent(n_text, n_comp, links, max_len=3)
            got_flat = []
            for tp, row in got.phrases.items():
                for cp, count in row.items():
                    got_flat.extend([(tp, cp)] * count)
            exp_flat = [
                (tuple(words[j1:j2 + 1]), tuple(terms[i1:i2 + 1]))
                for j1, j2, i1, i2 in expected
            ]
            assert sorted(got_flat) == sorted(exp_flat)

    def test_counts_accumulate(self):
        pair = pair_for(["adds", "arc"], comp("add", args=("arc",)))
        corpus = Corpus(pairs=(pair, pair))
        links = frozenset({(0, 0), (1, 1)})
        table = build_phrase_table(corpus, [links, links], max_len=2)
        assert table.phrases[("adds", "arc")][("add", "arc")] == 2

    def test_gapped_extraction(self):
        # outer box covers everything; the middle link is a consistent sub-box,
        # so replacing it leaves one gap per side with terminals around it
        corpus = Corpus(pairs=(
            pair_for(["adds", "an", "arc"], comp("add", args=("an", "arc"))),
        ))
        links = frozenset({(0, 0), (1, 1), (2, 2)})
        table = build_phrase_table(corpus, [links], max_len=3)
        assert (("adds",), ("arc",)) in table.gapped
        row = table.gapped[(("adds",), ("arc",))]
        assert row == {(("add",), ("arc",)): 1}
        # gap at the edge keeps at least one terminal per side
        assert ((), ("an", "arc")) in table.gapped

    def test_alignment_count_mismatch(self):
        corpus = Corpus(pairs=(pair_for(["a"], comp("b")),))
        with pytest.raises(ValueError):
            build_phrase_table(corpus, [], max_len=3)


class TestWordFeatures:

    def test_exact_match_and_overlap(self):
        frag = word_features(text("add", "arc"), comp("add_arc", args=("head", "mod")))
        assert frag["match=add"] == 1.0
        assert frag["match=arc"] == 1.0
        assert frag["overlap"] == 2.0
        assert frag["overlap_norm"] == 1.0
        assert frag["wp=add|add_arc"] == 1.0
        assert frag["wp=arc|head"] == 1.0

    def test_disjoint_has_no_overlap_keys(self):
        frag = word_features(text("delete", "node"), comp("train", args=("model",)))
        assert "overlap" not in frag
        assert "overlap_norm" not in frag
        assert not any(name.startswith("match=") for name in frag)
        assert frag["wp=delete|train"] == 1.0

    def test_zone_indicators(self):
        component = comp("trainHMM", namespace=("nltk", "tag"), class_name="Trainer",
                         args=("corpus",))
        frag = word_features(text("train", "a", "tagger", "corpus"), component)
        assert frag["zone=train|function"] == 1.0
        assert frag["zone=corpus|argument"] == 1.0
        assert "zone=a|namespace" not in frag

    def test_zone_terms_decomposed(self):
        zones = zone_terms(comp("add_arc", class_name="DependencyGraph"))
        assert zones["function"] == frozenset({"add_arc", "add", "arc"})
        assert zones["class"] == frozenset({"dependencygraph", "dependency", "graph"})
        assert zones["argument"] == frozenset()


class TestPhraseFeatures:

    def _table(self):
        return PhraseTable(
            max_len=3,
            phrases={("adds", "an", "arc"): {("add_arc",): 2, ("add", "arc"): 1}},
            gapped={(("removes",), ("node",)): {(("remove",), ("address",)): 1}},
        )

    def test_contiguous_hit(self):
        frag = phrase_features(
            text("adds", "an", "arc", "quickly"),
            comp("add_arc", args=("head_address",)),
            self._table(),
        )
        assert frag["phr=adds an arc|add_arc"] == 1.0
        # the other component side is not contained in this linearization as
        # a contiguous run ("add", "arc") -- it is, actually: add_arc, add, arc
        assert frag["phr=adds an arc|add arc"] == 1.0

    def test_no_text_side_no_features(self):
        frag = phrase_features(text("deletes", "an", "arc"), comp("add_arc"), self._table())
        assert not any(name.startswith("phr=") for name in frag)

    def test_gapped_both_sides(self):
        frag = phrase_features(
            text("removes", "the", "node"),
            comp("remove", args=("the", "address")),
            self._table(),
        )
        assert frag[f"hphr=removes {GAP} node|remove {GAP} address"] == 1.0

    def test_gapped_respects_gap_bound(self):
        # four intervening tokens exceed the max_len=3 gap bound
        frag = phrase_features(
            text("removes", "a", "b", "c", "d", "node"),
            comp("remove", args=("the", "address")),
            self._table(),
        )
        assert not any(name.startswith("hphr=") for name in frag)

    def test_empty_table(self):
        empty = PhraseTable(max_len=3, phrases={}, gapped={})
        assert phrase_features(text("any", "words"), comp("fn"), empty) == {}


class TestDocFeatures:

    def _hierarchy(self):
        return ClassHierarchy(
            edges=frozenset({("DependencyGraph", "GraphBase"), ("GraphBase", "Base")}),
            class_descs={
                "DependencyGraph": ("a", "container", "for", "a", "dependency", "structure"),
                "Base": ("shared", "behavior"),
            },
        )

    def test_ancestor_indicators_and_desc_overlap(self):
        frag = doc_features(
            text("dependency", "structure"),
            comp("add_arc", class_name="DependencyGraph"),
            self._hierarchy(),
            {},
        )
        assert frag["cls=dependency|DependencyGraph"] == 1.0
        assert frag["cls=dependency|GraphBase"] == 1.0
        assert frag["cls=dependency|Base"] == 1.0
        assert frag["cls_desc_overlap"] == 2.0

    def test_param_desc_overlap(self):
        frag = doc_features(
            text("remove", "the", "node"),
            comp("remove_by_address", args=("address",)),
            ClassHierarchy(),
            {"address": ("the", "address", "of", "the", "node")},
        )
        assert frag["pdesc=address"] == 1.0

    def test_empty_hierarchy_only_param_features(self):
        frag = doc_features(
            text("remove", "node"),
            comp("rm", class_name=None, args=("address",)),
            ClassHierarchy(),
            {"address": ("node", "address")},
        )
        assert list(frag) == ["pdesc=address"]

    def test_unknown_class_contributes_nothing(self):
        frag = doc_features(
            text("some", "words"),
            comp("fn", class_name="Mystery"),
            self._hierarchy(),
            {},
        )
        assert not any(name.startswith("cls") for name in frag)

    def test_no_param_hit_no_feature(self):
        frag = doc_features(
            text("other", "things"),
            comp("fn", args=("address",)),
            ClassHierarchy(),
            {"address": ("node", "location")},
        )
        assert "pdesc=address" not in frag


class TestFeaturizer:

    def _featurizer(self, frozen=False):
        corpus = Corpus(pairs=(
            pair_for(["adds", "an", "arc"], comp("add_arc", class_name="DependencyGraph",
                                                 args=("head_address",))),
            pair_for(["removes", "the", "node"], comp("remove_by_address",
                                                      class_name="DependencyGraph",
                                                      args=("address",))),
        ), hierarchy=ClassHierarchy(
            classes=frozenset({"DependencyGraph"}),
            class_descs={"DependencyGraph": ("dependency", "structure")},
        ))
        lex, _ = train_model1(corpus, iterations=3)
        table = PhraseTable(max_len=3, phrases={}, gapped={})
        featurizer = Featurizer(
            lex_table=lex,
            phrase_table=table,
            hierarchy=corpus.hierarchy,
            param_desc_lookup=Featurizer.param_lookup_from_corpus(corpus),
            length_normalized=True,
        )
        if frozen:
            featurizer.freeze()
        return corpus, featurizer

    def test_translation_score_present_once(self):
        corpus, fz = self._featurizer()
        fv = fz.extract(corpus.pairs[0].text, corpus.pairs[0].component)
        trans_id = fz.index.id_for(TRANS_SCORE)
        assert trans_id in fv.values
        assert fv.values[trans_id] < 0.0

    def test_deterministic_extraction(self):
        corpus, fz = self._featurizer()
        a = fz.extract(corpus.pairs[0].text, corpus.pairs[1].component)
        b = fz.extract(corpus.pairs[0].text, corpus.pairs[1].component)
        assert a.values == b.values

    def test_frozen_index_never_grows(self):
        corpus, fz = self._featurizer()
        fz.extract(corpus.pairs[0].text, corpus.pairs[0].component)
        fz.freeze()
        size = len(fz.index)
        fz.extract(text("totally", "novel", "words"), comp("unseen_fn", args=("argx",)))
        assert len(fz.index) == size

    def test_oov_maps_to_zero(self):
        index = FeatureIndex()
        index.id_for("known")
        index.freeze()
        assert index.id_for("never_seen") == 0
        assert index.id_for("known") == 1

    def test_feature_vector_drops_zeros(self):
        fv = FeatureVector({1: 0.0, 2: 3.0})
        assert fv.values == {2: 3.0}

    def test_index_round_trip(self):
        index = FeatureIndex()
        index.id_for("a")
        index.id_for("b")
        rebuilt = FeatureIndex.from_names(index.names)
        assert rebuilt.names == index.names
        assert rebuilt.frozen
