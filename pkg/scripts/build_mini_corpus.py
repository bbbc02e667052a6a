"""Regenerate the bundled hand-written mini corpus.

Run from the repository root:

    python3 scripts/build_mini_corpus.py

The output lands in src/fassist/data/ and is committed; this script exists
so the fixture can be audited and rebuilt rather than edited by hand.
"""

from pathlib import Path

from fassist.corpus import (
    ClassHierarchy,
    Component,
    Corpus,
    Pair,
    SourceLocation,
    TextSequence,
    save_corpus,
    save_hierarchy,
    tokenize_text,
)

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "fassist" / "data"


def pair(sentence, component, param_descs=None, file="", line=0):
    descs = {
        name: tuple(tokenize_text(text))
        for name, text in (param_descs or {}).items()
    }
    return Pair(
        text=TextSequence(tuple(tokenize_text(sentence))),
        component=component,
        param_descs=descs,
        source=SourceLocation(file=file, line=line),
    )


PAIRS = (
    pair(
        "Adds an arc from the node specified by head_address to the node "
        "specified by mod address.",
        Component(
            "add_arc",
            namespace=("nltk", "parse", "dependencygraph"),
            class_name="DependencyGraph",
            arg_names=("head_address", "mod_address"),
        ),
        param_descs={
            "head_address": "the address of the head node",
            "mod_address": "the address of the modifier node",
        },
        file="nltk/parse/dependencygraph.py",
        line=412,
    ),
    pair(
        "Removes the node with the given address.",
        Component(
            "remove_by_address",
            namespace=("nltk", "parse", "dependencygraph"),
            class_name="DependencyGraph",
            arg_names=("address",),
        ),
        param_descs={"address": "the address of the node to remove"},
        file="nltk/parse/dependencygraph.py",
        line=398,
    ),
    pair(
        "Returns true if the graph contains a node with the given node address.",
        Component(
            "contains_address",
            namespace=("nltk", "parse", "dependencygraph"),
            class_name="DependencyGraph",
            arg_names=("node_address",),
        ),
        file="nltk/parse/dependencygraph.py",
        line=434,
    ),
    pair(
        "The dependency graph in conll format.",
        Component(
            "to_conll",
            namespace=("nltk", "parse", "dependencygraph"),
            class_name="DependencyGraph",
            arg_names=("style",),
        ),
        file="nltk/parse/dependencygraph.py",
        line=520,
    ),
    pair(
        "Train a new hidden markov model tagger using the given labeled and "
        "unlabeled training instances.",
        Component(
            "train",
            namespace=("nltk", "tag", "hmm"),
            class_name="HiddenMarkovModelTagger",
            arg_names=("labeled_sequence",),
        ),
        param_descs={"labeled_sequence": "a sequence of labeled training instances"},
        file="nltk/tag/hmm.py",
        line=148,
    ),
    pair(
        "Tags the sequence with the highest probability state sequence.",
        Component(
            "tag",
            namespace=("nltk", "tag", "hmm"),
            class_name="HiddenMarkovModelTagger",
            arg_names=("unlabeled_sequence",),
        ),
        file="nltk/tag/hmm.py",
        line=219,
    ),
    pair(
        "Return a tokenized copy of text using the recommended word tokenizer.",
        Component(
            "word_tokenize",
            namespace=("nltk", "tokenize"),
            arg_names=("text", "language"),
        ),
        param_descs={"text": "the text to split into words"},
        file="nltk/tokenize/__init__.py",
        line=97,
    ),
    pair(
        "Return a sentence tokenized copy of text.",
        Component(
            "sent_tokenize",
            namespace=("nltk", "tokenize"),
            arg_names=("text", "language"),
        ),
        file="nltk/tokenize/__init__.py",
        line=81,
    ),
    pair(
        "Strip affixes from the token and return the stem.",
        Component(
            "stem",
            namespace=("nltk", "stem", "porter"),
            class_name="PorterStemmer",
            arg_names=("word",),
        ),
        file="nltk/stem/porter.py",
        line=651,
    ),
    pair(
        "Return a list of the n most common elements and their counts.",
        Component(
            "most_common",
            namespace=("nltk", "probability"),
            class_name="FreqDist",
            arg_names=("n",),
        ),
        file="nltk/probability.py",
        line=233,
    ),
    pair(
        "Open a new window containing a graphical diagram of this tree.",
        Component(
            "draw",
            namespace=("nltk", "tree"),
            class_name="Tree",
        ),
        file="nltk/tree.py",
        line=690,
    ),
    pair(
        "Calculate the levenshtein edit distance between two strings.",
        Component(
            "edit_distance",
            namespace=("nltk", "metrics", "distance"),
            arg_names=("s1", "s2"),
        ),
        file="nltk/metrics/distance.py",
        line=85,
    ),
)

HIERARCHY = ClassHierarchy(
    edges=frozenset(
        {
            ("HiddenMarkovModelTagger", "TaggerI"),
            ("PorterStemmer", "StemmerI"),
        }
    ),
    class_descs={
        "DependencyGraph": tuple(
            tokenize_text(
                "A container for the nodes and labelled edges of a dependency structure."
            )
        ),
        "TaggerI": tuple(
            tokenize_text(
                "A processing interface for assigning a tag to each token in a list."
            )
        ),
        "StemmerI": tuple(
            tokenize_text(
                "A processing interface for removing morphological affixes from words."
            )
        ),
        "FreqDist": tuple(
            tokenize_text("A frequency distribution for the outcomes of an experiment.")
        ),
        "Tree": tuple(
            tokenize_text("A hierarchical structure over leaves and subtrees.")
        ),
    },
)


def main() -> None:
    corpus = Corpus(
        pairs=PAIRS,
        hierarchy=HIERARCHY,
        project_name="nltk-mini",
        source_url_template="https://example.org/src/{file}#L{line}",
    )
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, DATA_DIR / "mini_corpus.jsonl")
    save_hierarchy(corpus.hierarchy, DATA_DIR / "mini_hierarchy.jsonl")
    print(f"wrote {len(corpus.pairs)} pairs to {DATA_DIR}")


if __name__ == "__main__":
    main()
