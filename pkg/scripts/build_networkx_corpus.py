"""Build the bundled networkx corpus shipped in src/fassist/data/.

Mines the installed networkx package with the extractor, then drops pairs
that live under test packages: test helpers carry sprawling machine-made
names that crowd out the library API surface. Everything else is kept
whole. Subsampling a large project is tempting for speed but harmful for
quality: a held-out function's lexical neighbours (the sibling functions
sharing its name subtokens) are what the translation model generalizes
from, and random sampling evicts most of them. The full class hierarchy is
kept; a hierarchy may always be a superset of the classes the pairs
mention.

Rerunning this script against the same networkx version reproduces the
bundled files byte for byte.
"""

import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import networkx

from fassist import load_corpus, save_corpus
from fassist_extractor import extract_repo

MIN_PAIRS = 300
DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "fassist" / "data"


def main() -> int:
    source_root = Path(networkx.__file__).parent
    version = networkx.__version__
    template = (
        "https://github.com/networkx/networkx/blob/networkx-"
        + version + "/{file}#L{line}"
    )
    with tempfile.TemporaryDirectory() as scratch:
        corpus_path = Path(scratch) / "corpus.jsonl"
        hierarchy_path = Path(scratch) / "hierarchy.jsonl"
        report = extract_repo(
            source_root,
            corpus_path,
            hierarchy_path,
            project_name="networkx",
            source_url_template=template,
        )
        print(
            f"networkx {version}: scanned {report.files_scanned} files, "
            f"{report.functions_seen} functions seen, "
            f"{report.pairs_emitted} pairs, "
            f"{len(report.parse_failures)} parse failures"
        )
        corpus = load_corpus(corpus_path, hierarchy_path)

    library_pairs = tuple(
        pair
        for pair in corpus.pairs
        if "tests" not in pair.component.namespace
        and "test" not in pair.component.namespace
    )
    print(f"{len(library_pairs)} pairs outside test packages")
    if len(library_pairs) < MIN_PAIRS:
        print(f"expected at least {MIN_PAIRS} pairs, got {len(library_pairs)}")
        return 1
    bundled = replace(corpus, pairs=library_pairs)

    DATA_DIR.mkdir(parents=True, exist_ok=True)
    out_corpus = DATA_DIR / "networkx_corpus.jsonl"
    out_hierarchy = DATA_DIR / "networkx_hierarchy.jsonl"
    save_corpus(bundled, out_corpus, out_hierarchy)
    print(f"wrote {len(bundled.pairs)} pairs to {out_corpus}")
    print(f"wrote hierarchy ({len(corpus.hierarchy.classes)} classes) to {out_hierarchy}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
