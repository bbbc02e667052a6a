"""Feature extraction for discriminative reranking.

Three sparse feature families over a (query, candidate component) pair:

* word level: query-word x component-term pair indicators, exact matches,
  token overlap, and query words landing in structural zones of the candidate
  (namespace / class / function / argument);
* phrase level: indicators for phrase-table entries (contiguous and
  single-gap) matched on both sides;
* document level: query words paired with the candidate's ancestor classes,
  overlap with ancestor class descriptions, and argument-description hits.

A dense translation log-score feature rides along so the reranker can never
do worse than the translation order. Feature names map to integer ids through
a FeatureIndex; once frozen, unknown names fall into a reserved OOV slot.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .corpus import ClassHierarchy, Component, Corpus, TextSequence, split_identifier
from .translation import LexTable, likelihood

GAP = "<gap>"
OOV_NAME = "<oov>"
TRANS_SCORE = "trans_logp"

ZONES = ("namespace", "class", "function", "argument")


class FeatureError(ValueError):
    pass


class FeatureIndex:
    """Bidirectional feature-name <-> id map with a reserved OOV id 0."""

    def __init__(self):
        self._ids: dict[str, int] = {OOV_NAME: 0}
        self._names: list[str] = [OOV_NAME]
        self._frozen = False

    def __len__(self) -> int:
        return len(self._names)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    def id_for(self, name: str) -> int:
        found = self._ids.get(name)
        if found is not None:
            return found
        if self._frozen:
            return 0
        new_id = len(self._names)
        self._ids[name] = new_id
        self._names.append(name)
        return new_id

    def name_of(self, feature_id: int) -> str:
        return self._names[feature_id]

    @property
    def names(self) -> list[str]:
        return list(self._names)

    @classmethod
    def from_names(cls, names: list[str], frozen: bool = True) -> "FeatureIndex":
        if not names or names[0] != OOV_NAME:
            raise FeatureError("feature name list must start with the OOV slot")
        index = cls()
        for name in names[1:]:
            index.id_for(name)
        index._frozen = frozen
        return index


@dataclass
class FeatureVector:
    """Sparse id -> value map; zero values are never stored."""

    values: dict[int, float]
    _ids: np.ndarray = field(init=False, repr=False)
    _vals: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.values = {i: v for i, v in self.values.items() if v != 0.0}
        self._ids = np.fromiter(self.values.keys(), dtype=np.int64, count=len(self.values))
        self._vals = np.fromiter(self.values.values(), dtype=np.float64, count=len(self.values))

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    @property
    def vals(self) -> np.ndarray:
        return self._vals

    def dot(self, weights: np.ndarray) -> float:
        if len(self._ids) == 0:
            return 0.0
        return float(weights[self._ids] @ self._vals)


def zone_terms(component: Component) -> dict[str, frozenset[str]]:
    """Decomposed term sets per structural zone of the component."""

    def terms_of(identifiers) -> frozenset[str]:
        out: set[str] = set()
        for ident in identifiers:
            out.add(ident.lower())
            out.update(split_identifier(ident))
        return frozenset(out)

    return {
        "namespace": terms_of(component.namespace),
        "class": terms_of([component.class_name] if component.class_name else []),
        "function": terms_of([component.function_name]),
        "argument": terms_of(component.arg_names),
    }


def word_features(x: TextSequence, z: Component) -> dict[str, float]:
    """Word-level fragment: pair indicators, exact matches, overlap, zones."""
    frag: dict[str, float] = {}
    words = sorted(set(x.tokens))
    terms = sorted(set(z.linearized))
    for w in words:
        for u in terms:
            frag[f"wp={w}|{u}"] = 1.0
    overlap = set(words) & set(terms)
    for w in sorted(overlap):
        frag[f"match={w}"] = 1.0
    if overlap:
        frag["overlap"] = float(len(overlap))
        frag["overlap_norm"] = len(overlap) / len(x)
    zones = zone_terms(z)
    for w in words:
        for zone in ZONES:
            if w in zones[zone]:
                frag[f"zone={w}|{zone}"] = 1.0
    return frag


# ---------------------------------------------------------------------------
# phrase table
# ---------------------------------------------------------------------------

Phrase = tuple[str, ...]
GappedSide = tuple[Phrase, Phrase]  # tokens before the gap, tokens after


@dataclass(frozen=True)
class PhraseTable:
    """Counted phrase pairs extracted from symmetrized alignments.

    phrases maps a contiguous text-side phrase to component-side phrases;
    gapped maps a single-gap text-side pattern to single-gap component-side
    patterns. All phrases respect max_len per side.
    """

    max_len: int
    phrases: dict[Phrase, dict[Phrase, int]]
    gapped: dict[GappedSide, dict[GappedSide, int]]

    def __len__(self) -> int:
        return (sum(len(row) for row in self.phrases.values())
                + sum(len(row) for row in self.gapped.values()))


def _consistent_boxes(n_text: int, n_comp: int, links, max_len: int):
    """All (j1, j2, i1, i2) boxes consistent with the links, lengths <= max_len.

    A box is consistent when it holds at least one link and no link crosses
    its boundary in either direction.
    """
    link_list = sorted(links)
    if not link_list:
        return
    row_range: dict[int, tuple[int, int]] = {}
    col_range: dict[int, tuple[int, int]] = {}
    for j, i in link_list:
        lo, hi = row_range.get(j, (i, i))
        row_range[j] = (min(lo, i), max(hi, i))
        lo, hi = col_range.get(i, (j, j))
        col_range[i] = (min(lo, j), max(hi, j))
    for j1 in range(n_text):
        for j2 in range(j1, min(j1 + max_len, n_text)):
            spans = [row_range[j] for j in range(j1, j2 + 1) if j in row_range]
            if not spans:
                continue
            imin = min(lo for lo, _ in spans)
            imax = max(hi for _, hi in spans)
            if imax - imin + 1 > max_len:
                continue
            # all links in the column band must stay inside the text span
            if any(
                not (j1 <= col_range[i][0] and col_range[i][1] <= j2)
                for i in range(imin, imax + 1) if i in col_range
            ):
                continue
            # grow over unaligned columns on both sides
            lo1 = imin
            while lo1 > 0 and (imin - lo1) < max_len - (imax - imin) and (lo1 - 1) not in col_range:
                lo1 -= 1
            hi2 = imax
            while hi2 < n_comp - 1 and (hi2 - imax) < max_len - (imax - imin) and (hi2 + 1) not in col_range:
                hi2 += 1
            for i1 in range(lo1, imin + 1):
                for i2 in range(imax, hi2 + 1):
                    if i2 - i1 + 1 <= max_len:
                        yield (j1, j2, i1, i2)


def build_phrase_table(corpus: Corpus, sym_alignments, max_len: int = 3) -> PhraseTable:
    """Extract contiguous and single-gap phrase pairs from aligned pairs.

    sym_alignments holds one 0-based link set per corpus pair, as produced
    by symmetrize. Gapped pairs replace one strictly smaller consistent
    sub-box with a gap on both sides, keeping at least one terminal per side.
    """
    if len(sym_alignments) != len(corpus.pairs):
        raise FeatureError("need one alignment per corpus pair")
    phrases: dict[Phrase, dict[Phrase, int]] = defaultdict(lambda: defaultdict(int))
    gapped: dict[GappedSide, dict[GappedSide, int]] = defaultdict(lambda: defaultdict(int))
    for pair, links in zip(corpus.pairs, sym_alignments):
        text = pair.text.tokens
        terms = pair.component.linearized
        boxes = sorted(_consistent_boxes(len(text), len(terms), links, max_len))
        for j1, j2, i1, i2 in boxes:
            phrases[text[j1:j2 + 1]][terms[i1:i2 + 1]] += 1
        for outer in boxes:
            oj1, oj2, oi1, oi2 = outer
            for inner in boxes:
                sj1, sj2, si1, si2 = inner
                if inner == outer:
                    continue
                if not (oj1 <= sj1 and sj2 <= oj2 and oi1 <= si1 and si2 <= oi2):
                    continue
                t_side = (text[oj1:sj1], text[sj2 + 1:oj2 + 1])
                c_side = (terms[oi1:si1], terms[si2 + 1:oi2 + 1])
                if (len(t_side[0]) + len(t_side[1]) == 0
                        or len(c_side[0]) + len(c_side[1]) == 0):
                    continue
                gapped[t_side][c_side] += 1
    return PhraseTable(
        max_len=max_len,
        phrases={k: dict(v) for k, v in phrases.items()},
        gapped={k: dict(v) for k, v in gapped.items()},
    )


def _contains_contiguous(haystack: tuple[str, ...], needle: Phrase) -> bool:
    n = len(needle)
    return any(haystack[s:s + n] == needle for s in range(len(haystack) - n + 1))


def _contains_gapped(haystack: tuple[str, ...], side: GappedSide, max_gap: int) -> bool:
    pre, post = side
    np_, nq = len(pre), len(post)
    for s in range(len(haystack) - np_ + 1):
        if haystack[s:s + np_] != pre:
            continue
        for gap in range(1, max_gap + 1):
            t = s + np_ + gap
            if t + nq > len(haystack):
                break
            if haystack[t:t + nq] == post:
                return True
    return False


def _phrase_name(side) -> str:
    if isinstance(side[0], tuple):  # gapped
        pre, post = side
        return " ".join(pre + (GAP,) + post)
    return " ".join(side)


def _query_phrase_matches(tokens: tuple[str, ...], table: PhraseTable):
    """Table rows whose text side occurs in the query.

    Enumerates query-side spans and single-gap patterns and probes the table
    dicts, so cost scales with the query, not the table.
    """
    contiguous: list[tuple[Phrase, dict[Phrase, int]]] = []
    seen: set[Phrase] = set()
    n = len(tokens)
    for length in range(1, table.max_len + 1):
        for s in range(n - length + 1):
            tp = tokens[s:s + length]
            if tp in seen:
                continue
            seen.add(tp)
            row = table.phrases.get(tp)
            if row:
                contiguous.append((tp, row))
    gapped: list[tuple[GappedSide, dict[GappedSide, int]]] = []
    seen_gapped: set[GappedSide] = set()
    for a in range(n + 1):
        for b in range(a, min(a + table.max_len, n) + 1):
            pre = tokens[a:b]
            for c in range(b + 1, min(b + table.max_len, n) + 1):
                for d in range(c, min(c + table.max_len, n) + 1):
                    post = tokens[c:d]
                    if not pre and not post:
                        continue
                    side = (pre, post)
                    if side in seen_gapped:
                        continue
                    seen_gapped.add(side)
                    row = table.gapped.get(side)
                    if row:
                        gapped.append((side, row))
    return contiguous, gapped


def phrase_features(
    x: TextSequence,
    z: Component,
    table: PhraseTable,
    _matches=None,
) -> dict[str, float]:
    """Indicators for phrase-table entries matched on both sides."""
    frag: dict[str, float] = {}
    if _matches is None:
        _matches = _query_phrase_matches(x.tokens, table)
    contiguous, gapped = _matches
    terms = z.linearized
    for tp, row in contiguous:
        for cp in row:
            if _contains_contiguous(terms, cp):
                frag[f"phr={_phrase_name(tp)}|{_phrase_name(cp)}"] = 1.0
    for t_side, row in gapped:
        for c_side in row:
            if _contains_gapped(terms, c_side, table.max_len):
                frag[f"hphr={_phrase_name(t_side)}|{_phrase_name(c_side)}"] = 1.0
    return frag


def doc_features(
    x: TextSequence,
    z: Component,
    hierarchy: ClassHierarchy,
    param_descs: dict[str, tuple[str, ...]],
) -> dict[str, float]:
    """Document-level fragment: ancestor classes, their descriptions, and
    argument-description overlap. A class missing from the hierarchy simply
    contributes nothing."""
    frag: dict[str, float] = {}
    words = sorted(set(x.tokens))
    cls = z.class_name
    if cls is not None and cls in hierarchy.classes:
        ancestors = hierarchy.ancestors(cls, include_self=True)
        desc_hits = 0
        for anc in ancestors:
            for w in words:
                frag[f"cls={w}|{anc}"] = 1.0
            desc = hierarchy.class_descs.get(anc)
            if desc:
                desc_hits += len(set(words) & set(desc))
        if desc_hits:
            frag["cls_desc_overlap"] = float(desc_hits)
    for arg in z.arg_names:
        desc = param_descs.get(arg)
        if desc and set(words) & set(desc):
            frag[f"pdesc={arg}"] = 1.0
    return frag


class Featurizer:
    """Bundles everything extraction needs and owns the feature index.

    param_desc_lookup maps a component linearization to the stored argument
    descriptions of its first corpus occurrence.
    """

    def __init__(
        self,
        lex_table: LexTable,
        phrase_table: PhraseTable,
        hierarchy: ClassHierarchy,
        param_desc_lookup: dict[tuple[str, ...], dict[str, tuple[str, ...]]],
        index: FeatureIndex | None = None,
        length_normalized: bool = True,
    ):
        self.lex_table = lex_table
        self.phrase_table = phrase_table
        self.hierarchy = hierarchy
        self.param_desc_lookup = param_desc_lookup
        self.index = index if index is not None else FeatureIndex()
        self.length_normalized = length_normalized
        self._match_cache: dict[tuple[str, ...], tuple] = {}

    @classmethod
    def param_lookup_from_corpus(cls, corpus: Corpus) -> dict:
        lookup: dict[tuple[str, ...], dict[str, tuple[str, ...]]] = {}
        for pair in corpus.pairs:
            key = pair.component.linearized
            if key not in lookup and pair.param_descs:
                lookup[key] = dict(pair.param_descs)
        return lookup

    def freeze(self) -> None:
        self.index.freeze()

    def _matches_for(self, tokens: tuple[str, ...]):
        found = self._match_cache.get(tokens)
        if found is None:
            found = _query_phrase_matches(tokens, self.phrase_table)
            if len(self._match_cache) > 4096:
                self._match_cache.clear()
            self._match_cache[tokens] = found
        return found

    def extract(self, x: TextSequence, z: Component) -> FeatureVector:
        frag: dict[str, float] = {}
        frag.update(word_features(x, z))
        frag.update(phrase_features(
            x, z, self.phrase_table, _matches=self._matches_for(x.tokens)))
        frag.update(doc_features(
            x, z, self.hierarchy, self.param_desc_lookup.get(z.linearized, {})))
        frag[TRANS_SCORE] = likelihood(
            x, z, self.lex_table, length_normalized=self.length_normalized)
        values: dict[int, float] = {}
        for name in sorted(frag):
            fid = self.index.id_for(name)
            if fid == 0:
                continue  # unknown under a frozen index
            values[fid] = frag[name]
        return FeatureVector(values)

    def extract_pool(self, x: TextSequence, components) -> list[FeatureVector]:
        return [self.extract(x, comp) for comp in components]
