"""Lexical translation model between descriptions and component terms.

Model 1 semantics throughout: a description word is generated by exactly one
component term (or NULL), every alignment is equally likely a priori, so the
probability of text x given component z factors into per-word sums

    p(x | z) = (|z| + 1)^{-|x|} * prod_j sum_i p_t(w_j | u_i)

with u_0 = NULL. Tables are trained by EM and stay sparse: only co-occurring
(word, term) entries ever hold mass, and scoring floors a word's summed
probability when nothing matched.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

from .corpus import Component, Corpus, TextSequence

TEXT_GIVEN_COMPONENT = "text_given_component"
COMPONENT_GIVEN_TEXT = "component_given_text"
NULL_TERM = "<null>"
FLOOR_PROB = 1e-40


class TranslationError(ValueError):
    pass


@dataclass(frozen=True)
class LexTable:
    """Sparse conditional table: probs[condition][emitted] = probability.

    direction text_given_component conditions on component terms (plus NULL)
    and emits text words; component_given_text is the reverse.
    """

    direction: str
    probs: dict[str, dict[str, float]]
    text_vocab: frozenset[str]
    comp_vocab: frozenset[str]

    def __post_init__(self):
        if self.direction not in (TEXT_GIVEN_COMPONENT, COMPONENT_GIVEN_TEXT):
            raise TranslationError(f"unknown direction: {self.direction}")

    def prob(self, emitted: str, condition: str) -> float:
        return self.probs.get(condition, {}).get(emitted, 0.0)

    def check_normalized(self, tol: float = 1e-9) -> None:
        for condition, row in self.probs.items():
            total = math.fsum(row.values())
            if abs(total - 1.0) > tol:
                raise TranslationError(
                    f"row {condition!r} sums to {total}, outside 1 +/- {tol}"
                )
            for emitted, p in row.items():
                if not (0.0 < p <= 1.0):
                    raise TranslationError(f"p({emitted!r}|{condition!r}) = {p} out of (0, 1]")


@dataclass(frozen=True)
class TrainLog:
    """Corpus log-likelihood after each EM iteration."""

    log_likelihoods: tuple[float, ...]


@dataclass(frozen=True)
class Alignment:
    """Per-position links (j, i); i = 0 denotes NULL, real positions are 1-based."""

    links: tuple[tuple[int, int], ...]
    text_len: int
    comp_len: int

    def __post_init__(self):
        rows = [j for j, _ in self.links]
        if sorted(rows) != list(range(self.text_len)):
            raise TranslationError("alignment must link each text position exactly once")
        for _, i in self.links:
            if not (0 <= i <= self.comp_len):
                raise TranslationError(f"alignment column {i} out of range")


def _sides(pair, direction):
    x = list(pair.text.tokens)
    z = list(pair.component.linearized)
    if direction == TEXT_GIVEN_COMPONENT:
        return z, x  # condition on terms, emit words
    return x, z


def train_model1(
    corpus: Corpus,
    direction: str = TEXT_GIVEN_COMPONENT,
    iterations: int = 10,
    use_null: bool = True,
) -> tuple[LexTable, TrainLog]:
    """EM training of the lexical table in the given direction.

    Initialization is uniform over co-occurring emissions per condition.
    The log of corpus log-likelihood (NULL term and length constant included)
    is evaluated with the freshly updated table after every iteration.
    """
    if direction not in (TEXT_GIVEN_COMPONENT, COMPONENT_GIVEN_TEXT):
        raise TranslationError(f"unknown direction: {direction}")
    if not corpus.pairs:
        raise TranslationError("cannot train on an empty corpus")
    if iterations < 1:
        raise TranslationError("iterations must be >= 1")

    examples = [_sides(pair, direction) for pair in corpus.pairs]

    cooc: dict[str, dict[str, None]] = defaultdict(dict)
    for conditions, emissions in examples:
        for u in conditions + ([NULL_TERM] if use_null else []):
            for w in emissions:
                cooc[u][w] = None
    probs: dict[str, dict[str, float]] = {
        u: {w: 1.0 / len(row) for w in row} for u, row in cooc.items()
    }

    def corpus_ll() -> float:
        total = 0.0
        for conditions, emissions in examples:
            rows = [probs.get(u, {}) for u in conditions]
            if use_null:
                rows.append(probs.get(NULL_TERM, {}))
            denom_positions = len(conditions) + (1 if use_null else 0)
            for w in emissions:
                total += math.log(sum(row.get(w, 0.0) for row in rows))
            total -= len(emissions) * math.log(denom_positions)
        return total

    history = []
    for _ in range(iterations):
        counts: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        totals: dict[str, float] = defaultdict(float)
        for conditions, emissions in examples:
            slots = conditions + ([NULL_TERM] if use_null else [])
            rows = [probs[u] for u in slots]
            for w in emissions:
                denom = sum(row[w] for row in rows)
                for u, row in zip(slots, rows):
                    frac = row[w] / denom
                    counts[u][w] += frac
                    totals[u] += frac
        probs = {
            u: {w: c / totals[u] for w, c in row.items()}
            for u, row in counts.items()
        }
        history.append(corpus_ll())

    if direction == TEXT_GIVEN_COMPONENT:
        text_vocab = frozenset(w for _, em in examples for w in em)
        comp_vocab = frozenset(u for cond, _ in examples for u in cond)
    else:
        text_vocab = frozenset(u for cond, _ in examples for u in cond)
        comp_vocab = frozenset(w for _, em in examples for w in em)

    table = LexTable(
        direction=direction,
        probs=probs,
        text_vocab=text_vocab,
        comp_vocab=comp_vocab,
    )
    return table, TrainLog(tuple(history))


def likelihood(
    x: TextSequence,
    z: Component,
    table: LexTable,
    length_normalized: bool = True,
    floor: float = FLOOR_PROB,
) -> float:
    """Log p(x | z) under the table.

    A word whose summed probability over NULL and all terms of z is zero
    contributes log(floor) instead, so fully unseen queries score at the
    minimum for their lengths rather than -inf.
    """
    if table.direction != TEXT_GIVEN_COMPONENT:
        raise TranslationError("likelihood needs a text_given_component table")
    if len(x) == 0:
        raise TranslationError("cannot score an empty text")
    probs = table.probs
    rows = [probs[u] for u in z.linearized if u in probs]
    null_row = probs.get(NULL_TERM, {})
    total = 0.0
    for w in x.tokens:
        inner = null_row.get(w, 0.0)
        for row in rows:
            inner += row.get(w, 0.0)
        total += math.log(inner) if inner > 0.0 else math.log(floor)
    if length_normalized:
        total -= len(x) * math.log(len(z.linearized) + 1)
    return total


def rank_components(
    x: TextSequence,
    inventory,
    table: LexTable,
    k: int,
    length_normalized: bool = True,
    floor: float = FLOOR_PROB,
) -> list[tuple[Component, float]]:
    """Top-k components by likelihood, ties broken by linearization order.

    Does exactly one likelihood evaluation per inventory element.
    """
    components = list(inventory)
    if not components:
        raise TranslationError("inventory is empty")
    if k < 1:
        raise TranslationError("k must be >= 1")
    scored = [
        (likelihood(x, comp, table, length_normalized=length_normalized, floor=floor), comp)
        for comp in components
    ]
    scored.sort(key=lambda item: (-item[0], item[1].linearized))
    return [(comp, score) for score, comp in scored[:k]]


def viterbi_align(x: TextSequence, z: Component, table: LexTable) -> Alignment:
    """Hard alignment: each emitted token goes to its argmax slot.

    With a text_given_component table the rows are text positions; with the
    reverse table the rows are component positions aligned over text tokens.
    Ties resolve to NULL and then to the smaller position.
    """
    if len(x) == 0:
        raise TranslationError("cannot align an empty text")
    if table.direction == TEXT_GIVEN_COMPONENT:
        emitted, slots = list(x.tokens), list(z.linearized)
    else:
        emitted, slots = list(z.linearized), list(x.tokens)
    probs = table.probs
    null_row = probs.get(NULL_TERM, {})
    links = []
    for j, w in enumerate(emitted):
        best_i, best_p = 0, null_row.get(w, 0.0)
        for pos, u in enumerate(slots, start=1):
            p = probs.get(u, {}).get(w, 0.0)
            if p > best_p:
                best_i, best_p = pos, p
        links.append((j, best_i))
    return Alignment(links=tuple(links), text_len=len(emitted), comp_len=len(slots))


def symmetrize(forward: Alignment, reverse: Alignment) -> frozenset[tuple[int, int]]:
    """Combine both alignment directions with intersection plus grow-diag.

    Returns 0-based (text position, component position) links. NULL links are
    dropped first. Growth scans union candidates in ascending (j, i) order and
    admits a candidate adjacent (within one in each coordinate) to a current
    link whenever its row or column is still uncovered, repeating to fixpoint.
    """
    if forward.text_len != reverse.comp_len or forward.comp_len != reverse.text_len:
        raise TranslationError("alignments cover differently sized pairs")
    fwd = {(j, i - 1) for j, i in forward.links if i > 0}
    rev = {(i - 1, j) for j, i in reverse.links if i > 0}  # transpose to (text, comp)
    current = fwd & rev
    union = fwd | rev
    rows = {j for j, _ in current}
    cols = {i for _, i in current}
    grew = True
    while grew:
        grew = False
        for j, i in sorted(union - current):
            if j in rows and i in cols:
                continue
            adjacent = any(
                (j + dj, i + di) in current
                for dj in (-1, 0, 1) for di in (-1, 0, 1)
                if (dj, di) != (0, 0)
            )
            if adjacent:
                current.add((j, i))
                rows.add(j)
                cols.add(i)
                grew = True
    return frozenset(current)


def symmetrized_alignments(corpus, forward: LexTable, reverse: LexTable) -> list:
    """Hard-align every pair in both directions and symmetrize, in order."""
    out = []
    for pair in corpus.pairs:
        fwd = viterbi_align(pair.text, pair.component, forward)
        rev = viterbi_align(pair.text, pair.component, reverse)
        out.append(symmetrize(fwd, rev))
    return out
