"""Versioned on-disk persistence for the trained query model.

A model file is a gzip-compressed JSON document containing both lexical
translation tables, the phrase table, the frozen feature index, and the
reranker weights.  Serialization is canonical (sorted keys, fixed gzip
mtime), so retraining with identical inputs writes byte-identical files.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass

import numpy as np

from .features import FeatureIndex, PhraseTable
from .reranker import WeightVector
from .translation import NULL_TERM, TEXT_GIVEN_COMPONENT, LexTable

MODEL_FORMAT_VERSION = 1


class ModelStoreError(ValueError):
    """Raised when a model file cannot be written or read back."""


@dataclass
class TrainedModel:
    forward: LexTable
    reverse: LexTable
    phrase_table: PhraseTable
    index: FeatureIndex
    weights: WeightVector
    project_name: str = ""
    rerank_pool: int = 100

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.index):
            raise ModelStoreError(
                "weight vector length %d does not match feature index size %d"
                % (len(self.weights), len(self.index))
            )


def _lex_payload(table: LexTable) -> dict:
    return {
        "direction": table.direction,
        "probs": {
            cond: {word: prob for word, prob in sorted(row.items())}
            for cond, row in sorted(table.probs.items())
        },
    }


def _lex_from_payload(payload: dict) -> LexTable:
    probs = {
        cond: dict(sorted(row.items()))
        for cond, row in sorted(payload["probs"].items())
    }
    conditions = frozenset(probs) - {NULL_TERM}
    emitted = frozenset(word for row in probs.values() for word in row)
    if payload["direction"] == TEXT_GIVEN_COMPONENT:
        text_vocab, comp_vocab = emitted, conditions
    else:
        text_vocab, comp_vocab = conditions, emitted
    return LexTable(
        direction=payload["direction"],
        probs=probs,
        text_vocab=text_vocab,
        comp_vocab=comp_vocab,
    )


def _phrase_payload(table: PhraseTable) -> dict:
    contiguous = [
        [list(text_side), list(comp_side), count]
        for text_side, row in sorted(table.phrases.items())
        for comp_side, count in sorted(row.items())
    ]
    gapped = [
        [list(pre), list(post), list(cpre), list(cpost), count]
        for (pre, post), row in sorted(table.gapped.items())
        for (cpre, cpost), count in sorted(row.items())
    ]
    return {"max_len": table.max_len, "contiguous": contiguous, "gapped": gapped}


def _phrase_from_payload(payload: dict) -> PhraseTable:
    phrases: dict = {}
    for text_side, comp_side, count in payload["contiguous"]:
        phrases.setdefault(tuple(text_side), {})[tuple(comp_side)] = count
    gapped: dict = {}
    for pre, post, cpre, cpost, count in payload["gapped"]:
        key = (tuple(pre), tuple(post))
        gapped.setdefault(key, {})[(tuple(cpre), tuple(cpost))] = count
    return PhraseTable(max_len=payload["max_len"], phrases=phrases, gapped=gapped)


def save_model(model: TrainedModel, path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "project": model.project_name,
        "rerank_pool": model.rerank_pool,
        "forward": _lex_payload(model.forward),
        "reverse": _lex_payload(model.reverse),
        "phrases": _phrase_payload(model.phrase_table),
        "feature_names": list(model.index.names),
        "weights": [float(w) for w in model.weights.values],
    }
    blob = json.dumps(
        payload, sort_keys=True, ensure_ascii=False, separators=(",", ":")
    ).encode("utf-8")
    with open(path, "wb") as handle:
        # fixed mtime keeps identical payloads byte-identical on disk
        with gzip.GzipFile(
            filename="", mode="wb", fileobj=handle, mtime=0
        ) as archive:
            archive.write(blob)


def load_model(path) -> TrainedModel:
    try:
        with gzip.open(path, "rb") as handle:
            payload = json.loads(handle.read().decode("utf-8"))
    except (OSError, ValueError) as exc:
        raise ModelStoreError(f"cannot read model file {path}: {exc}") from exc

    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelStoreError(
            f"model format version {version!r} unsupported, "
            f"expected {MODEL_FORMAT_VERSION}"
        )
    names = payload["feature_names"]
    weights = np.asarray(payload["weights"], dtype=np.float64)
    if len(weights) != len(names):
        raise ModelStoreError(
            "model file holds %d weights for %d feature names"
            % (len(weights), len(names))
        )
    return TrainedModel(
        forward=_lex_from_payload(payload["forward"]),
        reverse=_lex_from_payload(payload["reverse"]),
        phrase_table=_phrase_from_payload(payload["phrases"]),
        index=FeatureIndex.from_names(names),
        weights=WeightVector(weights),
        project_name=payload.get("project", ""),
        rerank_pool=payload.get("rerank_pool", 100),
    )
