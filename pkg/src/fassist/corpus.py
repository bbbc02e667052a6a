"""Domain types and corpus handling: tokenization, component linearization,
dataset splitting, and the line-delimited corpus / hierarchy file formats.

A corpus is a list of (description, component) pairs mined from a single
project, plus that project's class hierarchy. Everything downstream
(translation tables, features, evaluation) consumes these types.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from pathlib import Path


class CorpusError(ValueError):
    """Malformed corpus data: bad tokens, bad records, bad hierarchy."""


_TOKEN_RE = re.compile(r"[^\W_]+")

# camelCase pieces: an acronym run, an Upper-led word, a bare lower/digit run
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z0-9])|[A-Z]?[a-z0-9]+|[A-Z]+|[0-9]+")


def tokenize_text(raw: str) -> "TextSequence":
    """Lowercase and split on whitespace and punctuation.

    Punctuation-only pieces disappear; the result is empty only when the
    input has no alphanumeric content at all.
    """
    return TextSequence(tuple(_TOKEN_RE.findall(raw.lower())))


def split_identifier(identifier: str) -> list[str]:
    """Decompose an identifier on underscores and camelCase boundaries.

    Returns lowercase subtokens, e.g. trainHMM -> [train, hmm] and
    head_address -> [head, address]. Does not include the undivided form.
    """
    parts: list[str] = []
    for piece in re.split(r"[^0-9a-zA-Z]+", identifier):
        if piece:
            parts.extend(m.group(0).lower() for m in _CAMEL_RE.finditer(piece))
    return parts


def linearize_component(
    namespace: tuple[str, ...],
    class_name: str | None,
    function_name: str,
    arg_names: tuple[str, ...],
) -> tuple[str, ...]:
    """Flatten a component into its term sequence.

    Emits namespace tokens, the class name if present, the function name,
    then argument names, in that order. Every identifier contributes its
    undivided lowercase form, followed by its underscore/camelCase subtokens
    when the decomposition is non-trivial.
    """
    identifiers: list[str] = list(namespace)
    if class_name:
        identifiers.append(class_name)
    identifiers.append(function_name)
    identifiers.extend(arg_names)

    terms: list[str] = []
    for ident in identifiers:
        whole = ident.lower()
        terms.append(whole)
        parts = split_identifier(ident)
        if parts != [whole]:
            terms.extend(parts)
    return tuple(terms)


@dataclass(frozen=True)
class TextSequence:
    """An ordered sequence of lowercase word tokens."""

    tokens: tuple[str, ...] = ()

    def __post_init__(self):
        for tok in self.tokens:
            if not tok or tok != tok.lower() or any(ch.isspace() for ch in tok):
                raise CorpusError(f"invalid text token: {tok!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def joined(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Component:
    """A callable API element: namespace path, optional class, name, arguments.

    The linearized term sequence is derived at construction and is a pure
    function of the other fields, so re-linearizing always reproduces it.
    """

    function_name: str
    namespace: tuple[str, ...] = ()
    class_name: str | None = None
    arg_names: tuple[str, ...] = ()
    linearized: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if not self.function_name:
            raise CorpusError("component function_name must be non-empty")
        for tok in self.namespace:
            if not tok:
                raise CorpusError("namespace tokens must be non-empty")
        if self.class_name == "":
            raise CorpusError("class_name must be None or non-empty")
        object.__setattr__(
            self,
            "linearized",
            linearize_component(
                self.namespace, self.class_name, self.function_name, self.arg_names
            ),
        )

    def sort_key(self) -> tuple:
        return (self.linearized, self.namespace, self.class_name or "",
                self.function_name, self.arg_names)

    def signature(self) -> str:
        """Human-readable dotted signature, e.g. pkg.mod.Cls.fn(a, b)."""
        path = list(self.namespace)
        if self.class_name:
            path.append(self.class_name)
        path.append(self.function_name)
        return ".".join(path) + "(" + ", ".join(self.arg_names) + ")"


@dataclass(frozen=True)
class SourceLocation:
    file: str = ""
    line: int = 0


@dataclass(frozen=True)
class Pair:
    """One training example: a tokenized description aligned to a component."""

    text: TextSequence
    component: Component
    param_descs: dict[str, tuple[str, ...]] = field(default_factory=dict)
    source: SourceLocation = SourceLocation()

    def __post_init__(self):
        if len(self.text) == 0:
            raise CorpusError("pair text must be non-empty")


@dataclass(frozen=True)
class ClassHierarchy:
    """Inheritance edges and class descriptions for one project.

    classes holds every known class identifier, including parents and
    described classes; edges hold (child, parent) links only.
    """

    classes: frozenset[str] = frozenset()
    edges: frozenset[tuple[str, str]] = frozenset()
    class_descs: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.classes)
        for child, parent in self.edges:
            if child == parent:
                raise CorpusError(f"hierarchy self-loop on class {child}")
            known.add(child)
            known.add(parent)
        known.update(self.class_descs)
        object.__setattr__(self, "classes", frozenset(known))
        cycle = self._find_cycle()
        if cycle:
            raise CorpusError("hierarchy cycle: " + " -> ".join(cycle))

    def _find_cycle(self) -> list[str] | None:
        parents: dict[str, list[str]] = {}
        for child, parent in sorted(self.edges):
            parents.setdefault(child, []).append(parent)
        state: dict[str, int] = {}  # 1 = on stack, 2 = done

        def visit(node: str, stack: list[str]) -> list[str] | None:
            state[node] = 1
            stack.append(node)
            for nxt in parents.get(node, ()):
                if state.get(nxt) == 1:
                    return stack[stack.index(nxt):] + [nxt]
                if state.get(nxt) is None:
                    found = visit(nxt, stack)
                    if found:
                        return found
            stack.pop()
            state[node] = 2
            return None

        for name in sorted(self.classes):
            if state.get(name) is None:
                found = visit(name, [])
                if found:
                    return found
        return None

    @property
    def is_empty(self) -> bool:
        return not self.classes and not self.edges and not self.class_descs

    def _parent_map(self) -> dict[str, list[str]]:
        cached = getattr(self, "_parents", None)
        if cached is None:
            cached = {}
            for child, parent in sorted(self.edges):
                cached.setdefault(child, []).append(parent)
            object.__setattr__(self, "_parents", cached)
        return cached

    def ancestors(self, class_name: str, include_self: bool = False) -> list[str]:
        """Transitive parents of class_name in deterministic BFS order."""
        parents = self._parent_map()
        seen: list[str] = [class_name] if include_self else []
        frontier = [class_name]
        while frontier:
            nxt: list[str] = []
            for node in frontier:
                for par in parents.get(node, ()):
                    if par not in seen and par != class_name:
                        seen.append(par)
                        nxt.append(par)
            frontier = nxt
        return seen


@dataclass(frozen=True)
class Corpus:
    pairs: tuple[Pair, ...]
    hierarchy: ClassHierarchy = ClassHierarchy()
    project_name: str = ""
    source_url_template: str | None = None

    def __post_init__(self):
        if not self.hierarchy.is_empty:
            for pair in self.pairs:
                cls = pair.component.class_name
                if cls is not None and cls not in self.hierarchy.classes:
                    raise CorpusError(
                        f"class {cls} referenced by a pair is missing from the hierarchy"
                    )

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ComponentInventory:
    """The deduplicated, linearization-sorted set of components in a corpus."""

    components: tuple[Component, ...]

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "ComponentInventory":
        by_lin: dict[tuple[str, ...], Component] = {}
        for pair in corpus.pairs:
            comp = pair.component
            best = by_lin.get(comp.linearized)
            if best is None or comp.sort_key() < best.sort_key():
                by_lin[comp.linearized] = comp
        return cls(tuple(by_lin[key] for key in sorted(by_lin)))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


@dataclass(frozen=True)
class SplitSpec:
    """Seeded train/dev/test fractions; fractions are positive and sum to 1."""

    seed: int = 13
    train_frac: float = 0.70
    dev_frac: float = 0.15
    test_frac: float = 0.15

    def __post_init__(self):
        fracs = (self.train_frac, self.dev_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise CorpusError("split fractions must all be positive")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise CorpusError(f"split fractions must sum to 1, got {sum(fracs)}")


def split_corpus(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Shuffle deterministically and partition into train/dev/test.

    Dev and test sizes are floor(n * frac); the remainder goes to train.
    The same corpus and spec always produce the same partition.
    """
    n = len(corpus.pairs)
    if n < 3:
        raise CorpusError(f"corpus too small to split: {n} pairs, need at least 3")
    order = list(range(n))
    random.Random(spec.seed).shuffle(order)
    n_dev = math.floor(round(n * spec.dev_frac, 9))
    n_test = math.floor(round(n * spec.test_frac, 9))
    n_train = n - n_dev - n_test

    def take(indices: list[int]) -> Corpus:
        return Corpus(
            pairs=tuple(corpus.pairs[i] for i in indices),
            hierarchy=corpus.hierarchy,
            project_name=corpus.project_name,
            source_url_template=corpus.source_url_template,
        )

    return (
        take(order[:n_train]),
        take(order[n_train:n_train + n_dev]),
        take(order[n_train + n_dev:]),
    )


# ---------------------------------------------------------------------------
# file formats
#
# Corpus file: first line is a header {"project": ..., "source_url_template": ...},
# then one record per line:
#   {"text": "tokenized words", "namespace": [...], "class": str|null,
#    "function": str, "args": [...], "param_descs": {...}, "file": str, "line": int}
# Hierarchy file: one record per line {"child": str, "parent": str|null, "desc": str}.
# Text fields are pre-tokenized and space-joined, so loading splits on whitespace only.
# ---------------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def save_corpus(corpus: Corpus, corpus_path, hierarchy_path=None) -> None:
    lines = [_dumps({
        "project": corpus.project_name,
        "source_url_template": corpus.source_url_template,
    })]
    for pair in corpus.pairs:
        comp = pair.component
        lines.append(_dumps({
            "text": pair.text.joined(),
            "namespace": list(comp.namespace),
            "class": comp.class_name,
            "function": comp.function_name,
            "args": list(comp.arg_names),
            "param_descs": {k: " ".join(v) for k, v in sorted(pair.param_descs.items())},
            "file": pair.source.file,
            "line": pair.source.line,
        }))
    Path(corpus_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if hierarchy_path is not None:
        save_hierarchy(corpus.hierarchy, hierarchy_path)


def save_hierarchy(hierarchy: ClassHierarchy, path) -> None:
    parents: dict[str, list[str]] = {}
    for child, parent in sorted(hierarchy.edges):
        parents.setdefault(child, []).append(parent)
    lines = []
    for name in sorted(hierarchy.classes):
        desc = " ".join(hierarchy.class_descs.get(name, ()))
        for parent in parents.get(name) or [None]:
            lines.append(_dumps({"child": name, "parent": parent, "desc": desc}))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def _field(record: dict, name: str, lineno: int, kinds, required=True):
    if name not in record or record[name] is None:
        if required:
            raise CorpusError(f"line {lineno}: missing {name}")
        return None
    value = record[name]
    if not isinstance(value, kinds):
        raise CorpusError(f"line {lineno}: bad type for {name}")
    return value


def load_hierarchy(path) -> ClassHierarchy:
    classes: set[str] = set()
    edges: set[tuple[str, str]] = set()
    descs: dict[str, tuple[str, ...]] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid hierarchy record ({exc.msg})")
        if not isinstance(record, dict):
            raise CorpusError(f"line {lineno}: hierarchy record must be an object")
        child = _field(record, "child", lineno, str)
        parent = _field(record, "parent", lineno, str, required=False)
        desc = _field(record, "desc", lineno, str, required=False) or ""
        classes.add(child)
        if parent is not None:
            edges.add((child, parent))
        if desc.strip():
            descs[child] = tuple(desc.split())
    return ClassHierarchy(frozenset(classes), frozenset(edges), descs)


def load_corpus(corpus_path, hierarchy_path=None) -> Corpus:
    """Load a corpus file (and optional companion hierarchy file).

    Raises CorpusError naming the offending line for any malformed record.
    """
    text = Path(corpus_path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise CorpusError("line 1: missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorpusError(f"line 1: invalid header ({exc.msg})")
    if not isinstance(header, dict) or "project" not in header:
        raise CorpusError("line 1: missing project")
    template = header.get("source_url_template")
    if template is not None and not isinstance(template, str):
        raise CorpusError("line 1: bad type for source_url_template")

    pairs: list[Pair] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid record ({exc.msg})")
        if not isinstance(record, dict):
            raise CorpusError(f"line {lineno}: record must be an object")
        raw_text = _field(record, "text", lineno, str)
        namespace = _field(record, "namespace", lineno, list, required=False) or []
        class_name = _field(record, "class", lineno, str, required=False)
        if "function" not in record or record["function"] is None:
            raise CorpusError(f"line {lineno}: missing function_name")
        function = record["function"]
        if not isinstance(function, str):
            raise CorpusError(f"line {lineno}: bad type for function")
        args = _field(record, "args", lineno, list, required=False) or []
        raw_descs = _field(record, "param_descs", lineno, dict, required=False) or {}
        file_ = _field(record, "file", lineno, str, required=False) or ""
        line_no = _field(record, "line", lineno, int, required=False) or 0
        if not all(isinstance(t, str) for t in namespace + args):
            raise CorpusError(f"line {lineno}: namespace and args must be strings")
        if not all(isinstance(k, str) and isinstance(v, str) for k, v in raw_descs.items()):
            raise CorpusError(f"line {lineno}: param_descs must map strings to strings")
        try:
            pair = Pair(
                text=TextSequence(tuple(raw_text.split())),
                component=Component(
                    function_name=function,
                    namespace=tuple(namespace),
                    class_name=class_name,
                    arg_names=tuple(args),
                ),
                param_descs={k: tuple(v.split()) for k, v in raw_descs.items()},
                source=SourceLocation(file=file_, line=line_no),
            )
        except CorpusError as exc:
            raise CorpusError(f"line {lineno}: {exc}")
        pairs.append(pair)

    hierarchy = load_hierarchy(hierarchy_path) if hierarchy_path else ClassHierarchy()
    return Corpus(
        pairs=tuple(pairs),
        hierarchy=hierarchy,
        project_name=header["project"],
        source_url_template=template,
    )
