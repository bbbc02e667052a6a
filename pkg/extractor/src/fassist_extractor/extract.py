"""Static docstring mining over a Python source tree.

Walks every module under a repository root, reads function and class
docstrings through the ast module, and writes the line-delimited corpus and
class-hierarchy files consumed by the fassist retrieval package. The walk is
purely static: nothing is imported or executed, so broken or import-heavy
code cannot hurt a run. Files that fail to parse are reported and skipped.

Only definitions that sit directly in a module or class body are considered;
closures and other function-local definitions are not part of a package's
callable surface and are ignored entirely.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass
from pathlib import Path


class ExtractorError(ValueError):
    """Extraction cannot proceed: bad root, no parseable files, bad output."""


RETURN_KEY = "return"

_TOKEN_RE = re.compile(r"[^\W_]+")
_BLANK_LINE_RE = re.compile(r"\n[ \t]*\n")
_SENTENCE_END_RE = re.compile(r"\.(?=\s|$)")

_PARAM_FIELD_RE = re.compile(r"^:param(?:eter)?\s+(?:[^:]*?\s)?\*{0,2}(\w+)\s*:\s*(.*)$")
_RETURN_FIELD_RE = re.compile(r"^:returns?\s*:\s*(.*)$")
_GOOGLE_ENTRY_RE = re.compile(r"^\*{0,2}(\w+)\s*(?:\([^)]*\))?\s*:\s*(.*)$")
_NUMPY_ENTRY_RE = re.compile(r"^\*{0,2}(\w+)\s*(?::.*)?$")
_UNDERLINE_RE = re.compile(r"^-{3,}\s*$")

_PARAM_HEADERS = {
    "args", "arguments", "parameters",
    "keyword args", "keyword arguments", "other parameters",
}
_RETURN_HEADERS = {"returns", "return"}


def first_sentence(docstring: str) -> str:
    """Return the opening sentence of a docstring, whitespace-collapsed.

    The sentence ends at the first period followed by whitespace or the end
    of the string, or at the first blank line, whichever comes first. When
    neither occurs the whole docstring is returned. Abbreviations such as
    "e.g." therefore end a sentence early; the cut is deliberate so that the
    rule stays deterministic and easy to state.
    """
    head = _BLANK_LINE_RE.split(docstring, maxsplit=1)[0]
    match = _SENTENCE_END_RE.search(head)
    if match:
        head = head[: match.end()]
    return " ".join(head.split())


def _tokens(raw: str) -> tuple[str, ...]:
    # The corpus loader rejects tokens that are empty, mixed-case, or contain
    # whitespace, so filter defensively even though lowering first makes
    # violations nearly impossible.
    out = []
    for tok in _TOKEN_RE.findall(raw.lower()):
        if tok and tok == tok.lower() and not any(ch.isspace() for ch in tok):
            out.append(tok)
    return tuple(out)


def _indent(line: str) -> int:
    return len(line) - len(line.lstrip())


class _DescCollector:
    def __init__(self):
        self.parts: dict[str, list[str]] = {}

    def put(self, name, text: str):
        if not name:
            return
        chunk = " ".join(text.split())
        if chunk:
            self.parts.setdefault(name, []).append(chunk)

    def joined(self) -> dict[str, str]:
        return {name: " ".join(chunks) for name, chunks in self.parts.items()}


def _take_field_block(lines, i, indent, buf) -> int:
    """Consume continuation lines of a ':param x:' style field into buf."""
    i += 1
    while i < len(lines):
        line = lines[i]
        if not line.strip() or _indent(line) <= indent or line.lstrip().startswith(":"):
            break
        buf.append(line.strip())
        i += 1
    return i


def _take_google_block(lines, i, header_indent, collector, is_return) -> int:
    """Parse an 'Args:'-style section starting at the header line index i."""
    i += 1
    entry_indent = None
    current = None
    buf: list[str] = []

    def flush():
        if is_return:
            collector.put(RETURN_KEY, " ".join(buf))
        else:
            collector.put(current, " ".join(buf))

    while i < len(lines):
        line = lines[i]
        if not line.strip():
            i += 1
            continue
        indent = _indent(line)
        if indent <= header_indent:
            break
        if is_return:
            buf.append(line.strip())
        elif entry_indent is None or indent <= entry_indent:
            if buf or current:
                flush()
            current, buf = None, []
            entry_indent = indent if entry_indent is None else entry_indent
            match = _GOOGLE_ENTRY_RE.match(line.strip())
            if match:
                current = match.group(1)
                buf = [match.group(2)]
        else:
            buf.append(line.strip())
        i += 1
    if buf or current:
        flush()
    return i


def _take_numpy_block(lines, i, header_indent, collector, is_return) -> int:
    """Parse a dash-underlined section; i indexes the first line after it."""
    current = None
    buf: list[str] = []

    def flush():
        if is_return:
            collector.put(RETURN_KEY, " ".join(buf))
        else:
            collector.put(current, " ".join(buf))

    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        if not stripped:
            i += 1
            continue
        indent = _indent(line)
        if indent < header_indent:
            break
        if indent == header_indent:
            # A same-indent line followed by dashes starts the next section.
            if i + 1 < len(lines) and _UNDERLINE_RE.match(lines[i + 1].strip()):
                break
            if is_return:
                buf.append(stripped)
            else:
                match = _NUMPY_ENTRY_RE.match(stripped)
                if match:
                    if buf or current:
                        flush()
                    current, buf = match.group(1), []
                elif current:
                    buf.append(stripped)
        elif current or is_return:
            buf.append(stripped)
        i += 1
    if buf or current:
        flush()
    return i


def parse_param_descs(docstring: str) -> dict[str, str]:
    """Pull parameter and return-value descriptions out of a docstring.

    Understands the common structured conventions: ':param name:' colon
    fields, 'Args:'-style indented sections, and numpy-style sections
    underlined with dashes. Descriptions spanning several lines are joined
    with single spaces. The return-value description, when one is found,
    is stored under the key 'return'. Unstructured prose yields an empty
    mapping; this parser is best-effort by design.
    """
    lines = docstring.splitlines()
    collector = _DescCollector()
    i = 0
    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        match = _PARAM_FIELD_RE.match(stripped)
        if match:
            buf = [match.group(2)]
            i = _take_field_block(lines, i, _indent(line), buf)
            collector.put(match.group(1), " ".join(buf))
            continue
        match = _RETURN_FIELD_RE.match(stripped)
        if match:
            buf = [match.group(1)]
            i = _take_field_block(lines, i, _indent(line), buf)
            collector.put(RETURN_KEY, " ".join(buf))
            continue
        header = stripped.lower().rstrip(":")
        if header in _PARAM_HEADERS or header in _RETURN_HEADERS:
            is_return = header in _RETURN_HEADERS
            if stripped.endswith(":"):
                i = _take_google_block(lines, i, _indent(line), collector, is_return)
                continue
            if i + 1 < len(lines) and _UNDERLINE_RE.match(lines[i + 1].strip()):
                i = _take_numpy_block(lines, i + 2, _indent(line), collector, is_return)
                continue
        i += 1
    return collector.joined()


@dataclass(frozen=True)
class ExtractionReport:
    """Bookkeeping for one extraction run.

    functions_seen counts the definitions considered for emission: functions
    and methods sitting directly in a module or class body of a file that
    parsed, after the privacy filter. Every one of them either becomes a
    pair or is counted in skipped_no_docstring, so
    pairs_emitted + skipped_no_docstring == functions_seen by construction.
    Files that fail to parse contribute nothing except their path in
    parse_failures.
    """

    files_scanned: int
    functions_seen: int
    pairs_emitted: int
    skipped_no_docstring: int
    parse_failures: tuple[str, ...] = ()

    def __post_init__(self):
        counts = (self.files_scanned, self.functions_seen,
                  self.pairs_emitted, self.skipped_no_docstring)
        if any(c < 0 for c in counts):
            raise ExtractorError("report counts must be non-negative")
        if self.pairs_emitted > self.functions_seen:
            raise ExtractorError("more pairs than functions seen")
        if self.pairs_emitted + self.skipped_no_docstring != self.functions_seen:
            raise ExtractorError("function bookkeeping does not add up")


def _source_files(root: Path) -> list[Path]:
    files = []
    for path in sorted(root.rglob("*.py")):
        parts = path.relative_to(root).parts
        if any(p == "__pycache__" or p.startswith(".") for p in parts):
            continue
        if path.is_file():
            files.append(path)
    return files


def _definitions(tree):
    """Functions and classes in module or class bodies, in source order.

    Returns (functions, classes) where each function entry is (chain, node)
    with chain the tuple of enclosing class names, and each class entry is
    the ClassDef node itself.
    """
    functions = []
    classes = []

    def visit(node, chain):
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                functions.append((chain, child))
            elif isinstance(child, ast.ClassDef):
                classes.append(child)
                visit(child, chain + (child.name,))

    visit(tree, ())
    return functions, classes


def _base_name(node):
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        return node.attr
    if isinstance(node, ast.Subscript):
        return _base_name(node.value)
    return None


def _is_private(parts) -> bool:
    return any(part.startswith("_") for part in parts)


def _positional_args(node) -> tuple[str, ...]:
    args = list(node.args.posonlyargs) + list(node.args.args)
    return tuple(a.arg for a in args if a.arg not in ("self", "cls"))


def _tokenized_descs(docstring: str, arg_names) -> dict[str, tuple[str, ...]]:
    keep = set(arg_names) | {RETURN_KEY}
    out = {}
    for name, text in parse_param_descs(docstring).items():
        if name in keep:
            toks = _tokens(text)
            if toks:
                out[name] = toks
    return out


def _reaches(parents: dict, start: str, target: str) -> bool:
    seen = set()
    frontier = [start]
    while frontier:
        node = frontier.pop()
        if node == target:
            return True
        if node in seen:
            continue
        seen.add(node)
        frontier.extend(parents.get(node, ()))
    return False


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _write(path: Path, content: str):
    try:
        path.write_text(content, encoding="utf-8")
    except OSError as exc:
        raise ExtractorError(f"cannot write {path}: {exc}")


def extract_repo(repo_root, out_corpus, out_hierarchy, include_private: bool = False,
                 project_name=None, source_url_template=None) -> ExtractionReport:
    """Mine a source tree into a corpus file and a hierarchy file.

    Every function or method with a usable docstring becomes one record:
    its text is the tokenized first sentence, its component fields come
    from the module path, the enclosing class if any, the function name,
    and the positional parameter names with self and cls dropped. Private
    definitions (a leading underscore anywhere in the module path below the
    root, the class chain, or the function name) are ignored unless
    include_private is set. The hierarchy file records every class seen,
    parent edges for base names that resolve to a class defined somewhere
    under the same root, and first-sentence class descriptions.

    When the root directory is itself a package (contains __init__.py) its
    name is prepended to namespaces and file paths, so pointing at an
    installed package directory yields fully qualified components.

    Output is deterministic: the file walk is sorted, so identical trees
    produce byte-identical files. Raises ExtractorError when the root is
    not a directory, contains no parseable Python file, or an output path
    cannot be written.
    """
    root = Path(repo_root)
    if not root.is_dir():
        raise ExtractorError(f"repo root {root} is not a directory")
    files = _source_files(root)
    if not files:
        raise ExtractorError(f"no Python files under {root}")
    prefix = (root.name,) if (root / "__init__.py").is_file() else ()

    records = []
    class_names: set[str] = set()
    raw_edges: set[tuple[str, str]] = set()
    class_descs: dict[str, tuple[str, ...]] = {}
    functions_seen = pairs_emitted = skipped = 0
    failures: list[str] = []

    for path in files:
        rel = path.relative_to(root)
        file_field = "/".join(prefix + rel.parts)
        try:
            tree = ast.parse(path.read_text(encoding="utf-8", errors="replace"))
        except (SyntaxError, ValueError, RecursionError):
            failures.append(file_field)
            continue
        module_parts = list(rel.parts[:-1])
        if rel.stem != "__init__":
            module_parts.append(rel.stem)
        namespace = prefix + tuple(module_parts)
        module_private = _is_private(module_parts)

        functions, classes = _definitions(tree)
        for node in classes:
            class_names.add(node.name)
            for base in node.bases:
                base_name = _base_name(base)
                if base_name:
                    raw_edges.add((node.name, base_name))
            doc = ast.get_docstring(node)
            if doc and node.name not in class_descs:
                desc = _tokens(first_sentence(doc))
                if desc:
                    class_descs[node.name] = desc

        for chain, node in functions:
            private = module_private or _is_private(chain) or node.name.startswith("_")
            if private and not include_private:
                continue
            functions_seen += 1
            doc = ast.get_docstring(node) or ""
            text = _tokens(first_sentence(doc)) if doc else ()
            if not text:
                skipped += 1
                continue
            args = _positional_args(node)
            descs = _tokenized_descs(doc, args)
            records.append({
                "text": " ".join(text),
                "namespace": list(namespace),
                "class": chain[-1] if chain else None,
                "function": node.name,
                "args": list(args),
                "param_descs": {k: " ".join(v) for k, v in sorted(descs.items())},
                "file": file_field,
                "line": node.lineno,
            })
            pairs_emitted += 1

    if len(failures) == len(files):
        raise ExtractorError(f"no parseable Python files under {root}")

    # Keep only base links that resolve to a class defined under this root.
    # Bare names can collide across modules, so guard against link sets the
    # consumer would reject: self-loops and anything that closes a cycle.
    parents: dict[str, set] = {}
    edges = []
    for child, parent in sorted(raw_edges):
        if parent not in class_names or child == parent:
            continue
        if _reaches(parents, parent, child):
            continue
        edges.append((child, parent))
        parents.setdefault(child, set()).add(parent)

    project = project_name if project_name is not None else root.name
    lines = [_dumps({"project": project, "source_url_template": source_url_template})]
    lines.extend(_dumps(record) for record in records)
    _write(Path(out_corpus), "\n".join(lines) + "\n")

    parent_lists: dict[str, list] = {}
    for child, parent in edges:
        parent_lists.setdefault(child, []).append(parent)
    hier_lines = []
    for name in sorted(class_names):
        desc = " ".join(class_descs.get(name, ()))
        for parent in parent_lists.get(name) or [None]:
            hier_lines.append(_dumps({"child": name, "parent": parent, "desc": desc}))
    _write(Path(out_hierarchy), "\n".join(hier_lines) + ("\n" if hier_lines else ""))

    return ExtractionReport(
        files_scanned=len(files),
        functions_seen=functions_seen,
        pairs_emitted=pairs_emitted,
        skipped_no_docstring=skipped,
        parse_failures=tuple(failures),
    )
