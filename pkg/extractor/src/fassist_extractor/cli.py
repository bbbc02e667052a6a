"""Command-line front end for the docstring miner."""

from __future__ import annotations

import argparse
import sys

from .extract import ExtractorError, extract_repo


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fassist-extract",
        description="Mine a Python source tree into corpus and hierarchy files.",
    )
    parser.add_argument("--repo", required=True, metavar="PATH",
                        help="root of the source tree to mine")
    parser.add_argument("--out-corpus", required=True, metavar="PATH",
                        help="corpus file to write (line-delimited JSON)")
    parser.add_argument("--out-hierarchy", required=True, metavar="PATH",
                        help="class hierarchy file to write")
    parser.add_argument("--include-private", action="store_true",
                        help="also mine definitions with leading-underscore names")
    parser.add_argument("--project", default=None, metavar="NAME",
                        help="project name for the corpus header (default: repo directory name)")
    parser.add_argument("--url-template", default=None, metavar="TPL",
                        help="source link template with {file} and {line} placeholders")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = extract_repo(
            args.repo,
            args.out_corpus,
            args.out_hierarchy,
            include_private=args.include_private,
            project_name=args.project,
            source_url_template=args.url_template,
        )
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for failed in report.parse_failures:
        print(f"warning: could not parse {failed}", file=sys.stderr)
    print(
        f"scanned {report.files_scanned} files: "
        f"{report.functions_seen} functions seen, "
        f"{report.pairs_emitted} pairs written, "
        f"{report.skipped_no_docstring} skipped without a usable docstring"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
