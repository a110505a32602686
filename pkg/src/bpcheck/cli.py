"""Command-line interface: mine, select, check, run, evaluate and review."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import io as bio
from .checker import aggregate, check_log
from .evaluation import METRIC_COLUMNS, cross_validate, rows_to_csv, summarize
from .labels import SynonymLexicon, default_lexicon
from .miner import mine_collection
from .model import KIND_ORDER, Kind
from .selector import ReviewFilter, SelectionConfig, select_constraints
from .similarity import (
    LexicalSimilarity,
    RemoteEmbeddingSimilarity,
    SimilarityServiceError,
    VectorFileSimilarity,
)

log = logging.getLogger("bpcheck")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
ENDPOINT_ENV = "BPCHECK_EMBED_ENDPOINT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _kind_values(text: str, cast) -> dict[Kind, float]:
    """``10`` applies to every kind; ``activity=10,role=5`` targets single kinds."""
    if "=" not in text:
        value = cast(text)
        return {k: value for k in KIND_ORDER}
    out = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        try:
            out[Kind(name.strip())] = cast(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad per-kind value {part!r}") from None
    return out


def _add_similarity(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("similarity")
    g.add_argument("--vectors", type=Path, help="phrase vector file (phrase<TAB>v1 ... vd)")
    g.add_argument("--endpoint", help=f"embedding service URL (or ${ENDPOINT_ENV})")
    g.add_argument("--synonyms", type=Path, help="verb synonym lexicon (lemma<TAB>syn1,syn2)")


def _add_selection(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("selection")
    g.add_argument("--k", action="append", default=[], metavar="N|KIND=N",
                   help="top-k per kind (repeatable)")
    g.add_argument("--tau", action="append", default=[], metavar="X|KIND=X",
                   help="relevance threshold per kind (repeatable)")
    g.add_argument("--omega", type=float, default=0.9, help="similarity weight in relevance (default 0.9)")
    g.add_argument("--epsilon", type=float, default=0.5, help="match threshold (default 0.5)")
    g.add_argument("--mcs-cap", type=int, default=3, help="largest correction set considered (default 3)")
    g.add_argument("--repair", choices=("exact", "iterative"), default="exact",
                   help="what to do when no correction set fits the cap")
    g.add_argument("--filter", type=Path, help="review filter JSON")
    g.add_argument("--interactive", action="store_true",
                   help="read review commands from stdin before repair")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bpcheck", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mine", help="mine a constraint collection from reference models")
    p.add_argument("--models", type=Path, required=True, help="directory of model JSON files")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("select", help="fit, select and repair constraints for a log")
    p.add_argument("--constraints", type=Path, required=True)
    p.add_argument("--log", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_selection(p)
    _add_similarity(p)

    p = sub.add_parser("check", help="check a log against selected constraints")
    p.add_argument("--log", type=Path, required=True)
    p.add_argument("--selected", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--text", action="store_true", help="also print a plain-text table")

    p = sub.add_parser("run", help="mine, select and check in one go")
    p.add_argument("--models", type=Path, required=True)
    p.add_argument("--log", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--text", action="store_true")
    _add_selection(p)
    _add_similarity(p)

    p = sub.add_parser("evaluate", help="cross-validate on a model collection")
    p.add_argument("--models", type=Path, help="model directory (default: bundled synthetic collection)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="metrics CSV")
    p.add_argument("--summary", type=Path, help="per-kind summary CSV")
    p.add_argument("--k", type=int, action="append", default=[], help="top-k setting to evaluate")
    p.add_argument("--tau", type=float, action="append", default=[], help="threshold setting to evaluate")
    p.add_argument("--omega", type=float, default=0.9)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--repair", choices=("exact", "iterative"), default="exact")
    p.add_argument("--jobs", type=int, default=1)
    _add_similarity(p)

    p = sub.add_parser("review", help="write a review filter from prompt commands")
    p.add_argument("--selected", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _provider(args):
    endpoint = getattr(args, "endpoint", None) or os.environ.get(ENDPOINT_ENV)
    if args.vectors and endpoint:
        raise UsageError("--vectors and --endpoint are mutually exclusive")
    if args.vectors:
        return VectorFileSimilarity(args.vectors)
    if endpoint:
        return RemoteEmbeddingSimilarity(endpoint)
    return LexicalSimilarity()


def _lexicon(args) -> SynonymLexicon:
    return SynonymLexicon.load(args.synonyms) if args.synonyms else default_lexicon()


def _selection_config(args) -> SelectionConfig:
    try:
        k: dict = {}
        tau: dict = {}
        for text in args.k:
            k.update(_kind_values(text, int))
        for text in args.tau:
            tau.update(_kind_values(text, float))
        return SelectionConfig(
            epsilon=args.epsilon, omega=args.omega, k=k, tau=tau,
            mcs_size_cap=args.mcs_cap, repair=args.repair,
        )
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from None


HELP_TEXT = """commands (one per line, empty line or 'done' to finish):
  drop object|action|activity|role <label>
  pin <constraint-key>
  list
"""


def read_review(stream: TextIO, selected=(), out: TextIO | None = None) -> ReviewFilter:
    """Build a filter from line commands such as ``drop object notification``."""
    fields = {"object": set(), "action": set(), "activity": set(), "role": set()}
    pins: set[str] = set()
    keys = {c.key for c in selected}
    for n, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line == "done":
            break
        if line.startswith("#"):
            continue
        verb, _, rest = line.partition(" ")
        if verb == "list":
            if out is not None:
                out.writelines(f"{k}\n" for k in sorted(keys))
            continue
        if verb == "pin" and rest:
            if keys and rest not in keys:
                raise UsageError(f"review line {n}: unknown constraint key {rest!r}")
            pins.add(rest)
            continue
        what, _, label = rest.partition(" ")
        if verb != "drop" or what not in fields or not label.strip():
            raise UsageError(f"review line {n}: cannot parse {line!r}\n{HELP_TEXT}")
        fields[what].add(label.strip())
    try:
        return ReviewFilter(
            objects=frozenset(fields["object"]), actions=frozenset(fields["action"]),
            activities=frozenset(fields["activity"]), roles=frozenset(fields["role"]),
            pin=frozenset(pins),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _merge(a: Optional[ReviewFilter], b: Optional[ReviewFilter]) -> Optional[ReviewFilter]:
    if a is None or b is None:
        return a or b
    return ReviewFilter(a.objects | b.objects, a.actions | b.actions, a.activities | b.activities,
                        a.roles | b.roles, a.pin | b.pin)


def _select(args, collection, event_log, stdin: TextIO, stdout: TextIO):
    config = _selection_config(args)
    provider = _provider(args)
    review = bio.read_filter(args.filter) if args.filter else None
    if args.interactive:
        stdout.write(HELP_TEXT)
        result = select_constraints(collection, event_log, config, provider, _lexicon(args))
        typed = read_review(stdin, result.recommended, stdout)
        review = _merge(review, typed)
    result = select_constraints(collection, event_log, config, provider, _lexicon(args), review)
    header = bio.meta(
        seed=args.seed,
        config=config.to_dict(),
        similarity=provider.describe(),
        filter=review.to_dict() if review else None,
        counts={"fitted": len(result.fitted), "recommended": len(result.recommended),
                "reviewed": len(result.reviewed), "selected": len(result.selected)},
    )
    return result, header


def _check(event_log, selected, selection_meta: dict, out: Path, text: bool, stdout: TextIO) -> None:
    report = aggregate(check_log(event_log, selected), event_log, selection_meta.get("config", {}))
    header = bio.meta(seed=selection_meta.get("seed"), config=selection_meta.get("config", {}))
    bio.write_report(report, out, header)
    if text:
        stdout.write(report.to_text())


def cmd_mine(args, stdin, stdout) -> None:
    models = bio.read_models(args.models)
    collection = mine_collection(models, jobs=args.jobs)
    header = bio.meta(config={"models": sorted(m.id for m in models), "loop_bound": 1})
    bio.write_constraints(collection, args.out, header)


def cmd_select(args, stdin, stdout) -> None:
    collection = bio.read_constraints(args.constraints)
    event_log = bio.read_log(args.log)
    result, header = _select(args, collection, event_log, stdin, stdout)
    bio.write_selection(result.selected, result.diagnostics, args.out, header)


def cmd_check(args, stdin, stdout) -> None:
    event_log = bio.read_log(args.log)
    selected, _, selection_meta = bio.read_selection(args.selected)
    _check(event_log, selected, selection_meta, args.out, args.text, stdout)


def cmd_run(args, stdin, stdout) -> None:
    _selection_config(args)  # reject bad settings before any output is written
    models = bio.read_models(args.models)
    event_log = bio.read_log(args.log)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    collection = mine_collection(models, jobs=args.jobs)
    bio.write_constraints(
        collection, args.out_dir / "constraints.jsonl",
        bio.meta(seed=args.seed, config={"models": sorted(m.id for m in models), "loop_bound": 1}),
    )
    result, header = _select(args, collection, event_log, stdin, stdout)
    bio.write_selection(result.selected, result.diagnostics, args.out_dir / "selected.json", header)
    _check(event_log, result.selected, header, args.out_dir / "report.json", args.text, stdout)


def cmd_evaluate(args, stdin, stdout) -> None:
    if args.models:
        models = bio.read_models(args.models)
    else:
        from .synthetic import synthetic_collection

        models = synthetic_collection()
    if not 2 <= args.folds <= len(models):
        raise UsageError(f"--folds must lie in [2, {len(models)}]")
    common = dict(epsilon=args.epsilon, omega=args.omega, repair=args.repair)
    try:
        configs = [SelectionConfig.top_k(k, **common) for k in sorted(set(args.k))]
        configs += [SelectionConfig.threshold(t, **common) for t in sorted(set(args.tau))]
        if not configs:
            configs = [SelectionConfig.top_k(100, **common)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    provider = _provider(args)
    rows = cross_validate(models, args.folds, args.seed, configs, lambda: provider, jobs=args.jobs)
    bio._write_text(args.out, rows_to_csv(rows, METRIC_COLUMNS))
    summary = summarize(rows)
    if args.summary:
        bio._write_text(args.summary, rows_to_csv(summary, list(summary[0]) if summary else []))
    for r in summary:
        stdout.write(
            f"{r['kind']:9} k={r['k'] or '-':>4} tau={r['tau'] or '-':>4} "
            f"tp={r['tp']:5} fp={r['fp']:5} fn={r['fn']:5} "
            f"precision={r['precision'] or 'n/a':>8} recall={r['recall'] or 'n/a':>8}\n"
        )


def cmd_review(args, stdin, stdout) -> None:
    selected, _, _ = bio.read_selection(args.selected)
    if stdin.isatty():
        stdout.write(HELP_TEXT)
    review = read_review(stdin, selected, stdout)
    bio.write_filter(review, args.out)


COMMANDS = {
    "mine": cmd_mine,
    "select": cmd_select,
    "check": cmd_check,
    "run": cmd_run,
    "evaluate": cmd_evaluate,
    "review": cmd_review,
}


def _check_paths(args) -> None:
    for name in ("models", "log", "constraints", "selected", "filter", "vectors", "synonyms"):
        path = getattr(args, name, None)
        if path is not None and not Path(path).exists():
            raise UsageError(f"--{name}: {path} does not exist")


def main(argv: Sequence[str] | None = None, stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _check_paths(args)
        COMMANDS[args.command](args, stdin, stdout)
    except UsageError as exc:
        print(f"bpcheck {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SimilarityServiceError as exc:
        print(f"bpcheck {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        print(f"bpcheck {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
