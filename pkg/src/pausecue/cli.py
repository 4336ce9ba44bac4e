"""Command-line front end.

Subcommands: ``pauses`` (detect unfilled pauses in a WAV file), ``code``
(fragment and code an annotated transcript), ``segment`` (classify focusing
operations and print the segment tree), ``stats`` (regenerate the tables and
tests from coded records) and ``replicate`` (run the published-table checks
on the bundled corpus).

Exit codes: 0 success, 1 I/O failure, 2 input or schema error.  All outputs
are deterministic given the same inputs and flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import classifier, fragments, pauses, replication, report
from .focus import FocusEngineError, write_trace
from .jsonl import SchemaError
from .lexicon import Lexicon, MissingAnnotation, bundled_lexicon, load_lexicon
from .stats import compute_report

EXIT_OK = 0
EXIT_IO = 1
EXIT_INPUT = 2

_INPUT_ERRORS = (SchemaError, pauses.UnsupportedFormat, fragments.EmptyTranscript,
                 fragments.MisalignedPause, fragments.LengthMismatch,
                 MissingAnnotation, FocusEngineError, ValueError)


def _lexicon_from(args: argparse.Namespace) -> Lexicon:
    if getattr(args, "lexicon", None):
        return load_lexicon(args.lexicon)
    return bundled_lexicon()


def _config_from(args: argparse.Namespace) -> classifier.ClassifierConfig:
    if getattr(args, "weights", None):
        return classifier.load_weights(args.weights)
    return classifier.DEFAULT_CONFIG


def _read_functions(path: str | None, n: int) -> list[tuple[str, str]] | None:
    if path is None:
        return None
    from .jsonl import field, iter_jsonl
    labels = [("topical", "topical")] * n
    for lineno, obj in iter_jsonl(path):
        i = field(obj, "fragment_index", int, line=lineno, path=path)
        if not 0 <= i < n:
            raise SchemaError(f"fragment_index {i} out of range", line=lineno, path=path)
        labels[i] = (field(obj, "prior", str, line=lineno, path=path,
                           optional=True, default="topical"),
                     field(obj, "subsequent", str, line=lineno, path=path,
                           optional=True, default="topical"))
    return labels


def _out_dir(args: argparse.Namespace) -> Path:
    directory = Path(getattr(args, "out", None) or ".")
    directory.mkdir(parents=True, exist_ok=True)
    return directory


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_pauses(args: argparse.Namespace) -> int:
    samples, rate = pauses.read_wav(args.wav)
    config = pauses.PauseConfig(threshold_db=args.threshold_db,
                                min_silence_s=args.min_silence,
                                frame_ms=args.frame_ms)
    frames = pauses.frame_energy(samples, rate, frame_ms=config.frame_ms)
    records = pauses.detect_pauses(frames, config=config)

    if args.out == "-":
        pauses.write_pauses(sys.stdout, records)
        summary_fp = sys.stderr
    else:
        out_path = _out_dir(args) / (Path(args.wav).stem + ".pauses.jsonl")
        pauses.write_pauses(out_path, records)
        print(f"wrote {out_path}")
        summary_fp = sys.stdout
    mean = sum(r.reported_duration_s for r in records) / len(records) if records else 0.0
    print(f"pauses: {len(records)}  mean reported duration: {mean:.2f} s  "
          f"(threshold_db={config.threshold_db:g} min_silence={config.min_silence_s:g} "
          f"frame_ms={config.frame_ms:g})", file=summary_fp)
    return EXIT_OK


def _segment_pipeline(args: argparse.Namespace):
    tokens = fragments.read_transcript(args.transcript)
    pause_records = pauses.read_pauses(args.pauses) if getattr(args, "pauses", None) else None
    frags = fragments.fragmentize(tokens, pause_records, _lexicon_from(args))
    functions = _read_functions(getattr(args, "functions", None), len(frags))
    result = classifier.segment_discourse(frags, functions=functions,
                                          config=_config_from(args))
    return frags, functions, result


def cmd_segment(args: argparse.Namespace) -> int:
    frags, _, result = _segment_pipeline(args)
    stem = Path(args.transcript).stem
    directory = _out_dir(args)
    write_trace(directory / f"{stem}.trace.jsonl", result.trace)
    classifier.write_audit(directory / f"{stem}.audit.jsonl", result.classifications)
    rendering = result.tree.render()
    (directory / f"{stem}.tree.txt").write_text(rendering + "\n", encoding="utf-8")
    print(rendering)
    flagged = sum(1 for c in result.classifications if c.low_confidence)
    print(f"fragments: {len(frags)}  low-confidence classifications: {flagged}",
          file=sys.stderr)
    return EXIT_OK


def cmd_code(args: argparse.Namespace) -> int:
    frags, functions, result = _segment_pipeline(args)
    ops = [op for op, _ in result.trace]
    records = fragments.code(frags, ops, result.tree, functions=functions)
    stem = Path(args.transcript).stem
    directory = _out_dir(args)
    coded_path = directory / f"{stem}.coded.jsonl"
    fragments.write_coded(coded_path, records)
    fragments.write_coded_tsv(directory / f"{stem}.coded.tsv", records)
    print(f"wrote {coded_path} and {coded_path.with_suffix('.tsv')}")
    marked = sum(1 for rec in records if rec.marked)
    print(f"fragments: {len(records)}  marked: {marked}  unmarked: {len(records) - marked}",
          file=sys.stderr)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    records = fragments.read_coded(args.coded)
    if not records:
        raise SchemaError("no records in input", path=str(args.coded))
    pause_records = pauses.read_pauses(args.pauses) if args.pauses else None
    config_note = (f"input={args.coded} pauses={args.pauses or 'none'} "
                   f"format={args.format}")
    stats_report = compute_report(records, pause_records, config_note=config_note)
    text = (report.render_json(stats_report) if args.format == "json"
            else report.render_text(stats_report))
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_replicate(args: argparse.Namespace) -> int:
    try:
        records, pause_records = replication.load_bundled(args.corpus)
    except FileNotFoundError as exc:
        print(f"error: replication corpus not found: {exc}", file=sys.stderr)
        return EXIT_INPUT
    checks = replication.run_checks(records, pause_records)
    print(f"replication checks on {'bundled corpus' if args.corpus is None else args.corpus} "
          f"({len(records)} records, {len(pause_records)} pauses)")
    failed = 0
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        failed += 0 if check.passed else 1
        print(f"{status} {check.name}: {check.detail}")
    print(f"{len(checks) - failed} passed, {failed} failed")
    return EXIT_OK if failed == 0 else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pausecue",
        description="Segment annotated spoken transcripts with a focus-space stack, "
                    "measure unfilled pauses, and regenerate the published statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pauses", help="detect unfilled pauses in a mono PCM WAV file")
    p.add_argument("wav")
    p.add_argument("--out", default=".", help="output directory, or - for stdout")
    p.add_argument("--threshold-db", type=float, default=10.0,
                   help="threshold above the noise floor in dB (default 10)")
    p.add_argument("--min-silence", type=float, default=0.05,
                   help="minimum silence to report, seconds (default 0.05)")
    p.add_argument("--frame-ms", type=float, default=10.0,
                   help="analysis frame length in ms (default 10)")
    p.set_defaults(func=cmd_pauses)

    for name, help_text, func in (
            ("segment", "classify focusing operations and print the segment tree",
             cmd_segment),
            ("code", "fragment a transcript and write coded records", cmd_code)):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("transcript")
        p.add_argument("--pauses", default=None, help="detected pause JSONL to align")
        p.add_argument("--functions", default=None,
                       help="annotator prior/subsequent function labels (JSONL)")
        p.add_argument("--lexicon", default=None, help="alternative marker lexicon")
        p.add_argument("--weights", default=None, help="classifier weight config file")
        p.add_argument("--out", default=".", help="output directory")
        p.set_defaults(func=func)

    p = sub.add_parser("stats", help="regenerate tables and tests from coded records")
    p.add_argument("coded")
    p.add_argument("--pauses", default=None,
                   help="measured pause inventory for the duration histogram")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None, help="output file, or - for stdout")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("replicate", help="check the bundled corpus against the "
                                         "published tables")
    p.add_argument("--corpus", default=None,
                   help="directory holding replication_records.jsonl and "
                        "replication_pauses.jsonl (default: bundled)")
    p.set_defaults(func=cmd_replicate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
