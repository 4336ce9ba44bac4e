"""Speech-fragment segmentation and per-fragment coding.

A transcript is a flat sequence of annotated tokens.  A new speech fragment
opens at every occurrence of one of five fragment-initial token classes: an
unfilled pause (reported at 0.1 s or more), a filled pause, a cue phrase, an
acknowledgment form, or (for the very first token) the unmarked case.  The
fragment runs until the next initial token, so the fragments partition the
transcript losslessly.

When several classes land on the same token, lexical marking wins over
silence: cue_phrase > acknowledgment > filled_pause > unfilled_pause.  A
fragment opened by a pause plus a cue phrase is a cue_phrase fragment whose
pause_before_s is the pause.

Coding assembles one record per fragment: the preceding pause, the initial
constituent, the co-occurring focusing operation, embedding depth, segments
affected, the annotator-supplied discourse functions of the neighboring
fragments, and turn position.  A fragment is marked when it begins with a
cue phrase, an acknowledgment form or a filled pause.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence, Union

from .focus import (FocusingOperation, FocusStack, OpKind, apply,
                    LinguisticTree, segments_affected)
from .jsonl import SCHEMA_VERSION, SchemaError, field, iter_jsonl, write_jsonl
from .lexicon import CueContext, CueEntry, Lexicon, bundled_lexicon, judge_cue_use, normalize
from .pauses import PauseRecord, round_tenth

ACCENTS = ("Hstar", "Lstar", "deaccented", "unmarked")
BOUNDARIES = ("none", "fall", "continuation_rise")
PHONATIONS = ("normal", "creaky")
PITCH_RANGES = ("normal", "expanded", "reduced")
TOKEN_FLAGS = ("coordination", "nonpronominal_repetition",
               "own_intonational_phrase", "turn_initial")

INITIAL_CLASSES = ("unfilled_pause", "filled_pause", "cue_phrase",
                   "acknowledgment", "unmarked")
CONSTITUENTS = ("cue_phrase", "acknowledgment", "filled_pause", "unmarked")
FUNCTION_LABELS = ("cue_phrase", "acknowledgment", "closure", "filled_pause",
                   "repair", "topical")
TURN_POSITIONS = ("initiating", "continuing")

#: Pause-to-token alignment tolerance in seconds.
ALIGN_TOL = 0.05


class EmptyTranscript(Exception):
    """fragmentize was handed no tokens."""


class MisalignedPause(Exception):
    """A pause record does not land on any token gap."""


class LengthMismatch(Exception):
    """Fragments and operations differ in length."""


@dataclass
class AnnotatedToken:
    """One transcript token with its prosodic annotations.

    pause_before_s is the annotated silent interval preceding the token.
    topic is an optional annotator-supplied topic id used when resolving how
    far a Return or Replace pops.  start_s/end_s are optional timings used
    to align separately detected pause records.
    """

    surface: str
    speaker: str = "A"
    accent: str = "unmarked"
    boundary: str = "none"
    phonation: str = "normal"
    pitch_range: str = "normal"
    pause_before_s: float = 0.0
    flags: frozenset[str] = frozenset()
    topic: str = ""
    start_s: float | None = None
    end_s: float | None = None

    def __post_init__(self) -> None:
        if self.accent not in ACCENTS:
            raise ValueError(f"bad accent {self.accent!r}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"bad boundary {self.boundary!r}")
        if self.phonation not in PHONATIONS:
            raise ValueError(f"bad phonation {self.phonation!r}")
        if self.pitch_range not in PITCH_RANGES:
            raise ValueError(f"bad pitch_range {self.pitch_range!r}")
        if self.pause_before_s < 0:
            raise ValueError("pause_before_s must be >= 0")
        self.flags = frozenset(self.flags)
        unknown = self.flags - set(TOKEN_FLAGS)
        if unknown:
            raise ValueError(f"unknown flags {sorted(unknown)}")

    def to_dict(self) -> dict:
        row = {
            "schema_version": SCHEMA_VERSION,
            "surface": self.surface,
            "speaker": self.speaker,
            "accent": self.accent,
            "boundary": self.boundary,
            "phonation": self.phonation,
            "pitch_range": self.pitch_range,
            "pause_before_s": self.pause_before_s,
            "flags": sorted(self.flags),
        }
        if self.topic:
            row["topic"] = self.topic
        if self.start_s is not None:
            row["start_s"] = self.start_s
        if self.end_s is not None:
            row["end_s"] = self.end_s
        return row


@dataclass
class SpeechFragment:
    """A token span opened by one fragment-initial token."""

    index: int
    speaker: str
    tokens: tuple[AnnotatedToken, ...]
    initial_token_class: str
    initial_cue: CueEntry | None
    pause_before_s: float

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("fragment must hold at least one token")
        if self.initial_token_class not in INITIAL_CLASSES:
            raise ValueError(f"bad initial class {self.initial_token_class!r}")

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(tok.surface for tok in self.tokens)

    @property
    def topic(self) -> str:
        for tok in self.tokens:
            if tok.topic:
                return tok.topic
        return ""

    @property
    def final_boundary(self) -> str:
        return self.tokens[-1].boundary


@dataclass
class CodedRecord:
    """The per-fragment coding row used for statistics.

    initial_token carries the display label of the opening marker (for
    example "And" or "Filled Pause") so token-level tables can be rebuilt;
    it is empty for unmarked fragments.  pause_before_s of None means the
    pause was never measured; such records are excluded from statistics.
    """

    fragment_index: int
    pause_before_s: float | None
    initial_constituent: str
    operation: FocusingOperation
    embedding_depth: int
    segments_affected: int
    prior_function: str
    subsequent_function: str
    turn_position: str
    marked: bool
    initial_token: str = ""

    def __post_init__(self) -> None:
        if self.initial_constituent not in CONSTITUENTS:
            raise ValueError(f"bad constituent {self.initial_constituent!r}")
        if self.prior_function not in FUNCTION_LABELS:
            raise ValueError(f"bad prior_function {self.prior_function!r}")
        if self.subsequent_function not in FUNCTION_LABELS:
            raise ValueError(f"bad subsequent_function {self.subsequent_function!r}")
        if self.turn_position not in TURN_POSITIONS:
            raise ValueError(f"bad turn_position {self.turn_position!r}")
        if self.embedding_depth < 1:
            raise ValueError("embedding_depth must be >= 1")

    def row_label(self) -> str:
        """Display row used by token-level tables."""
        if self.initial_constituent == "cue_phrase":
            return self.initial_token or "Cue"
        return {"acknowledgment": "Acknowledgment",
                "filled_pause": "Filled Pause",
                "unmarked": "Unmarked"}[self.initial_constituent]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "fragment_index": self.fragment_index,
            "pause_before_s": self.pause_before_s,
            "initial_constituent": self.initial_constituent,
            "initial_token": self.initial_token,
            "operation": {"kind": self.operation.kind.value,
                          "pops": self.operation.pop_count},
            "embedding_depth": self.embedding_depth,
            "segments_affected": self.segments_affected,
            "prior_function": self.prior_function,
            "subsequent_function": self.subsequent_function,
            "turn_position": self.turn_position,
            "marked": self.marked,
        }


# ---------------------------------------------------------------------------
# Fragmentation
# ---------------------------------------------------------------------------

def _align_pauses(tokens: Sequence[AnnotatedToken],
                  pauses: Sequence[PauseRecord]) -> dict[int, PauseRecord]:
    """Map each pause record to the token gap it precedes.

    Alignment needs token timings; a pause whose end matches no token start
    within ALIGN_TOL is misaligned and reported with the nearest token.
    """
    timed = [tok.start_s for tok in tokens]
    if any(t is None for t in timed):
        raise MisalignedPause("tokens carry no start_s timing; "
                              "cannot align detected pauses")
    aligned: dict[int, PauseRecord] = {}
    for pause in pauses:
        best_i = min(range(len(tokens)), key=lambda i: abs(pause.end_s - timed[i]))
        if abs(pause.end_s - timed[best_i]) <= ALIGN_TOL:
            aligned[best_i] = pause
            continue
        nearest = min(range(len(tokens)),
                      key=lambda i: min(abs(pause.start_s - timed[i]),
                                        abs(pause.end_s - timed[i])))
        raise MisalignedPause(
            f"pause at {pause.start_s:.3f}s ({pause.raw_duration_s:.3f}s) matches no "
            f"token gap; nearest token is {tokens[nearest].surface!r} "
            f"(index {nearest}, start {timed[nearest]:.3f}s)")
    return aligned


def _at_boundary(tokens: Sequence[AnnotatedToken], i: int,
                 pause_before: Sequence[float]) -> bool:
    """Operational utterance/segment-initial test for position ``i``."""
    if i == 0 or "turn_initial" in tokens[i].flags:
        return True
    if tokens[i - 1].boundary != "none":
        return True
    return round_tenth(pause_before[i]) >= 0.1


def _classify_position(tokens: Sequence[AnnotatedToken], i: int,
                       surfaces: Sequence[str], pause_before: Sequence[float],
                       lexicon: Lexicon) -> tuple[str | None, CueEntry | None, int]:
    """Initial-token class firing at position ``i``: (class, entry, span width)."""
    boundary = _at_boundary(tokens, i, pause_before)
    match = lexicon.match_span(surfaces, i)
    if match is not None:
        entry, width = match
        if entry.token_class == "cue_phrase":
            span = tokens[i:i + width]
            context = CueContext(
                utterance_initial=boundary,
                coordination="coordination" in tokens[i].flags,
                accents=tuple(tok.accent for tok in span),
                own_intonational_phrase="own_intonational_phrase" in tokens[i].flags,
            )
            if judge_cue_use(entry, context).is_cue:
                return "cue_phrase", entry, width
        elif entry.token_class == "acknowledgment":
            if boundary:
                return "acknowledgment", entry, width
        elif entry.token_class == "filled_pause":
            # Hesitation fillers have no non-hesitation reading, so they
            # open a fragment wherever they occur.
            return "filled_pause", entry, width
    if round_tenth(pause_before[i]) >= 0.1:
        return "unfilled_pause", None, 1
    return None, None, 1


def fragmentize(transcript: Sequence[AnnotatedToken],
                pauses: Sequence[PauseRecord] | None = None,
                lexicon: Lexicon | None = None) -> list[SpeechFragment]:
    """Partition a transcript into speech fragments.

    Detected pause records, when given, are aligned to token gaps by timing
    and override the tokens' annotated pause_before_s at the aligned gaps.
    """
    if not transcript:
        raise EmptyTranscript("transcript holds no tokens")
    lexicon = lexicon or bundled_lexicon()

    pause_before = [tok.pause_before_s for tok in transcript]
    if pauses:
        for i, record in _align_pauses(transcript, pauses).items():
            pause_before[i] = record.reported_duration_s

    surfaces = [normalize(tok.surface) for tok in transcript]
    starts: list[tuple[int, str, CueEntry | None]] = []
    for i in range(len(transcript)):
        cls, entry, _ = _classify_position(transcript, i, surfaces, pause_before, lexicon)
        if i == 0:
            starts.append((0, cls or "unmarked", entry))
        elif cls is not None:
            starts.append((i, cls, entry))

    fragments: list[SpeechFragment] = []
    for k, (start, cls, entry) in enumerate(starts):
        end = starts[k + 1][0] if k + 1 < len(starts) else len(transcript)
        tokens = tuple(transcript[start:end])
        fragments.append(SpeechFragment(
            index=k,
            speaker=tokens[0].speaker,
            tokens=tokens,
            initial_token_class=cls,
            initial_cue=entry,
            pause_before_s=pause_before[start],
        ))
    return fragments


def fragments_to_tokens(fragments: Sequence[SpeechFragment]) -> list[AnnotatedToken]:
    """Flatten fragments back to a token sequence.

    Fragment-initial tokens carry the fragment's effective preceding pause,
    so re-running fragmentize on the result reproduces the same fragments.
    """
    tokens: list[AnnotatedToken] = []
    for frag in fragments:
        for j, tok in enumerate(frag.tokens):
            if j == 0 and tok.pause_before_s != frag.pause_before_s:
                tok = AnnotatedToken(**{**_token_fields(tok),
                                        "pause_before_s": frag.pause_before_s})
            tokens.append(tok)
    return tokens


def _token_fields(tok: AnnotatedToken) -> dict:
    return {
        "surface": tok.surface, "speaker": tok.speaker, "accent": tok.accent,
        "boundary": tok.boundary, "phonation": tok.phonation,
        "pitch_range": tok.pitch_range, "pause_before_s": tok.pause_before_s,
        "flags": tok.flags, "topic": tok.topic,
        "start_s": tok.start_s, "end_s": tok.end_s,
    }


# ---------------------------------------------------------------------------
# Coding
# ---------------------------------------------------------------------------

_CLASS_TO_CONSTITUENT = {
    "cue_phrase": "cue_phrase",
    "acknowledgment": "acknowledgment",
    "filled_pause": "filled_pause",
    "unfilled_pause": "unmarked",   # silence alone leaves a fragment unmarked
    "unmarked": "unmarked",
}


def code(fragments: Sequence[SpeechFragment],
         ops: Sequence[FocusingOperation],
         tree: LinguisticTree,
         functions: Sequence[tuple[str, str]] | None = None,
         turns: Mapping[int, str] | None = None) -> list[CodedRecord]:
    """Assemble one CodedRecord per fragment.

    ops must be the fragment-aligned focusing operations (one each); the
    stack is replayed to recover the embedding depth at each fragment.
    prior/subsequent discourse functions are annotator-supplied and default
    to topical.  Turn position derives from speaker change unless overridden
    through ``turns``.
    """
    if len(fragments) != len(ops):
        raise LengthMismatch(f"{len(fragments)} fragments vs {len(ops)} operations")
    if len(tree.op_affected) != len(ops):
        raise LengthMismatch(f"tree replays {len(tree.op_affected)} operations, "
                             f"got {len(ops)}")
    if functions is not None and len(functions) != len(fragments):
        raise LengthMismatch(f"{len(fragments)} fragments vs {len(functions)} function labels")

    records: list[CodedRecord] = []
    stack = FocusStack.empty()
    for i, (frag, op) in enumerate(zip(fragments, ops)):
        affected = segments_affected(op)
        if tree.op_affected[i] != affected:
            raise LengthMismatch(f"operation {i} disagrees with the supplied tree "
                                 f"({affected} vs {tree.op_affected[i]} segments)")
        stack = apply(stack, op, i, label=frag.topic or f"fragment-{i}")
        # A discourse-final Return can empty the stack; the fragment then
        # operates at the level of the segment it just closed.
        depth = max(1, stack.depth)

        prior_fn, subsequent_fn = ("topical", "topical")
        if functions is not None:
            prior_fn, subsequent_fn = functions[i]

        if turns is not None and i in turns:
            turn = turns[i]
        elif i == 0 or frag.speaker != fragments[i - 1].speaker \
                or "turn_initial" in frag.tokens[0].flags:
            turn = "initiating"
        else:
            turn = "continuing"

        constituent = _CLASS_TO_CONSTITUENT[frag.initial_token_class]
        records.append(CodedRecord(
            fragment_index=i,
            pause_before_s=frag.pause_before_s,
            initial_constituent=constituent,
            initial_token=(frag.initial_cue.display if frag.initial_cue is not None
                           and constituent != "unmarked" else ""),
            operation=op,
            embedding_depth=depth,
            segments_affected=affected,
            prior_function=prior_fn,
            subsequent_function=subsequent_fn,
            turn_position=turn,
            marked=constituent != "unmarked",
        ))
    return records


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def read_transcript(path: str | Path) -> list[AnnotatedToken]:
    tokens = []
    for lineno, obj in iter_jsonl(path):
        try:
            tokens.append(AnnotatedToken(
                surface=field(obj, "surface", str, line=lineno, path=str(path)),
                speaker=field(obj, "speaker", str, line=lineno, path=str(path),
                              optional=True, default="A"),
                accent=field(obj, "accent", str, line=lineno, path=str(path),
                             optional=True, default="unmarked"),
                boundary=field(obj, "boundary", str, line=lineno, path=str(path),
                               optional=True, default="none"),
                phonation=field(obj, "phonation", str, line=lineno, path=str(path),
                                optional=True, default="normal"),
                pitch_range=field(obj, "pitch_range", str, line=lineno, path=str(path),
                                  optional=True, default="normal"),
                pause_before_s=field(obj, "pause_before_s", float, line=lineno,
                                     path=str(path), optional=True, default=0.0),
                flags=frozenset(field(obj, "flags", list, line=lineno, path=str(path),
                                      optional=True, default=[]) or []),
                topic=field(obj, "topic", str, line=lineno, path=str(path),
                            optional=True, default=""),
                start_s=field(obj, "start_s", float, line=lineno, path=str(path),
                              optional=True, default=None),
                end_s=field(obj, "end_s", float, line=lineno, path=str(path),
                            optional=True, default=None),
            ))
        except ValueError as exc:
            raise SchemaError(str(exc), line=lineno, path=str(path)) from exc
    return tokens


def write_transcript(target: Union[str, Path, IO[str]],
                     tokens: Iterable[AnnotatedToken]) -> None:
    write_jsonl(target, (tok.to_dict() for tok in tokens))


def read_coded(path: str | Path) -> list[CodedRecord]:
    records = []
    for lineno, obj in iter_jsonl(path):
        op_obj = field(obj, "operation", dict, line=lineno, path=str(path))
        kind_name = field(op_obj, "kind", str, line=lineno, path=str(path))
        try:
            kind = OpKind(kind_name)
        except ValueError:
            raise SchemaError(f"unknown operation kind {kind_name!r}",
                              line=lineno, path=str(path)) from None
        op = FocusingOperation(kind, field(op_obj, "pops", int, line=lineno,
                                           path=str(path), optional=True, default=0))
        pause = obj.get("pause_before_s", None)
        if pause is not None and not isinstance(pause, (int, float)):
            raise SchemaError("pause_before_s must be a number or null",
                              line=lineno, path=str(path))
        try:
            record = CodedRecord(
                fragment_index=field(obj, "fragment_index", int, line=lineno, path=str(path)),
                pause_before_s=float(pause) if pause is not None else None,
                initial_constituent=field(obj, "initial_constituent", str,
                                          line=lineno, path=str(path)),
                initial_token=field(obj, "initial_token", str, line=lineno,
                                    path=str(path), optional=True, default=""),
                operation=op,
                embedding_depth=field(obj, "embedding_depth", int, line=lineno, path=str(path)),
                segments_affected=field(obj, "segments_affected", int,
                                        line=lineno, path=str(path)),
                prior_function=field(obj, "prior_function", str, line=lineno, path=str(path),
                                     optional=True, default="topical"),
                subsequent_function=field(obj, "subsequent_function", str, line=lineno,
                                          path=str(path), optional=True, default="topical"),
                turn_position=field(obj, "turn_position", str, line=lineno, path=str(path),
                                    optional=True, default="continuing"),
                marked=field(obj, "marked", bool, line=lineno, path=str(path),
                             optional=True,
                             default=obj.get("initial_constituent") != "unmarked"),
            )
        except ValueError as exc:
            raise SchemaError(str(exc), line=lineno, path=str(path)) from exc
        if record.segments_affected != segments_affected(op):
            raise SchemaError(
                f"segments_affected {record.segments_affected} inconsistent with "
                f"{op.kind.value}({op.pop_count})", line=lineno, path=str(path))
        records.append(record)
    return records


def write_coded(target: Union[str, Path, IO[str]], records: Iterable[CodedRecord]) -> None:
    write_jsonl(target, (rec.to_dict() for rec in records))


#: Column order of the spreadsheet mirror: the nine coded fields.
TSV_COLUMNS = ("fragment_index", "pause_before_s", "initial_constituent",
               "operation", "embedding_depth", "segments_affected",
               "prior_function", "subsequent_function", "turn_position")


def write_coded_tsv(target: Union[str, Path, IO[str]],
                    records: Iterable[CodedRecord]) -> None:
    """Tab-separated mirror of the coded records for spreadsheet inspection."""
    def rows():
        yield "\t".join(TSV_COLUMNS) + "\n"
        for rec in records:
            op = rec.operation.kind.value
            if rec.operation.pop_count:
                op += f"({rec.operation.pop_count})"
            pause = "" if rec.pause_before_s is None else f"{rec.pause_before_s:g}"
            yield "\t".join([str(rec.fragment_index), pause, rec.initial_constituent,
                             op, str(rec.embedding_depth), str(rec.segments_affected),
                             rec.prior_function, rec.subsequent_function,
                             rec.turn_position]) + "\n"

    if hasattr(target, "write"):
        for row in rows():
            target.write(row)  # type: ignore[union-attr]
        return
    with open(target, "w", encoding="utf-8") as fp:  # type: ignore[arg-type]
        for row in rows():
            fp.write(row)
