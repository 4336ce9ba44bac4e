"""Discourse-marker lexicon and cue/non-cue disambiguation.

The lexicon is a data-driven table (one JSON object per line) mapping each
marker to the focusing operations it tends to signal.  The bundled copy is
frozen to the inventory used for the replication runs; pass an alternative
file to experiment with additional markers.

Candidate-operation sets are priors for the classifier, never hard
constraints: the mappings are suggestive, not deterministic.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .focus import OpKind
from .jsonl import SCHEMA_VERSION, SchemaError, field, iter_jsonl, write_jsonl

TOKEN_CLASSES = ("cue_phrase", "acknowledgment", "filled_pause")
ORDINAL_RANKS = ("first", "subsequent")
RULES = ("position", "conjunction_test", "intonation", "none")

_STRIP = string.punctuation.replace("'", "").replace("-", "")


class MissingAnnotation(Exception):
    """A cue judgment was requested without the annotations it needs."""


def normalize(surface: str) -> str:
    """Lowercase and strip surrounding punctuation; inner ' and - survive."""
    return " ".join(part.strip(_STRIP) for part in surface.lower().split()).strip()


@dataclass(frozen=True)
class CueEntry:
    """One lexicon row.

    candidate_ops is the nonempty set of focusing operations the marker tends
    to signal.  ordinal_rank distinguishes first uses of ordinal phrases
    (which open a segment) from subsequent uses (which replace one).
    corpus_derived marks sets read off the observed distribution rather than
    the marker's conversational role.
    """

    surface: str
    gloss: str
    candidate_ops: frozenset[OpKind]
    ordinal_rank: str | None = None
    token_class: str = "cue_phrase"
    display: str = ""
    connective: bool = False
    corpus_derived: bool = False
    variants: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.candidate_ops:
            raise ValueError(f"entry {self.surface!r} has empty candidate_ops")
        if self.ordinal_rank is not None and self.ordinal_rank not in ORDINAL_RANKS:
            raise ValueError(f"entry {self.surface!r} has bad ordinal_rank")
        if self.token_class not in TOKEN_CLASSES:
            raise ValueError(f"entry {self.surface!r} has bad token_class")

    @property
    def n_words(self) -> int:
        return len(self.surface.split())

    def to_dict(self) -> dict:
        row = {
            "schema_version": SCHEMA_VERSION,
            "surface": self.surface,
            "gloss": self.gloss,
            "candidate_ops": sorted(op.value for op in self.candidate_ops),
            "token_class": self.token_class,
            "display": self.display,
        }
        if self.ordinal_rank:
            row["ordinal_rank"] = self.ordinal_rank
        if self.connective:
            row["connective"] = True
        if self.corpus_derived:
            row["corpus_derived"] = True
        if self.variants:
            row["variants"] = list(self.variants)
        return row


@dataclass(frozen=True)
class CueJudgment:
    """Outcome of the cue/non-cue cascade; rule_fired is ``none`` only when
    the judgment fell through to the positional default."""

    is_cue: bool
    rule_fired: str

    def __post_init__(self) -> None:
        if self.rule_fired not in RULES:
            raise ValueError(f"bad rule {self.rule_fired!r}")


@dataclass(frozen=True)
class CueContext:
    """Annotations available for judging one candidate span.

    utterance_initial is required.  coordination is only meaningful for the
    connectives (and, but); accents are the per-token accent labels of the
    span; own_intonational_phrase marks a span uttered as its own phrase.
    """

    utterance_initial: Optional[bool]
    coordination: Optional[bool] = None
    accents: Optional[tuple[str, ...]] = None
    own_intonational_phrase: Optional[bool] = None


class Lexicon:
    """In-memory marker table with exact and variant lookup."""

    def __init__(self, entries: Iterable[CueEntry]):
        self.entries = tuple(entries)
        self._index: dict[str, CueEntry] = {}
        for entry in self.entries:
            for form in (entry.surface, *entry.variants):
                key = normalize(form)
                if key in self._index:
                    raise ValueError(f"duplicate lexicon surface {key!r}")
                self._index[key] = entry
        self.max_words = max((len(k.split()) for k in self._index), default=1)

    def lookup(self, surface: str) -> CueEntry | None:
        """Exact lookup of a normalized surface form; None when absent."""
        return self._index.get(normalize(surface))

    def match_span(self, surfaces: Sequence[str], start: int) -> tuple[CueEntry, int] | None:
        """Longest lexicon match beginning at ``start``; returns (entry, n_tokens)."""
        limit = min(self.max_words, len(surfaces) - start)
        for width in range(limit, 0, -1):
            joined = " ".join(surfaces[start:start + width])
            entry = self.lookup(joined)
            if entry is not None:
                return entry, width
        return None

    def surfaces(self) -> frozenset[str]:
        return frozenset(normalize(e.surface) for e in self.entries)


def judge_cue_use(entry: CueEntry, context: CueContext) -> CueJudgment:
    """Cue/non-cue cascade for one candidate span.

    1. A candidate that is not utterance- or segment-initial is never a cue.
    2. An initial connective supplying syntactic coordination of two related
       propositions is a conjunction, not a cue.
    3. Otherwise the span is a cue if it is deaccented, carries only L*
       accents, or forms a complete intonational phrase.
    4. Default: non-connective markers in initial position count as cues;
       connectives without supporting annotation do not.
    """
    if context.utterance_initial is None:
        raise MissingAnnotation("utterance_initial flag is required")
    if not context.utterance_initial:
        return CueJudgment(is_cue=False, rule_fired="position")
    if entry.connective and context.coordination:
        return CueJudgment(is_cue=False, rule_fired="conjunction_test")

    accents = context.accents
    if accents:
        if all(a == "deaccented" for a in accents):
            return CueJudgment(is_cue=True, rule_fired="intonation")
        starred = [a for a in accents if a in ("Hstar", "Lstar")]
        if starred and all(a == "Lstar" for a in starred):
            return CueJudgment(is_cue=True, rule_fired="intonation")
    if context.own_intonational_phrase:
        return CueJudgment(is_cue=True, rule_fired="intonation")

    return CueJudgment(is_cue=not entry.connective, rule_fired="none")


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def _entry_from_row(obj: dict, *, line: int | None = None, path: str | None = None) -> CueEntry:
    surface = field(obj, "surface", str, line=line, path=path)
    ops_raw = field(obj, "candidate_ops", list, line=line, path=path)
    try:
        ops = frozenset(OpKind(name) for name in ops_raw)
    except ValueError as exc:
        raise SchemaError(f"bad candidate op in {surface!r}: {exc}", line=line, path=path) from None
    try:
        return CueEntry(
            surface=surface,
            gloss=field(obj, "gloss", str, line=line, path=path, optional=True, default=""),
            candidate_ops=ops,
            ordinal_rank=field(obj, "ordinal_rank", str, line=line, path=path,
                               optional=True, default=None),
            token_class=field(obj, "token_class", str, line=line, path=path,
                              optional=True, default="cue_phrase"),
            display=field(obj, "display", str, line=line, path=path,
                          optional=True, default="") or surface.capitalize(),
            connective=field(obj, "connective", bool, line=line, path=path,
                             optional=True, default=False),
            corpus_derived=field(obj, "corpus_derived", bool, line=line, path=path,
                                 optional=True, default=False),
            variants=tuple(field(obj, "variants", list, line=line, path=path,
                                 optional=True, default=[]) or []),
        )
    except ValueError as exc:
        raise SchemaError(str(exc), line=line, path=path) from exc


def load_lexicon(path: str | Path) -> Lexicon:
    entries = [_entry_from_row(obj, line=lineno, path=str(path))
               for lineno, obj in iter_jsonl(path)]
    if not entries:
        raise SchemaError("lexicon file holds no entries", path=str(path))
    return Lexicon(entries)


def write_lexicon(target, lexicon: Lexicon) -> None:
    write_jsonl(target, (entry.to_dict() for entry in lexicon.entries))


def bundled_lexicon() -> Lexicon:
    """The replication lexicon shipped with the package."""
    ref = resources.files("pausecue").joinpath("data/lexicon.jsonl")
    with resources.as_file(ref) as path:
        return load_lexicon(path)
