"""Parse generated event sequences and align every surface back to offsets.

Model output is untrusted: the parser keeps every grammar-conforming event and
turns everything else into DecodeIssue records, never exceptions. Alignment
resolves each trigger surface to the leftmost occurrence in the source text
not already consumed by an earlier trigger with the same surface, and each
argument surface to the occurrence whose midpoint lies nearest the trigger
span midpoint (ties go leftmost). Distances between span midpoints are
measured in characters.

Matching is exact on Unicode scalars after collapsing whitespace runs on both
sides. With ``lenient=True`` two fallback passes run for surfaces that failed
strict matching: one folding case and accents (``cafe`` finds ``café``) and
one additionally dropping accented characters altogether (``cocane`` finds
``cocaïne``), which recovers tokenizer-induced accent damage. Strict mode is
the default and reproduces plain substring alignment.

Issue kinds:

- MalformedOutput: fragment that does not follow the sequence grammar
- UnknownLabel: bracketed token that is not in the schema
- UnalignedTrigger: trigger surface not found; the event is dropped
- UnalignedArgument: argument surface not found; the argument is dropped
  (a status keeps its value but loses its anchor)
- DuplicateExhausted: a surface matched more locations than could be
  disambiguated, or every occurrence was already consumed (event dropped);
  the payload states which
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field

from .brat import Document, DocumentAnnotation, AttributeAnnotation, EntityAnnotation, RelationAnnotation, Span
from .labels import (
    ARGUMENT_LABEL_BY_KIND,
    STATUS_VALUES,
    SUBSTANCE_LABELS,
    TRIGGER_LABELS,
    RelationKind,
    SchemaLabel,
)
from .linearize import NONE_TOKEN
from .schema import SdohEvent

ISSUE_KINDS = (
    "MalformedOutput",
    "UnknownLabel",
    "UnalignedTrigger",
    "UnalignedArgument",
    "DuplicateExhausted",
)


@dataclass(frozen=True)
class DecodeIssue:
    doc_id: str
    kind: str
    payload: str


@dataclass
class RawEvent:
    """A grammar-level event whose offsets are not yet resolved."""

    label: SchemaLabel
    trigger_surface: str
    status_value: str | None = None
    status_surface: str | None = None
    args: list[tuple[RelationKind, str]] = field(default_factory=list)


_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")
_TRIGGER_BY_VALUE = {label.value: label for label in TRIGGER_LABELS}
_KIND_BY_VALUE = {kind.value: kind for kind in RelationKind if kind is not RelationKind.STATUS}


def _collapse_ws(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def parse_sequence(generated: str, doc_id: str = "") -> tuple[list[RawEvent], list[DecodeIssue]]:
    """Maximal prefix-tolerant parse of a generated sequence.

    Grammar-conforming events are kept; every skipped fragment is accounted
    for by exactly one issue. The "[NONE]" sentinel yields ``([], [])``.
    """
    events: list[RawEvent] = []
    issues: list[DecodeIssue] = []

    if _collapse_ws(generated) in ("", NONE_TOKEN):
        return events, issues

    def malformed(payload: str) -> None:
        issues.append(DecodeIssue(doc_id, "MalformedOutput", payload))

    brackets = list(_BRACKET_RE.finditer(generated))
    if not brackets:
        malformed(_collapse_ws(generated))
        return events, issues

    leading = _collapse_ws(generated[: brackets[0].start()])
    if leading:
        malformed(leading)

    current: RawEvent | None = None
    skip_start: int | None = None  # offset where a poisoned fragment began
    skip_kind = ""

    def flush_skip(upto: int) -> None:
        nonlocal skip_start
        if skip_start is not None:
            issues.append(DecodeIssue(doc_id, skip_kind, _collapse_ws(generated[skip_start:upto])))
            skip_start = None

    def flush_event() -> None:
        nonlocal current
        if current is not None:
            events.append(current)
            current = None

    for index, match in enumerate(brackets):
        content = match.group(1)
        next_start = brackets[index + 1].start() if index + 1 < len(brackets) else len(generated)
        following = _collapse_ws(generated[match.end() : next_start])

        if content in _TRIGGER_BY_VALUE:
            flush_skip(match.start())
            flush_event()
            if not following:
                skip_start, skip_kind = match.start(), "MalformedOutput"
            else:
                current = RawEvent(_TRIGGER_BY_VALUE[content], following)
            continue
        if content == "SEP":
            flush_skip(match.start())
            flush_event()
            if following:
                malformed(following)
            continue
        if skip_start is not None:
            continue  # fragment keeps growing until the next event boundary

        fragment = _collapse_ws(f"[{content}] {following}")
        if content.startswith("StatusTime"):
            value = content.partition(":")[2]
            if (
                current is None
                or value not in STATUS_VALUES
                or current.label not in SUBSTANCE_LABELS
                or current.status_value is not None
            ):
                malformed(fragment)
            else:
                current.status_value = value
                current.status_surface = following or None
            continue
        if content in _KIND_BY_VALUE:
            if current is None or not following:
                malformed(fragment)
            else:
                current.args.append((_KIND_BY_VALUE[content], following))
            continue
        if content == "NONE":
            malformed(fragment)
            continue
        # Unknown bracket: poisons the rest of its event, or just itself when
        # it sits at argument position inside a healthy event.
        if current is None:
            skip_start, skip_kind = match.start(), "UnknownLabel"
        else:
            issues.append(DecodeIssue(doc_id, "UnknownLabel", fragment))

    flush_skip(len(generated))
    flush_event()
    return events, issues


def _identity_fold(char: str) -> str:
    return char


def _deaccent_fold(char: str) -> str:
    decomposed = unicodedata.normalize("NFKD", char)
    return "".join(c for c in decomposed if not unicodedata.combining(c)).casefold()


def _dropaccent_fold(char: str) -> str:
    decomposed = unicodedata.normalize("NFKD", char)
    if any(unicodedata.combining(c) for c in decomposed):
        return ""
    return char.casefold()


class _SearchText:
    """A folded view of the document with a map back to original offsets."""

    def __init__(self, text: str, fold):
        self.fold = fold
        chars: list[str] = []
        origin: list[int] = []
        for position, char in enumerate(text):
            for folded in fold(char):
                chars.append(folded)
                origin.append(position)
        self.text = "".join(chars)
        self.origin = origin

    def occurrences(self, surface: str) -> list[Span]:
        """All (possibly overlapping) matches of the surface, leftmost first."""
        tokens = "".join(self.fold(c) for c in surface).split()
        if not tokens:
            return []
        pattern = r"\s+".join(re.escape(token) for token in tokens)
        spans: list[Span] = []
        seen: set[tuple[int, int]] = set()
        for match in re.finditer(rf"(?=({pattern}))", self.text):
            start, end = match.start(1), match.end(1)
            span = (self.origin[start], self.origin[end - 1] + 1)
            if span not in seen:
                seen.add(span)
                spans.append(Span(*span))
        return spans


class _Aligner:
    def __init__(self, doc: Document, lenient: bool):
        folds = [_identity_fold] + ([_deaccent_fold, _dropaccent_fold] if lenient else [])
        self.views = [_SearchText(doc.text, fold) for fold in folds]

    def find(self, surface: str) -> list[Span]:
        for view in self.views:
            spans = view.occurrences(surface)
            if spans:
                return spans
        return []


def align(
    doc: Document, raw_events: list[RawEvent], lenient: bool = False
) -> tuple[list[SdohEvent], list[DecodeIssue]]:
    """Resolve parsed events to character offsets in the source document.

    Events whose trigger cannot be placed are dropped; unplaceable arguments
    are dropped from an otherwise surviving event. Surfaces that matched more
    locations than the rules could disambiguate additionally produce a
    DuplicateExhausted diagnostic so ambiguous alignments are never silent.
    """
    aligner = _Aligner(doc, lenient)
    issues: list[DecodeIssue] = []
    consumed: dict[str, set[tuple[int, int]]] = {}
    trigger_demand: dict[str, int] = {}
    events: list[SdohEvent] = []
    entity_count = 0

    def make_entity(label: SchemaLabel, span: Span) -> EntityAnnotation:
        nonlocal entity_count
        entity_count += 1
        return EntityAnnotation(f"T{entity_count}", label, (span,), doc.text[span.start : span.end])

    def nearest(spans: list[Span], anchor: Span) -> Span:
        return min(spans, key=lambda s: (abs(s.midpoint - anchor.midpoint), s.start, s.end))

    for raw in raw_events:
        occurrences = aligner.find(raw.trigger_surface)
        if not occurrences:
            issues.append(DecodeIssue(doc.id, "UnalignedTrigger", raw.trigger_surface))
            continue
        used = consumed.setdefault(raw.trigger_surface, set())
        trigger_demand[raw.trigger_surface] = trigger_demand.get(raw.trigger_surface, 0) + 1
        trigger_span = next(
            (span for span in occurrences if (span.start, span.end) not in used), None
        )
        if trigger_span is None:
            issues.append(
                DecodeIssue(
                    doc.id,
                    "DuplicateExhausted",
                    f"all {len(occurrences)} occurrences of {raw.trigger_surface!r} already consumed",
                )
            )
            continue
        used.add((trigger_span.start, trigger_span.end))
        trigger = make_entity(raw.label, trigger_span)

        args: list[tuple[RelationKind, EntityAnnotation]] = []

        def place_argument(kind: RelationKind, surface: str) -> EntityAnnotation | None:
            spans = aligner.find(surface)
            if not spans:
                issues.append(DecodeIssue(doc.id, "UnalignedArgument", surface))
                return None
            if len(spans) > 1:
                issues.append(
                    DecodeIssue(
                        doc.id,
                        "DuplicateExhausted",
                        f"{surface!r} matched {len(spans)} locations; kept nearest to trigger",
                    )
                )
            return make_entity(ARGUMENT_LABEL_BY_KIND[kind], nearest(spans, trigger_span))

        if raw.status_value is not None:
            if raw.status_surface is None:
                issues.append(DecodeIssue(doc.id, "UnalignedArgument", f"StatusTime:{raw.status_value}"))
            else:
                anchor = place_argument(RelationKind.STATUS, raw.status_surface)
                if anchor is not None:
                    args.append((RelationKind.STATUS, anchor))
        for kind, surface in raw.args:
            argument = place_argument(kind, surface)
            if argument is not None:
                args.append((kind, argument))

        args.sort(key=lambda item: (item[1].start, item[1].end, item[0].value))
        events.append(SdohEvent(trigger=trigger, status=raw.status_value, args=tuple(args)))

    # Triggers whose surface matched more locations than events consumed were
    # picked by the leftmost rule among genuinely ambiguous alternatives.
    for surface, demanded in trigger_demand.items():
        found = len(aligner.find(surface))
        if found > demanded and surface in consumed and consumed[surface]:
            issues.append(
                DecodeIssue(
                    doc.id,
                    "DuplicateExhausted",
                    f"{surface!r} matched {found} locations for {demanded} event(s); kept leftmost",
                )
            )

    events.sort(key=lambda event: (event.trigger.start, event.trigger.end))
    return events, issues


def decode(
    doc: Document, generated: str, lenient: bool = False
) -> tuple[list[SdohEvent], list[DecodeIssue]]:
    """parse_sequence + align in one step."""
    raw_events, issues = parse_sequence(generated, doc_id=doc.id)
    events, align_issues = align(doc, raw_events, lenient=lenient)
    return events, issues + align_issues


def events_to_annotation(doc: Document, events: list[SdohEvent]) -> DocumentAnnotation:
    """Materialize events as a standoff annotation with fresh sequential ids.

    Entities reached through several events are written once; StatusTime
    entities are deduplicated per carried value so conflicting statuses on one
    span stay expressible.
    """
    interned: dict[tuple, EntityAnnotation] = {}

    def intern(entity: EntityAnnotation, value: str | None = None) -> tuple:
        key = (entity.label.value, entity.spans, value)
        interned.setdefault(key, entity)
        return key

    event_records = []
    for event in events:
        trigger_key = intern(event.trigger)
        arg_keys = []
        for kind, argument in event.args:
            value = event.status if kind is RelationKind.STATUS else None
            arg_keys.append((kind, intern(argument, value)))
        event_records.append((trigger_key, arg_keys))

    ordered = sorted(interned, key=lambda key: (interned[key].start, interned[key].end, key))
    id_by_key = {key: f"T{index}" for index, key in enumerate(ordered, start=1)}
    entities = tuple(
        EntityAnnotation(id_by_key[key], entity.label, entity.spans, entity.surface)
        for key, entity in ((key, interned[key]) for key in ordered)
    )

    relations = []
    attributes = []
    attr_done: set[str] = set()
    for trigger_key, arg_keys in event_records:
        for kind, arg_key in arg_keys:
            relations.append(
                RelationAnnotation(
                    f"R{len(relations) + 1}", kind, id_by_key[trigger_key], id_by_key[arg_key]
                )
            )
            value = arg_key[2]
            if kind is RelationKind.STATUS and value is not None:
                target = id_by_key[arg_key]
                if target not in attr_done:
                    attr_done.add(target)
                    attributes.append(AttributeAnnotation(f"A{len(attributes) + 1}", target, value))

    return DocumentAnnotation(doc, entities, tuple(relations), tuple(attributes))
