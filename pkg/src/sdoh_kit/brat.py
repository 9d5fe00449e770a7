"""BRAT standoff parsing and serialization, plus the core offset types.

Offsets count Unicode scalar values of the document text, never bytes, so
fixtures with accented characters behave identically on every platform.
Line format (tab-separated)::

    T<id>\\t<Label> <start> <end>[;<start> <end>...]\\t<surface>
    R<id>\\t<Kind> Arg1:T<i> Arg2:T<j>
    A<id>\\tStatusValue T<i> <value>

Discontinuous entities carry several ``start end`` fragments; their surface is
the fragment texts joined by a single space. Comment lines (``#``) are passed
over; any other line type is an error, never a silent drop.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from .errors import SdohKitError
from .labels import STATUS_VALUES, RelationKind, SchemaLabel


class StandoffError(SdohKitError):
    """A standoff parse failure; carries the 1-based offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class MalformedLine(StandoffError):
    pass


class OffsetOutOfRange(StandoffError):
    pass


class SurfaceMismatch(StandoffError):
    pass


class DanglingReference(StandoffError):
    pass


@dataclass(frozen=True, order=True)
class Span:
    """Half-open character interval ``[start, end)`` into a document text.

    Entity fragments are always nonempty (``start < end``); section spans may
    be empty when a header has no body.
    """

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span ({self.start}, {self.end})")

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    @property
    def midpoint(self) -> float:
        return (self.start + self.end) / 2


@dataclass(frozen=True)
class Document:
    """A document id plus its raw Unicode text; all offsets index into ``text``."""

    id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be nonempty")


def surface_of(text: str, spans: tuple[Span, ...]) -> str:
    """Text covered by the fragments, joined by one space between fragments."""
    return " ".join(text[span.start : span.end] for span in spans)


@dataclass(frozen=True)
class EntityAnnotation:
    """A labeled text-bound annotation, possibly discontinuous.

    ``surface`` equals the concatenation of the text slices at ``spans``
    joined by single spaces; fragments are sorted and non-overlapping.
    """

    id: str
    label: SchemaLabel
    spans: tuple[Span, ...]
    surface: str

    @property
    def start(self) -> int:
        return self.spans[0].start

    @property
    def end(self) -> int:
        return self.spans[-1].end

    def overlaps(self, other: "EntityAnnotation") -> bool:
        return any(a.overlaps(b) for a in self.spans for b in other.spans)


@dataclass(frozen=True)
class AttributeAnnotation:
    """A StatusValue attribute on a StatusTime entity.

    The schema validator is responsible for checking that ``target`` is
    actually labeled StatusTime; the parser only resolves the reference.
    """

    id: str
    target: str
    value: str

    kind = "StatusValue"


@dataclass(frozen=True)
class RelationAnnotation:
    """A binary relation from a trigger entity (Arg1) to an argument entity (Arg2)."""

    id: str
    kind: RelationKind
    trigger: str
    argument: str


@dataclass(frozen=True)
class DocumentAnnotation:
    """A document with its entities, relations and attributes."""

    doc: Document
    entities: tuple[EntityAnnotation, ...] = ()
    relations: tuple[RelationAnnotation, ...] = ()
    attributes: tuple[AttributeAnnotation, ...] = ()

    @cached_property
    def entity_by_id(self) -> dict[str, EntityAnnotation]:
        return {entity.id: entity for entity in self.entities}

    def entity(self, entity_id: str) -> EntityAnnotation:
        return self.entity_by_id[entity_id]


_ID_RE = re.compile(r"^([TRA])(\d+)$")
_SPAN_RE = re.compile(r"^(\d+) (\d+)$")


def strip_bom(text: str) -> str:
    return text[1:] if text.startswith("﻿") else text


def _flatten_ws(text: str) -> str:
    # .ann files are line oriented; tabs/newlines inside a surface cannot
    # survive in the surface column and are stored as single spaces.
    return re.sub(r"[\t\n\r]", " ", text)


def _parse_entity_line(line_no: int, ann_id: str, body: str, tail: str, text: str) -> EntityAnnotation:
    parts = body.split(" ", 1)
    if len(parts) != 2:
        raise MalformedLine(f"entity line needs '<Label> <offsets>': {body!r}", line_no)
    label_token, offsets = parts
    try:
        label = SchemaLabel(label_token)
    except ValueError:
        raise MalformedLine(f"unknown entity label {label_token!r}", line_no) from None

    spans: list[Span] = []
    for fragment in offsets.split(";"):
        match = _SPAN_RE.match(fragment.strip())
        if match is None:
            raise MalformedLine(f"bad span fragment {fragment!r}", line_no)
        start, end = int(match.group(1)), int(match.group(2))
        if start >= end:
            raise MalformedLine(f"empty or inverted span {start} {end}", line_no)
        if end > len(text):
            raise OffsetOutOfRange(
                f"span {start} {end} exceeds text length {len(text)}", line_no
            )
        spans.append(Span(start, end))
    for prev, cur in zip(spans, spans[1:]):
        if cur.start < prev.end:
            raise MalformedLine("fragments must be sorted and non-overlapping", line_no)

    expected = surface_of(text, tuple(spans))
    if tail != _flatten_ws(expected):
        raise SurfaceMismatch(
            f"recorded surface {tail!r} does not match text slice {expected!r}", line_no
        )
    return EntityAnnotation(ann_id, label, tuple(spans), expected)


def _parse_relation_line(line_no: int, ann_id: str, body: str) -> RelationAnnotation:
    match = re.match(r"^(\S+) Arg1:(\S+) Arg2:(\S+)$", body)
    if match is None:
        raise MalformedLine(f"relation line needs '<Kind> Arg1:Ti Arg2:Tj': {body!r}", line_no)
    kind_token, arg1, arg2 = match.groups()
    try:
        kind = RelationKind(kind_token)
    except ValueError:
        raise MalformedLine(f"unknown relation kind {kind_token!r}", line_no) from None
    return RelationAnnotation(ann_id, kind, arg1, arg2)


def _parse_attribute_line(line_no: int, ann_id: str, body: str) -> AttributeAnnotation:
    parts = body.split(" ")
    if len(parts) != 3:
        raise MalformedLine(f"attribute line needs 'StatusValue Ti <value>': {body!r}", line_no)
    kind_token, target, value = parts
    if kind_token != "StatusValue":
        raise MalformedLine(f"unsupported attribute kind {kind_token!r}", line_no)
    if value not in STATUS_VALUES:
        raise MalformedLine(f"status value must be current/past/none, got {value!r}", line_no)
    return AttributeAnnotation(ann_id, target, value)


def parse_standoff(ann_text: str, doc_text: str, doc_id: str = "doc") -> DocumentAnnotation:
    """Parse standoff lines against their document text.

    Raises MalformedLine, OffsetOutOfRange, SurfaceMismatch or
    DanglingReference; every error message names the offending line number.
    """
    doc_text = strip_bom(doc_text)
    entities: list[EntityAnnotation] = []
    relations: list[tuple[int, RelationAnnotation]] = []
    attributes: list[tuple[int, AttributeAnnotation]] = []
    seen_ids: set[str] = set()

    for line_no, raw_line in enumerate(strip_bom(ann_text).split("\n"), start=1):
        line = raw_line.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise MalformedLine("expected tab-separated id and body", line_no)
        ann_id = fields[0]
        match = _ID_RE.match(ann_id)
        if match is None:
            raise MalformedLine(f"unsupported annotation id {ann_id!r}", line_no)
        if ann_id in seen_ids:
            raise MalformedLine(f"duplicate annotation id {ann_id!r}", line_no)
        seen_ids.add(ann_id)

        prefix = match.group(1)
        if prefix == "T":
            if len(fields) != 3:
                raise MalformedLine("entity line needs id, label+offsets and surface", line_no)
            entities.append(_parse_entity_line(line_no, ann_id, fields[1], fields[2], doc_text))
        elif prefix == "R":
            if len(fields) != 2:
                raise MalformedLine("relation line needs exactly one body field", line_no)
            relations.append((line_no, _parse_relation_line(line_no, ann_id, fields[1])))
        else:
            if len(fields) != 2:
                raise MalformedLine("attribute line needs exactly one body field", line_no)
            attributes.append((line_no, _parse_attribute_line(line_no, ann_id, fields[1])))

    entity_ids = {entity.id for entity in entities}
    for line_no, relation in relations:
        for ref in (relation.trigger, relation.argument):
            if ref not in entity_ids:
                raise DanglingReference(f"relation {relation.id} references missing {ref}", line_no)
    for line_no, attribute in attributes:
        if attribute.target not in entity_ids:
            raise DanglingReference(
                f"attribute {attribute.id} references missing {attribute.target}", line_no
            )

    return DocumentAnnotation(
        doc=Document(doc_id, doc_text),
        entities=tuple(entities),
        relations=tuple(r for _, r in relations),
        attributes=tuple(a for _, a in attributes),
    )


def _numeric_id(ann_id: str) -> int:
    return int(ann_id[1:])


def serialize_standoff(ann: DocumentAnnotation) -> str:
    """Serialize to standoff text: T lines, then R, then A, each by numeric id."""
    lines: list[str] = []
    for entity in sorted(ann.entities, key=lambda e: _numeric_id(e.id)):
        offsets = ";".join(f"{span.start} {span.end}" for span in entity.spans)
        lines.append(f"{entity.id}\t{entity.label.value} {offsets}\t{_flatten_ws(entity.surface)}")
    for relation in sorted(ann.relations, key=lambda r: _numeric_id(r.id)):
        lines.append(
            f"{relation.id}\t{relation.kind.value} Arg1:{relation.trigger} Arg2:{relation.argument}"
        )
    for attribute in sorted(ann.attributes, key=lambda a: _numeric_id(a.id)):
        lines.append(f"{attribute.id}\tStatusValue {attribute.target} {attribute.value}")
    return "\n".join(lines) + ("\n" if lines else "")
