"""Render a document's events as the flat target sequence for a seq2seq model.

Grammar (normative for this toolkit):

    sequence := event (" [SEP] " event)* | "[NONE]"
    event    := "[" LABEL "]" " " trigger-surface arg*
    arg      := " [" KIND "]" " " argument-surface
              | " [StatusTime:" value "]" " " status-surface

Events are ordered left to right by trigger offset and args by argument
offset. Surfaces are emitted verbatim from the document text except that tab
and newline characters become single spaces, so the sequence stays one line
and decoding by substring search can succeed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .brat import Document
from .errors import InvalidInput
from .labels import (
    ARGUMENT_LABEL_BY_KIND,
    SUBSTANCE_LABELS,
    RelationKind,
    is_trigger_label,
)
from .schema import SdohEvent

SEP_TOKEN = "[SEP]"
NONE_TOKEN = "[NONE]"


@dataclass(frozen=True)
class LinearizedSequence:
    doc_id: str
    text: str


def _flat(surface: str) -> str:
    return re.sub(r"[\t\n\r]", " ", surface)


def _check_event(event: SdohEvent) -> None:
    label = event.trigger.label
    if not is_trigger_label(label):
        raise InvalidInput(f"{label.value} cannot anchor an event")
    is_substance = label in SUBSTANCE_LABELS
    has_status_arg = any(kind is RelationKind.STATUS for kind, _ in event.args)
    if is_substance and (event.status is None or not has_status_arg):
        raise InvalidInput(f"{label.value} event must carry a status and its StatusTime anchor")
    if not is_substance and (event.status is not None or has_status_arg):
        raise InvalidInput(f"{label.value} event cannot carry a status")
    for kind, argument in event.args:
        if argument.label is not ARGUMENT_LABEL_BY_KIND[kind]:
            raise InvalidInput(
                f"{kind.value} argument must be a {ARGUMENT_LABEL_BY_KIND[kind].value} entity"
            )
    starts = [argument.start for _, argument in event.args]
    if starts != sorted(starts):
        raise InvalidInput("event args must be sorted by argument start offset")


def linearize(doc: Document, events: Iterable[SdohEvent]) -> LinearizedSequence:
    """Deterministically render schema-valid events, sorted by trigger offset.

    Raises InvalidInput on unsorted or schema-invalid events. An empty event
    list yields the literal "[NONE]" sentinel.
    """
    events = list(events)
    starts = [event.trigger.start for event in events]
    if starts != sorted(starts):
        raise InvalidInput("events must be sorted by trigger start offset")

    rendered: list[str] = []
    for event in events:
        _check_event(event)
        chunks = [f"[{event.trigger.label.value}] {_flat(event.trigger.surface)}"]
        for kind, argument in event.args:
            if kind is RelationKind.STATUS:
                chunks.append(f"[StatusTime:{event.status}] {_flat(argument.surface)}")
            else:
                chunks.append(f"[{kind.value}] {_flat(argument.surface)}")
        rendered.append(" ".join(chunks))

    return LinearizedSequence(doc.id, f" {SEP_TOKEN} ".join(rendered) if rendered else NONE_TOKEN)
