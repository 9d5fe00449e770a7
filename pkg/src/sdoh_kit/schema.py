"""Validation against the annotation scheme and assembly of flat annotations into events.

An event is a trigger entity plus its related arguments; substance-use events
(Alcohol, Tobacco, Drug) additionally carry a consumption status folded in
from the StatusValue attribute of their StatusTime argument.
"""

from __future__ import annotations

from dataclasses import dataclass

from .brat import DocumentAnnotation, EntityAnnotation
from .errors import InvalidInput
from .labels import (
    ARGUMENT_LABEL_BY_KIND,
    PERMITTED_TRIGGERS_BY_KIND,
    SUBSTANCE_LABELS,
    RelationKind,
    SchemaLabel,
    SdohCategory,
    category_of,
    is_trigger_label,
)

#: Closed list of rule names a violation may carry.
VIOLATION_RULES = (
    "ForbiddenPairing",
    "WrongArgumentLabel",
    "MissingRequiredStatus",
    "MultipleStatus",
    "MissingStatusValue",
    "MultipleStatusValue",
    "MisdirectedAttribute",
)


@dataclass(frozen=True)
class SchemaViolation:
    doc_id: str
    annotation_id: str
    rule: str
    message: str


@dataclass(frozen=True)
class SdohEvent:
    """A trigger entity with its typed arguments.

    ``args`` is sorted by argument start offset and includes the StatusTime
    anchor as a ``(Status, entity)`` pair when one is attached; ``status``
    holds the consumption value itself. Events decoded from model output may
    be partial (e.g. a substance trigger whose status could not be recovered).
    """

    trigger: EntityAnnotation
    status: str | None = None
    args: tuple[tuple[RelationKind, EntityAnnotation], ...] = ()

    @property
    def category(self) -> SdohCategory:
        return category_of(self.trigger.label)


def validate(ann: DocumentAnnotation) -> list[SchemaViolation]:
    """Check every pairing, required status and attribute placement.

    Returns violations as data (never raises); an empty list means the
    annotation conforms to the scheme. The result does not depend on the
    order of the annotation lists.
    """
    violations: list[SchemaViolation] = []

    def flag(annotation_id: str, rule: str, message: str) -> None:
        violations.append(SchemaViolation(ann.doc.id, annotation_id, rule, message))

    for attribute in ann.attributes:
        target = ann.entity(attribute.target)
        if target.label is not SchemaLabel.STATUS_TIME:
            flag(
                attribute.id,
                "MisdirectedAttribute",
                f"StatusValue attribute targets {target.label.value} entity {target.id}",
            )

    attr_count_by_target: dict[str, int] = {}
    for attribute in ann.attributes:
        attr_count_by_target[attribute.target] = attr_count_by_target.get(attribute.target, 0) + 1

    status_relations_by_trigger: dict[str, list] = {}
    for relation in ann.relations:
        trigger = ann.entity(relation.trigger)
        argument = ann.entity(relation.argument)
        permitted = PERMITTED_TRIGGERS_BY_KIND[relation.kind]
        if trigger.label not in permitted:
            flag(
                relation.id,
                "ForbiddenPairing",
                f"{relation.kind.value} relation not permitted on {trigger.label.value}",
            )
        expected = ARGUMENT_LABEL_BY_KIND[relation.kind]
        if argument.label is not expected:
            flag(
                relation.id,
                "WrongArgumentLabel",
                f"{relation.kind.value} argument must be {expected.value}, "
                f"got {argument.label.value}",
            )
        if relation.kind is RelationKind.STATUS:
            status_relations_by_trigger.setdefault(relation.trigger, []).append(relation)

    for entity in ann.entities:
        if entity.label not in SUBSTANCE_LABELS:
            continue
        status_relations = status_relations_by_trigger.get(entity.id, [])
        if not status_relations:
            flag(
                entity.id,
                "MissingRequiredStatus",
                f"{entity.label.value} entity has no Status relation",
            )
            continue
        if len(status_relations) > 1:
            flag(
                entity.id,
                "MultipleStatus",
                f"{entity.label.value} entity has {len(status_relations)} Status relations",
            )
        for relation in status_relations:
            anchor = ann.entity(relation.argument)
            if anchor.label is not SchemaLabel.STATUS_TIME:
                continue  # already flagged as WrongArgumentLabel
            count = attr_count_by_target.get(anchor.id, 0)
            if count == 0:
                flag(
                    anchor.id,
                    "MissingStatusValue",
                    f"StatusTime entity {anchor.id} carries no StatusValue attribute",
                )
            elif count > 1:
                flag(
                    anchor.id,
                    "MultipleStatusValue",
                    f"StatusTime entity {anchor.id} carries {count} StatusValue attributes",
                )
    return violations


def _entity_sort_key(entity: EntityAnnotation) -> tuple:
    return (entity.start, entity.end, entity.label.value, entity.id)


def to_events(ann: DocumentAnnotation, strict: bool = True) -> list[SdohEvent]:
    """Assemble one event per trigger-eligible entity, sorted by trigger offset.

    With ``strict`` (the default) the annotation must validate cleanly, else
    InvalidInput is raised. ``strict=False`` assembles best-effort events from
    possibly nonconforming annotations, as needed when re-reading decoded
    model output; missing statuses stay None and forbidden args are kept.
    """
    if strict:
        violations = validate(ann)
        if violations:
            first = violations[0]
            raise InvalidInput(
                f"annotation {ann.doc.id} violates the schema "
                f"({len(violations)} violations, first: {first.rule}: {first.message})"
            )

    value_by_status_time: dict[str, str] = {}
    for attribute in ann.attributes:
        value_by_status_time.setdefault(attribute.target, attribute.value)

    relations_by_trigger: dict[str, list] = {}
    for relation in ann.relations:
        relations_by_trigger.setdefault(relation.trigger, []).append(relation)

    events: list[SdohEvent] = []
    for entity in sorted(ann.entities, key=_entity_sort_key):
        if not is_trigger_label(entity.label):
            continue
        status: str | None = None
        args: list[tuple[RelationKind, EntityAnnotation]] = []
        for relation in relations_by_trigger.get(entity.id, []):
            argument = ann.entity(relation.argument)
            args.append((relation.kind, argument))
            if (
                relation.kind is RelationKind.STATUS
                and entity.label in SUBSTANCE_LABELS
                and status is None
            ):
                status = value_by_status_time.get(argument.id)
        args.sort(key=lambda item: (item[1].start, item[1].end, item[0].value))
        events.append(SdohEvent(trigger=entity, status=status, args=tuple(args)))
    return events
