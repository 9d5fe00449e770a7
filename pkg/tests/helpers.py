"""Shared fixture builders and independent oracles for the test suite.

The oracles here are deliberately naive re-implementations (set recounts,
exhaustive matching) kept separate from the code paths they check.
"""

from __future__ import annotations

import random

from sdoh_kit.brat import (
    AttributeAnnotation,
    Document,
    DocumentAnnotation,
    EntityAnnotation,
    RelationAnnotation,
    Span,
    surface_of,
)
from sdoh_kit.labels import (
    PERMITTED_TRIGGERS_BY_KIND,
    SUBSTANCE_LABELS,
    TRIGGER_LABELS,
    RelationKind,
    SchemaLabel,
)
from sdoh_kit.schema import SdohEvent
from sdoh_kit.scoring import MatchCriterion, equivalent

ACCENTED_ALPHABET = "abcdefgh ïéèàçâœuno\n.cocaïne "


def make_entity(
    entity_id: str, label: SchemaLabel, text: str, *spans: tuple[int, int]
) -> EntityAnnotation:
    span_objs = tuple(Span(start, end) for start, end in spans)
    return EntityAnnotation(entity_id, label, span_objs, surface_of(text, span_objs))


def random_annotation(rng: random.Random, doc_id: str) -> DocumentAnnotation:
    """A structurally valid standoff annotation over random accented text.

    Exercises the parser/serializer contract: discontinuous fragments,
    accented characters, relations and attributes with resolvable targets.
    Schema conformity is NOT guaranteed (and not needed for round trips).
    """
    text = "".join(rng.choice(ACCENTED_ALPHABET) for _ in range(rng.randint(30, 80)))
    entities: list[EntityAnnotation] = []
    for index in range(rng.randint(1, 6)):
        n_fragments = rng.choices([1, 2], weights=[4, 1])[0]
        bounds = sorted(rng.sample(range(len(text) + 1), 2 * n_fragments))
        spans = []
        for i in range(n_fragments):
            start, end = bounds[2 * i], bounds[2 * i + 1]
            if start == end:
                end = min(end + 1, len(text))
                if start == end:
                    start = max(0, start - 1)
            spans.append((start, end))
        spans = [(s, e) for s, e in spans if s < e]
        if not spans:
            continue
        # drop fragment overlaps introduced by the end bump
        cleaned = [spans[0]]
        for start, end in spans[1:]:
            if start >= cleaned[-1][1]:
                cleaned.append((start, end))
        label = rng.choice(list(SchemaLabel))
        entities.append(make_entity(f"T{len(entities) + 1}", label, text, *cleaned))

    relations = []
    for index in range(rng.randint(0, 3)):
        if len(entities) < 2:
            break
        trigger, argument = rng.sample(entities, 2)
        relations.append(
            RelationAnnotation(
                f"R{index + 1}", rng.choice(list(RelationKind)), trigger.id, argument.id
            )
        )
    attributes = []
    for index in range(rng.randint(0, 2)):
        if not entities:
            break
        attributes.append(
            AttributeAnnotation(
                f"A{index + 1}",
                rng.choice(entities).id,
                rng.choice(["current", "past", "none"]),
            )
        )
    return DocumentAnnotation(
        Document(doc_id, text), tuple(entities), tuple(relations), tuple(attributes)
    )


def annotation_signature(ann: DocumentAnnotation) -> tuple:
    """Id-free canonical form: annotations compare equal modulo id renaming."""

    def entity_sig(entity: EntityAnnotation) -> tuple:
        return (entity.label.value, tuple((s.start, s.end) for s in entity.spans), entity.surface)

    entity_by_id = {entity.id: entity for entity in ann.entities}
    return (
        ann.doc.text,
        tuple(sorted(entity_sig(e) for e in ann.entities)),
        tuple(
            sorted(
                (r.kind.value, entity_sig(entity_by_id[r.trigger]), entity_sig(entity_by_id[r.argument]))
                for r in ann.relations
            )
        ),
        tuple(sorted((entity_sig(entity_by_id[a.target]), a.value) for a in ann.attributes)),
    )


# --- random events for the scoring oracle ----------------------------------

_STATUSES = ("current", "past", "none")


def random_event(rng: random.Random, text_length: int = 60) -> SdohEvent:
    label = rng.choice(TRIGGER_LABELS)
    start = rng.randrange(0, text_length - 6)
    trigger = EntityAnnotation(
        "T0", label, (Span(start, start + rng.randint(1, 6)),), "x"
    )
    status = rng.choice(_STATUSES) if label in SUBSTANCE_LABELS else None
    args = []
    kinds = [k for k, allowed in PERMITTED_TRIGGERS_BY_KIND.items() if label in allowed]
    if label in SUBSTANCE_LABELS:
        args.append((RelationKind.STATUS, _random_arg(rng, RelationKind.STATUS, text_length)))
    for _ in range(rng.randint(0, 2)):
        kind = rng.choice(kinds)
        if kind is RelationKind.STATUS:
            continue
        args.append((kind, _random_arg(rng, kind, text_length)))
    args.sort(key=lambda item: (item[1].start, item[1].end, item[0].value))
    return SdohEvent(trigger=trigger, status=status, args=tuple(args))


def _random_arg(rng: random.Random, kind: RelationKind, text_length: int) -> EntityAnnotation:
    from sdoh_kit.labels import ARGUMENT_LABEL_BY_KIND

    start = rng.randrange(0, text_length - 5)
    return EntityAnnotation(
        "T0", ARGUMENT_LABEL_BY_KIND[kind], (Span(start, start + rng.randint(1, 5)),), "x"
    )


def perturb_event(rng: random.Random, event: SdohEvent) -> SdohEvent:
    """A prediction-like copy: spans jittered, status sometimes flipped."""

    def jitter(entity: EntityAnnotation) -> EntityAnnotation:
        if rng.random() < 0.5:
            return entity
        delta = rng.choice((-2, -1, 1, 2))
        spans = tuple(
            Span(max(0, span.start + delta), max(1, span.end + delta)) for span in entity.spans
        )
        return EntityAnnotation(entity.id, entity.label, spans, entity.surface)

    status = event.status
    if status is not None and rng.random() < 0.15:
        status = rng.choice(_STATUSES)
    args = tuple((kind, jitter(argument)) for kind, argument in event.args)
    if args and rng.random() < 0.15:
        args = args[1:]
    return SdohEvent(trigger=jitter(event.trigger), status=status, args=args)


def random_scoring_doc(rng: random.Random) -> tuple[list[SdohEvent], list[SdohEvent]]:
    gold = [random_event(rng) for _ in range(rng.randint(0, 6))]
    pred = [perturb_event(rng, event) for event in gold if rng.random() > 0.2]
    pred += [random_event(rng) for _ in range(rng.randint(0, 2))]
    rng.shuffle(pred)
    return gold, pred


def max_matching_tp(
    gold: list[SdohEvent], pred: list[SdohEvent], criterion: MatchCriterion
) -> int:
    """Exhaustive maximum bipartite matching size over the equivalence graph."""
    edges = [
        [j for j, p in enumerate(pred) if equivalent(g, p, criterion)] for g in gold
    ]
    matched_pred: dict[int, int] = {}

    def augment(i: int, seen: set[int]) -> bool:
        for j in edges[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in matched_pred or augment(matched_pred[j], seen):
                matched_pred[j] = i
                return True
        return False

    return sum(1 for i in range(len(gold)) if augment(i, set()))


def naive_level1_recount(
    gold: dict[str, set[str]], pred: dict[str, set[str]]
) -> dict[str, tuple[int, int, int]]:
    """Independent per-label recount of TP/FP/FN by plain set operations."""
    labels = set()
    for doc_id in gold:
        labels |= gold[doc_id] | pred[doc_id]
    recount = {}
    for label in labels:
        tp = sum(1 for d in gold if label in gold[d] and label in pred[d])
        fp = sum(1 for d in gold if label not in gold[d] and label in pred[d])
        fn = sum(1 for d in gold if label in gold[d] and label not in pred[d])
        recount[label] = (tp, fp, fn)
    return recount
