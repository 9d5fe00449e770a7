"""Two-level evaluation and pairwise inter-annotator agreement.

Level 1 assesses document-level presence of labeled entities: a set of labels
per document, with substance events converted to composite labels through
their status (e.g. ``Tobacco_StatusTime:current``). Level 2 scores events as
slots: two events are equivalent when their labels and statuses agree, their
trigger spans match under the chosen criterion (identical offsets for exact,
at least one shared character for overlap) and their arguments pair off
one-to-one with equal kinds and matching spans.

Zero-denominator convention throughout: precision (or recall) is 0 when its
denominator is 0, and F1 is 0 when P + R = 0, which keeps macro averages
total. Macro values are arithmetic means over the per-category cells of the
same report; categories with no gold and no predicted items corpus-wide are
excluded, mirroring the dashes of published per-category tables.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .brat import DocumentAnnotation, EntityAnnotation, Span
from .errors import InvalidInput, KeyMismatch
from .labels import (
    SPAN_ONLY_LABELS,
    STATUS_VALUES,
    SUBSTANCE_LABELS,
    TRIGGER_LABELS,
    RelationKind,
    SchemaLabel,
    category_of,
)
from .schema import SdohEvent


class MatchCriterion(str, Enum):
    EXACT = "exact"
    OVERLAP = "overlap"


#: The closed set of document-level labels used by level 1: every labeled
#: entity value plus one composite per substance and status.
LEVEL1_LABELS: frozenset[str] = frozenset(
    label.value for label in TRIGGER_LABELS if label not in SPAN_ONLY_LABELS
) | frozenset(
    f"{substance.value}_StatusTime:{value}"
    for substance in sorted(SUBSTANCE_LABELS, key=lambda l: l.value)
    for value in STATUS_VALUES
)

_CATEGORY_BY_LEVEL1 = {
    name: category_of(SchemaLabel(name.split("_StatusTime:")[0])).value for name in LEVEL1_LABELS
}


@dataclass(frozen=True)
class ScoreCell:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "ScoreCell") -> "ScoreCell":
        return ScoreCell(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class ScoreReport:
    """Per-key cells plus the per-category cells the macro averages over.

    For level 1 ``cells`` is keyed by level-1 label and ``category_cells``
    groups those labels by category; for level 2 both are keyed by category.
    """

    cells: dict[str, ScoreCell]
    category_cells: dict[str, ScoreCell]
    macro_precision: float
    macro_recall: float
    macro_f1: float

    def to_dict(self) -> dict:
        return {
            "cells": {key: cell.to_dict() for key, cell in sorted(self.cells.items())},
            "category_cells": {
                key: cell.to_dict() for key, cell in sorted(self.category_cells.items())
            },
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
        }


def _make_report(cells: dict[str, ScoreCell], category_cells: dict[str, ScoreCell]) -> ScoreReport:
    included = [cell for cell in category_cells.values()]
    count = len(included)
    return ScoreReport(
        cells=cells,
        category_cells=category_cells,
        macro_precision=sum(c.precision for c in included) / count if count else 0.0,
        macro_recall=sum(c.recall for c in included) / count if count else 0.0,
        macro_f1=sum(c.f1 for c in included) / count if count else 0.0,
    )


def _check_keys(gold: Mapping, pred: Mapping) -> None:
    if set(gold) != set(pred):
        only_gold = sorted(set(gold) - set(pred))[:5]
        only_pred = sorted(set(pred) - set(gold))[:5]
        raise KeyMismatch(f"doc ids differ (gold-only {only_gold}, pred-only {only_pred})")


def level1_labels(events: Iterable[SdohEvent], on_missing_status: str = "raise") -> set[str]:
    """Document-level label set of a list of events.

    Labeled entities contribute their own label, substance events contribute a
    status composite, span-only entities contribute nothing. A substance event
    without a status raises InvalidInput unless ``on_missing_status="skip"``
    (useful for decoded predictions, where such an event can match nothing at
    level 1 anyway).
    """
    labels: set[str] = set()
    for event in events:
        label = event.trigger.label
        if label in SUBSTANCE_LABELS:
            if event.status is None:
                if on_missing_status == "skip":
                    continue
                raise InvalidInput(f"{label.value} event has no status")
            labels.add(f"{label.value}_StatusTime:{event.status}")
        elif label not in SPAN_ONLY_LABELS:
            labels.add(label.value)
    return labels


def score_level1(
    gold: Mapping[str, set[str]], pred: Mapping[str, set[str]]
) -> ScoreReport:
    """Document-level presence scoring over two corpora of label sets.

    Per document and label: present in both counts a TP, predicted only an FP,
    gold only an FN. Cells aggregate over documents; the macro averages over
    categories after grouping the label cells.
    """
    _check_keys(gold, pred)
    counts: dict[str, list[int]] = {}
    for doc_id in gold:
        gold_set, pred_set = set(gold[doc_id]), set(pred[doc_id])
        for label in gold_set | pred_set:
            if label not in LEVEL1_LABELS:
                raise InvalidInput(f"{label!r} is not a level-1 label")
            cell = counts.setdefault(label, [0, 0, 0])
            if label in gold_set and label in pred_set:
                cell[0] += 1
            elif label in pred_set:
                cell[1] += 1
            else:
                cell[2] += 1

    cells = {label: ScoreCell(*cell) for label, cell in counts.items()}
    category_cells: dict[str, ScoreCell] = {}
    for label, cell in cells.items():
        category = _CATEGORY_BY_LEVEL1[label]
        category_cells[category] = category_cells.get(category, ScoreCell()) + cell
    return _make_report(cells, category_cells)


def spans_match(
    a: tuple[Span, ...], b: tuple[Span, ...], criterion: MatchCriterion
) -> bool:
    if criterion is MatchCriterion.EXACT:
        return a == b
    return any(x.overlaps(y) for x in a for y in b)


def _args_pair_off(
    a: tuple[tuple[RelationKind, EntityAnnotation], ...],
    b: tuple[tuple[RelationKind, EntityAnnotation], ...],
    criterion: MatchCriterion,
) -> bool:
    """True iff a perfect one-to-one pairing with equal kinds and matching spans exists."""
    if len(a) != len(b):
        return False

    taken = [False] * len(b)

    def extend(index: int) -> bool:
        if index == len(a):
            return True
        kind, entity = a[index]
        for j, (other_kind, other_entity) in enumerate(b):
            if taken[j] or other_kind is not kind:
                continue
            if not spans_match(entity.spans, other_entity.spans, criterion):
                continue
            taken[j] = True
            if extend(index + 1):
                return True
            taken[j] = False
        return False

    return extend(0)


def equivalent(a: SdohEvent, b: SdohEvent, criterion: MatchCriterion) -> bool:
    """Event equivalence: equal labels and statuses, trigger spans matching
    under the criterion, and arguments pairing off one to one."""
    return (
        a.trigger.label is b.trigger.label
        and a.status == b.status
        and spans_match(a.trigger.spans, b.trigger.spans, criterion)
        and _args_pair_off(a.args, b.args, criterion)
    )


def _event_order(event: SdohEvent) -> tuple:
    return (event.trigger.start, event.trigger.end)


def score_level2(
    gold: Mapping[str, list[SdohEvent]],
    pred: Mapping[str, list[SdohEvent]],
    criterion: MatchCriterion,
) -> ScoreReport:
    """Slot-filling evaluation: greedy one-to-one event matching per document.

    Gold events, in trigger-offset order, each claim the first unclaimed
    equivalent predicted event (candidates also in trigger-offset order).
    Claimed pairs are TPs, unclaimed gold FNs, unclaimed predictions FPs,
    bucketed by the trigger's category.
    """
    _check_keys(gold, pred)
    counts: dict[str, list[int]] = {}

    def cell(category: str) -> list[int]:
        return counts.setdefault(category, [0, 0, 0])

    for doc_id in gold:
        gold_events = sorted(gold[doc_id], key=_event_order)
        pred_events = sorted(pred[doc_id], key=_event_order)
        claimed = [False] * len(pred_events)
        for gold_event in gold_events:
            for j, pred_event in enumerate(pred_events):
                if not claimed[j] and equivalent(gold_event, pred_event, criterion):
                    claimed[j] = True
                    cell(gold_event.category.value)[0] += 1
                    break
            else:
                cell(gold_event.category.value)[2] += 1
        for j, pred_event in enumerate(pred_events):
            if not claimed[j]:
                cell(pred_event.category.value)[1] += 1

    category_cells = {category: ScoreCell(*c) for category, c in counts.items()}
    return _make_report(dict(category_cells), category_cells)


def score_level2_slots(
    gold: Mapping[str, list[SdohEvent]],
    pred: Mapping[str, list[SdohEvent]],
    criterion: MatchCriterion,
) -> ScoreReport:
    """Argument-level variant of level 2 (non-default, for comparability with
    the n2c2 convention): each trigger, status and argument slot is scored
    independently instead of all-or-nothing per event."""
    _check_keys(gold, pred)
    counts: dict[str, list[int]] = {}

    def slots_of(events: list[SdohEvent]) -> list[tuple[str, str, tuple[Span, ...]]]:
        out = []
        for event in sorted(events, key=_event_order):
            label = event.trigger.label
            category = event.category.value
            trigger_slot = f"Trigger:{label.value}"
            if label in SUBSTANCE_LABELS:
                trigger_slot += f":{event.status}"
            out.append((category, trigger_slot, event.trigger.spans))
            for kind, argument in event.args:
                out.append((category, f"{kind.value}:{label.value}", argument.spans))
        return out

    for doc_id in gold:
        gold_slots = slots_of(gold[doc_id])
        pred_slots = slots_of(pred[doc_id])
        claimed = [False] * len(pred_slots)
        for category, name, spans in gold_slots:
            matched = False
            for j, (p_category, p_name, p_spans) in enumerate(pred_slots):
                if claimed[j] or p_name != name:
                    continue
                if spans_match(spans, p_spans, criterion):
                    claimed[j] = True
                    matched = True
                    break
            counts.setdefault(category, [0, 0, 0])[0 if matched else 2] += 1
        for j, (p_category, _, _) in enumerate(pred_slots):
            if not claimed[j]:
                counts.setdefault(p_category, [0, 0, 0])[1] += 1

    category_cells = {category: ScoreCell(*c) for category, c in counts.items()}
    return _make_report(dict(category_cells), category_cells)


@dataclass(frozen=True)
class IaaReport:
    """Pairwise agreement F-measures, per entity label and per relation kind."""

    entity_f: dict[str, float]
    relation_f: dict[str, float]
    entity_f_mean: float
    relation_f_mean: float

    def to_dict(self) -> dict:
        return {
            "entities": dict(sorted(self.entity_f.items())),
            "relations": dict(sorted(self.relation_f.items())),
            "entity_f_mean": self.entity_f_mean,
            "relation_f_mean": self.relation_f_mean,
        }


def _entity_signature(entity: EntityAnnotation) -> tuple:
    return (entity.label.value, entity.spans)


def iaa(
    a: Mapping[str, DocumentAnnotation], b: Mapping[str, DocumentAnnotation]
) -> IaaReport:
    """F-measure agreement between two annotators over the same documents.

    Entities agree on exact spans and label; relations additionally require
    kind equality with both endpoint entities matched exactly. Averages are
    arithmetic means over labels/kinds annotated by at least one side. The
    F-measure is symmetric in the two annotators.
    """
    _check_keys(a, b)
    entity_tp: Counter = Counter()
    entity_n_a: Counter = Counter()
    entity_n_b: Counter = Counter()
    relation_tp: Counter = Counter()
    relation_n_a: Counter = Counter()
    relation_n_b: Counter = Counter()

    for doc_id in a:
        ann_a, ann_b = a[doc_id], b[doc_id]
        sigs_a = Counter(_entity_signature(e) for e in ann_a.entities)
        sigs_b = Counter(_entity_signature(e) for e in ann_b.entities)
        for (label, _), count in sigs_a.items():
            entity_n_a[label] += count
        for (label, _), count in sigs_b.items():
            entity_n_b[label] += count
        for (label, _), count in (sigs_a & sigs_b).items():
            entity_tp[label] += count

        def relation_sigs(ann: DocumentAnnotation) -> Counter:
            return Counter(
                (
                    r.kind.value,
                    _entity_signature(ann.entity(r.trigger)),
                    _entity_signature(ann.entity(r.argument)),
                )
                for r in ann.relations
            )

        rel_a, rel_b = relation_sigs(ann_a), relation_sigs(ann_b)
        for (kind, _, _), count in rel_a.items():
            relation_n_a[kind] += count
        for (kind, _, _), count in rel_b.items():
            relation_n_b[kind] += count
        for (kind, _, _), count in (rel_a & rel_b).items():
            relation_tp[kind] += count

    def f_measures(tp: Counter, n_a: Counter, n_b: Counter) -> dict[str, float]:
        keys = set(n_a) | set(n_b)
        return {key: 2 * tp[key] / (n_a[key] + n_b[key]) for key in sorted(keys)}

    entity_f = f_measures(entity_tp, entity_n_a, entity_n_b)
    relation_f = f_measures(relation_tp, relation_n_a, relation_n_b)
    return IaaReport(
        entity_f=entity_f,
        relation_f=relation_f,
        entity_f_mean=sum(entity_f.values()) / len(entity_f) if entity_f else 0.0,
        relation_f_mean=sum(relation_f.values()) / len(relation_f) if relation_f else 0.0,
    )
