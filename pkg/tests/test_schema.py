import random

import pytest

from sdoh_kit.brat import parse_standoff
from sdoh_kit.errors import InvalidInput
from sdoh_kit.labels import (
    SPAN_ONLY_LABELS,
    TRIGGER_LABELS,
    RelationKind,
    SchemaLabel,
    SdohCategory,
    category_of,
)
from sdoh_kit.schema import to_events, validate


def _ann(ann_text: str, text: str):
    return parse_standoff(ann_text, text, doc_id="d")


VALID_TOBACCO = (
    "T1\tTobacco 0 9\tTabagisme\n"
    "T2\tStatusTime 10 15\tactif\n"
    "R1\tStatus Arg1:T1 Arg2:T2\n"
    "A1\tStatusValue T2 current\n"
)
TOBACCO_TEXT = "Tabagisme actif à 17 cigarettes par jour"


def test_valid_tobacco_event_has_no_violations():
    assert validate(_ann(VALID_TOBACCO, TOBACCO_TEXT)) == []


def test_missing_required_status():
    ann = _ann("T1\tTobacco 0 9\tTabagisme\n", TOBACCO_TEXT)
    violations = validate(ann)
    assert [v.rule for v in violations] == ["MissingRequiredStatus"]
    assert violations[0].annotation_id == "T1"


def test_forbidden_pairing():
    text = "Habite à Nantes : 17 cigarettes"
    ann = _ann(
        "T1\tHousing_Yes 0 15\tHabite à Nantes\n"
        "T2\tAmount 18 31\t17 cigarettes\n"
        "R1\tAmount Arg1:T1 Arg2:T2\n",
        text,
    )
    assert "ForbiddenPairing" in {v.rule for v in validate(ann)}


def test_wrong_argument_label():
    # Status relation pointing at an Amount entity instead of a StatusTime
    ann = _ann(
        "T1\tTobacco 0 9\tTabagisme\n"
        "T2\tAmount 18 31\t17 cigarettes\n"
        "R1\tStatus Arg1:T1 Arg2:T2\n",
        TOBACCO_TEXT + " 17 cigarettes"[len(TOBACCO_TEXT) - 40 :],
    )
    rules = {v.rule for v in validate(ann)}
    assert "WrongArgumentLabel" in rules


def test_multiple_status_flagged():
    text = "Tabagisme actif sevré"
    ann = _ann(
        "T1\tTobacco 0 9\tTabagisme\n"
        "T2\tStatusTime 10 15\tactif\n"
        "T3\tStatusTime 16 21\tsevré\n"
        "R1\tStatus Arg1:T1 Arg2:T2\n"
        "R2\tStatus Arg1:T1 Arg2:T3\n"
        "A1\tStatusValue T2 current\n"
        "A2\tStatusValue T3 past\n",
        text,
    )
    assert "MultipleStatus" in {v.rule for v in validate(ann)}


def test_status_value_count_rules():
    no_attr = _ann(
        "T1\tTobacco 0 9\tTabagisme\nT2\tStatusTime 10 15\tactif\nR1\tStatus Arg1:T1 Arg2:T2\n",
        TOBACCO_TEXT,
    )
    assert "MissingStatusValue" in {v.rule for v in validate(no_attr)}
    two_attrs = _ann(VALID_TOBACCO + "A2\tStatusValue T2 past\n", TOBACCO_TEXT)
    assert "MultipleStatusValue" in {v.rule for v in validate(two_attrs)}


def test_misdirected_attribute():
    ann = _ann(
        VALID_TOBACCO + "A2\tStatusValue T1 past\n",
        TOBACCO_TEXT,
    )
    assert "MisdirectedAttribute" in {v.rule for v in validate(ann)}


def test_validate_order_insensitive():
    ann = _ann(VALID_TOBACCO + "T3\tAlcohol 18 31\t17 cigarettes\n", TOBACCO_TEXT)
    first = {(v.rule, v.annotation_id) for v in validate(ann)}
    from sdoh_kit.brat import DocumentAnnotation

    rng = random.Random(5)
    for _ in range(5):
        entities = list(ann.entities)
        relations = list(ann.relations)
        rng.shuffle(entities)
        rng.shuffle(relations)
        shuffled = DocumentAnnotation(ann.doc, tuple(entities), tuple(relations), ann.attributes)
        assert {(v.rule, v.annotation_id) for v in validate(shuffled)} == first
        assert {(v.rule, v.annotation_id) for v in validate(shuffled)} == first  # idempotent


def test_to_events_folds_status_and_sorts_args():
    text = "Tabagisme actif à 17 cigarettes par jour"
    ann = _ann(
        "T1\tTobacco 0 9\tTabagisme\n"
        "T2\tStatusTime 10 15\tactif\n"
        "T3\tAmount 18 31\t17 cigarettes\n"
        "T4\tFrequency 32 40\tpar jour\n"
        "R1\tFrequency Arg1:T1 Arg2:T4\n"
        "R2\tAmount Arg1:T1 Arg2:T3\n"
        "R3\tStatus Arg1:T1 Arg2:T2\n"
        "A1\tStatusValue T2 current\n",
        text,
    )
    events = to_events(ann)
    assert len(events) == 1
    event = events[0]
    assert event.trigger.label is SchemaLabel.TOBACCO
    assert event.status == "current"
    assert [kind.value for kind, _ in event.args] == ["Status", "Amount", "Frequency"]
    assert [argument.start for _, argument in event.args] == [10, 18, 32]


def test_to_events_empty_and_count_preserved():
    ann = _ann("", "rien du tout")
    assert to_events(ann) == []
    ann = _ann(
        "T1\tHousing_Yes 0 15\tHabite à Nantes\nT2\tJob 18 25\tsoudeur\n",
        "Habite à Nantes . soudeur",
    )
    events = to_events(ann)
    assert len(events) == 2  # one event per trigger-eligible entity
    assert [event.trigger.id for event in events] == ["T1", "T2"]


def test_two_triggers_sharing_one_amount():
    # Oracle: built by hand, both events must carry the shared argument.
    text = "Tabac actif et alcool festif : 3 verres"
    ann = _ann(
        "T1\tTobacco 0 5\tTabac\n"
        "T2\tStatusTime 6 11\tactif\n"
        "T3\tAlcohol 15 21\talcool\n"
        "T4\tStatusTime 22 28\tfestif\n"
        "T5\tAmount 31 39\t3 verres\n"
        "R1\tStatus Arg1:T1 Arg2:T2\n"
        "R2\tStatus Arg1:T3 Arg2:T4\n"
        "R3\tAmount Arg1:T1 Arg2:T5\n"
        "R4\tAmount Arg1:T3 Arg2:T5\n"
        "A1\tStatusValue T2 current\n"
        "A2\tStatusValue T4 current\n",
        text,
    )
    events = to_events(ann)
    assert len(events) == 2
    shared = [arg for event in events for kind, arg in event.args if kind is RelationKind.AMOUNT]
    assert len(shared) == 2
    assert shared[0].id == shared[1].id == "T5"


def test_to_events_strict_rejects_invalid():
    ann = _ann("T1\tTobacco 0 9\tTabagisme\n", TOBACCO_TEXT)
    with pytest.raises(InvalidInput):
        to_events(ann)
    # lenient mode assembles a partial event instead
    events = to_events(ann, strict=False)
    assert events[0].status is None


def test_category_of_total_over_triggers():
    seen = {}
    for label in TRIGGER_LABELS:
        category = category_of(label)
        assert isinstance(category, SdohCategory)
        seen.setdefault(category, []).append(label)
    # substances map to three distinct categories
    assert category_of(SchemaLabel.ALCOHOL) is not category_of(SchemaLabel.TOBACCO)
    assert category_of(SchemaLabel.DRUG) not in (
        category_of(SchemaLabel.ALCOHOL),
        category_of(SchemaLabel.TOBACCO),
    )
    assert category_of(SchemaLabel.LIVING_WITH_OTHERS) is SdohCategory.LIVING_CONDITION
    assert category_of(SchemaLabel.LAST_JOB) is SdohCategory.LAST_JOB
    assert len(seen) == len(SdohCategory)


def test_category_of_rejects_argument_labels():
    with pytest.raises(InvalidInput):
        category_of(SchemaLabel.STATUS_TIME)


def test_label_inventory_shape():
    assert len(list(SchemaLabel)) == 31
    assert len(TRIGGER_LABELS) == 25
    assert len(SPAN_ONLY_LABELS) == 8
