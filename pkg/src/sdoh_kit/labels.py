"""The 31-label annotation scheme: entity labels, relation kinds, scoring categories.

The enumerations in this module are the source of truth for the whole toolkit;
``sdoh-kit schema-dump`` emits them as JSON for downstream tools.
"""

from __future__ import annotations

from enum import Enum

from .errors import InvalidInput


class SchemaLabel(str, Enum):
    """Entity labels. The first 25 are trigger-eligible, the last 6 argument-only."""

    LIVING_ALONE = "Living_Alone"
    LIVING_WITH_OTHERS = "Living_WithOthers"
    MARITAL_STATUS_SINGLE = "MaritalStatus_Single"
    MARITAL_STATUS_IN_RELATIONSHIP = "MaritalStatus_InRelationship"
    MARITAL_STATUS_DIVORCED = "MaritalStatus_Divorced"
    MARITAL_STATUS_WIDOWED = "MaritalStatus_Widowed"
    DESCENDANTS_YES = "Descendants_Yes"
    DESCENDANTS_NO = "Descendants_No"
    JOB = "Job"
    LAST_JOB = "Last_job"
    EMPLOYMENT_WORKING = "Employment_Working"
    EMPLOYMENT_UNEMPLOYED = "Employment_Unemployed"
    EMPLOYMENT_STUDENT = "Employment_Student"
    EMPLOYMENT_PENSIONER = "Employment_Pensioner"
    EMPLOYMENT_OTHER = "Employment_Other"
    ALCOHOL = "Alcohol"
    TOBACCO = "Tobacco"
    DRUG = "Drug"
    HOUSING_YES = "Housing_Yes"
    HOUSING_NO = "Housing_No"
    PHYSICAL_ACTIVITY_YES = "PhysicalActivity_Yes"
    PHYSICAL_ACTIVITY_NO = "PhysicalActivity_No"
    INCOME = "Income"
    EDUCATION = "Education"
    ETHNICITY = "Ethnicity"
    STATUS_TIME = "StatusTime"
    HISTORY = "History"
    DURATION = "Duration"
    AMOUNT = "Amount"
    FREQUENCY = "Frequency"
    TYPE = "Type"


class RelationKind(str, Enum):
    STATUS = "Status"
    AMOUNT = "Amount"
    DURATION = "Duration"
    FREQUENCY = "Frequency"
    HISTORY = "History"
    TYPE = "Type"


class SdohCategory(str, Enum):
    """The 14 category rows used for per-category scoring."""

    LIVING_CONDITION = "LivingCondition"
    MARITAL_STATUS = "MaritalStatus"
    DESCENDANTS = "Descendants"
    HOUSING = "Housing"
    EMPLOYMENT = "Employment"
    ALCOHOL = "Alcohol"
    TOBACCO = "Tobacco"
    DRUG = "Drug"
    PHYSICAL_ACTIVITY = "PhysicalActivity"
    JOB = "Job"
    LAST_JOB = "LastJob"
    INCOME = "Income"
    EDUCATION = "Education"
    ETHNICITY = "Ethnicity"


#: Closed set of values a StatusValue attribute may carry.
STATUS_VALUES: frozenset[str] = frozenset({"current", "past", "none"})

_ALL_LABELS: tuple[SchemaLabel, ...] = tuple(SchemaLabel)

#: Labels that may anchor an event (the 25 SDoH entity labels).
TRIGGER_LABELS: tuple[SchemaLabel, ...] = _ALL_LABELS[:25]

#: Labels that may only appear as relation arguments.
ARGUMENT_LABELS: tuple[SchemaLabel, ...] = _ALL_LABELS[25:]

#: Substance-use triggers; these require a Status relation.
SUBSTANCE_LABELS: frozenset[SchemaLabel] = frozenset(
    {SchemaLabel.ALCOHOL, SchemaLabel.TOBACCO, SchemaLabel.DRUG}
)

#: Trigger labels whose events carry no value at the category-presence level
#: (substances become value-labeled through their status instead).
SPAN_ONLY_LABELS: frozenset[SchemaLabel] = frozenset(
    {
        SchemaLabel.JOB,
        SchemaLabel.LAST_JOB,
        SchemaLabel.INCOME,
        SchemaLabel.EDUCATION,
        SchemaLabel.ETHNICITY,
    }
) | SUBSTANCE_LABELS

_CATEGORY_BY_LABEL: dict[SchemaLabel, SdohCategory] = {
    SchemaLabel.LIVING_ALONE: SdohCategory.LIVING_CONDITION,
    SchemaLabel.LIVING_WITH_OTHERS: SdohCategory.LIVING_CONDITION,
    SchemaLabel.MARITAL_STATUS_SINGLE: SdohCategory.MARITAL_STATUS,
    SchemaLabel.MARITAL_STATUS_IN_RELATIONSHIP: SdohCategory.MARITAL_STATUS,
    SchemaLabel.MARITAL_STATUS_DIVORCED: SdohCategory.MARITAL_STATUS,
    SchemaLabel.MARITAL_STATUS_WIDOWED: SdohCategory.MARITAL_STATUS,
    SchemaLabel.DESCENDANTS_YES: SdohCategory.DESCENDANTS,
    SchemaLabel.DESCENDANTS_NO: SdohCategory.DESCENDANTS,
    SchemaLabel.JOB: SdohCategory.JOB,
    SchemaLabel.LAST_JOB: SdohCategory.LAST_JOB,
    SchemaLabel.EMPLOYMENT_WORKING: SdohCategory.EMPLOYMENT,
    SchemaLabel.EMPLOYMENT_UNEMPLOYED: SdohCategory.EMPLOYMENT,
    SchemaLabel.EMPLOYMENT_STUDENT: SdohCategory.EMPLOYMENT,
    SchemaLabel.EMPLOYMENT_PENSIONER: SdohCategory.EMPLOYMENT,
    SchemaLabel.EMPLOYMENT_OTHER: SdohCategory.EMPLOYMENT,
    SchemaLabel.ALCOHOL: SdohCategory.ALCOHOL,
    SchemaLabel.TOBACCO: SdohCategory.TOBACCO,
    SchemaLabel.DRUG: SdohCategory.DRUG,
    SchemaLabel.HOUSING_YES: SdohCategory.HOUSING,
    SchemaLabel.HOUSING_NO: SdohCategory.HOUSING,
    SchemaLabel.PHYSICAL_ACTIVITY_YES: SdohCategory.PHYSICAL_ACTIVITY,
    SchemaLabel.PHYSICAL_ACTIVITY_NO: SdohCategory.PHYSICAL_ACTIVITY,
    SchemaLabel.INCOME: SdohCategory.INCOME,
    SchemaLabel.EDUCATION: SdohCategory.EDUCATION,
    SchemaLabel.ETHNICITY: SdohCategory.ETHNICITY,
}


def category_of(label: SchemaLabel) -> SdohCategory:
    """Map a trigger-eligible label to its scoring category.

    Raises InvalidInput for argument-only labels, which have no category.
    """
    try:
        return _CATEGORY_BY_LABEL[label]
    except KeyError:
        raise InvalidInput(f"label {label.value} is argument-only and has no category") from None


#: Entity label a relation argument must carry, per relation kind.
ARGUMENT_LABEL_BY_KIND: dict[RelationKind, SchemaLabel] = {
    RelationKind.STATUS: SchemaLabel.STATUS_TIME,
    RelationKind.AMOUNT: SchemaLabel.AMOUNT,
    RelationKind.DURATION: SchemaLabel.DURATION,
    RelationKind.FREQUENCY: SchemaLabel.FREQUENCY,
    RelationKind.HISTORY: SchemaLabel.HISTORY,
    RelationKind.TYPE: SchemaLabel.TYPE,
}

# Permitted trigger labels per relation kind. History may attach to any
# trigger. Duration is permitted on the three substances (the published
# pairing table repeats Amount in the Duration rows, an apparent typo).
PERMITTED_TRIGGERS_BY_KIND: dict[RelationKind, frozenset[SchemaLabel]] = {
    RelationKind.STATUS: SUBSTANCE_LABELS,
    RelationKind.AMOUNT: SUBSTANCE_LABELS | {SchemaLabel.DESCENDANTS_YES},
    RelationKind.DURATION: SUBSTANCE_LABELS,
    RelationKind.FREQUENCY: SUBSTANCE_LABELS
    | {SchemaLabel.PHYSICAL_ACTIVITY_YES, SchemaLabel.PHYSICAL_ACTIVITY_NO},
    RelationKind.HISTORY: frozenset(TRIGGER_LABELS),
    RelationKind.TYPE: SUBSTANCE_LABELS | {SchemaLabel.DESCENDANTS_YES},
}

#: Relation kinds that are mandatory for a given trigger label.
REQUIRED_KINDS_BY_TRIGGER: dict[SchemaLabel, frozenset[RelationKind]] = {
    label: frozenset({RelationKind.STATUS}) for label in SUBSTANCE_LABELS
}


def is_trigger_label(label: SchemaLabel) -> bool:
    return label in _CATEGORY_BY_LABEL


def schema_description() -> dict:
    """Machine-readable dump of the annotation scheme (labels, categories, pairings)."""
    return {
        "labels": {
            "trigger": [label.value for label in TRIGGER_LABELS],
            "argument": [label.value for label in ARGUMENT_LABELS],
        },
        "categories": [cat.value for cat in SdohCategory],
        "category_of": {label.value: cat.value for label, cat in _CATEGORY_BY_LABEL.items()},
        "status_values": sorted(STATUS_VALUES),
        "relation_kinds": [kind.value for kind in RelationKind],
        "argument_label_by_kind": {
            kind.value: label.value for kind, label in ARGUMENT_LABEL_BY_KIND.items()
        },
        "permitted_pairings": {
            kind.value: sorted(label.value for label in labels)
            for kind, labels in PERMITTED_TRIGGERS_BY_KIND.items()
        },
        "required_pairings": {
            label.value: sorted(kind.value for kind in kinds)
            for label, kinds in REQUIRED_KINDS_BY_TRIGGER.items()
        },
    }
