"""Toolkit for extracting social determinants of health from clinical notes.

Pipeline pieces: BRAT standoff parsing, schema validation and event assembly,
section extraction, event linearization for a seq2seq model, decoding of
generated sequences back to character offsets, two-level evaluation,
inter-annotator agreement, corpus tooling and structured-data comparison.
"""

__version__ = "0.1.0"

from .brat import (
    AttributeAnnotation,
    DanglingReference,
    Document,
    DocumentAnnotation,
    EntityAnnotation,
    MalformedLine,
    OffsetOutOfRange,
    RelationAnnotation,
    Span,
    SurfaceMismatch,
    parse_standoff,
    serialize_standoff,
)
from .corpus import (
    BadRatios,
    BadTemplate,
    DistributionTable,
    SynthTemplate,
    load_corpus,
    split,
    stats,
    synth,
    write_corpus,
)
from .decode import DecodeIssue, RawEvent, align, decode, events_to_annotation, parse_sequence
from .errors import InvalidInput, KeyMismatch, SdohKitError
from .labels import (
    ARGUMENT_LABELS,
    STATUS_VALUES,
    SUBSTANCE_LABELS,
    TRIGGER_LABELS,
    RelationKind,
    SchemaLabel,
    SdohCategory,
    category_of,
    schema_description,
)
from .linearize import NONE_TOKEN, SEP_TOKEN, LinearizedSequence, linearize
from .schema import SchemaViolation, SdohEvent, to_events, validate
from .scoring import (
    LEVEL1_LABELS,
    IaaReport,
    MatchCriterion,
    ScoreCell,
    ScoreReport,
    equivalent,
    iaa,
    level1_labels,
    score_level1,
    score_level2,
    score_level2_slots,
)
from .sections import Section, SectionConfig, extract_sections, social_history
from .zcodes import (
    CompletenessReport,
    DuplicateCode,
    UnknownCategory,
    ZCodeMap,
    completeness_report,
    default_zcode_map,
    load_zcode_map,
)
