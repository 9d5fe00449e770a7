"""Corpus IO, statistics, deterministic splitting, synthetic fixture generation.

A corpus is a directory of ``<doc_id>.txt`` files with ``<doc_id>.ann``
standoff files side by side (a missing .ann is read as an empty annotation).

The synthetic generator renders template sentences whose slots are drawn from
a filler lexicon, producing paired text and gold annotations that always pass
schema validation. Within a document every surface is occurrence-unique, so
linearize/decode round trips are exact; documents violating uniqueness are
redrawn. Templates are plain text with ``{Label}`` slots; a sentence holds at
most one trigger slot, argument slots attach to it, and a StatusTime slot
carries its value as ``{StatusTime=current}``.
"""

from __future__ import annotations

import os
import random
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .brat import (
    AttributeAnnotation,
    Document,
    DocumentAnnotation,
    EntityAnnotation,
    RelationAnnotation,
    Span,
    parse_standoff,
    serialize_standoff,
    strip_bom,
)
from .decode import _SearchText, _identity_fold
from .errors import SdohKitError
from .labels import (
    PERMITTED_TRIGGERS_BY_KIND,
    STATUS_VALUES,
    SUBSTANCE_LABELS,
    RelationKind,
    SchemaLabel,
    is_trigger_label,
)


class BadRatios(SdohKitError):
    pass


class BadTemplate(SdohKitError):
    pass


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partial files."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def load_document_annotation(txt_path: Path) -> DocumentAnnotation:
    text = strip_bom(txt_path.read_bytes().decode("utf-8"))
    ann_path = txt_path.with_suffix(".ann")
    ann_text = ann_path.read_bytes().decode("utf-8") if ann_path.exists() else ""
    return parse_standoff(ann_text, text, doc_id=txt_path.stem)


def load_corpus(directory: str | Path) -> list[DocumentAnnotation]:
    directory = Path(directory)
    if not directory.is_dir():
        raise SdohKitError(f"corpus directory not found: {directory}")
    return [load_document_annotation(path) for path in sorted(directory.glob("*.txt"))]


def write_corpus(directory: str | Path, annotations: Iterable[DocumentAnnotation]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for ann in annotations:
        atomic_write_text(directory / f"{ann.doc.id}.txt", ann.doc.text)
        atomic_write_text(directory / f"{ann.doc.id}.ann", serialize_standoff(ann))


@dataclass(frozen=True)
class DistributionTable:
    n_documents: int
    entity_counts: dict[str, int]
    relation_counts: dict[str, int]

    @property
    def total_entities(self) -> int:
        return sum(self.entity_counts.values())

    @property
    def total_relations(self) -> int:
        return sum(self.relation_counts.values())

    def to_dict(self) -> dict:
        return {
            "n_documents": self.n_documents,
            "entities": dict(sorted(self.entity_counts.items())),
            "relations": dict(sorted(self.relation_counts.items())),
            "total_entities": self.total_entities,
            "total_relations": self.total_relations,
        }


def stats(annotations: Iterable[DocumentAnnotation]) -> DistributionTable:
    """Exact per-label entity and per-kind relation counts."""
    entity_counts: dict[str, int] = {}
    relation_counts: dict[str, int] = {}
    n = 0
    for ann in annotations:
        n += 1
        for entity in ann.entities:
            entity_counts[entity.label.value] = entity_counts.get(entity.label.value, 0) + 1
        for relation in ann.relations:
            relation_counts[relation.kind.value] = relation_counts.get(relation.kind.value, 0) + 1
    return DistributionTable(n, entity_counts, relation_counts)


def split(
    annotations: Sequence[DocumentAnnotation],
    ratios: Sequence[float] = (0.7, 0.1, 0.2),
    seed: int = 0,
) -> tuple[list[DocumentAnnotation], ...]:
    """Partition a corpus by seeded shuffle of lexicographically sorted doc ids.

    Part sizes are floors of ratio*n with the remainder distributed by largest
    fractional part; the partition is exact (no document lost or duplicated)
    and deterministic given the seed.
    """
    if not ratios or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatios(f"ratios must be nonnegative and sum to 1, got {tuple(ratios)}")
    by_id = {ann.doc.id: ann for ann in annotations}
    if len(by_id) != len(annotations):
        raise SdohKitError("corpus has duplicate document ids")
    ids = sorted(by_id)
    random.Random(seed).shuffle(ids)

    n = len(ids)
    sizes = [int(r * n) for r in ratios]
    remainders = sorted(
        range(len(ratios)), key=lambda i: (-(ratios[i] * n - sizes[i]), i)
    )
    for i in range(n - sum(sizes)):
        sizes[remainders[i % len(ratios)]] += 1

    parts: list[list[DocumentAnnotation]] = []
    cursor = 0
    for size in sizes:
        parts.append([by_id[doc_id] for doc_id in ids[cursor : cursor + size]])
        cursor += size
    return tuple(parts)


# --- synthetic fixture generation -----------------------------------------

_SLOT_RE = re.compile(r"\{([A-Za-z_]+)(?:=([a-z]+))?\}")

DEFAULT_TEMPLATES: tuple[str, ...] = (
    "{Living_Alone}.",
    "{Living_WithOthers}.",
    "{MaritalStatus_Single}.",
    "{MaritalStatus_InRelationship}.",
    "{MaritalStatus_Divorced}.",
    "{MaritalStatus_Widowed}.",
    "{Descendants_Yes}.",
    "{Descendants_No}.",
    "Travaille comme {Job}.",
    "{Last_job} avant la retraite.",
    "{Employment_Working}.",
    "{Employment_Unemployed}.",
    "{Employment_Student}.",
    "{Employment_Pensioner}.",
    "{Employment_Other}.",
    "{Tobacco} {StatusTime=current} : {Amount} {Frequency}.",
    "{Tobacco} {StatusTime=past} {History}, exposition de {Duration}.",
    "{Alcohol} {StatusTime=none}.",
    "{Alcohol} {StatusTime=current}, {Amount} {Frequency}, type {Type}.",
    "{Drug} {StatusTime=past}, type {Type}.",
    "{Housing_Yes}.",
    "{Housing_No}.",
    "{PhysicalActivity_Yes} {Frequency}.",
    "{PhysicalActivity_No}.",
    "{Income}.",
    "{Education}.",
    "{Ethnicity}.",
)

DEFAULT_LEXICON: dict[str, tuple[str, ...]] = {
    "Living_Alone": ("Vit seul", "Vit seule à domicile", "Habite seul dans son appartement"),
    "Living_WithOthers": ("Vit avec son épouse", "Vit avec sa soeur", "Vit en EHPAD", "Vit avec ses parents"),
    "MaritalStatus_Single": ("Célibataire", "Sans conjoint régulier"),
    "MaritalStatus_InRelationship": ("Vit en concubinage", "Pacsée", "Marié depuis quarante ans"),
    "MaritalStatus_Divorced": ("Divorcé", "Séparée de son conjoint"),
    "MaritalStatus_Widowed": ("Veuf", "Veuve depuis deux ans"),
    "Descendants_Yes": ("A une descendance nombreuse", "Grand-mère comblée", "Père de famille"),
    "Descendants_No": ("Pas de descendance", "Nullipare", "Sans postérité"),
    "Job": ("soudeur", "courtier en assurances", "infirmière de bloc", "charpentier"),
    "Last_job": ("Magasinier", "Chauffeur routier", "Institutrice"),
    "Employment_Working": ("Travaille toujours", "En activité à temps plein"),
    "Employment_Unemployed": ("Au chômage", "Sans emploi depuis deux ans"),
    "Employment_Student": ("Étudiant en médecine", "Lycéenne en terminale"),
    "Employment_Pensioner": ("Retraité", "Pensionné depuis 2018"),
    "Employment_Other": ("En invalidité", "Mère au foyer", "Travailleur handicapé"),
    "Tobacco": ("Tabagisme", "Intoxication tabagique", "Consommation de tabac"),
    "Alcohol": ("Exogénose", "Ethylisme chronique", "Consommation d'alcool"),
    "Drug": ("Toxicomanie", "Usage de stupéfiants", "Consommation de drogue"),
    "Housing_Yes": ("Habite à Nantes", "Vit dans une maison individuelle", "Propriétaire de son logement"),
    "Housing_No": ("Sans domicile fixe", "Hébergé chez des tiers"),
    "PhysicalActivity_Yes": ("Fait du vélo", "Marche en forêt", "Pratique la natation"),
    "PhysicalActivity_No": ("Sédentaire", "Aucune activité sportive"),
    "Income": ("Bénéficiaire du RSA", "Perçoit l'AAH", "Revenus modestes"),
    "Education": ("Licence en droit", "BTS en informatique", "Certificat d'études primaires"),
    "Ethnicity": ("Originaire du Maroc", "Née en Érythrée", "Né au Portugal"),
    "StatusTime:current": ("actif", "en cours", "actuel"),
    "StatusTime:past": ("sevré", "stoppé", "arrêté"),
    "StatusTime:none": ("nié", "négatif", "jamais"),
    "Amount": ("17 cigarettes", "25 cigarettes", "3 verres", "4 verres", "2 grammes", "5 grammes", "35 paquets", "40 unités"),
    "Duration": ("20 ans", "30 ans", "quinze années", "dix années"),
    "Frequency": ("par jour", "quotidiennement", "par semaine", "le week-end", "occasionnellement", "par mois"),
    "History": ("il y a huit ans", "depuis 2015", "en 2009"),
    "Type": ("vin rouge", "bière blonde", "cannabis", "cocaïne", "filles", "garçons"),
}

_HEADER = "Mode de vie :"


@dataclass(frozen=True)
class SynthSlot:
    label: SchemaLabel
    lexicon_key: str
    kind: RelationKind | None  # None for the trigger slot
    status_value: str | None  # set on StatusTime slots


@dataclass(frozen=True)
class SynthTemplate:
    """A sentence pattern producing one gold event (or standalone entity)."""

    pattern: str
    segments: tuple[tuple[str, SynthSlot | None], ...]  # (literal, following slot)
    trigger: SchemaLabel
    slots: tuple[SynthSlot, ...]

    @classmethod
    def parse(cls, pattern: str) -> "SynthTemplate":
        segments: list[tuple[str, SynthSlot | None]] = []
        slots: list[SynthSlot] = []
        trigger: SchemaLabel | None = None
        cursor = 0
        for match in _SLOT_RE.finditer(pattern):
            literal = pattern[cursor : match.start()]
            cursor = match.end()
            name, value = match.group(1), match.group(2)
            try:
                label = SchemaLabel(name)
            except ValueError:
                raise BadTemplate(f"{pattern!r}: unknown slot label {name!r}") from None
            if is_trigger_label(label):
                if value is not None:
                    raise BadTemplate(f"{pattern!r}: trigger slot {name} cannot carry a value")
                if trigger is not None:
                    raise BadTemplate(f"{pattern!r}: more than one trigger slot")
                trigger = label
                slot = SynthSlot(label, label.value, None, None)
            elif label is SchemaLabel.STATUS_TIME:
                if value not in STATUS_VALUES:
                    raise BadTemplate(f"{pattern!r}: StatusTime slot needs =current/past/none")
                slot = SynthSlot(label, f"StatusTime:{value}", RelationKind.STATUS, value)
            else:
                if value is not None:
                    raise BadTemplate(f"{pattern!r}: argument slot {name} cannot carry a value")
                slot = SynthSlot(label, label.value, RelationKind(label.value), None)
            slots.append(slot)
            segments.append((literal, slot))
        if trigger is None:
            raise BadTemplate(f"{pattern!r}: template has no trigger slot")
        segments.append((pattern[cursor:], None))

        for slot in slots:
            if slot.kind is not None and trigger not in PERMITTED_TRIGGERS_BY_KIND[slot.kind]:
                raise BadTemplate(
                    f"{pattern!r}: {slot.kind.value} relation not permitted on {trigger.value}"
                )
        has_status = any(slot.kind is RelationKind.STATUS for slot in slots)
        if (trigger in SUBSTANCE_LABELS) != has_status:
            raise BadTemplate(f"{pattern!r}: substance triggers need exactly a StatusTime slot")
        if sum(1 for slot in slots if slot.kind is RelationKind.STATUS) > 1:
            raise BadTemplate(f"{pattern!r}: more than one StatusTime slot")
        return cls(pattern, tuple(segments), trigger, tuple(slots))


def load_templates(path: str | Path) -> list[SynthTemplate]:
    """One template pattern per line; blank lines and # comments skipped."""
    templates = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            templates.append(SynthTemplate.parse(line))
    if not templates:
        raise BadTemplate(f"{path}: no templates")
    return templates


def load_lexicon(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Tab-separated ``key<TAB>filler`` lines, several per key."""
    fillers: dict[str, list[str]] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.rstrip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise BadTemplate(f"{path}:{line_no}: expected 'key<TAB>filler'")
        key, _, filler = line.partition("\t")
        fillers.setdefault(key.strip(), []).append(filler.strip())
    return {key: tuple(values) for key, values in fillers.items()}


def default_templates() -> list[SynthTemplate]:
    return [SynthTemplate.parse(pattern) for pattern in DEFAULT_TEMPLATES]


class _Drawer:
    """Per-document filler draws, without replacement per lexicon key."""

    def __init__(self, lexicon: dict[str, tuple[str, ...]], rng: random.Random):
        self.lexicon = lexicon
        self.rng = rng
        self.pools: dict[str, list[str]] = {}

    def draw(self, key: str) -> str:
        pool = self.pools.get(key)
        if not pool:
            fillers = self.lexicon.get(key)
            if not fillers:
                raise BadTemplate(f"lexicon has no fillers for {key!r}")
            pool = list(fillers)
            self.rng.shuffle(pool)
            self.pools[key] = pool
        return pool.pop()


def _render_document(
    doc_id: str,
    templates: Sequence[SynthTemplate],
    lexicon: dict[str, tuple[str, ...]],
    rng: random.Random,
) -> DocumentAnnotation:
    count = rng.randint(1, min(5, len(templates)))
    chosen = rng.sample(list(templates), count)
    drawer = _Drawer(lexicon, rng)

    pieces = [_HEADER, "\n"]
    offset = len(_HEADER) + 1
    entities: list[EntityAnnotation] = []
    relations: list[RelationAnnotation] = []
    attributes: list[AttributeAnnotation] = []

    for template in chosen:
        trigger_entity: EntityAnnotation | None = None
        pending: list[tuple[RelationKind, EntityAnnotation, str | None]] = []
        for literal, slot in template.segments:
            pieces.append(literal)
            offset += len(literal)
            if slot is None:
                continue
            filler = drawer.draw(slot.lexicon_key)
            span = Span(offset, offset + len(filler))
            entity = EntityAnnotation(f"T{len(entities) + 1}", slot.label, (span,), filler)
            entities.append(entity)
            pieces.append(filler)
            offset += len(filler)
            if slot.kind is None:
                trigger_entity = entity
            else:
                pending.append((slot.kind, entity, slot.status_value))
        assert trigger_entity is not None
        for kind, entity, status_value in pending:
            relations.append(
                RelationAnnotation(f"R{len(relations) + 1}", kind, trigger_entity.id, entity.id)
            )
            if status_value is not None:
                attributes.append(
                    AttributeAnnotation(f"A{len(attributes) + 1}", entity.id, status_value)
                )
        pieces.append("\n")
        offset += 1

    text = "".join(pieces)
    return DocumentAnnotation(
        Document(doc_id, text), tuple(entities), tuple(relations), tuple(attributes)
    )


def _surfaces_unique(ann: DocumentAnnotation) -> bool:
    view = _SearchText(ann.doc.text, _identity_fold)
    return all(len(view.occurrences(entity.surface)) == 1 for entity in ann.entities)


def synth(
    n: int,
    seed: int = 0,
    templates: Sequence[SynthTemplate] | None = None,
    lexicon: dict[str, tuple[str, ...]] | None = None,
) -> list[DocumentAnnotation]:
    """Generate n schema-valid documents with gold annotations.

    Deterministic given the seed; each document draws from its own seeded
    stream so generation could be parallelized by index. Documents are redrawn
    until every entity surface occurs exactly once in the text, which makes
    linearize/decode round trips exact by construction.
    """
    templates = list(templates) if templates is not None else default_templates()
    if not templates:
        raise BadTemplate("no templates given")
    lexicon = dict(lexicon) if lexicon is not None else dict(DEFAULT_LEXICON)

    documents = []
    width = max(5, len(str(max(n - 1, 0))))
    for index in range(n):
        rng = random.Random(f"{seed}:{index}")
        doc_id = f"synth-{index:0{width}d}"
        for _ in range(100):
            ann = _render_document(doc_id, templates, lexicon, rng)
            if _surfaces_unique(ann):
                break
        else:
            raise BadTemplate(f"could not draw occurrence-unique surfaces for {doc_id}")
        documents.append(ann)
    return documents
