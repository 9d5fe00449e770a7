"""Completeness comparison between free-text annotations and ICD-10 Z-codes.

Codes are matched by normalized string with dots stripped ("Z59.0" and "Z590"
are the same code) because French PMSI exports vary in formatting. Patients
present in only one input still count toward the cohort size with zero
coverage on the other side. Percentages are rounded half-up to one decimal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping

from .errors import SdohKitError
from .schema import SdohEvent
from .labels import SdohCategory


class UnknownCategory(SdohKitError):
    pass


class DuplicateCode(SdohKitError):
    pass


#: Default code table: (code, category, optional value qualifier). Alcohol
#: withdrawal/monitoring codes carry no single status, so their qualifier is
#: left empty.
DEFAULT_ZCODE_ROWS: tuple[tuple[str, str, str | None], ...] = (
    ("Z502", "Alcohol", None),
    ("Z714", "Alcohol", None),
    ("Z720", "Tobacco", "current"),
    ("Z503", "Drug", None),
    ("Z290", "LivingCondition", "alone"),
    ("Z602", "LivingCondition", "alone"),
    ("Z370", "Descendants", "yes"),
    ("Z372", "Descendants", "yes"),
    ("Z391", "Descendants", "yes"),
    ("Z392", "Descendants", "yes"),
    ("Z590", "Housing", "no"),
    ("Z598", "Housing", "no"),
    ("Z603", "Ethnicity", None),
)


def normalize_code(code: str) -> str:
    return code.strip().upper().replace(".", "")


@dataclass(frozen=True)
class ZCodeMap:
    """Mapping from normalized ICD-10 code to (category, optional qualifier)."""

    entries: dict[str, tuple[SdohCategory, str | None]]

    def category_for(self, code: str) -> SdohCategory | None:
        entry = self.entries.get(normalize_code(code))
        return entry[0] if entry else None


def _build_map(rows: Iterable[tuple[str, str, str | None]]) -> ZCodeMap:
    entries: dict[str, tuple[SdohCategory, str | None]] = {}
    for code, category_name, qualifier in rows:
        normalized = normalize_code(code)
        if normalized in entries:
            raise DuplicateCode(f"code {normalized} appears more than once")
        try:
            category = SdohCategory(category_name)
        except ValueError:
            valid = ", ".join(c.value for c in SdohCategory)
            raise UnknownCategory(f"{category_name!r} for code {code} (expected one of {valid})") from None
        entries[normalized] = (category, qualifier or None)
    return ZCodeMap(entries)


def default_zcode_map() -> ZCodeMap:
    return _build_map(DEFAULT_ZCODE_ROWS)


def load_zcode_map(path: str | Path) -> ZCodeMap:
    """Read a two-or-three-column TSV: code, category, optional value."""
    rows: list[tuple[str, str, str | None]] = []
    with open(path, encoding="utf-8", newline="") as handle:
        for record in csv.reader(handle, delimiter="\t"):
            if not record or record[0].strip().startswith("#"):
                continue
            if len(record) < 2:
                raise UnknownCategory(f"row {record!r} needs at least code and category")
            code, category = record[0], record[1]
            qualifier = record[2].strip() if len(record) > 2 and record[2].strip() else None
            rows.append((code, category, qualifier))
    return _build_map(rows)


def percent(count: int, total: int) -> float:
    """count/total as a percentage rounded half-up to one decimal."""
    if total == 0:
        return 0.0
    value = Decimal(count) * 100 / Decimal(total)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class CompletenessReport:
    n_patients: int
    text_count: int
    text_percent: float
    structured_count: int
    structured_percent: float
    overlap_count: int  # patients with the same category in both sources
    copresence_count: int  # patients with any finding in both sources

    def to_dict(self) -> dict:
        return {
            "n_patients": self.n_patients,
            "text": {"count": self.text_count, "percent": self.text_percent},
            "structured": {"count": self.structured_count, "percent": self.structured_percent},
            "overlap_same_category": self.overlap_count,
            "copresence_any_category": self.copresence_count,
        }


def completeness_report(
    text_events: Mapping[str, list[SdohEvent]],
    codes: Mapping[str, set[str]],
    zmap: ZCodeMap | None = None,
) -> CompletenessReport:
    """Compare SDoH coverage per patient between annotated text and Z-codes.

    The cohort is the union of patient ids from both inputs. Overlap counts
    patients for whom some mapped code's category equals some text event's
    category; co-presence (any category on both sides) is also reported.
    """
    zmap = zmap or default_zcode_map()
    patients = set(text_events) | set(codes)

    text_count = structured_count = overlap = copresence = 0
    for patient in patients:
        text_categories = {event.category for event in text_events.get(patient, [])}
        coded_categories = {
            category
            for code in codes.get(patient, set())
            if (category := zmap.category_for(code)) is not None
        }
        if text_categories:
            text_count += 1
        if coded_categories:
            structured_count += 1
        if text_categories and coded_categories:
            copresence += 1
            if text_categories & coded_categories:
                overlap += 1

    n = len(patients)
    return CompletenessReport(
        n_patients=n,
        text_count=text_count,
        text_percent=percent(text_count, n),
        structured_count=structured_count,
        structured_percent=percent(structured_count, n),
        overlap_count=overlap,
        copresence_count=copresence,
    )
