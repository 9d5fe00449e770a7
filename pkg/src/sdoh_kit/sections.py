"""Rule-based section extraction for semi-structured clinical notes.

A header is a line that consists of a configured pattern, case-insensitively,
optionally followed by a colon and whitespace. Each section runs from the end
of its header line to the start of the next header line (or end of note),
trimmed of surrounding whitespace; header lines never belong to any section.

The published work does not list the header inventory it used, so the
defaults below are a best-effort French set and can be overridden with a
config file (``section_name = pattern``, one pattern per line, repeatable).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .brat import Document, Span
from .errors import SdohKitError

SOCIAL_HISTORY = "social_history"

DEFAULT_SECTION_PATTERNS: tuple[tuple[str, tuple[str, ...]], ...] = (
    (SOCIAL_HISTORY, ("Mode de vie", "Habitus", "Contexte social", "Situation sociale")),
    ("history", ("Antécédents",)),
    ("treatment", ("Traitement", "Traitements")),
    ("disease_history", ("Histoire de la maladie",)),
    ("conclusion", ("Conclusion",)),
)


class InvalidPattern(SdohKitError):
    """A section header pattern failed to compile."""


@dataclass(frozen=True)
class Section:
    name: str
    span: Span
    text: str


@dataclass(frozen=True)
class SectionConfig:
    """Ordered section names with their compiled header patterns."""

    sections: tuple[tuple[str, tuple[re.Pattern, ...]], ...]

    @classmethod
    def from_pairs(cls, pairs) -> "SectionConfig":
        compiled = []
        for name, patterns in pairs:
            if not patterns:
                raise InvalidPattern(f"section {name!r} has no patterns")
            regexes = []
            for pattern in patterns:
                try:
                    regexes.append(re.compile(rf"(?:{pattern})\s*:?\s*$", re.IGNORECASE))
                except re.error as exc:
                    raise InvalidPattern(f"section {name!r}: {pattern!r}: {exc}") from exc
            compiled.append((name, tuple(regexes)))
        return cls(tuple(compiled))

    @classmethod
    def default(cls) -> "SectionConfig":
        return cls.from_pairs(DEFAULT_SECTION_PATTERNS)

    @classmethod
    def load(cls, path: str | Path) -> "SectionConfig":
        """Read a ``name = pattern`` config file; names keep first-seen order."""
        order: list[str] = []
        patterns: dict[str, list[str]] = {}
        for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidPattern(f"{path}:{line_no}: expected 'name = pattern'")
            name, _, pattern = line.partition("=")
            name, pattern = name.strip(), pattern.strip()
            if not name or not pattern:
                raise InvalidPattern(f"{path}:{line_no}: empty name or pattern")
            if name not in patterns:
                order.append(name)
                patterns[name] = []
            patterns[name].append(pattern)
        return cls.from_pairs((name, tuple(patterns[name])) for name in order)

    def match_header(self, line: str) -> str | None:
        """Name of the first section whose pattern matches the full line, if any."""
        for name, regexes in self.sections:
            for regex in regexes:
                if regex.match(line):
                    return name
        return None


def _line_starts(text: str):
    """Yield (start offset, line content without newline) for every line."""
    start = 0
    for line in text.split("\n"):
        yield start, line.rstrip("\r")
        start += len(line) + 1


def extract_sections(note: Document, cfg: SectionConfig | None = None) -> list[Section]:
    """Locate every configured section in the note, in document order.

    Sections never overlap and never include their header line; a note with no
    matched header yields an empty list. Leading and trailing whitespace is
    trimmed out of each section span.
    """
    cfg = cfg or SectionConfig.default()
    headers: list[tuple[str, int, int]] = []  # (name, line start, content start)
    text = note.text
    for start, line in _line_starts(text):
        name = cfg.match_header(line)
        if name is not None:
            content_start = min(start + len(line) + 1, len(text))
            headers.append((name, start, content_start))

    sections: list[Section] = []
    for index, (name, _, content_start) in enumerate(headers):
        content_end = headers[index + 1][1] if index + 1 < len(headers) else len(text)
        begin, end = content_start, max(content_start, content_end)
        while begin < end and text[begin].isspace():
            begin += 1
        while end > begin and text[end - 1].isspace():
            end -= 1
        sections.append(Section(name, Span(begin, end), text[begin:end]))
    return sections


def social_history(note: Document, cfg: SectionConfig | None = None) -> Section | None:
    """The first social-history section of the note, or None; this is the
    filter applied to notes before model inference."""
    for section in extract_sections(note, cfg):
        if section.name == SOCIAL_HISTORY:
            return section
    return None
