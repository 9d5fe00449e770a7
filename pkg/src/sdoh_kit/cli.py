"""The sdoh-kit command line: one binary, one subcommand per pipeline stage.

Exit codes: 0 success, 1 validation/scoring/data errors, 2 usage errors.
Outputs are written atomically (temp file + rename) and every run leaves a
manifest (subcommand, inputs, flags, version, timestamp) alongside its
outputs, so re-runs with identical inputs are byte-identical apart from the
manifest timestamp.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .brat import Document, DocumentAnnotation, serialize_standoff
from .corpus import (
    atomic_write_text,
    default_templates,
    load_corpus,
    load_lexicon,
    load_templates,
    split,
    stats,
    synth,
    write_corpus,
)
from .decode import decode, events_to_annotation
from .errors import SdohKitError
from .labels import schema_description
from .linearize import linearize
from .scoring import (
    MatchCriterion,
    ScoreReport,
    iaa,
    level1_labels,
    score_level1,
    score_level2,
    score_level2_slots,
)
from .schema import to_events, validate
from .sections import SOCIAL_HISTORY, SectionConfig, extract_sections
from .zcodes import completeness_report, default_zcode_map, load_zcode_map
from .brat import EntityAnnotation, Span


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _write_manifest(target: Path, subcommand: str, args: argparse.Namespace) -> None:
    flags = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in vars(args).items()
        if key != "func"
    }
    manifest = {
        "subcommand": subcommand,
        "flags": flags,
        "tool_version": __version__,
        "timestamp": _now(),
    }
    if target.is_dir():
        path = target / "run_manifest.json"
    else:
        path = target.with_name(target.name + ".manifest.json")
    atomic_write_text(path, json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")


def _emit(args: argparse.Namespace, payload: dict, subcommand: str) -> None:
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    out = getattr(args, "out", None)
    if out:
        atomic_write_text(Path(out), text)
        _write_manifest(Path(out), subcommand, args)
    else:
        sys.stdout.write(text)


def _jobs(args: argparse.Namespace) -> int:
    if getattr(args, "jobs", None):
        return max(1, args.jobs)
    return max(1, int(os.environ.get("SDOH_KIT_JOBS", "1")))


def _require_file(path: Path, what: str) -> Path:
    if not path.is_file():
        raise SdohKitError(f"{what} not found: {path}")
    return path


def _section_config(args: argparse.Namespace) -> SectionConfig:
    if getattr(args, "config", None):
        return SectionConfig.load(_require_file(Path(args.config), "section config"))
    return SectionConfig.default()


def cmd_validate(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    violations = [violation for ann in corpus for violation in validate(ann)]
    payload = {
        "n_documents": len(corpus),
        "n_violations": len(violations),
        "violations": [vars(v) for v in violations],
    }
    _emit(args, payload, "validate")
    return 1 if violations else 0


def cmd_section(args: argparse.Namespace) -> int:
    cfg = _section_config(args)
    corpus = load_corpus(args.corpus)
    out_dir = Path(args.out)
    kept = 0
    for ann in corpus:
        section = next(
            (s for s in extract_sections(ann.doc, cfg) if s.name == args.section), None
        )
        if section is None:
            continue
        kept += 1
        rebased = _rebase_annotation(ann, section.span, section.text)
        atomic_write_text(out_dir / f"{ann.doc.id}.txt", section.text)
        atomic_write_text(out_dir / f"{ann.doc.id}.ann", serialize_standoff(rebased))
    _write_manifest(out_dir, "section", args)
    print(f"kept {kept}/{len(corpus)} documents with a {args.section} section")
    return 0


def _rebase_annotation(ann: DocumentAnnotation, span: Span, text: str) -> DocumentAnnotation:
    delta = span.start
    kept_entities = []
    for entity in ann.entities:
        if entity.start >= span.start and entity.end <= span.end:
            spans = tuple(Span(s.start - delta, s.end - delta) for s in entity.spans)
            kept_entities.append(EntityAnnotation(entity.id, entity.label, spans, entity.surface))
    kept_ids = {entity.id for entity in kept_entities}
    relations = tuple(
        r for r in ann.relations if r.trigger in kept_ids and r.argument in kept_ids
    )
    attributes = tuple(a for a in ann.attributes if a.target in kept_ids)
    return DocumentAnnotation(Document(ann.doc.id, text), tuple(kept_entities), relations, attributes)


def cmd_linearize(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)

    def pair(ann: DocumentAnnotation) -> str:
        sequence = linearize(ann.doc, to_events(ann))
        return json.dumps(
            {"doc_id": ann.doc.id, "input": ann.doc.text, "target": sequence.text},
            ensure_ascii=False,
        )

    with ThreadPoolExecutor(max_workers=_jobs(args)) as pool:
        lines = list(pool.map(pair, corpus))
    out = Path(args.out)
    atomic_write_text(out, "\n".join(lines) + ("\n" if lines else ""))
    _write_manifest(out, "linearize", args)
    return 0


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise SdohKitError(f"{path}:{line_no}: bad JSON: {exc}") from exc
    return records


def cmd_decode(args: argparse.Namespace) -> int:
    predictions_path = _require_file(Path(args.predictions), "predictions file")
    corpus = load_corpus(args.corpus)
    docs = {ann.doc.id: ann.doc for ann in corpus}
    records = _read_jsonl(predictions_path)
    generated: dict[str, str] = {}
    for record in records:
        doc_id = record.get("doc_id")
        if doc_id not in docs:
            raise SdohKitError(f"prediction for unknown doc id {doc_id!r}")
        generated[doc_id] = record.get("generated", "")

    def run_one(doc_id: str):
        doc = docs[doc_id]
        events, issues = decode(doc, generated.get(doc_id, ""), lenient=args.lenient_match)
        return doc_id, events_to_annotation(doc, events), issues

    ordered_ids = sorted(docs)
    with ThreadPoolExecutor(max_workers=_jobs(args)) as pool:
        results = list(pool.map(run_one, ordered_ids))

    out_dir = Path(args.out)
    issue_lines = []
    for doc_id, ann, issues in results:
        atomic_write_text(out_dir / f"{doc_id}.txt", docs[doc_id].text)
        atomic_write_text(out_dir / f"{doc_id}.ann", serialize_standoff(ann))
        for issue in issues:
            issue_lines.append(json.dumps(vars(issue), ensure_ascii=False))
    atomic_write_text(out_dir / "issues.jsonl", "\n".join(issue_lines) + ("\n" if issue_lines else ""))
    _write_manifest(out_dir, "decode", args)
    print(f"decoded {len(results)} documents, {len(issue_lines)} issues")
    return 0


def _criteria(name: str) -> list[MatchCriterion]:
    if name == "both":
        return [MatchCriterion.EXACT, MatchCriterion.OVERLAP]
    return [MatchCriterion(name)]


def cmd_score(args: argparse.Namespace) -> int:
    gold_corpus = load_corpus(args.gold)
    pred_corpus = load_corpus(args.pred)
    gold_events = {ann.doc.id: to_events(ann) for ann in gold_corpus}
    pred_events = {ann.doc.id: to_events(ann, strict=False) for ann in pred_corpus}

    payload: dict = {}
    reports: dict[str, ScoreReport] = {}
    if args.level in ("1", "both"):
        gold_sets = {doc_id: level1_labels(events) for doc_id, events in gold_events.items()}
        pred_sets = {
            doc_id: level1_labels(events, on_missing_status="skip")
            for doc_id, events in pred_events.items()
        }
        report = score_level1(gold_sets, pred_sets)
        reports["level1"] = report
        payload["level1"] = report.to_dict()
    if args.level in ("2", "both"):
        scorer = score_level2_slots if args.arg_level else score_level2
        for criterion in _criteria(args.criterion):
            report = scorer(gold_events, pred_events, criterion)
            reports[f"level2_{criterion.value}"] = report
            payload[f"level2_{criterion.value}"] = report.to_dict()

    _emit(args, payload, "score")
    if args.csv:
        _write_score_csv(Path(args.csv), reports)
    return 0


def _write_score_csv(path: Path, reports: dict[str, ScoreReport]) -> None:
    columns = ["level1", "level2_exact", "level2_overlap"]
    categories: list[str] = []
    for report in reports.values():
        for key in report.category_cells:
            if key not in categories:
                categories.append(key)
    lines = ["category," + ",".join(f"{c}_p,{c}_r,{c}_f1" for c in columns)]
    for category in sorted(categories):
        row = [category]
        for column in columns:
            report = reports.get(column)
            cell = report.category_cells.get(category) if report else None
            if cell is None:
                row += ["-", "-", "-"]
            else:
                row += [f"{cell.precision:.4f}", f"{cell.recall:.4f}", f"{cell.f1:.4f}"]
        lines.append(",".join(row))
    macro_row = ["macro"]
    for column in columns:
        report = reports.get(column)
        if report is None:
            macro_row += ["-", "-", "-"]
        else:
            macro_row += [
                f"{report.macro_precision:.4f}",
                f"{report.macro_recall:.4f}",
                f"{report.macro_f1:.4f}",
            ]
    lines.append(",".join(macro_row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def cmd_iaa(args: argparse.Namespace) -> int:
    corpus_a = {ann.doc.id: ann for ann in load_corpus(args.a)}
    corpus_b = {ann.doc.id: ann for ann in load_corpus(args.b)}
    report = iaa(corpus_a, corpus_b)
    _emit(args, report.to_dict(), "iaa")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    table = stats(load_corpus(args.corpus))
    _emit(args, table.to_dict(), "stats")
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    ratios = tuple(float(part) for part in args.ratios.split(","))
    corpus = load_corpus(args.corpus)
    parts = split(corpus, ratios, seed=args.seed)
    names = ["train", "dev", "test"] if len(parts) == 3 else [f"part{i}" for i in range(len(parts))]
    out_dir = Path(args.out)
    for name, part in zip(names, parts):
        write_corpus(out_dir / name, part)
    _write_manifest(out_dir, "split", args)
    print(f"split {len(corpus)} documents into " + "/".join(str(len(p)) for p in parts))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    templates = load_templates(args.templates) if args.templates else default_templates()
    lexicon = load_lexicon(args.lexicon) if args.lexicon else None
    documents = synth(args.n, seed=args.seed, templates=templates, lexicon=lexicon)
    out_dir = Path(args.out)
    write_corpus(out_dir, documents)
    _write_manifest(out_dir, "synth", args)
    print(f"wrote {len(documents)} synthetic documents to {out_dir}")
    return 0


def _read_csv_pairs(path: Path, what: str) -> list[tuple[str, str]]:
    import csv

    pairs = []
    with open(path, encoding="utf-8", newline="") as handle:
        for row in csv.reader(handle):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 2:
                raise SdohKitError(f"{path}: {what} rows need two columns, got {row!r}")
            pairs.append((row[0].strip(), row[1].strip()))
    return pairs


def cmd_zcode_report(args: argparse.Namespace) -> int:
    zmap = load_zcode_map(_require_file(Path(args.map), "z-code map")) if args.map else default_zcode_map()
    code_rows = _read_csv_pairs(_require_file(Path(args.codes), "patient codes"), "patient codes")
    codes: dict[str, set[str]] = {}
    for patient_id, code in code_rows:
        codes.setdefault(patient_id, set()).add(code)

    corpus = load_corpus(args.corpus)
    patient_by_doc = dict(_read_csv_pairs(_require_file(Path(args.manifest), "doc manifest"), "manifest"))
    text_events: dict[str, list] = {}
    for ann in corpus:
        patient_id = patient_by_doc.get(ann.doc.id)
        if patient_id is None:
            raise SdohKitError(f"manifest has no patient for document {ann.doc.id}")
        text_events.setdefault(patient_id, []).extend(to_events(ann, strict=False))

    report = completeness_report(text_events, codes, zmap)
    _emit(args, report.to_dict(), "zcode-report")
    return 0


def cmd_schema_dump(args: argparse.Namespace) -> int:
    _emit(args, schema_description(), "schema-dump")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdoh-kit",
        description="Social-determinants extraction toolkit: corpus tooling, "
        "linearization, decoding and evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"sdoh-kit {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", help="check a corpus against the annotation scheme")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("section", help="extract one section from each note into a new corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--config", "--sections", dest="config", help="section config file (name = pattern lines)"
    )
    p.add_argument("--section", default=SOCIAL_HISTORY)
    p.set_defaults(func=cmd_section)

    p = sub.add_parser("linearize", help="export training pairs as JSONL")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("decode", help="align generated sequences back to offsets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lenient-match", action="store_true")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("score", help="two-level evaluation of predictions against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--level", choices=["1", "2", "both"], default="both")
    p.add_argument("--criterion", choices=["exact", "overlap", "both"], default="both")
    p.add_argument("--arg-level", action="store_true", help="score argument slots independently")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("iaa", help="inter-annotator agreement between two corpora")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_iaa)

    p = sub.add_parser("stats", help="entity and relation distribution of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="deterministic train/dev/test split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ratios", default="0.7,0.1,0.2")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("synth", help="generate a synthetic gold corpus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--templates")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("zcode-report", help="text vs structured completeness comparison")
    p.add_argument("--codes", required=True, help="CSV of patient_id,code")
    p.add_argument("--manifest", required=True, help="CSV of doc_id,patient_id")
    p.add_argument("--corpus", required=True)
    p.add_argument("--map", help="TSV of code, category, optional value")
    p.add_argument("--out")
    p.set_defaults(func=cmd_zcode_report)

    p = sub.add_parser("schema-dump", help="emit the annotation scheme as JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_schema_dump)

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SdohKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
