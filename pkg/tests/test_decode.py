import random

from sdoh_kit.brat import Document, Span
from sdoh_kit.decode import align, decode, events_to_annotation, parse_sequence
from sdoh_kit.labels import RelationKind, SchemaLabel
from sdoh_kit.linearize import linearize
from sdoh_kit.schema import to_events, validate
from sdoh_kit.scoring import MatchCriterion, equivalent
from sdoh_kit.corpus import synth


# --- parsing ----------------------------------------------------------------


def test_parse_simple_event():
    events, issues = parse_sequence("[Tobacco] tabac [StatusTime:none] non fumeur")
    assert issues == []
    assert len(events) == 1
    event = events[0]
    assert event.label is SchemaLabel.TOBACCO
    assert event.trigger_surface == "tabac"
    assert event.status_value == "none"
    assert event.status_surface == "non fumeur"
    assert event.args == []


def test_parse_unbracketed_output_is_malformed():
    events, issues = parse_sequence("Tobacco tabac")
    assert events == []
    assert [issue.kind for issue in issues] == ["MalformedOutput"]
    assert issues[0].payload == "Tobacco tabac"


def test_parse_unknown_label():
    events, issues = parse_sequence("[Tobaco] tabac")
    assert events == []
    assert [issue.kind for issue in issues] == ["UnknownLabel"]
    assert issues[0].payload == "[Tobaco] tabac"


def test_parse_none_sentinel():
    assert parse_sequence("[NONE]") == ([], [])
    assert parse_sequence("  [NONE]  ") == ([], [])
    assert parse_sequence("") == ([], [])


def test_parse_multi_event_with_args():
    text = "[Alcohol] OH [StatusTime:past] sevré [Amount] 3 verres [SEP] [Job] soudeur"
    events, issues = parse_sequence(text)
    assert issues == []
    assert [event.label for event in events] == [SchemaLabel.ALCOHOL, SchemaLabel.JOB]
    assert events[0].args == [(RelationKind.AMOUNT, "3 verres")]


def test_parse_keeps_healthy_events_around_malformed_fragments():
    text = "stray [Tobacco] tabac [StatusTime:current] actif [Amout] 3 [SEP] [Tobaco] x [SEP] [Job] soudeur"
    events, issues = parse_sequence(text)
    assert [event.label for event in events] == [SchemaLabel.TOBACCO, SchemaLabel.JOB]
    kinds = sorted(issue.kind for issue in issues)
    assert kinds == ["MalformedOutput", "UnknownLabel", "UnknownLabel"]
    payloads = {issue.payload for issue in issues}
    assert "stray" in payloads
    assert "[Amout] 3" in payloads
    assert "[Tobaco] x" in payloads


def test_parse_status_on_non_substance_is_malformed():
    events, issues = parse_sequence("[Job] soudeur [StatusTime:current] actif")
    assert len(events) == 1
    assert events[0].status_value is None
    assert [issue.kind for issue in issues] == ["MalformedOutput"]


def test_parse_conservation_every_drop_has_one_issue():
    text = "[Tobacco] [SEP] [Frequency] par jour [SEP] [Tobacco] tabac [StatusTime:current] oui"
    events, issues = parse_sequence(text)
    assert len(events) == 1  # only the final well-formed event survives
    assert len(issues) == 2  # empty trigger fragment + orphan Frequency fragment
    assert all(issue.kind == "MalformedOutput" for issue in issues)


# --- alignment --------------------------------------------------------------


def test_double_trigger_leftmost_unconsumed():
    doc = Document("d", "fume. fume.")
    raw, _ = parse_sequence("[Tobacco] fume [StatusTime:current] fume [SEP] [Tobacco] fume")
    # drop the statuses to keep the fixture minimal: build raw events directly
    raw, _ = parse_sequence("[Job] fume [SEP] [Job] fume")
    events, issues = align(doc, raw)
    assert [event.trigger.spans[0] for event in events] == [Span(0, 4), Span(6, 10)]
    # both occurrences consumed: no ambiguity diagnostic
    assert issues == []


def test_trigger_occurrences_exhausted():
    doc = Document("d", "fume.")
    raw, _ = parse_sequence("[Job] fume [SEP] [Job] fume")
    events, issues = align(doc, raw)
    assert len(events) == 1
    assert [issue.kind for issue in issues] == ["DuplicateExhausted"]


def test_nearest_argument_resolution():
    text = "tabac 10 paquets par an, alcool 10 verres"
    doc = Document("d", text)
    raw, _ = parse_sequence("[Alcohol] alcool [StatusTime:current] alcool [Amount] 10")
    raw[0].status_value = None  # keep only the Amount argument in play
    raw[0].status_surface = None
    events, issues = align(doc, raw)
    amount = [argument for kind, argument in events[0].args if kind is RelationKind.AMOUNT]
    assert amount[0].spans == (Span(32, 34),)  # the second "10", nearest the trigger
    assert any(issue.kind == "DuplicateExhausted" for issue in issues)  # ambiguity diagnostic


def test_unaligned_trigger_drops_event():
    doc = Document("d", "aucun mot pertinent")
    raw, _ = parse_sequence("[Tobacco] introuvable [StatusTime:none] rien")
    events, issues = align(doc, raw)
    assert events == []
    assert "UnalignedTrigger" in [issue.kind for issue in issues]


def test_unaligned_argument_keeps_event_and_status_value():
    doc = Document("d", "tabac actif ici")
    raw, _ = parse_sequence("[Tobacco] tabac [StatusTime:current] zzz [Amount] www")
    events, issues = align(doc, raw)
    assert len(events) == 1
    event = events[0]
    assert event.status == "current"  # value kept although the anchor is lost
    assert event.args == ()
    assert sorted(issue.kind for issue in issues) == ["UnalignedArgument", "UnalignedArgument"]


def test_accent_damage_strict_vs_lenient():
    text = "Il prend de la cocaïne."
    doc = Document("d", text)
    # tokenizer dropped the accented char entirely: "cocane" for "cocaïne"
    raw, _ = parse_sequence("[Drug] cocane")
    strict_events, strict_issues = align(doc, raw)
    assert strict_events == [] and strict_issues[0].kind == "UnalignedTrigger"
    lenient_events, lenient_issues = align(doc, raw, lenient=True)
    assert len(lenient_events) == 1
    assert lenient_events[0].trigger.surface == "cocaïne"
    assert lenient_events[0].trigger.spans == (Span(15, 22),)


def test_casefold_lenient_pass():
    doc = Document("d", "Il a fumé au café.")
    raw, _ = parse_sequence("[Job] CAFE")
    assert align(doc, raw)[0] == []
    events, _ = align(doc, raw, lenient=True)
    assert len(events) == 1
    assert events[0].trigger.surface == "café"


def test_whitespace_collapsed_matching():
    doc = Document("d", "vit  avec\nsa soeur")
    raw, _ = parse_sequence("[Living_WithOthers] vit avec sa soeur")
    events, issues = align(doc, raw)
    assert issues == []
    assert events[0].trigger.spans == (Span(0, 18),)
    assert events[0].trigger.surface == "vit  avec\nsa soeur"


def test_arguments_do_not_consume_occurrences():
    text = "boit 3 verres et fume 3 verres"
    doc = Document("d", text)
    raw, _ = parse_sequence(
        "[Alcohol] boit [StatusTime:current] boit [SEP] [Tobacco] fume [StatusTime:current] fume"
    )
    raw[0].args.append((RelationKind.AMOUNT, "3 verres"))
    raw[1].args.append((RelationKind.AMOUNT, "3 verres"))
    events, _ = align(doc, raw)
    amounts = [
        argument.spans[0]
        for event in events
        for kind, argument in event.args
        if kind is RelationKind.AMOUNT
    ]
    # both arguments legally point somewhere; nearest rule separates them here
    assert amounts[0] == Span(5, 13)
    assert amounts[1] == Span(22, 30)


def test_status_anchor_aligns_like_argument():
    text = "Tabagisme actif à 17 cigarettes"
    doc = Document("d", text)
    events, issues = decode(doc, "[Tobacco] Tabagisme [StatusTime:current] actif")
    assert issues == []
    event = events[0]
    anchors = [argument for kind, argument in event.args if kind is RelationKind.STATUS]
    assert anchors[0].spans == (Span(10, 15),)
    assert event.status == "current"


# --- round trips ------------------------------------------------------------


def test_round_trip_exact_on_occurrence_unique_docs():
    for ann in synth(40, seed=11):
        gold = to_events(ann)
        sequence = linearize(ann.doc, gold)
        events, issues = decode(ann.doc, sequence.text)
        assert issues == []
        assert len(events) == len(gold)
        for gold_event, decoded_event in zip(gold, events):
            assert equivalent(gold_event, decoded_event, MatchCriterion.EXACT)


def test_round_trip_flagged_or_overlap_equivalent_on_duplicates():
    # Gold whose second trigger surface equals the first: leftmost-unconsumed
    # still recovers both, in order.
    text = "fume. fume."
    doc = Document("d", text)
    from helpers import make_entity

    gold = [
        # two Job events share the surface "fume"
        # (Job used to avoid status plumbing in the fixture)
        *(
            __import__("sdoh_kit").schema.SdohEvent(
                trigger=make_entity(f"T{i+1}", SchemaLabel.JOB, text, span)
            )
            for i, span in enumerate([(0, 4), (6, 10)])
        )
    ]
    sequence = linearize(doc, gold)
    events, issues = decode(doc, sequence.text)
    assert [event.trigger.spans[0] for event in events] == [Span(0, 4), Span(6, 10)]
    assert issues == []


def test_events_to_annotation_is_schema_valid_and_deduped():
    ann = synth(1, seed=3)[0]
    gold = to_events(ann)
    sequence = linearize(ann.doc, gold)
    events, _ = decode(ann.doc, sequence.text)
    rebuilt = events_to_annotation(ann.doc, events)
    assert validate(rebuilt) == []
    # entity ids unique
    ids = [entity.id for entity in rebuilt.entities]
    assert len(ids) == len(set(ids))


def test_random_generated_noise_never_crashes():
    rng = random.Random(99)
    doc = Document("d", "Tabagisme actif à 17 cigarettes par jour. fume. fume.")
    tokens = [
        "[Tobacco]", "[SEP]", "[StatusTime:current]", "[Amout]", "]", "[", "tabac",
        "actif", "fume", "[NONE]", "\t", "17", "[Job]", "cigarettes",
    ]
    for _ in range(300):
        generated = " ".join(rng.choice(tokens) for _ in range(rng.randint(0, 12)))
        events, issues = decode(doc, generated, lenient=rng.random() < 0.5)
        for issue in issues:
            assert issue.kind in {
                "MalformedOutput",
                "UnknownLabel",
                "UnalignedTrigger",
                "UnalignedArgument",
                "DuplicateExhausted",
            }
