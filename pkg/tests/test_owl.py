from __future__ import annotations

import re

import pytest

from conftest import DATA
from karyograph.atlas import load_atlas, parse_band
from karyograph.iscn import parse_karyotype
from karyograph.model import AbnormalityEvent, EventKind
from karyograph.owl import (
    PATTERNS,
    ExportError,
    band_class,
    entity,
    expand_pattern,
    export_ontology,
    projected_class_count,
    skeleton_class_count,
    validate_document,
)
from karyograph.query import build_corpus


def declared_classes(doc: str) -> list[str]:
    return re.findall(r"^Declaration\(Class\((\S+)\)\)$", doc, re.M)


def test_band_class_names():
    assert band_class(parse_band("2p21")) == "Hu2Bandp21"
    assert band_class(parse_band("1q42.1")) == "Hu1Bandq42_1"
    assert band_class(parse_band("Xqter")) == "HuXBandqter"


def test_entities_escape_into_full_iris():
    assert entity("k45_X") == ":k45_X"
    assert entity("k45_X_-Y") == "<http://www.purl.org/ontolink/karyotype/k45_X_-Y>"


def test_inversion_pattern():
    e = AbnormalityEvent(EventKind.INVERSION, breakpoints=(parse_band("2p21"), parse_band("2q31")))
    assert expand_pattern(PATTERNS[EventKind.INVERSION], e) == (
        "ObjectExactCardinality(1 :hasEvent ObjectIntersectionOf(:Inversion "
        "ObjectSomeValuesFrom(:hasBreakPoint :Hu2Bandp21) ObjectSomeValuesFrom(:hasBreakPoint :Hu2Bandq31)))"
    )


def test_whole_chromosome_patterns():
    y = AbnormalityEvent(EventKind.DELETION, target="Y")
    assert expand_pattern(PATTERNS[EventKind.DELETION], y) == (
        "ObjectExactCardinality(1 :hasEvent ObjectIntersectionOf(:Deletion ObjectSomeValuesFrom(:hasBreakPoint :HumanChromosomeY)))"
    )
    (n,) = parse_karyotype("45,X").events
    assert expand_pattern(PATTERNS[EventKind.DELETION], n).endswith("(:hasBreakPoint :HumanSexChromosome)))")


def test_pattern_mismatch_is_an_error():
    e = AbnormalityEvent(EventKind.INVERSION, breakpoints=(parse_band("2p21"), parse_band("2q31")))
    with pytest.raises(ExportError):
        expand_pattern(PATTERNS[EventKind.TRANSLOCATION], e)
    bad_arity = PATTERNS[EventKind.INVERSION].__class__("inversion", EventKind.INVERSION, frozenset({3}))
    with pytest.raises(ExportError):
        expand_pattern(bad_arity, e)


def test_k45_x_definition(atlas):
    doc = export_ontology(atlas, build_corpus(["45,X"], atlas)).decode()
    lines = set(doc.splitlines())
    assert 'AnnotationAssertion(rdfs:label :k45_X "The 45,X karyotype")' in lines
    assert "SubClassOf(:k45_X :ISCNExampleKaryotype)" in lines
    assert "SubClassOf(:k45_X ObjectSomeValuesFrom(:derivedFrom :k46_XN))" in lines
    assert (
        "SubClassOf(:k45_X ObjectExactCardinality(1 :hasEvent ObjectIntersectionOf(:Deletion "
        "ObjectSomeValuesFrom(:hasBreakPoint :HumanSexChromosome))))"
    ) in lines


def test_sex_definitions(atlas):
    lines = set(export_ontology(atlas).decode().splitlines())
    for sex, base in (("Male", "k46_XY"), ("Female", "k46_XX")):
        assert f"EquivalentClasses(:{sex}Karyotype ObjectUnionOf(:{base} ObjectSomeValuesFrom(:derivedFrom :{base})))" in lines


def test_event_hierarchy(atlas):
    lines = set(export_ontology(atlas).decode().splitlines())
    assert "SubClassOf(:DirectDuplication :Duplication)" in lines
    assert "SubClassOf(:InverseInsertion :Insertion)" in lines
    assert "SubClassOf(:Inversion :Event)" in lines


def test_band_axioms(atlas):
    lines = set(export_ontology(atlas).decode().splitlines())
    assert "SubClassOf(:Hu1Bandq42_1 :Hu1Bandq42)" in lines
    assert "SubClassOf(:Hu1Bandq42_1 ObjectSomeValuesFrom(:isBandOf :HumanChromosome1))" in lines
    assert "SubClassOf(:Hu1Bandq42_1 :Resolution550Band)" in lines
    assert "SubClassOf(:HuXBandq12 :Resolution300Band)" in lines


def test_repeated_events_sum_into_one_cardinality(atlas):
    doc = export_ontology(atlas, build_corpus(["48,XY,+21,+21"], atlas)).decode()
    assert "ObjectExactCardinality(2 :hasEvent ObjectIntersectionOf(:Addition ObjectSomeValuesFrom(:hasBreakPoint :HumanChromosome21)))" in doc


def test_skeleton_only_document():
    empty = load_atlas(DATA / "empty_atlas.tsv")
    doc = export_ontology(empty, build_corpus([], empty)).decode()
    assert validate_document(doc) == []
    classes = declared_classes(doc)
    assert len(classes) == skeleton_class_count()
    assert not [c for c in classes if re.fullmatch(r":Hu\w+Band[pq]\d\w*", c) and not c.endswith(("p10", "q10"))]
    assert not [c for c in classes if c.startswith(":k4") and c not in (":k46_XX", ":k46_XY", ":k46_XN")]
    assert doc.count("Declaration(ObjectProperty(") == 4


def test_breakpoints_outside_the_atlas_are_refused(corpus):
    empty = load_atlas(DATA / "empty_atlas.tsv")
    with pytest.raises(ExportError):
        export_ontology(empty, corpus)


def test_validator_catches_problems():
    assert validate_document("Prefix(:=<http://e/>)\nOntology(<http://e/>\nSubClassOf(:A :B)\n)\n") == [
        "line 3: undeclared entity http://e/A",
        "line 3: undeclared entity http://e/B",
    ]
    assert "unbalanced parentheses at end of document" in validate_document(
        "Prefix(:=<http://e/>)\nOntology(<http://e/>\nDeclaration(Class(:A))\n"
    )
    assert validate_document("Ontology(<http://e/>\n)") == ["document does not end with a newline", "no default prefix"]


def test_output_is_lf_and_sorted(atlas, corpus):
    doc = export_ontology(atlas, corpus).decode()
    assert "\r" not in doc and doc.endswith(")\n")
    body = doc.splitlines()
    decls = [ln for ln in body if ln.startswith("Declaration(Class(")]
    assert decls == sorted(decls)


def test_projected_count_matches_declarations(atlas, corpus):
    doc = export_ontology(atlas, corpus).decode()
    assert len(declared_classes(doc)) == projected_class_count(atlas, corpus)
