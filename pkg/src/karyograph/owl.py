"""OWL functional-syntax export of the atlas and a karyotype corpus.

Karyotype definitions are produced by pattern expansion: each event kind has
an :class:`AxiomPattern` rendering ``exactly n hasEvent (Kind and hasBreakPoint
some B1 ...)``. Output is sorted and LF-terminated, so identical inputs give
identical bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .atlas import AUTOSOMES, CHROMOSOMES, RESOLUTIONS, UNKNOWN_SEX_CHROMOSOME, BandAddress, BandAtlas, Special
from .model import AbnormalityEvent, BaseKaryotype, EventKind, breakpoint_arities
from .query import Corpus

BASE_IRI = "http://www.purl.org/ontolink/karyotype/"

PREFIXES = (
    ("", BASE_IRI),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
)

OBJECT_PROPERTIES = ("derivedFrom", "hasBreakPoint", "hasEvent", "isBandOf")

_PLAIN_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ExportError(ValueError):
    pass


def entity(name: str) -> str:
    """Render a local name as ``:name`` or, when it needs escaping, a full IRI."""
    if _PLAIN_NAME.fullmatch(name):
        return ":" + name
    return f"<{BASE_IRI}{name}>"


def literal(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def chromosome_class(chromosome: str) -> str:
    if chromosome == UNKNOWN_SEX_CHROMOSOME:
        return "HumanSexChromosome"
    return f"HumanChromosome{chromosome}"


def band_class(band: BandAddress) -> str:
    """``Hu2Bandp21``; sub-band dots become underscores (``Hu1Bandq42_1``)."""
    return f"Hu{band.chromosome}Band{band.local_text.replace('.', '_')}"


def resolution_class(resolution: int) -> str:
    return f"Resolution{resolution}Band"


@dataclass(frozen=True)
class AxiomPattern:
    name: str
    kind: EventKind
    arities: frozenset[int]


PATTERNS = {kind: AxiomPattern(kind.value[0].lower() + kind.value[1:], kind, breakpoint_arities(kind)) for kind in EventKind}


def event_arguments(event: AbnormalityEvent) -> list[str]:
    """Class names filling the breakpoint slots of ``event``."""
    if event.is_whole_chromosome:
        return [chromosome_class(event.target)]
    return [band_class(b) for b in event.breakpoints]


def expand_pattern(pattern: AxiomPattern, event: AbnormalityEvent, n: int | None = None) -> str:
    """The exact-cardinality class expression for ``event`` (``n`` defaults to its multiplicity)."""
    if event.kind is not pattern.kind:
        raise ExportError(f"pattern {pattern.name} cannot expand a {event.kind.value} event")
    args = event_arguments(event)
    if len(args) not in pattern.arities:
        raise ExportError(f"pattern {pattern.name} takes {sorted(pattern.arities)} breakpoints, got {len(args)}")
    n = event.multiplicity if n is None else n
    parts = " ".join(f"ObjectSomeValuesFrom(:hasBreakPoint {entity(a)})" for a in args)
    return f"ObjectExactCardinality({n} :hasEvent ObjectIntersectionOf({entity(pattern.kind.value)} {parts}))"


class _Document:
    def __init__(self) -> None:
        self.classes: set[str] = set()
        self.axioms: set[str] = set()

    def declare(self, name: str, parent: str | None = None, label: str | None = None) -> None:
        self.classes.add(name)
        if parent is not None:
            self.subclass(name, entity(parent))
        if label is not None:
            self.axioms.add(f"AnnotationAssertion(rdfs:label {entity(name)} {literal(label)})")

    def subclass(self, name: str, expression: str) -> None:
        self.axioms.add(f"SubClassOf({entity(name)} {expression})")

    def render(self) -> str:
        lines = [f"Prefix({p}:=<{iri}>)" for p, iri in PREFIXES]
        lines.append(f"Ontology(<{BASE_IRI}>")
        lines += sorted(f"Declaration(ObjectProperty({entity(p)}))" for p in OBJECT_PROPERTIES)
        lines += sorted(f"Declaration(Class({entity(c)}))" for c in self.classes)
        lines += sorted(self.axioms)
        lines.append(")")
        return "\n".join(lines) + "\n"


def _skeleton(doc: _Document) -> None:
    doc.declare("Karyotype")
    for name in ("ISCNExampleKaryotype", "NamedKaryotype"):
        doc.declare(name, "Karyotype")
    for base in BaseKaryotype:
        doc.declare(base.class_name, "NamedKaryotype", f"The {base.value} karyotype")
    for name, base in (("MaleKaryotype", BaseKaryotype.XY), ("FemaleKaryotype", BaseKaryotype.XX)):
        doc.declare(name, "NamedKaryotype")
        b = entity(base.class_name)
        doc.axioms.add(f"EquivalentClasses({entity(name)} ObjectUnionOf({b} ObjectSomeValuesFrom(:derivedFrom {b})))")

    doc.declare("Event")
    for kind in EventKind:
        doc.declare(kind.value, "Event" if kind.general is kind else kind.general.value)

    doc.declare("HumanChromosome")
    doc.declare("HumanAutosome", "HumanChromosome")
    doc.declare("HumanSexChromosome", "HumanChromosome")
    for chrom in CHROMOSOMES:
        doc.declare(chromosome_class(chrom), "HumanAutosome" if chrom in AUTOSOMES else "HumanSexChromosome")

    doc.declare("HumanChromosomeBand")
    doc.declare("HumanCentromere", "HumanChromosomeBand")
    doc.declare("HumanTelomere", "HumanChromosomeBand")
    for r in RESOLUTIONS:
        doc.declare(resolution_class(r), "HumanChromosomeBand")
    for chrom in CHROMOSOMES:
        for arm in ("p", "q"):
            for special, parent in ((BandAddress.centromere(chrom, arm), "HumanCentromere"),
                                    (BandAddress.telomere(chrom, arm), "HumanTelomere")):
                _band(doc, special, parent)


def _band(doc: _Document, band: BandAddress, parent: str) -> None:
    name = band_class(band)
    doc.declare(name, parent, str(band))
    doc.subclass(name, f"ObjectSomeValuesFrom(:isBandOf {entity(chromosome_class(band.chromosome))})")


def skeleton_class_count() -> int:
    doc = _Document()
    _skeleton(doc)
    return len(doc.classes)


def projected_class_count(atlas: BandAtlas, corpus: Corpus | None = None) -> int:
    """Classes :func:`export_ontology` declares: skeleton, one per band, one per new karyotype."""
    bases = {b.class_name for b in BaseKaryotype}
    karyotypes = 0 if corpus is None else sum(e.name not in bases for e in corpus)
    return skeleton_class_count() + len(atlas) + karyotypes


def _karyotype(doc: _Document, atlas: BandAtlas, name: str, source: str, events: Iterable[AbnormalityEvent], base: BaseKaryotype) -> None:
    bases = {b.class_name for b in BaseKaryotype}
    doc.declare(name, "ISCNExampleKaryotype", f"The {source} karyotype")
    if name in bases:
        return
    doc.subclass(name, f"ObjectSomeValuesFrom(:derivedFrom {entity(base.class_name)})")
    # identical events collapse into one cardinality restriction
    totals: dict[tuple[EventKind, tuple[str, ...]], tuple[AbnormalityEvent, int]] = {}
    for e in events:
        for b in e.breakpoints:
            if b not in atlas:
                raise ExportError(f"{name}: breakpoint {b} is not in the atlas")
        key = (e.kind, tuple(event_arguments(e)))
        first, n = totals.get(key, (e, 0))
        totals[key] = (first, n + e.multiplicity)
    for e, n in totals.values():
        doc.subclass(name, expand_pattern(PATTERNS[e.kind], e, n))


def export_ontology(atlas: BandAtlas, corpus: Corpus | None = None) -> bytes:
    doc = _Document()
    _skeleton(doc)
    for band in atlas:
        parent = atlas.parent(band)
        _band(doc, band, band_class(parent) if parent is not None else "HumanChromosomeBand")
        for r in sorted(atlas.resolutions_of(band)):
            doc.subclass(band_class(band), entity(resolution_class(r)))
    for entry in corpus or ():
        k = entry.karyotype
        _karyotype(doc, atlas, entry.name, k.source_text, k.events, k.base)
    return doc.render().encode("utf-8")


_REFERENCE = re.compile(r"<([^>]*)>|(?<![\w\"])([A-Za-z]*):([A-Za-z_][A-Za-z0-9_]*)")
_DECLARATION = re.compile(r"^Declaration\((Class|ObjectProperty)\((\S+)\)\)$")


def _strip_literals(line: str) -> str:
    return re.sub(r'"(?:[^"\\]|\\.)*"', '""', line)


def validate_document(text: str) -> list[str]:
    """Problems found by a syntactic scan: paren balance, header shape, undeclared entities.

    First pass collects declarations; second pass checks every entity
    reference in an axiom against them. Built-in vocabulary is exempt.
    """
    problems = []
    lines = text.split("\n")
    if text and not text.endswith("\n"):
        problems.append("document does not end with a newline")
    body = [(i, ln) for i, ln in enumerate(lines, 1) if ln]
    prefixes = {}
    for i, ln in body:
        m = re.fullmatch(r"Prefix\(([A-Za-z]*):=<([^>]*)>\)", ln)
        if m:
            prefixes[m.group(1)] = m.group(2)
    if "" not in prefixes:
        problems.append("no default prefix")

    def expand(match: re.Match) -> str:
        if match.group(1) is not None:
            return match.group(1)
        prefix = match.group(2)
        if prefix not in prefixes:
            return f"?{prefix}:{match.group(3)}"
        return prefixes[prefix] + match.group(3)

    declared = set()
    for i, ln in body:
        m = _DECLARATION.match(ln)
        if m:
            declared.add(expand(_REFERENCE.fullmatch(m.group(2))))

    builtin = tuple(prefixes[p] for p in ("owl", "rdf", "rdfs", "xsd") if p in prefixes)
    depth = 0
    in_ontology = False
    for i, ln in body:
        stripped = _strip_literals(ln)
        if '"' in stripped.replace('""', ""):
            problems.append(f"line {i}: unterminated literal")
        opened = stripped.count("(") - stripped.count(")")
        if ln.startswith("Prefix("):
            continue
        if ln.startswith("Ontology("):
            in_ontology = True
            depth += opened
            continue
        if not in_ontology:
            problems.append(f"line {i}: content outside the ontology")
        depth += opened
        if depth < 0:
            problems.append(f"line {i}: unbalanced parentheses")
            depth = 0
        if _DECLARATION.match(ln):
            continue
        for ref in _REFERENCE.finditer(stripped):
            iri = expand(ref)
            if iri.startswith("?"):
                problems.append(f"line {i}: unknown prefix in {iri[1:]}")
            elif iri not in declared and not iri.startswith(builtin):
                problems.append(f"line {i}: undeclared entity {iri}")
    if depth != 0:
        problems.append("unbalanced parentheses at end of document")
    return problems
