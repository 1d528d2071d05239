"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

from collections import Counter

from hypothesis import assume
from hypothesis import strategies as st

from conftest import desk_atlas_text
from karyograph.atlas import BandAddress, BandAtlas
from karyograph.model import AbnormalityEvent, BaseKaryotype, DeletionStyle, EventKind, Karyotype

ATLAS_LINES = desk_atlas_text().splitlines()
DATA_INDEXES = [i for i, line in enumerate(ATLAS_LINES) if line and not line.startswith("#")]
MULTI_RES_INDEXES = [i for i in DATA_INDEXES if "," in ATLAS_LINES[i].split("\t")[3]]
MUTATION_KINDS = ["chrom", "arm", "band", "resolution", "drop", "order", "order-text"]


@st.composite
def atlas_mutation(draw):
    """The desk atlas with one field of one line changed so that an invariant breaks."""
    kind = draw(st.sampled_from(MUTATION_KINDS))
    index = draw(st.sampled_from(MULTI_RES_INDEXES if kind == "drop" else DATA_INDEXES))
    lines = list(ATLAS_LINES)
    chrom, arm, text, levels, order = lines[index].split("\t")
    if kind == "chrom":
        chrom = draw(st.sampled_from([c for c in ("1", "2", "3", "5", "21", "X", "Y") if c != chrom]))
    elif kind == "arm":
        arm = "p" if arm == "q" else "q"
    elif kind == "band":
        siblings = [
            fields[2]
            for fields in (ATLAS_LINES[i].split("\t") for i in DATA_INDEXES)
            if fields[:2] == [chrom, arm] and fields[2] != text
        ]
        text = draw(st.sampled_from(siblings))
    elif kind == "resolution":
        parts = levels.split(",")
        parts[draw(st.integers(0, len(parts) - 1))] = draw(st.sampled_from(["250", "500", "1000", "0", "x"]))
        levels = ",".join(parts)
    elif kind == "drop":
        parts = levels.split(",")
        del parts[draw(st.integers(0, len(parts) - 1))]
        levels = ",".join(parts)
    elif kind == "order":
        shift = draw(st.integers(1, 5))
        current = int(order)
        order = str(current - shift if shift <= current and draw(st.booleans()) else current + shift)
    else:
        order = draw(st.sampled_from(["", "-1", "1.5", "k", "one"]))
    lines[index] = "\t".join([chrom, arm, text, levels, order])
    return kind, index, ("\n".join(lines) + "\n").encode()


def _bands_on(atlas: BandAtlas, chrom: str) -> list[BandAddress]:
    return [b for b in atlas if b.chromosome == chrom]


# breakpoint run lengths, one entry per chromosome involved
SHAPES = {
    EventKind.ADDITION: [(1,)],
    EventKind.DELETION: [(1,), (2,)],
    EventKind.DUPLICATION: [(1,), (2,)],
    EventKind.DIRECT_DUPLICATION: [(2,)],
    EventKind.INVERSE_DUPLICATION: [(2,)],
    EventKind.TRIPLICATION: [(2,)],
    EventKind.QUADRUPLICATION: [(2,)],
    EventKind.INVERSION: [(2,)],
    EventKind.FISSION: [(2,)],
    EventKind.TRANSLOCATION: [(1, 1)],
    EventKind.INSERTION: [(2,), (3,), (1, 1), (1, 2)],
    EventKind.DIRECT_INSERTION: [(3,), (1, 2)],
    EventKind.INVERSE_INSERTION: [(3,), (1, 2)],
}


@st.composite
def banded_event(draw, atlas: BandAtlas, kinds=tuple(EventKind), exclude=()):
    """A structurally valid banded event on chromosomes the atlas tiles."""
    kind = draw(st.sampled_from(kinds))
    shape = draw(st.sampled_from(SHAPES[kind]))
    tiled = [c for c in atlas.chromosomes if _bands_on(atlas, c) and c not in exclude]
    chroms = draw(st.lists(st.sampled_from(tiled), min_size=len(shape), max_size=len(shape), unique=True))
    bps: list[BandAddress] = []
    for chrom, n in zip(chroms, shape):
        if kind is EventKind.FISSION:
            bps += [BandAddress.centromere(chrom, "p"), BandAddress.centromere(chrom, "q")]
        else:
            bps += draw(st.lists(st.sampled_from(_bands_on(atlas, chrom)), min_size=n, max_size=n))
    style = None
    if kind is EventKind.DELETION:
        style = DeletionStyle.TERMINAL if shape == (1,) else DeletionStyle.INTERSTITIAL
    return AbnormalityEvent(kind, draw(st.integers(1, 2)), breakpoints=tuple(bps), deletion_style=style)


@st.composite
def karyotype(draw, atlas: BandAtlas, max_events: int = 3):
    """A model-level karyotype on a 46,XX or 46,XY base."""
    base = draw(st.sampled_from([BaseKaryotype.XX, BaseKaryotype.XY]))
    absent = ("Y",) if base is BaseKaryotype.XX else ()
    events = []
    for _ in range(draw(st.integers(0, max_events))):
        if draw(st.integers(0, 3)) == 0:
            target = draw(st.sampled_from(["5", "9", "21", "22", "1"]))
            kind = draw(st.sampled_from([EventKind.ADDITION, EventKind.DELETION]))
            events.append(AbnormalityEvent(kind, draw(st.integers(1, 2)), target=target))
        else:
            events.append(draw(banded_event(atlas, exclude=absent)))
    used = Counter()
    for e in events:
        for chrom in set(e.chromosomes) & {"X", "Y"}:
            used[chrom] += e.multiplicity
    # a rearrangement needs a homologue to act on
    assume(all(used[c] <= base.sex_chromosomes.count(c) for c in used))
    return Karyotype(base, tuple(events))
