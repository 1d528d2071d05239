"""Event-based karyotype model.

A karyotype is a base (46,XX, 46,XY, or 46,XN for an unknown second sex
chromosome) plus the abnormality events that derive it. Sex follows the
derivation history alone: 45,X,-Y is male because it derives from 46,XY.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

from .atlas import (
    AUTOSOMES,
    UNKNOWN_SEX_CHROMOSOME,
    BandAddress,
    BandAtlas,
    Special,
)


class EventKind(enum.Enum):
    ADDITION = "Addition"
    DELETION = "Deletion"
    DUPLICATION = "Duplication"
    DIRECT_DUPLICATION = "DirectDuplication"
    INVERSE_DUPLICATION = "InverseDuplication"
    FISSION = "Fission"
    INSERTION = "Insertion"
    DIRECT_INSERTION = "DirectInsertion"
    INVERSE_INSERTION = "InverseInsertion"
    INVERSION = "Inversion"
    QUADRUPLICATION = "Quadruplication"
    TRANSLOCATION = "Translocation"
    TRIPLICATION = "Triplication"

    @property
    def general(self) -> EventKind:
        return _SPECIALISES.get(self, self)


_SPECIALISES = {
    EventKind.DIRECT_DUPLICATION: EventKind.DUPLICATION,
    EventKind.INVERSE_DUPLICATION: EventKind.DUPLICATION,
    EventKind.DIRECT_INSERTION: EventKind.INSERTION,
    EventKind.INVERSE_INSERTION: EventKind.INSERTION,
}

BALANCED_KINDS = frozenset(
    {
        EventKind.INVERSION,
        EventKind.TRANSLOCATION,
        EventKind.INSERTION,
        EventKind.DIRECT_INSERTION,
        EventKind.INVERSE_INSERTION,
        EventKind.FISSION,
    }
)

# extra copies gained over the spanned interval
_GAIN = {
    EventKind.DUPLICATION: 1,
    EventKind.TRIPLICATION: 2,
    EventKind.QUADRUPLICATION: 3,
}


# allowed breakpoint run lengths per chromosome, as written in ISCN
_SHAPES: dict[EventKind, set[tuple[int, ...]]] = {
    EventKind.ADDITION: {(1,)},
    EventKind.DELETION: {(1,), (2,)},
    EventKind.DUPLICATION: {(1,), (2,)},
    EventKind.DIRECT_DUPLICATION: {(2,)},
    EventKind.INVERSE_DUPLICATION: {(2,)},
    EventKind.TRIPLICATION: {(2,)},
    EventKind.QUADRUPLICATION: {(2,)},
    EventKind.INVERSION: {(2,)},
    EventKind.FISSION: {(2,)},
    EventKind.TRANSLOCATION: {(1, 1)},
    EventKind.INSERTION: {(2,), (3,), (1, 1), (1, 2)},
    EventKind.DIRECT_INSERTION: {(3,), (1, 2)},
    EventKind.INVERSE_INSERTION: {(3,), (1, 2)},
}


def breakpoint_arities(kind: EventKind) -> frozenset[int]:
    """Total breakpoint counts ``kind`` accepts; a whole chromosome counts as one."""
    return frozenset(sum(shape) for shape in _SHAPES[kind])


def event_subsumes(general: EventKind, specific: EventKind) -> bool:
    """True iff ``specific`` is ``general`` or one of its listed specialisations."""
    return specific is general or _SPECIALISES.get(specific) is general


class DeletionStyle(enum.Enum):
    TERMINAL = "terminal"
    INTERSTITIAL = "interstitial"


class BaseKaryotype(enum.Enum):
    XX = "46,XX"
    XY = "46,XY"
    XN = "46,XN"

    @property
    def sex_chromosomes(self) -> str:
        return self.value.split(",")[1]

    @property
    def class_name(self) -> str:
        return "k" + self.value.replace(",", "_")


class SexClass(enum.Enum):
    MALE = "Male"
    FEMALE = "Female"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class AbnormalityEvent:
    """One change from the base karyotype.

    Whole-chromosome gains and losses carry ``target`` and no breakpoints;
    every other event carries ordered breakpoints. ``constitutional`` marks
    events implied by the sex-chromosome designator rather than written as a
    term (the loss in ``45,X``).
    """

    kind: EventKind
    multiplicity: int = 1
    target: str | None = None
    breakpoints: tuple[BandAddress, ...] = ()
    deletion_style: DeletionStyle | None = None
    constitutional: bool = False

    def __post_init__(self) -> None:
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")
        if self.target is not None:
            if self.kind not in (EventKind.ADDITION, EventKind.DELETION):
                raise ValueError(f"{self.kind.value} cannot target a whole chromosome")
            if self.breakpoints or self.deletion_style is not None:
                raise ValueError("whole-chromosome events carry no breakpoints")
            return
        if self.constitutional:
            raise ValueError("only whole-chromosome events are constitutional")
        if self.deletion_style is not None and self.kind is not EventKind.DELETION:
            raise ValueError("deletion_style applies to deletions only")
        shape = tuple(len(g) for g in self.groups)
        if shape not in _SHAPES[self.kind]:
            raise ValueError(f"breakpoints {[str(b) for b in self.breakpoints]} do not fit {self.kind.value}")
        if self.kind is EventKind.DELETION:
            expected = DeletionStyle.TERMINAL if shape == (1,) else DeletionStyle.INTERSTITIAL
            if self.deletion_style is not expected:
                raise ValueError(f"a deletion with {shape[0]} breakpoint(s) is {expected.value}")
        if self.kind is EventKind.FISSION and any(b.special is not Special.CENTROMERE for b in self.breakpoints):
            raise ValueError("fission breaks at the centromere faces p10 and q10")
        if len(set(self.chromosomes)) != len(self.chromosomes):
            raise ValueError("a chromosome may appear only once per event")

    @property
    def chromosomes(self) -> tuple[str, ...]:
        if self.target is not None:
            return (self.target,)
        seen: list[str] = []
        for b in self.breakpoints:
            if not seen or seen[-1] != b.chromosome:
                seen.append(b.chromosome)
        return tuple(seen)

    @property
    def groups(self) -> tuple[tuple[BandAddress, ...], ...]:
        """Breakpoints split into runs on one chromosome, as written in ISCN."""
        out: list[list[BandAddress]] = []
        for b in self.breakpoints:
            if out and out[-1][0].chromosome == b.chromosome:
                out[-1].append(b)
            else:
                out.append([b])
        return tuple(tuple(g) for g in out)

    @property
    def is_whole_chromosome(self) -> bool:
        return self.target is not None


def _default_sex_chromosomes(base: BaseKaryotype, events: tuple[AbnormalityEvent, ...]) -> str:
    net: Counter[str] = Counter()
    for e in events:
        if e.target in ("X", "Y", UNKNOWN_SEX_CHROMOSOME):
            net[e.target] += e.multiplicity if e.kind is EventKind.ADDITION else -e.multiplicity
    if base is BaseKaryotype.XN:
        n = 2 + net.pop(UNKNOWN_SEX_CHROMOSOME, 0)
        letters = Counter({1: "X", 2: "XN"}.get(n, "XX" + "Y" * (n - 2)))
    else:
        letters = Counter(base.sex_chromosomes)
    letters.update(net)
    for e in events:
        if e.target is None:
            for chrom in set(e.chromosomes) & {"X", "Y"}:
                letters[chrom] -= e.multiplicity
    return "".join(c * max(letters[c], 0) for c in "XYN")


@dataclass(frozen=True)
class Karyotype:
    base: BaseKaryotype
    events: tuple[AbnormalityEvent, ...] = ()
    sex_chromosomes: str | None = None
    source_text: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        if self.sex_chromosomes is None:
            object.__setattr__(self, "sex_chromosomes", _default_sex_chromosomes(self.base, self.events))


@dataclass(frozen=True)
class CopyNumberReport:
    band: BandAddress
    baseline: int
    observed: int


class UndeterminedBaselineError(ValueError):
    """Copy number of a sex-chromosome band requested for a 46,XN-derived karyotype."""


def classify_sex(k: Karyotype) -> SexClass:
    return {
        BaseKaryotype.XX: SexClass.FEMALE,
        BaseKaryotype.XY: SexClass.MALE,
        BaseKaryotype.XN: SexClass.UNDETERMINED,
    }[k.base]


def chromosome_count(k: Karyotype) -> int:
    count = 46
    for e in k.events:
        if e.is_whole_chromosome:
            count += e.multiplicity if e.kind is EventKind.ADDITION else -e.multiplicity
        elif e.kind is EventKind.FISSION:
            count += e.multiplicity
    return count


def baseline_copies(base: BaseKaryotype, chromosome: str) -> int:
    if chromosome in AUTOSOMES:
        return 2
    if base is BaseKaryotype.XN:
        raise UndeterminedBaselineError(f"baseline of chromosome {chromosome} is unknown for 46,XN")
    return base.sex_chromosomes.count(chromosome)


def _distal_range(atlas: BandAtlas, bp: BandAddress, inclusive: bool) -> tuple[int, int]:
    lo, hi = atlas.span(bp)
    last = len(atlas.segments(bp.chromosome)) - 1
    if bp.arm == "q":
        return (lo if inclusive else hi + 1, last)
    return (0, hi if inclusive else lo - 1)


def _hull(atlas: BandAtlas, a: BandAddress, b: BandAddress) -> tuple[int, int]:
    (alo, ahi), (blo, bhi) = atlas.span(a), atlas.span(b)
    return (min(alo, blo), max(ahi, bhi))


def _ranges(event: AbnormalityEvent, atlas: BandAtlas) -> list[tuple[str, int, int]]:
    """Index ranges (chromosome, lo, hi) an event touches, inclusive."""
    if event.is_whole_chromosome:
        if event.target == UNKNOWN_SEX_CHROMOSOME:
            return []
        return [(event.target, 0, len(atlas.segments(event.target)) - 1)]
    out = []
    groups = event.groups
    # insertions: the recipient breakpoint stands alone, the donor segment is a run
    if event.kind.general is EventKind.INSERTION and len(groups) == 1:
        first, *rest = groups[0]
        groups = ((first,), tuple(rest))
    for group in groups:
        chrom = group[0].chromosome
        if len(group) == 1:
            bp = group[0]
            if event.kind in (EventKind.ADDITION, EventKind.DELETION):
                lo, hi = _distal_range(atlas, bp, inclusive=True)
            else:
                lo, hi = atlas.span(bp)
        else:
            lo, hi = _hull(atlas, group[0], group[-1])
        out.append((chrom, lo, hi))
    return out


def event_span(event: AbnormalityEvent, atlas: BandAtlas) -> frozenset[BandAddress]:
    """Atlas segments (finest bands and centromere faces) an event touches."""
    return frozenset(
        seg
        for chrom, lo, hi in _ranges(event, atlas)
        for seg in atlas.segments(chrom)[lo: hi + 1]
    )


def affected_bands(k: Karyotype, atlas: BandAtlas) -> frozenset[BandAddress]:
    out: set[BandAddress] = set()
    for e in k.events:
        out |= event_span(e, atlas)
    return frozenset(out)


def copy_deltas(k: Karyotype, atlas: BandAtlas) -> dict[str, list[int]]:
    """Per-chromosome net copy change of every segment, keyed by chromosome."""
    deltas: dict[str, list[int]] = {}

    def bump(chrom: str, lo: int, hi: int, amount: int) -> None:
        row = deltas.setdefault(chrom, [0] * len(atlas.segments(chrom)))
        for i in range(max(lo, 0), hi + 1):
            row[i] += amount

    for e in k.events:
        m = e.multiplicity
        if e.is_whole_chromosome:
            if e.target == UNKNOWN_SEX_CHROMOSOME:
                continue
            sign = 1 if e.kind is EventKind.ADDITION else -1
            bump(e.target, 0, len(atlas.segments(e.target)) - 1, sign * m)
        elif e.kind is EventKind.DELETION:
            (chrom, lo, hi), = _ranges(e, atlas)
            bump(chrom, lo, hi, -m)
        elif e.kind is EventKind.ADDITION:
            bp = e.breakpoints[0]
            lo, hi = _distal_range(atlas, bp, inclusive=False)
            bump(bp.chromosome, lo, hi, -m)
        elif e.kind.general in _GAIN:
            (chrom, lo, hi), = _ranges(e, atlas)
            bump(chrom, lo, hi, _GAIN[e.kind.general] * m)
    return deltas


def copy_number(k: Karyotype, band: BandAddress, atlas: BandAtlas) -> CopyNumberReport:
    """Baseline and observed copies of ``band``.

    A band whose sub-bands end up with different counts reports the
    largest of them, so any partial gain shows as a gain.
    """
    lo, hi = atlas.span(band)
    baseline = baseline_copies(k.base, band.chromosome)
    row = copy_deltas(k, atlas).get(band.chromosome)
    if row is None:
        return CopyNumberReport(band, baseline, baseline)
    observed = max(max(baseline + d, 0) for d in row[lo: hi + 1])
    return CopyNumberReport(band, baseline, observed)
