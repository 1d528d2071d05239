"""The three corpus queries: abnormal chromosome, copy gain, affected band."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from os import PathLike
from typing import Iterable

from .atlas import UNKNOWN_SEX_CHROMOSOME, BandAddress, BandAtlas, UnknownBandError, is_chromosome
from .iscn import KaryotypeError, check_karyotype
from .model import (
    Karyotype,
    UndeterminedBaselineError,
    affected_bands,
    baseline_copies,
    copy_deltas,
)
from .names import mangle


class CorpusError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    karyotype: Karyotype


@dataclass(frozen=True)
class Corpus:
    """Named karyotypes in file order, indexed against one atlas at construction."""

    entries: tuple[CorpusEntry, ...]
    atlas: BandAtlas
    _by_chromosome: dict[str, frozenset[int]] = field(init=False, repr=False, compare=False)
    _affected: dict[BandAddress, frozenset[int]] = field(init=False, repr=False, compare=False)
    _gained: dict[BandAddress, frozenset[int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        seen: set[str] = set()
        for entry in self.entries:
            if entry.name in seen:
                raise CorpusError(f"duplicate karyotype name {entry.name}")
            seen.add(entry.name)

        by_chrom: dict[str, set[int]] = defaultdict(set)
        affected: dict[BandAddress, set[int]] = defaultdict(set)
        gained: dict[BandAddress, set[int]] = defaultdict(set)
        for i, entry in enumerate(self.entries):
            k = entry.karyotype
            for event in k.events:
                for chrom in event.chromosomes:
                    by_chrom[chrom].add(i)
            for seg in affected_bands(k, self.atlas):
                affected[seg].add(i)
            for chrom, row in copy_deltas(k, self.atlas).items():
                try:
                    baseline = baseline_copies(k.base, chrom)
                except UndeterminedBaselineError:
                    continue
                segs = self.atlas.segments(chrom)
                for seg, delta in zip(segs, row):
                    if max(baseline + delta, 0) > baseline:
                        gained[seg].add(i)

        freeze = lambda d: {key: frozenset(v) for key, v in d.items()}  # noqa: E731
        object.__setattr__(self, "_by_chromosome", freeze(by_chrom))
        object.__setattr__(self, "_affected", freeze(affected))
        object.__setattr__(self, "_gained", freeze(gained))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def _names(self, hits: Iterable[int]) -> list[str]:
        return [self.entries[i].name for i in sorted(set(hits))]

    def _band_hits(self, index: dict[BandAddress, frozenset[int]], band: BandAddress) -> list[str]:
        if band not in self.atlas:
            raise UnknownBandError(str(band))
        # a band matches through any of its segments, which covers containment both ways
        hits: set[int] = set()
        for seg in self.atlas.segments_of(band):
            hits |= index.get(seg, frozenset())
        return self._names(hits)


def corpus_lines(lines: Iterable[str]) -> list[tuple[int, str]]:
    """Non-blank, non-comment lines with their 1-based line numbers."""
    out = []
    for number, raw in enumerate(lines, 1):
        text = raw.strip()
        if text and not text.startswith("#"):
            out.append((number, text))
    return out


def build_corpus(lines: Iterable[str], atlas: BandAtlas) -> Corpus:
    entries = []
    for number, text in corpus_lines(lines):
        k, diagnostics = check_karyotype(text, atlas)
        if k is None:
            raise CorpusError(str(KaryotypeError(text, diagnostics)), number)
        entries.append(CorpusEntry(mangle(text), k))
    return Corpus(tuple(entries), atlas)


def load_corpus(source: str | PathLike, atlas: BandAtlas) -> Corpus:
    with open(source, encoding="utf-8") as fh:
        return build_corpus(fh, atlas)


def desk_corpus_text() -> str:
    return resources.files("karyograph").joinpath("data/desk_corpus.txt").read_text("utf-8")


def query_abnormal_in(corpus: Corpus, chromosome: str) -> list[str]:
    """Entries with an event on ``chromosome``, as target or at a breakpoint."""
    if chromosome == UNKNOWN_SEX_CHROMOSOME or not is_chromosome(chromosome):
        raise ValueError(f"not a queryable chromosome: {chromosome}")
    return corpus._names(corpus._by_chromosome.get(chromosome, ()))


def query_copy_gain(corpus: Corpus, band: BandAddress) -> list[str]:
    """Entries in which some part of ``band`` is present above its baseline count."""
    return corpus._band_hits(corpus._gained, band)


def query_affects(corpus: Corpus, band: BandAddress) -> list[str]:
    """Entries with an event touching ``band`` or something it contains or lies within."""
    return corpus._band_hits(corpus._affected, band)
