"""Cytogenetic band addresses and the resolution-stratified band atlas.

A band name is chromosome + arm + region digit + band digit, with sub-band
digits after a single dot (``1q42``, ``1q42.1``, ``1q42.12``). Centromere
faces (``p10``/``q10``) and telomeres (``pter``/``qter``) share the same
grammar but are modelled as special markers, not stained bands.

The atlas itself is data: a line-oriented file listing every band with the
resolutions it appears at. Containment is never stated in the file; it is
derived from digit prefixes and checked on load.
"""

from __future__ import annotations

import enum
import functools
import io
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from os import PathLike
from typing import BinaryIO, Iterable, Iterator

AUTOSOMES = tuple(str(n) for n in range(1, 23))
CHROMOSOMES = AUTOSOMES + ("X", "Y")
UNKNOWN_SEX_CHROMOSOME = "N"
ARMS = ("p", "q")
RESOLUTIONS = (300, 400, 550, 700, 850)

_CHROM_RANK = {c: i for i, c in enumerate(CHROMOSOMES + (UNKNOWN_SEX_CHROMOSOME,))}


class Special(enum.Enum):
    CENTROMERE = "centromere"
    TELOMERE = "telomere"
    WHOLE_ARM = "whole-arm"


class Proximity(enum.Enum):
    MORE_PROXIMAL = -1
    EQUAL = 0
    MORE_DISTAL = 1


class BandSyntaxError(ValueError):
    """Malformed band text; ``position`` is the offending character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class AtlasError(ValueError):
    """An atlas file violates a structural invariant."""

    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class UnknownBandError(KeyError):
    def __str__(self) -> str:
        return f"band not in atlas: {self.args[0]}"


class IncomparableBandsError(ValueError):
    pass


def is_chromosome(value: str) -> bool:
    return value in _CHROM_RANK and value != UNKNOWN_SEX_CHROMOSOME


@dataclass(frozen=True)
class BandAddress:
    chromosome: str
    arm: str
    digits: tuple[int, ...] = ()
    special: Special | None = None

    @classmethod
    def centromere(cls, chromosome: str, arm: str) -> BandAddress:
        return cls(chromosome, arm, (1, 0), Special.CENTROMERE)

    @classmethod
    def telomere(cls, chromosome: str, arm: str) -> BandAddress:
        return cls(chromosome, arm, (), Special.TELOMERE)

    @property
    def local_text(self) -> str:
        """The address without its chromosome, as written inside ISCN breakpoint lists."""
        if self.special is Special.CENTROMERE:
            return f"{self.arm}10"
        if self.special is Special.TELOMERE:
            return f"{self.arm}ter"
        if not self.digits:
            return self.arm
        head = "".join(map(str, self.digits[:2]))
        tail = "".join(map(str, self.digits[2:]))
        return f"{self.arm}{head}.{tail}" if tail else f"{self.arm}{head}"

    @property
    def is_band(self) -> bool:
        return self.special is None

    def sort_key(self) -> tuple:
        special_rank = {None: 1, Special.CENTROMERE: 0, Special.TELOMERE: 2, Special.WHOLE_ARM: 3}
        return (_CHROM_RANK[self.chromosome], self.arm, special_rank[self.special], self.digits)

    def __str__(self) -> str:
        return self.chromosome + self.local_text


def parse_band(text: str, chromosome: str | None = None, offset: int = 0) -> BandAddress:
    """Parse band text such as ``1q42.12``, ``Xp22.3``, ``q10`` or ``qter``.

    ``chromosome`` supplies the chromosome when the text starts at the arm
    symbol, as inside ``inv(2)(p21q31)``. ``offset`` is added to every
    reported error position so callers can point into a larger string.
    This is purely syntactic: no atlas is consulted.
    """
    if not text:
        raise BandSyntaxError("empty band text", offset)
    i = 0
    while i < len(text) and (text[i].isdigit() or text[i] in "XYN"):
        i += 1
    if i:
        written = text[:i]
        if not is_chromosome(written):
            if written == UNKNOWN_SEX_CHROMOSOME:
                raise BandSyntaxError("chromosome N has no addressable bands", offset)
            raise BandSyntaxError(f"unknown chromosome {written!r}", offset)
        if chromosome is not None and chromosome != written:
            raise BandSyntaxError(f"band on chromosome {written}, expected {chromosome}", offset)
        chromosome = written
    elif chromosome is None:
        raise BandSyntaxError("missing chromosome", offset)
    elif not is_chromosome(chromosome):
        raise BandSyntaxError(f"unknown chromosome {chromosome!r}", offset)

    if i >= len(text):
        raise BandSyntaxError("missing arm symbol", offset + i)
    arm = text[i]
    if arm not in ARMS:
        raise BandSyntaxError(f"expected arm symbol 'p' or 'q', found {arm!r}", offset + i)
    body = text[i + 1:]
    start = i + 1
    if body == "":
        return BandAddress(chromosome, arm, (), Special.WHOLE_ARM)
    if body == "ter":
        return BandAddress.telomere(chromosome, arm)
    if body == "10":
        return BandAddress.centromere(chromosome, arm)

    head, dot, tail = body.partition(".")
    for j, ch in enumerate(head):
        if not ch.isdigit():
            raise BandSyntaxError(f"expected a digit, found {ch!r}", offset + start + j)
    if len(head) != 2:
        raise BandSyntaxError("band needs exactly one region digit and one band digit", offset + start)
    if dot:
        tail_start = start + len(head) + 1
        for j, ch in enumerate(tail):
            if ch == ".":
                raise BandSyntaxError("a band name carries at most one dot", offset + tail_start + j)
            if not ch.isdigit():
                raise BandSyntaxError(f"expected a digit, found {ch!r}", offset + tail_start + j)
        if not 1 <= len(tail) <= 2:
            raise BandSyntaxError("sub-band extension must be one or two digits", offset + tail_start)
    digits = tuple(int(c) for c in head + tail)
    for j, d in enumerate(digits):
        if d == 0:
            pos = start + j + (1 if j >= 2 else 0)
            raise BandSyntaxError("band numbering starts at 1", offset + pos)
    return BandAddress(chromosome, arm, digits)


def _is_prefix(short: tuple[int, ...], long: tuple[int, ...]) -> bool:
    return len(short) <= len(long) and long[: len(short)] == short


def _check_contiguous(numbers: Iterable[int]) -> bool:
    values = sorted(numbers)
    return values == list(range(1, len(values) + 1))


class BandAtlas:
    """Immutable, validated set of bands per chromosome arm and resolution.

    Construct through :func:`load_atlas`; every instance has passed the
    structural checks, so lookups never re-validate.
    """

    def __init__(self, entries: dict[BandAddress, frozenset[int]]):
        self._resolutions = dict(entries)
        strata: dict[tuple[str, str, int], list[BandAddress]] = defaultdict(list)
        per_arm: dict[tuple[str, str], list[BandAddress]] = defaultdict(list)
        for band, levels in self._resolutions.items():
            per_arm[band.chromosome, band.arm].append(band)
            for r in levels:
                strata[band.chromosome, band.arm, r].append(band)
        self._strata = {k: tuple(sorted(v, key=lambda b: b.digits)) for k, v in strata.items()}
        self._arm_bands = {k: tuple(sorted(v, key=lambda b: b.digits)) for k, v in per_arm.items()}

        self._parent: dict[BandAddress, BandAddress | None] = {}
        self._children: dict[BandAddress, list[BandAddress]] = defaultdict(list)
        for band in self._resolutions:
            parent = None
            for n in range(len(band.digits) - 1, 1, -1):
                candidate = BandAddress(band.chromosome, band.arm, band.digits[:n])
                if candidate in self._resolutions:
                    parent = candidate
                    break
            self._parent[band] = parent
            if parent is not None:
                self._children[parent].append(band)

        self._segments: dict[str, tuple[BandAddress, ...]] = {}
        self._span: dict[BandAddress, tuple[int, int]] = {}
        for chrom in CHROMOSOMES:
            p_leaves = self.leaves(chrom, "p")
            q_leaves = self.leaves(chrom, "q")
            segs = (
                tuple(reversed(p_leaves))
                + (BandAddress.centromere(chrom, "p"), BandAddress.centromere(chrom, "q"))
                + q_leaves
            )
            self._segments[chrom] = segs
            index = {s: i for i, s in enumerate(segs)}
            for s, i in index.items():
                self._span[s] = (i, i)
            for band in self._arm_bands.get((chrom, "p"), ()) + self._arm_bands.get((chrom, "q"), ()):
                positions = [index[leaf] for leaf in self._leaves_under(band)]
                self._span[band] = (min(positions), max(positions))
            last = len(segs) - 1
            p_cen = len(p_leaves)
            self._span[BandAddress.telomere(chrom, "p")] = (0, 0)
            self._span[BandAddress.telomere(chrom, "q")] = (last, last)
            self._span[BandAddress(chrom, "p", (), Special.WHOLE_ARM)] = (0, p_cen)
            self._span[BandAddress(chrom, "q", (), Special.WHOLE_ARM)] = (p_cen + 1, last)

    # -- membership and structure -------------------------------------------------

    def __contains__(self, address: object) -> bool:
        return address in self._span

    def __iter__(self) -> Iterator[BandAddress]:
        return iter(sorted(self._resolutions, key=BandAddress.sort_key))

    def __len__(self) -> int:
        return len(self._resolutions)

    def _require(self, address: BandAddress) -> None:
        if address not in self._span:
            raise UnknownBandError(str(address))

    @property
    def chromosomes(self) -> tuple[str, ...]:
        present = {b.chromosome for b in self._resolutions}
        return tuple(c for c in CHROMOSOMES if c in present)

    def resolutions_of(self, band: BandAddress) -> frozenset[int]:
        """Strata listing ``band``; specials belong to every stratum."""
        self._require(band)
        if band.special is not None:
            return frozenset(RESOLUTIONS)
        return self._resolutions[band]

    def strata(self, chromosome: str, arm: str) -> tuple[int, ...]:
        return tuple(r for r in RESOLUTIONS if (chromosome, arm, r) in self._strata)

    def bands(self, chromosome: str, arm: str, resolution: int) -> tuple[BandAddress, ...]:
        """Bands at one stratum, proximal to distal."""
        return self._strata.get((chromosome, arm, resolution), ())

    def bands_at(self, resolution: int) -> tuple[BandAddress, ...]:
        return tuple(b for b in self if resolution in self._resolutions[b])

    def leaves(self, chromosome: str, arm: str) -> tuple[BandAddress, ...]:
        """The finest tiling of an arm: bands with no sub-bands."""
        levels = self.strata(chromosome, arm)
        return self.bands(chromosome, arm, levels[-1]) if levels else ()

    def parent(self, band: BandAddress) -> BandAddress | None:
        self._require(band)
        return self._parent.get(band)

    def children(self, band: BandAddress) -> tuple[BandAddress, ...]:
        self._require(band)
        return tuple(sorted(self._children.get(band, ()), key=lambda b: b.digits))

    def _leaves_under(self, band: BandAddress) -> list[BandAddress]:
        kids = self._children.get(band)
        if not kids:
            return [band]
        return [leaf for kid in kids for leaf in self._leaves_under(kid)]

    # -- segment coordinates ------------------------------------------------------

    def segments(self, chromosome: str) -> tuple[BandAddress, ...]:
        """Finest-stratum bands plus both centromere faces, ordered pter to qter."""
        return self._segments[chromosome]

    def span(self, address: BandAddress) -> tuple[int, int]:
        """Inclusive index range of ``address`` within :meth:`segments`."""
        self._require(address)
        return self._span[address]

    def segments_of(self, address: BandAddress) -> tuple[BandAddress, ...]:
        lo, hi = self.span(address)
        return self._segments[address.chromosome][lo: hi + 1]

    # -- containment and ordering ------------------------------------------------

    def contains(self, parent: BandAddress, child: BandAddress) -> bool:
        """Whether ``child`` lies in the containment subtree of ``parent`` (reflexive)."""
        self._require(parent)
        self._require(child)
        if parent == child:
            return True
        if parent.chromosome != child.chromosome or parent.arm != child.arm:
            return False
        if parent.special is Special.WHOLE_ARM:
            return True
        if parent.special is not None or child.special is not None:
            return False
        return _is_prefix(parent.digits, child.digits)

    def compare_proximity(self, a: BandAddress, b: BandAddress) -> Proximity:
        """Order two addresses on one arm by distance from the centromere.

        Bands at different strata are aligned to their common depth first,
        so a band and its own sub-band compare as EQUAL.
        """
        self._require(a)
        self._require(b)
        if a.chromosome != b.chromosome or a.arm != b.arm:
            raise IncomparableBandsError(f"{a} and {b} lie on different arms")
        if a.special is Special.WHOLE_ARM or b.special is Special.WHOLE_ARM or a == b:
            return Proximity.EQUAL
        ka, kb = self._radial_key(a), self._radial_key(b)
        depth = min(len(ka), len(kb))
        ka, kb = ka[:depth], kb[:depth]
        if ka == kb:
            return Proximity.EQUAL
        return Proximity.MORE_PROXIMAL if ka < kb else Proximity.MORE_DISTAL

    @staticmethod
    def _radial_key(address: BandAddress) -> tuple[int, ...]:
        if address.special is Special.CENTROMERE:
            return (0,)
        if address.special is Special.TELOMERE:
            return (10,)
        return address.digits

    def resolve(self, band: BandAddress, resolution: int) -> frozenset[BandAddress]:
        """Bands at ``resolution`` that overlap ``band``.

        Coarsening yields the unique ancestor, refining yields the
        descendants, and a band listed at ``resolution`` resolves to itself.
        """
        if resolution not in RESOLUTIONS:
            raise ValueError(f"unknown resolution {resolution}")
        self._require(band)
        if band.special is not None:
            if band.special is Special.WHOLE_ARM:
                return frozenset(self.bands(band.chromosome, band.arm, resolution))
            return frozenset({band})
        return frozenset(
            other
            for other in self.bands(band.chromosome, band.arm, resolution)
            if _is_prefix(other.digits, band.digits) or _is_prefix(band.digits, other.digits)
        )


# -- loading ----------------------------------------------------------------------


def _parse_lines(lines: Iterable[str]) -> tuple[dict[BandAddress, frozenset[int]], dict[BandAddress, tuple[int, int]]]:
    entries: dict[BandAddress, frozenset[int]] = {}
    meta: dict[BandAddress, tuple[int, int]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise AtlasError(f"expected 5 tab-separated fields, found {len(fields)}", lineno)
        chrom, arm, text, levels, order = (f.strip() for f in fields)
        if not is_chromosome(chrom):
            raise AtlasError(f"unknown chromosome {chrom!r}", lineno)
        if arm not in ARMS:
            raise AtlasError(f"unknown arm {arm!r}", lineno)
        try:
            band = parse_band(text)
        except BandSyntaxError as exc:
            raise AtlasError(f"bad band {text!r}: {exc}", lineno) from None
        if band.special is not None:
            raise AtlasError(f"{text} is a structural marker, not a band", lineno)
        if band.chromosome != chrom or band.arm != arm:
            raise AtlasError(f"band {text} disagrees with columns {chrom} {arm}", lineno)
        try:
            resolutions = [int(r) for r in levels.split(",")]
        except ValueError:
            raise AtlasError(f"bad resolution list {levels!r}", lineno) from None
        for r in resolutions:
            if r not in RESOLUTIONS:
                raise AtlasError(f"unknown resolution {r}", lineno)
        if len(set(resolutions)) != len(resolutions):
            raise AtlasError(f"repeated resolution in {levels!r}", lineno)
        if not order.isdigit():
            raise AtlasError(f"order index must be a non-negative integer, found {order!r}", lineno)
        if band in entries:
            raise AtlasError(f"duplicate band {text}", lineno)
        entries[band] = frozenset(resolutions)
        meta[band] = (int(order), lineno)
    return entries, meta


def _validate(entries: dict[BandAddress, frozenset[int]], meta: dict[BandAddress, tuple[int, int]]) -> None:
    by_arm: dict[tuple[str, str], list[BandAddress]] = defaultdict(list)
    for band in entries:
        by_arm[band.chromosome, band.arm].append(band)

    for (chrom, arm), bands in by_arm.items():
        levels = sorted({r for b in bands for r in entries[b]})
        stratum = {r: sorted((b for b in bands if r in entries[b]), key=lambda b: b.digits) for r in levels}

        for r, listed in stratum.items():
            for x, y in zip(listed, listed[1:]):
                if _is_prefix(x.digits, y.digits):
                    raise AtlasError(f"{x} and its sub-band {y} both listed at {r}", meta[y][1])
            for position, band in enumerate(listed):
                if max(entries[band]) == r and meta[band][0] != position:
                    raise AtlasError(
                        f"order index {meta[band][0]} of {band} should be {position} at {r}", meta[band][1]
                    )

        for band in bands:
            own = entries[band]
            for r in levels:
                if r in own:
                    continue
                if r < min(own):
                    ancestors = [o for o in stratum[r] if _is_prefix(o.digits, band.digits)]
                    if len(ancestors) != 1:
                        raise AtlasError(f"{band} has no ancestor at resolution {r}", meta[band][1])
                elif not any(_is_prefix(band.digits, o.digits) for o in stratum[r]):
                    raise AtlasError(f"{band} is not subdivided or listed at resolution {r}", meta[band][1])

        trie: dict[tuple[int, ...], set[int]] = defaultdict(set)
        for band in bands:
            for n in range(len(band.digits)):
                trie[band.digits[:n]].add(band.digits[n])
        for prefix, numbers in trie.items():
            if not _check_contiguous(numbers):
                where = BandAddress(chrom, arm, prefix).local_text
                first = min(
                    (b for b in bands if _is_prefix(prefix, b.digits)), key=lambda b: meta[b][1]
                )
                raise AtlasError(
                    f"subdivisions of {chrom}{where} are not numbered 1..k: {sorted(numbers)}", meta[first][1]
                )

    _check_errata(entries)


def _check_errata(entries: dict[BandAddress, frozenset[int]]) -> None:
    """Hold the two known corrections to the ISCN2009 band figures."""

    def at(chrom: str, arm: str, prefix: tuple[int, ...], r: int) -> bool:
        return any(
            b.chromosome == chrom and b.arm == arm and r in levels and (_is_prefix(prefix, b.digits) or _is_prefix(b.digits, prefix))
            for b, levels in entries.items()
        )

    for r in RESOLUTIONS:
        if at("X", "q", (1, 1), r) and at("X", "q", (1, 3), r) and not at("X", "q", (1, 2), r):
            raise AtlasError(f"Xq12 missing at resolution {r}")
    yq112 = BandAddress("Y", "q", (1, 1, 2))
    has_yq_300 = any(b.chromosome == "Y" and b.arm == "q" and 300 in levels for b, levels in entries.items())
    subdivided = any(
        b.chromosome == "Y" and b.arm == "q" and len(b.digits) > 3 and _is_prefix(yq112.digits, b.digits)
        for b in entries
    )
    if has_yq_300 and subdivided and 300 not in entries.get(yq112, frozenset()):
        raise AtlasError("Yq11.2 missing at resolution 300")


def load_atlas(source: BinaryIO | bytes | str | PathLike) -> BandAtlas:
    """Load and validate an atlas from a byte stream, raw bytes, or a path."""
    if isinstance(source, (str, PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise AtlasError(f"atlas is not UTF-8: {exc}") from None
    entries, meta = _parse_lines(io.StringIO(text))
    _validate(entries, meta)
    return BandAtlas(entries)


@functools.lru_cache(maxsize=None)
def desk_atlas() -> BandAtlas:
    """The bundled desk-scale atlas."""
    return load_atlas(resources.files("karyograph").joinpath("data/desk_atlas.tsv").read_bytes())
