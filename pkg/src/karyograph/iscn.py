"""Tokenizer, parser and serializer for ISCN short-system karyotype strings.

Grammar::

    karyotype := count "," sex ("," term)*
    term      := ("+" | "-") chrom | event
    event     := name "(" chrom (";" chrom)* ")" "(" bands (";" bands)* ")"

The sex designator lists the sex chromosomes not otherwise written out, as
in ``46,X,del(Y)(q11.2)``. Whole-chromosome ``+``/``-`` terms are explained
against the base, so ``45,X,-Y`` derives from 46,XY while the bare ``45,X``
derives from 46,XN with the loss of one sex chromosome.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass

from .atlas import (
    BandAddress,
    BandAtlas,
    BandSyntaxError,
    Special,
    UNKNOWN_SEX_CHROMOSOME,
    desk_atlas,
    is_chromosome,
    parse_band,
)
from .model import (
    AbnormalityEvent,
    BaseKaryotype,
    DeletionStyle,
    EventKind,
    Karyotype,
    chromosome_count,
)


class TokenKind(enum.Enum):
    COUNT = "count"
    SEX = "sex designator"
    PLUS = "'+'"
    MINUS = "'-'"
    EVENT = "event name"
    OPEN = "'('"
    CLOSE = "')'"
    SEMICOLON = "';'"
    COMMA = "','"
    CHROMOSOME = "chromosome"
    BAND = "band text"
    WHITESPACE = "whitespace"


@dataclass(frozen=True)
class IscnToken:
    kind: TokenKind
    lexeme: str
    position: int


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    position: int
    message: str
    severity: Severity = Severity.ERROR

    def __str__(self) -> str:
        return f"{self.severity.value} at {self.position}: {self.message}"


class KaryotypeError(ValueError):
    """Raised when a string cannot be turned into a valid karyotype."""

    def __init__(self, text: str, diagnostics: list[ParseDiagnostic]):
        self.text = text
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.severity is Severity.ERROR]
        super().__init__(f"{text!r}: " + "; ".join(str(d) for d in errors))


class IscnSyntaxError(ValueError):
    """Grammar violation; parsing stops at the first one."""

    def __init__(self, position: int, message: str):
        super().__init__(f"{message} (at position {position})")
        self.position = position
        self.diagnostic = ParseDiagnostic(position, message)


EVENT_NAMES = {
    "add": EventKind.ADDITION,
    "del": EventKind.DELETION,
    "dup": EventKind.DUPLICATION,
    "trp": EventKind.TRIPLICATION,
    "qdp": EventKind.QUADRUPLICATION,
    "inv": EventKind.INVERSION,
    "ins": EventKind.INSERTION,
    "t": EventKind.TRANSLOCATION,
    "fis": EventKind.FISSION,
}
_NAME_OF = {kind: name for name, kind in EVENT_NAMES.items()}
_NAME_OF.update(
    {
        EventKind.DIRECT_DUPLICATION: "dup",
        EventKind.INVERSE_DUPLICATION: "dup",
        EventKind.DIRECT_INSERTION: "ins",
        EventKind.INVERSE_INSERTION: "ins",
    }
)

_RUNS = {
    "digits": re.compile(r"\d+"),
    "letters": re.compile(r"[A-Za-z]+"),
    "lower": re.compile(r"[a-z]+"),
    "chrom": re.compile(r"[0-9A-Za-z]+"),
    "band": re.compile(r"[A-Za-z0-9.]+"),
    "space": re.compile(r"\s+"),
}
_PUNCT = {",": TokenKind.COMMA, ";": TokenKind.SEMICOLON, "+": TokenKind.PLUS, "-": TokenKind.MINUS}


def tokenize(text: str) -> list[IscnToken]:
    """Split ``text`` into tokens whose lexemes concatenate back to ``text``.

    The lexer is contextual: the same characters are a count, a sex
    designator, a chromosome or band text depending on the field and
    parenthesis group they sit in.
    """
    tokens: list[IscnToken] = []
    i = 0
    field_no = 0
    group = 0
    inside = False
    last = None

    def take(kind: TokenKind, pattern: str) -> None:
        nonlocal i, last
        m = _RUNS[pattern].match(text, i)
        assert m is not None
        tokens.append(IscnToken(kind, m.group(), i))
        i = m.end()
        last = kind

    while i < len(text):
        ch = text[i]
        if ch.isspace():
            m = _RUNS["space"].match(text, i)
            tokens.append(IscnToken(TokenKind.WHITESPACE, m.group(), i))
            i = m.end()
            continue
        if inside:
            if ch == ")":
                kind = TokenKind.CLOSE
                inside = False
            elif ch == ";":
                kind = TokenKind.SEMICOLON
            elif ch == "(":
                raise IscnSyntaxError(i, "parentheses do not nest")
            elif group == 1 and _RUNS["chrom"].match(ch):
                take(TokenKind.CHROMOSOME, "chrom")
                continue
            elif group >= 2 and _RUNS["band"].match(ch):
                take(TokenKind.BAND, "band")
                continue
            else:
                raise IscnSyntaxError(i, f"unexpected character {ch!r}")
            tokens.append(IscnToken(kind, ch, i))
            i += 1
            last = kind
            continue

        if ch == "(":
            group += 1
            inside = True
            tokens.append(IscnToken(TokenKind.OPEN, ch, i))
            i += 1
            last = TokenKind.OPEN
        elif ch == ")":
            raise IscnSyntaxError(i, "unmatched ')'")
        elif ch in _PUNCT:
            if ch == ",":
                field_no += 1
                group = 0
            tokens.append(IscnToken(_PUNCT[ch], ch, i))
            i += 1
            last = _PUNCT[ch]
        elif field_no == 0 and ch.isdigit():
            take(TokenKind.COUNT, "digits")
        elif field_no == 1 and ch.isalpha():
            take(TokenKind.SEX, "letters")
        elif last in (TokenKind.PLUS, TokenKind.MINUS) and _RUNS["chrom"].match(ch):
            take(TokenKind.CHROMOSOME, "chrom")
        elif field_no >= 2 and ch.islower():
            take(TokenKind.EVENT, "lower")
        else:
            raise IscnSyntaxError(i, f"unexpected character {ch!r}")
    return tokens


def _orientation(atlas: BandAtlas, a: BandAddress, b: BandAddress) -> bool | None:
    """True for pter-to-qter order, False for reversed, None when the bands overlap."""
    (alo, ahi), (blo, bhi) = atlas.span(a), atlas.span(b)
    if ahi < blo:
        return True
    if bhi < alo:
        return False
    return None


class _Parser:
    def __init__(self, text: str, atlas: BandAtlas):
        self.text = text
        self.atlas = atlas
        self.tokens = [t for t in tokenize(text) if t.kind is not TokenKind.WHITESPACE]
        self.pos = 0
        self.diagnostics: list[ParseDiagnostic] = []
        if any(ch.isspace() for ch in text):
            first = next(i for i, ch in enumerate(text) if ch.isspace())
            self.warn(first, "whitespace is not part of ISCN and was ignored")

    def error(self, position: int, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(position, message))

    def warn(self, position: int, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(position, message, Severity.WARNING))

    def peek(self) -> IscnToken | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def expect(self, kind: TokenKind, context: str) -> IscnToken:
        tok = self.peek()
        if tok is None:
            raise IscnSyntaxError(max(len(self.text) - 1, 0), f"expected {kind.value} {context}, found end of input")
        if tok.kind is not kind:
            raise IscnSyntaxError(tok.position, f"expected {kind.value} {context}, found {tok.lexeme!r}")
        self.pos += 1
        return tok

    def accept(self, kind: TokenKind) -> IscnToken | None:
        tok = self.peek()
        if tok is not None and tok.kind is kind:
            self.pos += 1
            return tok
        return None

    # -- grammar ------------------------------------------------------------

    def parse(self) -> Karyotype | None:
        count_tok = self.expect(TokenKind.COUNT, "at the start")
        self.expect(TokenKind.COMMA, "after the chromosome count")
        sex_tok = self.expect(TokenKind.SEX, "after the chromosome count")
        terms: list[AbnormalityEvent] = []
        while self.peek() is not None:
            self.expect(TokenKind.COMMA, "between terms")
            event = self.term()
            if event is not None:
                terms.append(event)
        events = _merge_repeats(terms)
        if any(d.severity is Severity.ERROR for d in self.diagnostics):
            return None

        derived = self.derive_base(sex_tok, events)
        if derived is None:
            return None
        base, implicit = derived
        k = Karyotype(base, tuple(implicit) + tuple(events), sex_tok.lexeme, source_text=self.text)
        expected = chromosome_count(k)
        if int(count_tok.lexeme) != expected:
            self.error(
                count_tok.position,
                f"chromosome count {count_tok.lexeme} is inconsistent with {expected} implied by "
                f"{base.value} and the listed events",
            )
            return None
        return k

    def term(self) -> AbnormalityEvent | None:
        sign = self.accept(TokenKind.PLUS) or self.accept(TokenKind.MINUS)
        if sign is not None:
            chrom = self.expect(TokenKind.CHROMOSOME, f"after {sign.lexeme!r}")
            if not is_chromosome(chrom.lexeme):
                self.error(chrom.position, f"unknown chromosome {chrom.lexeme!r}")
                return None
            kind = EventKind.ADDITION if sign.kind is TokenKind.PLUS else EventKind.DELETION
            return AbnormalityEvent(kind, target=chrom.lexeme)

        name = self.expect(TokenKind.EVENT, "or a '+'/'-' term")
        self.expect(TokenKind.OPEN, f"after {name.lexeme!r}")
        chroms = [self.expect(TokenKind.CHROMOSOME, "in the chromosome list")]
        while self.accept(TokenKind.SEMICOLON):
            chroms.append(self.expect(TokenKind.CHROMOSOME, "after ';'"))
        self.expect(TokenKind.CLOSE, "after the chromosome list")
        self.expect(TokenKind.OPEN, "before the breakpoints")
        band_toks = [self.expect(TokenKind.BAND, "in the breakpoint list")]
        while self.accept(TokenKind.SEMICOLON):
            band_toks.append(self.expect(TokenKind.BAND, "after ';'"))
        self.expect(TokenKind.CLOSE, "after the breakpoints")

        if name.lexeme not in EVENT_NAMES:
            self.error(name.position, f"unknown event {name.lexeme!r}")
            return None
        ok = True
        for c in chroms:
            if not is_chromosome(c.lexeme):
                self.error(c.position, f"unknown chromosome {c.lexeme!r}")
                ok = False
        if len(chroms) > 2:
            self.error(chroms[2].position, "events span at most two chromosomes")
            ok = False
        if len(band_toks) != len(chroms):
            where = band_toks[min(len(band_toks), len(chroms)) - 1].position
            self.error(where, f"{len(chroms)} chromosome(s) but {len(band_toks)} breakpoint list(s)")
            ok = False
        if not ok:
            return None

        breakpoints: list[BandAddress] = []
        shape: list[int] = []
        for c, tok in zip(chroms, band_toks):
            run = self.split_bands(tok, c.lexeme)
            if run is None:
                ok = False
                continue
            breakpoints.extend(run)
            shape.append(len(run))
        if not ok:
            return None
        return self.build_event(name, EVENT_NAMES[name.lexeme], tuple(breakpoints), tuple(shape))

    def split_bands(self, tok: IscnToken, chrom: str) -> list[BandAddress] | None:
        pieces = [m for m in re.finditer(r".[^pq]*", tok.lexeme)]
        out = []
        for m in pieces:
            position = tok.position + m.start()
            try:
                band = parse_band(m.group(), chromosome=chrom, offset=position)
            except BandSyntaxError as exc:
                self.error(exc.position, exc.message)
                return None
            if band.special is Special.WHOLE_ARM:
                self.error(position, f"{band} names a whole arm, not a breakpoint")
                return None
            if band not in self.atlas:
                self.error(position, f"band {band} is not in the atlas")
                return None
            out.append(band)
        return out

    def build_event(
        self, name: IscnToken, kind: EventKind, bps: tuple[BandAddress, ...], shape: tuple[int, ...]
    ) -> AbnormalityEvent | None:
        style = None
        if kind is EventKind.DELETION:
            style = DeletionStyle.TERMINAL if shape == (1,) else DeletionStyle.INTERSTITIAL
        elif kind is EventKind.DUPLICATION and shape == (2,):
            kind = {True: EventKind.DIRECT_DUPLICATION, False: EventKind.INVERSE_DUPLICATION}.get(
                _orientation(self.atlas, *bps), EventKind.DUPLICATION
            )
        elif kind is EventKind.INSERTION and shape in ((3,), (1, 2)):
            kind = {True: EventKind.DIRECT_INSERTION, False: EventKind.INVERSE_INSERTION}.get(
                _orientation(self.atlas, bps[-2], bps[-1]), EventKind.INSERTION
            )
        try:
            return AbnormalityEvent(kind, breakpoints=bps, deletion_style=style)
        except ValueError as exc:
            self.error(name.position, f"{name.lexeme}: {exc}")
            return None

    def derive_base(
        self, sex_tok: IscnToken, events: list[AbnormalityEvent]
    ) -> tuple[BaseKaryotype, list[AbnormalityEvent]] | None:
        designator = sex_tok.lexeme
        bad = [i for i, ch in enumerate(designator) if ch not in "XYN"]
        if bad:
            self.error(sex_tok.position + bad[0], "sex designator may only contain X, Y or N")
            return None
        pre = Counter(designator)
        for e in events:
            if e.is_whole_chromosome and e.target in ("X", "Y"):
                pre[e.target] += e.multiplicity if e.kind is EventKind.DELETION else -e.multiplicity
            elif not e.is_whole_chromosome:
                for chrom in set(e.chromosomes) & {"X", "Y"}:
                    pre[chrom] += e.multiplicity
        if any(v < 0 for v in pre.values()):
            self.error(sex_tok.position, f"sex designator {designator} cannot account for the +X/+Y terms")
            return None

        if UNKNOWN_SEX_CHROMOSOME in pre:
            if pre != Counter("XN"):
                self.error(sex_tok.position, "N only appears in the partial-knowledge base 46,XN")
                return None
            return BaseKaryotype.XN, []

        x, y = pre["X"], pre["Y"]
        if x + y == 0:
            self.error(sex_tok.position, "no sex chromosome complement can be derived")
            return None
        cost_xx = abs(x - 2) + y
        cost_xy = abs(x - 1) + abs(y - 1)
        if cost_xx == cost_xy:
            # both bases explain the complement equally well: the lost or gained one is unknown
            d = x + y - 2
            implicit = []
            if d:
                kind = EventKind.ADDITION if d > 0 else EventKind.DELETION
                implicit.append(
                    AbnormalityEvent(kind, abs(d), target=UNKNOWN_SEX_CHROMOSOME, constitutional=True)
                )
            return BaseKaryotype.XN, implicit
        base = BaseKaryotype.XX if cost_xx < cost_xy else BaseKaryotype.XY
        implicit = []
        for letter in "XY":
            d = pre[letter] - base.sex_chromosomes.count(letter)
            if d:
                kind = EventKind.ADDITION if d > 0 else EventKind.DELETION
                implicit.append(AbnormalityEvent(kind, abs(d), target=letter, constitutional=True))
        return base, implicit


def _merge_repeats(events: list[AbnormalityEvent]) -> list[AbnormalityEvent]:
    out: list[AbnormalityEvent] = []
    for e in events:
        if out and _same_apart_from_count(out[-1], e):
            prev = out.pop()
            out.append(AbnormalityEvent(prev.kind, prev.multiplicity + e.multiplicity, prev.target,
                                        prev.breakpoints, prev.deletion_style, prev.constitutional))
        else:
            out.append(e)
    return out


def _same_apart_from_count(a: AbnormalityEvent, b: AbnormalityEvent) -> bool:
    return (a.kind, a.target, a.breakpoints, a.deletion_style, a.constitutional) == (
        b.kind, b.target, b.breakpoints, b.deletion_style, b.constitutional
    )


def check_karyotype(text: str, atlas: BandAtlas | None = None) -> tuple[Karyotype | None, list[ParseDiagnostic]]:
    """Parse ``text`` and return the karyotype (None on error) with all diagnostics."""
    atlas = atlas if atlas is not None else desk_atlas()
    try:
        parser = _Parser(text, atlas)
        k = parser.parse()
    except IscnSyntaxError as abort:
        return None, [abort.diagnostic]
    return k, parser.diagnostics


def parse_karyotype(text: str, atlas: BandAtlas | None = None) -> Karyotype:
    k, diagnostics = check_karyotype(text, atlas)
    if k is None:
        raise KaryotypeError(text, diagnostics)
    return k


def format_term(event: AbnormalityEvent) -> str:
    if event.is_whole_chromosome:
        return ("+" if event.kind is EventKind.ADDITION else "-") + event.target
    chroms = ";".join(event.chromosomes)
    bands = ";".join("".join(b.local_text for b in g) for g in event.groups)
    return f"{_NAME_OF[event.kind]}({chroms})({bands})"


def serialize_karyotype(k: Karyotype) -> str:
    """The short-system string for ``k``.

    Raises ValueError when every sex chromosome is rearranged, since the
    designator would then be empty.
    """
    if not k.sex_chromosomes:
        raise ValueError("no intact sex chromosome is left for the designator")
    parts = [str(chromosome_count(k)), k.sex_chromosomes]
    for e in k.events:
        if not e.constitutional:
            parts.extend([format_term(e)] * e.multiplicity)
    return ",".join(parts)


def normalize(text: str) -> str:
    return "".join(text.split())
