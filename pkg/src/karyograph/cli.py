"""``karyograph`` command line.

Exit status is 0 on success, 1 for domain errors (bad karyotype, atlas or
band), and 2 for usage and I/O errors. Payload goes to stdout, diagnostics
to stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from typing import Sequence, TextIO

from .atlas import CHROMOSOMES, RESOLUTIONS, AtlasError, BandAtlas, BandSyntaxError, UnknownBandError, desk_atlas, load_atlas, parse_band
from .iscn import ParseDiagnostic, Severity, check_karyotype, serialize_karyotype
from .model import Karyotype, UndeterminedBaselineError, chromosome_count, classify_sex, copy_number
from .names import DemangleError, demangle, mangle
from .owl import export_ontology, projected_class_count, skeleton_class_count
from .query import Corpus, CorpusError, build_corpus, corpus_lines, desk_corpus_text, query_abnormal_in, query_affects, query_copy_gain


class CommandError(Exception):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


class _Context:
    def __init__(self, args: argparse.Namespace, out: TextIO, err: TextIO):
        self.args = args
        self.out = out
        self.err = err
        self._atlas: BandAtlas | None = None

    @property
    def atlas(self) -> BandAtlas:
        if self._atlas is None:
            path = getattr(self.args, "atlas", None)
            if path is None:
                self._atlas = desk_atlas()
            else:
                try:
                    self._atlas = load_atlas(path)
                except OSError as exc:
                    raise CommandError(f"cannot read atlas: {exc}", 2) from None
                except AtlasError as exc:
                    raise CommandError(f"invalid atlas {path}: {exc}") from None
        return self._atlas

    def corpus_text(self) -> str:
        path = getattr(self.args, "corpus", None)
        if path is None:
            return desk_corpus_text()
        try:
            with open(path, encoding="utf-8") as fh:
                return fh.read()
        except (OSError, UnicodeDecodeError) as exc:
            raise CommandError(f"cannot read corpus: {exc}", 2) from None

    def corpus(self) -> Corpus:
        try:
            return build_corpus(io.StringIO(self.corpus_text()), self.atlas)
        except CorpusError as exc:
            raise CommandError(f"invalid corpus: {exc}") from None

    def print(self, *parts: object) -> None:
        print(*parts, file=self.out)

    def warn(self, message: str) -> None:
        print(message, file=self.err)

    def karyotype(self, text: str) -> Karyotype:
        k, diagnostics = check_karyotype(text, self.atlas)
        self.report(text, diagnostics)
        if k is None:
            raise CommandError(f"invalid karyotype {text!r}")
        return k

    def report(self, text: str, diagnostics: list[ParseDiagnostic]) -> None:
        for d in diagnostics:
            self.warn(str(d))
            if d.severity is Severity.ERROR:
                self.warn(f"  {text}\n  {' ' * d.position}^")

    def band(self, text: str):
        try:
            band = parse_band(text)
        except BandSyntaxError as exc:
            raise CommandError(f"invalid band {text!r}: {exc}") from None
        if band not in self.atlas:
            raise CommandError(f"band {band} is not in the atlas")
        return band


def _describe(k: Karyotype) -> dict:
    return {
        "source": k.source_text,
        "base": k.base.value,
        "sex": classify_sex(k).value,
        "chromosome_count": chromosome_count(k),
        "sex_chromosomes": k.sex_chromosomes,
        "canonical": serialize_karyotype(k),
        "events": [
            {
                "kind": e.kind.value,
                "multiplicity": e.multiplicity,
                "target": e.target,
                "breakpoints": [str(b) for b in e.breakpoints],
                "deletion_style": e.deletion_style.value if e.deletion_style else None,
                "constitutional": e.constitutional,
            }
            for e in k.events
        ],
    }


def cmd_parse(ctx: _Context) -> int:
    k = ctx.karyotype(ctx.args.karyotype)
    info = _describe(k)
    if ctx.args.json:
        ctx.print(json.dumps(info, indent=2, sort_keys=True))
        return 0
    for key in ("source", "base", "sex", "chromosome_count", "sex_chromosomes", "canonical"):
        ctx.print(f"{key.replace('_', ' ')}: {info[key]}")
    ctx.print("events:" if k.events else "events: none")
    for e in info["events"]:
        where = e["target"] if e["target"] else " ".join(e["breakpoints"])
        notes = [e["deletion_style"]] if e["deletion_style"] else []
        if e["constitutional"]:
            notes.append("constitutional")
        suffix = f" [{', '.join(notes)}]" if notes else ""
        ctx.print(f"  {e['kind']} x{e['multiplicity']} {where}{suffix}")
    return 0


def cmd_validate(ctx: _Context) -> int:
    atlas = ctx.atlas
    status = 0
    for number, text in corpus_lines(ctx.corpus_text().splitlines()):
        k, diagnostics = check_karyotype(text, atlas)
        if k is None:
            status = 1
            reason = "; ".join(str(d) for d in diagnostics if d.severity is Severity.ERROR)
            ctx.print(f"{mangle(text)}\tERROR\tline {number}: {reason}")
        else:
            ctx.print(f"{mangle(text)}\tOK")
    return status


def cmd_sex(ctx: _Context) -> int:
    ctx.print(classify_sex(ctx.karyotype(ctx.args.karyotype)).value)
    return 0


def cmd_copy_number(ctx: _Context) -> int:
    k = ctx.karyotype(ctx.args.karyotype)
    for text in ctx.args.bands:
        band = ctx.band(text)
        try:
            report = copy_number(k, band, ctx.atlas)
        except UndeterminedBaselineError as exc:
            raise CommandError(str(exc)) from None
        ctx.print(f"{band}\t{report.baseline}\t{report.observed}")
    return 0


def cmd_query(ctx: _Context) -> int:
    corpus = ctx.corpus()
    if ctx.args.form == "abnormal-in":
        if ctx.args.target not in CHROMOSOMES:
            raise CommandError(f"not a chromosome: {ctx.args.target}")
        hits = query_abnormal_in(corpus, ctx.args.target)
    else:
        band = ctx.band(ctx.args.target)
        hits = (query_copy_gain if ctx.args.form == "copy-gain" else query_affects)(corpus, band)
    for name in hits:
        ctx.print(name)
    return 0


def _inputs(ctx: _Context) -> list[str]:
    if ctx.args.items:
        return list(ctx.args.items)
    return [line.strip() for line in sys.stdin if line.strip()]


def cmd_mangle(ctx: _Context) -> int:
    for text in _inputs(ctx):
        ctx.print(mangle(text))
    return 0


def cmd_demangle(ctx: _Context) -> int:
    status = 0
    atlas = ctx.atlas
    for name in _inputs(ctx):
        try:
            ctx.print(demangle(name, atlas))
        except DemangleError as exc:
            ctx.warn(f"error: {exc}")
            status = 1
    return status


def cmd_export_owl(ctx: _Context) -> int:
    data = export_ontology(ctx.atlas, ctx.corpus())
    if ctx.args.out is None or ctx.args.out == "-":
        ctx.out.write(data.decode("utf-8"))
        return 0
    try:
        with open(ctx.args.out, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CommandError(f"cannot write {ctx.args.out}: {exc}", 2) from None
    return 0


def cmd_atlas(ctx: _Context) -> int:
    atlas = ctx.atlas
    ctx.print("\t".join(["chromosome", *map(str, RESOLUTIONS), "bands"]))
    totals = dict.fromkeys(RESOLUTIONS, 0)
    for chrom in atlas.chromosomes:
        row = []
        for r in RESOLUTIONS:
            n = sum(len(atlas.bands(chrom, arm, r)) for arm in ("p", "q"))
            totals[r] += n
            row.append(n)
        distinct = sum(1 for b in atlas if b.chromosome == chrom)
        ctx.print("\t".join([chrom, *map(str, row), str(distinct)]))
    ctx.print("\t".join(["total", *(str(totals[r]) for r in RESOLUTIONS), str(len(atlas))]))
    corpus = ctx.corpus() if getattr(ctx.args, "corpus", None) else None
    projected = projected_class_count(atlas, corpus)
    karyotypes = projected - skeleton_class_count() - len(atlas)
    ctx.print(f"projected classes: {projected} (skeleton {skeleton_class_count()}, bands {len(atlas)}, karyotypes {karyotypes})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--atlas", metavar="FILE", default=argparse.SUPPRESS, help="band atlas (default: bundled desk atlas)")
    shared.add_argument("--corpus", metavar="FILE", default=argparse.SUPPRESS, help="karyotype corpus (default: bundled desk corpus)")

    parser = argparse.ArgumentParser(prog="karyograph", parents=[shared], description="ISCN karyotype parsing, querying and OWL export.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, func, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[shared], help=help, description=help)
        p.set_defaults(func=func)
        return p

    p = command("parse", cmd_parse, "parse one ISCN string and show its event model")
    p.add_argument("karyotype")
    p.add_argument("--json", action="store_true", help="stable JSON rendering")

    command("validate", cmd_validate, "check every corpus entry")

    p = command("sex", cmd_sex, "classify a karyotype as Male, Female or Undetermined")
    p.add_argument("karyotype")

    p = command("copy-number", cmd_copy_number, "baseline and observed copies of bands")
    p.add_argument("karyotype")
    p.add_argument("bands", nargs="+", metavar="BAND")

    p = command("query", cmd_query, "list corpus entries matching a query")
    p.add_argument("form", choices=("abnormal-in", "copy-gain", "affects"))
    p.add_argument("target", metavar="CHROM|BAND")

    p = command("mangle", cmd_mangle, "ISCN strings to safe names (arguments or stdin lines)")
    p.add_argument("items", nargs="*", metavar="ISCN")

    p = command("demangle", cmd_demangle, "safe names back to ISCN strings (arguments or stdin lines)")
    p.add_argument("items", nargs="*", metavar="NAME")

    p = command("export-owl", cmd_export_owl, "write the OWL functional-syntax ontology")
    p.add_argument("--out", metavar="FILE", help="output path (default: stdout)")

    command("atlas", cmd_atlas, "band counts per chromosome and resolution")
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    ctx = _Context(args, out, err)
    try:
        return args.func(ctx)
    except CommandError as exc:
        print(f"error: {exc}", file=err)
        return exc.code
    except UnknownBandError as exc:
        print(f"error: unknown band {exc}", file=err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
