from __future__ import annotations

import io

import pytest

from karyograph.atlas import UnknownBandError, parse_band
from karyograph.model import BaseKaryotype, Karyotype
from karyograph.query import (
    Corpus,
    CorpusEntry,
    CorpusError,
    build_corpus,
    load_corpus,
    query_abnormal_in,
    query_affects,
    query_copy_gain,
)

TRP = "k46_XX_trp!1!!q42q44!"
INV = "k46_XX_inv!2!!p21q31!"


@pytest.mark.parametrize(
    "chrom, present, absent",
    [("Y", ["k45_X_-Y"], ["k46_XY"]), ("21", ["k47_XX_+21"], ["k46_XX"]), ("2", [INV], ["k46_XX_del!1!!q42!"])],
)
def test_abnormal_in(corpus, chrom, present, absent):
    hits = query_abnormal_in(corpus, chrom)
    assert set(present) <= set(hits)
    assert not set(absent) & set(hits)


def test_abnormal_in_rejects_unknown_sex_chromosome(corpus):
    with pytest.raises(ValueError):
        query_abnormal_in(corpus, "N")


@pytest.mark.parametrize(
    "band, present, absent",
    [("1q42.2", [TRP], []), ("1q42", [TRP], ["k46_XY"]), ("2p21", [], [INV]), ("21q22", ["k47_XX_+21", "k48_XY_+21_+21"], ["k45_XX_-22"])],
)
def test_copy_gain(corpus, band, present, absent):
    hits = query_copy_gain(corpus, parse_band(band))
    assert set(present) <= set(hits)
    assert not set(absent) & set(hits)


@pytest.mark.parametrize(
    "band, present, absent",
    [("2q31", [INV], []), ("Yq11.2", ["k45_X_-Y"], []), ("1p11.1", [], ["k46_XX"]), ("1q42.13", ["k46_XX_del!1!!q42!"], [])],
)
def test_affects(corpus, band, present, absent):
    hits = query_affects(corpus, parse_band(band))
    assert set(present) <= set(hits)
    assert not set(absent) & set(hits)


def test_results_keep_corpus_order(corpus):
    hits = query_abnormal_in(corpus, "2")
    assert hits == [n for n in corpus.names if n in hits]


def test_unknown_band(corpus):
    with pytest.raises(UnknownBandError):
        query_affects(corpus, parse_band("1q49"))
    with pytest.raises(UnknownBandError):
        query_copy_gain(corpus, parse_band("3q21"))


def test_gain_implies_affected(corpus, atlas):
    for b in atlas:
        assert set(query_copy_gain(corpus, b)) <= set(query_affects(corpus, b))


def test_coarse_query_covers_every_sub_band(corpus, atlas):
    for b in atlas:
        coarse = set(query_affects(corpus, b))
        for child in atlas.children(b):
            assert set(query_affects(corpus, child)) <= coarse


def test_sub_band_sees_events_covering_its_parent(corpus, atlas):
    # whole-chromosome and spanning events that cover a parent affect each sub-band the same way
    whole = {"k45_X_-Y", "k47_XX_+21"}
    for b in atlas:
        covering = whole & set(query_affects(corpus, b))
        for child in atlas.children(b):
            assert covering <= set(query_affects(corpus, child))


def test_duplicate_names_are_rejected(atlas):
    entry = CorpusEntry("k46_XX", Karyotype(BaseKaryotype.XX))
    with pytest.raises(CorpusError):
        Corpus((entry, entry), atlas)


def test_corpus_file_errors_name_the_line(atlas):
    with pytest.raises(CorpusError) as info:
        build_corpus(io.StringIO("# c\n46,XX\n46,XX,del(1)(z42)\n"), atlas)
    assert info.value.line == 3


def test_load_corpus_from_path(tmp_path, atlas):
    path = tmp_path / "c.txt"
    path.write_text("46,XX\n\n45,X,-Y\n", encoding="utf-8")
    assert load_corpus(path, atlas).names == ["k46_XX", "k45_X_-Y"]
