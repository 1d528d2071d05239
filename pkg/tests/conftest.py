from __future__ import annotations

import io
import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from karyograph.atlas import desk_atlas  # noqa: E402
from karyograph.query import build_corpus, corpus_lines, desk_corpus_text  # noqa: E402
from oracles import TextAtlas  # noqa: E402

DATA = Path(__file__).parent / "data"

# criterion number -> (title, outcomes)
_CRITERIA: dict[int, tuple[str, list[bool]]] = {}


def desk_atlas_text() -> str:
    return resources.files("karyograph").joinpath("data/desk_atlas.tsv").read_text("utf-8")


def desk_corpus_strings() -> list[str]:
    return [text for _, text in corpus_lines(desk_corpus_text().splitlines())]


@pytest.fixture(scope="session")
def atlas():
    return desk_atlas()


@pytest.fixture(scope="session")
def text_atlas():
    return TextAtlas.from_text(desk_atlas_text())


@pytest.fixture(scope="session")
def corpus(atlas):
    return build_corpus(io.StringIO(desk_corpus_text()), atlas)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _CRITERIA.setdefault(number, (title, []))[1].append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[number]
        verdict = "PASS" if outcomes and all(outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title} ({sum(outcomes)}/{len(outcomes)} checks)")
