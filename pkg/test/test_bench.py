"""Regression tests over the benchmark corpus."""

import pytest

from exlife.summary import extract_summaries, render_summary_report

from .conftest import CORPUS, GOLDEN, load_program

BENCH = CORPUS / "bench"
STEMS = ("basic", "multiple_call", "multiple_path", "multiple_throw", "field_value", "motivation")


@pytest.mark.parametrize("stem", STEMS)
def test_bench_matches_golden(stem):
    report = extract_summaries(load_program(BENCH / f"{stem}.exir"))
    assert render_summary_report(report) == (GOLDEN / f"{stem}.txt").read_text(encoding="utf-8")


def test_bench_size():
    counts = {stem: extract_summaries(load_program(BENCH / f"{stem}.exir")).summary_count for stem in STEMS}
    assert sum(counts.values()) >= 40
    assert all(counts.values())
