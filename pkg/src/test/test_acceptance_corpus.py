#!/usr/bin/env python3
"""
Acceptance run over a generated corpus of 256x288 synthetic prints.

Checks the ridge count, the compression ratio, the file size law, reconstruction coverage
and per-image runtime of the full pipeline.
"""

import time
import pytest
import pandas as pd
import sys
import os

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fpbz.core.codec import decode, expected_size, quantize
from fpbz.core.raster_io import write_pgm
from fpbz.core.ridge_extract import render_ridges
from fpbz.pipeline import FingerprintCompressor, batch_summary
from fpbz.synthetic import RidgePattern, render_pattern, synthetic_corpus, synthetic_fingerprint

CORPUS_SIZE = 50


def run_corpus(images):
    compressor = FingerprintCompressor()
    evaluations = []
    timings = []
    for image in images:
        start = time.perf_counter()
        result = compressor.compress_image(image, len(write_pgm(image)))
        timings.append(time.perf_counter() - start)
        evaluations.append(compressor.evaluate_result(result))
    return evaluations, timings


@pytest.fixture(scope="module")
def corpus_run():
    return run_corpus(synthetic_corpus(CORPUS_SIZE, seed=0))


class TestSyntheticCorpus:

    def test_every_file_obeys_the_size_law(self, corpus_run):
        evaluations, _ = corpus_run
        for evaluation in evaluations:
            result = evaluation.compression
            assert result.output_size == expected_size(result.ridge_count)
            assert decode(result.data) == quantize(result.fingerprint)

    def test_ridges_found(self, corpus_run):
        evaluations, _ = corpus_run
        assert all(e.compression.ridge_count > 0 for e in evaluations)

    def test_ridge_count_in_range(self, corpus_run):
        evaluations, _ = corpus_run
        counts = pd.Series([e.compression.ridge_count for e in evaluations])
        print(counts.describe())
        assert counts.between(60, 120).all()

    def test_paths_cover_every_ridge_pixel(self, corpus_run):
        evaluations, _ = corpus_run
        for evaluation in evaluations:
            extraction = evaluation.compression.stages.extraction
            drawn = render_ridges(extraction.paths, extraction.ridge_pixels.width,
                                  extraction.ridge_pixels.height)
            assert drawn == extraction.ridge_pixels
            assert evaluation.extracted == extraction.ridge_pixels

    def test_compression_ratio(self, corpus_run):
        evaluations, _ = corpus_run
        summary = batch_summary([e.compression for e in evaluations])
        print(summary.describe())
        assert (summary['ratio'] >= 5.0).all()
        assert summary['ratio'].median() >= 7.0

    def test_forward_cover(self, corpus_run):
        evaluations, _ = corpus_run
        covers = pd.Series([e.report.forward_cover for e in evaluations])
        print(covers.describe())
        assert (covers >= 0.90).all()

    def test_runtime(self, corpus_run):
        _, timings = corpus_run
        assert pd.Series(timings).median() < 2.0


class TestHighCurvatureReport:
    """Strongly bent ridges cost fit quality; the report shows it without failing."""

    def test_fit_report(self):
        evaluations, _ = run_corpus(synthetic_corpus(5, seed=100, high_curvature=True))
        reports = pd.concat([e.compression.fit_report for e in evaluations], ignore_index=True)
        print(reports[['points', 'rms', 'max']].describe())
        assert list(reports.columns) == ['ridge', 'points', 'rms', 'max', 'fallback']
        assert (reports['rms'] >= 0).all()
        assert (reports['max'] >= reports['rms'] - 1e-12).all()
        for evaluation in evaluations:
            assert 0.0 <= evaluation.report.forward_cover <= 1.0


class TestGenerator:

    def test_same_seed_same_print(self):
        assert synthetic_fingerprint(7) == synthetic_fingerprint(7)
        assert synthetic_fingerprint(7) != synthetic_fingerprint(8)

    def test_break_lightens_one_ridge(self):
        pattern = RidgePattern(period=8.0, angle=0.0, warp_amplitude=0.0, warp_wavelength=500.0,
                               warp_phase=0.0, offset=0.0, breaks=((50.0, 17.0),),
                               break_length=20.0)
        img = render_pattern(pattern, 100, 40)
        assert img.pixel(50, 16) == 218
        assert img.pixel(41, 16) == 218
        assert img.pixel(30, 16) == 38
        assert img.pixel(50, 24) == 38
        assert img.pixel(50, 8) == 38
