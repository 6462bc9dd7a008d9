#!/usr/bin/env python3
"""
End-to-end tests through FingerprintCompressor and the command line.
"""

from dataclasses import replace

import pytest
import numpy as np
import pandas as pd
import sys
import os

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fpbz import cli
from fpbz.app_data import CONFIG_ENV_VAR, PipelineConfig
from fpbz.core.codec import CompressedFingerprint, decode, encode
from fpbz.core.raster_io import GrayImage, read_pgm, write_pgm
from fpbz.pipeline import FingerprintCompressor, decompress_bytes, dump_stages, run_batch


def blank_pgm(width=8, height=8):
    return write_pgm(GrayImage.from_array(np.full((height, width), 255, dtype=np.uint8)))


def line_pgm():
    """30x10 white image with a black horizontal line from (2, 5) to (25, 5)."""
    pixels = np.full((10, 30), 255, dtype=np.uint8)
    pixels[5, 2:26] = 0
    return write_pgm(GrayImage.from_array(pixels))


def border_branch_pgm():
    """A line along row 0 with an arm hanging down from x = 8; the junction is on the border."""
    pixels = np.full((12, 20), 255, dtype=np.uint8)
    pixels[0, 2:16] = 0
    pixels[1:10, 8] = 0
    return write_pgm(GrayImage.from_array(pixels))


@pytest.fixture
def line_file(tmp_path):
    path = tmp_path / "line.pgm"
    path.write_bytes(line_pgm())
    return path


class TestFingerprintCompressor:

    def test_blank_image_has_no_ridges(self):
        result = FingerprintCompressor().compress_bytes(blank_pgm())
        assert len(blank_pgm()) == 75
        assert result.ridge_count == 0
        assert len(result.data) == 14
        assert decode(result.data).ridges == ()
        assert result.stats_line() == "ridges=0 in=75 out=14 ratio=5.36"

    def test_skeleton_line_gives_one_ridge(self):
        result = FingerprintCompressor(skip_preprocess=True).compress_bytes(line_pgm())
        assert result.ridge_count == 1
        assert result.output_size == 46
        assert result.stats_line() == "ridges=1 in=313 out=46 ratio=6.80"
        assert list(result.fit_report.columns) == ['ridge', 'points', 'rms', 'max', 'fallback']
        assert result.fit_report['points'].tolist() == [24]

    def test_decompress_redraws_the_line(self):
        data = FingerprintCompressor(skip_preprocess=True).compress_bytes(line_pgm()).data
        image = decompress_bytes(data)
        black = np.argwhere(image.pixels == 0)
        assert sorted((int(x), int(y)) for y, x in black) == [(x, 5) for x in range(2, 26)]
        assert set(np.unique(image.pixels).tolist()) == {0, 255}

    def test_evaluate_perfect_line(self):
        evaluation = FingerprintCompressor(skip_preprocess=True).evaluate_bytes(line_pgm())
        assert evaluation.report.forward_cover == 1.0
        assert evaluation.report.reverse_cover == 1.0
        assert set(np.unique(evaluation.overlay.pixels).tolist()) == {0, 255}
        text = evaluation.report_text()
        assert text.startswith("forward_cover: 1.000000\n")
        assert "ridges: 1\n" in text
        assert "fit_fallbacks: 0\n" in text

    def test_branch_at_border_keeps_both_arms(self):
        compressor = FingerprintCompressor(skip_preprocess=True)
        evaluation = compressor.evaluate_bytes(border_branch_pgm())
        extraction = evaluation.compression.stages.extraction
        assert evaluation.compression.ridge_count == 2
        assert sorted(len(p) for p in extraction.paths) == [9, 14]
        assert evaluation.report.extracted_pixels == 23
        assert evaluation.report.forward_cover == 1.0

    def test_coverage_counts_pixels_off_the_paths(self):
        compressor = FingerprintCompressor(skip_preprocess=True)
        result = compressor.compress_bytes(border_branch_pgm())
        # encode only the horizontal ridge; the arm's pixels must still count
        partial = replace(result, data=encode(CompressedFingerprint(
            width=20, height=12, ridges=result.fingerprint.ridges[:1])))
        report = compressor.evaluate_result(partial).report
        assert report.extracted_pixels == 23
        assert report.forward_cover < 0.90

    def test_short_ridges_dropped(self):
        compressor = FingerprintCompressor(PipelineConfig(min_ridge_px=30), skip_preprocess=True)
        assert compressor.compress_bytes(line_pgm()).ridge_count == 0

    def test_dump_stages(self, tmp_path):
        result = FingerprintCompressor(skip_preprocess=True).compress_bytes(line_pgm())
        written = dump_stages(result, tmp_path / "stages")
        names = [p.name for p in written]
        assert names == ['01_source.pgm', '06_cleaned.pgm', '07_skeleton.pgm',
                         '08_separated.pgm', '09_ridges.pgm', 'ridges.txt', 'fit_report.csv']
        ridges = (tmp_path / "stages" / "ridges.txt").read_text()
        assert ridges.startswith("0: (2,5) (3,5) ")
        report = pd.read_csv(tmp_path / "stages" / "fit_report.csv")
        assert len(report) == 1
        assert read_pgm((tmp_path / "stages" / "01_source.pgm").read_bytes()).width == 30

    def test_full_preprocess_dumps_every_stage(self, tmp_path):
        result = FingerprintCompressor().compress_bytes(blank_pgm(40, 40))
        names = [p.name for p in dump_stages(result, tmp_path)]
        assert names[:5] == ['01_source.pgm', '02_equalized.pgm', '03_enhanced.pgm',
                             '04_binary.pgm', '05_orientation.pgm']


class TestRunBatch:

    @staticmethod
    def worker(n):
        if n == 3:
            raise ValueError("three")
        return n * 10

    @pytest.mark.parametrize("jobs", [1, 3])
    def test_failures_collected_in_order(self, jobs):
        outcomes = run_batch(self.worker, [1, 2, 3, 4, 5], jobs=jobs)
        assert [item for item, _ in outcomes] == [1, 2, 3, 4, 5]
        assert [o for _, o in outcomes if not isinstance(o, Exception)] == [10, 20, 40, 50]
        assert isinstance(outcomes[2][1], ValueError)

    def test_invalid_jobs(self):
        with pytest.raises(ValueError):
            run_batch(self.worker, [1], jobs=0)


class TestCli:

    def test_compress_info_decompress(self, line_file, tmp_path, capsys):
        fbz = tmp_path / "line.fbz"
        assert cli.main(['compress', str(line_file), '-o', str(fbz), '--skip-preprocess']) == 0
        assert capsys.readouterr().out == "ridges=1 in=313 out=46 ratio=6.80\n"
        assert fbz.stat().st_size == 46

        assert cli.main(['info', str(fbz)]) == 0
        assert capsys.readouterr().out == (
            "magic=ok version=1 width=30 height=10 ridges=1 size=46 expected=46\n")

        restored = tmp_path / "restored.pgm"
        assert cli.main(['decompress', str(fbz), '-o', str(restored)]) == 0
        assert capsys.readouterr().out == f"width=30 height=10 out={restored}\n"
        assert read_pgm(restored.read_bytes()).pixel(10, 5) == 0

    def test_compress_default_output_name(self, line_file, capsys):
        assert cli.main(['compress', str(line_file), '--skip-preprocess']) == 0
        assert line_file.with_suffix('.fbz').exists()

    def test_batch_with_failure(self, line_file, tmp_path, capsys):
        missing = tmp_path / "missing.pgm"
        out_dir = tmp_path / "out"
        status = cli.main(['compress', str(line_file), str(missing), '--skip-preprocess',
                           '--out-dir', str(out_dir), '-j', '2'])
        captured = capsys.readouterr()
        assert status == 1
        assert "line.pgm: ridges=1 in=313 out=46 ratio=6.80" in captured.out
        assert "❌" in captured.err and "missing.pgm" in captured.err
        assert (out_dir / "line.fbz").exists()

    def test_batch_summary_line(self, tmp_path, capsys):
        inputs = []
        for name in ("a.pgm", "b.pgm"):
            path = tmp_path / name
            path.write_bytes(blank_pgm())
            inputs.append(str(path))
        assert cli.main(['compress'] + inputs) == 0
        out = capsys.readouterr().out.splitlines()
        assert out == ["a.pgm: ridges=0 in=75 out=14 ratio=5.36",
                       "b.pgm: ridges=0 in=75 out=14 ratio=5.36",
                       "files=2 median_ratio=5.36"]

    def test_output_with_many_inputs_rejected(self, line_file, tmp_path, capsys):
        status = cli.main(['compress', str(line_file), str(line_file),
                           '-o', str(tmp_path / "x.fbz")])
        assert status == 1
        assert "❌ Error:" in capsys.readouterr().err

    def test_evaluate_writes_overlay_and_report(self, line_file, tmp_path, capsys):
        out_dir = tmp_path / "results"
        assert cli.main(['evaluate', str(line_file), '--skip-preprocess',
                         '--out-dir', str(out_dir)]) == 0
        assert "forward_cover=1.0000" in capsys.readouterr().out
        report = (out_dir / "line_report.txt").read_text()
        assert report.startswith("forward_cover: 1.000000\n")
        overlay = read_pgm((out_dir / "line_overlay.pgm").read_bytes())
        assert (overlay.width, overlay.height) == (30, 10)

    def test_config_from_environment(self, line_file, tmp_path, monkeypatch, capsys):
        conf = tmp_path / "fpbz.conf"
        conf.write_text("min_ridge_px = 30\n")
        monkeypatch.setenv(CONFIG_ENV_VAR, str(conf))
        assert cli.main(['compress', str(line_file), '--skip-preprocess']) == 0
        assert capsys.readouterr().out == "ridges=0 in=313 out=14 ratio=22.36\n"

    def test_flag_beats_config_file(self, line_file, tmp_path, capsys):
        conf = tmp_path / "fpbz.conf"
        conf.write_text("min_ridge_px = 30\n")
        assert cli.main(['compress', str(line_file), '--skip-preprocess',
                         '--config', str(conf), '--min-ridge-px', '4']) == 0
        assert capsys.readouterr().out.startswith("ridges=1 ")

    def test_bad_config_file(self, line_file, tmp_path, capsys):
        conf = tmp_path / "bad.conf"
        conf.write_text("colour = red\n")
        assert cli.main(['compress', str(line_file), '--config', str(conf)]) == 1
        assert "unknown key" in capsys.readouterr().err

    def test_info_on_truncated_file(self, tmp_path, capsys):
        broken = tmp_path / "broken.fbz"
        broken.write_bytes(b"FPBZ\x01\x00\x1e\x00\x0a\x00\x01\x00\x00\x00" + bytes(10))
        assert cli.main(['info', str(broken)]) == 1
        assert "Truncated" in capsys.readouterr().err

    def test_synth(self, tmp_path, capsys):
        assert cli.main(['synth', str(tmp_path / "corpus"), '--count', '2', '--seed', '5']) == 0
        files = sorted(p.name for p in (tmp_path / "corpus").iterdir())
        assert files == ['synth_0000.pgm', 'synth_0001.pgm']
        image = read_pgm((tmp_path / "corpus" / "synth_0000.pgm").read_bytes())
        assert (image.width, image.height) == (256, 288)
