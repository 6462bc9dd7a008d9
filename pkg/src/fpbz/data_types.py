"""
Result records passed between the pipeline, the CLI and the tests.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import pandas as pd

from .core.codec import CompressedFingerprint, compression_stats
from .core.preprocess import OrientationField
from .core.raster_io import BinaryImage, GrayImage
from .core.reconstruct_eval import OverlapReport
from .core.ridge_extract import RidgeExtraction

FIT_REPORT_COLUMNS = ['ridge', 'points', 'rms', 'max', 'fallback']


@dataclass
class PipelineStages:
    """Intermediate images of one compress run. Preprocessing stages are None
    when the input was already a binary skeleton."""
    source: GrayImage
    equalized: Optional[GrayImage]
    enhanced: Optional[GrayImage]
    binary: Optional[BinaryImage]
    orientation: Optional[OrientationField]
    cleaned: BinaryImage
    skeleton: BinaryImage
    extraction: RidgeExtraction


@dataclass
class CompressionResult:
    """Everything produced by compressing one image."""
    stages: PipelineStages
    fingerprint: CompressedFingerprint
    data: bytes
    input_size: int
    fit_report: pd.DataFrame
    source_path: Optional[Path] = None

    @property
    def ridge_count(self) -> int:
        return len(self.fingerprint.ridges)

    @property
    def output_size(self) -> int:
        return len(self.data)

    @property
    def ratio(self) -> float:
        return compression_stats(self.input_size, self.output_size)

    def stats_line(self) -> str:
        return (f"ridges={self.ridge_count} in={self.input_size} "
                f"out={self.output_size} ratio={self.ratio:.2f}")


@dataclass
class EvaluationResult:
    """A compression run plus its reconstruction and overlap numbers."""
    compression: CompressionResult
    extracted: BinaryImage
    reconstructed: BinaryImage
    overlay: GrayImage
    report: OverlapReport

    def report_text(self) -> str:
        """Overlap report followed by compression and fit summaries."""
        fits = self.compression.fit_report
        lines = [
            self.report.to_text().rstrip('\n'),
            f"ridges: {self.compression.ridge_count}",
            f"input_bytes: {self.compression.input_size}",
            f"output_bytes: {self.compression.output_size}",
            f"ratio: {self.compression.ratio:.6f}",
        ]
        if len(fits):
            lines += [
                f"fit_rms_mean: {fits['rms'].mean():.6f}",
                f"fit_max_worst: {fits['max'].max():.6f}",
                f"fit_fallbacks: {int(fits['fallback'].sum())}",
            ]
        return '\n'.join(lines) + '\n'
