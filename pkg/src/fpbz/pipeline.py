#!/usr/bin/env python3
"""
FPBZ Pipeline Module

Runs the full compression scheme on one image:

    equalize -> FFT enhance -> binarize -> orientation -> cleanup -> thin
    -> minutiae -> disconnect -> label -> order -> fit -> encode

and the reverse path used for evaluation (decode -> rasterize -> compare).
"""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar, Union
import logging

import pandas as pd

from .app_data import PipelineConfig
from .core.bezier_core import fit_error, fit_ridge_detail
from .core.codec import CompressedFingerprint, decode, encode
from .core.preprocess import (binarize, estimate_orientation, fft_enhance,
                              histogram_equalize, morph_cleanup, render_orientation)
from .core.raster_io import (BinaryImage, GrayImage, binary_to_gray, gray_to_binary,
                             read_pgm, write_pgm)
from .core.reconstruct_eval import overlap_metrics, rasterize, superimpose
from .core.ridge_extract import RidgePath, extract_ridges, format_ridge_dump, render_ridges
from .core.skeleton import thin
from .data_types import (FIT_REPORT_COLUMNS, CompressionResult, EvaluationResult,
                         PipelineStages)

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

PathLike = Union[str, Path]


def invert(img: GrayImage) -> GrayImage:
    """255 - p for every pixel."""
    return GrayImage(width=img.width, height=img.height, pixels=255 - img.pixels)


def build_fit_report(paths: Sequence[RidgePath], fits, errors) -> pd.DataFrame:
    """One row per ridge: id, pixel count, rms / max fit error, fallback flag."""
    rows = [
        {'ridge': i, 'points': len(path), 'rms': err.rms, 'max': err.max,
         'fallback': fit.fallback}
        for i, (path, fit, err) in enumerate(zip(paths, fits, errors))
    ]
    return pd.DataFrame(rows, columns=FIT_REPORT_COLUMNS)


class FingerprintCompressor:
    """
    Compresses fingerprint images into FPBZ streams and evaluates the result.

    One instance holds a PipelineConfig and is safe to share between threads:
    every call works on its own arrays.
    """

    def __init__(self, config: Optional[PipelineConfig] = None,
                 skip_preprocess: bool = False):
        """
        Initialize the compressor.

        Args:
            config: Pipeline settings. Defaults to PipelineConfig().
            skip_preprocess: Treat inputs as binary skeletons (pixel < 128 is ridge)
        """
        self.config = config or PipelineConfig()
        self.skip_preprocess = skip_preprocess

    def _preprocess(self, img: GrayImage):
        cfg = self.config
        equalized = histogram_equalize(img)
        enhanced = fft_enhance(equalized, cfg.fft_block, cfg.fft_k)
        # binarize keeps pixels above the threshold, so ridges must be bright
        ridges_bright = invert(enhanced) if cfg.dark_ridges else enhanced
        binary = binarize(ridges_bright, cfg.threshold)
        orientation = estimate_orientation(ridges_bright, cfg.orientation_block)
        cleaned = morph_cleanup(binary, cfg.spur_iters)
        return equalized, enhanced, binary, orientation, cleaned

    def extract(self, img: GrayImage) -> PipelineStages:
        """Run everything up to and including ridge ordering."""
        if self.skip_preprocess:
            equalized = enhanced = binary = orientation = None
            cleaned = gray_to_binary(img)
        else:
            equalized, enhanced, binary, orientation, cleaned = self._preprocess(img)

        skeleton = thin(cleaned)
        extraction = extract_ridges(skeleton, self.config.min_ridge_px)
        return PipelineStages(source=img, equalized=equalized, enhanced=enhanced,
                              binary=binary, orientation=orientation, cleaned=cleaned,
                              skeleton=skeleton, extraction=extraction)

    def compress_image(self, img: GrayImage, input_size: int,
                       source_path: Optional[Path] = None) -> CompressionResult:
        """
        Compress a decoded image.

        Args:
            img: Grayscale fingerprint
            input_size: Size of the original file in bytes, for the ratio
            source_path: Where the image came from, if anywhere

        Returns:
            CompressionResult with the encoded stream and all stages
        """
        stages = self.extract(img)
        paths = stages.extraction.paths

        fits = [fit_ridge_detail(path, self.config.fit_refine_iters) for path in paths]
        errors = [fit_error(fit.curve, path) for fit, path in zip(fits, paths)]
        for i, err in enumerate(errors):
            logger.debug(f"Ridge {i}: {len(paths[i])} px, rms {err.rms:.3f}, max {err.max:.3f}")

        fingerprint = CompressedFingerprint(width=img.width, height=img.height,
                                            ridges=tuple(fit.curve for fit in fits))
        data = encode(fingerprint)
        result = CompressionResult(stages=stages, fingerprint=fingerprint, data=data,
                                   input_size=input_size,
                                   fit_report=build_fit_report(paths, fits, errors),
                                   source_path=source_path)
        logger.info(f"Compressed {img.width}x{img.height}: {result.stats_line()}")
        return result

    def compress_bytes(self, data: bytes,
                       source_path: Optional[Path] = None) -> CompressionResult:
        """Parse PGM bytes and compress them; the byte count is the ratio's numerator."""
        return self.compress_image(read_pgm(data), len(data), source_path)

    def evaluate_result(self, result: CompressionResult) -> EvaluationResult:
        """
        Reconstruct from the encoded stream and compare with the extracted ridges.

        The extracted image holds every ridge pixel kept after separation and
        the size filter; the reconstruction comes from the decoded control points.
        """
        reconstructed = rasterize(decode(result.data))
        extracted = result.stages.extraction.ridge_pixels
        overlay = superimpose(extracted, reconstructed)
        report = overlap_metrics(extracted, reconstructed, self.config.tol)
        return EvaluationResult(compression=result, extracted=extracted,
                                reconstructed=reconstructed, overlay=overlay,
                                report=report)

    def evaluate_bytes(self, data: bytes,
                       source_path: Optional[Path] = None) -> EvaluationResult:
        return self.evaluate_result(self.compress_bytes(data, source_path))

    # --- Files ---

    def compress_file(self, input_path: PathLike, output_path: PathLike,
                      dump_dir: Optional[PathLike] = None) -> CompressionResult:
        """Read a PGM, write its .fbz and optionally every intermediate stage."""
        input_path = Path(input_path)
        result = self.compress_bytes(input_path.read_bytes(), input_path)
        Path(output_path).write_bytes(result.data)
        if dump_dir is not None:
            dump_stages(result, dump_dir)
        return result

    def evaluate_file(self, input_path: PathLike, overlay_path: PathLike,
                      report_path: PathLike,
                      dump_dir: Optional[PathLike] = None) -> EvaluationResult:
        """Compress in memory, then write the overlay PGM and the text report."""
        input_path = Path(input_path)
        evaluation = self.evaluate_bytes(input_path.read_bytes(), input_path)
        Path(overlay_path).write_bytes(write_pgm(evaluation.overlay))
        Path(report_path).write_text(evaluation.report_text(), encoding='utf-8')
        if dump_dir is not None:
            dump_stages(evaluation.compression, dump_dir)
        return evaluation


def decompress_bytes(data: bytes) -> GrayImage:
    """Decode an FPBZ stream and render its ridges black on white."""
    return binary_to_gray(rasterize(decode(data)), fg=0, bg=255)


def decompress_file(input_path: PathLike, output_path: PathLike) -> GrayImage:
    image = decompress_bytes(Path(input_path).read_bytes())
    Path(output_path).write_bytes(write_pgm(image))
    logger.info(f"Wrote {image.width}x{image.height} reconstruction to {output_path}")
    return image


def _ridge_image(img: BinaryImage) -> GrayImage:
    return binary_to_gray(img, fg=0, bg=255)


def dump_stages(result: CompressionResult, directory: PathLike) -> List[Path]:
    """
    Write every intermediate of a compress run into `directory`.

    Binary stages are drawn black on white. Alongside the images go the ridge
    coordinate dump (ridges.txt) and the per-ridge fit report (fit_report.csv).

    Returns:
        Paths written, in pipeline order
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stages = result.stages
    extraction = stages.extraction
    width, height = stages.source.width, stages.source.height

    images = [
        ('01_source.pgm', stages.source),
        ('02_equalized.pgm', stages.equalized),
        ('03_enhanced.pgm', stages.enhanced),
        ('04_binary.pgm', _ridge_image(stages.binary) if stages.binary is not None else None),
        ('05_orientation.pgm',
         render_orientation(stages.orientation) if stages.orientation is not None else None),
        ('06_cleaned.pgm', _ridge_image(stages.cleaned)),
        ('07_skeleton.pgm', _ridge_image(stages.skeleton)),
        ('08_separated.pgm', _ridge_image(extraction.separated)),
        ('09_ridges.pgm', _ridge_image(render_ridges(extraction.paths, width, height))),
    ]

    written = []
    for name, image in images:
        if image is None:
            continue
        path = directory / name
        path.write_bytes(write_pgm(image))
        written.append(path)

    ridges_path = directory / 'ridges.txt'
    ridges_path.write_text(format_ridge_dump(extraction.paths), encoding='utf-8')
    report_path = directory / 'fit_report.csv'
    result.fit_report.to_csv(report_path, index=False)
    written += [ridges_path, report_path]

    logger.info(f"Dumped {len(written)} stage files to {directory}")
    return written


def run_batch(worker: Callable[[T], R], items: Sequence[T],
              jobs: int = 1) -> List[Tuple[T, Union[R, Exception]]]:
    """
    Apply `worker` to every item, `jobs` at a time.

    Failures do not stop the batch: each item is paired with either its
    result or the exception it raised, in input order.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")

    def guarded(item):
        try:
            return worker(item)
        except (OSError, ValueError) as e:
            logger.error(f"{item}: {e}")
            return e

    if jobs == 1 or len(items) <= 1:
        outcomes = [guarded(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(guarded, items))
    return list(zip(items, outcomes))


def batch_summary(results: Sequence[CompressionResult]) -> pd.DataFrame:
    """Per-file sizes and ratios of a batch, in the given order."""
    rows = [{
        'file': r.source_path.name if r.source_path else '',
        'ridges': r.ridge_count,
        'in': r.input_size,
        'out': r.output_size,
        'ratio': r.ratio,
    } for r in results]
    frame = pd.DataFrame(rows, columns=['file', 'ridges', 'in', 'out', 'ratio'])
    if len(frame):
        logger.info(f"Batch of {len(frame)}: median ratio {frame['ratio'].median():.2f}")
    return frame
