#!/usr/bin/env python3
"""
Command-line front end.

Subcommands:
    compress    PGM -> .fbz, prints ridges/in/out/ratio per file
    decompress  .fbz -> PGM, ridges black on white
    evaluate    compress in memory, write overlay PGM and overlap report
    info        print the header of a .fbz file
    synth       write a synthetic fingerprint corpus
"""

import argparse
import logging
import sys
from functools import partial
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from .app_data import PipelineConfig, parse_threshold, resolve_config
from .core.codec import check_length, read_header
from .pipeline import (FingerprintCompressor, batch_summary, decompress_file,
                       run_batch)
from .synthetic import write_corpus

logger = logging.getLogger(__name__)

FBZ_SUFFIX = '.fbz'


def _threshold_arg(text: str):
    try:
        return parse_threshold(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _add_pipeline_options(parser: argparse.ArgumentParser):
    defaults = PipelineConfig()
    group = parser.add_argument_group('pipeline settings (override the config file)')
    group.add_argument('--config', type=Path, default=None,
                       help='key = value config file (default: $FPBZ_CONFIG)')
    group.add_argument('--fft-block', type=int, default=None,
                       help=f'FFT enhancement block size (default: {defaults.fft_block})')
    group.add_argument('--fft-k', type=float, default=None,
                       help=f'FFT enhancement exponent (default: {defaults.fft_k})')
    group.add_argument('--threshold', type=_threshold_arg, default=None,
                       help='binarization threshold, auto or 0..255 (default: auto)')
    group.add_argument('--orientation-block', type=int, default=None,
                       help=f'orientation block size (default: {defaults.orientation_block})')
    group.add_argument('--spur-iters', type=int, default=None,
                       help=f'spur removal passes (default: {defaults.spur_iters})')
    group.add_argument('--min-ridge-px', type=int, default=None,
                       help=f'shortest ridge kept, in pixels (default: {defaults.min_ridge_px})')
    group.add_argument('--tol', type=float, default=None,
                       help=f'overlap tolerance in pixels (default: {defaults.tol:g})')
    group.add_argument('--light-ridges', dest='dark_ridges', action='store_const',
                       const=False, default=None,
                       help='input ridges are light on a dark background')
    group.add_argument('--refine-iters', dest='fit_refine_iters', type=int, default=None,
                       help=f'curve refinement iterations (default: {defaults.fit_refine_iters})')
    parser.add_argument('--skip-preprocess', action='store_true',
                        help='input is already a binary skeleton (pixel < 128 is ridge)')
    parser.add_argument('--dump-stages', type=Path, default=None, metavar='DIR',
                        help='write every intermediate image into DIR')
    parser.add_argument('--out-dir', type=Path, default=None,
                        help='directory for outputs (default: next to each input)')
    parser.add_argument('-j', '--jobs', type=int, default=1,
                        help='files processed concurrently (default: 1)')


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser for all subcommands."""
    parser = argparse.ArgumentParser(
        prog='fpbz_codec',
        description='Fingerprint compression by cubic Bezier ridge curves',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  fpbz_codec.py compress print.pgm -o print.fbz
  fpbz_codec.py decompress print.fbz -o restored.pgm
  fpbz_codec.py evaluate print.pgm --out-dir results/ --dump-stages stages/
  fpbz_codec.py info print.fbz
  fpbz_codec.py synth corpus/ --count 50
        """
    )
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress, -vv for debug detail')
    parser.add_argument('--log-file', type=Path, default=None,
                        help='also write the log to this file')
    sub = parser.add_subparsers(dest='command', required=True)

    compress = sub.add_parser('compress', help='compress PGM fingerprints')
    compress.add_argument('inputs', nargs='+', type=Path, help='input PGM file(s)')
    compress.add_argument('-o', '--output', type=Path, default=None,
                          help='output .fbz (single input only)')
    _add_pipeline_options(compress)

    decompress = sub.add_parser('decompress', help='reconstruct a ridge image')
    decompress.add_argument('input', type=Path, help='input .fbz file')
    decompress.add_argument('-o', '--output', type=Path, default=None,
                            help='output PGM (default: input with .pgm suffix)')

    evaluate = sub.add_parser('evaluate', help='compress, reconstruct and compare')
    evaluate.add_argument('inputs', nargs='+', type=Path, help='input PGM file(s)')
    _add_pipeline_options(evaluate)

    info = sub.add_parser('info', help='show the header of a .fbz file')
    info.add_argument('input', type=Path, help='input .fbz file')

    synth = sub.add_parser('synth', help='write synthetic fingerprints')
    synth.add_argument('out_dir', type=Path, help='output directory')
    synth.add_argument('--count', type=int, default=50, help='number of images (default: 50)')
    synth.add_argument('--seed', type=int, default=0, help='first seed (default: 0)')
    synth.add_argument('--high-curvature', action='store_true',
                       help='strongly bent ridges')
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides: Dict[str, Any] = {
        'fft_block': args.fft_block,
        'fft_k': args.fft_k,
        'threshold': args.threshold,
        'orientation_block': args.orientation_block,
        'spur_iters': args.spur_iters,
        'min_ridge_px': args.min_ridge_px,
        'tol': args.tol,
        'dark_ridges': args.dark_ridges,
        'fit_refine_iters': args.fit_refine_iters,
    }
    return resolve_config(args.config, overrides)


def _output_path(input_path: Path, out_dir: Optional[Path], suffix: str) -> Path:
    directory = out_dir if out_dir is not None else input_path.parent
    return directory / (input_path.stem + suffix)


def _stage_dir(args: argparse.Namespace, input_path: Path) -> Optional[Path]:
    if args.dump_stages is None:
        return None
    if len(args.inputs) == 1:
        return args.dump_stages
    return args.dump_stages / input_path.stem


def _prepare_batch(args: argparse.Namespace) -> FingerprintCompressor:
    if args.jobs < 1:
        raise ValueError(f"--jobs must be >= 1, got {args.jobs}")
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
    return FingerprintCompressor(_config_from_args(args), skip_preprocess=args.skip_preprocess)


def _compress_one(compressor: FingerprintCompressor, args: argparse.Namespace, input_path: Path):
    output = args.output or _output_path(input_path, args.out_dir, FBZ_SUFFIX)
    return compressor.compress_file(input_path, output, _stage_dir(args, input_path))


def cmd_compress(args: argparse.Namespace) -> int:
    if args.output is not None and len(args.inputs) > 1:
        raise ValueError("--output needs exactly one input; use --out-dir for batches")
    compressor = _prepare_batch(args)

    outcomes = run_batch(partial(_compress_one, compressor, args), args.inputs, args.jobs)
    failures = 0
    results = []
    for input_path, outcome in outcomes:
        if isinstance(outcome, Exception):
            failures += 1
            print(f"❌ {input_path}: {outcome}", file=sys.stderr)
            continue
        results.append(outcome)
        prefix = f"{input_path.name}: " if len(args.inputs) > 1 else ""
        print(f"{prefix}{outcome.stats_line()}")

    if len(results) > 1:
        summary = batch_summary(results)
        print(f"files={len(results)} median_ratio={summary['ratio'].median():.2f}")
    return 1 if failures else 0


def _evaluate_one(compressor: FingerprintCompressor, args: argparse.Namespace, input_path: Path):
    overlay = _output_path(input_path, args.out_dir, '_overlay.pgm')
    report = _output_path(input_path, args.out_dir, '_report.txt')
    return compressor.evaluate_file(input_path, overlay, report, _stage_dir(args, input_path))


def cmd_evaluate(args: argparse.Namespace) -> int:
    compressor = _prepare_batch(args)
    outcomes = run_batch(partial(_evaluate_one, compressor, args), args.inputs, args.jobs)

    failures = 0
    for input_path, outcome in outcomes:
        if isinstance(outcome, Exception):
            failures += 1
            print(f"❌ {input_path}: {outcome}", file=sys.stderr)
            continue
        report = outcome.report
        print(f"{input_path.name}: forward_cover={report.forward_cover:.4f} "
              f"reverse_cover={report.reverse_cover:.4f} "
              f"mean_dist={report.mean_dist:.4f} max_dist={report.max_dist:.4f} "
              f"ratio={outcome.compression.ratio:.2f}")
    return 1 if failures else 0


def cmd_decompress(args: argparse.Namespace) -> int:
    output = args.output or args.input.with_suffix('.pgm')
    image = decompress_file(args.input, output)
    print(f"width={image.width} height={image.height} out={output}")
    return 0


def cmd_info(args: argparse.Namespace) -> int:
    data = args.input.read_bytes()
    header = read_header(data)
    check_length(data, header)
    print(f"magic=ok version={header.version} width={header.width} height={header.height} "
          f"ridges={header.ridge_count} size={len(data)} expected={header.expected_size}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    paths = write_corpus(args.out_dir, args.count, args.seed, args.high_curvature)
    print(f"wrote {len(paths)} images to {args.out_dir}")
    return 0


COMMANDS = {
    'compress': cmd_compress,
    'decompress': cmd_decompress,
    'evaluate': cmd_evaluate,
    'info': cmd_info,
    'synth': cmd_synth,
}


def run(args: argparse.Namespace) -> int:
    """
    Dispatch a parsed command line.

    Returns:
        Exit status: 0 when every output was written, 1 otherwise
    """
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"❌ Error: {e}", file=sys.stderr)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse `argv` and run it without touching the logging setup."""
    args = build_parser().parse_args(argv)
    return run(args)
