"""Command-line entry point: track sequences, score results, emit plot data.

Exit codes are stable API: 0 success, 1 usage, 2 data problems (sequences,
configs, CSVs, JSON), 3 feature-service failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    CorruptFileError,
    FeatureSourceError,
    FrameLoadError,
    InvalidArgumentError,
    SequenceFormatError,
    TrackingDegenerateError,
    UnsupportedFormatError,
)
from .evaluation import (
    PRECISION_THRESHOLDS,
    SUCCESS_THRESHOLDS,
    load_sequence,
    metrics_report,
)
from .features import ExtractorSpec
from .imaging import load_frame
from .pipeline import (
    BoundingBox,
    TrackerConfig,
    fused_response_at,
    init,
    load_config,
    track,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SERVICE = 3

CSV_HEADER = "frame_index,x,y,w,h,score,eta_t,n_candidates"
SERVICE_ENV = "MLCF_FEATURE_SERVICE"

_DATA_ERRORS = (
    SequenceFormatError,
    ConfigError,
    FrameLoadError,
    UnsupportedFormatError,
    CorruptFileError,
    InvalidArgumentError,
    TrackingDegenerateError,
    OSError,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the published contract says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunManifest:
    config_path: str
    sequence_dirs: list
    output_dir: str
    csv_paths: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def atomic_write_text(path, text: str):
    """Write via a sibling temp file and rename, so readers never observe a
    half-written artifact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _resolve_config(path) -> TrackerConfig:
    config = load_config(path) if path else TrackerConfig()
    address = os.environ.get(SERVICE_ENV)
    if address:
        config = _with_service_override(config, address)
    return config


def _with_service_override(config: TrackerConfig, address: str) -> TrackerConfig:
    host, _, port = address.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(
            f"{SERVICE_ENV} must look like host:port, got {address!r}"
        )
    specs = []
    for spec in config.extractor_specs:
        if spec.kind == "deep-client":
            merged = dict(spec.parameters, host=host, port=int(port))
            spec = ExtractorSpec(spec.kind, merged)
        specs.append(spec)
    return dataclasses.replace(config, extractor_specs=tuple(specs))


def track_sequence(seq, config: TrackerConfig):
    """Run the tracker over one loaded sequence. Returns (rows, timings);
    rows follow the output CSV column order."""
    frame0 = load_frame(seq.frame_paths[0])
    box0 = seq.groundtruth[0]
    state = init(frame0, box0, config)
    # frame 0 carries the given box; its score is the self-detection peak
    score0 = float(fused_response_at(state, frame0, state.center).max())
    rows = [(0, *box0.as_tuple(), score0, 0.0, 1)]
    timings = []
    for index, path in enumerate(seq.frame_paths[1:], start=1):
        frame = load_frame(path)
        started = time.perf_counter()
        state, box, diag = track(state, frame)
        timings.append(time.perf_counter() - started)
        rows.append(
            (index, *box.as_tuple(), diag.score, diag.eta_t, diag.n_candidates)
        )
    return rows, timings


def _rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for index, x, y, w, h, score, eta_t, n_candidates in rows:
        lines.append(
            f"{index},{x!r},{y!r},{w!r},{h!r},{score!r},{eta_t!r},{n_candidates}"
        )
    return "\n".join(lines) + "\n"


def cmd_track(args) -> int:
    config = _resolve_config(args.config)
    sequences = [load_sequence(d) for d in args.sequence]
    if len(sequences) == 1 and args.output:
        paths = {sequences[0].name: Path(args.output)}
    elif args.output_dir:
        out = Path(args.output_dir)
        paths = {seq.name: out / f"{seq.name}.csv" for seq in sequences}
    elif len(sequences) == 1:
        args.parser.error("single sequence needs --output (or --output-dir)")
    else:
        args.parser.error("multiple sequences need --output-dir")

    manifest = RunManifest(
        config_path=args.config or "<defaults>",
        sequence_dirs=[str(d) for d in args.sequence],
        output_dir=str(args.output_dir or Path(args.output).parent),
    )

    def run(seq):
        rows, timings = track_sequence(seq, config)
        atomic_write_text(paths[seq.name], _rows_to_csv(rows))
        return seq.name, timings

    if args.jobs > 1 and len(sequences) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, sequences))
    else:
        results = [run(seq) for seq in sequences]

    for name, timings in results:
        manifest.csv_paths[name] = str(paths[name])
        manifest.timings[name] = timings
        fps = len(timings) / max(sum(timings), 1e-9)
        print(f"{name}: {len(timings) + 1} frames, mean {fps:.1f} FPS", file=sys.stderr)
    return EXIT_OK


def _read_boxes_csv(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [ln for ln in lines[1:] if ln.strip()]
    if not lines or not rows:
        raise SequenceFormatError(f"{path}: no box rows")
    boxes = []
    for lineno, line in enumerate(rows, start=2):
        parts = line.split(",")
        if len(parts) < 5:
            raise SequenceFormatError(f"{path}: line {lineno}: expected at least 5 columns")
        try:
            x, y, w, h = (float(p) for p in parts[1:5])
        except ValueError as exc:
            raise SequenceFormatError(f"{path}: line {lineno}: {exc}") from exc
        boxes.append(BoundingBox(x, y, w, h))
    return boxes


def cmd_eval(args) -> int:
    seq = load_sequence(args.sequence)
    boxes = _read_boxes_csv(args.boxes)
    if len(boxes) != len(seq):
        raise SequenceFormatError(
            f"box count mismatch: frames={len(seq)} boxes={len(boxes)}"
        )
    report = metrics_report(seq.name, boxes, seq.groundtruth)
    atomic_write_text(args.output, json.dumps(report, indent=2) + "\n")
    print(f"{seq.name}: DP@20 {report['dp20']:.3f}  AUC {report['auc']:.3f}")
    return EXIT_OK


def _load_metrics(path):
    try:
        report = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SequenceFormatError(f"{path}: malformed JSON: {exc}") from exc
    try:
        precision = [float(v) for v in report["precision"]]
        success = [float(v) for v in report["success"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SequenceFormatError(f"{path}: not a metrics report: {exc}") from exc
    if len(precision) != len(PRECISION_THRESHOLDS) or len(success) != len(SUCCESS_THRESHOLDS):
        raise SequenceFormatError(f"{path}: curve lengths do not match the fixed grids")
    return precision, success


def _curve_csv(thresholds, labels, columns, fmt) -> str:
    lines = ["threshold," + ",".join(labels)]
    for i, t in enumerate(thresholds):
        values = ",".join(f"{columns[label][i]:.6f}" for label in labels)
        lines.append(f"{fmt(t)},{values}")
    return "\n".join(lines) + "\n"


def cmd_plotdata(args) -> int:
    # inputs are metrics JSONs, optionally "label=path"; files sharing a
    # label average into one column, so per-sequence reports roll up per
    # tracker
    grouped = {}
    for item in args.inputs:
        label, sep, path = item.partition("=")
        if not sep:
            label, path = Path(item).stem, item
        grouped.setdefault(label, []).append(_load_metrics(path))

    labels = list(grouped)
    precision = {
        label: np.mean([p for p, _ in entries], axis=0)
        for label, entries in grouped.items()
    }
    success = {
        label: np.mean([s for _, s in entries], axis=0)
        for label, entries in grouped.items()
    }

    out = Path(args.output_dir)
    atomic_write_text(
        out / "precision.csv",
        _curve_csv(PRECISION_THRESHOLDS, labels, precision, lambda t: f"{t:.0f}"),
    )
    atomic_write_text(
        out / "success.csv",
        _curve_csv(SUCCESS_THRESHOLDS, labels, success, lambda t: f"{t:.2f}"),
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mlcf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="run the tracker over sequences")
    p_track.add_argument("--sequence", action="append", required=True,
                         help="sequence directory (repeatable)")
    p_track.add_argument("--config", help="key = value tracker settings file")
    p_track.add_argument("--output", help="box CSV path (single sequence)")
    p_track.add_argument("--output-dir", help="directory for per-sequence CSVs")
    p_track.add_argument("--jobs", type=int, default=1,
                         help="sequences tracked concurrently")
    p_track.set_defaults(func=cmd_track, parser=p_track)

    p_eval = sub.add_parser("eval", help="score a box CSV against ground truth")
    p_eval.add_argument("--boxes", required=True, help="CSV from the track command")
    p_eval.add_argument("--sequence", required=True, help="sequence directory")
    p_eval.add_argument("--output", required=True, help="metrics JSON path")
    p_eval.set_defaults(func=cmd_eval, parser=p_eval)

    p_plot = sub.add_parser("plotdata", help="merge metrics JSONs into plot CSVs")
    p_plot.add_argument("inputs", nargs="+", metavar="[label=]metrics.json")
    p_plot.add_argument("--output-dir", default=".",
                        help="where precision.csv and success.csv go")
    p_plot.set_defaults(func=cmd_plotdata, parser=p_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FeatureSourceError as exc:
        print(f"mlcf {args.command}: feature service: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    except _DATA_ERRORS as exc:
        print(f"mlcf {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
