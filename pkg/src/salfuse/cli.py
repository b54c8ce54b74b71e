"""Command-line interface: summarize, batch, inspect, bench.

Exit codes: 0 success, 2 unusable input or arguments, 3 output could
not be written, 4 batch finished but some entries failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import bench as bench_mod
from .errors import FormatError, SalfuseError
from .filters import ADAPTIVE, FREQUENCY, FilterConfig
from .image import Image
from .ingest import build_sources, open_stream, save_image
from .pipeline import PipelineConfig, summarize, summarize_full

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_OUTPUT = 3
EXIT_PARTIAL = 4

_WIENER_MODES = {"adaptive": ADAPTIVE, "frequency": FREQUENCY}

_CONFIG_KEYS = {
    "sigma",
    "wiener_window",
    "wiener_noise_variance",
    "add_noise_sigma",
    "wiener_mode",
    "noise_seed",
    "base_filter",
    "epsilon_tie",
}

INSPECT_NAMES = (
    "source1.png",
    "source2.png",
    "base1.png",
    "base2.png",
    "detail1.png",
    "detail2.png",
    "saliency1.png",
    "saliency2.png",
    "weight1.png",
    "weight2.png",
    "fused.png",
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    """Pipeline flags shared by the image-producing commands.

    Defaults are None sentinels so a config file (batch) can fill in
    anything not given on the command line.
    """
    parser.add_argument(
        "--sigma", type=float, default=None, help="Gaussian scale for LoG and gaussian base (2.0)"
    )
    parser.add_argument(
        "--wiener-window", type=int, default=None, help="odd local-stats window side (5)"
    )
    parser.add_argument(
        "--base-filter",
        choices=("wiener", "gaussian"),
        default=None,
        help="smoother defining the base layer (wiener)",
    )
    parser.add_argument(
        "--wiener-mode",
        choices=sorted(_WIENER_MODES),
        default=None,
        help="Wiener realization (adaptive)",
    )
    parser.add_argument(
        "--add-noise-sigma",
        type=float,
        default=None,
        help="seeded Gaussian noise injected before Wiener filtering (0.0)",
    )
    parser.add_argument(
        "--noise-seed", type=int, default=None, help="seed for injected noise (0)"
    )


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fp:
            values = tomllib.load(fp)
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(f"config file {path}: {exc}") from exc
    unknown = set(values) - _CONFIG_KEYS
    if unknown:
        raise FormatError(
            f"config file {path}: unknown keys {sorted(unknown)};"
            f" expected a subset of {sorted(_CONFIG_KEYS)}"
        )
    return values


def _resolve_config(args: argparse.Namespace, file_cfg: dict) -> PipelineConfig:
    """Flags beat config-file values beat documented defaults."""

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return file_cfg.get(key, default)

    mode = pick(args.wiener_mode, "wiener_mode", "adaptive")
    if mode not in _WIENER_MODES:
        raise FormatError(f"wiener_mode must be one of {sorted(_WIENER_MODES)}, got {mode!r}")
    filter_cfg = FilterConfig(
        log_sigma=float(pick(args.sigma, "sigma", 2.0)),
        wiener_window=int(pick(args.wiener_window, "wiener_window", 5)),
        wiener_noise_variance=file_cfg.get("wiener_noise_variance"),
        added_noise_sigma=float(pick(args.add_noise_sigma, "add_noise_sigma", 0.0)),
        wiener_mode=_WIENER_MODES[mode],
        noise_seed=int(pick(args.noise_seed, "noise_seed", 0)),
    )
    return PipelineConfig(
        filter=filter_cfg,
        base_filter=pick(args.base_filter, "base_filter", "wiener"),
        epsilon_tie=float(file_cfg.get("epsilon_tie", 1e-12)),
    )


def cmd_summarize(args: argparse.Namespace) -> int:
    try:
        cfg = _resolve_config(args, {})
        stream = open_stream(args.input)
        a1, a2 = build_sources(stream)
        fused = summarize(a1, a2, cfg)
    except (SalfuseError, OSError) as exc:
        print(f"error: cannot summarize {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        save_image(args.output, fused, depth=args.bit_depth)
    except (SalfuseError, OSError) as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


def _load_manifest(path: str) -> list[dict]:
    entries = []
    try:
        with open(path, "r", encoding="utf-8") as fp:
            lines = fp.readlines()
    except OSError as exc:
        raise FormatError(f"cannot read manifest {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"manifest {path} line {lineno}: {exc}") from exc
        if not isinstance(entry, dict):
            raise FormatError(f"manifest {path} line {lineno}: expected a JSON object")
        for key in ("input", "label", "output"):
            if not isinstance(entry.get(key), str) or not entry[key]:
                raise FormatError(
                    f"manifest {path} line {lineno}: missing or empty {key!r}"
                )
        entry.setdefault("id", None)
        entries.append(entry)
    if not entries:
        raise FormatError(f"manifest {path} has no entries")
    seen: dict[str, int] = {}
    for lineno, entry in enumerate(entries, start=1):
        if entry["output"] in seen:
            raise FormatError(
                f"manifest {path}: output {entry['output']!r} appears more than once"
            )
        seen[entry["output"]] = lineno
    return entries


def _process_entry(entry: dict, cfg: PipelineConfig) -> dict:
    report = {
        "id": entry["id"],
        "label": entry["label"],
        "input": entry["input"],
        "output": entry["output"],
        "status": "ok",
        "error": None,
        "width": None,
        "height": None,
        "elapsed_ms": None,
    }
    start = time.perf_counter()
    try:
        stream = open_stream(entry["input"])
        a1, a2 = build_sources(stream)
        fused = summarize(a1, a2, cfg)
        out = Path(entry["output"])
        out.parent.mkdir(parents=True, exist_ok=True)
        save_image(out, fused)
        report["width"] = fused.width
        report["height"] = fused.height
    except Exception as exc:  # one bad entry must not sink the batch
        report["status"] = "error"
        report["error"] = f"{type(exc).__name__}: {exc}"
    report["elapsed_ms"] = 1000.0 * (time.perf_counter() - start)
    return report


def cmd_batch(args: argparse.Namespace) -> int:
    try:
        entries = _load_manifest(args.manifest)
        file_cfg = _load_config_file(args.config) if args.config else {}
        cfg = _resolve_config(args, file_cfg)
    except (SalfuseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.jobs < 1:
        print(f"error: --jobs must be >= 1, got {args.jobs}", file=sys.stderr)
        return EXIT_INPUT
    report_path = args.report or args.manifest + ".report.jsonl"
    failed = 0
    try:
        with open(report_path, "w", encoding="utf-8") as report_fp:
            # pool.map preserves manifest order; the single writer below
            # keeps report lines serialized regardless of --jobs.
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                for report in pool.map(lambda e: _process_entry(e, cfg), entries):
                    if report["status"] != "ok":
                        failed += 1
                        print(
                            f"error: {report['input']}: {report['error']}",
                            file=sys.stderr,
                        )
                    report_fp.write(json.dumps(report) + "\n")
    except OSError as exc:
        print(f"error: cannot write report {report_path}: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_PARTIAL if failed else EXIT_OK


def _minmax(plane) -> Image:
    lo, hi = float(plane.min()), float(plane.max())
    if hi - lo < 1e-12:
        normalized = plane * 0.0
    else:
        normalized = (plane - lo) / (hi - lo)
    return Image(normalized[None])


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        cfg = _resolve_config(args, {})
        stream = open_stream(args.input)
        a1, a2 = build_sources(stream)
        result = summarize_full(a1, a2, cfg)
    except (SalfuseError, OSError) as exc:
        print(f"error: cannot inspect {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    outputs = {
        "source1.png": result.source1,
        "source2.png": result.source2,
        "base1.png": result.base1,
        "base2.png": result.base2,
        # Signed detail recentered on mid-gray for viewing.
        "detail1.png": Image(result.detail1.data + 0.5),
        "detail2.png": Image(result.detail2.data + 0.5),
        "saliency1.png": _minmax(result.saliency1),
        "saliency2.png": _minmax(result.saliency2),
        "weight1.png": Image(result.weights.w1[None]),
        "weight2.png": Image(result.weights.w2[None]),
        "fused.png": result.fused,
    }
    try:
        outdir = Path(args.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, image in outputs.items():
            save_image(outdir / name, image)
    except (SalfuseError, OSError) as exc:
        print(f"error: cannot write inspection files to {args.outdir}: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    methods = (
        list(bench_mod.METHODS)
        if args.methods == "all"
        else [m.strip() for m in args.methods.split(",") if m.strip()]
    )
    try:
        stream = open_stream(args.input)
        reports = bench_mod.run_benchmark(
            stream, methods, repeats=args.repeats, threads=args.threads
        )
    except (SalfuseError, OSError) as exc:
        print(f"error: cannot benchmark {args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    lines = [report.to_json_line() for report in reports]
    fig_path = args.fig
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fp:
                fp.write("\n".join(lines) + "\n")
            if fig_path is None and not args.no_fig:
                derived = Path(args.out).with_suffix(".png")
                if derived == Path(args.out):
                    derived = Path(args.out + ".png")
                fig_path = str(derived)
        else:
            for line in lines:
                print(line)
        if fig_path is not None and not args.no_fig:
            from .plots import render_bench_figure

            render_bench_figure(reports, fig_path)
    except OSError as exc:
        print(f"error: cannot write benchmark output: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="salfuse",
        description="Fuse a video's first frame with its temporal average"
        " using saliency-weighted two-scale fusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sum = sub.add_parser("summarize", help="fuse one video into one image")
    p_sum.add_argument("input", help="video file or frame directory")
    p_sum.add_argument("output", help="image file to write")
    _add_config_flags(p_sum)
    p_sum.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    p_sum.set_defaults(func=cmd_summarize)

    p_batch = sub.add_parser("batch", help="summarize every entry of a JSONL manifest")
    p_batch.add_argument("manifest", help="JSON-lines manifest: input/label/output per line")
    p_batch.add_argument("--jobs", type=int, default=1, help="worker threads (1)")
    p_batch.add_argument(
        "--report", default=None, help="report path (<manifest>.report.jsonl)"
    )
    p_batch.add_argument("--config", default=None, help="TOML file with pipeline defaults")
    _add_config_flags(p_batch)
    p_batch.set_defaults(func=cmd_batch)

    p_inspect = sub.add_parser(
        "inspect", help="dump every pipeline intermediate as PNG files"
    )
    p_inspect.add_argument("input", help="video file or frame directory")
    p_inspect.add_argument("outdir", help="directory for the intermediate images")
    _add_config_flags(p_inspect)
    p_inspect.set_defaults(func=cmd_inspect)

    p_bench = sub.add_parser("bench", help="time summary methods on one video")
    p_bench.add_argument("input", help="video file or frame directory")
    p_bench.add_argument(
        "--methods",
        default="all",
        help="comma-separated subset of " + ",".join(bench_mod.METHODS) + " (all)",
    )
    p_bench.add_argument("--repeats", type=int, default=3, help="timed runs per method (3)")
    p_bench.add_argument(
        "--threads", type=int, default=1, help="threads for the optical_flow method (1)"
    )
    p_bench.add_argument(
        "--out", default=None, help="write the JSONL report here instead of stdout"
    )
    p_bench.add_argument(
        "--fig", default=None, help="timing figure path (derived from --out by default)"
    )
    p_bench.add_argument(
        "--no-fig", action="store_true", help="skip rendering the timing figure"
    )
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
