"""Command-line front end.

Each subcommand is a pure function of its input files, flags and seed, so
re-running a command reproduces its output byte for byte.  Exit codes:
0 success, 1 domain error (one-line diagnostic on stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

from . import clustering, counting, ingest, roi, synth, tracker
from .core import ConfigError, HyperParams, TrajcountError, load_params, set_param
from .evaluate import evaluate as evaluate_result
from .evaluate import format_report_lines, write_report_file
from .render import LAYER_NAMES, RenderSpec
from .render import render as render_to_file

DEFAULT_SEED = 42


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("TRAJCOUNT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"TRAJCOUNT_SEED is not an integer: {env!r}") from None
    return DEFAULT_SEED


def _resolve_params(args) -> HyperParams:
    p = HyperParams()
    if getattr(args, "config", None):
        p = load_params(args.config, base=p)
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects name=value, got {item!r}")
        name, _, text = item.partition("=")
        p = set_param(p, name.strip(), text.strip())
    return p


def _cmd_roi(args) -> int:
    p = _resolve_params(args)
    d = ingest.parse_detection_file(args.detections, p)
    estimated = roi.estimate_roi(d, p)
    roi.write_roi_file(estimated, args.out)
    return 0


def _cmd_track(args) -> int:
    p = _resolve_params(args)
    d = ingest.parse_detection_file(args.detections, p)
    region = roi.read_roi_file(args.roi)
    tracks = counting.derive_tracks(d, region, p, max_age=args.max_age)
    tracker.write_track_file(tracks, args.out)
    return 0


def _cmd_cluster(args) -> int:
    p = _resolve_params(args)
    seed = _resolve_seed(args)
    tracks = tracker.read_track_file(args.tracks)
    features, kept_idx, _ = clustering.featurize_tracks(tracks, p)
    try:
        first = clustering.select_k(features, p, seed)
    except clustering.TooFewTracks as exc:
        raise clustering.AllPurged(str(exc)) from exc
    outcome = clustering.purge_and_recluster(first, features, p, seed)
    ids = [tracks[kept_idx[i]].id for i in outcome.kept]
    clustering.write_cluster_file(ids, outcome.result, args.out)
    return 0


def _cmd_count(args) -> int:
    p = _resolve_params(args)
    seed = _resolve_seed(args)
    d = ingest.parse_detection_file(args.detections, p)
    result = counting.run_pipeline(d, p, seed, max_age=args.max_age)
    counting.write_result_file(result, args.out)
    return 0


def _cmd_synth(args) -> int:
    scenario = synth.read_scenario_file(args.scenario)
    if args.seed is not None:
        seed = args.seed
    elif "TRAJCOUNT_SEED" in os.environ:
        seed = _resolve_seed(args)
    else:
        seed = scenario.seed
    out = synth.generate(scenario, seed=seed)
    ingest.write_detection_file(out.detections, args.out)
    return 0


def _cmd_eval(args) -> int:
    region, paths, counts, _ = counting.read_result_file(args.result)
    scenario = synth.read_scenario_file(args.truth)
    clusters = []
    for ci in sorted(counts):
        if ci not in paths:
            raise TrajcountError(f"result file has COUNT {ci} but no PATH {ci}")
        clusters.append(counting.MovementCluster(
            cluster_idx=ci, track_ids=tuple(range(counts[ci])), path=paths[ci]))
    report = evaluate_result(region.vertices, clusters, scenario)
    write_report_file(report, args.report)
    for line in format_report_lines(report):
        print(line)
    return 0


def _cmd_render(args) -> int:
    result_tuple = counting.read_result_file(args.result)
    region, paths, counts, purged = result_tuple
    movements = tuple(counting.MovementCluster(
        cluster_idx=ci, track_ids=tuple(range(counts[ci])), path=paths[ci])
        for ci in sorted(counts) if ci in paths)
    result = counting.PipelineResult(roi=region, clusters=movements,
                                     purged_track_ids=tuple(purged))
    if args.width is not None and args.height is not None:
        w, h = args.width, args.height
    else:
        w = int(math.ceil(max(v.x for v in region.vertices) + region.grid_size))
        h = int(math.ceil(max(v.y for v in region.vertices) + region.grid_size))
    layers = tuple(args.layers.split(",")) if args.layers else ("roi", "paths", "counts")
    spec = RenderSpec(width=w, height=h, layers=layers)
    render_to_file(result, spec, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajcount",
        description="ROI estimation, trajectory clustering and movement "
                    "counting from traffic-camera detection records.")
    sub = parser.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="hyperparameter file (key = value lines)")
    shared.add_argument("--set", action="append", metavar="NAME=VALUE",
                        help="override one hyperparameter; repeatable")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int,
                        help="RNG seed (default: TRAJCOUNT_SEED env, then 42)")

    sp = sub.add_parser("roi", parents=[shared],
                        help="estimate the region of interest from detections")
    sp.add_argument("--detections", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_roi)

    sp = sub.add_parser("track", parents=[shared],
                        help="associate detections into tracks inside an ROI")
    sp.add_argument("--detections", required=True)
    sp.add_argument("--roi", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--max-age", type=int, default=tracker.DEFAULT_MAX_AGE)
    sp.set_defaults(func=_cmd_track)

    sp = sub.add_parser("cluster", parents=[shared, seeded],
                        help="cluster tracks into movements")
    sp.add_argument("--tracks", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_cluster)

    sp = sub.add_parser("count", parents=[shared, seeded],
                        help="run the full pipeline: ROI, tracks, clusters, counts")
    sp.add_argument("--detections", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--max-age", type=int, default=tracker.DEFAULT_MAX_AGE)
    sp.set_defaults(func=_cmd_count)

    sp = sub.add_parser("synth", parents=[seeded],
                        help="generate detections from a scenario file")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_synth)

    sp = sub.add_parser("eval", help="score a result file against its scenario")
    sp.add_argument("--result", required=True)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--report", required=True)
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("render", help="draw a result file as SVG")
    sp.add_argument("--result", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--width", type=int)
    sp.add_argument("--height", type=int)
    sp.add_argument("--layers", help="comma-separated subset of "
                                     f"{','.join(LAYER_NAMES)}")
    sp.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TrajcountError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
