"""Traffic-camera trajectory analytics: ROI estimation from detection
confidence grids, IoU tracking, movement clustering with silhouette-selected
k, representative paths via a directional double sweep, and vehicle counts,
plus a synthetic-scene generator and an evaluation harness."""

from .core import (BBox, ConfigError, DetectionRecord, FrameGeometry,
                   HyperParams, Point2, TrajcountError, ValidationResult,
                   bbox_center, load_params, save_params, set_param,
                   validate_params)
from .ingest import (DetectionSet, IngestError, group_by_frame,
                     parse_detection_file, parse_detection_lines,
                     write_detection_file)
from .roi import (GridCluster, GridField, RoiPolygon, accumulate_grid,
                  aggregate_to_roi, cluster_cells, compute_grid_size,
                  estimate_roi, point_in_roi, read_roi_file,
                  remove_outlier_clusters, select_cells, write_roi_file)
from .tracker import (Track, adopt_external_tracks, greedy_match, iou,
                      read_track_file, track, write_track_file)
from .clustering import (AllPurged, ClusteringResult, DegenerateTrack,
                         PurgeOutcome, SingleCluster, TooFewTracks, featurize,
                         featurize_tracks, kmeans, purge_and_recluster,
                         select_k, silhouette_index, write_cluster_file)
from .reppath import (NoPath, RepresentativePath, Segment, ZeroAverageVector,
                      average_vector, distance_to_path, naive_sweep,
                      representative_path, rotate_to_sweep_frame,
                      segments_of_tracks, sweep)
from .counting import (MovementCluster, PipelineResult, derive_tracks,
                       read_result_file, remove_deviant_tracks, run_pipeline,
                       write_result_file)
from .synth import (Lane, Scenario, ScenarioError, SynthOutput, generate,
                    ground_truth_roi, read_scenario_file, write_scenario_file)
from .evaluate import (DegeneratePolygon, EmptyGroundTruth, EvalReport,
                       count_mae, evaluate, polygon_iou, write_report_file)
from .render import RenderSpec, render, render_svg
from .quadtree import QuadTree

__version__ = "0.1.0"

__all__ = [
    "AllPurged", "BBox", "ClusteringResult", "ConfigError", "DegeneratePolygon",
    "DegenerateTrack", "DetectionRecord", "DetectionSet", "EmptyGroundTruth",
    "EvalReport", "FrameGeometry", "GridCluster", "GridField", "HyperParams",
    "IngestError", "Lane", "MovementCluster", "NoPath", "PipelineResult",
    "Point2", "PurgeOutcome", "QuadTree", "RenderSpec", "RepresentativePath",
    "RoiPolygon", "Scenario", "ScenarioError", "Segment", "SingleCluster",
    "SynthOutput", "TooFewTracks", "Track", "TrajcountError",
    "ValidationResult", "ZeroAverageVector", "accumulate_grid",
    "adopt_external_tracks", "aggregate_to_roi", "average_vector",
    "bbox_center", "cluster_cells", "compute_grid_size", "count_mae",
    "derive_tracks", "distance_to_path", "estimate_roi", "evaluate",
    "featurize", "featurize_tracks", "generate", "greedy_match",
    "ground_truth_roi", "group_by_frame", "iou", "kmeans", "load_params",
    "naive_sweep", "parse_detection_file", "parse_detection_lines",
    "point_in_roi", "polygon_iou", "purge_and_recluster", "read_result_file",
    "read_roi_file", "read_scenario_file", "read_track_file",
    "remove_deviant_tracks", "remove_outlier_clusters", "render", "render_svg",
    "representative_path", "rotate_to_sweep_frame", "run_pipeline",
    "save_params", "segments_of_tracks", "select_cells", "select_k",
    "set_param", "silhouette_index", "sweep", "track", "validate_params",
    "write_cluster_file", "write_detection_file", "write_report_file",
    "write_result_file", "write_roi_file", "write_scenario_file",
    "write_track_file",
]
