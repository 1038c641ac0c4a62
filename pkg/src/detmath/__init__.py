"""Box metrics, repulsion and NWD losses, Slide weighting, anchor design and
WiderFace-style evaluation for single-class face detectors."""

__version__ = "0.1.0"

from detmath.geometry import BBox, iog, iou, pairwise_iou
from detmath.gaussian import GaussianBox, NwdConfig, box_to_gaussian, nwd, nwd_boxes, w2_distance
from detmath.losses import (
    LossValue,
    RegMixConfig,
    SmoothLnConfig,
    regression_loss,
    repbox_loss,
    repgt_loss,
    slide_weight,
    smooth_ln,
    smooth_ln_grad,
)
from detmath.gradcheck import finite_diff_check
from detmath.assigner import Sample, adaptive_threshold, assign_samples
from detmath.arch import LayerSpec, ReceptiveField, effective_anchor_size, receptive_field_chain, seam_exp_norm
from detmath.anchors import AnchorSpec, aspect_ratio_stats, generate_anchor_set
from detmath.nms import Detection, nms, partition_by_target
from detmath.widerface import (
    DetectionRecord,
    ImageRecord,
    ParseError,
    parse_detections,
    parse_ground_truth,
    parse_subsets,
    write_eval_report,
)
from detmath.evaluator import EvalRecord, PrCurve, average_precision, evaluate, match_and_score
from detmath._accel import backend_name

__all__ = [
    "BBox", "iou", "iog", "pairwise_iou",
    "GaussianBox", "NwdConfig", "box_to_gaussian", "w2_distance", "nwd", "nwd_boxes",
    "LossValue", "RegMixConfig", "SmoothLnConfig", "smooth_ln", "smooth_ln_grad", "repgt_loss", "repbox_loss",
    "slide_weight", "regression_loss", "finite_diff_check",
    "Sample", "adaptive_threshold", "assign_samples",
    "LayerSpec", "ReceptiveField", "receptive_field_chain", "effective_anchor_size", "seam_exp_norm",
    "AnchorSpec", "generate_anchor_set", "aspect_ratio_stats",
    "Detection", "nms", "partition_by_target",
    "ImageRecord", "DetectionRecord", "ParseError", "parse_ground_truth", "parse_detections",
    "parse_subsets",     "write_eval_report",
    "EvalRecord", "PrCurve", "match_and_score", "average_precision", "evaluate",
    "backend_name",
]
