"""Command-line entry point: ``detmath <subcommand> ...``.

Exit status is 0 on success, 1 on domain or parse errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from detmath import __version__
from detmath.anchors import aspect_ratio_stats, anchor_table_data, format_anchor_table, generate_anchor_set
from detmath.arch import effective_anchor_size, parse_chain, receptive_field_chain
from detmath.assigner import adaptive_threshold, assign_samples
from detmath.config import Config, ConfigError, load_config
from detmath.evaluator import EvalRecord, evaluate
from detmath.gaussian import NwdConfig
from detmath.gradcheck import run_suite
from detmath.losses import RegMixConfig, SmoothLnConfig, regression_loss, repbox_loss, repgt_loss
from detmath.nms import nms
from detmath.widerface import (
    DetectionRecord,
    ParseError,
    format_ap_summary,
    format_detections,
    format_pr_csv,
    parse_detections,
    parse_ground_truth,
    parse_subsets,
    read_text,
)

# flag -> Config field; defaults are suppressed so only explicit flags override
COMMON_FLAGS = {
    "--nwd-c": ("nwd_c", float),
    "--sigma-repgt": ("sigma_repgt", float),
    "--sigma-repbox": ("sigma_repbox", float),
    "--epsilon": ("epsilon", float),
    "--alpha-iou": ("alpha_iou", float),
    "--nms-iou": ("nms_iou", float),
    "--eval-iou": ("eval_iou", float),
    "--erf-ratio": ("erf_ratio", float),
    "--workers": ("workers", int),
    "--seed": ("seed", int),
    "--out": ("out", str),
}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", metavar="FILE", help="key = value config file")
    p.add_argument("--show-config", action="store_true", help="print the effective config and exit")
    for flag, (dest, typ) in COMMON_FLAGS.items():
        p.add_argument(flag, dest=dest, type=typ)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="detmath", parents=[common],
                                     description="Face-detection box metrics, losses, anchors and evaluation.")
    parser.add_argument("--version", action="version", version=f"detmath {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("loss-eval", parents=[common], help="per-image assignment and loss table")
    p.add_argument("gt", nargs="?", help="ground-truth file")
    p.add_argument("det", nargs="?", help="detection file")

    p = sub.add_parser("anchor-fit", parents=[common], help="aspect-ratio statistics and anchor table")
    p.add_argument("gt", nargs="?", help="ground-truth file (optional)")
    p.add_argument("--base", dest="anchor_base", type=float)
    p.add_argument("--strides", dest="anchor_strides", type=lambda s: tuple(int(x) for x in s.split(",")))
    p.add_argument("--octaves", dest="anchor_octaves", type=int)
    p.add_argument("--ratio", dest="anchor_ratio", type=float)
    p.add_argument("--fit-ratio", action="store_true", help="use the median h/w of the gt file as the ratio")
    p.add_argument("--json", action="store_true", help="print structured output instead of text")

    p = sub.add_parser("rf-calc", parents=[common], help="receptive field of a layer chain")
    p.add_argument("chain", nargs="?", help="chain file: 'kernel stride dilation padding' per line")

    p = sub.add_parser("nms", parents=[common], help="greedy NMS over a detection file")
    p.add_argument("det", nargs="?", help="detection file")

    p = sub.add_parser("eval", parents=[common], help="per-subset AP and PR curves")
    p.add_argument("gt", nargs="?", help="ground-truth file")
    p.add_argument("det", nargs="?", help="detection file")
    p.add_argument("subsets", nargs="?", help="'path,subset' file (default: all images in one 'all' subset)")

    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference check of every loss gradient")
    p.add_argument("--points", dest="gradcheck_points", type=int)
    p.add_argument("--step", dest="gradcheck_step", type=float)
    p.add_argument("--tol", dest="gradcheck_tol", type=float)
    return parser


CONFIG_KEYS = {f for f in Config.__dataclass_fields__}


def _config_from_args(ns: argparse.Namespace) -> Config:
    overrides = {k: v for k, v in vars(ns).items() if k in CONFIG_KEYS}
    return load_config(getattr(ns, "config", None), **overrides)


def _emit(text: str, cfg: Config, out):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


def _require(value, what):
    if not value:
        raise ConfigError(f"missing {what}")
    return value


def _load_gt(path):
    records, report = parse_ground_truth(read_text(path), path)
    return records, report


def _load_det(path):
    return parse_detections(read_text(path), path)


# --- subcommands -------------------------------------------------------------


def cmd_loss_eval(ns, cfg: Config, out):
    gt_path = _require(getattr(ns, "gt", None) or cfg.gt_file, "ground-truth file")
    det_path = _require(getattr(ns, "det", None) or cfg.det_file, "detection file")
    gts, _ = _load_gt(gt_path)
    dets = {r.image_path: r for r in _load_det(det_path)}
    mix = RegMixConfig.from_iou_weight(cfg.alpha_iou)
    nwd_cfg = NwdConfig(cfg.nwd_c)
    repgt_cfg = SmoothLnConfig(cfg.sigma_repgt)
    repbox_cfg = SmoothLnConfig(cfg.sigma_repbox)

    header = ("image", "preds", "gts", "mu", "pos", "reg", "repgt", "repbox")
    rows = [header]
    sums = [0.0, 0.0, 0.0]
    counted = 0
    for rec in gts:
        preds = [d.box for d in dets.get(rec.image_path, DetectionRecord(rec.image_path)).detections]
        if not preds or not rec.faces:
            rows.append((rec.image_path, str(len(preds)), str(len(rec.faces)), "-", "0", "-", "-", "-"))
            continue
        samples = assign_samples(preds, rec.faces)
        pos = [s for s in samples if s.is_positive]
        pos_boxes = [preds[s.pred_index] for s in pos]
        pos_gt = [s.gt_index for s in pos]
        mu = adaptive_threshold([s.iou for s in samples])
        reg = sum(regression_loss(b, rec.faces[g], mix, nwd_cfg).value for b, g in zip(pos_boxes, pos_gt)) / len(pos)
        rg = repgt_loss(pos_boxes, pos_gt, rec.faces, repgt_cfg).value
        rb = repbox_loss(pos_boxes, pos_gt, repbox_cfg, cfg.epsilon).value
        for k, v in enumerate((reg, rg, rb)):
            sums[k] += v
        counted += 1
        rows.append((rec.image_path, str(len(preds)), str(len(rec.faces)), f"{mu:.6f}", str(len(pos)),
                     f"{reg:.6f}", f"{rg:.6f}", f"{rb:.6f}"))
    if counted:
        rows.append(("mean", "", "", "", "", *(f"{v / counted:.6f}" for v in sums)))
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    text = "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in rows)
    _emit(text, cfg, out)


def cmd_anchor_fit(ns, cfg: Config, out):
    gt_path = getattr(ns, "gt", None) or cfg.gt_file
    stats = None
    ratio = cfg.anchor_ratio
    if gt_path:
        records, report = _load_gt(gt_path)
        faces = [b for r in records for b in r.faces]
        stats = aspect_ratio_stats(faces)
        if getattr(ns, "fit_ratio", False):
            ratio = round(stats.median, 2)
    specs = generate_anchor_set(cfg.anchor_base, cfg.anchor_strides, cfg.anchor_octaves, ratio)
    if getattr(ns, "json", False):
        data = {"anchors": anchor_table_data(specs, cfg.anchor_convention)}
        if stats is not None:
            data["ratio_stats"] = stats.as_dict()
            data["parse_report"] = vars(report) | {"dropped": report.dropped}
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    else:
        text = ""
        if stats is not None:
            text += (f"faces: {stats.count} (dropped {report.dropped})\n"
                     f"h/w mean: {stats.mean:.4f}\n"
                     f"h/w median: {stats.median:.4f}\n\n")
        text += format_anchor_table(specs)
    _emit(text, cfg, out)


def cmd_rf_calc(ns, cfg: Config, out):
    path = _require(getattr(ns, "chain", None) or cfg.chain_file, "chain file")
    layers = parse_chain(read_text(path), path)
    lines = ["layer  kernel  stride  dilation  size  jump"]
    rf = None
    for i, layer in enumerate(layers, 1):
        rf = receptive_field_chain([layer], start=rf)
        lines.append(f"{i:<5}  {layer.kernel:<6}  {layer.stride:<6}  {layer.dilation:<8}  {rf.size:<4}  {rf.jump}")
    lines += [
        "",
        f"TRF size: {rf.size}",
        f"jump: {rf.jump}",
        f"ERF ratio: {cfg.erf_ratio:g}",
        f"suggested anchor: {effective_anchor_size(rf, cfg.erf_ratio):.2f}",
    ]
    _emit("\n".join(lines) + "\n", cfg, out)


def cmd_nms(ns, cfg: Config, out):
    det_path = _require(getattr(ns, "det", None) or cfg.det_file, "detection file")
    kept = []
    for rec in _load_det(det_path):
        idx = nms(rec.detections, cfg.nms_iou)
        kept.append(DetectionRecord(rec.image_path, [rec.detections[i] for i in idx]))
    _emit(format_detections(kept), cfg, out)


def cmd_eval(ns, cfg: Config, out):
    gt_path = _require(getattr(ns, "gt", None) or cfg.gt_file, "ground-truth file")
    det_path = _require(getattr(ns, "det", None) or cfg.det_file, "detection file")
    subset_path = getattr(ns, "subsets", None) or cfg.subset_file
    gts, _ = _load_gt(gt_path)
    dets = {r.image_path: r.detections for r in _load_det(det_path)}
    subsets = parse_subsets(read_text(subset_path), subset_path) if subset_path else None
    records = []
    for rec in gts:
        if subsets is None:
            subset = "all"
        elif rec.image_path in subsets:
            subset = subsets[rec.image_path]
        else:
            continue
        records.append(EvalRecord(rec.image_path, list(dets.get(rec.image_path, [])), rec.faces, subset))
    if not records:
        raise ConfigError("no ground-truth image belongs to any subset")
    results = evaluate(records, cfg.eval_iou, workers=cfg.workers)
    out.write(format_ap_summary(results))
    csv_text = format_pr_csv(results)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text)
    else:
        out.write("\n" + csv_text)


def cmd_gradcheck(ns, cfg: Config, out):
    results = run_suite(
        n_points=cfg.gradcheck_points, seed=cfg.seed, step=cfg.gradcheck_step, tol=cfg.gradcheck_tol,
        nwd_cfg=NwdConfig(cfg.nwd_c), sigma_repgt=cfg.sigma_repgt, sigma_repbox=cfg.sigma_repbox,
        epsilon=cfg.epsilon,
    )
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<20} points={r.points} "
                     f"max_rel_err={r.max_rel_error:.3e} resampled={r.resampled}")
    _emit("\n".join(lines) + "\n", cfg, out)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "loss-eval": cmd_loss_eval,
    "anchor-fit": cmd_anchor_fit,
    "rf-calc": cmd_rf_calc,
    "nms": cmd_nms,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config_from_args(ns)
        if getattr(ns, "show_config", False):
            out.write(cfg.dump())
            return 0
        if not ns.command:
            parser.print_usage(err)
            err.write("detmath: error: a subcommand is required\n")
            return 2
        status = COMMANDS[ns.command](ns, cfg, out)
        return status or 0
    except (ParseError, ConfigError, ValueError, OSError) as exc:
        err.write(f"detmath: error: {exc}\n")
        return 1


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
