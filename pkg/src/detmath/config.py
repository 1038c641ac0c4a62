"""Flat ``key = value`` run configuration shared by every CLI subcommand."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from typing import Iterable, TextIO

from detmath.anchors import DEFAULT_BASE, DEFAULT_OCTAVES, DEFAULT_RATIO, DEFAULT_STRIDES
from detmath.arch import DEFAULT_ERF_RATIO
from detmath.evaluator import DEFAULT_EVAL_IOU
from detmath.gaussian import DEFAULT_NWD_C
from detmath.losses import DEFAULT_EPSILON, DEFAULT_SIGMA_REPBOX, DEFAULT_SIGMA_REPGT
from detmath.nms import DEFAULT_NMS_IOU


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    nwd_c: float = DEFAULT_NWD_C
    sigma_repgt: float = DEFAULT_SIGMA_REPGT
    sigma_repbox: float = DEFAULT_SIGMA_REPBOX
    epsilon: float = DEFAULT_EPSILON
    alpha_iou: float = 0.5
    nms_iou: float = DEFAULT_NMS_IOU
    eval_iou: float = DEFAULT_EVAL_IOU
    erf_ratio: float = DEFAULT_ERF_RATIO
    anchor_base: float = DEFAULT_BASE
    anchor_strides: tuple[int, ...] = DEFAULT_STRIDES
    anchor_octaves: int = DEFAULT_OCTAVES
    anchor_ratio: float = DEFAULT_RATIO
    anchor_convention: str = "area"
    gradcheck_points: int = 100
    gradcheck_step: float = 1e-4
    gradcheck_tol: float = 1e-4
    seed: int = 0
    workers: int = 1
    gt_file: str = ""
    det_file: str = ""
    subset_file: str = ""
    chain_file: str = ""
    out: str = ""

    @property
    def alpha_nwd(self) -> float:
        return 1.0 - self.alpha_iou

    def validate(self) -> "Config":
        def check(ok, key):
            if not ok:
                raise ConfigError(f"{key}={getattr(self, key)!r} is out of range")

        check(self.nwd_c > 0, "nwd_c")
        check(0.0 <= self.sigma_repgt < 1.0, "sigma_repgt")
        check(0.0 <= self.sigma_repbox < 1.0, "sigma_repbox")
        check(self.epsilon > 0, "epsilon")
        check(0.0 <= self.alpha_iou <= 1.0, "alpha_iou")
        check(0.0 <= self.nms_iou <= 1.0, "nms_iou")
        check(0.0 < self.eval_iou <= 1.0, "eval_iou")
        check(0.0 < self.erf_ratio <= 1.0, "erf_ratio")
        check(self.anchor_base > 0, "anchor_base")
        check(len(self.anchor_strides) > 0 and all(s >= 1 for s in self.anchor_strides), "anchor_strides")
        check(self.anchor_octaves >= 1, "anchor_octaves")
        check(self.anchor_ratio > 0, "anchor_ratio")
        check(self.anchor_convention in ("area", "width"), "anchor_convention")
        check(self.gradcheck_points >= 1, "gradcheck_points")
        check(self.gradcheck_step > 0, "gradcheck_step")
        check(self.gradcheck_tol > 0, "gradcheck_tol")
        check(self.workers >= 1, "workers")
        return self

    def updated(self, **overrides) -> "Config":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **overrides).validate()

    def dump(self) -> str:
        return "".join(f"{f.name} = {_format(getattr(self, f.name))}\n" for f in fields(self))


def _format(v) -> str:
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


def _coerce(key: str, raw: str):
    default = getattr(Config, key, None)
    try:
        if key == "anchor_strides":
            return tuple(int(p) for p in raw.split(",") if p.strip())
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config(lines: Iterable[str] | TextIO, source: str = "<config>") -> dict:
    values = {}
    known = {f.name for f in fields(Config)}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, value.strip())
    return values


def load_config(path: str | None = None, **overrides) -> Config:
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values = parse_config(fh, path)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Config().updated(**values)
