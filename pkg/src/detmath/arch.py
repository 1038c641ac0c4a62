"""Receptive-field arithmetic and the exponential attention normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

DEFAULT_ERF_RATIO = 0.3
# dilation rates of the three parallel 3x3 branches in the RF-enhancement block
RFE_DILATIONS = (1, 2, 3)


@dataclass(frozen=True)
class LayerSpec:
    kernel: int
    stride: int = 1
    dilation: int = 1
    padding: int = 0

    def __post_init__(self):
        for name, lo in (("kernel", 1), ("stride", 1), ("dilation", 1), ("padding", 0)):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < lo:
                raise ValueError(f"LayerSpec.{name} must be an integer >= {lo}, got {v!r}")

    @property
    def effective_kernel(self) -> int:
        return self.dilation * (self.kernel - 1) + 1


@dataclass(frozen=True)
class ReceptiveField:
    size: int = 1
    jump: int = 1

    def then(self, layer: LayerSpec) -> "ReceptiveField":
        """Append one layer. Padding shifts the field's offset, not its size."""
        return ReceptiveField(
            self.size + (layer.effective_kernel - 1) * self.jump,
            self.jump * layer.stride,
        )


def receptive_field_chain(layers: Sequence[LayerSpec], start: ReceptiveField | None = None) -> ReceptiveField:
    if not layers and start is None:
        raise ValueError("receptive_field_chain needs at least one layer")
    rf = start or ReceptiveField()
    for layer in layers:
        rf = rf.then(layer)
    return rf


def effective_anchor_size(trf: ReceptiveField, erf_ratio: float = DEFAULT_ERF_RATIO) -> float:
    """Anchor edge matched to the effective receptive field, modeled as a
    fixed fraction of the theoretical one."""
    if not (0.0 < erf_ratio <= 1.0):
        raise ValueError(f"erf_ratio must lie in (0, 1], got {erf_ratio}")
    return trf.size * erf_ratio


def seam_exp_norm(z: float) -> float:
    """Map an attention logit in [0, 1] onto [1, e]."""
    if not (0.0 <= z <= 1.0):
        raise ValueError(f"z must lie in [0, 1], got {z}")
    return math.exp(z)


def rfe_branches(base: ReceptiveField = ReceptiveField(), kernel: int = 3) -> dict[int, ReceptiveField]:
    """Receptive field after each dilated branch of the RF-enhancement block."""
    return {d: base.then(LayerSpec(kernel, 1, d, d * (kernel // 2))) for d in RFE_DILATIONS}


def parse_chain(lines: Iterable[str] | TextIO, source: str = "<chain>") -> list[LayerSpec]:
    """One layer per line: ``kernel stride dilation padding``.

    Trailing fields may be omitted (stride 1, dilation 1, padding 0). Blank
    lines and ``#`` comments are ignored.
    """
    from detmath.widerface import ParseError

    layers = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) > 4:
            raise ParseError(source, lineno, f"expected at most 4 fields, got {len(parts)}")
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise ParseError(source, lineno, f"non-integer field in {line!r}") from None
        try:
            layers.append(LayerSpec(*values))
        except ValueError as exc:
            raise ParseError(source, lineno, str(exc)) from None
    if not layers:
        raise ParseError(source, 0, "chain file contains no layers")
    return layers
