"""Readers and writers for WiderFace-style text files.

Ground truth (``wider_face_*_bbx_gt.txt``)::

    path/to/image.jpg
    <count>
    x y w h blur expression illumination invalid occlusion pose   (count lines)

A count of 0 is conventionally followed by one all-zero line, which is
consumed. Detections use the same layout with ``x y w h score`` lines.
Subset files hold one ``path,subset`` pair per line.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

from detmath.geometry import BBox
from detmath.nms import Detection

ATTRIBUTE_NAMES = ("blur", "expression", "illumination", "invalid", "occlusion", "pose")
SUBSETS = ("easy", "medium", "hard")
CSV_HEADER = "subset,threshold,precision,recall"


class ParseError(ValueError):
    def __init__(self, source: str, line: int, message: str):
        self.source = source
        self.line = line
        self.message = message
        super().__init__(f"{source}:{line}: {message}")


@dataclass
class ImageRecord:
    image_path: str
    faces: list[BBox] = field(default_factory=list)
    attributes: list[tuple[int, ...]] = field(default_factory=list)


@dataclass
class DetectionRecord:
    image_path: str
    detections: list[Detection] = field(default_factory=list)


@dataclass
class ParseReport:
    images: int = 0
    faces_declared: int = 0
    faces_kept: int = 0
    dropped_degenerate: int = 0
    dropped_invalid: int = 0

    @property
    def dropped(self) -> int:
        return self.dropped_degenerate + self.dropped_invalid


class _Lines:
    """Line cursor that tracks 1-based line numbers."""

    def __init__(self, source: TextIO | Iterable[str], name: str):
        self.lines = [ln.rstrip("\r\n") for ln in source]
        self.name = name
        self.pos = 0

    def at_end(self) -> bool:
        return self.pos >= len(self.lines)

    def peek(self) -> str | None:
        return None if self.at_end() else self.lines[self.pos]

    def next(self, what: str) -> tuple[int, str]:
        if self.at_end():
            raise ParseError(self.name, len(self.lines) + 1, f"unexpected end of file, expected {what}")
        self.pos += 1
        return self.pos, self.lines[self.pos - 1]

    def skip_blank(self):
        while not self.at_end() and not self.lines[self.pos].strip():
            self.pos += 1

    def error(self, lineno: int, message: str) -> ParseError:
        return ParseError(self.name, lineno, message)


def _numbers(cur: _Lines, lineno: int, line: str, n: int, what: str) -> list[float]:
    parts = line.split()
    if len(parts) < n:
        raise cur.error(lineno, f"expected {n} fields ({what}), got {len(parts)}")
    try:
        vals = [float(p) for p in parts[:n]]
    except ValueError:
        raise cur.error(lineno, f"non-numeric field in {line.strip()!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise cur.error(lineno, f"non-finite field in {line.strip()!r}")
    return vals


def _count(cur: _Lines) -> tuple[int, int]:
    lineno, line = cur.next("a face count")
    try:
        n = int(line.strip())
    except ValueError:
        raise cur.error(lineno, f"expected an integer count, got {line.strip()!r}") from None
    if n < 0:
        raise cur.error(lineno, f"negative count {n}")
    return lineno, n


def _is_zero_placeholder(line: str | None, n_fields: int) -> bool:
    if line is None:
        return False
    parts = line.split()
    if len(parts) != n_fields:
        return False
    try:
        return all(float(p) == 0.0 for p in parts)
    except ValueError:
        return False


def parse_ground_truth(source: TextIO | Iterable[str], name: str = "<gt>") -> tuple[list[ImageRecord], ParseReport]:
    """Parse a ground-truth file.

    Faces with ``w <= 0``, ``h <= 0`` or ``invalid == 1`` are dropped and
    counted in the report.
    """
    cur = _Lines(source, name)
    records = []
    report = ParseReport()
    while True:
        cur.skip_blank()
        if cur.at_end():
            break
        _, path = cur.next("an image path")
        path = path.strip()
        _, n = _count(cur)
        rec = ImageRecord(path)
        if n == 0 and _is_zero_placeholder(cur.peek(), 10):
            cur.next("placeholder")
        for _ in range(n):
            lineno, line = cur.next(f"{n} face lines for {path}")
            x, y, w, h, *attrs = _numbers(cur, lineno, line, 10, "x y w h + 6 attributes")
            if not all(a.is_integer() for a in attrs):
                raise cur.error(lineno, "attribute fields must be integers")
            attrs = tuple(int(a) for a in attrs)
            report.faces_declared += 1
            if w <= 0 or h <= 0:
                report.dropped_degenerate += 1
                continue
            if attrs[3] == 1:
                report.dropped_invalid += 1
                continue
            rec.faces.append(BBox.from_xywh(x, y, w, h))
            rec.attributes.append(attrs)
            report.faces_kept += 1
        records.append(rec)
        report.images += 1
    return records, report


def parse_detections(source: TextIO | Iterable[str], name: str = "<det>") -> list[DetectionRecord]:
    cur = _Lines(source, name)
    records = []
    while True:
        cur.skip_blank()
        if cur.at_end():
            break
        _, path = cur.next("an image path")
        rec = DetectionRecord(path.strip())
        _, n = _count(cur)
        for _ in range(n):
            lineno, line = cur.next(f"{n} detection lines for {rec.image_path}")
            x, y, w, h, score = _numbers(cur, lineno, line, 5, "x y w h score")
            if not (0.0 <= score <= 1.0):
                raise cur.error(lineno, f"score {score} outside [0, 1]")
            if w <= 0 or h <= 0:
                raise cur.error(lineno, f"degenerate detection box w={w} h={h}")
            rec.detections.append(Detection(BBox.from_xywh(x, y, w, h), score))
        records.append(rec)
    return records


def parse_subsets(source: TextIO | Iterable[str], name: str = "<subsets>") -> dict[str, str]:
    """``path,subset`` lines -> mapping. Each path may appear once."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(source, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        path, sep, subset = line.rpartition(",")
        path, subset = path.strip(), subset.strip().lower()
        if not sep or not path:
            raise ParseError(name, lineno, f"expected 'path,subset', got {line!r}")
        if subset not in SUBSETS:
            raise ParseError(name, lineno, f"unknown subset {subset!r}, expected one of {SUBSETS}")
        if path in mapping:
            raise ParseError(name, lineno, f"{path} assigned to a subset twice")
        mapping[path] = subset
    return mapping


# --- writers ----------------------------------------------------------------


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _xywh(b: BBox) -> list[str]:
    return [_num(b.x1), _num(b.y1), _num(b.x2 - b.x1), _num(b.y2 - b.y1)]


def format_ground_truth(records: Sequence[ImageRecord]) -> str:
    out = []
    for rec in records:
        out.append(rec.image_path)
        out.append(str(len(rec.faces)))
        if not rec.faces:
            out.append(" ".join(["0"] * 10))
        for i, b in enumerate(rec.faces):
            attrs = rec.attributes[i] if i < len(rec.attributes) else (0,) * 6
            out.append(" ".join(_xywh(b) + [str(a) for a in attrs]))
    return "".join(line + "\n" for line in out)


def format_detections(records: Sequence[DetectionRecord]) -> str:
    out = []
    for rec in records:
        out.append(rec.image_path)
        out.append(str(len(rec.detections)))
        for d in rec.detections:
            out.append(" ".join(_xywh(d.box) + [repr(float(d.score))]))
    return "".join(line + "\n" for line in out)


def _subset_order(names: Iterable[str]) -> list[str]:
    known = [s for s in SUBSETS if s in names]
    return known + sorted(n for n in names if n not in SUBSETS)


def format_pr_csv(results: Mapping) -> str:
    """PR points as ``subset,threshold,precision,recall`` with 6 decimals."""
    lines = [CSV_HEADER]
    for subset in _subset_order(results):
        for thr, p, r in results[subset].points:
            lines.append(f"{subset},{thr:.6f},{p:.6f},{r:.6f}")
    return "".join(line + "\n" for line in lines)


def read_pr_csv(source: TextIO | Iterable[str]) -> dict[str, list[tuple[float, float, float]]]:
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or ",".join(header) != CSV_HEADER:
        raise ParseError("<csv>", 1, f"expected header {CSV_HEADER!r}")
    curves: dict[str, list[tuple[float, float, float]]] = {}
    for row in reader:
        subset, thr, p, r = row
        curves.setdefault(subset, []).append((float(thr), float(p), float(r)))
    return curves


def format_ap_summary(results: Mapping) -> str:
    rows = [("subset", "AP", "gts", "dets")]
    for subset in _subset_order(results):
        c = results[subset]
        rows.append((subset, f"{c.ap:.6f}", str(c.total_gt), str(c.num_detections)))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    return "".join(
        "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in rows
    )


def write_eval_report(results: Mapping, summary_sink: TextIO | None = None, csv_sink: TextIO | None = None) -> str:
    """Write the AP summary and PR CSV to the given sinks; returns the CSV text."""
    text = format_pr_csv(results)
    if summary_sink is not None:
        summary_sink.write(format_ap_summary(results))
    if csv_sink is not None:
        csv_sink.write(text)
    return text


def read_text(path: str) -> io.StringIO:
    with open(path, encoding="utf-8", newline="") as fh:
        return io.StringIO(fh.read())
