"""Point-cloud files (XYZ text, ASCII PLY) and JSON result serialization."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .pcore import PointCloudError, as_points

FORMATS = ("xyz", "ply")
_EXTENSIONS = {".xyz": "xyz", ".txt": "xyz", ".pts": "xyz", ".ply": "ply"}


class CloudFormatError(ValueError):
    """Malformed point-cloud file; ``line`` is 1-based when known."""

    def __init__(self, path, message: str, line: int | None = None):
        self.path, self.line = str(path), line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def detect_format(path, format: str | None = None) -> str:
    if format is not None:
        if format not in FORMATS:
            raise ValueError(f"unknown cloud format {format!r}; expected one of {FORMATS}")
        return format
    ext = Path(path).suffix.lower()
    if ext not in _EXTENSIONS:
        raise ValueError(f"cannot infer format from extension {ext!r}; pass format explicitly")
    return _EXTENSIONS[ext]


def _parse_xyz(path, lines) -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise CloudFormatError(path, f"expected 3 values, found {len(parts)}", lineno)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise CloudFormatError(path, f"non-numeric value in {line!r}", lineno) from None
    if not rows:
        raise CloudFormatError(path, "no points found")
    return np.array(rows, dtype=np.float64)


def _parse_ply(path, lines) -> np.ndarray:
    if not lines or lines[0].strip() != "ply":
        raise CloudFormatError(path, "missing 'ply' magic", 1)
    elements: list[list] = []  # [name, count, [property names]]
    body = None
    for lineno, raw in enumerate(lines[1:], start=2):
        tok = raw.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] != "ascii":
                raise CloudFormatError(path, f"only ASCII PLY is supported, got {' '.join(tok[1:])!r}", lineno)
        elif tok[0] == "element":
            try:
                elements.append([tok[1], int(tok[2]), []])
            except (IndexError, ValueError):
                raise CloudFormatError(path, "malformed element line", lineno) from None
        elif tok[0] == "property":
            if not elements:
                raise CloudFormatError(path, "property before any element", lineno)
            is_list = len(tok) > 1 and tok[1] == "list"
            elements[-1][2].append(("list", tok[-1]) if is_list else (tok[1], tok[-1]))
        elif tok[0] == "end_header":
            body = lineno
            break
        else:
            raise CloudFormatError(path, f"unexpected header keyword {tok[0]!r}", lineno)
    if body is None:
        raise CloudFormatError(path, "missing end_header")

    pos = body  # index into ``lines`` of the first data line
    points = None
    for name, count, props in elements:
        if name != "vertex":
            pos += count  # one line per element in ASCII PLY
            continue
        names = [p[1] for p in props]
        if any(p[0] == "list" for p in props):
            raise CloudFormatError(path, "list properties on vertices are not supported")
        try:
            cols = [names.index(c) for c in ("x", "y", "z")]
        except ValueError:
            raise CloudFormatError(path, "vertex element lacks x/y/z properties") from None
        points = np.empty((count, 3))
        for i in range(count):
            lineno = pos + i + 1
            if pos + i >= len(lines):
                raise CloudFormatError(path, f"expected {count} vertices, file ends early", lineno)
            vals = lines[pos + i].split()
            if len(vals) != len(names):
                raise CloudFormatError(path, f"expected {len(names)} values, found {len(vals)}", lineno)
            try:
                points[i] = [float(vals[c]) for c in cols]
            except ValueError:
                raise CloudFormatError(path, "non-numeric vertex value", lineno) from None
        pos += count
    if points is None or points.shape[0] == 0:
        raise CloudFormatError(path, "no vertices found")
    return points


def load_cloud(path, format: str | None = None) -> np.ndarray:
    """Read an ``(N, 3)`` float64 array; extra PLY properties are ignored."""
    fmt = detect_format(path, format)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    pts = _parse_xyz(path, lines) if fmt == "xyz" else _parse_ply(path, lines)
    try:
        return as_points(pts, str(path))
    except PointCloudError as exc:
        raise CloudFormatError(path, str(exc)) from None


def save_cloud(cloud, path, format: str | None = None) -> None:
    pts = as_points(cloud)
    fmt = detect_format(path, format)
    data = "".join(f"{x:.17g} {y:.17g} {z:.17g}\n" for x, y, z in pts.tolist())
    if fmt == "ply":
        header = (
            "ply\nformat ascii 1.0\n"
            f"element vertex {pts.shape[0]}\n"
            "property double x\nproperty double y\nproperty double z\nend_header\n"
        )
        data = header + data
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(data)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dump_json(obj, path=None) -> str:
    text = json.dumps(to_jsonable(obj), indent=2) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
