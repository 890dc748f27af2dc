"""Result files: CSV and JSON grids, 16-bit PGM heatmaps, peak curves.

Every file is written to a temporary sibling and renamed into place, so a
crash never leaves a partial result behind. Missing grid values are an empty
CSV field, ``null`` in JSON and 0 in PGM (the PGM header says so).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .spectrum import Axis, EmissionGrid, PeakCurve

FORMAT_VERSION = 1


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, nan/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def grid_to_dict(grid: EmissionGrid) -> dict:
    return {
        "axis_1": {"name": grid.axis_1.name, "unit": grid.axis_1.unit, "values": grid.axis_1.values},
        "axis_2": {"name": grid.axis_2.name, "unit": grid.axis_2.unit, "values": grid.axis_2.values},
        "values": grid.values,
        "metadata": grid.metadata,
    }


def grid_from_dict(d: dict) -> EmissionGrid:
    def axis(a):
        return Axis(a["name"], np.asarray(a["values"], dtype=float), a["unit"])

    values = np.array(
        [[math.nan if v is None else v for v in row] for row in d["values"]], dtype=float
    )
    if values.size == 0:
        values = values.reshape(len(d["axis_1"]["values"]), len(d["axis_2"]["values"]))
    return EmissionGrid(axis(d["axis_1"]), axis(d["axis_2"]), values, d.get("metadata", {}))


def grid_json(grid: EmissionGrid, envelope: dict | None = None) -> str:
    doc = dict(envelope or {})
    doc["grid"] = grid_to_dict(grid)
    return dumps(doc)


def read_grid_json(path) -> EmissionGrid:
    with open(path, encoding="utf-8") as fh:
        return grid_from_dict(json.load(fh)["grid"])


def _fmt(v: float) -> str:
    return "" if math.isnan(v) else repr(float(v))


def grid_csv(grid: EmissionGrid, envelope: dict | None = None) -> str:
    """Metadata as ``#`` comment lines, then a header row of axis-2 values and
    one row per axis-1 value (first column)."""
    lines = [f"# cobrems grid format {FORMAT_VERSION}"]
    for key, value in sorted((envelope or {}).items()):
        lines.append(f"# {key}: {json.dumps(_clean(value), sort_keys=True)}")
    lines.append(f"# metadata: {json.dumps(_clean(grid.metadata), sort_keys=True)}")
    lines.append(f"# axis_1: {grid.axis_1.name} [{grid.axis_1.unit}] (rows)")
    lines.append(f"# axis_2: {grid.axis_2.name} [{grid.axis_2.unit}] (columns)")
    header = [f"{grid.axis_1.name}\\{grid.axis_2.name}"] + [_fmt(v) for v in grid.axis_2.values]
    lines.append(",".join(header))
    for a, row in zip(grid.axis_1.values, grid.values):
        lines.append(",".join([_fmt(a)] + [_fmt(v) for v in row]))
    return "\n".join(lines) + "\n"


def read_grid_csv(path) -> EmissionGrid:
    meta, a1, a2 = {}, None, None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# metadata: "):
                meta = json.loads(line[len("# metadata: "):])
            elif line.startswith("# axis_1: ") or line.startswith("# axis_2: "):
                name, unit = line[10:].split(" [", 1)
                ax = (name, unit.split("]", 1)[0])
                if line.startswith("# axis_1"):
                    a1 = ax
                else:
                    a2 = ax
            elif line.startswith("#"):
                continue
            else:
                rows.append(line.split(","))
    head, body = rows[0], rows[1:]
    conv = [[math.nan if c == "" else float(c) for c in r] for r in body]
    return EmissionGrid(
        Axis(a1[0], np.array([r[0] for r in conv]), a1[1]),
        Axis(a2[0], np.array([float(c) for c in head[1:]]), a2[1]),
        np.array([r[1:] for r in conv], dtype=float).reshape(len(body), len(head) - 1),
        meta,
    )


def grid_pgm(grid: EmissionGrid) -> bytes:
    """Binary 16-bit PGM (P5, big endian); rows are axis-1 values."""
    v = grid.values
    ok = ~np.isnan(v)
    lo = float(v[ok].min()) if ok.any() else 0.0
    hi = float(v[ok].max()) if ok.any() else 0.0
    span = hi - lo
    img = np.zeros(v.shape, dtype=">u2")
    if span > 0:
        img[ok] = np.rint((v[ok] - lo) / span * 65535.0).astype(">u2")
    h, w = v.shape
    header = (
        "P5\n"
        f"# cobrems {grid.axis_1.name} rows x {grid.axis_2.name} columns\n"
        f"# scale: pixel = (value - {lo!r}) / {span!r} * 65535; missing = 0\n"
        f"{w} {h}\n65535\n"
    )
    return header.encode("ascii") + img.tobytes()


def read_pgm(path) -> tuple[np.ndarray, list[str]]:
    data = Path(path).read_bytes()
    comments, fields, pos = [], [], 0
    while len(fields) < 4:
        end = data.index(b"\n", pos)
        line = data[pos:end].decode("ascii")
        pos = end + 1
        if line.startswith("#"):
            comments.append(line)
        else:
            fields.extend(line.split())
    w, h = int(fields[1]), int(fields[2])
    img = np.frombuffer(data[pos : pos + 2 * w * h], dtype=">u2").reshape(h, w)
    return img, comments


def peaks_csv(curve: PeakCurve, envelope: dict | None = None) -> str:
    lines = [f"# cobrems peak curve format {FORMAT_VERSION}"]
    for key, value in sorted((envelope or {}).items()):
        lines.append(f"# {key}: {json.dumps(_clean(value), sort_keys=True)}")
    lines.append("omega_kev,theta_peak_coherent_rad,theta_peak_incoherent_rad,separation_rad")
    for w, c, i, s in zip(curve.omegas, curve.coherent, curve.incoherent, curve.separation):
        lines.append(",".join(_fmt(x) for x in (w, c, i, s)))
    return "\n".join(lines) + "\n"


def peaks_dict(curve: PeakCurve) -> dict:
    return {
        "omega_kev": curve.omegas,
        "theta_peak_coherent_rad": curve.coherent,
        "theta_peak_incoherent_rad": curve.incoherent,
        "separation_rad": curve.separation,
    }
