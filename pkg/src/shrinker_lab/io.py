"""CSV, SVG and manifest output.

All writers go through a temporary file in the target directory followed by
``os.replace``, so readers never see partial files.  Numbers are formatted
with fixed rules, which makes identical inputs produce identical bytes.
"""

from __future__ import annotations

import csv
import io as _io
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InputError

SCHEMA_PREFIX = "# shrinker-lab v1 "


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` via a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    """Shortest round-trip text for a float; ints and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    if x is None:
        return "none"
    return str(x)


# ------------------------------------------------------------------ CSV


def write_csv(path, schema: str, columns, rows):
    """Write a table with a schema comment line and a header row."""
    if not schema or any(c.isspace() for c in schema):
        raise InputError("schema name must be a non-empty token")
    buf = _io.StringIO()
    buf.write(SCHEMA_PREFIX + schema + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(columns))
    for row in rows:
        w.writerow([fmt(v) for v in row])
    atomic_write(path, buf.getvalue())


def read_csv(path):
    """Read a table written by :func:`write_csv`.

    Returns
    -------
    (schema, columns, data)
        ``data`` is a float array of shape (rows, columns).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith(SCHEMA_PREFIX):
            raise InputError(f"{path}: missing schema line")
        schema = first[len(SCHEMA_PREFIX):].strip()
        r = csv.reader(fh)
        columns = next(r)
        data = [[float(v) for v in row] for row in r if row]
    arr = np.array(data, dtype=float).reshape(-1, len(columns))
    return schema, columns, arr


def write_curve_csv(path, points, schema="curve"):
    write_csv(path, schema, ["u", "v"], np.asarray(points, dtype=float))


def read_curve_csv(path):
    _, _, arr = read_csv(path)
    return arr[:, :2]


# ------------------------------------------------------------------ manifest


def write_manifest(path, entries: dict):
    """Flat ``key=value`` text, one entry per line, in insertion order."""
    lines = []
    for k, v in entries.items():
        if "=" in k or "\n" in k:
            raise InputError(f"bad manifest key {k!r}")
        if isinstance(v, (list, tuple)):
            v = ",".join(fmt(x) for x in v)
        else:
            v = fmt(v)
        if "\n" in v:
            raise InputError(f"manifest value for {k!r} spans lines")
        lines.append(f"{k}={v}")
    atomic_write(path, "\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    """Parse a manifest into a dict of strings."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            k, sep, v = line.partition("=")
            if not sep:
                raise InputError(f"{path}: malformed line {line!r}")
            out[k] = v
    return out


# ------------------------------------------------------------------ SVG


def _num(x):
    return f"{x:.4f}"


def emit_svg(curves, decorations, path, size=600, margin=0.1, closed=None):
    """Render polylines with reference lines as a deterministic SVG.

    Parameters
    ----------
    curves : list of array_like, shape (k, 2)
        One polyline per entry, in data coordinates ``(u, v)``.
    decorations : list of tuple
        ``('hline', v)``, ``('vline', u)``, ``('diagonal',)`` or
        ``('circle', (u0, v0), radius)``; drawn dashed and clipped to the
        view.  The coordinate axes are always drawn when in view.
    path : str or Path
    closed : list of bool, optional
        Close the matching polyline.
    """
    curves = [np.asarray(c, dtype=float) for c in curves]
    if not curves or any(c.ndim != 2 or c.shape[0] < 2 for c in curves):
        raise InputError("emit_svg needs at least one curve of two or more points")
    closed = closed or [False] * len(curves)
    allp = np.vstack(curves)
    lo = allp.min(axis=0)
    hi = allp.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo = lo - margin * span
    hi = hi + margin * span
    span = hi - lo
    scale = size / span.max()
    W, H = span * scale

    def tx(u):
        return (u - lo[0]) * scale

    def ty(v):
        return H - (v - lo[1]) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(W)}" height="{_num(H)}" '
        f'viewBox="0 0 {_num(W)} {_num(H)}">',
        f'<rect x="0" y="0" width="{_num(W)}" height="{_num(H)}" fill="white"/>',
    ]
    style_axis = 'stroke="#888888" stroke-width="1"'
    style_ref = 'stroke="#4477aa" stroke-width="1" stroke-dasharray="4 3" fill="none"'
    if lo[0] <= 0 <= hi[0]:
        out.append(f'<line x1="{_num(tx(0))}" y1="0" x2="{_num(tx(0))}" y2="{_num(H)}" {style_axis}/>')
    if lo[1] <= 0 <= hi[1]:
        out.append(f'<line x1="0" y1="{_num(ty(0))}" x2="{_num(W)}" y2="{_num(ty(0))}" {style_axis}/>')
    for dec in decorations:
        kind = dec[0]
        if kind == "hline":
            y = ty(dec[1])
            out.append(f'<line x1="0" y1="{_num(y)}" x2="{_num(W)}" y2="{_num(y)}" {style_ref}/>')
        elif kind == "vline":
            x = tx(dec[1])
            out.append(f'<line x1="{_num(x)}" y1="0" x2="{_num(x)}" y2="{_num(H)}" {style_ref}/>')
        elif kind == "diagonal":
            a = max(lo[0], lo[1])
            b = min(hi[0], hi[1])
            if a < b:
                out.append(
                    f'<line x1="{_num(tx(a))}" y1="{_num(ty(a))}" x2="{_num(tx(b))}" y2="{_num(ty(b))}" {style_ref}/>'
                )
        elif kind == "circle":
            (cu, cv), r = dec[1], dec[2]
            out.append(f'<circle cx="{_num(tx(cu))}" cy="{_num(ty(cv))}" r="{_num(r * scale)}" {style_ref}/>')
        else:
            raise InputError(f"unknown decoration {kind!r}")
    colours = ["#222222", "#cc3311", "#009988", "#ee7733"]
    for i, (c, cl) in enumerate(zip(curves, closed)):
        pts = " ".join(f"{_num(tx(u))},{_num(ty(v))}" for u, v in c)
        tag = "polygon" if cl else "polyline"
        out.append(f'<{tag} points="{pts}" fill="none" stroke="{colours[i % len(colours)]}" stroke-width="1.5"/>')
    out.append("</svg>")
    atomic_write(path, "\n".join(out) + "\n")
