"""Tabular sweep results: CSV serialization and minimal SVG line charts."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

__all__ = ["COLUMNS", "SweepResult", "format_value", "read_csv", "write_svg", "config_hash"]

COLUMNS = (
    "experiment", "alpha", "C", "d", "k", "delta", "n_syn",
    "theta_v", "theta_w", "method", "value", "stderr", "seed", "notes",
)


def format_value(x) -> str:
    """Canonical text form: shortest round-trip repr for floats, '' for None."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(float(x))
    try:
        import numpy as np

        if isinstance(x, np.integer):
            return str(int(x))
        if isinstance(x, np.floating):
            return format_value(float(x))
    except ImportError:  # pragma: no cover
        pass
    return str(x)


def config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:16]


@dataclass
class SweepResult:
    """Rows of ``(inputs, method, value, stderr, seed, notes)``.

    Every row carries its full input tuple so it can be recomputed on its
    own; ``stderr`` is empty for deterministic methods.
    """

    rows: list = field(default_factory=list)

    def add(self, experiment: str, method: str, value: float, *, alpha=None, C=None, d=None, k=1, delta=None,
            n_syn=None, theta_v=None, theta_w=None, stderr=None, seed=None, notes: str = "") -> None:
        self.rows.append({
            "experiment": experiment, "alpha": alpha, "C": C, "d": d, "k": k, "delta": delta,
            "n_syn": "inf" if n_syn is None else n_syn, "theta_v": theta_v, "theta_w": theta_w,
            "method": method, "value": value, "stderr": stderr, "seed": seed, "notes": notes,
        })

    def extend(self, other: "SweepResult") -> None:
        self.rows.extend(other.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def select(self, **match) -> list[dict]:
        return [r for r in self.rows if all(r.get(k) == v for k, v in match.items())]

    def body(self) -> str:
        """Header line plus data rows, without metadata comments."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([format_value(r.get(c)) for c in COLUMNS])
        return buf.getvalue()

    def to_csv(self, path: Optional[str] = None, meta: Optional[dict] = None) -> str:
        """Serialize with ``#``-prefixed metadata lines; written atomically if ``path`` is given."""
        lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
        text = "".join(line + "\n" for line in lines) + self.body()
        if path is not None:
            directory = os.path.dirname(os.path.abspath(path))
            fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        return text


def read_csv(path: str) -> tuple[dict, list[dict]]:
    """Parse a file written by :meth:`SweepResult.to_csv` into (metadata, rows)."""
    meta, lines = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(":")
                meta[key.strip()] = val.strip()
            else:
                lines.append(line)
    return meta, list(csv.DictReader(lines))


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_svg(path: str, series: Sequence[tuple[str, Sequence[float], Sequence[float]]], *, title: str,
              xlabel: str, ylabel: str, logx: bool = False, dashed: Iterable[str] = ()) -> str:
    """Write a static line chart: one polyline per ``(label, xs, ys)`` series."""
    width, height, ml, mr, mt, mb = 640, 420, 70, 170, 40, 55
    dashed = set(dashed)
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    pts = [(tx(x), y) for _, xs, ys in series for x, y in zip(xs, ys) if math.isfinite(y) and (x > 0 or not logx)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(0.0, min(p[1] for p in pts)), max(p[1] for p in pts)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    pw, ph = width - ml - mr, height - mt - mb

    def sx(v):
        return ml + (tx(v) - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{_esc(xlabel)}</text>',
        f'<text x="18" y="{mt + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 18 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>',
    ]
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        px = ml + pw * i / 4
        py = mt + ph - ph * i / 4
        lab = f"{10 ** fx:.3g}" if logx else f"{fx:.3g}"
        out.append(f'<text x="{px:.1f}" y="{mt + ph + 16}" text-anchor="middle">{lab}</text>')
        out.append(f'<text x="{ml - 6}" y="{py + 4:.1f}" text-anchor="end">{fy:.3g}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys) if math.isfinite(y) and (x > 0 or not logx))
        dash = ' stroke-dasharray="5,4"' if label in dashed else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{coords}"/>')
        ly = mt + 14 + 18 * i
        out.append(f'<line x1="{ml + pw + 12}" y1="{ly - 4}" x2="{ml + pw + 34}" y2="{ly - 4}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{ml + pw + 40}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text
