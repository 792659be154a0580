"""CSV and SVG artifacts for experiment records.

The SVG writer is a small hand-rolled line plotter so results can be viewed
without a plotting stack.  Output bytes depend only on the inputs.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .experiments import RunRecord

CSV_COLUMNS = ("round", "algorithm", "run", "prediction", "loss", "regret_or_wealth",
               "bound", "stderr")
FORMATS = ("csv", "svg-plot")

_COLORS = {"erfi": "#1f5fbf", "exp": "#d9822b", "kt": "#2e8b3e", "ogd-potential": "#7b4fa0",
           "linear": "#777777", "bound": "#c0392b"}
_FALLBACK = ("#8c564b", "#e377c2", "#17becf", "#bcbd22")


def _num(x) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def write_csv(records: list[RunRecord], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in records:
            for t in range(rec.T):
                w.writerow([t + 1, rec.algorithm, rec.run, _num(rec.predictions[t]),
                            _num(rec.losses[t]), _num(rec.metric[t]),
                            _num(rec.bound[t]) if rec.bound is not None else "",
                            _num(rec.stderr[t]) if rec.stderr is not None else ""])
    return path


def read_csv(path, metric_name: str = "") -> list[RunRecord]:
    """Inverse of ``write_csv`` (flags such as ``overflow`` are not stored)."""
    groups: dict[tuple[str, int], list[dict]] = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            groups.setdefault((row["algorithm"], int(row["run"])), []).append(row)

    def col(rows, name):
        if all(r[name] == "" for r in rows):
            return None
        return np.array([float(r[name]) for r in rows])

    out = []
    for (alg, run), rows in groups.items():
        rows.sort(key=lambda r: int(r["round"]))
        out.append(RunRecord(alg, col(rows, "prediction"), col(rows, "loss"),
                             col(rows, "regret_or_wealth"), metric_name, run=run,
                             bound=col(rows, "bound"), stderr=col(rows, "stderr")))
    return out


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

W, H = 640, 420
ML, MR, MT, MB = 70, 150, 40, 50


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _fmt_tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e5 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:g}"


def line_plot_svg(series: list[tuple[str, np.ndarray, np.ndarray, str]], title: str,
                  xlabel: str, ylabel: str, logx: bool = False) -> str:
    """``series`` items are (label, x, y, dash) with dash "" for solid lines."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    fin = np.isfinite(ys)
    if logx:
        xs = np.log10(xs)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = (float(ys[fin].min()), float(ys[fin].max())) if fin.any() else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = W - ML - MR, H - MT - MB

    def px(x):
        return ML + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MT + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{ML + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(y0, y1):
        out.append(f'<line x1="{ML - 4}" y1="{py(v):.2f}" x2="{ML}" y2="{py(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{ML - 6}" y="{py(v) + 4:.2f}" text-anchor="end">{_fmt_tick(v)}</text>')
    if logx:
        xt = [float(e) for e in range(math.ceil(x0), math.floor(x1) + 1)]
        labels = [f"1e{int(e)}" for e in xt]
    else:
        xt = _ticks(x0, x1)
        labels = [_fmt_tick(v) for v in xt]
    for v, lab in zip(xt, labels):
        out.append(f'<line x1="{px(v):.2f}" y1="{MT + ph}" x2="{px(v):.2f}" y2="{MT + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{px(v):.2f}" y="{MT + ph + 18}" text-anchor="middle">{lab}</text>')
    out.append(f'<text x="{ML + pw / 2:.1f}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MT + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MT + ph / 2:.1f})">{escape(ylabel)}</text>')
    for k, (label, x, y, dash) in enumerate(series):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if logx:
            x = np.log10(x)
        keep = np.isfinite(y)
        color = _COLORS.get(label, _FALLBACK[k % len(_FALLBACK)])
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[keep], y[keep]))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{pts}"/>')
        ly = MT + 16 + 18 * k
        out.append(f'<line x1="{W - MR + 10}" y1="{ly - 4}" x2="{W - MR + 34}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"{dash_attr}/>')
        out.append(f'<text x="{W - MR + 40}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


_YLABEL = {"regret": "regret", "wealth": "negative cumulative loss", "total_loss": "TotalLoss"}


def metric_svg(records: list[RunRecord], title: str) -> str:
    series = []
    for rec in records:
        rounds = np.arange(1, rec.T + 1)
        series.append((rec.algorithm if rec.run == 0 else f"{rec.algorithm} #{rec.run}",
                       rounds, rec.metric, ""))
        if rec.bound is not None:
            series.append((f"{rec.algorithm} bound", rounds, rec.bound, "6,4"))
    return line_plot_svg(series, title, "round", _YLABEL.get(records[0].metric_name, "metric"))


def prediction_svg(records: list[RunRecord], title: str, u_star: float | None = None) -> str:
    series = [(r.algorithm, np.arange(1, r.T + 1), r.predictions, "") for r in records]
    if u_star is not None:
        T = records[0].T
        series.append(("u*", np.array([1, T]), np.array([u_star, u_star]), "2,3"))
    return line_plot_svg(series, title, "round", "prediction")


def sweep_svg(u_grid, diffs, title: str = "KT regret minus erfi regret") -> str:
    return line_plot_svg([("difference", np.asarray(u_grid), np.asarray(diffs), "")],
                         title, "u*", "regret difference", logx=True)


def emit_results(records: list[RunRecord], out_dir, fmt: str = "csv", stem: str = "results",
                 u_star: float | None = None) -> list[Path]:
    """Write ``<stem>.csv`` or the SVG plots; returns the paths written."""
    if not records:
        raise ValueError("no records to emit")
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {', '.join(FORMATS)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        return [write_csv(records, out_dir / f"{stem}.csv")]
    paths = [out_dir / f"{stem}_metric.svg"]
    paths[0].write_text(metric_svg(records, stem))
    if records[0].metric_name == "regret":
        p = out_dir / f"{stem}_predictions.svg"
        p.write_text(prediction_svg(records, f"{stem} predictions", u_star))
        paths.append(p)
    return paths
