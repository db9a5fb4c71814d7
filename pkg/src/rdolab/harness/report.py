"""Metric tables (CSV) and RL2E-vs-resolution figures (SVG via matplotlib)."""
from __future__ import annotations

import csv
import os
from collections import OrderedDict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .training import MetricRecord  # noqa: E402

HEADER = ("experiment", "model", "train_res", "test_res", "rl2e", "n", "seconds")

# fixed element ids and no timestamp so identical input gives identical bytes
_SVG_RC = {
    "svg.hashsalt": "rdolab",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (5.0, 3.4),
}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_metrics_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for r in records:
            w.writerow([_cell(getattr(r, k)) for k in HEADER])


def _opt(kind, raw):
    return None if raw == "" else kind(raw)


def read_metrics_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [
        MetricRecord(
            r["experiment"], r["model"], _opt(int, r["train_res"]), int(r["test_res"]),
            _opt(float, r["rl2e"]), int(r["n"]), _opt(float, r["seconds"]),
        )
        for r in rows
    ]


def plot_rl2e(records, path, title=None):
    """One polyline per model of RL2E (%) against test resolution.

    Not-applicable cells are left out of the polylines.  Each series is an SVG
    group with id ``series-<model>``.
    """
    series = OrderedDict()
    for r in records:
        series.setdefault(r.model, [])
        if r.rl2e is not None:
            series[r.model].append((r.test_res, 100.0 * r.rl2e))
    resolutions = sorted({r.test_res for r in records})
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots()
        for model, pts in series.items():
            pts.sort()
            if not pts:
                continue
            xs, ys = zip(*pts)
            (line,) = ax.plot(xs, ys, marker="o", label=model)
            line.set_gid(f"series-{model}")
        ax.set_xlabel("test resolution")
        ax.set_ylabel("RL2E (%)")
        ax.set_xticks(resolutions)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def report(records, out_dir):
    """Write ``metrics.csv`` and one ``rl2e_<experiment>.svg`` per experiment."""
    if not records:
        raise ValueError("no metric records to report")
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "metrics.csv")]
    write_metrics_csv(records, paths[0])
    by_exp = OrderedDict()
    for r in records:
        by_exp.setdefault(r.experiment, []).append(r)
    for exp, recs in by_exp.items():
        train_res = sorted({r.train_res for r in recs if r.train_res is not None})
        title = f"{exp} (trained at {', '.join(map(str, train_res))})" if train_res else exp
        path = os.path.join(out_dir, f"rl2e_{exp}.svg")
        plot_rl2e(recs, path, title)
        paths.append(path)
    return paths
