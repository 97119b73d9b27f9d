"""Figure rendering for sweep reports (headless matplotlib, SVG output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_sweep_plot(rows: list[dict], x_col: str, y_cols: list[str], path: str,
                      threshold: float | None = None, title: str = "") -> str | None:
    """Line/scatter of the given columns against one grid axis; a vertical
    line marks the threshold when given.  Returns the output path, or None
    when nothing was plottable.  Never raises on bad data (plotting must not
    block headless runs)."""
    try:
        series = {}
        xs = []
        for row in rows:
            if row.get("error"):
                continue
            x = row.get(x_col)
            if x in (None, ""):
                continue
            xs.append(float(x))
            for col in y_cols:
                val = row.get(col)
                if val in (None, ""):
                    continue
                series.setdefault(col, []).append((float(x), float(val)))
        if not series:
            return None
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for col, pts in series.items():
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                    markersize=3.5, linewidth=1.2, label=col)
        if threshold is not None and xs:
            ax.axvline(threshold, color="0.4", linestyle="--", linewidth=1.0,
                       label="threshold")
        ax.set_xlabel(x_col)
        ax.legend(fontsize=8)
        if title:
            ax.set_title(title, fontsize=10)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg")
        plt.close(fig)
        return path
    except Exception:
        plt.close("all")
        return None
