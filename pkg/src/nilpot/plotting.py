"""Figures for verification reports (optional; needs matplotlib)."""
from __future__ import annotations

from pathlib import Path

from .errors import UsageError


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise UsageError("figures need matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.ticker import MaxNLocator

    return plt, MaxNLocator


def _series(report) -> dict[str, list[int]]:
    w = report.witnesses
    out = {}
    if isinstance(w.get("dims"), dict):
        out["lower central series"] = list(w["dims"].get("gamma", []))
        out["graded components"] = list(w["dims"].get("grad", []))
    if "lcs" in w:
        out["lower central series"] = list(w["lcs"])
    for key in ("graded_ranks", "ranks"):
        if key in w:
            out["graded components"] = list(w[key])
    if "kernel_dims" in w:
        out["tower kernels"] = list(w["kernel_dims"])
    return {k: v for k, v in out.items() if v}


def render_report(report, outdir: str | Path) -> list[Path]:
    """Write one PNG per numeric series in the report plus a step summary."""
    plt, MaxNLocator = _pyplot()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = "".join(ch if ch.isalnum() else "_" for ch in report.check).strip("_")
    written = []

    series = _series(report)
    if series:
        fig, axes = plt.subplots(1, len(series), figsize=(3.6 * len(series), 3.0), squeeze=False)
        for ax, (title, values) in zip(axes[0], series.items()):
            xs = list(range(1, len(values) + 1))
            ax.bar(xs, values, color="0.35", width=0.6)
            for x, v in zip(xs, values):
                ax.annotate(str(v), (x, v), ha="center", va="bottom", fontsize=8)
            ax.set_xticks(xs)
            ax.yaxis.set_major_locator(MaxNLocator(integer=True))
            ax.set_xlabel("index")
            ax.set_title(title, fontsize=9)
            ax.spines[["top", "right"]].set_visible(False)
        axes[0][0].set_ylabel("dimension")
        fig.tight_layout()
        path = outdir / f"{stem}_dims.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if report.steps:
        names = [s["name"] for s in report.steps]
        ok = [s["passed"] for s in report.steps]
        fig, ax = plt.subplots(figsize=(6.0, 0.3 * len(names) + 0.8))
        ys = list(range(len(names)))[::-1]
        ax.barh(ys, [1] * len(names), color=["#4a8" if g else "#c44" for g in ok])
        ax.set_yticks(ys)
        ax.set_yticklabels(names, fontsize=7)
        ax.set_xticks([])
        ax.set_title(f"{report.check}: {'PASS' if report.passed else 'FAIL'}", fontsize=9)
        for side in ("top", "right", "bottom"):
            ax.spines[side].set_visible(False)
        fig.tight_layout()
        path = outdir / f"{stem}_steps.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
