"""Matplotlib figure rendering for score reports.

Figures are written as PNG files next to the delimited report output when
the CLI is invoked with --figures.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluate import ComparisonTable, OptionReport  # noqa: E402


def save_comparison_figures(table: ComparisonTable, outdir: str | Path) -> list[Path]:
    """Render aggregate and per-signal comparison figures; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    options = [rep.option for rep in table.reports]
    x = range(len(options))

    fig, (ax_bits, ax_norm) = plt.subplots(1, 2, figsize=(10, 4))
    bar_w = 0.4
    ax_bits.bar([i - bar_w / 2 for i in x],
                [float(rep.investment) for rep in table.reports],
                width=bar_w, label="investment")
    ax_bits.bar([i + bar_w / 2 for i in x],
                [float(rep.output_score) for rep in table.reports],
                width=bar_w, label="output score")
    ax_bits.set_xticks(list(x))
    ax_bits.set_xticklabels(options, rotation=30, ha="right")
    ax_bits.set_ylabel("bits")
    ax_bits.legend()

    ax_norm.bar(list(x), [float(rep.normalized) for rep in table.reports])
    ax_norm.set_xticks(list(x))
    ax_norm.set_xticklabels(options, rotation=30, ha="right")
    ax_norm.set_ylim(0.0, 1.05)
    ax_norm.set_ylabel("normalized score")

    fig.tight_layout()
    path = outdir / "comparison.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    signals = table.signal_names()
    grid = [[float(rep.row(name).out_bits / rep.row(name).width)
             for rep in table.reports]
            for name in signals]
    fig, ax = plt.subplots(figsize=(2 + 0.8 * len(options),
                                    1 + 0.28 * len(signals)))
    image = ax.imshow(grid, aspect="auto", vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(len(options)))
    ax.set_xticklabels(options, rotation=30, ha="right")
    ax.set_yticks(range(len(signals)))
    ax.set_yticklabels(signals, fontsize=8)
    fig.colorbar(image, ax=ax, label="per-bit controllability")
    fig.tight_layout()
    path = outdir / "per_signal.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def save_option_figure(report: OptionReport, outdir: str | Path) -> Path:
    """Render one option's per-signal controllability as a horizontal bar chart."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    names = [row.name for row in report.rows]
    values = [float(row.out_bits / row.width) for row in report.rows]
    fig, ax = plt.subplots(figsize=(6, 1 + 0.28 * len(names)))
    ax.barh(range(len(names)), values)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlim(0.0, 1.05)
    ax.set_xlabel("per-bit controllability")
    ax.set_title(f"option {report.option}")
    fig.tight_layout()
    path = outdir / f"option_{report.option}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
