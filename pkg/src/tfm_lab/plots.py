"""Figure rendering for the report paths (headless matplotlib, PNG files)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .report import ReportRow
from .sim import Trace

_VERDICT_COLOR = {"all-pass": "#2e7d32", "violated": "#c62828", "conditional": "#f9a825"}


def render_trace(trace: Trace, target_size: int, path: str | Path) -> Path:
    """Two-panel trace figure: base fee over height, block sizes vs target."""
    heights = [r.height for r in trace.rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    ax1.plot(heights, [r.base_fee for r in trace.rows], lw=1.2, color="#1565c0")
    ax1.set_ylabel("base fee")
    ax1.set_title("base fee and block sizes")
    ax2.plot(heights, [r.block_size for r in trace.rows], lw=0.8, color="#6a1b9a",
             alpha=0.8, label="block size")
    ax2.axhline(target_size, color="#2e7d32", ls="--", lw=1, label="target")
    ax2.axhline(2 * target_size, color="#c62828", ls=":", lw=1, label="max")
    ax2.set_xlabel("height")
    ax2.set_ylabel("size")
    ax2.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def render_report_card(rows: Sequence[ReportRow], path: str | Path) -> Path:
    """Grid figure of the report card, one cell per (mechanism, property)."""
    mechs = list(dict.fromkeys(r.mechanism for r in rows))
    props = list(dict.fromkeys(r.property for r in rows))
    fig, ax = plt.subplots(figsize=(1.0 + 2.2 * len(props), 0.8 + 0.55 * len(mechs)))
    ax.set_xlim(0, len(props))
    ax.set_ylim(0, len(mechs))
    by_cell = {(r.mechanism, r.property): r for r in rows}
    for yi, m in enumerate(mechs):
        for xi, p in enumerate(props):
            r = by_cell[(m, p)]
            color = _VERDICT_COLOR.get(r.verdict, "#9e9e9e")
            y = len(mechs) - 1 - yi
            ax.add_patch(plt.Rectangle((xi, y), 1, 1, facecolor=color,
                                       alpha=0.75 if r.matches else 0.35,
                                       edgecolor="white"))
            mark = "" if r.matches else "  (!)"
            ax.text(xi + 0.5, y + 0.5, f"{r.verdict}\nexpected: {r.expected}{mark}",
                    ha="center", va="center", fontsize=8, color="white")
    ax.set_xticks([i + 0.5 for i in range(len(props))])
    ax.set_xticklabels([p.upper() for p in props])
    ax.set_yticks([len(mechs) - 1 - i + 0.5 for i in range(len(mechs))])
    ax.set_yticklabels(mechs)
    ax.tick_params(length=0)
    for spine in ax.spines.values():
        spine.set_visible(False)
    ax.set_title("incentive report card")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
