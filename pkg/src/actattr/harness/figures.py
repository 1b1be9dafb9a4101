"""Grouped bar chart of pooled accuracies, written to an image file."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from actattr.harness.methods import MethodResult  # noqa: E402
from actattr.harness.report import methods_and_tasks, pool  # noqa: E402


def accuracy_figure(results: Sequence[MethodResult], path: str | Path) -> Path:
    cells = pool(results)
    methods, tasks = methods_and_tasks(cells)
    index = {(c.method, c.task): c.accuracy for c in cells}
    width = 0.8 / max(len(methods), 1)
    xs = np.arange(len(tasks))
    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(tasks), 3.4))
    for i, m in enumerate(methods):
        heights = [index.get((m, t), 0.0) for t in tasks]
        bars = ax.bar(xs + (i - (len(methods) - 1) / 2) * width, heights, width, label=m)
        ax.bar_label(bars, fmt="%.2f", fontsize=7, padding=1)
    ax.set_xticks(xs, tasks)
    ax.set_ylim(0, 1.1)
    ax.set_ylabel("accuracy")
    ax.legend(fontsize=7, ncols=2, loc="upper center", bbox_to_anchor=(0.5, -0.12), frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
