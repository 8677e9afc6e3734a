"""Deterministic SVG charts (no timestamps, fixed element ids)."""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import write_text_atomic  # noqa: E402

_RC = {"svg.hashsalt": "pricecast", "svg.fonttype": "none", "font.size": 9}


def _save(fig, path):
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    write_text_atomic(path, buf.getvalue())


def _thin_ticks(ax, dates, max_ticks=10):
    step = max(1, len(dates) // max_ticks)
    ticks = list(range(0, len(dates), step))
    ax.set_xticks(ticks)
    ax.set_xticklabels([dates[i] for i in ticks], rotation=45, ha="right")


def forecast_chart(path, dates, actual, forecasts: dict, title: str):
    """Actual vs. each forecast over a shared date axis."""
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(8, 4))
        x = range(len(dates))
        ax.plot(x, actual, color="black", lw=1.4, label="actual")
        for name, values in forecasts.items():
            ax.plot(x, values, lw=1.0, label=name)
        _thin_ticks(ax, list(dates))
        ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        _save(fig, path)


def training_chart(path, train_dates, train_actual, train_fit, history,
                   test_dates, test_actual, test_pred, title: str):
    """Three panels: fit on training data, loss per epoch, test predictions."""
    with matplotlib.rc_context(_RC):
        fig = plt.figure(figsize=(10, 7))
        ax1 = fig.add_subplot(2, 2, 1)
        ax1.plot(range(len(train_dates)), train_actual, color="black", lw=1.0, label="actual")
        ax1.plot(range(len(train_dates)), train_fit, lw=1.0, label="fitted")
        _thin_ticks(ax1, list(train_dates), 6)
        ax1.set_title("training fit")
        ax1.legend(loc="best")
        ax2 = fig.add_subplot(2, 2, 2)
        ax2.plot(range(1, len(history) + 1), history, marker=".", lw=1.0)
        ax2.set_xlabel("epoch")
        ax2.set_ylabel("training RMSE (scaled)")
        ax2.set_title("loss")
        ax3 = fig.add_subplot(2, 1, 2)
        ax3.plot(range(len(test_dates)), test_actual, color="black", lw=1.2, label="actual")
        ax3.plot(range(len(test_dates)), test_pred, lw=1.0, label="predicted")
        _thin_ticks(ax3, list(test_dates))
        ax3.set_title("test set")
        ax3.legend(loc="best")
        fig.suptitle(title)
        fig.tight_layout()
        _save(fig, path)
