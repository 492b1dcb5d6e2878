"""CSV export of spectra, plus an optional quick-look plot."""

from __future__ import annotations

import csv
import io
import math

import numpy as np

SIG_DIGITS = 12


def fmt(x) -> str:
    """Fixed 12-significant-digit formatting so identical runs give identical bytes."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, f".{SIG_DIGITS}g")
    return "0" if s == "-0" else s


def write_csv(stream, columns: list, metadata: dict) -> None:
    """Write ``#`` metadata lines, one header row of ``name[unit]`` and the data rows.

    ``columns`` is a list of ``(name, unit, values)``; ``unit`` may be empty.
    """
    for k, v in metadata.items():
        stream.write(f"# {k}: {v}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow([f"{n}[{u}]" if u else n for n, u, _ in columns])
    n = len(columns[0][2]) if columns else 0
    for i in range(n):
        w.writerow([fmt(col[2][i]) for col in columns])


def csv_text(columns: list, metadata: dict) -> str:
    buf = io.StringIO()
    write_csv(buf, columns, metadata)
    return buf.getvalue()


def read_csv(path_or_text):
    """Parse a file written by :func:`write_csv` back into ``(metadata, header, rows)``."""
    text = path_or_text
    if "\n" not in str(path_or_text):
        with open(path_or_text, encoding="utf-8") as f:
            text = f.read()
    meta, lines = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        elif line:
            lines.append(line)
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]


def plot_spectra(path, freq, curves: dict, title: str = "", ylabel: str = "noise / vacuum") -> None:
    """Log-log quick-look plot of named curves; needs the optional matplotlib extra."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("plotting needs matplotlib (pip install 'quadnet[plot]')") from exc
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    freq = np.asarray(freq, dtype=float)
    for label, y in curves.items():
        y = np.asarray(y, dtype=float)
        if np.all(~np.isfinite(y) | (y <= 0)):
            continue
        ax.loglog(freq, y, label=label)
    ax.axhline(1.0, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
