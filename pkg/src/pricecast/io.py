"""Atomic file output and small CSV helpers shared by the pipeline."""
from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path


def write_text_atomic(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    """Stable text form for CSV cells: ``repr`` for floats, ``str`` otherwise."""
    if isinstance(x, float):
        return repr(float(x))
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return fmt(x.item())
    return "" if x is None else str(x)


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    write_text_atomic(path, buf.getvalue())


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
