"""Text I/O with transparent, byte-deterministic gzip support.

Paths ending in .gz are compressed with mtime pinned to 0 and no embedded
filename, so identical content always yields identical bytes.
"""

from __future__ import annotations

import gzip
import io
from contextlib import contextmanager


@contextmanager
def open_text(path, mode: str):
    if mode not in ("w", "r"):
        raise ValueError("mode must be 'w' or 'r'")
    p = str(path)
    if p.endswith(".gz"):
        if mode == "w":
            raw = open(p, "wb")
            gz = gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0)
            wrapper = io.TextIOWrapper(gz, encoding="utf-8")
            try:
                yield wrapper
            finally:
                wrapper.close()  # flushes and writes the gzip trailer
                raw.close()
        else:
            with gzip.open(p, "rt", encoding="utf-8") as fh:
                yield fh
    else:
        with open(p, mode, encoding="utf-8") as fh:
            yield fh
