"""Minimal CSV reading for qtherm output files.

Columns come back as float arrays when every entry parses as a number,
otherwise as lists of strings (e.g. the 'which' column of band files).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class MissingColumnError(Exception):
    """A renderer asked for a column the CSV does not have."""


def read_csv(path) -> dict:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    if not body:
        raise ValueError(f"{path} has a header but no data rows")
    table = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in body]
        try:
            table[name] = np.array([float(v) for v in raw])
        except ValueError:
            table[name] = raw
    return table


def columns(table: dict, path, *names):
    """Fetch columns by name, failing with the offending column named."""
    out = []
    for name in names:
        if name not in table:
            raise MissingColumnError(f"{path} has no column '{name}' "
                                     f"(found: {', '.join(table)})")
        out.append(table[name])
    return out
