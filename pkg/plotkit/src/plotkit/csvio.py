"""CSV log reading against the simulator's published column schemas.

The simulator writes plain comma-separated logs with a fixed header per
log kind; empty fields mark absent measurements and parse to NaN. A
missing required column is a hard error naming the column.
"""

import csv
import math
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input CSV does not carry the columns its figure kind requires."""


def read_columns(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row")
        missing = [name for name in required if name not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing required column '{missing[0]}' "
                f"(header has {header})"
            )
        index = {name: header.index(name) for name in required}
        rows = {name: [] for name in required}
        for lineno, line in enumerate(reader, start=2):
            for name, col in index.items():
                try:
                    cell = line[col]
                    value = float(cell) if cell != "" else math.nan
                except (IndexError, ValueError) as exc:
                    raise SchemaError(
                        f"{path}: line {lineno}: bad value for column '{name}'"
                    ) from exc
                rows[name].append(value)
    return {name: np.asarray(values) for name, values in rows.items()}
