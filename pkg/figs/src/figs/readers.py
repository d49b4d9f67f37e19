"""Parsers for the two table formats the simulation CLI writes.

Snapshot files carry `# key=value` header lines and whitespace-separated
rows whose layout is named by the `fields` header.  CSV files carry
optional `#` headers, then a comma-separated header row and data rows.
Both parse into a Table of float64 columns; every failure message names
the offending file, column or row.
"""

from dataclasses import dataclass

import numpy as np

from .spec import FigureError


@dataclass(frozen=True)
class Table:
    path: str
    headers: dict
    columns: dict  # name -> float64 array, insertion order = file order

    @property
    def names(self) -> tuple:
        return tuple(self.columns)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise FigureError(f"{self.path}: missing column {name!r} "
                              f"(has {', '.join(self.columns)})")
        return self.columns[name]

    def float_header(self, key: str, default: float = None) -> float:
        if key not in self.headers:
            if default is not None:
                return default
            raise FigureError(f"{self.path}: missing header {key!r}")
        try:
            return float(self.headers[key])
        except ValueError:
            raise FigureError(
                f"{self.path}: header {key!r} is not a number")


def read_table(path) -> Table:
    path = str(path)
    headers = {}
    data_lines = []
    try:
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, sep, value = line[1:].partition("=")
                    if sep:
                        headers[key.strip()] = value.strip()
                    continue
                data_lines.append(line)
    except OSError as exc:
        raise FigureError(f"cannot read {path}: {exc}")

    if "fields" in headers:
        names = headers["fields"].split()
        rows = data_lines
        sep = None  # whitespace layout
    else:
        if not data_lines:
            raise FigureError(f"{path}: no header row")
        names = [c.strip() for c in data_lines[0].split(",")]
        rows = data_lines[1:]
        sep = ","
    if len(set(names)) != len(names):
        raise FigureError(f"{path}: duplicate column names")

    columns = {name: [] for name in names}
    for i, line in enumerate(rows):
        parts = line.split(sep)
        if len(parts) != len(names):
            raise FigureError(f"{path}: row {i + 1} has {len(parts)} "
                              f"values, expected {len(names)}")
        for name, tok in zip(names, parts):
            try:
                columns[name].append(float(tok))
            except ValueError:
                raise FigureError(f"{path}: column {name!r} row {i + 1}: "
                                  f"{tok!r} is not a number")
    arrays = {k: np.asarray(v, dtype=np.float64) for k, v in columns.items()}
    return Table(path=path, headers=headers, columns=arrays)
