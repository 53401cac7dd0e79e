"""Deterministic CSV and JSON artifacts."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from langchain_ampere.errors import EmptyArtifactError

Cell = Union[float, int, str, bool, None]


def format_cell(value: Any) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(value)


class Table(BaseModel):
    """Named rectangular table written as one CSV file."""

    name: str
    columns: list[str]
    rows: list[list[Cell]] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_width(self) -> "Table":
        width = len(self.columns)
        for k, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(
                    f"Row {k} of table '{self.name}' has {len(row)} cells, expected {width}."
                )
        return self

    def append(self, *cells: Any) -> None:
        if len(cells) != len(self.columns):
            raise ValueError(f"Table '{self.name}' expects {len(self.columns)} cells.")
        self.rows.append([_plain(c) for c in cells])

    def column(self, name: str) -> list[Cell]:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]


def _plain(value: Any) -> Cell:
    if isinstance(value, np.generic):
        return value.item()  # type: ignore[no-any-return]
    return value  # type: ignore[no-any-return]


def write_csv(table: Table, path: Union[str, Path]) -> Path:
    """Comma separated, LF line ends, header row.

    Raises:
        EmptyArtifactError: If the table has no columns.
    """
    if not table.columns:
        raise EmptyArtifactError(f"Table '{table.name}' has no columns.")
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_cell(c) for c in row])
    return target


def to_jsonable(value: Any) -> Any:
    """Numpy arrays and scalars to lists and Python numbers; non-finite floats to strings."""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return format_cell(value)
    return value


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_json(payload: Any, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dumps(payload), encoding="utf-8")
    return target


def sha256_file(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def parse_float_list(text: Union[str, Sequence[float], None]) -> list[float]:
    """``"0.25,0.5"`` or a sequence to a list of floats."""
    if text is None:
        return []
    if isinstance(text, str):
        return [float(t) for t in text.split(",") if t.strip()]
    return [float(t) for t in text]


def rows_from(records: Iterable[BaseModel], columns: Sequence[str]) -> list[list[Cell]]:
    return [[_plain(getattr(r, c)) for c in columns] for r in records]
