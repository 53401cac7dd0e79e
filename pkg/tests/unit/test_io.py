"""Unit tests for CSV and JSON artifacts."""

import math

import numpy as np
import pytest
from pydantic import BaseModel, ValidationError

from langchain_ampere.errors import EmptyArtifactError
from langchain_ampere.numerics.io import (
    Table,
    dumps,
    format_cell,
    parse_float_list,
    rows_from,
    sha256_file,
    to_jsonable,
    write_csv,
    write_json,
)


class TestFormatCell:
    """Tests for format_cell."""

    @pytest.mark.parametrize(
        "value, expected",
        [
            (None, ""),
            (True, "true"),
            (np.bool_(False), "false"),
            (3, "3"),
            (np.int64(7), "7"),
            (0.1, "0.10000000000000001"),
            (math.nan, "nan"),
            (-math.inf, "-inf"),
            ("disk", "disk"),
        ],
    )
    def test_cells(self, value, expected):
        """Floats keep 17 significant digits; flags and gaps are text."""
        assert format_cell(value) == expected


class TestTable:
    """Tests for Table."""

    def test_append_and_column(self):
        """Rows are stored as plain Python values."""
        table = Table(name="sweep", columns=["h", "ratio"])
        table.append(np.float64(0.5), 2)
        assert table.column("ratio") == [2]
        assert type(table.rows[0][0]) is float

    def test_append_width(self):
        """Every row has one cell per column."""
        table = Table(name="sweep", columns=["h", "ratio"])
        with pytest.raises(ValueError):
            table.append(1.0)

    def test_ragged_rows(self):
        """Ragged rows fail validation."""
        with pytest.raises(ValidationError):
            Table(name="bad", columns=["a", "b"], rows=[[1.0]])


class TestWriters:
    """Tests for write_csv and write_json."""

    def test_csv_layout(self, tmp_path):
        """Header row, LF line ends, 17 digit floats."""
        table = Table(name="t", columns=["x", "ok"], rows=[[0.25, True], [1.0 / 3.0, False]])
        path = write_csv(table, tmp_path / "nested" / "t.csv")
        data = path.read_bytes()
        assert data == b"x,ok\n0.25,true\n0.33333333333333331,false\n"

    def test_csv_is_deterministic(self, tmp_path):
        """Same table, same bytes."""
        table = Table(name="t", columns=["x"], rows=[[0.1], [0.2]])
        a = sha256_file(write_csv(table, tmp_path / "a.csv"))
        b = sha256_file(write_csv(table, tmp_path / "b.csv"))
        assert a == b

    def test_csv_without_columns(self, tmp_path):
        """A table with no columns cannot be written."""
        with pytest.raises(EmptyArtifactError):
            write_csv(Table(name="empty", columns=[]), tmp_path / "e.csv")

    def test_json_sorted_and_plain(self, tmp_path):
        """Keys are sorted; arrays and non-finite floats become JSON values."""
        path = write_json({"b": np.arange(2), "a": math.inf}, tmp_path / "x.json")
        assert path.read_text() == '{\n  "a": "inf",\n  "b": [\n    0,\n    1\n  ]\n}\n'


class TestConversions:
    """Tests for to_jsonable, parse_float_list and rows_from."""

    def test_models_and_scalars(self):
        """Models dump to dicts; numpy scalars to Python numbers."""

        class Row(BaseModel):
            h: float
            n: int

        assert to_jsonable(Row(h=0.5, n=2)) == {"h": 0.5, "n": 2}
        assert to_jsonable((np.float32(0.5), np.int8(1))) == [0.5, 1]
        assert dumps([]) == "[]\n"

    def test_parse_float_list(self):
        """Comma separated text or sequences."""
        assert parse_float_list("0.25, 0.5,") == [0.25, 0.5]
        assert parse_float_list([1, 2]) == [1.0, 2.0]
        assert parse_float_list(None) == []

    def test_rows_from(self):
        """Attributes in column order."""

        class Row(BaseModel):
            h: float
            volume: float

        rows = rows_from([Row(h=0.1, volume=0.6)], ["volume", "h"])
        assert rows == [[0.6, 0.1]]
