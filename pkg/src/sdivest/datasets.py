"""Dataset ingestion and embedded fixtures.

Two file formats are accepted:

* CSV with header ``x,count`` and one record per support point;
* JSON ``{"name": str, "cells": [{"x": int, "count": int}, ...]}``.

Support points must be unique non-negative integers, counts positive.
"""
from __future__ import annotations

import csv
import json
import os

from .exceptions import (
    DatasetParseError,
    DuplicateSupportPointError,
    NonPositiveCountError,
)
from .frequency import FrequencyTable

# Chemical-mutagenicity screen: counts of affected daughters per exposed
# male fly; one extreme outlier at x = 91 and a long run of empty cells.
FIXTURES = {
    "drosophila-day177": {0: 23, 1: 7, 2: 3, 91: 1},
}
_FIXTURE_ALIASES = {"drosophila": "drosophila-day177"}


def fixture_names():
    return sorted(FIXTURES)


def get_fixture(name) -> FrequencyTable:
    """Embedded named dataset; accepts the short alias forms too."""
    key = _FIXTURE_ALIASES.get(name, name)
    if key not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {fixture_names()}")
    return FrequencyTable(FIXTURES[key])


def _check_record(x, count, seen, path, line):
    try:
        xi = int(x)
        ci = int(count)
    except (TypeError, ValueError):
        raise DatasetParseError(f"non-integer record (x={x!r}, count={count!r})",
                                path=path, line=line) from None
    if xi < 0:
        raise DatasetParseError(f"negative support point {xi}", path=path, line=line)
    if ci <= 0:
        raise NonPositiveCountError(f"count for x={xi} must be positive, got {ci}",
                                    path=path, line=line)
    if xi in seen:
        raise DuplicateSupportPointError(f"duplicate support point {xi}",
                                         path=path, line=line)
    seen[xi] = ci


def _load_csv(path) -> FrequencyTable:
    seen = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["x", "count"]:
            raise DatasetParseError('expected header "x,count"', path=path, line=1)
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise DatasetParseError(f"expected two fields, got {row!r}",
                                        path=path, line=line_no)
            _check_record(row[0].strip(), row[1].strip(), seen, path, line_no)
    if not seen:
        raise DatasetParseError("no records in file", path=path)
    return FrequencyTable(seen)


def _load_json(path) -> FrequencyTable:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as err:
            raise DatasetParseError(f"invalid JSON: {err}", path=path,
                                    line=err.lineno) from None
    cells = payload.get("cells") if isinstance(payload, dict) else None
    if not isinstance(cells, list) or not cells:
        raise DatasetParseError('expected {"cells": [{"x": ..., "count": ...}]}',
                                path=path)
    seen = {}
    for i, cell in enumerate(cells):
        if not isinstance(cell, dict) or "x" not in cell or "count" not in cell:
            raise DatasetParseError(f"cell #{i} must carry x and count", path=path)
        _check_record(cell["x"], cell["count"], seen, path, None)
    return FrequencyTable(seen)


def load_dataset(path, format=None) -> FrequencyTable:
    """Read a dataset file into a frequency table.

    ``format`` is "csv" or "json"; inferred from the extension when omitted.
    """
    if format is None:
        ext = os.path.splitext(str(path))[1].lower()
        format = {"csv": "csv", "json": "json"}.get(ext.lstrip("."))
        if format is None:
            raise DatasetParseError(f"cannot infer format from {path!r};"
                                    " pass format='csv' or 'json'", path=path)
    if format == "csv":
        return _load_csv(path)
    if format == "json":
        return _load_json(path)
    raise ValueError(f"unknown format {format!r}")


def resolve_dataset(spec) -> tuple:
    """Fixture name or file path -> (name, FrequencyTable)."""
    key = _FIXTURE_ALIASES.get(spec, spec)
    if key in FIXTURES:
        return key, get_fixture(key)
    return os.path.basename(str(spec)), load_dataset(spec)
