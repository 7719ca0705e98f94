# -*- coding: utf-8 -*-
#
# SPDX-FileCopyrightText: © 2024 The trapkinetics Authors
# SPDX-License-Identifier: MIT
"""Artifact serialization: versioned CSV tables and canonical JSON.

Every CSV file starts with a comment line naming its schema and version, e.g.

    # trapkinetics:fields v1

followed by a header row. Floats are written with repr() so that the same
values always produce the same bytes.
"""

import csv
import io
import json
import pathlib
from collections.abc import Iterable, Mapping, Sequence
from typing import Any, TextIO, Union

import numpy as np

SCHEMA_VERSION = 1

PathOrStream = Union[str, pathlib.Path, TextIO]


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def schema_line(schema: str) -> str:
    return f"# trapkinetics:{schema} v{SCHEMA_VERSION}"


def format_csv(
    schema: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> str:
    """Renders a versioned CSV table as a string."""
    buffer = io.StringIO()
    buffer.write(schema_line(schema) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def write_csv(
    target: PathOrStream,
    schema: str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
) -> None:
    text = format_csv(schema, header, rows)
    if isinstance(target, (str, pathlib.Path)):
        pathlib.Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)


def read_csv(source: PathOrStream) -> tuple[str, list[dict[str, str]]]:
    """Reads a versioned CSV table.

    Returns:
      The schema name and the rows as dictionaries keyed by the header.
    """
    if isinstance(source, (str, pathlib.Path)):
        text = pathlib.Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    first, _, body = text.partition("\n")
    if not first.startswith("# trapkinetics:"):
        raise ValueError(f"Missing schema line: {first!r}")
    schema = first[len("# trapkinetics:") :].split()[0]
    return schema, list(csv.DictReader(io.StringIO(body)))


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, pathlib.Path):
        return str(value)
    return value


def canonical_json(value: Any, indent: Union[int, None] = None) -> str:
    """JSON with sorted keys; without indent it has no insignificant whitespace."""
    separators = (",", ":") if indent is None else (",", ": ")
    return json.dumps(
        _jsonable(value), sort_keys=True, indent=indent, separators=separators
    )


def write_json(path: Union[str, pathlib.Path], value: Any) -> None:
    pathlib.Path(path).write_text(canonical_json(value, indent=2) + "\n", "utf-8")


def write_json_lines(path: Union[str, pathlib.Path], records: Iterable[Any]) -> None:
    lines = [canonical_json(record) for record in records]
    pathlib.Path(path).write_text("".join(line + "\n" for line in lines), "utf-8")


def read_json(path: Union[str, pathlib.Path]) -> Any:
    return json.loads(pathlib.Path(path).read_text(encoding="utf-8"))
