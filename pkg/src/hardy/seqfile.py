"""Reading and writing sequences as JSON or CSV.

JSON: ``{"schema_version": 1, "entries": [[n, re, im], ...]}`` or a bare
list of rows.  CSV: header ``n,re,im`` then one row per stored index.
Optional ``"v"`` and ``"phi"`` tables (indexed from 0) in the JSON document
feed the custom weight family.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import SequenceParseError
from .sequence import FinSeq

SCHEMA_VERSION = 1
CSV_HEADER = ("n", "re", "im")


def _index(raw, line, field="n") -> int:
    if isinstance(raw, bool):
        raise SequenceParseError(f"index must be an integer, got {raw!r}", line, field)
    try:
        val = float(raw)
    except (TypeError, ValueError):
        raise SequenceParseError(f"index must be an integer, got {raw!r}", line, field) from None
    if not math.isfinite(val) or val != int(val):
        raise SequenceParseError(f"index must be an integer, got {raw!r}", line, field)
    return int(val)


def _real(raw, line, field) -> float:
    if isinstance(raw, bool):
        raise SequenceParseError(f"{field} must be a number, got {raw!r}", line, field)
    try:
        val = float(raw)
    except (TypeError, ValueError):
        raise SequenceParseError(f"{field} must be a number, got {raw!r}", line, field) from None
    if not math.isfinite(val):
        raise SequenceParseError(f"{field} must be finite, got {raw!r}", line, field)
    return val


def _build(rows) -> FinSeq:
    """``rows`` are ``(line, n, re, im)``; sorts by ``n`` and rejects 0 and repeats."""
    seen = {}
    for line, n, re, im in rows:
        if n == 0:
            raise SequenceParseError("index 0 is not allowed: u(0) = 0 by definition", line, "n")
        if n < 0:
            raise SequenceParseError(f"negative index {n}", line, "n")
        if n in seen:
            raise SequenceParseError(f"duplicate index {n} (first at row {seen[n][0]})", line, "n")
        seen[n] = (line, complex(re, im))
    keys = sorted(seen)
    return FinSeq(np.array(keys, dtype=np.int64),
                  np.array([seen[k][1] for k in keys], dtype=complex))


def _json_rows(entries):
    if not isinstance(entries, list):
        raise SequenceParseError("entries must be a list")
    for i, row in enumerate(entries):
        if not isinstance(row, (list, tuple)) or len(row) not in (2, 3):
            raise SequenceParseError("each entry must be [n, re, im] or [n, re]", i)
        n = _index(row[0], i)
        re = _real(row[1], i, "re")
        im = _real(row[2], i, "im") if len(row) == 3 else 0.0
        yield i, n, re, im


def parse_json(text: str):
    """Return ``(FinSeq, extras)`` where ``extras`` holds any ``v``/``phi`` tables."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SequenceParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    extras = {}
    if isinstance(doc, dict):
        version = doc.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise SequenceParseError(f"unsupported schema_version {version!r}", None,
                                     "schema_version")
        if "entries" not in doc:
            raise SequenceParseError("missing 'entries'", None, "entries")
        entries = doc["entries"]
        for key in ("v", "phi"):
            if key in doc:
                table = doc[key]
                if not isinstance(table, list):
                    raise SequenceParseError(f"'{key}' must be a list", None, key)
                extras[key] = np.array([_real(x, i, key) for i, x in enumerate(table)])
    else:
        entries = doc
    return _build(_json_rows(entries)), extras


def parse_csv(text: str) -> FinSeq:
    reader = csv.reader(io.StringIO(text))
    rows = []
    header = None
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if header is None:
            header = tuple(c.strip().lower() for c in row)
            if header != CSV_HEADER:
                raise SequenceParseError(f"CSV header must be n,re,im, got {','.join(row)}", line)
            continue
        if len(row) != 3:
            raise SequenceParseError(f"expected 3 fields, got {len(row)}", line)
        rows.append((line, _index(row[0].strip(), line),
                     _real(row[1].strip(), line, "re"), _real(row[2].strip(), line, "im")))
    if header is None:
        raise SequenceParseError("empty CSV file: header n,re,im required", 1)
    return _build(rows)


def load_sequence_with_extras(path):
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return parse_csv(text), {}
    return parse_json(text)


def load_sequence(path) -> FinSeq:
    """Read a sequence file; the format follows the extension (``.csv`` or JSON)."""
    return load_sequence_with_extras(path)[0]


def dump_json(u: FinSeq) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "entries": [list(r) for r in u.entries()]}
    return json.dumps(doc, sort_keys=True) + "\n"


def dump_csv(u: FinSeq) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for n, re, im in u.entries():
        w.writerow([n, repr(re), repr(im)])
    return buf.getvalue()


def save_sequence(u: FinSeq, path) -> None:
    path = Path(path)
    text = dump_csv(u) if path.suffix.lower() == ".csv" else dump_json(u)
    path.write_text(text)
