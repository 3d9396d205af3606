# src/cli/output.py
"""CSV and JSON writers. Output bytes depend only on the table and its metadata."""
import json
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass

from src import __version__

logger = logging.getLogger('tmss')

TOOL_NAME = "tmss"


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: tuple


def format_value(value):
    """17 significant digits for floats, so values round-trip exactly."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def full_metadata(meta):
    return dict(meta, tool=TOOL_NAME, version=__version__)


def render_csv(table, meta):
    lines = []
    for key, value in sorted(full_metadata(meta).items()):
        lines.append(f"# {key} = {json.dumps(_json_safe(value), sort_keys=True)}")
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def render_json(table, meta):
    data = [dict(zip(table.columns, row)) for row in table.rows]
    document = {"meta": full_metadata(meta), "data": data}
    return json.dumps(_json_safe(document), sort_keys=True, indent=2) + "\n"


def render(table, meta, fmt):
    if fmt == "json":
        return render_json(table, meta)
    return render_csv(table, meta)


@contextmanager
def _open_output(out):
    if out in (None, "", "-"):
        yield sys.stdout
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            yield handle


def write_output(table, meta, fmt, out):
    """Writes the rendered table to a file path, or stdout for '-'."""
    text = render(table, meta, fmt)
    with _open_output(out) as handle:
        handle.write(text)
    logger.info(f"Wrote {len(table.rows)} rows as {fmt} to {out if out not in (None, '', '-') else 'stdout'}")
    return text
