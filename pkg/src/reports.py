# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Run reports and their table, CSV and JSON-lines renderings.

Every format shares the column set ``COLUMNS``. Floats are written with 17
significant digits so that reruns diff byte for byte.
"""

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from config import OutputFormat

logger = logging.getLogger(__name__)

COLUMNS = (
    "command",
    "cell",
    "item",
    "p",
    "L",
    "alpha",
    "N",
    "n",
    "value",
    "margin",
    "residual",
    "iterations",
    "verdict",
)

Cell = str | int | float | bool | None


@dataclass
class Report:
    """Rows produced by a run plus its findings and failed assertions.

    Findings are expected outcomes worth recording (an inequality failing where
    theory predicts it); failures are violated verdicts and set a nonzero exit status.
    """

    command: str
    rows: list[dict[str, Cell]] = field(default_factory=list)
    findings: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True when no verdict failed."""
        return not self.failures

    def add(self, **values: Cell) -> None:
        """Append a row holding every column; missing ones are None, unknown ones rejected."""
        unknown = set(values) - set(COLUMNS)
        if unknown:
            raise KeyError(f"unknown report columns: {sorted(unknown)}")
        # numpy scalars to plain Python
        plain = {k: getattr(v, "item", lambda v=v: v)() for k, v in values.items()}
        row: dict[str, Cell] = dict.fromkeys(COLUMNS)
        row.update(command=self.command, **plain)
        self.rows.append(row)

    def fail(self, message: str) -> None:
        """Record a failed verdict."""
        logger.error("%s: %s", self.command, message)
        self.failures.append(message)

    def note(self, message: str) -> None:
        """Record an expected finding."""
        logger.info("%s: %s", self.command, message)
        self.findings.append(message)


def format_cell(value: Cell) -> str:
    """Text form of one cell: 17 significant digits for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_cell(value: Cell) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return json.dumps(format(value, ".17g"))
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    return json.dumps(value)


def render_csv(report: Report) -> str:
    """CSV with a header row of ``COLUMNS``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in report.rows:
        writer.writerow([format_cell(row.get(c)) for c in COLUMNS])
    return buf.getvalue()


def render_jsonl(report: Report) -> str:
    """One JSON object per row, keys in ``COLUMNS`` order; non-finite floats as strings."""
    lines = []
    for row in report.rows:
        body = ", ".join(f"{json.dumps(c)}: {_json_cell(row.get(c))}" for c in COLUMNS)
        lines.append("{" + body + "}")
    return "".join(line + "\n" for line in lines)


def render_table(report: Report) -> str:
    """Fixed-width table of the non-empty columns, followed by findings and failures."""
    used = [c for c in COLUMNS if any(row.get(c) is not None for row in report.rows)]
    cells = [[format_cell(row.get(c)) for c in used] for row in report.rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(used)]
    out = ["  ".join(c.ljust(wd) for c, wd in zip(used, widths, strict=True)).rstrip()]
    for r in cells:
        out.append("  ".join(v.ljust(wd) for v, wd in zip(r, widths, strict=True)).rstrip())
    out += [f"finding: {f}" for f in report.findings]
    out += [f"FAILED: {f}" for f in report.failures]
    return "\n".join(out) + "\n"


RENDERERS = {
    OutputFormat.TABLE: render_table,
    OutputFormat.CSV: render_csv,
    OutputFormat.JSONL: render_jsonl,
}


def write_report(report: Report, fmt: OutputFormat, path: str | Path | None) -> None:
    """Render ``report`` and write it to ``path``, or to stdout when ``path`` is None.

    Raises:
        OSError: when the file cannot be written.
    """
    text = RENDERERS[OutputFormat(fmt)](report)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        logger.error("Failed to write report to %s: %s", path, e)
        raise
    logger.info("Wrote %d rows (%s) to %s", len(report.rows), OutputFormat(fmt).value, path)
