"""Evaluation table rendering: CSV plus aligned text."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .harness import EvalRow

COLUMNS = ("layout", "method", "partner_type", "mean", "std", "n")


def rows_to_csv(rows: list[EvalRow]) -> str:
    """Bit-stable CSV with the fixed column order."""
    if not rows:
        raise ValueError("no rows to report")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([r.layout, r.method, r.partner_type, f"{r.mean:.6g}", f"{r.std:.6g}", r.n])
    return buf.getvalue()


def rows_to_text(rows: list[EvalRow]) -> str:
    if not rows:
        raise ValueError("no rows to report")
    table = [COLUMNS] + [
        (r.layout, r.method, r.partner_type, f"{r.mean:.2f}", f"{r.std:.2f}", str(r.n))
        for r in rows
    ]
    widths = [max(len(row[c]) for row in table) for c in range(len(COLUMNS))]
    lines = []
    for i, row in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def emit_report(rows: list[EvalRow], out_csv: str | Path | None = None,
                out_text: str | Path | None = None) -> tuple[str, str]:
    csv_blob = rows_to_csv(rows)
    text_blob = rows_to_text(rows)
    if out_csv is not None:
        Path(out_csv).write_text(csv_blob, encoding="utf-8")
    if out_text is not None:
        Path(out_text).write_text(text_blob, encoding="utf-8")
    return csv_blob, text_blob


def parse_report_csv(blob: str) -> list[EvalRow]:
    reader = csv.reader(io.StringIO(blob))
    header = next(reader)
    if tuple(header) != COLUMNS:
        raise ValueError(f"unexpected report header {header}")
    return [
        EvalRow(row[0], row[1], row[2], float(row[3]), float(row[4]), int(row[5]))
        for row in reader
    ]
