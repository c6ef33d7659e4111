"""Tabular chain displays and score renderings.

The chain table puts the document title in column 0 and one body paragraph
per following column; each row is one coreference chain, so every phrase in
a row names the same entity.  Reading across a row makes annotation slips
easy to spot.
"""

from __future__ import annotations

import html
from dataclasses import dataclass

from .chains import ChainSet
from .score import ScoreReport
from .sgml import AnnotatedDocument, Zone, ZoneKind, mention_text

CELL_TRUNCATE = 60


@dataclass(frozen=True)
class ChainTable:
    doc_id: str
    # (ordinal, label); ordinal 0 is always the title column
    columns: tuple[tuple[int, str], ...]
    # per chain: (chain_id, cells aligned with columns, each a tuple of texts)
    rows: tuple[tuple[str, tuple[tuple[str, ...], ...]], ...]

    def mention_count(self) -> int:
        return sum(len(cell) for _, cells in self.rows for cell in cells)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "columns": [{"ordinal": o, "label": lbl} for o, lbl in self.columns],
            "rows": [{"chain_id": cid, "cells": [list(c) for c in cells]}
                     for cid, cells in self.rows],
        }


def _column_of(zones: tuple[Zone, ...], offset: int) -> int:
    for z in zones:
        if z.start <= offset < z.end:
            return z.ordinal
    return 1  # degenerate zoning: everything counts as the first paragraph


def chain_table(doc: AnnotatedDocument, chain_set: ChainSet,
                include_singletons: bool = False) -> ChainTable:
    """Arrange chain members into title/paragraph columns in offset order."""
    by_id = {m.id: m for m in doc.mentions}
    paragraph_ordinals = [z.ordinal for z in doc.zones if z.kind is ZoneKind.PARAGRAPH]
    columns = [(0, "TITLE")] + [(o, f"P{o}") for o in paragraph_ordinals]
    ordinal_index = {o: i for i, (o, _) in enumerate(columns)}

    def row_for(chain_id: str, member_ids) -> tuple[str, tuple[tuple[str, ...], ...]]:
        cells: list[list[str]] = [[] for _ in columns]
        members = sorted(member_ids, key=lambda i: (by_id[i].start, by_id[i].end, i))
        for mid in members:
            col = ordinal_index.get(_column_of(doc.zones, by_id[mid].start), len(columns) - 1)
            cells[col].append(mention_text(doc, by_id[mid]))
        return (chain_id, tuple(tuple(c) for c in cells))

    rows = [row_for(c.chain_id, c.member_ids) for c in chain_set.chains]
    if include_singletons:
        rows.extend(row_for(f"singleton-{mid}", [mid]) for mid in chain_set.singletons)
    return ChainTable(doc_id=doc.doc_id, columns=tuple(columns), rows=tuple(rows))


def _cell_html(texts: tuple[str, ...]) -> str:
    shown = []
    for t in texts:
        if len(t) > CELL_TRUNCATE:
            shown.append('<span title="{}">{}…</span>'.format(
                html.escape(t, quote=True), html.escape(t[:CELL_TRUNCATE])))
        else:
            shown.append(html.escape(t))
    return "<br>".join(shown)


def render_html(table: ChainTable) -> str:
    """One self-contained, deterministic HTML page for a chain table."""
    head = (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n'
        "<head>\n"
        '<meta charset="utf-8">\n'
        f"<title>Coreference chains: {html.escape(table.doc_id)}</title>\n"
        "<style>\n"
        "body { font-family: sans-serif; margin: 1.5em; }\n"
        "table { border-collapse: collapse; }\n"
        "th, td { border: 1px solid #999; padding: 4px 8px; vertical-align: top; }\n"
        "th { background: #eee; }\n"
        "td.chain-id { font-weight: bold; white-space: nowrap; }\n"
        "</style>\n"
        "</head>\n"
        "<body>\n"
        f"<h1>Coreference chains: {html.escape(table.doc_id)}</h1>\n"
    )
    lines = [head, "<table>\n<thead>\n<tr><th>chain</th>"]
    for _, label in table.columns:
        lines.append(f"<th>{html.escape(label)}</th>")
    lines.append("</tr>\n</thead>\n<tbody>\n")
    for chain_id, cells in table.rows:
        lines.append(f'<tr><td class="chain-id">{html.escape(chain_id)}</td>')
        for cell in cells:
            lines.append(f"<td>{_cell_html(cell)}</td>")
        lines.append("</tr>\n")
    lines.append("</tbody>\n</table>\n</body>\n</html>\n")
    return "".join(lines)


def _ratio_line(tag: str, value, num: int, den: int) -> str:
    if value is None:
        return f"{tag} -"
    return f"{tag} {float(value):.3f} ({num}/{den})"


def render_score_text(report: ScoreReport) -> str:
    """Fixed-width R/P/F table with the exact counts alongside."""
    f = report.f_measure
    lines = [
        _ratio_line("R", report.recall, report.recall_num, report.recall_den),
        _ratio_line("P", report.precision, report.precision_num, report.precision_den),
        "F -" if f is None else f"F {float(f):.3f}",
    ]
    return "\n".join(lines) + "\n"
