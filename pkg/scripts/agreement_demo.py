#!/usr/bin/env python3
"""Desk-scale agreement experiment on the committed fixtures.

Treats one annotation of the Bulger passage as the key and a second
annotation (which never linked the winnings chain) as the response, then
prints both scoring directions, the discrepancy list and the category
tally. Usage: python scripts/agreement_demo.py
"""

from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from corefkit import (  # noqa: E402
    Category,
    align,
    build_chains,
    diff,
    parse_muc_sgml,
    render_score_text,
    score,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load(name, doc_id):
    return parse_muc_sgml((FIXTURES / name).read_text(encoding="utf-8"), doc_id=doc_id)


def main() -> int:
    key = load("bulger.sgm", "annotator-a")
    response = load("bulger_nochain24.sgm", "annotator-b")

    print("== annotator A as key, annotator B as response ==")
    forward = score(build_chains(key), build_chains(response), align(key, response))
    print(render_score_text(forward))

    print("== annotator B as key, annotator A as response ==")
    backward = score(build_chains(response), build_chains(key), align(response, key))
    print(render_score_text(backward))

    report = diff(key, response)
    print("== discrepancies ==")
    for d in report.discrepancies:
        print(f"{d.kind.value}: a={','.join(d.mentions_a) or '-'} "
              f"b={','.join(d.mentions_b) or '-'} -> {d.category.value}")
    t = report.tally
    print(f"\ncategories: easy={t.sum_row.easy_total} "
          f"missing={t.sum_row.count(Category.MISSING)} "
          f"hard={t.sum_row.count(Category.HARD)} "
          f"unclassified={t.sum_row.count(Category.UNCLASSIFIED)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
