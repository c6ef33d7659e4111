#!/usr/bin/env python3
"""Print the adjudicated difference-category table from the committed
five-document fixture, with the Easy/Missing/Hard percentage split.

Usage: python scripts/difference_table.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from corefkit import Category, DiffKind, Discrepancy, tally  # noqa: E402

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "agreement_study_counts.json"

COLUMNS = (
    ("Pron", Category.EASY_PRON), ("Bugs", Category.EASY_BUGS),
    ("Zone", Category.EASY_ZONE), ("Pred", Category.EASY_PRED),
)


def load_reports():
    payload = json.loads(FIXTURE.read_text(encoding="utf-8"))
    reports = []
    for entry in payload["documents"]:
        ds = []
        for cat_name, count in entry["counts"].items():
            cat = Category(cat_name)
            kind = (DiffKind.CHAIN_MISSING_IN_B if cat is Category.MISSING
                    else DiffKind.MENTION_UNLINKED)
            ds.extend(
                Discrepancy(kind=kind, mentions_a=(f"{cat_name}-{i}",), mentions_b=(),
                            auto_category=Category.UNCLASSIFIED, manual_category=cat)
                for i in range(count)
            )
        reports.append((entry["doc_id"], tuple(ds)))
    return reports


def main() -> int:
    t = tally(load_reports())
    print(f"{'Doc':<6}" + "".join(f"{n:>6}" for n, _ in COLUMNS)
          + f"{'TOTAL':>7}{'MISSING':>9}{'HARD':>6}")
    for row in list(t.rows) + [t.sum_row]:
        print(f"{row.doc_id:<6}"
              + "".join(f"{row.count(c):>6}" for _, c in COLUMNS)
              + f"{row.easy_total:>7}{row.count(Category.MISSING):>9}"
              + f"{row.count(Category.HARD):>6}")
    pct = dict(t.percentages)
    print(f"\nEasy {pct['easy']}%   Missing {pct['missing']}%   Hard {pct['hard']}%  "
          f"(grand total {t.grand_total})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
