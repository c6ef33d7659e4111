"""Interannotator difference analysis and the category tally.

Two annotations of the same text are compared chain by chain.  What a
machine can classify gets an automatic category; everything else waits for
an adjudicator's manual label, which always wins in the tally.

Categories follow the reconciliation-difficulty taxonomy: four Easy kinds
(unmarked pronouns, benign minimal-markup differences, headline-zone
omissions, unmarked predicating expressions), whole chains one annotator
missed, and Hard genuine interpretation disputes.  Pred and Hard require
human judgment and are never auto-assigned.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path

from .align import align_symmetric, resolve_min
from .chains import ChainSet, build_chains
from .errors import TextMismatch, ValidationError
from .sgml import AnnotatedDocument, ZoneKind, mention_text, zone_of


class DiffKind(str, Enum):
    CHAIN_MISSING_IN_A = "ChainMissingInA"
    CHAIN_MISSING_IN_B = "ChainMissingInB"
    MENTION_UNLINKED = "MentionUnlinked"
    SPAN_MISMATCH = "SpanMismatch"
    LINK_DISAGREEMENT = "LinkDisagreement"


class Category(str, Enum):
    EASY_PRON = "Easy_Pron"
    EASY_BUGS = "Easy_Bugs"
    EASY_ZONE = "Easy_Zone"
    EASY_PRED = "Easy_Pred"
    MISSING = "Missing"
    HARD = "Hard"
    UNCLASSIFIED = "Unclassified"


EASY_CATEGORIES = (Category.EASY_PRON, Category.EASY_BUGS,
                   Category.EASY_ZONE, Category.EASY_PRED)

# closed English pronoun lexicon: personal, possessive, demonstrative
DEFAULT_PRONOUNS = frozenset("""
i me my mine myself we us our ours ourselves
you your yours yourself yourselves
he him his himself she her hers herself it its itself
they them their theirs themselves
this that these those
""".split())


@dataclass(frozen=True)
class DiffConfig:
    pronouns: frozenset[str] = DEFAULT_PRONOUNS

    @classmethod
    def from_file(cls, path: str | Path) -> "DiffConfig":
        """One pronoun per line; blank lines and # comments ignored."""
        words = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip().lower()
            if line and not line.startswith("#"):
                words.append(line)
        return cls(pronouns=frozenset(words))


@dataclass(frozen=True)
class Discrepancy:
    kind: DiffKind
    mentions_a: tuple[str, ...]
    mentions_b: tuple[str, ...]
    auto_category: Category
    manual_category: Category | None = None
    note: str = ""

    @property
    def category(self) -> Category:
        return self.manual_category or self.auto_category

    @property
    def key(self) -> str:
        """Stable identity for persisting manual labels across recomputation."""
        return "{}|a={}|b={}".format(self.kind.value,
                                     ",".join(self.mentions_a),
                                     ",".join(self.mentions_b))


@dataclass(frozen=True)
class TallyRow:
    doc_id: str
    counts: tuple[tuple[Category, int], ...]

    def count(self, cat: Category) -> int:
        return dict(self.counts).get(cat, 0)

    @property
    def easy_total(self) -> int:
        return sum(self.count(c) for c in EASY_CATEGORIES)

    @property
    def total(self) -> int:
        return sum(n for _, n in self.counts)


@dataclass(frozen=True)
class CategoryTally:
    rows: tuple[TallyRow, ...]
    sum_row: TallyRow
    grand_total: int
    # whole-percent shares of Easy total / Missing / Hard, None when empty
    percentages: tuple[tuple[str, int], ...] | None

    def to_dict(self) -> dict:
        def row_dict(row: TallyRow) -> dict:
            d = {"doc_id": row.doc_id}
            d.update({c.value: row.count(c) for c in Category})
            d["easy_total"] = row.easy_total
            return d

        return {
            "rows": [row_dict(r) for r in self.rows],
            "sum": row_dict(self.sum_row),
            "grand_total": self.grand_total,
            "percentages": None if self.percentages is None else dict(self.percentages),
        }


@dataclass(frozen=True)
class DiffReport:
    doc_id: str
    chain_pairs: tuple[tuple[str, str], ...]
    discrepancies: tuple[Discrepancy, ...]
    tally: CategoryTally

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "chain_pairs": [list(p) for p in self.chain_pairs],
            "discrepancies": [
                {
                    "key": d.key,
                    "kind": d.kind.value,
                    "mentions_a": list(d.mentions_a),
                    "mentions_b": list(d.mentions_b),
                    "auto_category": d.auto_category.value,
                    "manual_category": d.manual_category.value if d.manual_category else None,
                    "note": d.note,
                }
                for d in self.discrepancies
            ],
            "tally": self.tally.to_dict(),
        }


def _round_half_up_percent(share: Fraction) -> int:
    return int(share * 100 + Fraction(1, 2))


def tally(reports) -> CategoryTally:
    """Per-document category counts, their sum and whole-percent shares.

    Accepts DiffReports or plain (doc_id, discrepancies) pairs.  Manual
    labels must already be applied; a manual category overrides the
    automatic one.
    """
    rows = []
    totals: dict[Category, int] = {c: 0 for c in Category}
    for report in reports:
        if isinstance(report, DiffReport):
            doc_id, discrepancies = report.doc_id, report.discrepancies
        else:
            doc_id, discrepancies = report
        counts: dict[Category, int] = {c: 0 for c in Category}
        for d in discrepancies:
            counts[d.category] += 1
            totals[d.category] += 1
        rows.append(TallyRow(doc_id=doc_id,
                             counts=tuple((c, counts[c]) for c in Category if counts[c])))
    sum_row = TallyRow(doc_id="SUM",
                       counts=tuple((c, totals[c]) for c in Category if totals[c]))
    grand = sum(totals.values())
    if grand == 0:
        percentages = None
    else:
        easy = sum(totals[c] for c in EASY_CATEGORIES)
        percentages = (
            ("easy", _round_half_up_percent(Fraction(easy, grand))),
            ("missing", _round_half_up_percent(Fraction(totals[Category.MISSING], grand))),
            ("hard", _round_half_up_percent(Fraction(totals[Category.HARD], grand))),
        )
    return CategoryTally(rows=tuple(rows), sum_row=sum_row,
                         grand_total=grand, percentages=percentages)


def _in_title_zone(doc: AnnotatedDocument, mention_id: str) -> bool:
    m = doc.mention_by_id(mention_id)
    z = zone_of(doc, m.start)
    return z is not None and z.kind is ZoneKind.TITLE


def auto_classify(d: Discrepancy, doc_a: AnnotatedDocument,
                  doc_b: AnnotatedDocument | None = None,
                  config: DiffConfig | None = None) -> Category:
    """Mechanical classification; precedence Zone > Pron > Bugs > Missing.

    Predicating expressions and genuine interpretation disputes cannot be
    recognized mechanically and stay Unclassified until an adjudicator
    labels them.
    """
    doc_b = doc_b if doc_b is not None else doc_a
    config = config or DiffConfig()

    cited = [(doc_a, m) for m in d.mentions_a] + [(doc_b, m) for m in d.mentions_b]
    if cited and all(_in_title_zone(doc, m) for doc, m in cited):
        return Category.EASY_ZONE

    texts = {mention_text(doc, m).lower() for doc, m in cited}
    if (d.kind is DiffKind.MENTION_UNLINKED and len(texts) == 1
            and next(iter(texts)) in config.pronouns):
        return Category.EASY_PRON

    if d.kind is DiffKind.SPAN_MISMATCH and len(d.mentions_a) == 1 and len(d.mentions_b) == 1:
        ma = doc_a.mention_by_id(d.mentions_a[0])
        mb = doc_b.mention_by_id(d.mentions_b[0])
        if resolve_min(doc_a, ma) == resolve_min(doc_b, mb):
            return Category.EASY_BUGS

    if d.kind in (DiffKind.CHAIN_MISSING_IN_A, DiffKind.CHAIN_MISSING_IN_B):
        return Category.MISSING

    return Category.UNCLASSIFIED


def _doc_order_ids(doc: AnnotatedDocument, ids) -> tuple[str, ...]:
    return tuple(sorted(ids, key=lambda i: (doc.mention_by_id(i).start,
                                            doc.mention_by_id(i).end, i)))


def diff(a: AnnotatedDocument, b: AnnotatedDocument,
         config: DiffConfig | None = None) -> DiffReport:
    """Compare two annotations of one text and enumerate their discrepancies."""
    if a.base_text != b.base_text:
        raise TextMismatch(f"base texts differ between {a.doc_id!r} and {b.doc_id!r}")
    config = config or DiffConfig()

    alignment = align_symmetric(a, b)
    a_of_b = {bb: aa for aa, bb in alignment.pairs}
    b_of_a = dict(alignment.pairs)

    chains_a: ChainSet = build_chains(a)
    chains_b: ChainSet = build_chains(b)
    ent_a = {m: c.chain_id for c in chains_a.chains for m in c.member_ids}
    ent_b = {m: c.chain_id for c in chains_b.chains for m in c.member_ids}

    # pair chains greedily by shared aligned members
    overlaps = []
    for ia, ca in enumerate(chains_a.chains):
        for ib, cb in enumerate(chains_b.chains):
            shared = sum(1 for m in ca.member_ids
                         if b_of_a.get(m) in cb.member_ids)
            if shared:
                overlaps.append((-shared, ia, ib))
    paired_a: dict[str, str] = {}
    paired_b: dict[str, str] = {}
    chain_pairs = []
    for _, ia, ib in sorted(overlaps):
        ca, cb = chains_a.chains[ia], chains_b.chains[ib]
        if ca.chain_id in paired_a or cb.chain_id in paired_b:
            continue
        paired_a[ca.chain_id] = cb.chain_id
        paired_b[cb.chain_id] = ca.chain_id
        chain_pairs.append((ca.chain_id, cb.chain_id))

    discrepancies: list[Discrepancy] = []

    def add(kind, mentions_a, mentions_b, note=""):
        d = Discrepancy(kind=kind,
                        mentions_a=_doc_order_ids(a, mentions_a),
                        mentions_b=_doc_order_ids(b, mentions_b),
                        auto_category=Category.UNCLASSIFIED, note=note)
        discrepancies.append(replace(d, auto_category=auto_classify(d, a, b, config)))

    for ca in chains_a.chains:
        if ca.chain_id not in paired_a:
            add(DiffKind.CHAIN_MISSING_IN_B, ca.member_ids, (),
                note="chain has no counterpart")
    for cb in chains_b.chains:
        if cb.chain_id not in paired_b:
            add(DiffKind.CHAIN_MISSING_IN_A, (), cb.member_ids,
                note="chain has no counterpart")

    # span tolerance on aligned but non-identical extents
    for a_id, b_id in sorted(alignment.inexact,
                             key=lambda p: (a.mention_by_id(p[0]).start, p)):
        add(DiffKind.SPAN_MISMATCH, (a_id,), (b_id,), note="extents differ")

    # mention-level link comparison, skipping members of missing chains
    cross: dict[tuple[str, str], tuple[list[str], list[str]]] = {}
    for ma in (m.id for m in a.mentions):
        ca = ent_a.get(ma)
        mb = b_of_a.get(ma)
        cb = ent_b.get(mb) if mb is not None else None
        if ca is not None and ca not in paired_a:
            continue  # covered by ChainMissingInB
        if cb is not None and cb not in paired_b:
            continue  # covered by ChainMissingInA
        if ca is not None and cb is None:
            add(DiffKind.MENTION_UNLINKED, (ma,), (mb,) if mb else (),
                note="linked on one side only")
        elif ca is not None and cb is not None and paired_a.get(ca) != cb:
            key = (ca, cb)
            slot = cross.setdefault(key, ([], []))
            slot[0].append(ma)
            slot[1].append(mb)
    for mb in (m.id for m in b.mentions):
        cb = ent_b.get(mb)
        ma = a_of_b.get(mb)
        ca = ent_a.get(ma) if ma is not None else None
        if cb is not None and cb not in paired_b:
            continue
        if ca is not None and ca not in paired_a:
            continue
        if cb is not None and ca is None:
            add(DiffKind.MENTION_UNLINKED, (ma,) if ma else (), (mb,),
                note="linked on one side only")
    for (ca, cb), (ms_a, ms_b) in sorted(cross.items()):
        add(DiffKind.LINK_DISAGREEMENT, ms_a, ms_b,
            note=f"members shared by unpaired chains {ca} and {cb}")

    report_tally = tally([(a.doc_id, tuple(discrepancies))])
    return DiffReport(doc_id=a.doc_id, chain_pairs=tuple(chain_pairs),
                      discrepancies=tuple(discrepancies), tally=report_tally)


def apply_labels(report: DiffReport, labels: dict[str, str]) -> DiffReport:
    """Attach manual categories by discrepancy key and refresh the tally."""
    valid = {c.value: c for c in Category}
    keys = {d.key for d in report.discrepancies}
    for key, cat in labels.items():
        if key not in keys:
            raise ValidationError(f"unknown discrepancy key {key!r}")
        if cat not in valid:
            raise ValidationError(f"unknown category {cat!r}")
    new = tuple(
        replace(d, manual_category=valid[labels[d.key]]) if d.key in labels else d
        for d in report.discrepancies
    )
    return DiffReport(doc_id=report.doc_id, chain_pairs=report.chain_pairs,
                      discrepancies=new,
                      tally=tally([(report.doc_id, new)]))
