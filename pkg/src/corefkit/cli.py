"""Command line front end: parse, chains, align, score, diff, tally,
report and serve subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import report as report_mod
from .align import align
from .chains import build_chains
from .diff import Category, DiffConfig, DiffKind, Discrepancy, diff, tally
from .errors import CorefError, ValidationError
from .score import ScoreReport, combine_reports, score
from .sgml import AnnotatedDocument, mention_text, parse_muc_sgml


def _load(path: str) -> AnnotatedDocument:
    p = Path(path)
    return parse_muc_sgml(p.read_bytes(), doc_id=p.stem)


def _doc_json(doc: AnnotatedDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "base_text": doc.base_text,
        "zones": [{"kind": z.kind.value, "start": z.start, "end": z.end,
                   "ordinal": z.ordinal} for z in doc.zones],
        "mentions": [{"id": m.id, "start": m.start, "end": m.end, "ref": m.ref,
                      "type": m.coref_type, "min": m.min_head}
                     for m in doc.mentions],
    }


def cmd_parse(args) -> int:
    doc = _load(args.file)
    if args.json:
        json.dump(_doc_json(doc), sys.stdout, indent=2)
        print()
        return 0
    print(f"doc_id: {doc.doc_id}")
    print(f"text: {len(doc.base_text)} chars, {len(doc.zones)} zones, "
          f"{len(doc.mentions)} mentions")
    for z in doc.zones:
        print(f"  zone {z.ordinal} {z.kind.value} [{z.start},{z.end})")
    for m in doc.mentions:
        attrs = f" ref={m.ref}" if m.ref else ""
        attrs += f" min={m.min_head!r}" if m.min_head else ""
        print(f"  mention {m.id} [{m.start},{m.end}){attrs}: "
              f"{mention_text(doc, m)!r}")
    return 0


def cmd_chains(args) -> int:
    doc = _load(args.file)
    chain_set = build_chains(doc)
    for c in chain_set.chains:
        by_id = {m.id: m for m in doc.mentions}
        members = sorted(c.member_ids, key=lambda i: (by_id[i].start, by_id[i].end, i))
        phrases = " | ".join(mention_text(doc, by_id[i]) for i in members)
        print(f"{c.chain_id}: {phrases}")
    return 0


def cmd_align(args) -> int:
    key, response = _load(args.key), _load(args.response)
    alignment = align(key, response)
    if args.json:
        json.dump({"pairs": [list(p) for p in alignment.pairs],
                   "unmatched_key": list(alignment.unmatched_key),
                   "unmatched_response": list(alignment.unmatched_response)},
                  sys.stdout, indent=2)
        print()
        return 0
    for k, r in alignment.pairs:
        marker = "~" if (k, r) in alignment.inexact else "="
        print(f"{k} {marker} {r}")
    for k in alignment.unmatched_key:
        print(f"{k} unmatched in key")
    for r in alignment.unmatched_response:
        print(f"{r} unmatched in response")
    return 0


def _score_pair(key_path: Path, response_path: Path) -> ScoreReport:
    key, response = _load(str(key_path)), _load(str(response_path))
    return score(build_chains(key), build_chains(response), align(key, response))


def _fmt(value) -> str:
    return "-" if value is None else f"{float(value):.3f}"


def cmd_score(args) -> int:
    key_path, response_path = Path(args.key), Path(args.response)
    if key_path.is_dir() != response_path.is_dir():
        raise ValidationError("--key and --response must both be files or both directories")
    if not key_path.is_dir():
        report = _score_pair(key_path, response_path)
        if args.json:
            json.dump(report.to_dict(), sys.stdout, indent=2)
            print()
        else:
            sys.stdout.write(report_mod.render_score_text(report))
        return 0

    names = sorted(p.name for p in key_path.iterdir() if p.is_file())
    missing = [n for n in names if not (response_path / n).is_file()]
    if missing:
        raise ValidationError(f"response side is missing: {', '.join(missing)}")
    with ThreadPoolExecutor() as pool:
        reports = list(pool.map(lambda n: _score_pair(key_path / n, response_path / n),
                                names))
    total = combine_reports(reports)
    if args.json:
        json.dump({"documents": {n: r.to_dict() for n, r in zip(names, reports)},
                   "sum": total.to_dict()}, sys.stdout, indent=2)
        print()
        return 0
    print(f"{'doc':<24} {'R':>12} {'P':>12} {'F':>7}")
    for n, r in zip(names, reports):
        print(f"{n:<24} {_fmt(r.recall):>6} ({r.recall_num}/{r.recall_den})"
              f" {_fmt(r.precision):>6} ({r.precision_num}/{r.precision_den})"
              f" {_fmt(r.f_measure):>7}")
    print(f"{'SUM':<24} {_fmt(total.recall):>6} ({total.recall_num}/{total.recall_den})"
          f" {_fmt(total.precision):>6} ({total.precision_num}/{total.precision_den})"
          f" {_fmt(total.f_measure):>7}")
    defined_f = [r.f_measure for r in reports if r.f_measure is not None]
    if defined_f:
        mean_f = sum(defined_f, Fraction(0)) / len(defined_f)
        print(f"per-document mean F (macro): {float(mean_f):.3f}")
    return 0


_TALLY_COLUMNS = (
    ("Pron", Category.EASY_PRON), ("Bugs", Category.EASY_BUGS),
    ("Zone", Category.EASY_ZONE), ("Pred", Category.EASY_PRED),
)


def _print_tally(t) -> None:
    has_unclassified = t.sum_row.count(Category.UNCLASSIFIED) > 0
    header = f"{'Doc':<12}" + "".join(f"{name:>6}" for name, _ in _TALLY_COLUMNS)
    header += f"{'TOTAL':>7}{'MISSING':>9}{'HARD':>6}"
    if has_unclassified:
        header += f"{'UNCLASS':>9}"
    print(header)
    for row in list(t.rows) + [t.sum_row]:
        line = f"{row.doc_id:<12}" + "".join(f"{row.count(c):>6}" for _, c in _TALLY_COLUMNS)
        line += f"{row.easy_total:>7}{row.count(Category.MISSING):>9}{row.count(Category.HARD):>6}"
        if has_unclassified:
            line += f"{row.count(Category.UNCLASSIFIED):>9}"
        print(line)
    if t.percentages is not None:
        pct = dict(t.percentages)
        print(f"Easy {pct['easy']}%   Missing {pct['missing']}%   Hard {pct['hard']}%")


def cmd_diff(args) -> int:
    config = DiffConfig.from_file(args.pronouns) if args.pronouns else DiffConfig()
    a, b = _load(args.a), _load(args.b)
    report = diff(a, b, config=config)
    if args.json:
        json.dump(report.to_dict(), sys.stdout, indent=2)
        print()
        return 0
    for d in report.discrepancies:
        print(f"{d.kind.value:<18} a={','.join(d.mentions_a) or '-'} "
              f"b={','.join(d.mentions_b) or '-'} [{d.category.value}] {d.note}")
    _print_tally(report.tally)
    return 0


def _discrepancies_from_json(payload: dict) -> tuple[str, tuple[Discrepancy, ...]]:
    ds = []
    for item in payload.get("discrepancies", ()):
        ds.append(Discrepancy(
            kind=DiffKind(item["kind"]),
            mentions_a=tuple(item.get("mentions_a", ())),
            mentions_b=tuple(item.get("mentions_b", ())),
            auto_category=Category(item.get("auto_category", "Unclassified")),
            manual_category=Category(item["manual_category"]) if item.get("manual_category") else None,
            note=item.get("note", "")))
    return payload.get("doc_id", "?"), tuple(ds)


def cmd_tally(args) -> int:
    reports = []
    for path in sorted(Path(args.report_dir).glob("*.json")):
        reports.append(_discrepancies_from_json(json.loads(path.read_text(encoding="utf-8"))))
    _print_tally(tally(reports))
    return 0


def cmd_report(args) -> int:
    doc = _load(args.file)
    table = report_mod.chain_table(doc, build_chains(doc),
                                   include_singletons=args.include_singletons)
    html_text = report_mod.render_html(table)
    Path(args.output).write_text(html_text, encoding="utf-8")
    print(f"wrote {args.output}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .webapp import create_app

    ui_dir = args.ui if args.ui else "frontend/dist"
    app = create_app(args.root, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coref",
                                     description="Coreference annotation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse COREF SGML and dump the document")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("chains", help="print one line per coreference chain")
    p.add_argument("file")
    p.set_defaults(func=cmd_chains)

    p = sub.add_parser("align", help="align key and response mentions")
    p.add_argument("key")
    p.add_argument("response")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("score", help="score response against key (file or directory)")
    p.add_argument("--key", required=True)
    p.add_argument("--response", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("diff", help="analyze differences between two annotations")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--json", action="store_true")
    p.add_argument("--pronouns", help="pronoun lexicon file, one word per line")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("tally", help="tally saved diff reports into a category table")
    p.add_argument("report_dir")
    p.set_defaults(func=cmd_tally)

    p = sub.add_parser("report", help="render the chain table as HTML")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--include-singletons", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the annotation workflow service")
    p.add_argument("--root", required=True, help="project storage directory")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="static UI bundle to serve at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CorefError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
