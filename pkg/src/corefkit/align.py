"""Key/response mention alignment with MIN-head tolerance.

Scoring needs a one-to-one correspondence between the two mention sets
before chains can be compared.  Exact span matches pair first; a remaining
key mention with a MIN head also accepts a response span that covers the
head without spilling outside the key's full extent.  A mention without a
MIN head acts as its own head, which makes the tolerant pass degenerate to
exact matching for it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AmbiguousMin, TextMismatch
from .sgml import AnnotatedDocument, Mention


@dataclass(frozen=True)
class MentionAlignment:
    pairs: tuple[tuple[str, str], ...]
    unmatched_key: tuple[str, ...]
    unmatched_response: tuple[str, ...]
    # pairs admitted only through MIN tolerance, for diff reporting
    inexact: frozenset[tuple[str, str]] = frozenset()

    def reversed(self) -> "MentionAlignment":
        return MentionAlignment(
            pairs=tuple((r, k) for k, r in self.pairs),
            unmatched_key=self.unmatched_response,
            unmatched_response=self.unmatched_key,
            inexact=frozenset((r, k) for k, r in self.inexact),
        )


def resolve_min(doc: AnnotatedDocument, mention: Mention) -> tuple[int, int]:
    """Absolute offsets of the MIN head inside the mention span.

    Heads are phrase-final in English noun phrases, so the last occurrence
    wins when the head string appears more than once.
    """
    if mention.min_head is None:
        return (mention.start, mention.end)
    span_text = doc.base_text[mention.start : mention.end]
    at = span_text.rfind(mention.min_head)
    if at < 0:
        raise AmbiguousMin(
            f"mention {mention.id!r}: MIN {mention.min_head!r} not found in span text"
        )
    return (mention.start + at, mention.start + at + len(mention.min_head))


def _doc_order(m: Mention) -> tuple[int, int, str]:
    return (m.start, m.end, m.id)


def _min_candidates(key_doc, key_m, pool):
    """Response mentions covering the key's head and inside its full span."""
    h0, h1 = resolve_min(key_doc, key_m)
    return [r for r in pool
            if r.start <= h0 and r.end >= h1
            and r.start >= key_m.start and r.end <= key_m.end
            and (r.start, r.end) != (key_m.start, key_m.end)]


def align(key: AnnotatedDocument, response: AnnotatedDocument) -> MentionAlignment:
    """Pair key and response mentions: exact spans first, then MIN tolerance.

    Among several tolerant candidates the shortest response span wins, then
    the leftmost.  Both documents must carry the same base text.
    """
    if key.base_text != response.base_text:
        raise TextMismatch(
            f"base texts differ between {key.doc_id!r} and {response.doc_id!r}"
        )

    resp_by_span = {(r.start, r.end): r for r in response.mentions}
    pairs: list[tuple[str, str]] = []
    inexact: set[tuple[str, str]] = set()
    taken: set[str] = set()
    leftover_keys: list[Mention] = []

    for k in sorted(key.mentions, key=_doc_order):
        r = resp_by_span.get((k.start, k.end))
        if r is not None and r.id not in taken:
            pairs.append((k.id, r.id))
            taken.add(r.id)
        else:
            leftover_keys.append(k)

    for k in leftover_keys:
        pool = [r for r in response.mentions if r.id not in taken]
        candidates = _min_candidates(key, k, pool)
        if not candidates:
            continue
        best = min(candidates, key=lambda r: (r.end - r.start, r.start, r.id))
        pairs.append((k.id, best.id))
        inexact.add((k.id, best.id))
        taken.add(best.id)

    matched_keys = {k for k, _ in pairs}
    unmatched_key = tuple(m.id for m in sorted(key.mentions, key=_doc_order)
                          if m.id not in matched_keys)
    unmatched_response = tuple(m.id for m in sorted(response.mentions, key=_doc_order)
                               if m.id not in taken)
    pairs.sort(key=lambda p: _doc_order(key.mention_by_id(p[0])))
    return MentionAlignment(pairs=tuple(pairs),
                            unmatched_key=unmatched_key,
                            unmatched_response=unmatched_response,
                            inexact=frozenset(inexact))


def align_symmetric(a: AnnotatedDocument, b: AnnotatedDocument) -> MentionAlignment:
    """Order-insensitive variant used by the diff analyzer.

    A tolerant pair is admitted when the containment rule holds in either
    direction, so diff(a, b) and diff(b, a) see the same correspondence.
    Candidate pairs are always nested; smaller inner spans pair first.
    """
    if a.base_text != b.base_text:
        raise TextMismatch(f"base texts differ between {a.doc_id!r} and {b.doc_id!r}")

    b_by_span = {(m.start, m.end): m for m in b.mentions}
    pairs: list[tuple[str, str]] = []
    taken_a: set[str] = set()
    taken_b: set[str] = set()
    for ma in sorted(a.mentions, key=_doc_order):
        mb = b_by_span.get((ma.start, ma.end))
        if mb is not None:
            pairs.append((ma.id, mb.id))
            taken_a.add(ma.id)
            taken_b.add(mb.id)

    candidates: list[tuple[tuple, str, str]] = []
    rest_a = [m for m in a.mentions if m.id not in taken_a]
    rest_b = [m for m in b.mentions if m.id not in taken_b]
    for ma in rest_a:
        for mb in _min_candidates(a, ma, rest_b):
            inner, outer = (mb, ma)
            candidates.append(((inner.end - inner.start, inner.start,
                                outer.end - outer.start, outer.start), ma.id, mb.id))
    for mb in rest_b:
        for ma in _min_candidates(b, mb, rest_a):
            inner, outer = (ma, mb)
            candidates.append(((inner.end - inner.start, inner.start,
                                outer.end - outer.start, outer.start), ma.id, mb.id))

    inexact: set[tuple[str, str]] = set()
    for _, a_id, b_id in sorted(candidates):
        if a_id in taken_a or b_id in taken_b:
            continue
        pairs.append((a_id, b_id))
        inexact.add((a_id, b_id))
        taken_a.add(a_id)
        taken_b.add(b_id)

    unmatched_a = tuple(m.id for m in sorted(a.mentions, key=_doc_order)
                        if m.id not in taken_a)
    unmatched_b = tuple(m.id for m in sorted(b.mentions, key=_doc_order)
                        if m.id not in taken_b)
    pairs.sort(key=lambda p: _doc_order(a.mention_by_id(p[0])))
    return MentionAlignment(pairs=tuple(pairs),
                            unmatched_key=unmatched_a,
                            unmatched_response=unmatched_b,
                            inexact=frozenset(inexact))


def identity_alignment(ids) -> MentionAlignment:
    """Pair every id with itself (same-universe chain comparisons)."""
    ids = tuple(sorted(str(i) for i in ids))
    return MentionAlignment(pairs=tuple((i, i) for i in ids),
                            unmatched_key=(), unmatched_response=())
