"""MUC-style coreference SGML: parsing, validation, serialization, zoning.

The accepted markup is deliberately small:

    <COREF ID="s" [TYPE="IDENT"] [REF="s"] [MIN="s"]> ... </COREF>

COREF elements nest but never cross.  An optional headline container
(``<HL>`` or ``<HEADLINE>``) marks the title zone; the remaining text is
split into paragraph zones on blank-line boundaries.  Any other tag-shaped
text is treated as plain text and preserved verbatim.  Only the entities
&amp; &lt; &gt; are recognized.  Attribute values must be double-quoted;
typographic double quotes inside markup are normalized to straight quotes
before attribute parsing (text content is never touched).  See
docs/format.md for the full conventions.

Character offsets count Unicode code points of the decoded text.  Byte
input is decoded as UTF-8, falling back to Latin-1 for legacy corpus files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum

from .errors import (
    BadAttribute,
    CrossingSpans,
    DanglingRef,
    DuplicateId,
    InvariantViolation,
    UnclosedTag,
    UnknownMention,
)

IDENT = "IDENT"

KNOWN_ATTRS = ("ID", "TYPE", "REF", "MIN")

_TITLE_TAGS = ("HL", "HEADLINE")

_TAG_RE = re.compile(
    r"</\s*(?P<close>COREF|HL|HEADLINE)\s*>"
    r"|<(?P<open>COREF|HL|HEADLINE)(?P<attrs>(?:\"[^\"]*\"|“[^”]*”|[^>\"“])*)>",
    re.IGNORECASE,
)

_ATTR_RE = re.compile(r'\s*([A-Za-z][\w.-]*)\s*=\s*"([^"]*)"')

_ENTITY_RE = re.compile(r"&(amp|lt|gt);")
_ENTITY_MAP = {"amp": "&", "lt": "<", "gt": ">"}

_SEPARATOR_RE = re.compile(r"\n[ \t\r]*(?:\n[ \t\r]*)+")


class ZoneKind(str, Enum):
    TITLE = "title"
    PARAGRAPH = "paragraph"


@dataclass(frozen=True)
class Zone:
    kind: ZoneKind
    start: int
    end: int
    ordinal: int


@dataclass(frozen=True)
class Mention:
    """One COREF-annotated span over the base text.

    ``extra`` keeps attributes outside the ID/TYPE/REF/MIN set (e.g. STATUS)
    so they survive a round trip; computation ignores them.
    """

    id: str
    start: int
    end: int
    ref: str | None = None
    coref_type: str = IDENT
    min_head: str | None = None
    extra: tuple[tuple[str, str], ...] = ()

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class AnnotatedDocument:
    doc_id: str
    base_text: str
    zones: tuple[Zone, ...] = ()
    mentions: tuple[Mention, ...] = ()

    def mention_by_id(self, mention_id: str) -> Mention:
        for m in self.mentions:
            if m.id == mention_id:
                return m
        raise UnknownMention(f"no mention with id {mention_id!r}")


def _expand_entities(text: str) -> str:
    return _ENTITY_RE.sub(lambda m: _ENTITY_MAP[m.group(1)], text)


def escape_text(text: str) -> str:
    """Escape the three recognized entities for emission as SGML text."""
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _normalize_markup_quotes(s: str) -> str:
    # Typographic double quotes appear in typeset sources; only markup is
    # normalized, never text content.
    return s.replace("“", '"').replace("”", '"')


def _parse_coref_attrs(raw_attrs: str) -> tuple[str, str | None, str | None, dict]:
    attrs_src = _normalize_markup_quotes(raw_attrs)
    seen: dict[str, str] = {}
    extra: list[tuple[str, str]] = []
    pos = 0
    while pos < len(attrs_src):
        m = _ATTR_RE.match(attrs_src, pos)
        if m is None:
            if attrs_src[pos:].strip():
                raise BadAttribute(
                    f"malformed attribute text {attrs_src[pos:].strip()!r} "
                    "(values must be double-quoted)"
                )
            break
        name, value = m.group(1).upper(), _expand_entities(m.group(2))
        if name in KNOWN_ATTRS:
            if name in seen:
                raise BadAttribute(f"attribute {name} given twice")
            seen[name] = value
        else:
            extra.append((m.group(1), value))
        pos = m.end()
    if "ID" not in seen:
        raise BadAttribute("COREF tag missing ID attribute")
    coref_type = seen.get("TYPE", IDENT)
    if coref_type != IDENT:
        raise BadAttribute(f"unknown TYPE {coref_type!r} (only IDENT is accepted)")
    return seen["ID"], seen.get("REF"), seen.get("MIN"), {"extra": tuple(extra)}


def parse_muc_sgml(raw: str | bytes, doc_id: str = "") -> AnnotatedDocument:
    """Parse COREF SGML into a document with offset mentions and zones.

    The base text equals the input with COREF and recognized headline tags
    removed and the three entities expanded; all other text is preserved
    exactly.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError:
            raw = raw.decode("latin-1")

    pieces: list[str] = []
    length = 0

    def emit(text: str) -> None:
        nonlocal length
        if text:
            expanded = _expand_entities(text)
            pieces.append(expanded)
            length += len(expanded)

    # mentions listed in document order (open-tag order); ends filled at close
    pending: list[dict] = []
    open_stack: list[dict] = []
    title_start: int | None = None
    title_span: tuple[int, int] | None = None

    pos = 0
    for m in _TAG_RE.finditer(raw):
        emit(raw[pos : m.start()])
        pos = m.end()
        closing = m.group("close")
        if closing is not None:
            name = closing.upper()
            if name == "COREF":
                if not open_stack:
                    raise UnclosedTag("</COREF> without matching open tag")
                open_stack.pop()["end"] = length
            else:
                if title_start is None or title_span is not None:
                    raise UnclosedTag(f"</{name}> without matching open tag")
                title_span = (title_start, length)
            continue
        name = m.group("open").upper()
        if name == "COREF":
            mid, ref, min_head, rest = _parse_coref_attrs(m.group("attrs"))
            entry = {"id": mid, "ref": ref, "min_head": min_head,
                     "start": length, "end": None, **rest}
            pending.append(entry)
            open_stack.append(entry)
        else:
            if m.group("attrs").strip():
                # headline containers take no attributes; treat as plain text
                emit(raw[m.start() : m.end()])
                continue
            if title_span is not None or title_start is not None:
                raise InvariantViolation("more than one headline region")
            title_start = length
    emit(raw[pos:])

    if open_stack:
        raise UnclosedTag(f"{len(open_stack)} COREF tag(s) left open at end of input")
    if title_start is not None and title_span is None:
        raise UnclosedTag("headline tag left open at end of input")

    mentions = [Mention(**entry) for entry in pending]
    base_text = "".join(pieces)
    doc = AnnotatedDocument(
        doc_id=doc_id,
        base_text=base_text,
        zones=tuple(segment_zones(base_text, title_span)),
        mentions=tuple(mentions),
    )
    validate_document(doc)
    return doc


def validate_document(doc: AnnotatedDocument) -> None:
    """Check every document invariant; raise the specific error on failure."""
    n = len(doc.base_text)
    ids: set[str] = set()
    for m in doc.mentions:
        if m.id in ids:
            raise DuplicateId(f"mention id {m.id!r} used twice")
        ids.add(m.id)
        if not (0 <= m.start < m.end <= n):
            raise InvariantViolation(
                f"mention {m.id!r} span [{m.start},{m.end}) outside text "
                f"of length {n} or empty"
            )
        if m.coref_type != IDENT:
            raise BadAttribute(f"mention {m.id!r} has unknown TYPE {m.coref_type!r}")
        if m.min_head is not None and m.min_head not in doc.base_text[m.start : m.end]:
            raise BadAttribute(
                f"mention {m.id!r}: MIN {m.min_head!r} does not occur in its span text"
            )
    for m in doc.mentions:
        if m.ref is not None:
            if m.ref == m.id:
                raise BadAttribute(f"mention {m.id!r} REF points to itself")
            if m.ref not in ids:
                raise DanglingRef(m.ref)
    # spans must be pairwise disjoint or strictly nested
    spans = sorted(((m.start, m.end, m.id) for m in doc.mentions),
                   key=lambda t: (t[0], -t[1], t[2]))
    open_ends: list[tuple[int, str]] = []
    prev: tuple[int, int, str] | None = None
    for s, e, mid in spans:
        if prev is not None and (s, e) == prev[:2]:
            raise CrossingSpans(
                f"mentions {prev[2]!r} and {mid!r} cover the identical span [{s},{e})"
            )
        prev = (s, e, mid)
        while open_ends and open_ends[-1][0] <= s:
            open_ends.pop()
        if open_ends and e > open_ends[-1][0]:
            raise CrossingSpans(
                f"mention {mid!r} [{s},{e}) crosses mention "
                f"{open_ends[-1][1]!r} ending at {open_ends[-1][0]}"
            )
        open_ends.append((e, mid))


def segment_zones(base_text: str, title_span: tuple[int, int] | None = None) -> list[Zone]:
    """Split text into a title zone (when marked) plus blank-line paragraphs.

    Zones partition the text: each zone keeps its trailing separator, the
    title ordinal is 0 and paragraph ordinals count from 1 whether or not a
    title exists (column 0 is reserved for the title).
    """
    if not base_text:
        return []
    zones: list[Zone] = []
    body_start = 0
    if title_span is not None:
        t_end = title_span[1]
        while t_end < len(base_text) and base_text[t_end].isspace():
            t_end += 1
        zones.append(Zone(ZoneKind.TITLE, 0, t_end, 0))
        body_start = t_end
    if body_start >= len(base_text):
        return zones
    starts = [body_start]
    for m in _SEPARATOR_RE.finditer(base_text, body_start):
        # a separator at the very start belongs to the first paragraph
        if m.end() < len(base_text) and m.start() > body_start:
            starts.append(m.end())
    starts = sorted(set(starts))
    for i, s in enumerate(starts):
        e = starts[i + 1] if i + 1 < len(starts) else len(base_text)
        zones.append(Zone(ZoneKind.PARAGRAPH, s, e, i + 1))
    return zones


def document_from_text(doc_id: str, text: str,
                       mentions: tuple[Mention, ...] = (),
                       title_span: tuple[int, int] | None = None) -> AnnotatedDocument:
    """Build a validated document from plain text and ready-made mentions."""
    doc = AnnotatedDocument(
        doc_id=doc_id,
        base_text=text,
        zones=tuple(segment_zones(text, title_span)),
        mentions=tuple(mentions),
    )
    validate_document(doc)
    return doc


def mention_text(doc: AnnotatedDocument, mention: Mention | str) -> str:
    """The base-text substring a mention covers."""
    if isinstance(mention, str):
        mention = doc.mention_by_id(mention)
    elif mention not in doc.mentions:
        raise UnknownMention(f"mention {mention.id!r} is not part of document {doc.doc_id!r}")
    return doc.base_text[mention.start : mention.end]


def _escape_attr(value: str) -> str:
    if '"' in value:
        raise InvariantViolation(
            f"attribute value {value!r} contains a double quote, which the "
            "accepted grammar cannot represent"
        )
    return escape_text(value)


def serialize_muc_sgml(doc: AnnotatedDocument) -> str:
    """Emit canonical COREF SGML: fixed attribute order, straight quotes.

    parse(serialize(doc)) reproduces doc field-for-field.  Attributes are
    emitted in the order ID, TYPE, REF, MIN followed by any preserved extra
    attributes; TYPE is always written.
    """
    validate_document(doc)

    def open_tag(m: Mention) -> str:
        parts = [f'ID="{_escape_attr(m.id)}"', f'TYPE="{_escape_attr(m.coref_type)}"']
        if m.ref is not None:
            parts.append(f'REF="{_escape_attr(m.ref)}"')
        if m.min_head is not None:
            parts.append(f'MIN="{_escape_attr(m.min_head)}"')
        parts.extend(f'{name}="{_escape_attr(value)}"' for name, value in m.extra)
        return "<COREF " + " ".join(parts) + ">"

    # opens: outermost first at equal starts; closes: innermost first.
    events: list[tuple[int, int, int, str]] = []
    for m in doc.mentions:
        events.append((m.start, 1, -(m.end - m.start), open_tag(m)))
        events.append((m.end, 0, m.end - m.start, "</COREF>"))
    title = next((z for z in doc.zones if z.kind is ZoneKind.TITLE), None)
    if title is not None:
        content_end = max(len(doc.base_text[: title.end].rstrip()), title.start)
        events.append((title.start, 1, -(10**9), "<HL>"))
        events.append((content_end, 0, 10**9, "</HL>"))
    events.sort(key=lambda e: (e[0], e[1], e[2]))

    out: list[str] = []
    last = 0
    for offset, _, _, tag in events:
        out.append(escape_text(doc.base_text[last:offset]))
        out.append(tag)
        last = offset
    out.append(escape_text(doc.base_text[last:]))
    return "".join(out)


def zone_of(doc: AnnotatedDocument, offset: int) -> Zone | None:
    """The zone containing a character offset, if any."""
    for z in doc.zones:
        if z.start <= offset < z.end:
            return z
    return None


def with_doc_id(doc: AnnotatedDocument, doc_id: str) -> AnnotatedDocument:
    return replace(doc, doc_id=doc_id)
