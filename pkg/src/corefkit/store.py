"""Annotation project persistence and the two-stage workflow.

Annotation happens in two passes: first every markable span is recorded,
then, in a separate pass, coreferring markables are linked.  Each
(document, annotator) state advances Markables -> Linking -> Done and every
mutation is guarded by optimistic concurrency: a save must present the
revision it read, and exactly one of two conflicting saves wins.

On disk a project is a directory of canonical COREF SGML files plus small
JSON sidecars (stage, revision, adjudication labels), so the whole store is
inspectable and diffable with ordinary tools.  All mutation is serialized
per (project, doc, annotator) key; reads hand out immutable snapshots.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from . import sgml
from .align import align
from .chains import ChainSet, build_chains
from .diff import DiffReport, apply_labels, diff, tally
from .errors import (
    CorefError,
    ImportConflict,
    ParseError,
    RevisionConflict,
    SpanError,
    UnknownId,
    UnknownMention,
    ValidationError,
    WrongStage,
)
from .score import ScoreReport, score
from .sgml import AnnotatedDocument, Mention, document_from_text

_ID_RE = re.compile(r"^[A-Za-z0-9._-]+$")


class Stage(str, Enum):
    MARKABLES = "markables"
    LINKING = "linking"
    DONE = "done"


_NEXT_STAGE = {Stage.MARKABLES: Stage.LINKING, Stage.LINKING: Stage.DONE}


@dataclass(frozen=True)
class AnnotationState:
    stage: Stage
    markables: tuple[Mention, ...]
    links: tuple[tuple[str, str], ...]
    revision: int


@dataclass(frozen=True)
class StoredDocument:
    doc_id: str
    base_text: str
    title_span: tuple[int, int] | None = None


@dataclass(frozen=True)
class ProjectConfig:
    # let annotators see each other's markables in the linking pass
    share_markables: bool = False
    # permit extent edits after the markables pass has been closed
    allow_span_edits_in_linking: bool = False


@dataclass(frozen=True)
class ProjectInfo:
    project_id: str
    name: str
    annotators: tuple[str, ...]
    documents: tuple[str, ...]
    config: ProjectConfig


FRESH_STATE = AnnotationState(stage=Stage.MARKABLES, markables=(), links=(), revision=1)


def _check_token(kind: str, value: str) -> str:
    if not _ID_RE.match(value or ""):
        raise ValidationError(f"{kind} {value!r} must match [A-Za-z0-9._-]+")
    return value


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def _markables_payload(markables) -> list[Mention]:
    out = []
    for m in markables:
        if isinstance(m, Mention):
            out.append(replace(m, ref=None))
        else:
            out.append(Mention(id=str(m["id"]), start=int(m["start"]), end=int(m["end"]),
                               min_head=m.get("min") or m.get("min_head")))
    return out


class ProjectStore:
    """File-backed store for annotation projects."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._guard = threading.Lock()
        self._locks: dict[tuple, threading.Lock] = {}
        self._projects: dict[str, ProjectInfo] = {}
        self._docs: dict[tuple[str, str], StoredDocument] = {}
        self._states: dict[tuple[str, str, str], AnnotationState] = {}
        self._labels: dict[tuple[str, str, str, str], dict[str, str]] = {}
        self._load()

    # ---- locking ----

    def _lock(self, *key) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    # ---- loading ----

    def _load(self) -> None:
        for pdir in sorted(self.root.glob("*/")):
            meta_path = pdir / "project.json"
            if not meta_path.is_file():
                continue
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            info = ProjectInfo(
                project_id=meta["project_id"],
                name=meta.get("name", meta["project_id"]),
                annotators=tuple(meta.get("annotators", ())),
                documents=tuple(meta.get("documents", ())),
                config=ProjectConfig(**meta.get("config", {})),
            )
            self._projects[info.project_id] = info
            for doc_id in info.documents:
                dmeta = json.loads((pdir / "docs" / f"{doc_id}.json").read_text(encoding="utf-8"))
                span = dmeta.get("title_span")
                self._docs[(info.project_id, doc_id)] = StoredDocument(
                    doc_id=doc_id, base_text=dmeta["base_text"],
                    title_span=tuple(span) if span else None)
            for spath in sorted((pdir / "states").glob("*.json")):
                doc_id, annotator = spath.stem.split("@", 1)
                smeta = json.loads(spath.read_text(encoding="utf-8"))
                parsed = sgml.parse_muc_sgml(
                    spath.with_suffix(".sgm").read_text(encoding="utf-8"), doc_id=doc_id)
                links = tuple((m.id, m.ref) for m in parsed.mentions if m.ref is not None)
                markables = tuple(replace(m, ref=None) for m in parsed.mentions)
                self._states[(info.project_id, doc_id, annotator)] = AnnotationState(
                    stage=Stage(smeta["stage"]), markables=markables,
                    links=links, revision=int(smeta["revision"]))
            labels_dir = pdir / "labels"
            if labels_dir.is_dir():
                for lpath in sorted(labels_dir.glob("*.json")):
                    doc_id, a, b = lpath.stem.split("@")
                    data = json.loads(lpath.read_text(encoding="utf-8"))
                    self._labels[(info.project_id, doc_id, a, b)] = dict(data.get("labels", {}))

    # ---- helpers ----

    def _project_dir(self, project_id: str) -> Path:
        return self.root / project_id

    def project(self, project_id: str) -> ProjectInfo:
        try:
            return self._projects[project_id]
        except KeyError:
            raise UnknownId(f"unknown project {project_id!r}") from None

    def list_projects(self) -> list[ProjectInfo]:
        return sorted(self._projects.values(), key=lambda p: p.project_id)

    def document(self, project_id: str, doc_id: str) -> StoredDocument:
        self.project(project_id)
        try:
            return self._docs[(project_id, doc_id)]
        except KeyError:
            raise UnknownId(f"unknown document {doc_id!r} in project {project_id!r}") from None

    def state(self, project_id: str, doc_id: str, annotator: str) -> AnnotationState:
        self.document(project_id, doc_id)
        _check_token("annotator", annotator)
        return self._states.get((project_id, doc_id, annotator), FRESH_STATE)

    def _persist_project(self, info: ProjectInfo) -> None:
        pdir = self._project_dir(info.project_id)
        pdir.mkdir(parents=True, exist_ok=True)
        _atomic_write(pdir / "project.json", json.dumps({
            "project_id": info.project_id,
            "name": info.name,
            "annotators": list(info.annotators),
            "documents": list(info.documents),
            "config": {"share_markables": info.config.share_markables,
                       "allow_span_edits_in_linking": info.config.allow_span_edits_in_linking},
        }, indent=2) + "\n")

    def _persist_state(self, project_id: str, doc_id: str, annotator: str,
                       state: AnnotationState) -> None:
        sdir = self._project_dir(project_id) / "states"
        sdir.mkdir(parents=True, exist_ok=True)
        doc = self.annotated_document(project_id, doc_id, annotator, state=state)
        _atomic_write(sdir / f"{doc_id}@{annotator}.sgm", sgml.serialize_muc_sgml(doc))
        _atomic_write(sdir / f"{doc_id}@{annotator}.json", json.dumps({
            "stage": state.stage.value, "revision": state.revision}, indent=2) + "\n")

    def _register_annotator(self, project_id: str, annotator: str) -> None:
        info = self.project(project_id)
        if annotator not in info.annotators:
            with self._lock(project_id, "@project"):
                info = self.project(project_id)
                if annotator not in info.annotators:
                    info = replace(info, annotators=info.annotators + (annotator,))
                    self._projects[project_id] = info
                    self._persist_project(info)

    # ---- project and document management ----

    def create_project(self, name: str, annotators=(), project_id: str | None = None,
                       config: ProjectConfig | None = None) -> str:
        project_id = _check_token("project id", project_id or re.sub(r"[^A-Za-z0-9._-]+", "-", name).strip("-").lower())
        for a in annotators:
            _check_token("annotator", a)
        if len(set(annotators)) != len(tuple(annotators)):
            raise ValidationError("annotator ids must be unique")
        with self._lock(project_id, "@project"):
            if project_id in self._projects:
                raise ImportConflict(f"project {project_id!r} already exists")
            info = ProjectInfo(project_id=project_id, name=name,
                               annotators=tuple(annotators), documents=(),
                               config=config or ProjectConfig())
            self._projects[project_id] = info
            self._persist_project(info)
        return project_id

    def add_document(self, project_id: str, doc_id: str | None = None, *,
                     text: str | None = None, sgml_source: str | None = None,
                     annotator: str | None = None, name: str | None = None) -> str:
        """Import one document from plain text or COREF SGML.

        SGML input carrying mentions seeds ``annotator``'s state at stage
        Done, which is how completed annotations enter a project.
        """
        if (text is None) == (sgml_source is None):
            raise ValidationError("provide exactly one of text or sgml")
        doc_id = _check_token("document id", doc_id or (Path(name).stem if name else ""))

        title_span = None
        parsed = None
        if sgml_source is not None:
            try:
                parsed = sgml.parse_muc_sgml(sgml_source, doc_id=doc_id)
            except CorefError as exc:
                raise ParseError(name or doc_id, exc) from exc
            base_text = parsed.base_text
            title = next((z for z in parsed.zones if z.kind is sgml.ZoneKind.TITLE), None)
            if title is not None:
                title_span = (title.start, len(base_text[: title.end].rstrip()))
        else:
            base_text = text

        info = self.project(project_id)
        with self._lock(project_id, "@project"):
            info = self.project(project_id)
            if doc_id in info.documents:
                raise ImportConflict(f"document {doc_id!r} already in project {project_id!r}")
            stored = StoredDocument(doc_id=doc_id, base_text=base_text, title_span=title_span)
            ddir = self._project_dir(project_id) / "docs"
            ddir.mkdir(parents=True, exist_ok=True)
            _atomic_write(ddir / f"{doc_id}.json", json.dumps({
                "doc_id": doc_id, "base_text": base_text,
                "title_span": list(title_span) if title_span else None}, indent=2) + "\n")
            info = replace(info, documents=info.documents + (doc_id,))
            self._projects[project_id] = info
            self._persist_project(info)
            self._docs[(project_id, doc_id)] = stored

        if parsed is not None and annotator:
            _check_token("annotator", annotator)
            self._register_annotator(project_id, annotator)
            state = AnnotationState(
                stage=Stage.DONE,
                markables=tuple(replace(m, ref=None) for m in parsed.mentions),
                links=tuple((m.id, m.ref) for m in parsed.mentions if m.ref is not None),
                revision=1)
            with self._lock(project_id, doc_id, annotator):
                self._states[(project_id, doc_id, annotator)] = state
                self._persist_state(project_id, doc_id, annotator, state)
        return doc_id

    def create_project_from_files(self, name: str, paths, annotators=()) -> str:
        """Convenience wrapper: one project from a list of corpus files."""
        project_id = self.create_project(name, annotators=annotators)
        for path in paths:
            p = Path(path)
            raw = p.read_text(encoding="utf-8")
            if "<COREF" in raw.upper():
                self.add_document(project_id, sgml_source=raw, name=p.name)
            else:
                self.add_document(project_id, text=raw, name=p.name)
        return project_id

    # ---- annotation workflow ----

    def _validated_markables(self, stored: StoredDocument, markables) -> tuple[Mention, ...]:
        mentions = _markables_payload(markables)
        try:
            document_from_text(stored.doc_id, stored.base_text, tuple(mentions),
                               title_span=stored.title_span)
        except CorefError as exc:
            raise SpanError(str(exc)) from exc
        return tuple(mentions)

    def save_markables(self, project_id: str, doc_id: str, annotator: str,
                       markables, expected_revision: int) -> int:
        stored = self.document(project_id, doc_id)
        _check_token("annotator", annotator)
        validated = self._validated_markables(stored, markables)
        self._register_annotator(project_id, annotator)
        key = (project_id, doc_id, annotator)
        with self._lock(*key):
            state = self._states.get(key, FRESH_STATE)
            if state.stage is not Stage.MARKABLES and not (
                    state.stage is Stage.LINKING
                    and self.project(project_id).config.allow_span_edits_in_linking):
                raise WrongStage(f"markables are frozen in stage {state.stage.value}")
            if state.revision != expected_revision:
                raise RevisionConflict(
                    f"expected revision {expected_revision}, state is at {state.revision}")
            kept_ids = {m.id for m in validated}
            links = tuple(l for l in state.links if l[0] in kept_ids and l[1] in kept_ids)
            new = AnnotationState(stage=state.stage, markables=validated,
                                  links=links, revision=state.revision + 1)
            self._persist_state(project_id, doc_id, annotator, new)
            self._states[key] = new
            return new.revision

    def save_links(self, project_id: str, doc_id: str, annotator: str,
                   links, expected_revision: int) -> int:
        self.document(project_id, doc_id)
        _check_token("annotator", annotator)
        key = (project_id, doc_id, annotator)
        with self._lock(*key):
            state = self._states.get(key, FRESH_STATE)
            if state.stage is not Stage.LINKING:
                raise WrongStage(f"links may only be edited in stage linking, "
                                 f"not {state.stage.value}")
            if state.revision != expected_revision:
                raise RevisionConflict(
                    f"expected revision {expected_revision}, state is at {state.revision}")
            known = {m.id for m in state.markables}
            new_links: list[tuple[str, str]] = []
            sources: set[str] = set()
            for pair in links:
                src, dst = str(pair[0]), str(pair[1])
                if src not in known:
                    raise UnknownMention(f"link source {src!r} is not a markable")
                if dst not in known:
                    raise UnknownMention(f"link target {dst!r} is not a markable")
                if src == dst:
                    raise ValidationError(f"markable {src!r} cannot corefer with itself")
                if src in sources:
                    raise ValidationError(f"markable {src!r} carries two links")
                sources.add(src)
                new_links.append((src, dst))
            new = AnnotationState(stage=state.stage, markables=state.markables,
                                  links=tuple(new_links), revision=state.revision + 1)
            self._persist_state(project_id, doc_id, annotator, new)
            self._states[key] = new
            return new.revision

    def advance_stage(self, project_id: str, doc_id: str, annotator: str) -> Stage:
        self.document(project_id, doc_id)
        _check_token("annotator", annotator)
        self._register_annotator(project_id, annotator)
        key = (project_id, doc_id, annotator)
        with self._lock(*key):
            state = self._states.get(key, FRESH_STATE)
            nxt = _NEXT_STAGE.get(state.stage)
            if nxt is None:
                raise WrongStage("annotation is already done")
            new = replace(state, stage=nxt, revision=state.revision + 1)
            self._persist_state(project_id, doc_id, annotator, new)
            self._states[key] = new
            return new.stage

    # ---- derived views ----

    def annotated_document(self, project_id: str, doc_id: str, annotator: str,
                           state: AnnotationState | None = None) -> AnnotatedDocument:
        stored = self.document(project_id, doc_id)
        state = state if state is not None else self.state(project_id, doc_id, annotator)
        ref_of = {src: dst for src, dst in state.links}
        mentions = tuple(replace(m, ref=ref_of.get(m.id)) for m in state.markables)
        return document_from_text(doc_id, stored.base_text, mentions,
                                  title_span=stored.title_span)

    def chains(self, project_id: str, doc_id: str, annotator: str) -> ChainSet:
        return build_chains(self.annotated_document(project_id, doc_id, annotator))

    def export_sgml(self, project_id: str, doc_id: str, annotator: str) -> str:
        return sgml.serialize_muc_sgml(self.annotated_document(project_id, doc_id, annotator))

    def shared_markables(self, project_id: str, doc_id: str, annotator: str) -> tuple[Mention, ...]:
        """Markables of other annotators; only when the project shares them."""
        info = self.project(project_id)
        if not info.config.share_markables:
            return ()
        seen: dict[tuple[int, int], Mention] = {}
        for other in info.annotators:
            if other == annotator:
                continue
            for m in self.state(project_id, doc_id, other).markables:
                seen.setdefault((m.start, m.end), m)
        return tuple(seen[k] for k in sorted(seen))

    # ---- agreement and adjudication ----

    def _done_document(self, project_id: str, doc_id: str, annotator: str) -> AnnotatedDocument:
        state = self.state(project_id, doc_id, annotator)
        if state.stage is not Stage.DONE:
            raise WrongStage(f"annotator {annotator!r} has not finished "
                             f"document {doc_id!r} (stage {state.stage.value})")
        return self.annotated_document(project_id, doc_id, annotator, state=state)

    def compute_agreement(self, project_id: str, doc_id: str,
                          key_annotator: str, response_annotator: str
                          ) -> tuple[ScoreReport, DiffReport]:
        """Score one annotator as key against the other as response."""
        doc_a = self._done_document(project_id, doc_id, key_annotator)
        doc_b = self._done_document(project_id, doc_id, response_annotator)
        alignment = align(doc_a, doc_b)
        report = score(build_chains(doc_a), build_chains(doc_b), alignment)
        diff_report = diff(doc_a, doc_b)
        labels = self._labels.get((project_id, doc_id, key_annotator, response_annotator))
        if labels:
            diff_report = apply_labels(diff_report, labels)
        return report, diff_report

    def set_diff_labels(self, project_id: str, doc_id: str, a: str, b: str,
                        labels: dict[str, str]) -> None:
        """Replace the manual category map for one annotator pair."""
        _, diff_report = self.compute_agreement(project_id, doc_id, a, b)
        apply_labels(diff_report, labels)  # validates keys and categories
        key = (project_id, doc_id, a, b)
        with self._lock(*key):
            ldir = self._project_dir(project_id) / "labels"
            ldir.mkdir(parents=True, exist_ok=True)
            _atomic_write(ldir / f"{doc_id}@{a}@{b}.json",
                          json.dumps({"labels": labels}, indent=2, sort_keys=True) + "\n")
            self._labels[key] = dict(labels)

    def get_diff_labels(self, project_id: str, doc_id: str, a: str, b: str) -> dict[str, str]:
        return dict(self._labels.get((project_id, doc_id, a, b), {}))

    def _tally_pair(self, project_id: str, a: str | None, b: str | None) -> tuple[str, str]:
        info = self.project(project_id)
        if a and b:
            return a, b
        if len(info.annotators) == 2:
            return info.annotators[0], info.annotators[1]
        raise ValidationError(
            "annotator pair required: project does not have exactly two annotators")

    def project_tally(self, project_id: str, a: str | None = None, b: str | None = None):
        """Category tally across every document both annotators have finished."""
        a, b = self._tally_pair(project_id, a, b)
        info = self.project(project_id)
        reports = []
        for doc_id in info.documents:
            if (self.state(project_id, doc_id, a).stage is Stage.DONE
                    and self.state(project_id, doc_id, b).stage is Stage.DONE):
                _, diff_report = self.compute_agreement(project_id, doc_id, a, b)
                reports.append(diff_report)
        return tally(reports)
