"""HTTP/JSON surface over the project store, consumed by the web UI.

Everything stateful delegates to ProjectStore; handlers only translate
between JSON and domain objects.  Conflicts map to 409, validation
problems to 422 and unknown identifiers to 404.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .chains import ChainSet, build_chains
from .errors import (
    CorefError,
    ImportConflict,
    RevisionConflict,
    UnknownId,
    UnknownMention,
    WrongStage,
)
from .report import chain_table
from .store import ProjectConfig, ProjectStore
from .sgml import AnnotatedDocument, Mention

_CONFLICTS = (RevisionConflict, WrongStage, ImportConflict)
_NOT_FOUND = (UnknownId, UnknownMention)


class ProjectBody(BaseModel):
    name: str
    annotators: list[str] = []
    share_markables: bool = False
    allow_span_edits_in_linking: bool = False


class MarkableBody(BaseModel):
    id: str
    start: int
    end: int
    min: str | None = None


class MarkablesBody(BaseModel):
    markables: list[MarkableBody]
    revision: int


class LinksBody(BaseModel):
    links: list[tuple[str, str]]
    revision: int


class DocBody(BaseModel):
    doc_id: str | None = None
    text: str | None = None
    sgml: str | None = None
    annotator: str | None = None


def _mention_json(m: Mention) -> dict:
    return {"id": m.id, "start": m.start, "end": m.end, "min": m.min_head}


def _chains_json(chains: ChainSet) -> list[dict]:
    return [
        {"chain_id": c.chain_id,
         "members": sorted(c.member_ids),
         "representative": c.representative}
        for c in chains.chains
    ]


def _doc_json(store: ProjectStore, project_id: str, doc_id: str, annotator: str) -> dict:
    stored = store.document(project_id, doc_id)
    state = store.state(project_id, doc_id, annotator)
    doc: AnnotatedDocument = store.annotated_document(project_id, doc_id, annotator)
    payload = {
        "doc_id": doc_id,
        "base_text": stored.base_text,
        "zones": [{"kind": z.kind.value, "start": z.start, "end": z.end,
                   "ordinal": z.ordinal} for z in doc.zones],
        "markables": [_mention_json(m) for m in state.markables],
        "links": [list(l) for l in state.links],
        "stage": state.stage.value,
        "revision": state.revision,
        "chains": _chains_json(build_chains(doc)),
    }
    shared = store.shared_markables(project_id, doc_id, annotator)
    if shared:
        payload["shared_markables"] = [_mention_json(m) for m in shared]
    return payload


def create_app(root: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    store = ProjectStore(root)
    app = FastAPI(title="corefkit annotation service")
    app.state.store = store

    @app.exception_handler(CorefError)
    async def coref_error_handler(_request: Request, exc: CorefError):
        if isinstance(exc, _CONFLICTS):
            status = 409
        elif isinstance(exc, _NOT_FOUND):
            status = 404
        else:
            status = 422
        return JSONResponse(status_code=status,
                            content={"error": exc.code, "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/projects", status_code=201)
    def create_project(body: ProjectBody):
        pid = store.create_project(
            body.name, annotators=body.annotators,
            config=ProjectConfig(share_markables=body.share_markables,
                                 allow_span_edits_in_linking=body.allow_span_edits_in_linking))
        return {"project_id": pid}

    @app.get("/projects")
    def list_projects():
        return {"projects": [p.project_id for p in store.list_projects()]}

    @app.get("/projects/{p}")
    def get_project(p: str):
        info = store.project(p)
        docs = []
        for doc_id in info.documents:
            states = {a: {"stage": store.state(p, doc_id, a).stage.value,
                          "revision": store.state(p, doc_id, a).revision}
                      for a in info.annotators}
            docs.append({"doc_id": doc_id, "states": states})
        return {"project_id": info.project_id, "name": info.name,
                "annotators": list(info.annotators), "documents": docs}

    @app.post("/projects/{p}/docs", status_code=201)
    def add_doc(p: str, body: DocBody):
        doc_id = store.add_document(p, body.doc_id, text=body.text,
                                    sgml_source=body.sgml, annotator=body.annotator)
        return {"doc_id": doc_id}

    @app.get("/projects/{p}/docs/{d}")
    def get_doc(p: str, d: str, annotator: str = Query(...)):
        return _doc_json(store, p, d, annotator)

    @app.put("/projects/{p}/docs/{d}/markables")
    def put_markables(p: str, d: str, body: MarkablesBody, annotator: str = Query(...)):
        revision = store.save_markables(
            p, d, annotator,
            [m.model_dump() for m in body.markables], body.revision)
        return {"revision": revision}

    @app.put("/projects/{p}/docs/{d}/links")
    def put_links(p: str, d: str, body: LinksBody, annotator: str = Query(...)):
        revision = store.save_links(p, d, annotator, body.links, body.revision)
        return {"revision": revision,
                "chains": _chains_json(store.chains(p, d, annotator))}

    @app.post("/projects/{p}/docs/{d}/advance")
    def advance(p: str, d: str, annotator: str = Query(...)):
        stage = store.advance_stage(p, d, annotator)
        return {"stage": stage.value,
                "revision": store.state(p, d, annotator).revision}

    @app.get("/projects/{p}/docs/{d}/export")
    def export(p: str, d: str, annotator: str = Query(...)):
        return PlainTextResponse(store.export_sgml(p, d, annotator),
                                 media_type="text/sgml; charset=utf-8")

    @app.get("/projects/{p}/docs/{d}/table")
    def table(p: str, d: str, annotator: str = Query(...),
              include_singletons: bool = False):
        doc = store.annotated_document(p, d, annotator)
        return chain_table(doc, build_chains(doc),
                           include_singletons=include_singletons).to_dict()

    @app.get("/projects/{p}/docs/{d}/agreement")
    def agreement(p: str, d: str, a: str = Query(...), b: str = Query(...)):
        score_report, diff_report = store.compute_agreement(p, d, a, b)
        return {"score": score_report.to_dict(), "diff": diff_report.to_dict()}

    @app.put("/projects/{p}/docs/{d}/diff-labels")
    def put_diff_labels(p: str, d: str, a: str = Query(...), b: str = Query(...),
                        labels: dict[str, str] = Body(...)):
        store.set_diff_labels(p, d, a, b, labels)
        return {"labels": store.get_diff_labels(p, d, a, b)}

    @app.get("/projects/{p}/tally")
    def project_tally(p: str, a: str | None = None, b: str | None = None):
        return store.project_tally(p, a, b).to_dict()

    ui = Path(ui_dir) if ui_dir else None
    if ui and ui.is_dir():
        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse("/ui/")

    return app
