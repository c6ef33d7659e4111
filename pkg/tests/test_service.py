import threading

import pytest
from fastapi.testclient import TestClient

from corefkit import Category, DiffKind
from corefkit.errors import (
    ImportConflict,
    RevisionConflict,
    SpanError,
    UnknownId,
    UnknownMention,
    ValidationError,
    WrongStage,
)
from corefkit.store import ProjectConfig, ProjectStore, Stage
from corefkit.webapp import create_app

from conftest import FIXTURES

BULGER = (FIXTURES / "bulger.sgm").read_text(encoding="utf-8")
BULGER_CANONICAL = (FIXTURES / "bulger_canonical.sgm").read_text(encoding="utf-8")
BULGER_NOCHAIN = (FIXTURES / "bulger_nochain24.sgm").read_text(encoding="utf-8")
BASE_TEXT = ("A sister of alleged racketeer James J. (Whitey) Bulger has no legal "
             "basis to oppose government efforts to confiscate his lottery winnings. "
             "These winnings are estimated...\n")

SPANS = {
    "1": (30, 54),   # James J. (Whitey) Bulger
    "2": (117, 137),  # his lottery winnings
    "3": (117, 120),  # his
    "4": (139, 153),  # These winnings
}


def markables_payload():
    out = []
    for mid, (s, e) in sorted(SPANS.items()):
        item = {"id": mid, "start": s, "end": e}
        if mid == "2":
            item["min"] = "winnings"
        out.append(item)
    return out


@pytest.fixture()
def store(tmp_path):
    return ProjectStore(tmp_path / "projects")


class TestProjects:
    def test_create_with_five_documents(self, store):
        pid = store.create_project("Agreement Study", annotators=["ann1", "ann2"])
        for i in range(5):
            store.add_document(pid, f"doc{i}", text=f"Document {i} body.")
        info = store.project(pid)
        assert len(info.documents) == 5
        for doc_id in info.documents:
            assert store.state(pid, doc_id, "ann1").stage is Stage.MARKABLES

    def test_empty_project_is_valid(self, store):
        pid = store.create_project("empty")
        assert store.project(pid).documents == ()

    def test_duplicate_project(self, store):
        store.create_project("p1")
        with pytest.raises(ImportConflict):
            store.create_project("p1")

    def test_duplicate_doc_id(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "d", text="x")
        with pytest.raises(ImportConflict):
            store.add_document(pid, "d", text="y")

    def test_unknown_ids(self, store):
        with pytest.raises(UnknownId):
            store.project("ghost")
        pid = store.create_project("p")
        with pytest.raises(UnknownId):
            store.document(pid, "ghost")

    def test_sgml_import_seeds_done_state(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "bulger", sgml_source=BULGER, annotator="gold")
        state = store.state(pid, "bulger", "gold")
        assert state.stage is Stage.DONE
        assert len(state.markables) == 4
        assert set(state.links) == {("3", "1"), ("4", "2")}
        assert store.document(pid, "bulger").base_text == BASE_TEXT


class TestWorkflow:
    def setup_project(self, store):
        pid = store.create_project("p", annotators=["ann1"])
        store.add_document(pid, "bulger", text=BASE_TEXT)
        return pid

    def test_save_markables_bumps_revision(self, store):
        pid = self.setup_project(store)
        rev = store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        assert rev == 2

    def test_stale_revision_conflict(self, store):
        pid = self.setup_project(store)
        store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        with pytest.raises(RevisionConflict):
            store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)

    def test_crossing_spans_rejected(self, store):
        pid = self.setup_project(store)
        bad = [{"id": "a", "start": 0, "end": 10}, {"id": "b", "start": 5, "end": 15}]
        with pytest.raises(SpanError):
            store.save_markables(pid, "bulger", "ann1", bad, 1)

    def test_out_of_bounds_span_rejected(self, store):
        pid = self.setup_project(store)
        with pytest.raises(SpanError):
            store.save_markables(pid, "bulger", "ann1",
                                 [{"id": "a", "start": 0, "end": 10_000}], 1)

    def test_links_forbidden_in_markables_stage(self, store):
        pid = self.setup_project(store)
        with pytest.raises(WrongStage):
            store.save_links(pid, "bulger", "ann1", [("3", "1")], 1)

    def test_stage_progression_and_freeze(self, store):
        pid = self.setup_project(store)
        rev = store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        assert store.advance_stage(pid, "bulger", "ann1") is Stage.LINKING
        rev = store.state(pid, "bulger", "ann1").revision
        with pytest.raises(WrongStage):
            store.save_markables(pid, "bulger", "ann1", markables_payload(), rev)
        rev = store.save_links(pid, "bulger", "ann1", [("3", "1"), ("4", "2")], rev)
        assert store.advance_stage(pid, "bulger", "ann1") is Stage.DONE
        with pytest.raises(WrongStage):
            store.advance_stage(pid, "bulger", "ann1")
        with pytest.raises(WrongStage):
            store.save_links(pid, "bulger", "ann1", [], store.state(pid, "bulger", "ann1").revision)

    def test_links_recompute_chains(self, store):
        pid = self.setup_project(store)
        store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        store.advance_stage(pid, "bulger", "ann1")
        rev = store.state(pid, "bulger", "ann1").revision
        store.save_links(pid, "bulger", "ann1", [("3", "1"), ("4", "2")], rev)
        chains = store.chains(pid, "bulger", "ann1")
        assert {frozenset(c.member_ids) for c in chains.chains} == {
            frozenset({"1", "3"}), frozenset({"2", "4"})}

    def test_empty_links_all_singletons(self, store):
        pid = self.setup_project(store)
        store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        store.advance_stage(pid, "bulger", "ann1")
        chains = store.chains(pid, "bulger", "ann1")
        assert chains.chains == ()
        assert set(chains.singletons) == {"1", "2", "3", "4"}

    def test_link_to_unknown_markable(self, store):
        pid = self.setup_project(store)
        store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        store.advance_stage(pid, "bulger", "ann1")
        rev = store.state(pid, "bulger", "ann1").revision
        with pytest.raises(UnknownMention):
            store.save_links(pid, "bulger", "ann1", [("3", "99")], rev)

    def test_self_link_and_double_source_rejected(self, store):
        pid = self.setup_project(store)
        store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        store.advance_stage(pid, "bulger", "ann1")
        rev = store.state(pid, "bulger", "ann1").revision
        with pytest.raises(ValidationError):
            store.save_links(pid, "bulger", "ann1", [("3", "3")], rev)
        with pytest.raises(ValidationError):
            store.save_links(pid, "bulger", "ann1", [("3", "1"), ("3", "2")], rev)

    def test_span_edit_in_linking_behind_flag(self, store):
        pid = store.create_project("flagged", config=ProjectConfig(allow_span_edits_in_linking=True))
        store.add_document(pid, "bulger", text=BASE_TEXT)
        store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        store.advance_stage(pid, "bulger", "ann1")
        rev = store.state(pid, "bulger", "ann1").revision
        rev = store.save_links(pid, "bulger", "ann1", [("3", "1")], rev)
        new_rev = store.save_markables(pid, "bulger", "ann1", markables_payload(), rev)
        assert new_rev == rev + 1
        # surviving links are kept across the span edit
        assert store.state(pid, "bulger", "ann1").links == (("3", "1"),)


class TestExport:
    def test_full_flow_reproduces_canonical_sgml(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "bulger", text=BASE_TEXT)
        store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        store.advance_stage(pid, "bulger", "ann1")
        rev = store.state(pid, "bulger", "ann1").revision
        store.save_links(pid, "bulger", "ann1", [("3", "1"), ("4", "2")], rev)
        store.advance_stage(pid, "bulger", "ann1")
        assert store.export_sgml(pid, "bulger", "ann1") == BULGER_CANONICAL

    def test_markables_stage_export_has_no_refs(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "bulger", text=BASE_TEXT)
        store.save_markables(pid, "bulger", "ann1", markables_payload(), 1)
        out = store.export_sgml(pid, "bulger", "ann1")
        assert "REF=" not in out
        assert out.count("<COREF ") == 4

    def test_export_import_fixpoint(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "b1", sgml_source=BULGER, annotator="gold")
        exported = store.export_sgml(pid, "b1", "gold")
        store.add_document(pid, "b2", sgml_source=exported, annotator="gold")
        assert store.export_sgml(pid, "b2", "gold") == exported


class TestAgreement:
    def seed_pair(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "bulger", sgml_source=BULGER, annotator="ann1")
        # second annotator: same markables, chain {2,4} never linked
        doc_id = "bulger"
        state = store.state(pid, doc_id, "ann1")
        store.save_markables(pid, doc_id, "ann2",
                             [{"id": m.id, "start": m.start, "end": m.end,
                               "min": m.min_head} for m in state.markables], 1)
        store.advance_stage(pid, doc_id, "ann2")
        rev = store.state(pid, doc_id, "ann2").revision
        store.save_links(pid, doc_id, "ann2", [("3", "1")], rev)
        store.advance_stage(pid, doc_id, "ann2")
        return pid, doc_id

    def test_identical_annotations_score_one(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "bulger", sgml_source=BULGER, annotator="a1")
        store.add_document(pid, "bulger2", sgml_source=BULGER, annotator="a1")
        report, diff_report = store.compute_agreement(pid, "bulger", "a1", "a1")
        assert (report.recall, report.precision, report.f_measure) == (1, 1, 1)
        assert diff_report.discrepancies == ()

    def test_missing_chain_halves_recall(self, store):
        pid, doc_id = self.seed_pair(store)
        report, diff_report = store.compute_agreement(pid, doc_id, "ann1", "ann2")
        assert report.recall == 0.5
        assert report.precision == 1
        kinds = [d.kind for d in diff_report.discrepancies]
        assert kinds == [DiffKind.CHAIN_MISSING_IN_B]
        assert diff_report.discrepancies[0].auto_category is Category.MISSING

    def test_agreement_requires_done(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "bulger", sgml_source=BULGER, annotator="ann1")
        store.save_markables(pid, "bulger", "late", markables_payload(), 1)
        with pytest.raises(WrongStage):
            store.compute_agreement(pid, "bulger", "ann1", "late")

    def test_labels_persist_into_tally(self, store):
        pid, doc_id = self.seed_pair(store)
        _, diff_report = store.compute_agreement(pid, doc_id, "ann1", "ann2")
        key = diff_report.discrepancies[0].key
        store.set_diff_labels(pid, doc_id, "ann1", "ann2", {key: "Hard"})
        tally = store.project_tally(pid)
        assert tally.sum_row.count(Category.HARD) == 1
        assert tally.grand_total == 1

    def test_unknown_label_key_rejected(self, store):
        pid, doc_id = self.seed_pair(store)
        with pytest.raises(ValidationError):
            store.set_diff_labels(pid, doc_id, "ann1", "ann2", {"bogus": "Hard"})

    def test_tally_requires_pair_when_ambiguous(self, store):
        pid = store.create_project("p", annotators=["a", "b", "c"])
        with pytest.raises(ValidationError):
            store.project_tally(pid)


class TestDurability:
    def test_restart_preserves_everything(self, tmp_path):
        root = tmp_path / "projects"
        store = ProjectStore(root)
        pid = store.create_project("p", annotators=["ann1", "ann2"])
        store.add_document(pid, "bulger", sgml_source=BULGER, annotator="ann1")
        store.add_document(pid, "second", text="Another document.\n\nWith two paragraphs.")
        store.save_markables(pid, "second", "ann2",
                             [{"id": "m1", "start": 0, "end": 7}], 1)
        _, diff_report = store.compute_agreement(pid, "bulger", "ann1", "ann1")
        store.add_document(pid, "bulger2", sgml_source=BULGER_NOCHAIN, annotator="ann2")

        reloaded = ProjectStore(root)
        assert reloaded.project(pid).annotators == ("ann1", "ann2")
        assert reloaded.project(pid).documents == ("bulger", "second", "bulger2")
        for doc_id in ("bulger", "second", "bulger2"):
            for ann in ("ann1", "ann2"):
                assert reloaded.state(pid, doc_id, ann) == store.state(pid, doc_id, ann)
        assert reloaded.document(pid, "bulger").base_text == BASE_TEXT

    def test_labels_survive_restart(self, tmp_path):
        root = tmp_path / "projects"
        store = ProjectStore(root)
        pid = store.create_project("p")
        store.add_document(pid, "k", sgml_source=BULGER, annotator="a1")
        store.add_document(pid, "k2", sgml_source=BULGER_NOCHAIN, annotator="a1")
        # both states live on the same doc for a real pair
        store.add_document(pid, "pairdoc", sgml_source=BULGER, annotator="x")
        state = store.state(pid, "pairdoc", "x")
        store.save_markables(pid, "pairdoc", "y",
                             [{"id": m.id, "start": m.start, "end": m.end,
                               "min": m.min_head} for m in state.markables], 1)
        store.advance_stage(pid, "pairdoc", "y")
        rev = store.state(pid, "pairdoc", "y").revision
        store.save_links(pid, "pairdoc", "y", [("3", "1")], rev)
        store.advance_stage(pid, "pairdoc", "y")
        _, diff_report = store.compute_agreement(pid, "pairdoc", "x", "y")
        key = diff_report.discrepancies[0].key
        store.set_diff_labels(pid, "pairdoc", "x", "y", {key: "Hard"})

        reloaded = ProjectStore(root)
        assert reloaded.get_diff_labels(pid, "pairdoc", "x", "y") == {key: "Hard"}
        _, rediff = reloaded.compute_agreement(pid, "pairdoc", "x", "y")
        assert rediff.discrepancies[0].category is Category.HARD


class TestConcurrency:
    def test_exactly_one_of_two_conflicting_saves_wins(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "d", text=BASE_TEXT)
        for trial in range(25):
            state = store.state(pid, "d", "ann1")
            rev = state.revision
            results = []
            barrier = threading.Barrier(2)

            def attempt(payload):
                barrier.wait()
                try:
                    results.append(store.save_markables(pid, "d", "ann1", payload, rev))
                except RevisionConflict:
                    results.append("conflict")

            t1 = threading.Thread(target=attempt, args=([{"id": "a", "start": 0, "end": 3}],))
            t2 = threading.Thread(target=attempt, args=([{"id": "b", "start": 5, "end": 9}],))
            t1.start(); t2.start(); t1.join(); t2.join()
            assert sorted(results, key=str) == [rev + 1, "conflict"]


class TestSharedMarkables:
    def test_isolated_by_default(self, store):
        pid = store.create_project("p")
        store.add_document(pid, "d", text=BASE_TEXT)
        store.save_markables(pid, "d", "ann1", markables_payload(), 1)
        assert store.shared_markables(pid, "d", "ann2") == ()

    def test_shared_when_configured(self, tmp_path):
        store = ProjectStore(tmp_path / "p")
        pid = store.create_project("p", config=ProjectConfig(share_markables=True))
        store.add_document(pid, "d", text=BASE_TEXT)
        store.save_markables(pid, "d", "ann1", markables_payload(), 1)
        shared = store.shared_markables(pid, "d", "ann2")
        assert {m.id for m in shared} == {"1", "2", "3", "4"}


class TestHttpApi:
    @pytest.fixture()
    def client(self, tmp_path):
        app = create_app(tmp_path / "projects")
        with TestClient(app) as c:
            yield c

    def test_full_annotation_flow(self, client):
        r = client.post("/projects", json={"name": "study", "annotators": ["ann1"]})
        assert r.status_code == 201
        pid = r.json()["project_id"]

        r = client.post(f"/projects/{pid}/docs", json={"doc_id": "bulger", "text": BASE_TEXT})
        assert r.status_code == 201

        r = client.get(f"/projects/{pid}/docs/bulger", params={"annotator": "ann1"})
        body = r.json()
        assert body["stage"] == "markables" and body["revision"] == 1
        assert body["base_text"] == BASE_TEXT
        assert body["zones"][0]["ordinal"] == 1

        r = client.put(f"/projects/{pid}/docs/bulger/markables",
                       params={"annotator": "ann1"},
                       json={"markables": markables_payload(), "revision": 1})
        assert r.status_code == 200 and r.json()["revision"] == 2

        # stale revision loses
        r = client.put(f"/projects/{pid}/docs/bulger/markables",
                       params={"annotator": "ann1"},
                       json={"markables": markables_payload(), "revision": 1})
        assert r.status_code == 409
        assert r.json()["error"] == "RevisionConflict"

        # links can't be written yet
        r = client.put(f"/projects/{pid}/docs/bulger/links",
                       params={"annotator": "ann1"},
                       json={"links": [["3", "1"]], "revision": 2})
        assert r.status_code == 409
        assert r.json()["error"] == "WrongStage"

        r = client.post(f"/projects/{pid}/docs/bulger/advance", params={"annotator": "ann1"})
        assert r.json()["stage"] == "linking"
        rev = r.json()["revision"]

        r = client.put(f"/projects/{pid}/docs/bulger/links",
                       params={"annotator": "ann1"},
                       json={"links": [["3", "1"], ["4", "2"]], "revision": rev})
        assert r.status_code == 200
        members = {frozenset(c["members"]) for c in r.json()["chains"]}
        assert members == {frozenset({"1", "3"}), frozenset({"2", "4"})}

        r = client.post(f"/projects/{pid}/docs/bulger/advance", params={"annotator": "ann1"})
        assert r.json()["stage"] == "done"

        r = client.get(f"/projects/{pid}/docs/bulger/export", params={"annotator": "ann1"})
        assert r.headers["content-type"].startswith("text/sgml")
        assert r.text == BULGER_CANONICAL

    def test_agreement_labels_and_tally(self, client):
        client.post("/projects", json={"name": "study"})
        client.post("/projects/study/docs",
                    json={"doc_id": "bulger", "sgml": BULGER, "annotator": "ann1"})
        client.post("/projects/study/docs",
                    json={"doc_id": "ignored", "sgml": BULGER_NOCHAIN, "annotator": "ann2"})
        # ann2 annotates bulger too, missing chain {2,4}
        r = client.get("/projects/study/docs/bulger", params={"annotator": "ann1"})
        markables = r.json()["markables"]
        client.put("/projects/study/docs/bulger/markables",
                   params={"annotator": "ann2"},
                   json={"markables": markables, "revision": 1})
        client.post("/projects/study/docs/bulger/advance", params={"annotator": "ann2"})
        rev = client.get("/projects/study/docs/bulger",
                         params={"annotator": "ann2"}).json()["revision"]
        client.put("/projects/study/docs/bulger/links",
                   params={"annotator": "ann2"},
                   json={"links": [["3", "1"]], "revision": rev})
        client.post("/projects/study/docs/bulger/advance", params={"annotator": "ann2"})

        r = client.get("/projects/study/docs/bulger/agreement",
                       params={"a": "ann1", "b": "ann2"})
        assert r.status_code == 200
        body = r.json()
        assert body["score"]["recall"] == 0.5
        assert body["score"]["precision"] == 1.0
        assert len(body["diff"]["discrepancies"]) == 1
        key = body["diff"]["discrepancies"][0]["key"]

        r = client.put("/projects/study/docs/bulger/diff-labels",
                       params={"a": "ann1", "b": "ann2"}, json={key: "Hard"})
        assert r.status_code == 200

        r = client.get("/projects/study/tally", params={"a": "ann1", "b": "ann2"})
        assert r.status_code == 200
        tally = r.json()
        assert tally["sum"]["Hard"] == 1
        assert tally["grand_total"] == 1

    def test_error_codes(self, client):
        assert client.get("/projects/nope").status_code == 404
        client.post("/projects", json={"name": "p"})
        assert client.post("/projects", json={"name": "p"}).status_code == 409
        r = client.post("/projects/p/docs", json={"doc_id": "d!", "text": "x"})
        assert r.status_code == 422
        r = client.post("/projects/p/docs", json={"doc_id": "d"})
        assert r.status_code == 422
        client.post("/projects/p/docs", json={"doc_id": "d", "text": "hello world"})
        r = client.put("/projects/p/docs/d/markables", params={"annotator": "a"},
                       json={"markables": [{"id": "m", "start": 0, "end": 99}],
                             "revision": 1})
        assert r.status_code == 422
        assert r.json()["error"] == "SpanError"
        assert client.get("/projects/p/docs/ghost",
                          params={"annotator": "a"}).status_code == 404
        r = client.get("/projects/p/docs/d/agreement", params={"a": "x", "b": "y"})
        assert r.status_code == 409  # neither annotator is done

    def test_parse_error_on_bad_sgml(self, client):
        client.post("/projects", json={"name": "p"})
        r = client.post("/projects/p/docs",
                        json={"doc_id": "d", "sgml": '<COREF ID="1">never closed'})
        assert r.status_code == 422
        assert r.json()["error"] == "ParseError"
