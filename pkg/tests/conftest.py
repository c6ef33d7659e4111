from pathlib import Path

import pytest

from corefkit import parse_muc_sgml

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def bulger_raw() -> str:
    return (FIXTURES / "bulger.sgm").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def bulger_canonical() -> str:
    return (FIXTURES / "bulger_canonical.sgm").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def bulger_doc(bulger_raw):
    return parse_muc_sgml(bulger_raw, doc_id="bulger")


@pytest.fixture(scope="session")
def headline_doc():
    raw = (FIXTURES / "whitey_hl.sgm").read_text(encoding="utf-8")
    return parse_muc_sgml(raw, doc_id="whitey_hl")


def fixture_corpus() -> list[Path]:
    return sorted(FIXTURES.glob("*.sgm"))
